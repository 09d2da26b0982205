//! Brute-force checks at the operator level.
//!
//! The system variables are instantiated as the generator matrices acting
//! on `C^n`, the QSDE increment is expanded with the quantum Ito table, and
//! the integrands of `d[x, x^T] - 2i Theta^-(dx)` and
//! `d{x, x^T} - 2 Theta^+(dx)` are formed entry by entry. None of this goes
//! through the Theta-calculus identities the checkers rely on.
//!
//! The moment flow takes expectations with the field in the vacuum state,
//! so martingale increments drop out. The checkers never use it.

use alloc::format;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::algebra::{GellMannBasis, Tensor3};
use crate::error::{shape_error, Error, Result};
use crate::linalg::{c, spectral_norm, to_complex, CMat, CVec, I};
use crate::model::StateSpaceModel;
use crate::theta::ThetaContext;

/// `rows x cols` array of `n x n` complex matrices, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorMatrix {
    rows: usize,
    cols: usize,
    n: usize,
    entries: Vec<CMat>,
}

impl OperatorMatrix {
    pub fn zeros(rows: usize, cols: usize, n: usize) -> Self {
        OperatorMatrix {
            rows,
            cols,
            n,
            entries: alloc::vec![CMat::zeros(n, n); rows * cols],
        }
    }

    pub fn from_fn(rows: usize, cols: usize, n: usize, mut f: impl FnMut(usize, usize) -> CMat) -> Result<Self> {
        let mut entries = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                let e = f(i, j);
                if e.shape() != (n, n) {
                    return Err(shape_error(
                        format!("operator entry ({i},{j})"),
                        format!("{n}x{n}"),
                        format!("{}x{}", e.nrows(), e.ncols()),
                    ));
                }
                entries.push(e);
            }
        }
        Ok(OperatorMatrix { rows, cols, n, entries })
    }

    /// Column of the `s` generators.
    pub fn generators(basis: &GellMannBasis) -> Self {
        OperatorMatrix {
            rows: basis.s(),
            cols: 1,
            n: basis.n(),
            entries: basis.generators().to_vec(),
        }
    }

    /// `(A x)_i = sum_l A_il x_l` for a scalar matrix `A` and operator
    /// column `x`, plus `offset_i` times the identity.
    pub fn affine_column(a: &CMat, x: &OperatorMatrix, offset: Option<&CVec>) -> Result<Self> {
        if x.cols != 1 || a.ncols() != x.rows {
            return Err(shape_error(
                "operator column",
                format!("{}x1", a.ncols()),
                format!("{}x{}", x.rows, x.cols),
            ));
        }
        let id = CMat::identity(x.n, x.n);
        let mut entries = Vec::with_capacity(a.nrows());
        for i in 0..a.nrows() {
            let mut e = match offset {
                Some(v) => &id * v[i],
                None => CMat::zeros(x.n, x.n),
            };
            for (l, xl) in x.entries.iter().enumerate() {
                let w = a[(i, l)];
                if w != Complex64::new(0.0, 0.0) {
                    e += xl * w;
                }
            }
            entries.push(e);
        }
        Ok(OperatorMatrix {
            rows: a.nrows(),
            cols: 1,
            n: x.n,
            entries,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    /// Side of every operator entry.
    pub fn entry_dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> &CMat {
        &self.entries[i * self.cols + j]
    }

    pub fn transpose(&self) -> Self {
        let mut entries = Vec::with_capacity(self.entries.len());
        for j in 0..self.cols {
            for i in 0..self.rows {
                entries.push(self.get(i, j).clone());
            }
        }
        OperatorMatrix {
            rows: self.cols,
            cols: self.rows,
            n: self.n,
            entries,
        }
    }

    /// Largest spectral norm over all entries, with its `(row, col)`.
    pub fn max_entry_norm(&self) -> (f64, (usize, usize)) {
        let mut best = (0.0, (0, 0));
        for (p, e) in self.entries.iter().enumerate() {
            let v = spectral_norm(e);
            if v > best.0 || v.is_nan() {
                best = (v, (p / self.cols, p % self.cols));
                if v.is_nan() {
                    break;
                }
            }
        }
        best
    }

    fn zip(&self, other: &OperatorMatrix, f: impl Fn(&CMat, &CMat) -> CMat) -> Result<Self> {
        if (self.rows, self.cols, self.n) != (other.rows, other.cols, other.n) {
            return Err(shape_error(
                "operator matrix",
                format!("{}x{} of {}x{}", self.rows, self.cols, self.n, self.n),
                format!("{}x{} of {}x{}", other.rows, other.cols, other.n, other.n),
            ));
        }
        Ok(OperatorMatrix {
            rows: self.rows,
            cols: self.cols,
            n: self.n,
            entries: self.entries.iter().zip(&other.entries).map(|(a, b)| f(a, b)).collect(),
        })
    }

    pub fn sub(&self, other: &OperatorMatrix) -> Result<Self> {
        self.zip(other, |a, b| a - b)
    }

    pub fn add(&self, other: &OperatorMatrix) -> Result<Self> {
        self.zip(other, |a, b| a + b)
    }

    pub fn scale(&self, z: Complex64) -> Self {
        OperatorMatrix {
            rows: self.rows,
            cols: self.cols,
            n: self.n,
            entries: self.entries.iter().map(|e| e * z).collect(),
        }
    }

    /// `sum_k T_ijk x_k` for an operator column `x` of length `s`.
    fn contract(t: &Tensor3, x: &OperatorMatrix) -> Self {
        let s = t.dim();
        let mut entries = Vec::with_capacity(s * s);
        for i in 0..s {
            for j in 0..s {
                let mut e = CMat::zeros(x.n, x.n);
                for (k, &w) in t.fiber(i, j).iter().enumerate() {
                    if w != 0.0 {
                        e += &x.entries[k] * c(w);
                    }
                }
                entries.push(e);
            }
        }
        OperatorMatrix {
            rows: s,
            cols: s,
            n: x.n,
            entries,
        }
    }

    /// `Theta^-` applied to an operator column.
    pub fn theta_minus(ctx: &ThetaContext<'_>, x: &OperatorMatrix) -> Result<Self> {
        Self::check_column(ctx, x)?;
        Ok(Self::contract(ctx.tensors().f(), x))
    }

    /// `Theta^+` applied to an operator column.
    pub fn theta_plus(ctx: &ThetaContext<'_>, x: &OperatorMatrix) -> Result<Self> {
        Self::check_column(ctx, x)?;
        Ok(Self::contract(ctx.tensors().d(), x))
    }

    fn check_column(ctx: &ThetaContext<'_>, x: &OperatorMatrix) -> Result<()> {
        if x.cols != 1 || x.rows != ctx.s() {
            return Err(shape_error(
                "operator column",
                format!("{}x1", ctx.s()),
                format!("{}x{}", x.rows, x.cols),
            ));
        }
        Ok(())
    }
}

fn outer(x: &OperatorMatrix, y: &OperatorMatrix, f: impl Fn(&CMat, &CMat) -> CMat) -> Result<OperatorMatrix> {
    if x.cols != 1 || y.cols != 1 {
        return Err(Error::InvalidArgument(
            "bracket arguments must be operator columns".into(),
        ));
    }
    if x.n != y.n {
        return Err(shape_error(
            "operator entries",
            format!("{}x{}", x.n, x.n),
            format!("{}x{}", y.n, y.n),
        ));
    }
    OperatorMatrix::from_fn(x.rows, y.rows, x.n, |i, j| f(&x.entries[i], &y.entries[j]))
}

/// `[x, y^T] = x y^T - (y x^T)^T`, i.e. entry `(i, j)` is `x_i y_j - y_j x_i`.
pub fn opmat_bracket(x: &OperatorMatrix, y: &OperatorMatrix) -> Result<OperatorMatrix> {
    outer(x, y, |a, b| a * b - b * a)
}

/// `{x, y^T} = x y^T + (y x^T)^T`.
pub fn opmat_anti_bracket(x: &OperatorMatrix, y: &OperatorMatrix) -> Result<OperatorMatrix> {
    outer(x, y, |a, b| a * b + b * a)
}

/// Residuals of `[x, x^T] = 2i Theta^-(x)` and
/// `{x, x^T} = (4/n) I + 2 Theta^+(x)` for the generator column: largest
/// entry spectral norm of each difference.
pub fn generator_relation_residuals(basis: &GellMannBasis, ctx: &ThetaContext<'_>) -> Result<(f64, f64)> {
    let x = OperatorMatrix::generators(basis);
    let s = basis.s();
    let n = basis.n();
    let comm = opmat_bracket(&x, &x)?.sub(&OperatorMatrix::theta_minus(ctx, &x)?.scale(I * 2.0))?;
    let scalar = OperatorMatrix::from_fn(s, s, n, |i, j| {
        if i == j {
            CMat::identity(n, n) * c(4.0 / n as f64)
        } else {
            CMat::zeros(n, n)
        }
    })?;
    let anti = opmat_anti_bracket(&x, &x)?
        .sub(&scalar)?
        .sub(&OperatorMatrix::theta_plus(ctx, &x)?.scale(c(2.0)))?;
    Ok((comm.max_entry_norm().0, anti.max_entry_norm().0))
}

/// Which increment an integrand multiplies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Increment {
    Dt,
    /// `dW1` of channel `k`.
    W1(usize),
    /// `dW2` of channel `k`.
    W2(usize),
}

impl core::fmt::Display for Increment {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            Increment::Dt => f.write_str("dt"),
            Increment::W1(k) => write!(f, "dW1[{k}]"),
            Increment::W2(k) => write!(f, "dW2[{k}]"),
        }
    }
}

/// Integrands multiplying one increment.
#[derive(Debug, Clone, PartialEq)]
pub struct IntegrandTerm {
    pub increment: Increment,
    /// Coefficient of the increment in `d[x, x^T] - 2i Theta^-(dx)`.
    pub commutator: OperatorMatrix,
    /// Coefficient of the increment in `d{x, x^T} - 2 Theta^+(dx)`.
    pub anticommutator: OperatorMatrix,
}

impl IntegrandTerm {
    pub fn max_norm(&self) -> f64 {
        self.commutator
            .max_entry_norm()
            .0
            .max(self.anticommutator.max_entry_norm().0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ItoIntegrands {
    /// `dt` first, then `dW1`, `dW2` for each channel in order.
    pub terms: Vec<IntegrandTerm>,
}

impl ItoIntegrands {
    pub fn term(&self, increment: Increment) -> Option<&IntegrandTerm> {
        self.terms.iter().find(|t| t.increment == increment)
    }

    /// Largest entry spectral norm over every integrand.
    pub fn max_norm(&self) -> f64 {
        self.terms.iter().map(IntegrandTerm::max_norm).fold(0.0, f64::max)
    }

    /// Whether every entry of every integrand is below `tol` in operator norm.
    pub fn vanish(&self, tol: f64) -> bool {
        self.max_norm() < tol
    }
}

/// Expands `d(x x^T) = (dx) x^T + x (dx)^T + (dx)(dx)^T` with `x` the
/// generator column and
///
/// ```text
/// dx = A0 dt + A x dt + sum_k (B1k x dW1k + B2k x dW2k)
/// ```
///
/// using `dW1 dW1 = dW2 dW2 = dt`, `dW1 dW2 = i dt`, `dW2 dW1 = -i dt` per
/// channel and zero across channels, then collects the coefficient of each
/// increment in both relation defects.
pub fn ito_integrands(basis: &GellMannBasis, ctx: &ThetaContext<'_>, m: &StateSpaceModel) -> Result<ItoIntegrands> {
    m.validate()?;
    if m.n != basis.n() || ctx.n() != basis.n() {
        return Err(shape_error("n", format!("{}", basis.n()), format!("{}", m.n)));
    }
    let x = OperatorMatrix::generators(basis);
    let s = basis.s();
    let n = basis.n();

    // D_ij = c_i x_j + x_i c_j for the increment's coefficient column c.
    let product_rule = |col: &OperatorMatrix| {
        OperatorMatrix::from_fn(s, s, n, |i, j| {
            col.get(i, 0) * x.get(j, 0) + x.get(i, 0) * col.get(j, 0)
        })
    };
    let defects = |d: OperatorMatrix, col: &OperatorMatrix| -> Result<(OperatorMatrix, OperatorMatrix)> {
        let dt = d.transpose();
        let comm = d
            .sub(&dt)?
            .sub(&OperatorMatrix::theta_minus(ctx, col)?.scale(I * 2.0))?;
        let anti = d.add(&dt)?.sub(&OperatorMatrix::theta_plus(ctx, col)?.scale(c(2.0)))?;
        Ok((comm, anti))
    };

    let a0 = m.a0.map(c);
    let drift = OperatorMatrix::affine_column(&to_complex(&m.a), &x, Some(&a0))?;
    let mut d_dt = product_rule(&drift)?;
    let mut noise = Vec::with_capacity(m.nw);
    for k in 0..m.nw {
        let u = OperatorMatrix::affine_column(&to_complex(&m.b1[k]), &x, None)?;
        let v = OperatorMatrix::affine_column(&to_complex(&m.b2[k]), &x, None)?;
        let ito = OperatorMatrix::from_fn(s, s, n, |i, j| {
            let (ui, uj, vi, vj) = (u.get(i, 0), u.get(j, 0), v.get(i, 0), v.get(j, 0));
            ui * uj + (ui * vj) * I - (vi * uj) * I + vi * vj
        })?;
        d_dt = d_dt.add(&ito)?;
        noise.push((u, v));
    }

    let mut terms = Vec::with_capacity(1 + 2 * m.nw);
    let (comm, anti) = defects(d_dt, &drift)?;
    terms.push(IntegrandTerm {
        increment: Increment::Dt,
        commutator: comm,
        anticommutator: anti,
    });
    for (k, (u, v)) in noise.iter().enumerate() {
        for (inc, col) in [(Increment::W1(k), u), (Increment::W2(k), v)] {
            let (comm, anti) = defects(product_rule(col)?, col)?;
            terms.push(IntegrandTerm {
                increment: inc,
                commutator: comm,
                anticommutator: anti,
            });
        }
    }
    Ok(ItoIntegrands { terms })
}

/// First and second moments `<x>` and `<x x^T>` at time `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentState {
    pub t: f64,
    pub mean: CVec,
    pub second: CMat,
}

impl MomentState {
    /// `(r_ccr, r_accr)`: Frobenius norms of `M - M^T - 2i Theta^-(m)` and
    /// `M + M^T - (4/n) I - 2 Theta^+(m)`.
    pub fn residuals(&self, ctx: &ThetaContext<'_>) -> (f64, f64) {
        let s = ctx.s();
        let mt = self.second.transpose();
        let ccr = &self.second - &mt - ctx.tm(&self.mean) * (I * 2.0);
        let accr = &self.second + &mt - CMat::identity(s, s) * c(4.0 / ctx.n() as f64) - ctx.tp(&self.mean) * c(2.0);
        (ccr.norm(), accr.norm())
    }

    fn is_finite(&self) -> bool {
        self.mean
            .iter()
            .chain(self.second.iter())
            .all(|z| z.re.is_finite() && z.im.is_finite())
    }
}

/// Moments of the generators in state `rho0`:
/// `m_i = Tr(rho0 l_i)` and `M_ij = (2/n) delta_ij + sum_k (i f_ijk + d_ijk) m_k`.
///
/// `rho0` must be Hermitian, of unit trace and positive semidefinite, each
/// to within `tol`.
pub fn init_moments(basis: &GellMannBasis, ctx: &ThetaContext<'_>, rho0: &CMat, tol: f64) -> Result<MomentState> {
    let n = basis.n();
    if rho0.shape() != (n, n) {
        return Err(Error::InvalidDensityMatrix(format!(
            "expected {n}x{n}, found {}x{}",
            rho0.nrows(),
            rho0.ncols()
        )));
    }
    if rho0.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::InvalidDensityMatrix("non-finite entries".into()));
    }
    let herm = (rho0 - rho0.adjoint()).camax();
    if herm > tol {
        return Err(Error::InvalidDensityMatrix(format!(
            "not Hermitian (deviation {herm:e})"
        )));
    }
    let tr = rho0.trace();
    if (tr - c(1.0)).norm() > tol {
        return Err(Error::InvalidDensityMatrix(format!("trace is {tr}, not 1")));
    }
    let sym = (rho0 + rho0.adjoint()) * c(0.5);
    let min_eig = sym
        .symmetric_eigenvalues()
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min);
    if min_eig < -tol {
        return Err(Error::InvalidDensityMatrix(format!(
            "not positive semidefinite (eigenvalue {min_eig:e})"
        )));
    }
    let mean = CVec::from_iterator(basis.s(), basis.generators().iter().map(|g| (rho0 * g).trace()));
    let second = CMat::identity(basis.s(), basis.s()) * c(2.0 / n as f64) + ctx.tm(&mean) * I + ctx.tp(&mean);
    Ok(MomentState { t: 0.0, mean, second })
}

/// One recorded step of a moment trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryPoint {
    pub t: f64,
    pub r_ccr: f64,
    pub r_accr: f64,
    pub mean: CVec,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    /// Initial state first, then one point per accepted step.
    pub points: Vec<TrajectoryPoint>,
    pub final_state: MomentState,
}

impl Trajectory {
    pub fn max_residual(&self) -> f64 {
        self.points.iter().map(|p| p.r_ccr.max(p.r_accr)).fold(0.0, f64::max)
    }
}

struct MomentField {
    a0: CVec,
    a: CMat,
    at: CMat,
    b: Vec<(CMat, CMat, CMat, CMat)>,
}

impl MomentField {
    fn new(m: &StateSpaceModel) -> Self {
        let b = (0..m.nw)
            .map(|k| {
                let b1 = to_complex(&m.b1[k]);
                let b2 = to_complex(&m.b2[k]);
                let (b1t, b2t) = (b1.transpose(), b2.transpose());
                (b1, b1t, b2, b2t)
            })
            .collect();
        let a = to_complex(&m.a);
        MomentField {
            a0: m.a0.map(c),
            at: a.transpose(),
            a,
            b,
        }
    }

    /// `dm/dt = A0 + A m`,
    /// `dM/dt = A0 m^T + m A0^T + A M + M A^T
    ///          + sum_k (B1 M B1^T + i B1 M B2^T - i B2 M B1^T + B2 M B2^T)`.
    fn rate(&self, mean: &CVec, second: &CMat) -> (CVec, CMat) {
        let dm = &self.a0 + &self.a * mean;
        let mut dmm = &self.a0 * mean.transpose() + mean * self.a0.transpose() + &self.a * second + second * &self.at;
        for (b1, b1t, b2, b2t) in &self.b {
            let b1m = b1 * second;
            let b2m = b2 * second;
            dmm += &b1m * b1t + (&b1m * b2t) * I - (&b2m * b1t) * I + &b2m * b2t;
        }
        (dm, dmm)
    }
}

/// Classical fixed-step RK4 on the vacuum moment equations from `s0.t` to
/// `t_end`. The last step is shortened to land on `t_end`.
///
/// A non-finite state aborts with [`Error::Diverged`] carrying the last
/// finite one.
pub fn integrate_moments(
    ctx: &ThetaContext<'_>,
    m: &StateSpaceModel,
    s0: &MomentState,
    t_end: f64,
    h: f64,
) -> Result<Trajectory> {
    m.validate()?;
    let s = ctx.s();
    if m.n != ctx.n() {
        return Err(shape_error("n", format!("{}", ctx.n()), format!("{}", m.n)));
    }
    if s0.mean.len() != s || s0.second.shape() != (s, s) {
        return Err(shape_error(
            "moment state",
            format!("{s} and {s}x{s}"),
            format!("{} and {}x{}", s0.mean.len(), s0.second.nrows(), s0.second.ncols()),
        ));
    }
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::InvalidArgument(format!("step size must be positive, got {h}")));
    }
    if !(t_end >= s0.t && t_end.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "t_end = {t_end} precedes t0 = {}",
            s0.t
        )));
    }

    let field = MomentField::new(m);
    let record = |st: &MomentState| {
        let (r_ccr, r_accr) = st.residuals(ctx);
        TrajectoryPoint {
            t: st.t,
            r_ccr,
            r_accr,
            mean: st.mean.clone(),
        }
    };
    let span = t_end - s0.t;
    let steps = {
        let q = span / h;
        // Tolerate representation error in t_end / h before adding a sliver step.
        let r = libm::round(q);
        if (q - r).abs() <= 1e-9 * q.max(1.0) {
            r as usize
        } else {
            libm::ceil(q) as usize
        }
    };

    let mut points = Vec::with_capacity(steps + 1);
    points.push(record(s0));
    let mut state = s0.clone();
    for step in 1..=steps {
        let t_next = if step == steps { t_end } else { s0.t + step as f64 * h };
        let dt = t_next - state.t;
        let (m0, q0) = (&state.mean, &state.second);
        let (k1m, k1q) = field.rate(m0, q0);
        let half = c(dt / 2.0);
        let (k2m, k2q) = field.rate(&(m0 + &k1m * half), &(q0 + &k1q * half));
        let (k3m, k3q) = field.rate(&(m0 + &k2m * half), &(q0 + &k2q * half));
        let (k4m, k4q) = field.rate(&(m0 + &k3m * c(dt)), &(q0 + &k3q * c(dt)));
        let w = c(dt / 6.0);
        let next = MomentState {
            t: t_next,
            mean: m0 + (k1m + (k2m + k3m) * c(2.0) + k4m) * w,
            second: q0 + (k1q + (k2q + k3q) * c(2.0) + k4q) * w,
        };
        if !next.is_finite() {
            return Err(Error::Diverged {
                last_valid: alloc::boxed::Box::new(state),
            });
        }
        state = next;
        points.push(record(&state));
    }
    Ok(Trajectory {
        points,
        final_state: state,
    })
}
