//! Bilinear quantum stochastic state-space models in quadrature form,
//!
//! ```text
//! dx = A0 dt + A x dt + sum_k (B1k x dW1k + B2k x dW2k)
//! dY = (C1; C2) x dt + (dW1; dW2)
//! ```
//!
//! and their `(S, L, H)` parametrization with `S = I`, `H = alpha . x`,
//! `L = Lambda x`.
//!
//! The pre-quadrature coefficients `Bbar1k`, `Bbar2k` are not stored; they
//! convert as `B1k = Bbar1k + Bbar2k`, `B2k = i (Bbar2k - Bbar1k)`
//! (see [`StateSpaceModel::quadrature_from_bar`]).

use alloc::format;
use alloc::vec::Vec;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{shape_error, Error, Result};
use crate::linalg::{c, max_imag, relative_residual, to_complex, vec, CMat, CVec, RMat, RVec, I};
use crate::report::{all_pass, ConditionResult};
use crate::theta::ThetaContext;

/// Imaginary parts below this (relative to the matrix scale) are rounding
/// residue from synthesis and are dropped.
pub const SYNTH_IMAG_TOL: f64 = 1e-12;

/// Real matrices `(A0, A, {B1k}, {B2k}, C1, C2)` for `nw` field channels.
#[derive(Debug, Clone, PartialEq)]
pub struct StateSpaceModel {
    pub n: usize,
    pub nw: usize,
    pub a0: RVec,
    pub a: RMat,
    pub b1: Vec<RMat>,
    pub b2: Vec<RMat>,
    /// `nw x s`; row `k` is `(C1)_k`.
    pub c1: RMat,
    pub c2: RMat,
}

impl StateSpaceModel {
    pub fn zeros(n: usize, nw: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::Dimension(n));
        }
        let s = n * n - 1;
        Ok(StateSpaceModel {
            n,
            nw,
            a0: RVec::zeros(s),
            a: RMat::zeros(s, s),
            b1: alloc::vec![RMat::zeros(s, s); nw],
            b2: alloc::vec![RMat::zeros(s, s); nw],
            c1: RMat::zeros(nw, s),
            c2: RMat::zeros(nw, s),
        })
    }

    pub fn s(&self) -> usize {
        self.n * self.n - 1
    }

    /// Checks every dimension against `s = n^2 - 1` and `nw`, and that all
    /// entries are finite.
    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::Dimension(self.n));
        }
        let s = self.s();
        let nw = self.nw;
        let dims = |what: &str, m: &RMat, rows: usize, cols: usize| -> Result<()> {
            if m.shape() != (rows, cols) {
                return Err(shape_error(
                    what,
                    format!("{rows}x{cols}"),
                    format!("{}x{}", m.nrows(), m.ncols()),
                ));
            }
            if m.iter().any(|x| !x.is_finite()) {
                return Err(Error::InvalidArgument(format!("{what} has non-finite entries")));
            }
            Ok(())
        };
        if self.a0.len() != s {
            return Err(shape_error(
                "A0",
                format!("length {s}"),
                format!("length {}", self.a0.len()),
            ));
        }
        if self.a0.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidArgument("A0 has non-finite entries".into()));
        }
        dims("A", &self.a, s, s)?;
        for (what, list) in [("B1", &self.b1), ("B2", &self.b2)] {
            if list.len() != nw {
                return Err(shape_error(what, format!("{nw} matrices"), format!("{}", list.len())));
            }
            for (k, m) in list.iter().enumerate() {
                dims(&format!("{what}[{k}]"), m, s, s)?;
            }
        }
        dims("C1", &self.c1, nw, s)?;
        dims("C2", &self.c2, nw, s)?;
        Ok(())
    }

    /// `B1 = Bbar1 + Bbar2`, `B2 = i (Bbar2 - Bbar1)`; both must come out real.
    pub fn quadrature_from_bar(bbar1: &CMat, bbar2: &CMat, tol: f64) -> Result<(RMat, RMat)> {
        if bbar1.shape() != bbar2.shape() {
            return Err(shape_error(
                "Bbar2",
                format!("{}x{}", bbar1.nrows(), bbar1.ncols()),
                format!("{}x{}", bbar2.nrows(), bbar2.ncols()),
            ));
        }
        let b1 = bbar1 + bbar2;
        let b2 = (bbar2 - bbar1) * I;
        strip_imag("B1", &b1, tol)?;
        strip_imag("B2", &b2, tol)?;
        Ok((b1.map(|z| z.re), b2.map(|z| z.re)))
    }

    fn row(m: &RMat, k: usize) -> RVec {
        m.row(k).transpose()
    }

    pub fn c1_row(&self, k: usize) -> RVec {
        Self::row(&self.c1, k)
    }

    pub fn c2_row(&self, k: usize) -> RVec {
        Self::row(&self.c2, k)
    }

    /// Largest absolute difference over all matrices of two equally shaped
    /// models.
    pub fn max_deviation(&self, other: &StateSpaceModel) -> f64 {
        let d = |a: &RMat, b: &RMat| (a - b).amax();
        let mut worst = (&self.a0 - &other.a0).amax().max(d(&self.a, &other.a));
        for k in 0..self.nw.min(other.nw) {
            worst = worst
                .max(d(&self.b1[k], &other.b1[k]))
                .max(d(&self.b2[k], &other.b2[k]));
        }
        worst.max(d(&self.c1, &other.c1)).max(d(&self.c2, &other.c2))
    }
}

fn strip_imag(what: &str, m: &CMat, tol: f64) -> Result<()> {
    let scale = 1.0 + m.map(|z| z.re).norm();
    let residue = max_imag(m);
    if residue.is_nan() || residue > tol * scale {
        return Err(Error::ImaginaryResidue {
            what: what.into(),
            residue,
        });
    }
    Ok(())
}

/// `H = alpha . x` and `L = Lambda x`; the scattering matrix is the identity
/// and not stored.
#[derive(Debug, Clone, PartialEq)]
pub struct SlhParams {
    pub alpha: RVec,
    /// `nw x s`; row `k` couples channel `k`.
    pub lambda: CMat,
}

impl SlhParams {
    pub fn zeros(s: usize, nw: usize) -> Self {
        SlhParams {
            alpha: RVec::zeros(s),
            lambda: CMat::zeros(nw, s),
        }
    }

    pub fn nw(&self) -> usize {
        self.lambda.nrows()
    }

    pub fn lambda_row(&self, k: usize) -> CVec {
        self.lambda.row(k).transpose()
    }
}

struct ComplexModel {
    a0: CVec,
    a: CMat,
    b1: Vec<CMat>,
    b2: Vec<CMat>,
    c1: CMat,
    c2: CMat,
}

fn synthesize_complex(ctx: &ThetaContext<'_>, p: &SlhParams) -> ComplexModel {
    let s = ctx.s();
    let n = ctx.n() as f64;
    let mut a0 = CVec::zeros(s);
    let mut a = to_complex(&(ctx.tm(&p.alpha) * -2.0));
    let mut b1 = Vec::with_capacity(p.nw());
    let mut b2 = Vec::with_capacity(p.nw());
    for k in 0..p.nw() {
        let lam = p.lambda_row(k);
        let lam_c = lam.conjugate();
        let (tm_l, tm_lc) = (ctx.tm(&lam), ctx.tm(&lam_c));
        let (tp_l, tp_lc) = (ctx.tp(&lam), ctx.tp(&lam_c));
        a0 += &tm_lc * &lam * (I * (4.0 / n));
        let r = &tm_l * &tm_lc + &tm_lc * &tm_l;
        let q = &tm_l * &tp_lc - &tm_lc * &tp_l;
        a += r - q * I;
        b1.push(ctx.tm(&((&lam_c - &lam) * I)));
        b2.push(-ctx.tm(&(&lam + &lam_c)));
    }
    let lam_c = p.lambda.conjugate();
    ComplexModel {
        a0,
        a,
        b1,
        b2,
        c1: &p.lambda + &lam_c,
        c2: (&lam_c - &p.lambda) * I,
    }
}

fn check_slh(ctx: &ThetaContext<'_>, p: &SlhParams) -> Result<()> {
    let s = ctx.s();
    if p.alpha.len() != s {
        return Err(shape_error(
            "alpha",
            format!("length {s}"),
            format!("length {}", p.alpha.len()),
        ));
    }
    if p.lambda.ncols() != s {
        return Err(shape_error(
            "Lambda",
            format!("{}x{s}", p.lambda.nrows()),
            format!("{}x{}", p.lambda.nrows(), p.lambda.ncols()),
        ));
    }
    Ok(())
}

/// Builds the state-space matrices of the open system `(I, Lambda x, alpha . x)`:
///
/// ```text
/// A0  = (4i/n) sum_k Theta^-(Lambda_k^#) Lambda_k^T
/// A   = -2 Theta^-(alpha) + sum_k (R_k - i Q_k)
/// B1k = Theta^-(i (Lambda_k^# - Lambda_k))
/// B2k = -Theta^-(Lambda_k + Lambda_k^#)
/// C1  = Lambda + Lambda^#,   C2 = i (Lambda^# - Lambda)
/// ```
///
/// with `R_k = Theta^-(L_k) Theta^-(L_k^#) + Theta^-(L_k^#) Theta^-(L_k)` and
/// `Q_k = Theta^-(L_k) Theta^+(L_k^#) - Theta^-(L_k^#) Theta^+(L_k)`.
///
/// The imaginary parts cancel analytically; anything above rounding level
/// is reported as [`Error::ImaginaryResidue`].
pub fn synthesize_state_space(ctx: &ThetaContext<'_>, p: &SlhParams) -> Result<StateSpaceModel> {
    check_slh(ctx, p)?;
    let cm = synthesize_complex(ctx, p);
    let a0 = CMat::from_column_slice(ctx.s(), 1, cm.a0.as_slice());
    strip_imag("A0", &a0, SYNTH_IMAG_TOL)?;
    strip_imag("A", &cm.a, SYNTH_IMAG_TOL)?;
    for (k, (b1, b2)) in cm.b1.iter().zip(&cm.b2).enumerate() {
        strip_imag(&format!("B1[{k}]"), b1, SYNTH_IMAG_TOL)?;
        strip_imag(&format!("B2[{k}]"), b2, SYNTH_IMAG_TOL)?;
    }
    strip_imag("C1", &cm.c1, SYNTH_IMAG_TOL)?;
    strip_imag("C2", &cm.c2, SYNTH_IMAG_TOL)?;
    let re = |m: &CMat| m.map(|z| z.re);
    Ok(StateSpaceModel {
        n: ctx.n(),
        nw: p.nw(),
        a0: cm.a0.map(|z| z.re),
        a: re(&cm.a),
        b1: cm.b1.iter().map(re).collect(),
        b2: cm.b2.iter().map(re).collect(),
        c1: re(&cm.c1),
        c2: re(&cm.c2),
    })
}

fn check_model(ctx: &ThetaContext<'_>, m: &StateSpaceModel) -> Result<()> {
    m.validate()?;
    if m.n != ctx.n() {
        return Err(shape_error("n", format!("{}", ctx.n()), format!("{}", m.n)));
    }
    Ok(())
}

/// Per-condition outcome of the realizability test.
#[derive(Debug, Clone, PartialEq)]
pub struct RealizabilityReport {
    pub conditions: Vec<ConditionResult>,
    /// Largest imaginary part of the coupling-implied offset; must vanish
    /// for a realizable model. Already included in the offset residual.
    pub offset_imag_residue: f64,
    /// `(alpha, Lambda)` read off the model; meaningful when `pass`.
    pub recovered: SlhParams,
    pub pass: bool,
    pub tol: f64,
}

impl RealizabilityReport {
    pub fn condition(&self, id: &str, channel: Option<usize>) -> Option<&ConditionResult> {
        self.conditions.iter().find(|c| c.id == id && c.channel == channel)
    }
}

pub const COND_OFFSET: &str = "offset_from_coupling";
pub const COND_B1_FROM_C2: &str = "noise_w1_from_output_c2";
pub const COND_B2_FROM_C1: &str = "noise_w2_from_output_c1";
pub const COND_DISSIPATION: &str = "dissipation_balance";

/// Decides whether the model is generated by some `(I, L, H)`:
///
/// ```text
/// A0  = (1/n) sum_k (B1k - i B2k) ((C1)_k + i (C2)_k)^T
/// B1k = Theta^-((C2)_k)
/// B2k = -Theta^-((C1)_k)
/// A + A^T + sum_k (B1k B1k^T + B2k B2k^T) = (n/2) Theta^+(A0)
/// ```
///
/// These are the forms satisfied exactly by [`synthesize_state_space`]
/// output; see the crate README for the sign conventions.
pub fn check_physical_realizability(
    ctx: &ThetaContext<'_>,
    m: &StateSpaceModel,
    tol: f64,
) -> Result<RealizabilityReport> {
    check_model(ctx, m)?;
    let n = ctx.n() as f64;
    let s = ctx.s();
    let mut conditions = Vec::new();

    let mut offset_rhs = CVec::zeros(s);
    for k in 0..m.nw {
        let coef = to_complex(&m.b1[k]) - to_complex(&m.b2[k]) * I;
        let out = m.c1_row(k).map(c) + m.c2_row(k).map(c) * I;
        offset_rhs += coef * out;
    }
    offset_rhs /= c(n);
    let a0c = m.a0.map(c);
    let as_col = |v: &CVec| CMat::from_column_slice(s, 1, v.as_slice());
    conditions.push(ConditionResult::new(
        COND_OFFSET,
        None,
        relative_residual(&as_col(&a0c), &as_col(&offset_rhs)),
        tol,
    ));
    let offset_imag_residue = offset_rhs.iter().map(|z| z.im.abs()).fold(0.0, f64::max);

    for k in 0..m.nw {
        conditions.push(ConditionResult::new(
            COND_B1_FROM_C2,
            Some(k),
            relative_residual(&m.b1[k], &ctx.tm(&m.c2_row(k))),
            tol,
        ));
    }
    for k in 0..m.nw {
        conditions.push(ConditionResult::new(
            COND_B2_FROM_C1,
            Some(k),
            relative_residual(&m.b2[k], &-ctx.tm(&m.c1_row(k))),
            tol,
        ));
    }

    let mut lhs = &m.a + m.a.transpose();
    for k in 0..m.nw {
        lhs += &m.b1[k] * m.b1[k].transpose() + &m.b2[k] * m.b2[k].transpose();
    }
    conditions.push(ConditionResult::new(
        COND_DISSIPATION,
        None,
        relative_residual(&lhs, &(ctx.tp(&m.a0) * (n / 2.0))),
        tol,
    ));

    Ok(RealizabilityReport {
        pass: all_pass(&conditions),
        conditions,
        offset_imag_residue,
        recovered: extract_slh(ctx, m)?.params,
        tol,
    })
}

/// `(alpha, Lambda)` recovered from a model, with the deviation of the model
/// resynthesized from them.
#[derive(Debug, Clone, PartialEq)]
pub struct SlhExtraction {
    pub params: SlhParams,
    /// Max-norm distance between `m` and the model synthesized from
    /// `params`. Near zero for realizable input.
    pub residual: f64,
}

/// Reads the coupling and Hamiltonian off a model:
///
/// ```text
/// Lambda = (C1 + i C2) / 2
/// alpha  = (1/4n) vec(A^T - A + 1/2 sum_k ([B2k, Theta^+((C2)_k)] - [B1k, Theta^+((C1)_k)]))^T F
/// ```
///
/// Realizability is the caller's responsibility; for other input the
/// result is a best effort and `residual` says how far off it is.
pub fn extract_slh(ctx: &ThetaContext<'_>, m: &StateSpaceModel) -> Result<SlhExtraction> {
    check_model(ctx, m)?;
    let n = ctx.n() as f64;
    let lambda = (to_complex(&m.c1) + to_complex(&m.c2) * I) * c(0.5);

    let mut inner = m.a.transpose() - &m.a;
    let mut brackets = RMat::zeros(ctx.s(), ctx.s());
    for k in 0..m.nw {
        let tp_c2 = ctx.tp(&m.c2_row(k));
        let tp_c1 = ctx.tp(&m.c1_row(k));
        brackets += &m.b2[k] * &tp_c2 - &tp_c2 * &m.b2[k];
        brackets -= &m.b1[k] * &tp_c1 - &tp_c1 * &m.b1[k];
    }
    inner += brackets * 0.5;
    let alpha = ctx.tensors().f_stacked().transpose() * vec(&inner) / (4.0 * n);

    let params = SlhParams { alpha, lambda };
    let cm = synthesize_complex(ctx, &params);
    let dev = |x: &CMat, y: &RMat| (x - to_complex(y)).iter().map(|z| z.norm()).fold(0.0, f64::max);
    let a0 = CMat::from_column_slice(ctx.s(), 1, cm.a0.as_slice());
    let mut residual = dev(&a0, &RMat::from_column_slice(ctx.s(), 1, m.a0.as_slice()))
        .max(dev(&cm.a, &m.a))
        .max(dev(&cm.c1, &m.c1))
        .max(dev(&cm.c2, &m.c2));
    for k in 0..m.nw {
        residual = residual.max(dev(&cm.b1[k], &m.b1[k])).max(dev(&cm.b2[k], &m.b2[k]));
    }
    Ok(SlhExtraction { params, residual })
}

pub const COND_B1_IMAGE: &str = "noise_w1_theta_image";
pub const COND_B2_IMAGE: &str = "noise_w2_theta_image";
pub const COND_OFFSET_COMMUTATOR: &str = "offset_commutator";
pub const COND_DRIFT_IMAGE: &str = "drift_theta_image";

/// Outcome of the commutation/anticommutation preservation test.
#[derive(Debug, Clone, PartialEq)]
pub struct PreservationReport {
    pub conditions: Vec<ConditionResult>,
    /// `b1k` with `B1k = Theta^-(b1k)`, one per channel.
    pub b1: Vec<RVec>,
    pub b2: Vec<RVec>,
    /// `a` with `P = Theta^-(a)`.
    pub a: RVec,
    /// `(2/n) sum_k Theta^-(b2k) b1k`, the only offset compatible with
    /// preservation.
    pub implied_a0: RVec,
    /// `|A0 - implied_a0| / (1 + |A0|)`; informational.
    pub implied_a0_deviation: f64,
    pub pass: bool,
    pub tol: f64,
}

impl PreservationReport {
    pub fn condition(&self, id: &str, channel: Option<usize>) -> Option<&ConditionResult> {
        self.conditions.iter().find(|c| c.id == id && c.channel == channel)
    }
}

/// Decides, independently of realizability, whether the QSDE preserves
/// `[x, x^T] = 2i Theta^-(x)` and `{x, x^T} = (4/n) I + 2 Theta^+(x)`:
///
/// ```text
/// B1k = Theta^-(b1k),  B2k = Theta^-(b2k)
/// sum_k (B1k B2k^T - B2k B1k^T) = (n/2) Theta^-(A0)
/// P = A + 1/2 sum_k (B1k B1k^T + B2k B2k^T) - 1/2 sum_k (B2k Theta^+(b1k) - B1k Theta^+(b2k))
///   = Theta^-(a)
/// ```
pub fn check_preservation(ctx: &ThetaContext<'_>, m: &StateSpaceModel, tol: f64) -> Result<PreservationReport> {
    check_model(ctx, m)?;
    let n = ctx.n() as f64;
    let s = ctx.s();
    let mut conditions = Vec::new();
    let mut b1 = Vec::with_capacity(m.nw);
    let mut b2 = Vec::with_capacity(m.nw);

    for (id, mats, out) in [(COND_B1_IMAGE, &m.b1, &mut b1), (COND_B2_IMAGE, &m.b2, &mut b2)] {
        for (k, bk) in mats.iter().enumerate() {
            let rec = ctx.reconstruct_theta_minus_generator(bk)?;
            conditions.push(ConditionResult::new(id, Some(k), rec.residual / (1.0 + bk.norm()), tol));
            out.push(rec.g);
        }
    }

    let mut comm = RMat::zeros(s, s);
    for k in 0..m.nw {
        comm += &m.b1[k] * m.b2[k].transpose() - &m.b2[k] * m.b1[k].transpose();
    }
    conditions.push(ConditionResult::new(
        COND_OFFSET_COMMUTATOR,
        None,
        relative_residual(&comm, &(ctx.tm(&m.a0) * (n / 2.0))),
        tol,
    ));

    let mut p = m.a.clone();
    for k in 0..m.nw {
        p += (&m.b1[k] * m.b1[k].transpose() + &m.b2[k] * m.b2[k].transpose()) * 0.5;
        p -= (&m.b2[k] * ctx.tp(&b1[k]) - &m.b1[k] * ctx.tp(&b2[k])) * 0.5;
    }
    let rec = ctx.reconstruct_theta_minus_generator(&p)?;
    conditions.push(ConditionResult::new(
        COND_DRIFT_IMAGE,
        None,
        rec.residual / (1.0 + m.a.norm()),
        tol,
    ));

    let mut implied_a0 = RVec::zeros(s);
    for k in 0..m.nw {
        implied_a0 += ctx.tm(&b2[k]) * &b1[k] * (2.0 / n);
    }
    let implied_a0_deviation = (&m.a0 - &implied_a0).norm() / (1.0 + m.a0.norm());

    Ok(PreservationReport {
        pass: all_pass(&conditions),
        conditions,
        b1,
        b2,
        a: rec.g,
        implied_a0,
        implied_a0_deviation,
        tol,
    })
}

/// Fixture families for [`random_model`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ModelKind {
    /// Synthesized from random `(alpha, Lambda)`.
    Realizable,
    /// Built directly from random `a`, `b1k`, `b2k` so that preservation
    /// holds; `C1`, `C2` are drawn independently.
    PreservationOnly,
    /// Every entry independent.
    Generic,
}

impl ModelKind {
    pub const ALL: [ModelKind; 3] = [ModelKind::Realizable, ModelKind::PreservationOnly, ModelKind::Generic];

    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Realizable => "realizable",
            ModelKind::PreservationOnly => "preservation-only",
            ModelKind::Generic => "generic",
        }
    }
}

impl core::str::FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ModelKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown model kind `{s}`")))
    }
}

fn uniform_vec(rng: &mut ChaCha8Rng, len: usize, half_width: f64) -> RVec {
    RVec::from_fn(len, |_, _| rng.random_range(-half_width..half_width))
}

fn uniform_mat(rng: &mut ChaCha8Rng, rows: usize, cols: usize, half_width: f64) -> RMat {
    RMat::from_fn(rows, cols, |_, _| rng.random_range(-half_width..half_width))
}

/// Draws `alpha` uniformly from `[-1, 1)^s` and the real and imaginary parts
/// of `Lambda` from `[-1/2, 1/2)`.
pub fn random_slh(s: usize, nw: usize, seed: u64) -> SlhParams {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let alpha = uniform_vec(&mut rng, s, 1.0);
    let re = uniform_mat(&mut rng, nw, s, 0.5);
    let im = uniform_mat(&mut rng, nw, s, 0.5);
    let lambda = CMat::from_fn(nw, s, |i, j| Complex64::new(re[(i, j)], im[(i, j)]));
    SlhParams { alpha, lambda }
}

/// Deterministic random model of the requested family.
pub fn random_model(ctx: &ThetaContext<'_>, nw: usize, seed: u64, kind: ModelKind) -> Result<StateSpaceModel> {
    let s = ctx.s();
    let n = ctx.n();
    match kind {
        ModelKind::Realizable => synthesize_state_space(ctx, &random_slh(s, nw, seed)),
        ModelKind::PreservationOnly => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let a = uniform_vec(&mut rng, s, 1.0);
            let b1: Vec<RVec> = (0..nw).map(|_| uniform_vec(&mut rng, s, 1.0)).collect();
            let b2: Vec<RVec> = (0..nw).map(|_| uniform_vec(&mut rng, s, 1.0)).collect();
            let mut m = StateSpaceModel::zeros(n, nw)?;
            m.c1 = uniform_mat(&mut rng, nw, s, 1.0);
            m.c2 = uniform_mat(&mut rng, nw, s, 1.0);
            m.b1 = b1.iter().map(|b| ctx.tm(b)).collect();
            m.b2 = b2.iter().map(|b| ctx.tm(b)).collect();
            m.a = ctx.tm(&a);
            for k in 0..nw {
                m.a0 += ctx.tm(&b2[k]) * &b1[k] * (2.0 / n as f64);
                m.a -= (&m.b1[k] * m.b1[k].transpose() + &m.b2[k] * m.b2[k].transpose()) * 0.5;
                m.a += (&m.b2[k] * ctx.tp(&b1[k]) - &m.b1[k] * ctx.tp(&b2[k])) * 0.5;
            }
            Ok(m)
        }
        ModelKind::Generic => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut m = StateSpaceModel::zeros(n, nw)?;
            m.a0 = uniform_vec(&mut rng, s, 1.0);
            m.a = uniform_mat(&mut rng, s, s, 1.0);
            m.b1 = (0..nw).map(|_| uniform_mat(&mut rng, s, s, 1.0)).collect();
            m.b2 = (0..nw).map(|_| uniform_mat(&mut rng, s, s, 1.0)).collect();
            m.c1 = uniform_mat(&mut rng, nw, s, 1.0);
            m.c2 = uniform_mat(&mut rng, nw, s, 1.0);
            Ok(m)
        }
    }
}
