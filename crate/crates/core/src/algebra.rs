//! Generalized Gell-Mann generators of SU(n) and their structure tensors.
//!
//! Generators are ordered: every symmetric `u(j,k)` in lexicographic `(j,k)`
//! order, then every antisymmetric `v(j,k)` in the same order, then the
//! diagonal `w(l)` for `l = 1..n-1`. They are normalized so that
//! `Tr(l_i l_j) = 2 delta_ij`, and
//!
//! ```text
//! l_i l_j = (2/n) delta_ij I + sum_k (i f_ijk + d_ijk) l_k
//! ```
//!
//! defines the real tensors `f` (totally antisymmetric) and `d` (totally
//! symmetric).

use alloc::vec::Vec;
use core::fmt;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{c, trace_product, CMat, CVec, RMat, I};
use crate::report::{IdentityCheck, IdentityReport};

/// Absolute tolerance used when none is supplied.
pub const DEFAULT_TOL: f64 = 1e-9;

/// Tag of a generator. Indices are one-based, as in the usual notation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum GeneratorLabel {
    /// `P_jk + P_kj`
    U { j: usize, k: usize },
    /// `i (P_jk - P_kj)`
    V { j: usize, k: usize },
    /// Diagonal generator number `l`.
    W { l: usize },
}

impl fmt::Display for GeneratorLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            GeneratorLabel::U { j, k } => write!(f, "u({j},{k})"),
            GeneratorLabel::V { j, k } => write!(f, "v({j},{k})"),
            GeneratorLabel::W { l } => write!(f, "w({l})"),
        }
    }
}

/// The `n^2 - 1` generators of SU(n) as complex `n x n` matrices.
#[derive(Debug, Clone, PartialEq)]
pub struct GellMannBasis {
    n: usize,
    generators: Vec<CMat>,
    labels: Vec<GeneratorLabel>,
}

impl GellMannBasis {
    pub fn new(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::Dimension(n));
        }
        let unit = |k: usize, l: usize| {
            let mut p = CMat::zeros(n, n);
            p[(k, l)] = c(1.0);
            p
        };

        let pairs: Vec<(usize, usize)> = (0..n).flat_map(|j| (j + 1..n).map(move |k| (j, k))).collect();
        let mut generators = Vec::with_capacity(n * n - 1);
        let mut labels = Vec::with_capacity(n * n - 1);

        for &(j, k) in &pairs {
            generators.push(unit(j, k) + unit(k, j));
            labels.push(GeneratorLabel::U { j: j + 1, k: k + 1 });
        }
        for &(j, k) in &pairs {
            generators.push((unit(j, k) - unit(k, j)) * I);
            labels.push(GeneratorLabel::V { j: j + 1, k: k + 1 });
        }
        for l in 1..n {
            // w_l = -sqrt(2 / (l (l+1))) (sum_{s<=l} P_ss - l P_{l+1,l+1})
            let scale = -libm::sqrt(2.0 / (l * (l + 1)) as f64);
            let mut w = CMat::zeros(n, n);
            for s in 0..l {
                w[(s, s)] = c(scale);
            }
            w[(l, l)] = c(-scale * l as f64);
            generators.push(w);
            labels.push(GeneratorLabel::W { l });
        }

        Ok(GellMannBasis { n, generators, labels })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of generators, `n^2 - 1`.
    pub fn s(&self) -> usize {
        self.generators.len()
    }

    pub fn generators(&self) -> &[CMat] {
        &self.generators
    }

    pub fn generator(&self, i: usize) -> &CMat {
        &self.generators[i]
    }

    pub fn labels(&self) -> &[GeneratorLabel] {
        &self.labels
    }

    /// Coefficients `(c0, c)` with `op = c0 I + sum_j c_j l_j`.
    pub fn coefficients(&self, op: &CMat) -> (Complex64, CVec) {
        let c0 = op.trace() / c(self.n as f64);
        let coeffs = CVec::from_iterator(self.s(), self.generators.iter().map(|g| trace_product(op, g) * 0.5));
        (c0, coeffs)
    }

    /// `sum_j coeffs_j l_j`.
    pub fn combine(&self, coeffs: &[Complex64]) -> CMat {
        let mut out = CMat::zeros(self.n, self.n);
        for (g, &w) in self.generators.iter().zip(coeffs) {
            if w != Complex64::new(0.0, 0.0) {
                out += g * w;
            }
        }
        out
    }

    /// Trace Gram matrix `Tr(a^dagger b)` of `{I, l_1, .., l_s}`.
    pub fn gram_matrix(&self) -> CMat {
        let mut all = Vec::with_capacity(self.s() + 1);
        all.push(CMat::identity(self.n, self.n));
        all.extend(self.generators.iter().cloned());
        CMat::from_fn(all.len(), all.len(), |a, b| trace_product(&all[a].adjoint(), &all[b]))
    }

    /// Hermiticity, tracelessness, orthonormality, count, and linear
    /// independence of `{I, l_1, .., l_s}` (smallest Gram eigenvalue).
    pub fn verify(&self, tol: f64) -> IdentityReport {
        let mut report = IdentityReport::new(tol);
        let mut hermitian = IdentityCheck::new("generator_hermitian");
        let mut traceless = IdentityCheck::new("generator_traceless");
        let mut ortho = IdentityCheck::new("trace_orthonormality");
        for (i, g) in self.generators.iter().enumerate() {
            hermitian.record((g - g.adjoint()).norm(), &[i]);
            traceless.record(g.trace().norm(), &[i]);
            for (j, h) in self.generators.iter().enumerate() {
                let target = if i == j { 2.0 } else { 0.0 };
                ortho.record((trace_product(g, h) - c(target)).norm(), &[i, j]);
            }
        }
        report.push(hermitian);
        report.push(traceless);
        report.push(ortho);

        let mut count = IdentityCheck::new("generator_count");
        count.record((self.s() as f64 - (self.n * self.n - 1) as f64).abs(), &[]);
        report.push(count);

        // Gram matrix is Hermitian positive semidefinite; independence means
        // its smallest eigenvalue is bounded away from zero. The residual
        // is how far that eigenvalue falls short of the unit floor.
        let gram_min = self
            .gram_matrix()
            .symmetric_eigenvalues()
            .iter()
            .cloned()
            .fold(f64::INFINITY, f64::min);
        let mut independent = IdentityCheck::new("gram_nonsingular");
        independent.record((1.0 - gram_min).max(0.0), &[]);
        report.push(independent);
        report
    }
}

/// Dense rank-3 tensor of side `dim`, row-major in `(i, j, k)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor3 {
    dim: usize,
    data: Vec<f64>,
}

impl Tensor3 {
    pub fn zeros(dim: usize) -> Self {
        Tensor3 {
            dim,
            data: alloc::vec![0.0; dim * dim * dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    fn offset(&self, i: usize, j: usize, k: usize) -> usize {
        (i * self.dim + j) * self.dim + k
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize, k: usize) -> f64 {
        self.data[self.offset(i, j, k)]
    }

    pub fn set(&mut self, i: usize, j: usize, k: usize, v: f64) {
        let o = self.offset(i, j, k);
        self.data[o] = v;
    }

    /// Contiguous fiber `t[i][j][..]`.
    #[inline]
    pub fn fiber(&self, i: usize, j: usize) -> &[f64] {
        let o = self.offset(i, j, 0);
        &self.data[o..o + self.dim]
    }

    /// Writes `v` at `(i,j,k)` and its five index permutations, with the
    /// sign of each permutation.
    pub fn set_antisymmetric(&mut self, i: usize, j: usize, k: usize, v: f64) {
        for (p, sign) in permutations(i, j, k) {
            self.set(p.0, p.1, p.2, sign * v);
        }
    }

    /// Writes `v` at `(i,j,k)` and its five index permutations.
    pub fn set_symmetric(&mut self, i: usize, j: usize, k: usize, v: f64) {
        for (p, _) in permutations(i, j, k) {
            self.set(p.0, p.1, p.2, v);
        }
    }
}

fn permutations(i: usize, j: usize, k: usize) -> [((usize, usize, usize), f64); 6] {
    [
        ((i, j, k), 1.0),
        ((j, k, i), 1.0),
        ((k, i, j), 1.0),
        ((j, i, k), -1.0),
        ((i, k, j), -1.0),
        ((k, j, i), -1.0),
    ]
}

/// Structure tensors `f`, `d` together with the adjoint matrices
/// `(F_i)_jk = f_ijk`, `(D_i)_jk = d_ijk` and their stacked forms
/// `F = (F_1, .., F_s)^T`, `D = (D_1, .., D_s)^T` (each `s^2 x s`).
#[derive(Debug, Clone, PartialEq)]
pub struct StructureTensors {
    n: usize,
    f: Tensor3,
    d: Tensor3,
    f_mats: Vec<RMat>,
    d_mats: Vec<RMat>,
    f_stacked: RMat,
    d_stacked: RMat,
}

impl StructureTensors {
    pub fn from_basis(basis: &GellMannBasis) -> Result<Self> {
        Self::extract_from_generators(basis.n(), basis.generators())
    }

    /// Trace extraction `f_ijk = Tr([l_i,l_j] l_k) / 4i`,
    /// `d_ijk = Tr({l_i,l_j} l_k) / 4`. Only the canonical ordering is
    /// computed; the other permutations are filled by sign, so the stored
    /// tensors are exactly (anti)symmetric.
    pub fn extract_from_generators(n: usize, generators: &[CMat]) -> Result<Self> {
        if n < 2 {
            return Err(Error::Dimension(n));
        }
        let s = n * n - 1;
        if generators.len() != s {
            return Err(crate::error::shape_error(
                "generators",
                alloc::format!("{s} matrices"),
                alloc::format!("{}", generators.len()),
            ));
        }
        let mut ortho = 0.0f64;
        for (i, g) in generators.iter().enumerate() {
            if g.shape() != (n, n) {
                return Err(crate::error::shape_error(
                    alloc::format!("generator {i}"),
                    alloc::format!("{n}x{n}"),
                    alloc::format!("{}x{}", g.nrows(), g.ncols()),
                ));
            }
            for (j, h) in generators.iter().enumerate() {
                let target = if i == j { 2.0 } else { 0.0 };
                ortho = ortho.max((trace_product(g, h) - c(target)).norm());
            }
        }
        if ortho.is_nan() || ortho > DEFAULT_TOL {
            return Err(Error::InconsistentBasis { residual: ortho });
        }

        let products: Vec<CMat> = generators
            .iter()
            .flat_map(|a| generators.iter().map(move |b| a * b))
            .collect();
        let prod = |i: usize, j: usize| &products[i * s + j];

        let mut f = Tensor3::zeros(s);
        let mut d = Tensor3::zeros(s);
        for i in 0..s {
            for j in i..s {
                for (k, gk) in generators.iter().enumerate().skip(j) {
                    let t_ij = trace_product(prod(i, j), gk);
                    let t_ji = trace_product(prod(j, i), gk);
                    let fv = (t_ij - t_ji) / (I * 4.0);
                    let dv = (t_ij + t_ji) / 4.0;
                    for (what, z) in [("f", fv), ("d", dv)] {
                        if z.im.abs() > DEFAULT_TOL {
                            return Err(Error::ImaginaryResidue {
                                what: alloc::format!("{what}[{i}][{j}][{k}]"),
                                residue: z.im.abs(),
                            });
                        }
                    }
                    if i < j && j < k {
                        f.set_antisymmetric(i, j, k, fv.re);
                    }
                    d.set_symmetric(i, j, k, dv.re);
                }
            }
        }
        Self::from_parts(n, f, d)
    }

    /// Assembles tensors from explicit `f`, `d` without re-symmetrizing, so
    /// that defects can be injected and detected.
    pub fn from_parts(n: usize, f: Tensor3, d: Tensor3) -> Result<Self> {
        if n < 2 {
            return Err(Error::Dimension(n));
        }
        let s = n * n - 1;
        for (what, t) in [("f", &f), ("d", &d)] {
            if t.dim() != s {
                return Err(crate::error::shape_error(
                    what,
                    alloc::format!("side {s}"),
                    alloc::format!("side {}", t.dim()),
                ));
            }
        }
        let slice = |t: &Tensor3, i: usize| RMat::from_fn(s, s, |j, k| t.get(i, j, k));
        let f_mats: Vec<RMat> = (0..s).map(|i| slice(&f, i)).collect();
        let d_mats: Vec<RMat> = (0..s).map(|i| slice(&d, i)).collect();
        // Block i of the stacked matrix is the transpose of the i-th slice.
        let stack = |mats: &[RMat]| RMat::from_fn(s * s, s, |row, k| mats[row / s][(k, row % s)]);
        let f_stacked = stack(&f_mats);
        let d_stacked = stack(&d_mats);
        Ok(StructureTensors {
            n,
            f,
            d,
            f_mats,
            d_mats,
            f_stacked,
            d_stacked,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn s(&self) -> usize {
        self.f.dim()
    }

    pub fn f(&self) -> &Tensor3 {
        &self.f
    }

    pub fn d(&self) -> &Tensor3 {
        &self.d
    }

    pub fn f_mat(&self, i: usize) -> &RMat {
        &self.f_mats[i]
    }

    pub fn d_mat(&self, i: usize) -> &RMat {
        &self.d_mats[i]
    }

    pub fn f_mats(&self) -> &[RMat] {
        &self.f_mats
    }

    pub fn d_mats(&self) -> &[RMat] {
        &self.d_mats
    }

    pub fn f_stacked(&self) -> &RMat {
        &self.f_stacked
    }

    pub fn d_stacked(&self) -> &RMat {
        &self.d_stacked
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn delta(a: usize, b: usize) -> f64 {
    if a == b {
        1.0
    } else {
        0.0
    }
}

/// Exhaustively checks the tensor and adjoint-matrix identities of SU(n).
///
/// Residuals are absolute; every quantity involved is O(1).
pub fn verify_structure_identities(t: &StructureTensors, tol: f64) -> IdentityReport {
    let s = t.s();
    let nf = t.n() as f64;
    let f = t.f();
    let d = t.d();
    let mut report = IdentityReport::new(tol);

    let mut f_anti = IdentityCheck::new("f_antisymmetric");
    let mut d_sym = IdentityCheck::new("d_symmetric");
    for i in 0..s {
        for j in 0..s {
            for k in 0..s {
                let v = f.get(i, j, k);
                f_anti.record((v + f.get(j, i, k)).abs().max((v + f.get(i, k, j)).abs()), &[i, j, k]);
                let w = d.get(i, j, k);
                d_sym.record((w - d.get(j, i, k)).abs().max((w - d.get(i, k, j)).abs()), &[i, j, k]);
            }
        }
    }
    report.push(f_anti);
    report.push(d_sym);

    // f_ilm t_mjk + f_jlm t_imk + f_klm t_ijm = 0 for t = f and t = d.
    // Contractions over m run as dot products of contiguous fibers, using
    // the (anti)symmetry of the stored tensors to bring m to the end.
    let mut jacobi_ff = IdentityCheck::new("jacobi_ff");
    let mut jacobi_fd = IdentityCheck::new("jacobi_fd");
    let col = |t: &Tensor3, j: usize, k: usize, sign: f64| -> Vec<f64> {
        // m -> t_mjk, via t_mjk = sign * t_jkm (cyclic, both tensors).
        t.fiber(j, k).iter().map(|x| sign * x).collect()
    };
    for i in 0..s {
        for j in 0..s {
            for k in 0..s {
                let f_mjk = col(f, j, k, 1.0);
                let d_mjk = col(d, j, k, 1.0);
                // t_imk = -t_ikm for f, +t_ikm for d.
                let f_imk: Vec<f64> = f.fiber(i, k).iter().map(|x| -x).collect();
                let d_imk = d.fiber(i, k);
                let f_ijm = f.fiber(i, j);
                let d_ijm = d.fiber(i, j);
                for l in 0..s {
                    let f_il = f.fiber(i, l);
                    let f_jl = f.fiber(j, l);
                    let f_kl = f.fiber(k, l);
                    let rff = dot(f_il, &f_mjk) + dot(f_jl, &f_imk) + dot(f_kl, f_ijm);
                    let rfd = dot(f_il, &d_mjk) + dot(f_jl, d_imk) + dot(f_kl, d_ijm);
                    jacobi_ff.record(rff.abs(), &[i, j, k, l]);
                    jacobi_fd.record(rfd.abs(), &[i, j, k, l]);
                }
            }
        }
    }
    report.push(jacobi_ff);
    report.push(jacobi_fd);

    // sum_k f_ilk f_mjk = (2/n)(d_im d_lj - d_ij d_lm) + sum_k (d_imk d_ljk - d_ijk d_lmk)
    let mut contraction = IdentityCheck::new("ff_contraction");
    for i in 0..s {
        for l in 0..s {
            for m in 0..s {
                for j in 0..s {
                    let lhs = dot(f.fiber(i, l), f.fiber(m, j));
                    let rhs = 2.0 / nf * (delta(i, m) * delta(l, j) - delta(i, j) * delta(l, m))
                        + dot(d.fiber(i, m), d.fiber(l, j))
                        - dot(d.fiber(i, j), d.fiber(l, m));
                    contraction.record((lhs - rhs).abs(), &[i, l, m, j]);
                }
            }
        }
    }
    report.push(contraction);

    // sum_{m,k} f_imk f_jmk = n delta_ij
    let mut ff_trace = IdentityCheck::new("ff_trace");
    for i in 0..s {
        for j in 0..s {
            let lhs: f64 = (0..s).map(|m| dot(f.fiber(i, m), f.fiber(j, m))).sum();
            ff_trace.record((lhs - nf * delta(i, j)).abs(), &[i, j]);
        }
    }
    report.push(ff_trace);

    // Adjoint-matrix identities, checked entrywise for every (i, j).
    let fm = t.f_mats();
    let dm = t.d_mats();
    let combo = |coef: &[f64], mats: &[RMat]| {
        let mut acc = RMat::zeros(s, s);
        for (w, m) in coef.iter().zip(mats) {
            if *w != 0.0 {
                acc += m * *w;
            }
        }
        acc
    };
    let mut ids = [
        IdentityCheck::new("adjoint_ff_commutator"),
        IdentityCheck::new("adjoint_fd_commutator"),
        IdentityCheck::new("adjoint_fd_anticommutator"),
        IdentityCheck::new("adjoint_df_anticommutator"),
        IdentityCheck::new("adjoint_dd_ff"),
    ];
    let record_entries = |check: &mut IdentityCheck, r: &RMat, i: usize, j: usize| {
        for a in 0..s {
            for b in 0..s {
                check.record(r[(a, b)].abs(), &[i, j, a, b]);
            }
        }
    };
    for i in 0..s {
        for j in 0..s {
            let f_ij = f.fiber(i, j);
            let d_ij = d.fiber(i, j);
            let sum_f_f = combo(f_ij, fm);
            let sum_f_d = combo(f_ij, dm);
            let sum_d_f = combo(d_ij, fm);
            let sum_d_d = combo(d_ij, dm);

            let r = &fm[i] * &fm[j] - &fm[j] * &fm[i] + &sum_f_f;
            record_entries(&mut ids[0], &r, i, j);
            let r = &fm[i] * &dm[j] - &dm[j] * &fm[i] + &sum_f_d;
            record_entries(&mut ids[1], &r, i, j);
            let r = &fm[i] * &dm[j] + &fm[j] * &dm[i] - &sum_d_f;
            record_entries(&mut ids[2], &r, i, j);
            let r = &dm[i] * &fm[j] + &dm[j] * &fm[i] - &sum_d_f;
            record_entries(&mut ids[3], &r, i, j);
            // (D_i D_j - F_j F_i)_ml = sum_k d_ijk (D_k)_ml + (2/n)(d_ij d_ml - d_im d_jl)
            let mut r = &dm[i] * &dm[j] - &fm[j] * &fm[i] - &sum_d_d;
            for m in 0..s {
                for l in 0..s {
                    r[(m, l)] -= 2.0 / nf * (delta(i, j) * delta(m, l) - delta(i, m) * delta(j, l));
                }
            }
            record_entries(&mut ids[4], &r, i, j);
        }
    }
    for check in ids {
        report.push(check);
    }

    let gram = t.f_stacked().transpose() * t.f_stacked() - RMat::identity(s, s) * nf;
    let mut stacked = IdentityCheck::new("stacked_f_gram");
    for a in 0..s {
        for b in 0..s {
            stacked.record(gram[(a, b)].abs(), &[a, b]);
        }
    }
    report.push(stacked);
    report
}

/// Checks `l_i l_j = (2/n) delta_ij I + sum_k (i f_ijk + d_ijk) l_k` entrywise
/// for every generator pair.
pub fn verify_product_rule(basis: &GellMannBasis, t: &StructureTensors, tol: f64) -> IdentityReport {
    let s = basis.s();
    let n = basis.n();
    let mut check = IdentityCheck::new("product_rule");
    let mut coeffs = alloc::vec![Complex64::new(0.0, 0.0); s];
    for i in 0..s {
        for j in 0..s {
            for (k, w) in coeffs.iter_mut().enumerate() {
                *w = Complex64::new(t.d().get(i, j, k), t.f().get(i, j, k));
            }
            let mut expected = basis.combine(&coeffs);
            if i == j {
                expected += CMat::identity(n, n) * c(2.0 / n as f64);
            }
            let r = basis.generator(i) * basis.generator(j) - expected;
            check.record(crate::linalg::max_abs(&r), &[i, j]);
        }
    }
    let mut report = IdentityReport::new(tol);
    report.push(check);
    report
}

/// Basis invariants, product rule and every tensor identity in one report.
pub fn verify_algebra(basis: &GellMannBasis, t: &StructureTensors, tol: f64) -> IdentityReport {
    let mut report = basis.verify(tol);
    report.extend(verify_product_rule(basis, t, tol));
    report.extend(verify_structure_identities(t, tol));
    report
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cm(rows: &[[(f64, f64); 2]; 2]) -> CMat {
        CMat::from_fn(2, 2, |i, j| Complex64::new(rows[i][j].0, rows[i][j].1))
    }

    #[test]
    fn su2_generators_match_hand_evaluation() {
        let b = GellMannBasis::new(2).unwrap();
        assert_eq!(b.s(), 3);
        assert_eq!(b.generator(0), &cm(&[[(0., 0.), (1., 0.)], [(1., 0.), (0., 0.)]]));
        assert_eq!(b.generator(1), &cm(&[[(0., 0.), (0., 1.)], [(0., -1.), (0., 0.)]]));
        assert_eq!(b.generator(2), &cm(&[[(-1., 0.), (0., 0.)], [(0., 0.), (1., 0.)]]));
        assert_eq!(
            b.labels(),
            &[
                GeneratorLabel::U { j: 1, k: 2 },
                GeneratorLabel::V { j: 1, k: 2 },
                GeneratorLabel::W { l: 1 }
            ]
        );
    }

    #[test]
    fn su3_has_three_of_each_offdiagonal_family() {
        let b = GellMannBasis::new(3).unwrap();
        let count = |p: fn(&GeneratorLabel) -> bool| b.labels().iter().filter(|l| p(l)).count();
        assert_eq!(b.s(), 8);
        assert_eq!(count(|l| matches!(l, GeneratorLabel::U { .. })), 3);
        assert_eq!(count(|l| matches!(l, GeneratorLabel::V { .. })), 3);
        assert_eq!(count(|l| matches!(l, GeneratorLabel::W { .. })), 2);
    }

    #[test]
    fn n_below_two_is_rejected() {
        assert!(matches!(GellMannBasis::new(1), Err(Error::Dimension(1))));
        assert!(matches!(GellMannBasis::new(0), Err(Error::Dimension(0))));
    }

    #[test]
    fn basis_invariants_hold_up_to_six() {
        for n in 2..=6 {
            let b = GellMannBasis::new(n).unwrap();
            let r = b.verify(1e-12);
            assert!(r.pass, "n={n}: {:?}", r.failures().collect::<Vec<_>>());
        }
    }

    #[test]
    fn su2_has_no_anomaly_and_unit_f123() {
        let b = GellMannBasis::new(2).unwrap();
        let t = StructureTensors::from_basis(&b).unwrap();
        assert!((t.f().get(0, 1, 2) - 1.0).abs() < 1e-15);
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    assert_eq!(t.d().get(i, j, k), 0.0);
                }
            }
        }
    }

    #[test]
    fn non_orthonormal_generators_are_rejected() {
        let b = GellMannBasis::new(2).unwrap();
        let mut gens = b.generators().to_vec();
        gens[0] *= c(1.5);
        assert!(matches!(
            StructureTensors::extract_from_generators(2, &gens),
            Err(Error::InconsistentBasis { .. })
        ));
    }

    #[test]
    fn su3_identities_pass_at_rounding_level() {
        let b = GellMannBasis::new(3).unwrap();
        let t = StructureTensors::from_basis(&b).unwrap();
        let r = verify_algebra(&b, &t, 1e-12);
        assert!(r.pass, "{:?}", r.failures().collect::<Vec<_>>());
    }

    #[test]
    fn su2_adjoint_identities_pass_with_zero_d() {
        let b = GellMannBasis::new(2).unwrap();
        let t = StructureTensors::from_basis(&b).unwrap();
        let r = verify_structure_identities(&t, 1e-12);
        assert!(r.pass);
        assert!(t.d_mats().iter().all(|m| m.iter().all(|&x| x == 0.0)));
    }

    #[test]
    fn perturbed_f_breaks_trace_identity() {
        let b = GellMannBasis::new(3).unwrap();
        let t = StructureTensors::from_basis(&b).unwrap();
        let mut f = t.f().clone();
        let v = f.get(0, 1, 2);
        f.set_antisymmetric(0, 1, 2, v + 1e-3);
        let bad = StructureTensors::from_parts(3, f, t.d().clone()).unwrap();
        let r = verify_structure_identities(&bad, 1e-9);
        assert!(!r.pass);
        let ff_trace = r.get("ff_trace").unwrap();
        assert!(!ff_trace.pass);
        assert!(ff_trace.max_residual >= 1e-3);
    }

    #[test]
    fn worst_index_prefers_lexicographically_smallest_tie() {
        let mut chk = IdentityCheck::new("tie");
        chk.record(1.0, &[0, 2]);
        chk.record(1.0, &[0, 1]);
        chk.record(0.5, &[0, 0]);
        assert_eq!(chk.worst_index, alloc::vec![0, 2]);
        chk.record(f64::NAN, &[1, 1]);
        assert!(!chk.finish(1.0).pass);
    }

    #[test]
    fn coefficients_invert_combine() {
        let b = GellMannBasis::new(3).unwrap();
        let coeffs: Vec<Complex64> = (0..8).map(|k| Complex64::new(k as f64 - 3.0, 0.5 * k as f64)).collect();
        let op = b.combine(&coeffs) + CMat::identity(3, 3) * c(0.25);
        let (c0, back) = b.coefficients(&op);
        assert!((c0 - c(0.25)).norm() < 1e-14);
        for (x, y) in back.iter().zip(&coeffs) {
            assert!((x - y).norm() < 1e-14);
        }
    }
}
