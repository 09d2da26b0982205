//! The linear maps `Theta^-`, `Theta^+ : C^s -> C^{s x s}`,
//!
//! ```text
//! Theta^-(b)_ij = sum_k f_ijk b_k      (antisymmetric)
//! Theta^+(b)_ij = sum_k d_ijk b_k      (symmetric)
//! ```
//!
//! with column `i` of `Theta^-(b)` equal to `F_i^T b`, so that
//! `vec(Theta^-(b)) = F b` and `vec(Theta^+(b)) = D b`.

use alloc::format;
use alloc::vec::Vec;

use nalgebra::{ComplexField, DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::algebra::{StructureTensors, Tensor3};
use crate::error::{shape_error, Error, Result};
use crate::linalg::{vec, CMat, CVec, RMat};
use crate::report::{IdentityCheck, IdentityReport};

/// Tensor permutation (commutation) matrix on `C^{s^2}`: it maps
/// `vec(M)` to `vec(M^T)` and satisfies `P (A (x) B) P = B (x) A`.
///
/// Stored as an index map; [`KronPermutation::to_dense`] materializes it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct KronPermutation {
    s: usize,
}

impl KronPermutation {
    pub fn new(s: usize) -> Self {
        KronPermutation { s }
    }

    pub fn size(&self) -> usize {
        self.s * self.s
    }

    /// Image of a column-major vec index `i + s j` is `j + s i`.
    #[inline]
    pub fn index(&self, p: usize) -> usize {
        let (i, j) = (p % self.s, p / self.s);
        j + self.s * i
    }

    /// `P M`.
    pub fn apply_rows<T: nalgebra::Scalar>(&self, m: &DMatrix<T>) -> DMatrix<T> {
        DMatrix::from_fn(m.nrows(), m.ncols(), |r, c| m[(self.index(r), c)].clone())
    }

    /// `M P`.
    pub fn apply_cols<T: nalgebra::Scalar>(&self, m: &DMatrix<T>) -> DMatrix<T> {
        DMatrix::from_fn(m.nrows(), m.ncols(), |r, c| m[(r, self.index(c))].clone())
    }

    pub fn to_dense(&self) -> RMat {
        let size = self.size();
        let mut p = RMat::zeros(size, size);
        for r in 0..size {
            p[(r, self.index(r))] = 1.0;
        }
        p
    }
}

/// Borrowed structure tensors plus the permutation matrix on `s^2`.
#[derive(Debug, Clone, Copy)]
pub struct ThetaContext<'a> {
    tensors: &'a StructureTensors,
    perm: KronPermutation,
}

/// Result of recovering `g` from a candidate `G = Theta^-(g)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Reconstruction<T: nalgebra::Scalar> {
    /// `g = -(1/n) (Tr(F_1 G), .., Tr(F_s G))^T`.
    pub g: DVector<T>,
    /// `max(|G + G^T|_F, |Theta^-(g) - G|_F)`. Zero exactly when `G` is an
    /// image of `Theta^-`.
    pub residual: f64,
    /// `|(I (x) G) F + (G (x) I) F - F G|_F`, the vectorized form of
    /// `G Theta^-(x) + Theta^-(x) G^T - Theta^-(G x) = 0`.
    pub hypothesis_residual: f64,
}

impl<'a> ThetaContext<'a> {
    pub fn new(tensors: &'a StructureTensors) -> Self {
        ThetaContext {
            tensors,
            perm: KronPermutation::new(tensors.s()),
        }
    }

    pub fn tensors(&self) -> &'a StructureTensors {
        self.tensors
    }

    pub fn perm(&self) -> KronPermutation {
        self.perm
    }

    pub fn n(&self) -> usize {
        self.tensors.n()
    }

    pub fn s(&self) -> usize {
        self.tensors.s()
    }

    fn check_len(&self, len: usize) -> Result<()> {
        if len != self.s() {
            return Err(shape_error(
                "theta argument",
                format!("length {}", self.s()),
                format!("length {len}"),
            ));
        }
        Ok(())
    }

    /// `Theta^-(beta)`. Row and column vectors are treated alike; pass
    /// either through `as_slice()`.
    pub fn theta_minus<T: ComplexField<RealField = f64>>(&self, beta: &[T]) -> Result<DMatrix<T>> {
        self.check_len(beta.len())?;
        Ok(contract(self.tensors.f(), beta))
    }

    /// `Theta^+(beta)`.
    pub fn theta_plus<T: ComplexField<RealField = f64>>(&self, beta: &[T]) -> Result<DMatrix<T>> {
        self.check_len(beta.len())?;
        Ok(contract(self.tensors.d(), beta))
    }

    // Unchecked variants for callers that already validated dimensions.
    pub(crate) fn tm<T: ComplexField<RealField = f64>>(&self, beta: &DVector<T>) -> DMatrix<T> {
        debug_assert_eq!(beta.len(), self.s());
        contract(self.tensors.f(), beta.as_slice())
    }

    pub(crate) fn tp<T: ComplexField<RealField = f64>>(&self, beta: &DVector<T>) -> DMatrix<T> {
        debug_assert_eq!(beta.len(), self.s());
        contract(self.tensors.d(), beta.as_slice())
    }

    /// Recovers `g` with `G = Theta^-(g)` and certifies it.
    ///
    /// Non-images are not an error: the residual says by how much `G`
    /// misses the image.
    pub fn reconstruct_theta_minus_generator<T: ComplexField<RealField = f64>>(
        &self,
        g_mat: &DMatrix<T>,
    ) -> Result<Reconstruction<T>> {
        let s = self.s();
        if g_mat.shape() != (s, s) {
            return Err(shape_error(
                "G",
                format!("{s}x{s}"),
                format!("{}x{}", g_mat.nrows(), g_mat.ncols()),
            ));
        }
        let scale = -1.0 / self.n() as f64;
        let g = DVector::from_iterator(
            s,
            self.tensors.f_mats().iter().map(|fi| {
                let mut tr = T::zero();
                for a in 0..s {
                    for b in 0..s {
                        let w = fi[(a, b)];
                        if w != 0.0 {
                            tr += g_mat[(b, a)].clone() * T::from_real(w);
                        }
                    }
                }
                tr * T::from_real(scale)
            }),
        );
        let antisym = (g_mat + g_mat.transpose()).norm();
        let image = (self.tm(&g) - g_mat).norm();
        Ok(Reconstruction {
            residual: antisym.max(image),
            hypothesis_residual: self.hypothesis_residual(g_mat),
            g,
        })
    }

    /// `|(I (x) G) F + (G (x) I) F - F G|_F`, evaluated block by block:
    /// block `i` is `G F_i^T + sum_j G_ij F_j^T - F_i^T G`.
    pub fn hypothesis_residual<T: ComplexField<RealField = f64>>(&self, g_mat: &DMatrix<T>) -> f64 {
        let s = self.s();
        let ft: Vec<DMatrix<T>> = self
            .tensors
            .f_mats()
            .iter()
            .map(|fi| fi.transpose().map(T::from_real))
            .collect();
        let mut total = 0.0;
        for i in 0..s {
            let mut block = g_mat * &ft[i] - &ft[i] * g_mat;
            for (j, fj) in ft.iter().enumerate() {
                let w = g_mat[(i, j)].clone();
                block += fj * w;
            }
            total += block.norm_squared();
        }
        libm::sqrt(total)
    }
}

fn contract<T: ComplexField<RealField = f64>>(t: &Tensor3, beta: &[T]) -> DMatrix<T> {
    let s = t.dim();
    DMatrix::from_fn(s, s, |i, j| {
        let mut acc = T::zero();
        for (w, b) in t.fiber(i, j).iter().zip(beta) {
            if *w != 0.0 {
                acc += b.clone() * T::from_real(*w);
            }
        }
        acc
    })
}

fn random_complex(rng: &mut ChaCha8Rng, len: usize) -> CVec {
    CVec::from_fn(len, |_, _| {
        Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
    })
}

fn random_real_mat(rng: &mut ChaCha8Rng, s: usize) -> RMat {
    RMat::from_fn(s, s, |_, _| rng.random_range(-1.0..1.0))
}

/// Randomized check of the `Theta^-`/`Theta^+` product identities, plus
/// (anti)symmetry, linearity, and the stacked vec forms.
///
/// Each residual is normalized by `1 + |beta| |gamma|`.
pub fn verify_theta_identities(ctx: &ThetaContext<'_>, trials: usize, seed: u64, tol: f64) -> Result<IdentityReport> {
    if trials == 0 {
        return Err(Error::InvalidArgument("trials must be >= 1".into()));
    }
    let s = ctx.s();
    let n = ctx.n() as f64;
    let to_c = |m: &RMat| m.map(|x| Complex64::new(x, 0.0));
    let f_st = to_c(ctx.tensors().f_stacked());
    let d_st = to_c(ctx.tensors().d_stacked());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let names = [
        "theta_minus_swap",
        "theta_plus_swap",
        "theta_minus_self_null",
        "theta_minus_of_theta_minus",
        "theta_minus_of_theta_plus",
        "theta_plus_of_theta_minus",
        "theta_plus_of_theta_plus",
        "theta_minus_antisymmetric",
        "theta_plus_symmetric",
        "theta_linearity",
        "vec_theta_minus",
        "vec_theta_plus",
    ];
    let mut checks: Vec<IdentityCheck> = names.iter().map(|n| IdentityCheck::new(*n)).collect();
    let eye = CMat::identity(s, s);

    for trial in 0..trials {
        let beta = random_complex(&mut rng, s);
        let gamma = random_complex(&mut rng, s);
        let a = Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        let scale = 1.0 + beta.norm() * gamma.norm();
        let (tmb, tmg) = (ctx.tm(&beta), ctx.tm(&gamma));
        let (tpb, tpg) = (ctx.tp(&beta), ctx.tp(&gamma));
        let idx = [trial];

        // The self-annihilation identity involves beta alone.
        let self_scale = 1.0 + beta.norm_squared();
        let r = [
            (&tmb * &gamma + &tmg * &beta).norm() / scale,
            (&tpb * &gamma - &tpg * &beta).norm() / scale,
            (&tmb * &beta).norm() / self_scale,
            (ctx.tm(&(&tmb * &gamma)) - (&tmb * &tmg - &tmg * &tmb)).norm() / scale,
            (ctx.tm(&(&tpb * &gamma)) - (&tmb * &tpg + &tmg * &tpb)).norm() / scale,
            {
                let lhs = ctx.tp(&(&tmb * &gamma));
                (&lhs - (&tpb * &tmg - &tmg * &tpb))
                    .norm()
                    .max((&lhs - (&tmb * &tpg - &tpg * &tmb)).norm())
                    / scale
            },
            {
                let outer = &beta * gamma.transpose();
                let inner = (beta.transpose() * &gamma)[(0, 0)];
                let rhs = &tpb * &tpg - &tmg * &tmb - (&eye * inner - outer) * Complex64::new(2.0 / n, 0.0);
                (ctx.tp(&(&tpb * &gamma)) - rhs).norm() / scale
            },
            (&tmb + tmb.transpose()).norm() / scale,
            (&tpb - tpb.transpose()).norm() / scale,
            {
                let comb = &beta * a + &gamma;
                (ctx.tm(&comb) - (&tmb * a + &tmg))
                    .norm()
                    .max((ctx.tp(&comb) - (&tpb * a + &tpg)).norm())
                    / scale
            },
            (vec(&tmb) - &f_st * &beta).norm() / scale,
            (vec(&tpb) - &d_st * &beta).norm() / scale,
        ];
        for (check, residual) in checks.iter_mut().zip(r) {
            check.record(residual, &idx);
        }
    }
    let mut report = IdentityReport::new(tol);
    for c in checks {
        report.push(c);
    }
    Ok(report)
}

/// Checks the permutation-matrix properties and the Kronecker identities of
/// the stacked `F` and `D` on random real `A`, `B`.
///
/// The swap identities are normalized by `1 + |A|_F |B|_F`.
pub fn verify_kron_identities(ctx: &ThetaContext<'_>, trials: usize, seed: u64, tol: f64) -> Result<IdentityReport> {
    if trials == 0 {
        return Err(Error::InvalidArgument("trials must be >= 1".into()));
    }
    let s = ctx.s();
    let perm = ctx.perm();
    let dense = perm.to_dense();
    let f = ctx.tensors().f_stacked();
    let d = ctx.tensors().d_stacked();
    let mut report = IdentityReport::new(tol);

    let mut sym = IdentityCheck::new("perm_symmetric");
    sym.record((&dense - dense.transpose()).norm(), &[]);
    report.push(sym);
    let mut invol = IdentityCheck::new("perm_involutory");
    invol.record((&dense * &dense - RMat::identity(s * s, s * s)).norm(), &[]);
    report.push(invol);
    let mut dense_agrees = IdentityCheck::new("perm_index_map_matches_dense");
    dense_agrees.record((perm.apply_rows(f) - &dense * f).norm(), &[]);
    report.push(dense_agrees);

    let mut f_perm = IdentityCheck::new("stacked_f_perm_antisymmetric");
    f_perm.record((f + perm.apply_rows(f)).norm(), &[]);
    report.push(f_perm);
    let mut d_perm = IdentityCheck::new("stacked_d_perm_symmetric");
    d_perm.record((d - perm.apply_rows(d)).norm(), &[]);
    report.push(d_perm);

    let mut swap = IdentityCheck::new("perm_swaps_kronecker");
    let mut f_swap = IdentityCheck::new("stacked_f_kronecker_swap");
    let mut d_swap = IdentityCheck::new("stacked_d_kronecker_swap");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ft = f.transpose();
    let dt = d.transpose();
    for trial in 0..trials {
        let a = random_real_mat(&mut rng, s);
        let b = random_real_mat(&mut rng, s);
        let scale = 1.0 + a.norm() * b.norm();
        let ab = a.kronecker(&b);
        let ba = b.kronecker(&a);
        swap.record((perm.apply_cols(&perm.apply_rows(&ab)) - &ba).norm() / scale, &[trial]);
        f_swap.record((&ft * &ab * f - &ft * &ba * f).norm() / scale, &[trial]);
        d_swap.record((&dt * &ab * d - &dt * &ba * d).norm() / scale, &[trial]);
    }
    report.push(swap);
    report.push(f_swap);
    report.push(d_swap);
    Ok(report)
}
