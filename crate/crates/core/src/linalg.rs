//! Dense matrix aliases and the few helpers nalgebra does not provide directly.

use nalgebra::{ComplexField, DMatrix, DVector};
use num_complex::Complex64;

pub type RMat = DMatrix<f64>;
pub type CMat = DMatrix<Complex64>;
pub type RVec = DVector<f64>;
pub type CVec = DVector<Complex64>;

pub const I: Complex64 = Complex64::new(0.0, 1.0);

pub fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

pub fn to_complex(m: &RMat) -> CMat {
    m.map(c)
}

pub fn to_complex_vec(v: &RVec) -> CVec {
    v.map(c)
}

/// Column-stacking operator: columns of `m` placed one below another.
pub fn vec<T: nalgebra::Scalar>(m: &DMatrix<T>) -> DVector<T> {
    // nalgebra storage is already column-major.
    DVector::from_column_slice(m.as_slice())
}

/// `|a - b|_F / (1 + |a|_F)`.
pub fn relative_residual<T: ComplexField<RealField = f64>>(lhs: &DMatrix<T>, rhs: &DMatrix<T>) -> f64 {
    (lhs - rhs).norm() / (1.0 + lhs.norm())
}

pub fn max_abs<T: ComplexField<RealField = f64>>(m: &DMatrix<T>) -> f64 {
    m.iter().map(|x| x.clone().modulus()).fold(0.0, f64::max)
}

pub fn max_imag(m: &CMat) -> f64 {
    m.iter().map(|z| z.im.abs()).fold(0.0, f64::max)
}

/// Largest singular value.
pub fn spectral_norm(m: &CMat) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.clone().singular_values().max()
}

pub fn trace_product<T: ComplexField<RealField = f64>>(a: &DMatrix<T>, b: &DMatrix<T>) -> T {
    let mut acc = T::zero();
    for i in 0..a.nrows() {
        for j in 0..a.ncols() {
            acc += a[(i, j)].clone() * b[(j, i)].clone();
        }
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn vec_stacks_columns() {
        let m = RMat::from_row_slice(2, 2, &[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(vec(&m).as_slice(), &[1.0, 3.0, 2.0, 4.0]);
    }

    #[test]
    fn spectral_norm_of_diagonal() {
        let m = CMat::from_diagonal(&CVec::from_vec(alloc::vec![c(1.0), Complex64::new(0.0, -3.0)]));
        assert!((spectral_norm(&m) - 3.0).abs() < 1e-14);
        assert_eq!(spectral_norm(&CMat::zeros(0, 0)), 0.0);
    }
}
