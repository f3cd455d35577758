//! Dense complex matrix helpers shared by the representation layers.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

pub type C64 = Complex64;
pub type CMat = DMatrix<C64>;
pub type CVec = DVector<C64>;

#[inline]
pub fn re(x: f64) -> C64 {
    C64::new(x, 0.0)
}

pub fn diag(entries: &[f64]) -> CMat {
    CMat::from_diagonal(&CVec::from_iterator(entries.len(), entries.iter().map(|&x| re(x))))
}

pub fn kron(a: &CMat, b: &CMat) -> CMat {
    a.kronecker(b)
}

/// Index of `e_i ⊗ e_j` in the lexicographic basis of `V ⊗ V`.
#[inline]
pub fn pair_index(dim: usize, i: usize, j: usize) -> usize {
    i * dim + j
}

/// The flip `e_i ⊗ e_j -> e_j ⊗ e_i` on `V ⊗ V`.
pub fn flip(dim: usize) -> CMat {
    let n = dim * dim;
    let mut p = CMat::zeros(n, n);
    for i in 0..dim {
        for j in 0..dim {
            p[(pair_index(dim, j, i), pair_index(dim, i, j))] = re(1.0);
        }
    }
    p
}

/// Conjugates `m` by the flip without forming the permutation matrix.
pub fn flip_conjugate(m: &CMat, dim: usize) -> CMat {
    let n = dim * dim;
    let swap = |k: usize| pair_index(dim, k % dim, k / dim);
    CMat::from_fn(n, n, |r, c| m[(swap(r), swap(c))])
}

/// Spectral norm (largest singular value).
pub fn op_norm(m: &CMat) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    if m.iter().all(|z| *z == C64::new(0.0, 0.0)) {
        return 0.0;
    }
    m.clone().svd(false, false).singular_values.max()
}

pub fn commutator(a: &CMat, b: &CMat) -> CMat {
    a * b - b * a
}

pub fn identity(n: usize) -> CMat {
    CMat::identity(n, n)
}

/// `‖A - A†‖` in operator norm.
pub fn hermiticity_defect(a: &CMat) -> f64 {
    op_norm(&(a - a.adjoint()))
}

pub fn max_abs_entry(m: &CMat) -> f64 {
    m.iter().fold(0.0_f64, |acc, z| acc.max(z.norm()))
}

pub fn kron_vec(a: &CVec, b: &CVec) -> CVec {
    a.kronecker(b)
}

pub fn all_finite(m: &CMat) -> bool {
    m.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}
