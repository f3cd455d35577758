//! Exact arithmetic in `Q(t)`, `t² = q`, for spectral projectors.
//!
//! Spectral projectors of `R^T R` formed in floating point (by Lagrange
//! products or eigensolvers) lose everything to cancellation once the spread
//! of eigenvalues is large, so they are formed exactly in a basis where all
//! R-matrix entries lie in `Q(t)` and only the final result is rounded.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Simplest rational within half an ulp of `x > 0`.
pub fn simplest_rational(x: f64) -> BigRational {
    assert!(x.is_finite() && x > 0.0, "simplest_rational needs a positive finite input");
    let exact = BigRational::from_float(x).expect("finite");
    let (m, e, _) = num_traits::float::FloatCore::integer_decode(x);
    let _ = m;
    // ulp = 2^e for the decoded mantissa; half of it bounds the search interval.
    let half_ulp = if e >= 1 {
        BigRational::from_integer(BigInt::one() << (e - 1) as usize)
    } else {
        BigRational::new(BigInt::one(), BigInt::one() << (1 - e) as usize)
    };
    let lo = &exact - &half_ulp;
    let hi = &exact + &half_ulp;
    let lo = if lo.is_positive() { lo } else { exact.clone() };
    simplest_in(&lo, &hi)
}

fn simplest_in(lo: &BigRational, hi: &BigRational) -> BigRational {
    let c = lo.ceil();
    if &c <= hi {
        return c;
    }
    let f = lo.floor();
    let a = (hi - &f).recip();
    let b = (lo - &f).recip();
    f + simplest_in(&a, &b).recip()
}

fn rational_sqrt(x: &BigRational) -> Option<BigRational> {
    if x.is_negative() {
        return None;
    }
    let n = x.numer();
    let d = x.denom();
    let sn = n.sqrt();
    let sd = d.sqrt();
    if &(&sn * &sn) == n && &(&sd * &sd) == d {
        Some(BigRational::new(sn, sd))
    } else {
        None
    }
}

/// `a + b t`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Elem {
    pub a: BigRational,
    pub b: BigRational,
}

impl Elem {
    pub fn zero() -> Self {
        Self { a: BigRational::zero(), b: BigRational::zero() }
    }
    pub fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }
}

/// The field `Q(t)` with `t² = q`. When `q` is a rational square, `t` is
/// rational and every element has `b = 0`.
#[derive(Clone, Debug)]
pub struct Field {
    q: BigRational,
    t: Option<BigRational>,
    t_f64: f64,
}

impl Field {
    pub fn new(q: BigRational) -> Result<Self> {
        if !q.is_positive() {
            return Err(Error::InvalidDeformation("exact q must be positive".into()));
        }
        let t = rational_sqrt(&q);
        let t_f64 = match &t {
            Some(t) => t.to_f64().unwrap_or(f64::NAN),
            None => q.to_f64().unwrap_or(f64::NAN).sqrt(),
        };
        Ok(Self { q, t, t_f64 })
    }

    pub fn from_f64(q: f64) -> Result<Self> {
        if !(q.is_finite() && q > 0.0) {
            return Err(Error::InvalidDeformation(format!("q = {q}")));
        }
        Self::new(simplest_rational(q))
    }

    pub fn q(&self) -> &BigRational {
        &self.q
    }

    pub fn rational(&self, r: BigRational) -> Elem {
        Elem { a: r, b: BigRational::zero() }
    }

    pub fn int(&self, k: i64) -> Elem {
        self.rational(BigRational::from_integer(BigInt::from(k)))
    }

    pub fn one(&self) -> Elem {
        self.int(1)
    }

    pub fn q_pow(&self, k: i64) -> BigRational {
        let p = Pow(self.q.clone());
        p.pow(k)
    }

    /// `t^k`.
    pub fn t_pow(&self, k: i64) -> Elem {
        if let Some(t) = &self.t {
            return self.rational(Pow(t.clone()).pow(k));
        }
        let (m, r) = k.div_mod_floor(&2);
        let c = self.q_pow(m);
        if r == 0 {
            Elem { a: c, b: BigRational::zero() }
        } else {
            Elem { a: BigRational::zero(), b: c }
        }
    }

    pub fn add(&self, x: &Elem, y: &Elem) -> Elem {
        Elem { a: &x.a + &y.a, b: &x.b + &y.b }
    }

    pub fn sub(&self, x: &Elem, y: &Elem) -> Elem {
        Elem { a: &x.a - &y.a, b: &x.b - &y.b }
    }

    pub fn mul(&self, x: &Elem, y: &Elem) -> Elem {
        if x.b.is_zero() && y.b.is_zero() {
            return Elem { a: &x.a * &y.a, b: BigRational::zero() };
        }
        Elem { a: &x.a * &y.a + &x.b * &y.b * &self.q, b: &x.a * &y.b + &x.b * &y.a }
    }

    pub fn inv(&self, x: &Elem) -> Result<Elem> {
        if x.is_zero() {
            return Err(Error::Numerical("division by zero in exact arithmetic".into()));
        }
        if x.b.is_zero() {
            return Ok(Elem { a: x.a.recip(), b: BigRational::zero() });
        }
        let norm = &x.a * &x.a - &x.b * &x.b * &self.q;
        Ok(Elem { a: &x.a / &norm, b: -(&x.b / &norm) })
    }

    pub fn to_f64(&self, x: &Elem) -> f64 {
        let a = x.a.to_f64().unwrap_or(f64::NAN);
        if x.b.is_zero() {
            a
        } else {
            a + x.b.to_f64().unwrap_or(f64::NAN) * self.t_f64
        }
    }

    /// `[k]_q` as a rational.
    pub fn q_integer(&self, k: i64) -> BigRational {
        let num = self.q_pow(k) - self.q_pow(-k);
        let den = &self.q - self.q.recip();
        num / den
    }
}

struct Pow(BigRational);

impl Pow {
    fn pow(&self, k: i64) -> BigRational {
        let base = if k >= 0 { self.0.clone() } else { self.0.recip() };
        let mut acc = BigRational::one();
        for _ in 0..k.unsigned_abs() {
            acc *= &base;
        }
        acc
    }
}

/// Square matrix of size `d² × d²` stored by nonzero entries.
#[derive(Clone, Debug)]
pub struct SparseExact {
    pub size: usize,
    pub entries: BTreeMap<(usize, usize), Elem>,
}

impl SparseExact {
    pub fn new(size: usize) -> Self {
        Self { size, entries: BTreeMap::new() }
    }

    pub fn add_to(&mut self, field: &Field, r: usize, c: usize, v: Elem) {
        if v.is_zero() {
            return;
        }
        let slot = self.entries.entry((r, c)).or_insert_with(Elem::zero);
        *slot = field.add(slot, &v);
        if slot.is_zero() {
            self.entries.remove(&(r, c));
        }
    }

    /// `P X P` on `V ⊗ V` with `dim = dim V`.
    pub fn flip_conjugate(&self, dim: usize) -> Self {
        let swap = |k: usize| (k % dim) * dim + k / dim;
        let entries = self.entries.iter().map(|(&(r, c), v)| ((swap(r), swap(c)), v.clone())).collect();
        Self { size: self.size, entries }
    }

    pub fn to_dense_f64(&self, field: &Field) -> Vec<Vec<f64>> {
        let mut out = vec![vec![0.0; self.size]; self.size];
        for (&(r, c), v) in &self.entries {
            out[r][c] = field.to_f64(v);
        }
        out
    }
}

type Dense = Vec<Vec<Elem>>;

fn dense_mul(field: &Field, a: &Dense, b: &Dense) -> Dense {
    let n = a.len();
    let mut out = vec![vec![Elem::zero(); n]; n];
    for i in 0..n {
        for k in 0..n {
            if a[i][k].is_zero() {
                continue;
            }
            for j in 0..n {
                if b[k][j].is_zero() {
                    continue;
                }
                let p = field.mul(&a[i][k], &b[k][j]);
                out[i][j] = field.add(&out[i][j], &p);
            }
        }
    }
    out
}

/// Connected components of the union of the sparsity patterns.
fn blocks(size: usize, mats: &[&SparseExact]) -> Vec<Vec<usize>> {
    let mut parent: Vec<usize> = (0..size).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    for m in mats {
        for &(r, c) in m.entries.keys() {
            let (a, b) = (find(&mut parent, r), find(&mut parent, c));
            if a != b {
                parent[a] = b;
            }
        }
    }
    let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for i in 0..size {
        let root = find(&mut parent, i);
        groups.entry(root).or_default().push(i);
    }
    groups.into_values().collect()
}

/// An eigenvalue `x_i = t^{t_exponent}` together with which basis indices
/// of `V ⊗ V` can carry it.
pub struct ComponentSpec<'a> {
    pub t_exponent: i64,
    pub supports: &'a dyn Fn(usize) -> bool,
}

/// Exactly computed spectral projectors of `M = (P R P) R`.
pub struct ExactProjectors {
    /// Row-major `size × size` projectors, rounded to f64, in the basis of `R`.
    pub projectors: Vec<Vec<Vec<f64>>>,
    /// Every expected eigenvalue was found with a one-dimensional eigenspace
    /// and the eigenvector equations hold exactly.
    pub eigen_identity_exact: bool,
    /// Number of diagonal blocks of `M`.
    pub block_count: usize,
}

/// Kernel of a square matrix by exact row reduction: returns its dimension
/// and the basis vector attached to the first free column.
fn kernel_vector(field: &Field, mut a: Dense) -> Result<(usize, Option<Vec<Elem>>)> {
    let n = a.len();
    let mut pivots: Vec<(usize, usize)> = Vec::new();
    let mut row = 0;
    for col in 0..n {
        let Some(p) = (row..n).find(|&r| !a[r][col].is_zero()) else { continue };
        a.swap(row, p);
        let inv = field.inv(&a[row][col])?;
        for j in col..n {
            a[row][j] = field.mul(&a[row][j], &inv);
        }
        for r in 0..n {
            if r == row || a[r][col].is_zero() {
                continue;
            }
            let f = a[r][col].clone();
            for j in col..n {
                if a[row][j].is_zero() {
                    continue;
                }
                let v = field.mul(&f, &a[row][j]);
                a[r][j] = field.sub(&a[r][j], &v);
            }
        }
        pivots.push((row, col));
        row += 1;
        if row == n {
            break;
        }
    }
    let pivot_cols: Vec<usize> = pivots.iter().map(|&(_, c)| c).collect();
    let free: Vec<usize> = (0..n).filter(|c| !pivot_cols.contains(c)).collect();
    let Some(&f) = free.first() else { return Ok((0, None)) };
    let mut v = vec![Elem::zero(); n];
    v[f] = field.one();
    for &(r, c) in &pivots {
        v[c] = field.sub(&Elem::zero(), &a[r][f]);
    }
    Ok((free.len(), Some(v)))
}

fn mat_vec(field: &Field, m: &Dense, v: &[Elem], transpose: bool) -> Vec<Elem> {
    let n = v.len();
    (0..n)
        .map(|i| {
            let mut acc = Elem::zero();
            for (j, vj) in v.iter().enumerate() {
                let mij = if transpose { &m[j][i] } else { &m[i][j] };
                if !mij.is_zero() && !vj.is_zero() {
                    acc = field.add(&acc, &field.mul(mij, vj));
                }
            }
            acc
        })
        .collect()
}

/// Projectors for `M = (P R P) R`, computed on each diagonal block of `M`.
/// Each component meets a block in at most one dimension, so the projector
/// there is `v wᵀ / (w·v)` for exact right and left eigenvectors `v`, `w`.
pub fn spectral_projectors(
    field: &Field,
    r: &SparseExact,
    dim: usize,
    comps: &[ComponentSpec<'_>],
) -> Result<ExactProjectors> {
    let size = r.size;
    let r21 = r.flip_conjugate(dim);
    let xs: Vec<Elem> = comps.iter().map(|c| field.t_pow(c.t_exponent)).collect();
    let mut projectors = vec![vec![vec![0.0; size]; size]; comps.len()];
    let mut exact_ok = true;
    let groups = blocks(size, &[r, &r21]);
    for idx in &groups {
        let s = idx.len();
        let local = |m: &SparseExact| -> Dense {
            let mut d = vec![vec![Elem::zero(); s]; s];
            for (a, &ra) in idx.iter().enumerate() {
                for (b, &cb) in idx.iter().enumerate() {
                    if let Some(v) = m.entries.get(&(ra, cb)) {
                        d[a][b] = v.clone();
                    }
                }
            }
            d
        };
        let m = dense_mul(field, &local(&r21), &local(r));
        let present: Vec<usize> =
            (0..comps.len()).filter(|&i| idx.iter().any(|&k| (comps[i].supports)(k))).collect();
        for &i in &present {
            let shifted = |transpose: bool| -> Dense {
                (0..s)
                    .map(|a| {
                        (0..s)
                            .map(|b| {
                                let v = if transpose { &m[b][a] } else { &m[a][b] };
                                if a == b {
                                    field.sub(v, &xs[i])
                                } else {
                                    v.clone()
                                }
                            })
                            .collect()
                    })
                    .collect()
            };
            let (kr, v) = kernel_vector(field, shifted(false))?;
            let (kl, w) = kernel_vector(field, shifted(true))?;
            if kr != 1 || kl != 1 {
                exact_ok = false;
            }
            let (Some(v), Some(w)) = (v, w) else { continue };
            let mut wv = Elem::zero();
            for (a, b) in w.iter().zip(&v) {
                wv = field.add(&wv, &field.mul(a, b));
            }
            if wv.is_zero() {
                exact_ok = false;
                continue;
            }
            let mv = mat_vec(field, &m, &v, false);
            let mw = mat_vec(field, &m, &w, true);
            for a in 0..s {
                if mv[a] != field.mul(&xs[i], &v[a]) || mw[a] != field.mul(&xs[i], &w[a]) {
                    exact_ok = false;
                }
            }
            let inv = field.inv(&wv)?;
            let vf: Vec<f64> = v.iter().map(|x| field.to_f64(&field.mul(x, &inv))).collect();
            let wf: Vec<f64> = w.iter().map(|x| field.to_f64(x)).collect();
            for a in 0..s {
                for b in 0..s {
                    projectors[i][idx[a]][idx[b]] = vf[a] * wf[b];
                }
            }
        }
    }
    Ok(ExactProjectors { projectors, eigen_identity_exact: exact_ok, block_count: groups.len() })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rat(a: i64, b: i64) -> BigRational {
        BigRational::new(BigInt::from(a), BigInt::from(b))
    }

    #[test]
    fn simplest_rational_recovers_decimals() {
        assert_eq!(simplest_rational(0.9), rat(9, 10));
        assert_eq!(simplest_rational(1.1), rat(11, 10));
        assert_eq!(simplest_rational(2.0), rat(2, 1));
        assert_eq!(simplest_rational(0.5), rat(1, 2));
        assert_eq!(simplest_rational(1.0 / 3.0), rat(1, 3));
        let x = std::f64::consts::E;
        assert_eq!(simplest_rational(x).to_f64().unwrap(), x);
    }

    #[test]
    fn field_arithmetic() {
        let f = Field::new(rat(2, 1)).unwrap();
        let t = f.t_pow(1);
        let t2 = f.mul(&t, &t);
        assert_eq!(t2, f.int(2));
        let x = f.add(&f.int(3), &t);
        let y = f.inv(&x).unwrap();
        assert_eq!(f.mul(&x, &y), f.one());
        assert!((f.to_f64(&f.t_pow(-3)) - 2f64.powf(-1.5)).abs() < 1e-15);
        assert_eq!(f.q_integer(2), rat(5, 2));
    }

    #[test]
    fn perfect_square_q_is_rational() {
        let f = Field::new(rat(9, 4)).unwrap();
        let t = f.t_pow(3);
        assert!(t.b.is_zero());
        assert_eq!(t.a, rat(27, 8));
    }
}
