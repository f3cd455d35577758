//! Finite-dimensional irreducible representations of `U_q(sl_2)` and the
//! fundamental of `U_q(sl_n)`, in bases where `K` is real diagonal and
//! `F_i = E_i^T`.
//!
//! Coproduct: `Δ(E) = E⊗K + K⁻¹⊗E`, `Δ(F) = F⊗K + K⁻¹⊗F`, `Δ(K) = K⊗K`.
//! It is compatible with the conjugation `E† = F`, `K† = K`, so the tensor
//! product basis stays orthonormal for the invariant inner product.

use std::fmt;
use std::str::FromStr;

use num_rational::Rational64;

use crate::cartan::{q_number, rational_to_f64, Algebra, CartanData, DeformationParameter, Weight};
use crate::error::{Error, Result};
use crate::linalg::{commutator, diag, hermiticity_defect, kron, op_norm, re, CMat};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Backend {
    /// `V(n omega)` of `U_q(sl_2)`, dimension `n + 1`.
    Sl2Spin { n: usize },
    /// Defining representation `V(omega_1)` of `U_q(sl_n)`.
    SlnFundamental { n: usize },
}

impl Backend {
    pub fn algebra(&self) -> Algebra {
        match self {
            Backend::Sl2Spin { .. } => Algebra::Sl2,
            Backend::SlnFundamental { n } => Algebra::Sln(*n),
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Backend::Sl2Spin { n } => n + 1,
            Backend::SlnFundamental { n } => *n,
        }
    }

    /// The integer reported as `n_or_rank`: spin label for sl2, `n` for sl_n.
    pub fn label(&self) -> usize {
        match self {
            Backend::Sl2Spin { n } | Backend::SlnFundamental { n } => *n,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Generator {
    E(usize),
    F(usize),
    K(usize),
}

impl FromStr for Generator {
    type Err = Error;

    /// Accepts `E`, `F`, `K` (index 1) or e.g. `E2`, `K1`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::UnknownGenerator(s.to_string());
        let mut chars = s.chars();
        let head = chars.next().ok_or_else(bad)?;
        let rest: String = chars.collect();
        let idx = if rest.is_empty() { 1 } else { rest.parse::<usize>().map_err(|_| bad())? };
        if idx == 0 {
            return Err(bad());
        }
        match head {
            'E' => Ok(Generator::E(idx)),
            'F' => Ok(Generator::F(idx)),
            'K' => Ok(Generator::K(idx)),
            _ => Err(bad()),
        }
    }
}

impl fmt::Display for Generator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Generator::E(i) => write!(f, "E{i}"),
            Generator::F(i) => write!(f, "F{i}"),
            Generator::K(i) => write!(f, "K{i}"),
        }
    }
}

/// Matrices for the generators together with the weight of each basis vector.
#[derive(Clone, Debug)]
pub struct Irrep {
    backend: Backend,
    dp: DeformationParameter,
    cartan: CartanData,
    highest_weight: Weight,
    weights: Vec<Weight>,
    /// Diagonal `D = diag(c_k)` with `X_sym = D X_raw D⁻¹`; in the raw basis
    /// `E e_k = [k] e_{k-1}` and `F e_k = [n-k] e_{k+1}`.
    rescale: Vec<f64>,
    e: Vec<CMat>,
    f: Vec<CMat>,
    k: Vec<CMat>,
    k_inv: Vec<CMat>,
}

impl Irrep {
    pub fn backend(&self) -> Backend {
        self.backend
    }
    pub fn dim(&self) -> usize {
        self.backend.dim()
    }
    pub fn rank(&self) -> usize {
        self.cartan.rank()
    }
    pub fn deformation(&self) -> &DeformationParameter {
        &self.dp
    }
    pub fn cartan(&self) -> &CartanData {
        &self.cartan
    }
    pub fn highest_weight(&self) -> &Weight {
        &self.highest_weight
    }
    pub fn weights(&self) -> &[Weight] {
        &self.weights
    }
    pub fn rescale(&self) -> &[f64] {
        &self.rescale
    }
    /// `E_i`, `i` from 1.
    pub fn e(&self, i: usize) -> &CMat {
        &self.e[i - 1]
    }
    pub fn f(&self, i: usize) -> &CMat {
        &self.f[i - 1]
    }
    pub fn k(&self, i: usize) -> &CMat {
        &self.k[i - 1]
    }
    pub fn k_inv(&self, i: usize) -> &CMat {
        &self.k_inv[i - 1]
    }

    pub fn generator(&self, g: Generator) -> Result<&CMat> {
        let (i, set) = match g {
            Generator::E(i) => (i, &self.e),
            Generator::F(i) => (i, &self.f),
            Generator::K(i) => (i, &self.k),
        };
        if i == 0 || i > set.len() {
            return Err(Error::UnknownGenerator(g.to_string()));
        }
        Ok(&set[i - 1])
    }

    /// `diag(q^{(2 rho, wt_k)})`, the group-like element implementing `K_{2 rho}`.
    pub fn k_two_rho(&self) -> CMat {
        let two_rho = Rational64::from_integer(2) * &self.cartan.rho();
        let d: Vec<f64> =
            self.weights.iter().map(|w| self.dp.pow_rational(self.cartan.inner(&two_rho, w))).collect();
        diag(&d)
    }

    /// Charge of basis vector `k` under the `i`-th torus angle.
    pub fn torus_charge(&self, k: usize, i: usize) -> f64 {
        rational_to_f64(self.weights[k].coords()[i])
    }
}

fn diag_from_weights(weights: &[Weight], i: usize, dp: &DeformationParameter, sign: f64) -> CMat {
    let d: Vec<f64> = weights.iter().map(|w| dp.pow(sign * rational_to_f64(w.coords()[i]) / 2.0)).collect();
    diag(&d)
}

/// `V(n omega)` of `U_q(sl_2)`.
pub fn build_sl2_irrep(n: i64, dp: &DeformationParameter) -> Result<Irrep> {
    dp.require_quantum()?;
    if n < 0 {
        return Err(Error::NotDominant(format!("({n})")));
    }
    let n = n as usize;
    let d = n + 1;
    let mut e = CMat::zeros(d, d);
    for k in 1..=n {
        let a = q_number(k as f64, dp)? * q_number((n - k + 1) as f64, dp)?;
        e[(k - 1, k)] = re(a.sqrt());
    }
    let f = e.transpose();
    let weights: Vec<Weight> = (0..d).map(|k| Weight::from_ints(&[n as i64 - 2 * k as i64])).collect();
    let mut rescale = vec![1.0; d];
    for k in 1..d {
        rescale[k] = rescale[k - 1] * (q_number(k as f64, dp)? / q_number((n - k + 1) as f64, dp)?).sqrt();
    }
    let k = diag_from_weights(&weights, 0, dp, 1.0);
    let k_inv = diag_from_weights(&weights, 0, dp, -1.0);
    Ok(Irrep {
        backend: Backend::Sl2Spin { n },
        dp: *dp,
        cartan: CartanData::sl2(),
        highest_weight: Weight::from_ints(&[n as i64]),
        weights,
        rescale,
        e: vec![e],
        f: vec![f],
        k: vec![k],
        k_inv: vec![k_inv],
    })
}

/// Weight of `e_a` (from 0) in `V(omega_1)` of sl_n: `omega_{a+1} - omega_a`.
pub fn fundamental_weight_of(n: usize, a: usize) -> Weight {
    let r = n - 1;
    let mut c = vec![0i64; r];
    if a < r {
        c[a] += 1;
    }
    if a > 0 {
        c[a - 1] -= 1;
    }
    Weight::from_ints(&c)
}

/// Defining representation of `U_q(sl_n)`.
pub fn build_sln_fundamental(n: i64, dp: &DeformationParameter) -> Result<Irrep> {
    dp.require_quantum()?;
    if n < 2 {
        return Err(Error::InvalidParameter(format!("sl_n requires n >= 2, got {n}")));
    }
    let n = n as usize;
    let cartan = CartanData::new(Algebra::Sln(n))?;
    let weights: Vec<Weight> = (0..n).map(|a| fundamental_weight_of(n, a)).collect();
    let mut es = Vec::with_capacity(n - 1);
    let mut fs = Vec::with_capacity(n - 1);
    let mut ks = Vec::with_capacity(n - 1);
    let mut kis = Vec::with_capacity(n - 1);
    for i in 0..n - 1 {
        let mut e = CMat::zeros(n, n);
        e[(i, i + 1)] = re(1.0);
        fs.push(e.transpose());
        es.push(e);
        ks.push(diag_from_weights(&weights, i, dp, 1.0));
        kis.push(diag_from_weights(&weights, i, dp, -1.0));
    }
    Ok(Irrep {
        backend: Backend::SlnFundamental { n },
        dp: *dp,
        cartan,
        highest_weight: Weight::fundamental(n - 1, 1),
        weights,
        rescale: vec![1.0; n],
        e: es,
        f: fs,
        k: ks,
        k_inv: kis,
    })
}

pub fn build_irrep(backend: Backend, dp: &DeformationParameter) -> Result<Irrep> {
    match backend {
        Backend::Sl2Spin { n } => build_sl2_irrep(n as i64, dp),
        Backend::SlnFundamental { n } => build_sln_fundamental(n as i64, dp),
    }
}

/// Image of a generator under `Δ` acting on `V ⊗ V`.
pub fn coproduct(rep: &Irrep, g: Generator) -> Result<CMat> {
    let x = rep.generator(g)?;
    Ok(match g {
        Generator::K(_) => kron(x, x),
        Generator::E(i) | Generator::F(i) => kron(x, rep.k(i)) + kron(rep.k_inv(i), x),
    })
}

/// `Δ^op = P Δ P`.
pub fn coproduct_op(rep: &Irrep, g: Generator) -> Result<CMat> {
    let x = rep.generator(g)?;
    Ok(match g {
        Generator::K(_) => kron(x, x),
        Generator::E(i) | Generator::F(i) => kron(rep.k(i), x) + kron(x, rep.k_inv(i)),
    })
}

pub fn all_generators(rank: usize) -> Vec<Generator> {
    (1..=rank).flat_map(|i| [Generator::E(i), Generator::F(i), Generator::K(i)]).collect()
}

/// Largest residual of each group of defining relations.
#[derive(Clone, Debug, Default)]
pub struct RelationReport {
    pub k_conjugation: f64,
    pub ef_commutator: f64,
    pub cartan_commute: f64,
    pub cross_commute: f64,
    pub serre: f64,
    pub hermiticity: f64,
}

impl RelationReport {
    pub fn max(&self) -> f64 {
        [
            self.k_conjugation,
            self.ef_commutator,
            self.cartan_commute,
            self.cross_commute,
            self.serre,
            self.hermiticity,
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }
}

/// Checks the `U_q(sl_n)` relations for arbitrary matrices `e`, `f`, `k`.
/// Residuals are divided by `max(1, ‖K‖²)` so the scale is comparable across
/// representations with large weights.
pub fn relation_residuals(
    e: &[CMat],
    f: &[CMat],
    k: &[CMat],
    cartan: &CartanData,
    dp: &DeformationParameter,
) -> Result<RelationReport> {
    let r = e.len();
    let mut rep = RelationReport::default();
    let k_inv: Vec<CMat> = k
        .iter()
        .map(|m| m.clone().try_inverse().ok_or_else(|| Error::Numerical("K is singular".into())))
        .collect::<Result<_>>()?;
    let scale = k.iter().map(|m| op_norm(m).powi(2)).fold(1.0, f64::max);
    let qq = dp.q_minus_qinv();
    let q2 = q_number(2.0, dp)?;
    let a = cartan.cartan_matrix();
    for i in 0..r {
        for j in 0..r {
            let c = dp.pow(a[i][j] as f64 / 2.0);
            let ke = &k[i] * &e[j] * &k_inv[i] - &e[j] * re(c);
            let kf = &k[i] * &f[j] * &k_inv[i] - &f[j] * re(1.0 / c);
            rep.k_conjugation = rep.k_conjugation.max(op_norm(&ke)).max(op_norm(&kf));
            rep.cartan_commute = rep.cartan_commute.max(op_norm(&commutator(&k[i], &k[j])));
            if i == j {
                let rhs = (&k[i] * &k[i] - &k_inv[i] * &k_inv[i]) / re(qq);
                rep.ef_commutator = rep.ef_commutator.max(op_norm(&(commutator(&e[i], &f[i]) - rhs)));
            } else {
                rep.cross_commute = rep.cross_commute.max(op_norm(&commutator(&e[i], &f[j])));
            }
            if a[i][j] == -1 {
                for x in [e, f] {
                    let s = &x[i] * &x[i] * &x[j] - &x[i] * &x[j] * &x[i] * re(q2) + &x[j] * &x[i] * &x[i];
                    rep.serre = rep.serre.max(op_norm(&s));
                }
            } else if a[i][j] == 0 {
                rep.serre = rep.serre.max(op_norm(&commutator(&e[i], &e[j]))).max(op_norm(&commutator(&f[i], &f[j])));
            }
        }
        rep.hermiticity = rep.hermiticity.max(hermiticity_defect(&k[i])).max(op_norm(&(e[i].adjoint() - &f[i])));
    }
    for v in [
        &mut rep.k_conjugation,
        &mut rep.ef_commutator,
        &mut rep.cartan_commute,
        &mut rep.cross_commute,
        &mut rep.serre,
        &mut rep.hermiticity,
    ] {
        *v /= scale;
    }
    Ok(rep)
}

pub fn check_relations(rep: &Irrep) -> Result<RelationReport> {
    relation_residuals(&rep.e, &rep.f, &rep.k, &rep.cartan, &rep.dp)
}

/// Relations for the `Δ`-images on `V ⊗ V`.
pub fn check_coproduct_relations(rep: &Irrep) -> Result<RelationReport> {
    let r = rep.rank();
    let mut e = Vec::with_capacity(r);
    let mut f = Vec::with_capacity(r);
    let mut k = Vec::with_capacity(r);
    for i in 1..=r {
        e.push(coproduct(rep, Generator::E(i))?);
        f.push(coproduct(rep, Generator::F(i))?);
        k.push(coproduct(rep, Generator::K(i))?);
    }
    relation_residuals(&e, &f, &k, &rep.cartan, &rep.dp)
}

/// `max_i ‖E_i v_0‖` for the first basis vector.
pub fn highest_weight_residual(rep: &Irrep) -> f64 {
    (1..=rep.rank()).map(|i| rep.e(i).column(0).norm()).fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dp(q: f64) -> DeformationParameter {
        DeformationParameter::from_q(q).unwrap()
    }

    #[test]
    fn sl2_spin_one_at_q2() {
        let rep = build_sl2_irrep(2, &dp(2.0)).unwrap();
        let k = rep.k(1);
        assert!((k[(0, 0)].re - 2.0).abs() < 1e-14);
        assert!((k[(1, 1)].re - 1.0).abs() < 1e-14);
        assert!((k[(2, 2)].re - 0.5).abs() < 1e-14);
        let sq = 2.5f64.sqrt();
        assert!((rep.e(1)[(0, 1)].re - sq).abs() < 1e-14);
        assert!((rep.e(1)[(1, 2)].re - sq).abs() < 1e-14);
    }

    #[test]
    fn relations_hold() {
        for &q in &[0.5, 0.9, 1.1, 2.0] {
            for n in 0..=6 {
                let rep = build_sl2_irrep(n, &dp(q)).unwrap();
                let r = check_relations(&rep).unwrap();
                assert!(r.max() < 1e-12, "sl2 n={n} q={q}: {r:?}");
                assert!(highest_weight_residual(&rep) == 0.0);
            }
            for n in 2..=5 {
                let rep = build_sln_fundamental(n, &dp(q)).unwrap();
                let r = check_relations(&rep).unwrap();
                assert!(r.max() < 1e-12, "sln n={n} q={q}: {r:?}");
            }
        }
    }

    #[test]
    fn coproduct_preserves_relations() {
        for &q in &[0.5, 2.0] {
            for n in 0..=3 {
                let rep = build_sl2_irrep(n, &dp(q)).unwrap();
                assert!(check_coproduct_relations(&rep).unwrap().max() < 1e-12);
            }
            let rep = build_sln_fundamental(3, &dp(q)).unwrap();
            assert!(check_coproduct_relations(&rep).unwrap().max() < 1e-12);
        }
    }

    #[test]
    fn coproduct_of_e_on_e1e1() {
        let q = 2.0;
        let rep = build_sl2_irrep(1, &dp(q)).unwrap();
        let de = coproduct(&rep, Generator::E(1)).unwrap();
        // e1 ⊗ e1 is index 3; e0 ⊗ e1 is 1 and e1 ⊗ e0 is 2.
        let col = de.column(3);
        assert!((col[1].re - q.powf(-0.5)).abs() < 1e-14);
        assert!((col[2].re - q.sqrt()).abs() < 1e-14);
        assert!(col[0].norm() == 0.0 && col[3].norm() == 0.0);
    }

    #[test]
    fn rescale_conjugates_to_rational_basis() {
        let q = 0.5;
        let d = dp(q);
        let n = 4usize;
        let rep = build_sl2_irrep(n as i64, &d).unwrap();
        let c = rep.rescale();
        for k in 1..=n {
            let raw = rep.e(1)[(k - 1, k)].re * c[k] / c[k - 1];
            assert!((raw - q_number(k as f64, &d).unwrap()).abs() < 1e-12);
            let raw_f = rep.f(1)[(k, k - 1)].re * c[k - 1] / c[k];
            assert!((raw_f - q_number((n - k + 1) as f64, &d).unwrap()).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(build_sl2_irrep(-1, &dp(2.0)), Err(Error::NotDominant(_))));
        assert!(matches!(build_sl2_irrep(1, &DeformationParameter::classical()), Err(Error::ClassicalMode)));
        assert!(build_sln_fundamental(1, &dp(2.0)).is_err());
        let rep = build_sl2_irrep(1, &dp(2.0)).unwrap();
        assert!(matches!(coproduct(&rep, Generator::E(2)), Err(Error::UnknownGenerator(_))));
        assert!("X1".parse::<Generator>().is_err());
        assert_eq!("E".parse::<Generator>().unwrap(), Generator::E(1));
        assert_eq!("K3".parse::<Generator>().unwrap(), Generator::K(3));
    }

    #[test]
    fn sln2_matches_sl2_fundamental() {
        let d = dp(1.7);
        let a = build_sl2_irrep(1, &d).unwrap();
        let b = build_sln_fundamental(2, &d).unwrap();
        assert!(op_norm(&(a.e(1) - b.e(1))) < 1e-14);
        assert!(op_norm(&(a.k(1) - b.k(1))) < 1e-14);
    }
}
