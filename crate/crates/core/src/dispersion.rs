//! The indeterminacy measure `δ_φ` and its expansion over the components of
//! `V(λ) ⊗ V(λ)`.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::cartan::{min_delta_formula, rational_to_f64, Algebra, CartanData};
use crate::error::{Error, Result};
use crate::linalg::{C64, CMat, CVec};
use crate::repn::Irrep;
use crate::rmatrix::{RMatrixRep, TensorSquareDecomposition};

/// Default tolerance on the coherence defect.
pub const COHERENCE_TOL: f64 = 1e-8;

/// Unit vector in the weight basis of an irrep.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    amps: CVec,
}

impl StateVector {
    /// Normalizes `amps`; fails on a zero or non-finite vector.
    pub fn new(amps: CVec) -> Result<Self> {
        Ok(Self::normalized(amps)?.0)
    }

    /// Normalizes `amps` and also returns the norm that was divided out.
    pub fn normalized(amps: CVec) -> Result<(Self, f64)> {
        let norm = amps.norm();
        if !norm.is_finite() || norm == 0.0 {
            return Err(Error::InvalidParameter(format!("state has norm {norm}")));
        }
        Ok((Self { amps: amps / C64::new(norm, 0.0) }, norm))
    }

    pub fn basis(dim: usize, k: usize) -> Self {
        let mut amps = CVec::zeros(dim);
        amps[k] = C64::new(1.0, 0.0);
        Self { amps }
    }

    /// Complex-normal vector pushed to the sphere.
    pub fn random<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Self {
        loop {
            let amps = CVec::from_fn(dim, |_, _| {
                C64::new(rng.sample::<f64, _>(StandardNormal), rng.sample::<f64, _>(StandardNormal))
            });
            if let Ok(s) = Self::new(amps) {
                return s;
            }
        }
    }

    pub fn amps(&self) -> &CVec {
        &self.amps
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn tensor_square(&self) -> CVec {
        self.amps.kronecker(&self.amps)
    }
}

#[derive(Clone, Debug)]
pub struct DispersionReport {
    pub algebra: Algebra,
    pub n_or_rank: usize,
    pub q: f64,
    pub delta: f64,
    /// `⟨φ|v⁻²|φ⟩ = q^{2(λ+2ρ,λ)}`.
    pub term_v2: f64,
    /// `⟨φ⊗φ|R^T R|φ⊗φ⟩`.
    pub term_rtr: f64,
    /// `‖P_i(φ⊗φ)‖²`, ordered as the decomposition components.
    pub c_squared: Vec<f64>,
    /// `δ` recomputed from `Σ c_i² x_i`.
    pub delta_expansion: f64,
    pub min_delta: f64,
    pub is_minimal: bool,
    pub coherence_defect: f64,
}

fn check_dim(phi: &StateVector, rm: &RMatrixRep) -> Result<()> {
    if phi.dim() != rm.dim() {
        return Err(Error::DimensionMismatch { expected: rm.dim(), got: phi.dim() });
    }
    Ok(())
}

/// `⟨ψ|R^T R|ψ⟩ = ‖Rψ‖²` for `ψ = φ⊗φ`; never forms `R^T R`.
pub fn term_rtr(phi: &StateVector, rm: &RMatrixRep) -> Result<f64> {
    check_dim(phi, rm)?;
    Ok((rm.r() * phi.tensor_square()).norm_squared())
}

pub fn term_v2(rm: &RMatrixRep) -> f64 {
    rm.v_inverse() * rm.v_inverse()
}

/// `δ_φ` without the component expansion.
pub fn delta_value(phi: &StateVector, rm: &RMatrixRep) -> Result<f64> {
    rm.deformation().require_quantum()?;
    let t = term_rtr(phi, rm)?;
    Ok((term_v2(rm) - t) / rm.deformation().q_minus_qinv())
}

/// `1 - c_0² = Σ_{i≥1} ‖P_i(φ⊗φ)‖²`.
pub fn coherence_defect(phi: &StateVector, dec: &TensorSquareDecomposition) -> Result<f64> {
    let c = c_squared(phi, dec)?;
    Ok(c[1..].iter().sum())
}

pub fn c_squared(phi: &StateVector, dec: &TensorSquareDecomposition) -> Result<Vec<f64>> {
    let psi = phi.tensor_square();
    let size = dec.components[0].projector.nrows();
    if psi.len() != size {
        return Err(Error::DimensionMismatch { expected: size, got: psi.len() });
    }
    Ok(dec.components.iter().map(|c| (&c.projector * &psi).norm_squared()).collect())
}

pub fn is_quasiclassical(phi: &StateVector, dec: &TensorSquareDecomposition, tol: f64) -> Result<(bool, f64)> {
    let d = coherence_defect(phi, dec)?;
    Ok((d <= tol, d))
}

pub fn delta(phi: &StateVector, rm: &RMatrixRep, dec: &TensorSquareDecomposition) -> Result<DispersionReport> {
    let dp = rm.deformation();
    dp.require_quantum()?;
    check_dim(phi, rm)?;
    let den = dp.q_minus_qinv();
    let tv2 = term_v2(rm);
    let trtr = term_rtr(phi, rm)?;
    let delta = (tv2 - trtr) / den;
    let c2 = c_squared(phi, dec)?;
    let expansion: f64 = c2.iter().zip(&dec.components).map(|(c, comp)| c * comp.eigenvalue).sum();
    let delta_expansion = (tv2 - expansion) / den;
    let cd = CartanData::new(rm.backend().algebra())?;
    let min_delta = min_delta_formula(rm.highest_weight(), dp, &cd)?;
    let defect: f64 = c2[1..].iter().sum();
    let report = DispersionReport {
        algebra: rm.backend().algebra(),
        n_or_rank: rm.backend().label(),
        q: dp.q(),
        delta,
        term_v2: tv2,
        term_rtr: trtr,
        c_squared: c2,
        delta_expansion,
        min_delta,
        is_minimal: defect <= COHERENCE_TOL,
        coherence_defect: defect,
    };
    if !report.delta.is_finite() || !report.term_rtr.is_finite() {
        return Err(Error::Numerical(format!("non-finite dispersion {}", report.delta)));
    }
    if !rm.is_corrupted() {
        let slack = 1e-9 * tv2.abs().max(trtr.abs()).max(1.0) / den.abs();
        if report.delta < min_delta - slack {
            return Err(Error::Numerical(format!(
                "delta {} fell below the lower bound {} (slack {slack:e})",
                report.delta, min_delta
            )));
        }
    }
    Ok(report)
}

/// `φ_k ↦ exp(i Σ_j θ_j ⟨wt_k, α_j^∨⟩) φ_k`; one angle per simple coroot.
pub fn torus_orbit(phi: &StateVector, rep: &Irrep, theta: &[f64]) -> Result<StateVector> {
    if phi.dim() != rep.dim() {
        return Err(Error::DimensionMismatch { expected: rep.dim(), got: phi.dim() });
    }
    if theta.len() != rep.rank() {
        return Err(Error::DimensionMismatch { expected: rep.rank(), got: theta.len() });
    }
    let amps = CVec::from_fn(phi.dim(), |k, _| {
        let angle: f64 =
            theta.iter().zip(rep.weights()[k].coords()).map(|(t, c)| t * rational_to_f64(*c)).sum();
        phi.amps()[k] * C64::from_polar(1.0, angle)
    });
    Ok(StateVector { amps })
}

/// `[Δ(x), R^T R]` residual relative to `‖Δ(x)‖ ‖R^T R‖`, maximised over generators.
pub fn rtr_commutant_residual(rep: &Irrep, rm: &RMatrixRep) -> Result<f64> {
    let m: &CMat = rm.rtr();
    let mn = crate::linalg::op_norm(m);
    let mut worst = 0.0_f64;
    for g in crate::repn::all_generators(rep.rank()) {
        let x = crate::repn::coproduct(rep, g)?;
        let c = crate::linalg::commutator(&x, m);
        worst = worst.max(crate::linalg::op_norm(&c) / (mn * crate::linalg::op_norm(&x)).max(1.0));
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cartan::DeformationParameter;
    use crate::repn::{build_sl2_irrep, build_sln_fundamental};
    use crate::rmatrix::{build_r, decompose_tensor_square};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn setup(n: i64, q: f64) -> (Irrep, RMatrixRep, TensorSquareDecomposition) {
        let dp = DeformationParameter::from_q(q).unwrap();
        let rep = build_sl2_irrep(n, &dp).unwrap();
        let rm = build_r(&rep).unwrap();
        let dec = decompose_tensor_square(&rm).unwrap();
        (rep, rm, dec)
    }

    #[test]
    fn spin_half_highest_weight() {
        let (_, rm, dec) = setup(1, 2.0);
        let r = delta(&StateVector::basis(2, 0), &rm, &dec).unwrap();
        assert!((r.delta - 4.0).abs() < 1e-12);
        assert!(r.is_minimal);
        assert!(r.coherence_defect <= 1e-12);
        assert!((r.c_squared[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn spin_half_superposition_not_minimal() {
        let q = 2.0_f64;
        let (_, rm, dec) = setup(1, q);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let phi = StateVector::new(CVec::from_vec(vec![C64::new(h, 0.0), C64::new(h, 0.0)])).unwrap();
        let r = delta(&phi, &rm, &dec).unwrap();
        // Singlet direction (q^{1/2}, -q^{-1/2}) / sqrt([2]) in the e0e1, e1e0 plane.
        let overlap = 0.5 * (q.sqrt() - 1.0 / q.sqrt());
        let want_c1 = overlap * overlap / (q + 1.0 / q);
        assert!((r.c_squared[1] - want_c1).abs() < 1e-12);
        assert!(r.delta > 4.0 + 1e-3);
        assert!(!r.is_minimal);
        assert!((r.delta - r.delta_expansion).abs() < 1e-10 * r.delta.abs());
    }

    #[test]
    fn trivial_rep_has_zero_delta() {
        let (_, rm, dec) = setup(0, 0.7);
        let r = delta(&StateVector::basis(1, 0), &rm, &dec).unwrap();
        assert_eq!(r.delta, 0.0);
        assert_eq!(r.min_delta, 0.0);
    }

    #[test]
    fn lowest_weight_is_quasiclassical() {
        for n in 1..=5 {
            let (_, _, dec) = setup(n, 1.3);
            let (ok, d) = is_quasiclassical(&StateVector::basis(n as usize + 1, n as usize), &dec, COHERENCE_TOL).unwrap();
            assert!(ok, "n={n} defect {d}");
        }
    }

    #[test]
    fn torus_and_phase_invariance() {
        let (rep, rm, dec) = setup(3, 0.6);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let phi = StateVector::random(4, &mut rng);
            let theta: f64 = rng.random_range(0.0..6.3);
            let base = delta(&phi, &rm, &dec).unwrap().delta;
            let moved = delta(&torus_orbit(&phi, &rep, &[theta]).unwrap(), &rm, &dec).unwrap().delta;
            assert!((base - moved).abs() <= 1e-10 * base.abs().max(1.0));
            let phased = StateVector::new(phi.amps() * C64::from_polar(1.0, theta)).unwrap();
            let p = delta(&phased, &rm, &dec).unwrap().delta;
            assert!((base - p).abs() <= 1e-10 * base.abs().max(1.0));
        }
        let same = torus_orbit(&StateVector::basis(4, 1), &rep, &[0.0]).unwrap();
        assert_eq!(same, StateVector::basis(4, 1));
    }

    #[test]
    fn dimension_mismatch_rejected() {
        let (_, rm, dec) = setup(2, 2.0);
        assert!(matches!(delta(&StateVector::basis(2, 0), &rm, &dec), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn sln_highest_weight_attains_minimum() {
        let dp = DeformationParameter::from_q(2.0).unwrap();
        let rm = build_r(&build_sln_fundamental(3, &dp).unwrap()).unwrap();
        let dec = decompose_tensor_square(&rm).unwrap();
        let r = delta(&StateVector::basis(3, 0), &rm, &dec).unwrap();
        assert!((r.delta - r.min_delta).abs() <= 1e-10 * r.min_delta);
    }
}
