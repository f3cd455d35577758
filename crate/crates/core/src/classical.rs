//! The undeformed dispersion `Σ ⟨(e_i - ⟨e_i⟩)²⟩` and its comparison with
//! `δ_φ` as `q → 1`.

use crate::cartan::{DeformationParameter, rational_to_f64};
use crate::dispersion::{delta_value, StateVector};
use crate::error::{Error, Result};
use crate::linalg::{identity, kron, re, C64, CMat};
use crate::repn::{build_irrep, Backend};
use crate::rmatrix::build_r;

/// Orthonormal basis of `su(2)` or `su(n)` under the trace form of the
/// defining representation, acting on a chosen irrep.
#[derive(Clone, Debug)]
pub struct ClassicalBasis {
    backend: Backend,
    elements: Vec<CMat>,
    casimir: CMat,
    gram: Vec<Vec<f64>>,
}

fn sl2_ladders(n: usize) -> (CMat, CMat, CMat) {
    let d = n + 1;
    let mut e = CMat::zeros(d, d);
    for k in 1..=n {
        e[(k - 1, k)] = re(((k * (n - k + 1)) as f64).sqrt());
    }
    let h = CMat::from_diagonal(&crate::linalg::CVec::from_fn(d, |k, _| re(n as f64 - 2.0 * k as f64)));
    let f = e.transpose();
    (e, f, h)
}

fn su2_elements(n: usize) -> Vec<CMat> {
    let (e, f, h) = sl2_ladders(n);
    let s = std::f64::consts::FRAC_1_SQRT_2;
    vec![&h * re(s), (&e + &f) * re(s), (&e - &f) * C64::new(0.0, -s)]
}

fn sun_elements(n: usize) -> Vec<CMat> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut out = Vec::with_capacity(n * n - 1);
    for a in 0..n {
        for b in a + 1..n {
            let mut x = CMat::zeros(n, n);
            x[(a, b)] = re(s);
            x[(b, a)] = re(s);
            out.push(x);
            let mut y = CMat::zeros(n, n);
            y[(a, b)] = C64::new(0.0, -s);
            y[(b, a)] = C64::new(0.0, s);
            out.push(y);
        }
    }
    for k in 1..n {
        let norm = ((k * (k + 1)) as f64).sqrt();
        let mut h = CMat::zeros(n, n);
        for j in 0..k {
            h[(j, j)] = re(1.0 / norm);
        }
        h[(k, k)] = re(-(k as f64) / norm);
        out.push(h);
    }
    out
}

impl ClassicalBasis {
    pub fn new(backend: Backend) -> Self {
        let (elements, defining) = match backend {
            Backend::Sl2Spin { n } => (su2_elements(n), su2_elements(1)),
            Backend::SlnFundamental { n } => (sun_elements(n), sun_elements(n)),
        };
        let d = backend.dim();
        let mut casimir = CMat::zeros(d, d);
        for x in &elements {
            casimir += x * x;
        }
        let gram = defining
            .iter()
            .map(|a| defining.iter().map(|b| (a * b).trace().re).collect())
            .collect();
        Self { backend, elements, casimir, gram }
    }

    pub fn backend(&self) -> Backend {
        self.backend
    }
    pub fn elements(&self) -> &[CMat] {
        &self.elements
    }
    pub fn casimir(&self) -> &CMat {
        &self.casimir
    }
    /// Trace-form Gram matrix of the basis in the defining representation.
    pub fn gram(&self) -> &[Vec<f64>] {
        &self.gram
    }

    /// `Q = Δ₀(C) - C⊗1 - 1⊗C` with the primitive coproduct `x⊗1 + 1⊗x`.
    pub fn q_form(&self) -> CMat {
        let d = self.backend.dim();
        let i = identity(d);
        let mut dc = CMat::zeros(d * d, d * d);
        for x in &self.elements {
            let dx = kron(x, &i) + kron(&i, x);
            dc += &dx * &dx;
        }
        dc - kron(&self.casimir, &i) - kron(&i, &self.casimir)
    }

    fn check(&self, phi: &StateVector) -> Result<()> {
        if phi.dim() != self.backend.dim() {
            return Err(Error::DimensionMismatch { expected: self.backend.dim(), got: phi.dim() });
        }
        Ok(())
    }
}

fn expect(phi: &StateVector, x: &CMat) -> f64 {
    phi.amps().dotc(&(x * phi.amps())).re
}

/// `Σ_i ‖(e_i - ⟨e_i⟩) φ‖²`.
pub fn classical_dispersion(phi: &StateVector, cb: &ClassicalBasis) -> Result<f64> {
    cb.check(phi)?;
    let v = phi.amps();
    let mut acc = 0.0;
    for x in cb.elements() {
        let mean = expect(phi, x);
        acc += (x * v - v * re(mean)).norm_squared();
    }
    Ok(acc)
}

/// `⟨C⟩ - ½⟨φ⊗φ|Q|φ⊗φ⟩`; `Q = 2 Σ e_i⊗e_i`, hence the half.
pub fn classical_dispersion_q_form(phi: &StateVector, cb: &ClassicalBasis) -> Result<f64> {
    cb.check(phi)?;
    let psi = phi.tensor_square();
    let q = cb.q_form();
    Ok(expect(phi, cb.casimir()) - 0.5 * psi.dotc(&(&q * &psi)).re)
}

#[derive(Clone, Debug)]
pub struct LimitRow {
    pub eps: f64,
    pub delta: f64,
    pub classical: f64,
    pub deviation: f64,
}

#[derive(Clone, Debug)]
pub struct LimitTable {
    pub rows: Vec<LimitRow>,
    /// Least-squares slope of `ln deviation` against `ln ε`; `None` when
    /// fewer than two deviations are resolvable.
    pub slope: Option<f64>,
}

/// Deviation `|δ_{q=e^ε}(φ) - classical_dispersion(φ)|` for each `ε`.
pub fn limit_check(backend: Backend, phi: &StateVector, eps_list: &[f64]) -> Result<LimitTable> {
    let cb = ClassicalBasis::new(backend);
    let classical = classical_dispersion(phi, &cb)?;
    let mut rows = Vec::with_capacity(eps_list.len());
    for &eps in eps_list {
        let dp = DeformationParameter::from_eta(eps)?;
        let rm = build_r(&build_irrep(backend, &dp)?)?;
        let d = delta_value(phi, &rm)?;
        rows.push(LimitRow { eps, delta: d, classical, deviation: (d - classical).abs() });
    }
    let pts: Vec<(f64, f64)> =
        rows.iter().filter(|r| r.deviation > 1e-13).map(|r| (r.eps.ln(), r.deviation.ln())).collect();
    let slope = (pts.len() >= 2).then(|| fit_slope(&pts)).flatten();
    Ok(LimitTable { rows, slope })
}

fn fit_slope(pts: &[(f64, f64)]) -> Option<f64> {
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    Some(pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>() / sxx)
}

/// `(λ+2ρ, λ) - (λ, λ)`, the minimum of the classical dispersion.
pub fn classical_minimum(backend: Backend) -> Result<f64> {
    let cd = crate::cartan::CartanData::new(backend.algebra())?;
    let lambda = match backend {
        Backend::Sl2Spin { n } => crate::cartan::Weight::from_ints(&[n as i64]),
        Backend::SlnFundamental { n } => crate::cartan::Weight::fundamental(n - 1, 1),
    };
    Ok(rational_to_f64(cd.casimir_exponent(&lambda)? - cd.inner(&lambda, &lambda)))
}
