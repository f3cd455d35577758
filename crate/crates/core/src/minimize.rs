//! Multi-start minimization of `δ_φ` over the unit sphere and the theorem
//! verifier built on it.
//!
//! Each iteration works in an affine chart `φ_a = 1` (with `a` the largest
//! amplitude), which removes the scale and phase redundancy. The step is a
//! Jacobi-scaled modified Newton direction with the Hessian's eigenvalues
//! replaced by their absolute values, followed by Armijo backtracking and
//! renormalization. Curvatures near minimizers can span many orders of
//! magnitude for `q < 1`, which plain gradient steps cannot resolve.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::cartan::{min_delta_formula, CartanData};
use crate::dispersion::{coherence_defect, delta, StateVector};
use crate::error::{Error, Result};
use crate::linalg::{flip_conjugate, re, C64, CMat, CVec};
use crate::repn::Irrep;
use crate::rmatrix::{RMatrixRep, TensorSquareDecomposition};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepPolicy {
    pub initial: f64,
    pub shrink: f64,
    pub sufficient_decrease: f64,
}

impl Default for StepPolicy {
    fn default() -> Self {
        Self { initial: 1.0, shrink: 0.5, sufficient_decrease: 1e-4 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    /// Jacobi-scaled modified Newton step in the affine chart.
    Newton,
    /// Steepest descent in the affine chart.
    Gradient,
}

#[derive(Clone, Debug, PartialEq)]
pub struct OptimizerConfig {
    pub restarts: usize,
    pub max_iters: usize,
    /// A restart stops early once `‖grad δ‖ ≤ grad_tol · |δ|`. It counts as
    /// converged if it stopped that way, if `‖grad δ‖ ≤ grad_tol · G`, or if
    /// the line search can no longer decrease `δ` while `‖grad δ‖ ≤ 1e-6 · G`,
    /// where `G = max(1, ‖R‖²) / |q - q⁻¹|` is the natural gradient scale.
    pub grad_tol: f64,
    pub step: StepPolicy,
    pub rng_seed: u64,
    pub direction: Direction,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            restarts: 64,
            max_iters: 2000,
            grad_tol: 1e-10,
            step: StepPolicy::default(),
            rng_seed: 0,
            direction: Direction::Newton,
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        let s = &self.step;
        if self.restarts == 0 || self.max_iters == 0 {
            return Err(Error::InvalidParameter("restarts and max_iters must be positive".into()));
        }
        if !(self.grad_tol > 0.0 && s.initial > 0.0 && s.sufficient_decrease > 0.0) {
            return Err(Error::InvalidParameter("tolerances and step sizes must be positive".into()));
        }
        if !(s.shrink > 0.0 && s.shrink < 1.0) {
            return Err(Error::InvalidParameter(format!("shrink {} must lie in (0, 1)", s.shrink)));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RestartOutcome {
    pub final_value: f64,
    pub iterations: usize,
    pub converged: bool,
    pub grad_norm: f64,
    pub state: StateVector,
    /// Objective after every accepted step, starting with the initial value.
    pub history: Vec<f64>,
}

impl RestartOutcome {
    pub fn is_monotone(&self) -> bool {
        self.history.windows(2).all(|w| w[1] <= w[0])
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MinimizationResult {
    pub best_value: f64,
    pub best_states: Vec<StateVector>,
    pub per_restart: Vec<RestartOutcome>,
    pub min_delta: f64,
    pub formula_gap: f64,
}

impl MinimizationResult {
    pub fn converged_count(&self) -> usize {
        self.per_restart.iter().filter(|r| r.converged).count()
    }
}

/// `δ` as a scale-invariant function of an unnormalized vector, with its
/// real gradient and Hessian action. Complex vectors stand for vectors in
/// `R^{2d}` with the inner product `Re⟨u, v⟩`.
pub struct Objective {
    r: CMat,
    rt: CMat,
    a: f64,
    den: f64,
    d: usize,
    grad_scale: f64,
}

struct Parts {
    f: f64,
    n: f64,
    /// `M_s ψ` for `ψ = φ⊗φ`.
    w: CVec,
    /// Real gradient of `F = ⟨ψ|M_s|ψ⟩`.
    grad_f: CVec,
}

fn rdot(u: &CVec, v: &CVec) -> f64 {
    u.dotc(v).re
}

impl Objective {
    pub fn new(rm: &RMatrixRep) -> Self {
        let r = rm.r().clone();
        let rt = r.adjoint();
        let den = rm.deformation().q_minus_qinv();
        let a = rm.v_inverse() * rm.v_inverse();
        let r_norm = crate::linalg::op_norm(&r);
        Self { r, rt, a, den, d: rm.dim(), grad_scale: (r_norm * r_norm).max(1.0) / den.abs() }
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    /// `max(1, ‖R‖²) / |q - q⁻¹|`.
    pub fn gradient_scale(&self) -> f64 {
        self.grad_scale
    }

    /// `M_s x = ½(R^T R x + P R^T R P x)`.
    fn msym(&self, x: &CVec) -> CVec {
        let m = &self.rt * (&self.r * x);
        let d = self.d;
        CVec::from_fn(d * d, |k, _| 0.5 * (m[k] + m[(k % d) * d + k / d]))
    }

    /// `g_a = 4 Σ_b W_ab conj(v_b)` with `W` the `d×d` reshape of `w`.
    fn contract(&self, w: &CVec, v: &CVec) -> CVec {
        let d = self.d;
        CVec::from_fn(d, |a, _| {
            let mut acc = C64::new(0.0, 0.0);
            for b in 0..d {
                acc += w[a * d + b] * v[b].conj();
            }
            acc * 4.0
        })
    }

    fn parts(&self, phi: &CVec) -> Parts {
        let psi = phi.kronecker(phi);
        let f = (&self.r * &psi).norm_squared();
        let w = self.msym(&psi);
        let grad_f = self.contract(&w, phi);
        Parts { f, n: phi.norm_squared(), w, grad_f }
    }

    /// `δ(φ/‖φ‖)`.
    pub fn value(&self, phi: &CVec) -> f64 {
        if self.d == 1 {
            return (self.a - self.r[(0, 0)].norm_sqr()) / self.den;
        }
        let psi = phi.kronecker(phi);
        let n = phi.norm_squared();
        (self.a - (&self.r * &psi).norm_squared() / (n * n)) / self.den
    }

    fn grad_from(&self, phi: &CVec, p: &Parts) -> CVec {
        let n3 = p.n * p.n * p.n;
        let grad_g = &p.grad_f / re(p.n * p.n) - phi * re(4.0 * p.f / n3);
        -grad_g / re(self.den)
    }

    /// Real gradient of the scale-invariant extension; tangent to the sphere
    /// and orthogonal to `iφ` at unit `φ`.
    pub fn gradient(&self, phi: &CVec) -> CVec {
        self.grad_from(phi, &self.parts(phi))
    }

    fn hess_apply(&self, phi: &CVec, p: &Parts, v: &CVec) -> CVec {
        let arg = v.kronecker(phi) + phi.kronecker(v);
        let hf = self.contract(&self.msym(&arg), phi) + self.contract(&p.w, v);
        let grad_n = phi * re(2.0);
        let (n2, n3, n4) = (p.n * p.n, p.n * p.n * p.n, p.n * p.n * p.n * p.n);
        let hg = hf / re(n2) - &p.grad_f * re(2.0 * rdot(&grad_n, v) / n3) - &grad_n * re(2.0 * rdot(&p.grad_f, v) / n3)
            - v * re(4.0 * p.f / n3)
            + &grad_n * re(6.0 * p.f * rdot(&grad_n, v) / n4);
        -hg / re(self.den)
    }
}

/// Riemannian gradient of `δ` at `φ`.
pub fn delta_gradient(phi: &StateVector, rm: &RMatrixRep) -> Result<CVec> {
    if phi.dim() != rm.dim() {
        return Err(Error::DimensionMismatch { expected: rm.dim(), got: phi.dim() });
    }
    rm.deformation().require_quantum()?;
    Ok(Objective::new(rm).gradient(phi.amps()))
}

struct Chart {
    anchor: usize,
    basis: Vec<CVec>,
}

impl Chart {
    fn at(phi: &CVec) -> (Chart, CVec) {
        let d = phi.len();
        let anchor = (0..d).max_by(|&i, &j| phi[i].norm().partial_cmp(&phi[j].norm()).unwrap()).unwrap_or(0);
        let scaled = phi / phi[anchor];
        let mut basis = Vec::with_capacity(2 * d.saturating_sub(1));
        for k in (0..d).filter(|&k| k != anchor) {
            for unit in [C64::new(1.0, 0.0), C64::new(0.0, 1.0)] {
                let mut e = CVec::zeros(d);
                e[k] = unit;
                basis.push(e);
            }
        }
        (Chart { anchor, basis }, scaled)
    }

    fn step(&self, phi: &CVec, p: &DVector<f64>, t: f64) -> CVec {
        let mut out = phi.clone();
        for (e, pj) in self.basis.iter().zip(p.iter()) {
            out += e * re(t * pj);
        }
        debug_assert!(out[self.anchor] == phi[self.anchor]);
        out
    }
}

fn newton_direction(h: &DMatrix<f64>, g: &DVector<f64>) -> DVector<f64> {
    let m = g.len();
    let dscale = DVector::from_fn(m, |i, _| {
        let v = h[(i, i)].abs().sqrt();
        if v > 0.0 && v.is_finite() {
            v
        } else {
            1.0
        }
    });
    let s = DMatrix::from_fn(m, m, |i, j| h[(i, j)] / (dscale[i] * dscale[j]));
    let s = (&s + s.transpose()) * 0.5;
    let eig = SymmetricEigen::new(s);
    let lmax = eig.eigenvalues.iter().fold(0.0_f64, |a, l| a.max(l.abs()));
    let floor = (1e-10 * lmax).max(f64::MIN_POSITIVE);
    let gs = g.component_div(&dscale);
    let coeffs = eig.eigenvectors.transpose() * &gs;
    let scaled = DVector::from_fn(m, |i, _| coeffs[i] / eig.eigenvalues[i].abs().max(floor));
    -(&eig.eigenvectors * scaled).component_div(&dscale)
}

fn run_restart(obj: &Objective, cfg: &OptimizerConfig, start: StateVector) -> RestartOutcome {
    let scale = obj.gradient_scale();
    let mut phi = start.amps().clone();
    let mut value = obj.value(&phi);
    let mut history = vec![value];
    let mut iterations = 0;
    let mut grad_norm = obj.gradient(&phi).norm();
    let mut stalled = false;
    let small = |g: f64, v: f64| g <= cfg.grad_tol * v.abs();
    while obj.dim() > 1 && iterations < cfg.max_iters && !small(grad_norm, value) {
        let (chart, base) = Chart::at(&phi);
        let parts = obj.parts(&base);
        let grad = obj.grad_from(&base, &parts);
        let m = chart.basis.len();
        let g = DVector::from_fn(m, |i, _| rdot(&chart.basis[i], &grad));
        let mut p = match cfg.direction {
            Direction::Gradient => -&g,
            Direction::Newton => {
                let cols: Vec<CVec> = chart.basis.iter().map(|e| obj.hess_apply(&base, &parts, e)).collect();
                let h = DMatrix::from_fn(m, m, |i, j| rdot(&chart.basis[i], &cols[j]));
                newton_direction(&h, &g)
            }
        };
        let mut slope = g.dot(&p);
        if !(slope < 0.0) {
            p = -&g;
            slope = g.dot(&p);
        }
        let f0 = obj.value(&base);
        let mut t = cfg.step.initial;
        let mut accepted = None;
        while t > 1e-30 {
            let trial = chart.step(&base, &p, t);
            let ft = obj.value(&trial);
            if ft <= f0 + cfg.step.sufficient_decrease * t * slope && ft < value {
                accepted = Some((trial, ft));
                break;
            }
            t *= cfg.step.shrink;
        }
        iterations += 1;
        let Some((trial, ft)) = accepted else {
            stalled = true;
            break;
        };
        let norm = trial.norm();
        phi = trial / re(norm);
        value = ft;
        history.push(value);
        grad_norm = obj.gradient(&phi).norm();
    }
    let converged = obj.dim() == 1
        || small(grad_norm, value)
        || grad_norm <= cfg.grad_tol * scale
        || (stalled && grad_norm <= 1e-6 * scale);
    let state = StateVector::new(phi).expect("iterates stay nonzero");
    RestartOutcome { final_value: value, iterations, converged, grad_norm, state, history }
}

fn restart_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Distance between the orbits of `a` and `b` under global phase and the
/// torus of `rep`.
pub fn orbit_distance(a: &StateVector, b: &StateVector, rep: &Irrep) -> f64 {
    let d = rep.dim();
    if full_torus(rep) {
        let s: f64 = (0..d).map(|k| (a.amps()[k].norm() - b.amps()[k].norm()).powi(2)).sum();
        return s.sqrt();
    }
    // One torus angle (sl2): maximise |Σ conj(a_k) b_k e^{iθ c_k}| over θ.
    let charges: Vec<f64> = (0..d).map(|k| rep.torus_charge(k, 0)).collect();
    let overlap = |theta: f64| -> f64 {
        let mut acc = C64::new(0.0, 0.0);
        for k in 0..d {
            acc += a.amps()[k].conj() * b.amps()[k] * C64::from_polar(1.0, theta * charges[k]);
        }
        acc.norm()
    };
    let grid = 720;
    let step = std::f64::consts::TAU / grid as f64;
    let mut best = (0.0, overlap(0.0));
    for i in 1..grid {
        let th = i as f64 * step;
        let v = overlap(th);
        if v > best.1 {
            best = (th, v);
        }
    }
    let (mut lo, mut hi) = (best.0 - step, best.0 + step);
    for _ in 0..80 {
        let m1 = lo + (hi - lo) / 3.0;
        let m2 = hi - (hi - lo) / 3.0;
        if overlap(m1) < overlap(m2) {
            lo = m1;
        } else {
            hi = m2;
        }
    }
    let o = overlap(0.5 * (lo + hi)).max(best.1).min(1.0);
    (2.0 - 2.0 * o).max(0.0).sqrt()
}

fn full_torus(rep: &Irrep) -> bool {
    let d = rep.dim();
    let cols = rep.rank() + 1;
    if cols < d {
        return false;
    }
    let m = DMatrix::from_fn(d, cols, |k, j| if j == rep.rank() { 1.0 } else { rep.torus_charge(k, j) });
    m.rank(1e-9) >= d
}

/// Dedup threshold for minimizers.
pub const DEDUP_TOL: f64 = 1e-4;

pub fn minimize_delta(
    rep: &Irrep,
    rm: &RMatrixRep,
    _dec: &TensorSquareDecomposition,
    cfg: &OptimizerConfig,
) -> Result<MinimizationResult> {
    cfg.validate()?;
    rm.deformation().require_quantum()?;
    let obj = Objective::new(rm);
    let per_restart: Vec<RestartOutcome> = (0..cfg.restarts)
        .into_par_iter()
        .map(|i| {
            let mut rng = restart_rng(cfg.rng_seed, i as u64);
            run_restart(&obj, cfg, StateVector::random(rm.dim(), &mut rng))
        })
        .collect();
    let converged: Vec<&RestartOutcome> = per_restart.iter().filter(|r| r.converged).collect();
    if converged.is_empty() {
        return Err(Error::NonConvergence { restarts: cfg.restarts });
    }
    let best_value = converged.iter().map(|r| r.final_value).fold(f64::INFINITY, f64::min);
    let cd = CartanData::new(rm.backend().algebra())?;
    let min_delta = min_delta_formula(rm.highest_weight(), rm.deformation(), &cd)?;
    let tie = 1e-6 * best_value.abs().max(min_delta.abs());
    let mut best_states: Vec<StateVector> = Vec::new();
    for r in &converged {
        if r.final_value > best_value + tie {
            continue;
        }
        if best_states.iter().all(|s| orbit_distance(s, &r.state, rep) > DEDUP_TOL) {
            best_states.push(r.state.clone());
        }
    }
    Ok(MinimizationResult { best_value, best_states, per_restart, min_delta, formula_gap: best_value - min_delta })
}

#[derive(Clone, Debug)]
pub struct ClauseResult {
    pub name: &'static str,
    pub pass: bool,
    pub detail: String,
}

#[derive(Clone, Debug)]
pub struct TheoremVerdict {
    pub pass: bool,
    pub clauses: Vec<ClauseResult>,
    pub result: MinimizationResult,
    /// Minimizers found that pass the coherence test at `1e-6`.
    pub coherent_found: usize,
    /// Random states used for the margin clause.
    pub margin_samples: usize,
    pub offending_state: Option<(String, StateVector)>,
}

pub const MARGIN_SAMPLES: usize = 1000;
pub const MINIMIZER_COHERENCE_TOL: f64 = 1e-6;

/// Runs the optimizer and checks value, attainment, and the defect margin.
pub fn verify_theorem(
    rep: &Irrep,
    rm: &RMatrixRep,
    dec: &TensorSquareDecomposition,
    cfg: &OptimizerConfig,
) -> Result<TheoremVerdict> {
    let result = minimize_delta(rep, rm, dec, cfg)?;
    let min_delta = result.min_delta;
    let scale = min_delta.abs().max(1.0);
    let mut clauses = Vec::new();
    let mut offending: Option<(String, StateVector)> = None;

    let res = &dec.residuals;
    clauses.push(ClauseResult {
        name: "decomposition",
        pass: res.within_tolerance(),
        detail: format!(
            "completeness {:.3e}, idempotence {:.3e}, orthogonality {:.3e}, eigen {:.3e}, exact {}",
            res.completeness, res.idempotence, res.orthogonality, res.eigen, res.exact_eigen_identity
        ),
    });

    let gap_ok = result.formula_gap.abs() <= 1e-6 * scale;
    clauses.push(ClauseResult {
        name: "value",
        pass: gap_ok,
        detail: format!("best {:.12e}, formula {:.12e}, gap {:.3e}", result.best_value, min_delta, result.formula_gap),
    });
    if !gap_ok {
        if let Some(s) = result.best_states.first() {
            offending = Some(("value".into(), s.clone()));
        }
    }

    let mut coherent_found = 0;
    let mut worst_defect = 0.0_f64;
    for s in &result.best_states {
        let d = coherence_defect(s, dec)?;
        worst_defect = worst_defect.max(d);
        if d <= MINIMIZER_COHERENCE_TOL {
            coherent_found += 1;
        } else if offending.is_none() {
            offending = Some(("attainment".into(), s.clone()));
        }
    }
    clauses.push(ClauseResult {
        name: "attainment",
        pass: coherent_found == result.best_states.len(),
        detail: format!(
            "{} distinct minimizers, {} coherent, worst defect {:.3e}",
            result.best_states.len(),
            coherent_found,
            worst_defect
        ),
    });

    let hw = StateVector::basis(rm.dim(), 0);
    let hw_report = delta(&hw, rm, dec)?;
    let hw_ok = (hw_report.delta - min_delta).abs() <= 1e-9 * scale;
    clauses.push(ClauseResult {
        name: "highest-weight",
        pass: hw_ok,
        detail: format!("delta(e0) - formula = {:.3e}", hw_report.delta - min_delta),
    });
    if !hw_ok && offending.is_none() {
        offending = Some(("highest-weight".into(), hw));
    }

    let den = rm.deformation().q_minus_qinv();
    let x = dec.eigenvalues();
    let gap_rate = if x.len() > 1 { (x[0] - x[1]) / den } else { 0.0 };
    let mut rng = restart_rng(cfg.rng_seed, u64::MAX);
    let mut samples = 0;
    let mut margin_ok = true;
    let mut worst_slack = f64::INFINITY;
    for _ in 0..20 * MARGIN_SAMPLES {
        if samples == MARGIN_SAMPLES {
            break;
        }
        let phi = StateVector::random(rm.dim(), &mut rng);
        let report = delta(&phi, rm, dec)?;
        if report.coherence_defect <= 1e-3 {
            continue;
        }
        samples += 1;
        let bound = report.coherence_defect * gap_rate - 1e-9 * report.delta.abs().max(1.0);
        let excess = report.delta - min_delta;
        let slack = excess - bound;
        worst_slack = worst_slack.min(slack / report.delta.abs().max(1.0));
        if !(excess > 0.0 && slack >= 0.0) {
            margin_ok = false;
            if offending.is_none() {
                offending = Some(("margin".into(), phi));
            }
        }
    }
    clauses.push(ClauseResult {
        name: "margin",
        pass: margin_ok,
        detail: format!("{samples} non-coherent samples, worst relative slack {worst_slack:.3e}"),
    });

    let monotone = result.per_restart.iter().all(|r| r.is_monotone());
    clauses.push(ClauseResult {
        name: "monotone",
        pass: monotone,
        detail: format!("{} restarts, {} converged", result.per_restart.len(), result.converged_count()),
    });

    let pass = clauses.iter().all(|c| c.pass);
    Ok(TheoremVerdict {
        pass,
        clauses,
        result,
        coherent_found,
        margin_samples: samples,
        offending_state: if pass { None } else { offending },
    })
}

/// `P M P` for the stored `R^T R`; its spectrum must match that of `R^T R`.
pub fn flipped_rtr(rm: &RMatrixRep) -> CMat {
    flip_conjugate(rm.rtr(), rm.dim())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cartan::DeformationParameter;
    use crate::repn::{build_sl2_irrep, build_sln_fundamental};
    use crate::rmatrix::{build_r, decompose_tensor_square};
    use rand::Rng;

    fn setup(n: i64, q: f64) -> (Irrep, RMatrixRep, TensorSquareDecomposition) {
        let dp = DeformationParameter::from_q(q).unwrap();
        let rep = build_sl2_irrep(n, &dp).unwrap();
        let rm = build_r(&rep).unwrap();
        let dec = decompose_tensor_square(&rm).unwrap();
        (rep, rm, dec)
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let (_, rm, _) = setup(2, 1.5);
        let obj = Objective::new(&rm);
        let mut rng = restart_rng(5, 0);
        for _ in 0..10 {
            let phi = StateVector::random(3, &mut rng);
            let g = obj.gradient(phi.amps());
            let h = 1e-5;
            let mut fd = CVec::zeros(3);
            for k in 0..3 {
                for (unit, part) in [(C64::new(1.0, 0.0), 0), (C64::new(0.0, 1.0), 1)] {
                    let mut e = CVec::zeros(3);
                    e[k] = unit * h;
                    let v = (obj.value(&(phi.amps() + &e)) - obj.value(&(phi.amps() - &e))) / (2.0 * h);
                    if part == 0 {
                        fd[k].re = v;
                    } else {
                        fd[k].im = v;
                    }
                }
            }
            assert!((&g - &fd).norm() <= 1e-5 * g.norm().max(1e-12));
        }
    }

    #[test]
    fn hessian_matches_finite_differences() {
        let (_, rm, _) = setup(3, 0.7);
        let obj = Objective::new(&rm);
        let mut rng = restart_rng(9, 0);
        let phi = StateVector::random(4, &mut rng).amps().clone();
        let v = StateVector::random(4, &mut rng).amps().clone();
        let parts = obj.parts(&phi);
        let hv = obj.hess_apply(&phi, &parts, &v);
        let h = 1e-6;
        let fd = (obj.gradient(&(&phi + &v * re(h))) - obj.gradient(&(&phi - &v * re(h)))) / re(2.0 * h);
        assert!((&hv - &fd).norm() <= 1e-5 * hv.norm());
    }

    #[test]
    fn gradient_vanishes_at_highest_weight() {
        let (_, rm, _) = setup(3, 2.0);
        let g = delta_gradient(&StateVector::basis(4, 0), &rm).unwrap();
        assert!(g.norm() <= 1e-9);
        let (_, rm0, _) = setup(0, 2.0);
        assert_eq!(delta_gradient(&StateVector::basis(1, 0), &rm0).unwrap().norm(), 0.0);
    }

    #[test]
    fn spin_half_minimum() {
        let (rep, rm, dec) = setup(1, 2.0);
        let res = minimize_delta(&rep, &rm, &dec, &OptimizerConfig { rng_seed: 1, ..Default::default() }).unwrap();
        assert!((res.best_value - 4.0).abs() < 1e-6);
        assert!(!res.best_states.is_empty() && res.best_states.len() <= 2);
        for s in &res.best_states {
            let a = s.amps();
            assert!(a[0].norm().min(a[1].norm()) < 1e-4);
        }
    }

    #[test]
    fn trivial_minimum_is_immediate() {
        let (rep, rm, dec) = setup(0, 2.0);
        let res = minimize_delta(&rep, &rm, &dec, &OptimizerConfig::default()).unwrap();
        assert_eq!(res.best_value, 0.0);
        assert!(res.per_restart.iter().all(|r| r.iterations == 0 && r.converged));
    }

    #[test]
    fn spin_one_at_half() {
        let q = 0.5_f64;
        let (rep, rm, dec) = setup(2, q);
        let res = minimize_delta(&rep, &rm, &dec, &OptimizerConfig { restarts: 16, ..Default::default() }).unwrap();
        let want = (q.powi(8) - q.powi(4)) / (q - 1.0 / q);
        assert!((res.best_value - want).abs() <= 1e-6 * want.max(1.0));
    }

    #[test]
    fn deterministic_given_seed() {
        let (rep, rm, dec) = setup(3, 1.1);
        let cfg = OptimizerConfig { restarts: 8, rng_seed: 42, ..Default::default() };
        let a = minimize_delta(&rep, &rm, &dec, &cfg).unwrap();
        let b = minimize_delta(&rep, &rm, &dec, &cfg).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn orbit_distance_ignores_torus_and_phase() {
        let (rep, _, _) = setup(3, 2.0);
        let mut rng = restart_rng(2, 0);
        let phi = StateVector::random(4, &mut rng);
        let theta: f64 = rng.random_range(0.0..6.0);
        let moved = crate::dispersion::torus_orbit(&phi, &rep, &[theta]).unwrap();
        let moved = StateVector::new(moved.amps() * C64::from_polar(1.0, 0.4)).unwrap();
        assert!(orbit_distance(&phi, &moved, &rep) < 1e-6);
        assert!(orbit_distance(&StateVector::basis(4, 0), &StateVector::basis(4, 3), &rep) > 1.0);
        let dp = DeformationParameter::from_q(2.0).unwrap();
        let rep3 = build_sln_fundamental(3, &dp).unwrap();
        let a = StateVector::basis(3, 1);
        let b = StateVector::new(a.amps() * C64::from_polar(1.0, 1.0)).unwrap();
        assert!(orbit_distance(&a, &b, &rep3) < 1e-12);
    }

    #[test]
    fn verify_passes_for_spin_one() {
        let (rep, rm, dec) = setup(2, 2.0);
        let v = verify_theorem(&rep, &rm, &dec, &OptimizerConfig { restarts: 16, ..Default::default() }).unwrap();
        assert!(v.pass, "{:?}", v.clauses);
    }

    #[test]
    fn corrupted_r_fails_verification() {
        let (rep, rm, _) = setup(1, 2.0);
        let bad = rm.corrupted(0, 3, 1e-2).unwrap();
        let dec = crate::rmatrix::decompose_unchecked(&bad).unwrap();
        let v = verify_theorem(&rep, &bad, &dec, &OptimizerConfig { restarts: 8, ..Default::default() }).unwrap();
        assert!(!v.pass);
        assert!(v.offending_state.is_some() || !v.clauses[0].pass);
    }

    #[test]
    fn invalid_config_rejected() {
        let bad = OptimizerConfig { step: StepPolicy { shrink: 1.5, ..Default::default() }, ..Default::default() };
        assert!(bad.validate().is_err());
        assert!(OptimizerConfig { restarts: 0, ..Default::default() }.validate().is_err());
    }
}
