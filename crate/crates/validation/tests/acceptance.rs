//! Acceptance suite: one PASS/FAIL line per criterion. Exits non-zero if any
//! criterion fails.

use std::time::Instant;

use qdisp_core::cartan::{CartanData, DeformationParameter};
use qdisp_core::classical::{
    classical_dispersion, classical_dispersion_q_form, classical_minimum, limit_check, ClassicalBasis,
};
use qdisp_core::dispersion::{coherence_defect, delta, StateVector};
use qdisp_core::linalg::{CVec, C64};
use qdisp_core::minimize::{delta_gradient, minimize_delta, Objective, OptimizerConfig};
use qdisp_core::repn::{build_irrep, check_coproduct_relations, check_relations, Backend, Irrep};
use qdisp_core::rmatrix::{build_r, decompose_tensor_square, yang_baxter_residual, RMatrixRep, TensorSquareDecomposition};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use qdisp_validation::*;

struct Outcome {
    pass: bool,
    detail: String,
}

fn dp(q: f64) -> DeformationParameter {
    DeformationParameter::from_q(q).expect("valid q")
}

fn all_backends(sl2_max: usize, sln_max: usize) -> Vec<Backend> {
    (0..=sl2_max)
        .map(|n| Backend::Sl2Spin { n })
        .chain((2..=sln_max).map(|n| Backend::SlnFundamental { n }))
        .collect()
}

fn label(b: Backend) -> String {
    format!("{}({})", b.algebra().tag(), b.label())
}

fn setup(b: Backend, q: f64) -> (Irrep, RMatrixRep) {
    let rep = build_irrep(b, &dp(q)).expect("irrep");
    let rm = build_r(&rep).expect("R-matrix");
    (rep, rm)
}

/// Tracks the worst value of a residual and where it occurred.
struct Worst {
    value: f64,
    at: String,
}

impl Worst {
    fn new() -> Self {
        Self { value: 0.0, at: "-".into() }
    }

    fn update(&mut self, v: f64, at: impl FnOnce() -> String) {
        if !(v <= self.value) {
            self.value = v;
            self.at = at();
        }
    }
}

fn c1_relations() -> Outcome {
    let mut w = Worst::new();
    for q in Q_GRID {
        for b in all_backends(10, 6) {
            let rep = build_irrep(b, &dp(q)).expect("irrep");
            let r = check_relations(&rep).expect("relations").max();
            let c = check_coproduct_relations(&rep).expect("coproduct relations").max();
            w.update(r.max(c), || format!("{} q={q}", label(b)));
        }
    }
    Outcome {
        pass: w.value <= RELATION_TOL,
        detail: format!("worst residual {:.3e} at {} (tol {RELATION_TOL:e})", w.value, w.at),
    }
}

fn c2_rmatrix() -> Outcome {
    let mut wi = Worst::new();
    let mut wy = Worst::new();
    for q in Q_GRID {
        for b in all_backends(4, 4) {
            let (_, rm) = setup(b, q);
            wi.update(rm.intertwiner_residual(), || format!("{} q={q}", label(b)));
            wy.update(yang_baxter_residual(&rm), || format!("{} q={q}", label(b)));
        }
    }
    Outcome {
        pass: wi.value <= INTERTWINER_TOL && wy.value <= YANG_BAXTER_TOL,
        detail: format!(
            "intertwiner {:.3e} at {} (tol {INTERTWINER_TOL:e}), yang-baxter {:.3e} at {} (tol {YANG_BAXTER_TOL:e})",
            wi.value, wi.at, wy.value, wy.at
        ),
    }
}

fn c3_drinfeld() -> Outcome {
    let mut off = Worst::new();
    let mut rel = Worst::new();
    for q in Q_GRID {
        for b in all_backends(10, 6) {
            let (rep, rm) = setup(b, q);
            let cd = CartanData::new(b.algebra()).expect("cartan data");
            let want = dp(q).pow_rational(cd.casimir_exponent(rep.highest_weight()).expect("casimir"));
            off.update(rm.v_inverse_residual(), || format!("{} q={q}", label(b)));
            rel.update((rm.v_inverse() - want).abs() / want, || format!("{} q={q}", label(b)));
        }
    }
    Outcome {
        pass: off.value <= OFF_SCALAR_TOL && rel.value <= SCALAR_REL_TOL,
        detail: format!(
            "off-scalar {:.3e} at {} (tol {OFF_SCALAR_TOL:e}), scalar relative error {:.3e} at {} (tol {SCALAR_REL_TOL:e})",
            off.value, off.at, rel.value, rel.at
        ),
    }
}

fn c4_eigenvalues() -> Outcome {
    let mut proj = Worst::new();
    let mut eig = Worst::new();
    let mut exact = true;
    let mut failures = Vec::new();
    for q in Q_GRID {
        for b in all_backends(6, 6) {
            let (_, rm) = setup(b, q);
            match decompose_tensor_square(&rm) {
                Ok(dec) => {
                    let r = &dec.residuals;
                    proj.update(r.completeness.max(r.idempotence).max(r.orthogonality), || format!("{} q={q}", label(b)));
                    eig.update(r.eigen, || format!("{} q={q}", label(b)));
                    exact &= r.exact_eigen_identity;
                }
                Err(e) => failures.push(format!("{} q={q}: {e}", label(b))),
            }
        }
    }
    Outcome {
        pass: failures.is_empty() && proj.value <= PROJECTOR_TOL && eig.value <= EIGEN_TOL && exact,
        detail: format!(
            "projector residual {:.3e} at {} (tol {PROJECTOR_TOL:e}), eigen residual {:.3e} at {} (tol {EIGEN_TOL:e}), exact identity {exact}, errors {:?}",
            proj.value, proj.at, eig.value, eig.at, failures
        ),
    }
}

struct TheoremRun {
    backend: Backend,
    q: f64,
    rm: RMatrixRep,
    dec: TensorSquareDecomposition,
    min_delta: f64,
    best_value: f64,
    defects: Vec<f64>,
}

fn theorem_runs() -> Vec<TheoremRun> {
    let cfg = OptimizerConfig { restarts: 64, rng_seed: SEED, ..Default::default() };
    let mut runs = Vec::new();
    for q in Q_GRID {
        for n in 1..=6 {
            let b = Backend::Sl2Spin { n };
            let (rep, rm) = setup(b, q);
            let dec = decompose_tensor_square(&rm).expect("decomposition");
            let res = minimize_delta(&rep, &rm, &dec, &cfg).expect("minimization");
            let defects = res.best_states.iter().map(|s| coherence_defect(s, &dec).expect("defect")).collect();
            runs.push(TheoremRun {
                backend: b,
                q,
                min_delta: res.min_delta,
                best_value: res.best_value,
                defects,
                rm,
                dec,
            });
        }
    }
    runs
}

fn c5_value(runs: &[TheoremRun]) -> Outcome {
    let mut w = Worst::new();
    for r in runs {
        let scaled = (r.best_value - r.min_delta).abs() / r.min_delta.max(1.0);
        w.update(scaled, || format!("{} q={}", label(r.backend), r.q));
    }
    Outcome {
        pass: w.value <= GAP_TOL,
        detail: format!(
            "worst |gap|/max(1,Min) {:.3e} at {} over {} configs (tol {GAP_TOL:e})",
            w.value,
            w.at,
            runs.len()
        ),
    }
}

fn c6_attainment(runs: &[TheoremRun]) -> Outcome {
    let mut defect = Worst::new();
    let mut highest = Worst::new();
    let mut dip = Worst::new();
    let mut minimizers = 0;
    let mut rng = ChaCha8Rng::seed_from_u64(SEED ^ 6);
    for r in runs {
        let at = || format!("{} q={}", label(r.backend), r.q);
        for &d in &r.defects {
            defect.update(d, at);
        }
        minimizers += r.defects.len();
        let scale = r.min_delta.max(1.0);
        let hw = delta(&StateVector::basis(r.rm.dim(), 0), &r.rm, &r.dec).expect("delta");
        highest.update((hw.delta - r.min_delta).abs() / scale, at);
        for _ in 0..MARGIN_SAMPLES {
            let phi = StateVector::random(r.rm.dim(), &mut rng);
            let d = delta(&phi, &r.rm, &r.dec).expect("delta").delta;
            dip.update((r.min_delta - d) / scale, at);
        }
    }
    Outcome {
        pass: defect.value <= DEFECT_TOL && highest.value <= HIGHEST_TOL && dip.value <= MARGIN_TOL,
        detail: format!(
            "{minimizers} minimizers, worst defect {:.3e} at {} (tol {DEFECT_TOL:e}); highest weight |delta-Min|/max(1,Min) {:.3e} (tol {HIGHEST_TOL:e}); {} random states per config, worst (Min-delta)/max(1,Min) {:.3e} (tol {MARGIN_TOL:e})",
            defect.value, defect.at, highest.value, MARGIN_SAMPLES, dip.value
        ),
    }
}

fn c7_spin_half() -> Outcome {
    let mut w = Worst::new();
    for q in Q_GRID.iter().copied().chain([1.5, 3.0]) {
        let (_, rm) = setup(Backend::Sl2Spin { n: 1 }, q);
        let dec = decompose_tensor_square(&rm).expect("decomposition");
        let d = delta(&StateVector::basis(2, 0), &rm, &dec).expect("delta").delta;
        w.update((d - q * q).abs(), || format!("q={q}"));
    }
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let sup = StateVector::new(CVec::from_vec(vec![C64::new(s, 0.0), C64::new(s, 0.0)])).expect("state");
    let (_, rm) = setup(Backend::Sl2Spin { n: 1 }, 2.0);
    let dec = decompose_tensor_square(&rm).expect("decomposition");
    let at2 = delta(&sup, &rm, &dec).expect("delta");
    let not_minimal = !at2.is_minimal && at2.delta > at2.min_delta;
    let b = Backend::Sl2Spin { n: 1 };
    let cmin = classical_minimum(b).expect("classical minimum");
    let cdisp = classical_dispersion(&sup, &ClassicalBasis::new(b)).expect("classical");
    let (_, near) = setup(b, 1.0 + 1e-6);
    let near_delta = qdisp_core::dispersion::delta_value(&sup, &near).expect("delta");
    let classical_ok = (cdisp - cmin).abs() <= CLASSICAL_MIN_TOL && (near_delta - cmin).abs() <= CLASSICAL_MIN_TOL;
    Outcome {
        pass: w.value <= SPIN_HALF_TOL && not_minimal && classical_ok,
        detail: format!(
            "|delta(e0)-q^2| worst {:.3e} at {} (tol {SPIN_HALF_TOL:e}); q=2 superposition delta {:.6} vs Min {:.6}, defect {:.3e}, minimal {}; at q=1+1e-6 classical dispersion {:.8} and delta {:.8} vs classical minimum {:.8} (tol {CLASSICAL_MIN_TOL:e})",
            w.value, w.at, at2.delta, at2.min_delta, at2.coherence_defect, at2.is_minimal, cdisp, near_delta, cmin
        ),
    }
}

fn c8_classical_limit() -> Outcome {
    let eps = [1e-2, 1e-3, 1e-4];
    let mut rng = ChaCha8Rng::seed_from_u64(SEED ^ 8);
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    let mut missing = 0;
    let mut path = Worst::new();
    let mut states = 0;
    for n in 1..=4 {
        let b = Backend::Sl2Spin { n };
        let cb = ClassicalBasis::new(b);
        for _ in 0..25 {
            let phi = StateVector::random(b.dim(), &mut rng);
            let t = limit_check(b, &phi, &eps).expect("limit check");
            match t.slope {
                Some(s) => {
                    lo = lo.min(s);
                    hi = hi.max(s);
                }
                None => missing += 1,
            }
            let a = classical_dispersion(&phi, &cb).expect("classical");
            let f = classical_dispersion_q_form(&phi, &cb).expect("classical q form");
            path.update((a - f).abs() / a.abs().max(1.0), || format!("sl2({n})"));
            states += 1;
        }
    }
    let slope_ok = missing == 0 && (lo - SLOPE_TARGET).abs() <= SLOPE_TOL && (hi - SLOPE_TARGET).abs() <= SLOPE_TOL;
    Outcome {
        pass: slope_ok && path.value <= PATH_TOL,
        detail: format!(
            "{states} states, fitted slopes in [{lo:.4}, {hi:.4}] (target {SLOPE_TARGET} +/- {SLOPE_TOL}), {missing} unfit; paths differ by {:.3e} (tol {PATH_TOL:e})",
            path.value
        ),
    }
}

fn c9_sln_degeneracy() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED ^ 9);
    let mut w = Worst::new();
    for q in Q_GRID {
        for n in 2..=4 {
            let b = Backend::SlnFundamental { n };
            let (_, rm) = setup(b, q);
            let dec = decompose_tensor_square(&rm).expect("decomposition");
            for _ in 0..1000 {
                let phi = StateVector::random(b.dim(), &mut rng);
                let r = delta(&phi, &rm, &dec).expect("delta");
                w.update((r.delta - r.min_delta).abs() / r.min_delta.max(1.0), || {
                    format!("{} q={q} (defect {:.3e})", label(b), r.coherence_defect)
                });
            }
        }
    }
    Outcome {
        pass: w.value <= DEGENERACY_TOL,
        detail: format!("worst |delta-Min|/max(1,Min) {:.3e} at {} (tol {DEGENERACY_TOL:e})", w.value, w.at),
    }
}

fn c10_gradient() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED ^ 10);
    let h = 1e-6;
    let mut w = Worst::new();
    for i in 0..100 {
        let b = if i % 4 == 3 {
            Backend::SlnFundamental { n: rng.random_range(2..=4) }
        } else {
            Backend::Sl2Spin { n: rng.random_range(1..=4) }
        };
        let q = if rng.random_bool(0.5) { rng.random_range(0.4..0.95) } else { rng.random_range(1.05..2.5) };
        let (_, rm) = setup(b, q);
        let obj = Objective::new(&rm);
        let phi = StateVector::random(rm.dim(), &mut rng);
        let g = delta_gradient(&phi, &rm).expect("gradient");
        let mut fd = CVec::zeros(rm.dim());
        for k in 0..rm.dim() {
            let mut parts = [0.0; 2];
            for (slot, unit) in [C64::new(1.0, 0.0), C64::new(0.0, 1.0)].into_iter().enumerate() {
                let mut step = CVec::zeros(rm.dim());
                step[k] = unit * h;
                parts[slot] = (obj.value(&(phi.amps() + &step)) - obj.value(&(phi.amps() - &step))) / (2.0 * h);
            }
            fd[k] = C64::new(parts[0], parts[1]);
        }
        w.update((&g - &fd).norm() / g.norm().max(1e-300), || format!("{} q={q:.4}", label(b)));
    }
    Outcome {
        pass: w.value <= GRADIENT_TOL,
        detail: format!("100 configurations, worst relative error {:.3e} at {} (tol {GRADIENT_TOL:e})", w.value, w.at),
    }
}

fn run_cli(args: &[&str], threads: Option<usize>) -> (Vec<u8>, u8) {
    let argv = std::iter::once("qdisp").chain(args.iter().copied());
    let inv = match threads {
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build()
            .expect("thread pool")
            .install(|| qdisp_cli::run(argv)),
        None => qdisp_cli::run(argv),
    };
    (inv.stdout, inv.code)
}

fn c11_determinism() -> Outcome {
    let verify = ["verify", "--algebra", "sl2", "--n", "4", "--q", "2", "--seed", "7"];
    let sweep = ["sweep", "--algebra", "sl2", "--n", "1,2,3", "--q", "0.5,1.5,2", "--seed", "3", "--restarts", "16"];
    let sweep_json = ["sweep", "--n", "2", "--q-min", "0.6", "--q-max", "1.8", "--q-count", "5", "--format", "json"];
    let mut notes = Vec::new();
    let mut pass = true;
    for (name, args) in [("verify", &verify[..]), ("sweep", &sweep[..]), ("sweep-json", &sweep_json[..])] {
        let (a, ca) = run_cli(args, None);
        let (b, cb) = run_cli(args, None);
        let (c, cc) = run_cli(args, Some(1));
        let same = a == b && a == c && !a.is_empty();
        let ok = ca == 0 && cb == 0 && cc == 0;
        pass &= same && ok;
        notes.push(format!("{name}: {} bytes, identical across runs and a 1-thread pool {same}, exit {ca}", a.len()));
    }
    Outcome { pass, detail: notes.join("; ") }
}

fn main() {
    let start = Instant::now();
    let runs = theorem_runs();
    let results: Vec<(usize, &str, Outcome)> = vec![
        (1, "algebra relations", c1_relations()),
        (2, "R-matrix structure", c2_rmatrix()),
        (3, "Drinfeld scalar", c3_drinfeld()),
        (4, "eigenvalue formula", c4_eigenvalues()),
        (5, "theorem value", c5_value(&runs)),
        (6, "theorem attainment", c6_attainment(&runs)),
        (7, "spin-1/2 closed form", c7_spin_half()),
        (8, "classical limit", c8_classical_limit()),
        (9, "sl_n fundamental degeneracy", c9_sln_degeneracy()),
        (10, "gradient correctness", c10_gradient()),
        (11, "determinism", c11_determinism()),
    ];
    let mut failed = 0;
    for (id, name, o) in &results {
        if !o.pass {
            failed += 1;
        }
        println!("{} {:>2} {:<28} {}", if o.pass { "PASS" } else { "FAIL" }, id, name, o.detail);
    }
    println!(
        "acceptance: {} passed, {} failed in {:.1}s",
        results.len() - failed,
        failed,
        start.elapsed().as_secs_f64()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
