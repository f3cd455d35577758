use std::path::Path;
use std::time::Instant;

use qdisp_core::cartan::{CartanData, DeformationParameter, ETA_MIN};
use qdisp_core::classical::{classical_dispersion, classical_dispersion_q_form, classical_minimum, limit_check, ClassicalBasis};
use qdisp_core::dispersion::{coherence_defect, delta as delta_report, rtr_commutant_residual};
use qdisp_core::minimize::{minimize_delta, verify_theorem, OptimizerConfig, MINIMIZER_COHERENCE_TOL};
use qdisp_core::repn::{build_irrep, check_coproduct_relations, check_relations, highest_weight_residual, Backend, Irrep};
use qdisp_core::rmatrix::{
    build_r, decompose_unchecked, exponent_f64, yang_baxter_residual, RMatrixRep, TensorSquareDecomposition, EIGEN_TOL,
    INTERTWINER_TOL, PROJECTOR_TOL, SCALAR_TOL,
};
use rayon::prelude::*;

use crate::output::{fmt_f64, write_file, to_csv, to_json, Cell, Record, SCHEMA_VERSION};
use crate::state::StateSpec;
use crate::{backend_for, DecomposeArgs, DeltaArgs, Failure, Format, LimitArgs, Spacing, SweepArgs, Target, VerifyArgs};

const RELATION_TOL: f64 = 1e-10;
const YANG_BAXTER_TOL: f64 = 1e-9;
const SCALAR_REL_TOL: f64 = 1e-10;
const COMMUTANT_TOL: f64 = 1e-9;

pub const SWEEP_HEADER: [&str; 9] = [
    "algebra",
    "n",
    "q",
    "min_delta_formula",
    "min_delta_found",
    "formula_gap",
    "restarts_converged",
    "coherent_found",
    "wall_ms",
];
const CLASSICAL_COLUMNS: [&str; 2] = ["classical_min", "classical_deviation"];

fn io_failure(path: Option<&Path>, e: std::io::Error) -> Failure {
    match path {
        Some(p) => Failure::Usage(format!("cannot write {}: {e}", p.display())),
        None => Failure::Numerical(format!("cannot write to stdout: {e}")),
    }
}

fn write_out(text: &str, path: Option<&Path>, out: &mut String) -> Result<(), Failure> {
    match path {
        Some(p) => write_file(p, text).map_err(|e| io_failure(Some(p), e)),
        None => {
            out.push_str(text);
            Ok(())
        }
    }
}

fn json(record: &impl serde::Serialize) -> Result<String, Failure> {
    to_json(record).map_err(Failure::Numerical)
}

fn build(backend: Backend, dp: &DeformationParameter) -> Result<(Irrep, RMatrixRep), Failure> {
    let rep = build_irrep(backend, dp)?;
    let rm = build_r(&rep)?;
    Ok((rep, rm))
}

fn target_header(rec: &mut Record, backend: Backend, dp: &DeformationParameter) {
    rec.str("algebra", backend.algebra().tag()).int("n_or_rank", backend.label() as i64).float("q", dp.q());
}

struct CheckRow {
    name: &'static str,
    value: f64,
    tol: f64,
}

impl CheckRow {
    fn pass(&self) -> bool {
        self.value.is_finite() && self.value <= self.tol
    }
}

pub fn check(t: &Target, out: &mut String) -> Result<(), Failure> {
    let backend = t.backend()?;
    let dp = t.deformation()?;
    let (rep, rm) = build(backend, &dp)?;
    let rel = check_relations(&rep)?;
    let co = check_coproduct_relations(&rep)?;
    let cd = CartanData::new(backend.algebra())?;
    let expected = dp.pow_rational(cd.casimir_exponent(rep.highest_weight())?);
    let dec = decompose_unchecked(&rm)?;
    let res = &dec.residuals;
    let rows = [
        CheckRow { name: "k-conjugation", value: rel.k_conjugation, tol: RELATION_TOL },
        CheckRow { name: "ef-commutator", value: rel.ef_commutator, tol: RELATION_TOL },
        CheckRow { name: "cartan-commute", value: rel.cartan_commute, tol: RELATION_TOL },
        CheckRow { name: "cross-commute", value: rel.cross_commute, tol: RELATION_TOL },
        CheckRow { name: "serre", value: rel.serre, tol: RELATION_TOL },
        CheckRow { name: "hermiticity", value: rel.hermiticity, tol: RELATION_TOL },
        CheckRow { name: "coproduct-relations", value: co.max(), tol: RELATION_TOL },
        CheckRow { name: "highest-weight", value: highest_weight_residual(&rep), tol: RELATION_TOL },
        CheckRow { name: "intertwiner", value: rm.intertwiner_residual(), tol: INTERTWINER_TOL },
        CheckRow { name: "yang-baxter", value: yang_baxter_residual(&rm), tol: YANG_BAXTER_TOL },
        CheckRow { name: "v-inverse-off-scalar", value: rm.v_inverse_residual(), tol: SCALAR_TOL },
        CheckRow {
            name: "v-inverse-scalar",
            value: (rm.v_inverse() - expected).abs() / expected.abs(),
            tol: SCALAR_REL_TOL,
        },
        CheckRow { name: "rtr-commutant", value: rtr_commutant_residual(&rep, &rm)?, tol: COMMUTANT_TOL },
        CheckRow { name: "projector-completeness", value: res.completeness, tol: PROJECTOR_TOL },
        CheckRow { name: "projector-idempotence", value: res.idempotence, tol: PROJECTOR_TOL },
        CheckRow { name: "projector-orthogonality", value: res.orthogonality, tol: PROJECTOR_TOL },
        CheckRow { name: "projector-hermiticity", value: res.hermiticity, tol: PROJECTOR_TOL },
        CheckRow { name: "projector-trace", value: res.trace, tol: PROJECTOR_TOL },
        CheckRow { name: "eigenvalue-formula", value: res.eigen, tol: EIGEN_TOL },
    ];
    let mut text = format!("check {} {} q={}\n", backend.algebra().tag(), backend.label(), fmt_f64(dp.q()));
    for r in &rows {
        text.push_str(&format!(
            "{:<26}{:>12.3e}{:>10.1e}  {}\n",
            r.name,
            r.value,
            r.tol,
            if r.pass() { "PASS" } else { "FAIL" }
        ));
    }
    let exact = res.exact_eigen_identity;
    text.push_str(&format!("{:<26}{:>12}{:>10}  {}\n", "exact-eigen-identity", exact, "", if exact { "PASS" } else { "FAIL" }));
    let all = rows.iter().all(CheckRow::pass) && exact;
    text.push_str(if all { "PASS\n" } else { "FAIL\n" });
    write_out(&text, None, out)?;
    if all {
        Ok(())
    } else {
        Err(Failure::Verification("one or more checks failed".into()))
    }
}

pub fn delta(a: &DeltaArgs, out: &mut String) -> Result<(), Failure> {
    let backend = a.target.backend()?;
    let dp = a.target.deformation()?;
    let spec = StateSpec::parse(&a.state).map_err(Failure::Usage)?;
    let (phi, norm) = spec.build(backend.dim(), a.seed).map_err(Failure::Usage)?;
    let (_, rm) = build(backend, &dp)?;
    let dec = decompose_unchecked(&rm)?;
    if !dec.residuals.within_tolerance() {
        return Err(Failure::Verification("tensor-square decomposition failed its checks".into()));
    }
    let r = delta_report(&phi, &rm, &dec)?;
    let mut rec = Record::new();
    rec.str("algebra", r.algebra.tag())
        .int("n_or_rank", r.n_or_rank as i64)
        .float("q", r.q)
        .float("delta", r.delta)
        .float("term_v2", r.term_v2)
        .float("term_rtr", r.term_rtr)
        .push("c_squared", Cell::Floats(r.c_squared.clone()))
        .float("min_delta", r.min_delta)
        .bool("is_minimal", r.is_minimal)
        .float("coherence_defect", r.coherence_defect)
        .float("applied_norm", norm)
        .int("schema_version", SCHEMA_VERSION as i64);
    write_out(&json(&rec)?, a.out.as_deref(), out)
}

fn decomposition_records(dec: &TensorSquareDecomposition) -> Vec<Record> {
    dec.components
        .iter()
        .map(|c| {
            let mut r = Record::new();
            r.str("highest_weight", c.highest_weight.to_string())
                .int("dim", c.dim as i64)
                .str("exponent", c.exponent.to_string())
                .float("exponent_value", exponent_f64(c))
                .float("eigenvalue", c.eigenvalue)
                .float("trace", c.projector.trace().re);
            r
        })
        .collect()
}

pub fn decompose(a: &DecomposeArgs, out: &mut String) -> Result<(), Failure> {
    let backend = a.target.backend()?;
    let dp = a.target.deformation()?;
    let (_, rm) = build(backend, &dp)?;
    let dec = decompose_unchecked(&rm)?;
    let comps = decomposition_records(&dec);
    let text = match a.format {
        Format::Csv => {
            let header = ["highest_weight", "dim", "exponent", "exponent_value", "eigenvalue", "trace"];
            to_csv(&comps, &header).map_err(Failure::Numerical)?
        }
        Format::Json => {
            let res = &dec.residuals;
            let mut residuals = Record::new();
            residuals
                .float("completeness", res.completeness)
                .float("idempotence", res.idempotence)
                .float("orthogonality", res.orthogonality)
                .float("eigen", res.eigen)
                .float("hermiticity", res.hermiticity)
                .float("trace", res.trace)
                .bool("exact_eigen_identity", res.exact_eigen_identity);
            let mut rec = Record::new();
            target_header(&mut rec, backend, &dp);
            rec.int("block_count", dec.block_count as i64)
                .push("components", Cell::Records(comps))
                .push("residuals", Cell::Nested(residuals))
                .bool("within_tolerance", res.within_tolerance())
                .int("schema_version", SCHEMA_VERSION as i64);
            json(&rec)?
        }
    };
    write_out(&text, a.out.as_deref(), out)?;
    if dec.residuals.within_tolerance() {
        Ok(())
    } else {
        Err(Failure::Verification("decomposition residuals exceed tolerance".into()))
    }
}

pub fn verify(a: &VerifyArgs, out: &mut String) -> Result<(), Failure> {
    let backend = a.target.backend()?;
    let dp = a.target.deformation()?;
    let cfg = OptimizerConfig { restarts: a.restarts, rng_seed: a.seed, ..Default::default() };
    cfg.validate()?;
    let (rep, mut rm) = build(backend, &dp)?;
    if a.corrupt_r {
        let d = rm.dim();
        rm = rm.corrupted(0, d * d - 1, 1e-2)?;
    }
    let dec = decompose_unchecked(&rm).map_err(|e| match Failure::from(e) {
        Failure::Numerical(m) if a.corrupt_r => Failure::Verification(m),
        f => f,
    })?;
    let v = verify_theorem(&rep, &rm, &dec, &cfg)?;
    let r = &v.result;
    let verdict = if v.pass { "PASS" } else { "FAIL" };
    let text = match a.format {
        None => {
            let mut s = format!(
                "verify {} {} q={} restarts={} seed={}{}\n",
                backend.algebra().tag(),
                backend.label(),
                fmt_f64(dp.q()),
                cfg.restarts,
                cfg.rng_seed,
                if a.corrupt_r { " corrupt-r" } else { "" }
            );
            for c in &v.clauses {
                s.push_str(&format!("  {:<16}{}  {}\n", c.name, if c.pass { "PASS" } else { "FAIL" }, c.detail));
            }
            s.push_str(&format!(
                "min_delta_formula {}\nmin_delta_found {}\nformula_gap {}\n",
                fmt_f64(r.min_delta),
                fmt_f64(r.best_value),
                fmt_f64(r.formula_gap)
            ));
            s.push_str(&format!(
                "minimizers {} distinct, {} coherent; restarts {}/{} converged; margin samples {}\n",
                r.best_states.len(),
                v.coherent_found,
                r.converged_count(),
                r.per_restart.len(),
                v.margin_samples
            ));
            if let Some((clause, phi)) = &v.offending_state {
                let amps: Vec<String> =
                    phi.amps().iter().map(|z| format!("{}{}{}j", fmt_f64(z.re), if z.im < 0.0 { "" } else { "+" }, fmt_f64(z.im))).collect();
                s.push_str(&format!("offending state ({clause}): {}\n", amps.join(",")));
            }
            s.push_str(verdict);
            s.push('\n');
            s
        }
        Some(Format::Csv) => return Err(Failure::Usage("verify supports text or --format json".into())),
        Some(Format::Json) => {
            let clauses: Vec<Record> = v
                .clauses
                .iter()
                .map(|c| {
                    let mut rec = Record::new();
                    rec.str("name", c.name).bool("pass", c.pass).str("detail", c.detail.clone());
                    rec
                })
                .collect();
            let mut rec = Record::new();
            target_header(&mut rec, backend, &dp);
            rec.int("restarts", cfg.restarts as i64)
                .int("seed", cfg.rng_seed as i64)
                .bool("corrupt_r", a.corrupt_r)
                .str("verdict", verdict)
                .push("clauses", Cell::Records(clauses))
                .float("min_delta_formula", r.min_delta)
                .float("min_delta_found", r.best_value)
                .float("formula_gap", r.formula_gap)
                .int("restarts_converged", r.converged_count() as i64)
                .int("distinct_minimizers", r.best_states.len() as i64)
                .int("coherent_found", v.coherent_found as i64)
                .int("margin_samples", v.margin_samples as i64)
                .int("schema_version", SCHEMA_VERSION as i64);
            json(&rec)?
        }
    };
    write_out(&text, a.out.as_deref(), out)?;
    if v.pass {
        Ok(())
    } else {
        Err(Failure::Verification("theorem verification failed".into()))
    }
}

pub fn q_grid(a: &SweepArgs) -> Result<Vec<f64>, Failure> {
    let mut grid = if !a.q.is_empty() {
        a.q.clone()
    } else {
        let lo = a.q_min.ok_or_else(|| Failure::Usage("sweep needs --q or --q-min".into()))?;
        let hi = a.q_max.unwrap_or(lo);
        if a.q_count == 0 {
            return Err(Failure::Usage("--q-count must be at least 1".into()));
        }
        if a.q_count == 1 {
            vec![lo]
        } else {
            if a.q_spacing == Spacing::Log && !(lo > 0.0 && hi > 0.0) {
                return Err(Failure::Usage("log spacing needs positive --q-min and --q-max".into()));
            }
            let m = (a.q_count - 1) as f64;
            (0..a.q_count)
                .map(|i| {
                    let s = i as f64 / m;
                    match a.q_spacing {
                        Spacing::Linear => lo + (hi - lo) * s,
                        Spacing::Log => (lo.ln() + (hi.ln() - lo.ln()) * s).exp(),
                    }
                })
                .collect()
        }
    };
    for &q in &grid {
        if !(q.is_finite() && q > 0.0) {
            return Err(Failure::Usage(format!("grid value q = {q} must be positive and finite")));
        }
        if q.ln().abs() < ETA_MIN {
            return Err(Failure::Usage(format!(
                "grid value q = {q} lies inside (e^-{ETA_MIN:e}, e^{ETA_MIN:e}); q must differ from 1"
            )));
        }
    }
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    Ok(grid)
}

fn sweep_point(
    backend: Backend,
    q: f64,
    cfg: &OptimizerConfig,
    with_classical: bool,
    timing: bool,
) -> Result<Record, Failure> {
    let start = Instant::now();
    let dp = DeformationParameter::from_q(q)?;
    let (rep, rm) = build(backend, &dp)?;
    let dec = decompose_unchecked(&rm)?;
    if !dec.residuals.within_tolerance() {
        return Err(Failure::Verification(format!("decomposition at q = {q} failed its checks")));
    }
    let res = minimize_delta(&rep, &rm, &dec, cfg)?;
    let mut coherent = 0;
    for s in &res.best_states {
        if coherence_defect(s, &dec)? <= MINIMIZER_COHERENCE_TOL {
            coherent += 1;
        }
    }
    let wall_ms = if timing { start.elapsed().as_millis() as i64 } else { 0 };
    let mut rec = Record::new();
    rec.str("algebra", backend.algebra().tag())
        .int("n", backend.label() as i64)
        .float("q", q)
        .float("min_delta_formula", res.min_delta)
        .float("min_delta_found", res.best_value)
        .float("formula_gap", res.formula_gap)
        .int("restarts_converged", res.converged_count() as i64)
        .int("coherent_found", coherent)
        .int("wall_ms", wall_ms);
    if with_classical {
        let cm = classical_minimum(backend)?;
        rec.float("classical_min", cm).float("classical_deviation", (res.min_delta - cm).abs());
    }
    if !rec.is_finite() {
        return Err(Failure::Numerical(format!("non-finite result at n = {}, q = {q}", backend.label())));
    }
    Ok(rec)
}

pub fn sweep(a: &SweepArgs, out: &mut String) -> Result<(), Failure> {
    let grid = q_grid(a)?;
    let mut ns = a.n.clone();
    ns.sort_unstable();
    ns.dedup();
    let backends = ns.iter().map(|&n| backend_for(a.algebra, n)).collect::<Result<Vec<_>, _>>()?;
    let cfg = OptimizerConfig { restarts: a.restarts, rng_seed: a.seed, ..Default::default() };
    cfg.validate()?;
    if let Some(p) = &a.out {
        // Fail on an unwritable path before spending time on the grid.
        std::fs::write(p, b"").map_err(|e| io_failure(Some(p), e))?;
    }
    let points: Vec<(Backend, f64)> = backends.iter().flat_map(|&b| grid.iter().map(move |&q| (b, q))).collect();
    let rows = points
        .par_iter()
        .map(|&(b, q)| sweep_point(b, q, &cfg, a.with_classical, a.timing))
        .collect::<Result<Vec<_>, _>>()?;
    let text = match a.format {
        Format::Csv => {
            let mut header: Vec<&str> = SWEEP_HEADER.to_vec();
            if a.with_classical {
                header.extend(CLASSICAL_COLUMNS);
            }
            to_csv(&rows, &header).map_err(Failure::Numerical)?
        }
        Format::Json => json(&Cell::Records(rows))?,
    };
    write_out(&text, a.out.as_deref(), out)
}

pub fn limit(a: &LimitArgs, out: &mut String) -> Result<(), Failure> {
    let backend = backend_for(a.algebra, a.n)?;
    let spec = StateSpec::parse(&a.state).map_err(Failure::Usage)?;
    let (phi, norm) = spec.build(backend.dim(), a.seed).map_err(Failure::Usage)?;
    if a.eps.is_empty() {
        return Err(Failure::Usage("--eps needs at least one value".into()));
    }
    let table = limit_check(backend, &phi, &a.eps)?;
    let cb = ClassicalBasis::new(backend);
    let direct = classical_dispersion(&phi, &cb)?;
    let q_form = classical_dispersion_q_form(&phi, &cb)?;
    let rows: Vec<Record> = table
        .rows
        .iter()
        .map(|r| {
            let mut rec = Record::new();
            rec.float("eps", r.eps).float("delta", r.delta).float("classical", r.classical).float("deviation", r.deviation);
            rec
        })
        .collect();
    let text = match a.format {
        Format::Csv => to_csv(&rows, &["eps", "delta", "classical", "deviation"]).map_err(Failure::Numerical)?,
        Format::Json => {
            let mut rec = Record::new();
            rec.str("algebra", backend.algebra().tag())
                .int("n_or_rank", backend.label() as i64)
                .float("applied_norm", norm)
                .float("classical_direct", direct)
                .float("classical_q_form", q_form)
                .push("slope", table.slope.map_or(Cell::Null, Cell::Float))
                .push("rows", Cell::Records(rows))
                .int("schema_version", SCHEMA_VERSION as i64);
            json(&rec)?
        }
    };
    write_out(&text, a.out.as_deref(), out)
}
