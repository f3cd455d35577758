//! Universal R-matrix evaluated on `V ⊗ V`, the contraction producing the
//! inverse ribbon element, and the spectral decomposition of `R^T R`.

use num_bigint::BigInt;
use num_rational::{BigRational, Rational64};
use num_traits::Zero;

use crate::cartan::{q_factorial, rational_to_f64, DeformationParameter, Weight};
use crate::error::{Error, Result};
use crate::exact::{spectral_projectors, simplest_rational, ComponentSpec, Elem, Field, SparseExact};
use crate::linalg::{diag, identity, kron, op_norm, re, CMat};
use crate::repn::{all_generators, coproduct, coproduct_op, Backend, Irrep};

/// Relative tolerance for `R Δ = Δ^op R`.
pub const INTERTWINER_TOL: f64 = 1e-9;
/// Relative tolerance for the contraction being scalar.
pub const SCALAR_TOL: f64 = 1e-9;
/// Tolerance on projector completeness, idempotence and orthogonality.
pub const PROJECTOR_TOL: f64 = 1e-8;
/// Relative tolerance on `M P_i = x_i P_i`.
pub const EIGEN_TOL: f64 = 1e-8;
/// Predicted eigenvalues closer than this, relative to the larger of the
/// pair, are refused.
pub const DEGENERACY_TOL: f64 = 1e-6;

/// One summand `A ⊗ B` of the R-matrix.
#[derive(Clone, Debug)]
pub struct RTerm {
    pub a: CMat,
    pub b: CMat,
}

#[derive(Clone, Debug)]
struct ExactR {
    field: Field,
    raw: SparseExact,
    /// `R = q^scale · (D⊗D) R_raw (D⊗D)⁻¹`.
    scale: Rational64,
}

#[derive(Clone, Debug)]
pub struct RMatrixRep {
    backend: Backend,
    dp: DeformationParameter,
    dim: usize,
    highest_weight: Weight,
    casimir: Rational64,
    rescale: Vec<f64>,
    r: CMat,
    rtr: CMat,
    terms: Vec<RTerm>,
    k_two_rho: CMat,
    exact: ExactR,
    intertwiner_residual: f64,
    v_inverse: f64,
    v_inverse_residual: f64,
    corrupted: bool,
}

impl RMatrixRep {
    pub fn backend(&self) -> Backend {
        self.backend
    }
    pub fn deformation(&self) -> &DeformationParameter {
        &self.dp
    }
    pub fn dim(&self) -> usize {
        self.dim
    }
    pub fn highest_weight(&self) -> &Weight {
        &self.highest_weight
    }
    /// `(lambda + 2 rho, lambda)`.
    pub fn casimir_exponent(&self) -> Rational64 {
        self.casimir
    }
    pub fn r(&self) -> &CMat {
        &self.r
    }
    /// `R^T R` on `V ⊗ V`.
    pub fn rtr(&self) -> &CMat {
        &self.rtr
    }
    pub fn terms(&self) -> &[RTerm] {
        &self.terms
    }
    pub fn k_two_rho(&self) -> &CMat {
        &self.k_two_rho
    }
    pub fn intertwiner_residual(&self) -> f64 {
        self.intertwiner_residual
    }
    /// Scalar value of `Σ B K_{2rho} A`.
    pub fn v_inverse(&self) -> f64 {
        self.v_inverse
    }
    pub fn v_inverse_residual(&self) -> f64 {
        self.v_inverse_residual
    }
    pub fn is_corrupted(&self) -> bool {
        self.corrupted
    }

    /// Copy with `δ` added to entry `(row, col)` of both the floating and the
    /// exact R-matrix. No convention checks are run on the result.
    pub fn corrupted(&self, row: usize, col: usize, delta: f64) -> Result<Self> {
        let size = self.dim * self.dim;
        if row >= size || col >= size {
            return Err(Error::DimensionMismatch { expected: size, got: row.max(col) + 1 });
        }
        let mut out = self.clone();
        out.r[(row, col)] += re(delta);
        out.rtr = out.r.adjoint() * &out.r;
        let s = |k: usize| self.rescale[k / self.dim] * self.rescale[k % self.dim];
        let raw_delta = delta * s(col) / s(row) / self.dp.pow_rational(self.exact.scale);
        let v = out.exact.field.rational(signed_rational(raw_delta));
        out.exact.raw.add_to(&self.exact.field, row, col, v);
        out.corrupted = true;
        Ok(out)
    }

    /// Exact R-matrix rounded to f64 in the working basis.
    pub fn exact_r_f64(&self) -> CMat {
        let dense = self.exact.raw.to_dense_f64(&self.exact.field);
        let s = |k: usize| self.rescale[k / self.dim] * self.rescale[k % self.dim];
        let scale = self.dp.pow_rational(self.exact.scale);
        let n = self.dim * self.dim;
        CMat::from_fn(n, n, |r, c| re(dense[r][c] * scale * s(r) / s(c)))
    }
}

fn signed_rational(x: f64) -> BigRational {
    if x == 0.0 || !x.is_finite() {
        BigRational::zero()
    } else if x > 0.0 {
        simplest_rational(x)
    } else {
        -simplest_rational(-x)
    }
}

fn projector(dim: usize, k: usize) -> CMat {
    let mut p = CMat::zeros(dim, dim);
    p[(k, k)] = re(1.0);
    p
}

/// The factor `R_0 = Σ U_s ⊗ V_s` with `R = q^{(wt,wt)} R_0`.
fn unipotent_terms(rep: &Irrep) -> Result<Vec<(CMat, CMat)>> {
    let dp = rep.deformation();
    let qq = dp.q_minus_qinv();
    let d = rep.dim();
    Ok(match rep.backend() {
        Backend::Sl2Spin { n } => {
            let x = rep.k(1) * rep.e(1);
            let y = rep.f(1) * rep.k_inv(1);
            let mut out = Vec::with_capacity(n + 1);
            let mut xm = identity(d);
            let mut ym = identity(d);
            for m in 0..=n {
                let c = qq.powi(m as i32) * dp.pow((m * m.saturating_sub(1)) as f64 / 2.0) / q_factorial(m, dp)?;
                out.push((&xm * re(c), ym.clone()));
                xm = &xm * &x;
                ym = &ym * &y;
            }
            out
        }
        Backend::SlnFundamental { n } => {
            let mut out = vec![(identity(d), identity(d))];
            for a in 0..n {
                for b in a + 1..n {
                    let mut u = CMat::zeros(d, d);
                    let mut v = CMat::zeros(d, d);
                    u[(a, b)] = re(qq);
                    v[(b, a)] = re(1.0);
                    out.push((u, v));
                }
            }
            out
        }
    })
}

/// R-matrix as a list of `A ⊗ B` terms.
pub fn term_list(rep: &Irrep) -> Result<Vec<RTerm>> {
    let d = rep.dim();
    let cd = rep.cartan();
    let dp = rep.deformation();
    let w = rep.weights();
    let mut terms = Vec::new();
    for (u, v) in unipotent_terms(rep)? {
        for a in 0..d {
            let pa = projector(d, a) * &u;
            if pa.iter().all(|z| z.norm() == 0.0) {
                continue;
            }
            let da: Vec<f64> = (0..d).map(|b| dp.pow_rational(cd.inner(&w[a], &w[b]))).collect();
            terms.push(RTerm { a: pa, b: diag(&da) * &v });
        }
    }
    Ok(terms)
}

type SparseTerm = Vec<(usize, usize, Elem)>;

/// Exact terms `(A, B)` of `R_raw` with `R = q^scale (D⊗D) R_raw (D⊗D)⁻¹`.
fn exact_terms(rep: &Irrep, field: &Field) -> (Vec<(SparseTerm, SparseTerm)>, Rational64) {
    let d = rep.dim();
    let mut terms = Vec::new();
    match rep.backend() {
        Backend::Sl2Spin { n } => {
            let n = n as i64;
            let qq = field.q() - field.q().recip();
            // X = K E and Y = F K⁻¹ in the raw basis.
            let x = |k: i64| field.mul(&field.t_pow(n - 2 * (k - 1)), &field.rational(field.q_integer(k)));
            let y = |k: i64| field.mul(&field.t_pow(-(n - 2 * k)), &field.rational(field.q_integer(n - k)));
            let mut fact = BigRational::from_integer(BigInt::from(1));
            for m in 0..=n {
                if m > 0 {
                    fact *= field.q_integer(m);
                }
                let mut cm = field.q_pow(m * (m - 1) / 2) / &fact;
                for _ in 0..m {
                    cm *= &qq;
                }
                let cm = field.rational(cm);
                // Y^m restricted to columns; shared by every A below.
                let ym: Vec<(i64, Elem)> = (0..=(n - m))
                    .map(|l| {
                        let mut v = field.one();
                        for j in 0..m {
                            v = field.mul(&v, &y(l + j));
                        }
                        (l, v)
                    })
                    .collect();
                for a in 0..=(n - m) {
                    let mut xv = cm.clone();
                    for j in 0..m {
                        xv = field.mul(&xv, &x(a + m - j));
                    }
                    let at = vec![(a as usize, (a + m) as usize, xv)];
                    let bt = ym
                        .iter()
                        .map(|(l, v)| {
                            let row = l + m;
                            let cartan = field.t_pow((n - 2 * a) * (n - 2 * row));
                            (row as usize, *l as usize, field.mul(&cartan, v))
                        })
                        .collect();
                    terms.push((at, bt));
                }
            }
            (terms, Rational64::zero())
        }
        Backend::SlnFundamental { n } => {
            let qq = field.rational(field.q() - field.q().recip());
            for a in 0..n {
                let bt = (0..d)
                    .map(|b| (b, b, if a == b { field.rational(field.q().clone()) } else { field.one() }))
                    .collect();
                terms.push((vec![(a, a, field.one())], bt));
                for b in a + 1..n {
                    terms.push((vec![(a, b, qq.clone())], vec![(b, a, field.one())]));
                }
            }
            (terms, Rational64::new(-1, n as i64))
        }
    }
}

fn exact_r(rep: &Irrep, field: &Field) -> Result<(ExactR, Vec<Vec<Elem>>)> {
    let d = rep.dim();
    let (terms, scale) = exact_terms(rep, field);
    let mut raw = SparseExact::new(d * d);
    for (at, bt) in &terms {
        for (i, j, av) in at {
            for (k, l, bv) in bt {
                raw.add_to(field, i * d + k, j * d + l, field.mul(av, bv));
            }
        }
    }
    // K_{2rho} = diag(q^{(2rho, wt_p)}), integral exponents in both backends.
    let two_rho = Rational64::from_integer(2) * &rep.cartan().rho();
    let mut kdiag = Vec::with_capacity(d);
    for w in rep.weights() {
        let e = rep.cartan().inner(&two_rho, w);
        if !e.is_integer() {
            return Err(Error::Numerical(format!("(2 rho, wt) = {e} is not integral")));
        }
        kdiag.push(field.rational(field.q_pow(e.to_integer())));
    }
    let mut u = vec![vec![Elem::zero(); d]; d];
    for (at, bt) in &terms {
        for (i, p, bv) in bt {
            for (p2, j, av) in at {
                if p == p2 {
                    let v = field.mul(&field.mul(bv, &kdiag[*p]), av);
                    u[*i][*j] = field.add(&u[*i][*j], &v);
                }
            }
        }
    }
    Ok((ExactR { field: field.clone(), raw, scale }, u))
}

/// Builds `R` on `V ⊗ V` and checks that it intertwines `Δ` with `Δ^op` and
/// that its terms contract to a scalar.
pub fn build_r(rep: &Irrep) -> Result<RMatrixRep> {
    let dp = *rep.deformation();
    dp.require_quantum()?;
    let d = rep.dim();
    let terms = term_list(rep)?;
    let mut r = CMat::zeros(d * d, d * d);
    for t in &terms {
        r += kron(&t.a, &t.b);
    }
    let r_norm = op_norm(&r);
    let mut intertwiner = 0.0_f64;
    for g in all_generators(rep.rank()) {
        let x = coproduct(rep, g)?;
        let xo = coproduct_op(rep, g)?;
        let res = op_norm(&(&r * &x - &xo * &r)) / (r_norm * op_norm(&x)).max(1.0);
        intertwiner = intertwiner.max(res);
    }
    if !(intertwiner <= INTERTWINER_TOL) {
        return Err(Error::Intertwiner { residual: intertwiner, tol: INTERTWINER_TOL });
    }
    let k2 = rep.k_two_rho();
    let field = Field::from_f64(dp.q())?;
    let (exact, u) = exact_r(rep, &field)?;
    let (v_inverse, v_res) = scalar_part(&field, &u, dp.pow_rational(exact.scale));
    if !(v_res <= SCALAR_TOL) {
        return Err(Error::NotScalar { residual: v_res, tol: SCALAR_TOL });
    }
    let rtr = r.adjoint() * &r;
    Ok(RMatrixRep {
        backend: rep.backend(),
        dp,
        dim: d,
        highest_weight: rep.highest_weight().clone(),
        casimir: rep.cartan().casimir_exponent(rep.highest_weight())?,
        rescale: rep.rescale().to_vec(),
        r,
        rtr,
        terms,
        k_two_rho: k2,
        exact,
        intertwiner_residual: intertwiner,
        v_inverse,
        v_inverse_residual: v_res,
        corrupted: false,
    })
}

/// Scalar value and relative off-scalar residual of the exact contraction
/// `q^scale · u_raw`. The residual is zero when `u_raw` is exactly scalar.
fn scalar_part(field: &Field, u: &[Vec<Elem>], scale: f64) -> (f64, f64) {
    let d = u.len();
    let s = field.to_f64(&u[0][0]) * scale;
    let exact_scalar =
        (0..d).all(|i| (0..d).all(|j| if i == j { u[i][j] == u[0][0] } else { u[i][j].is_zero() }));
    if exact_scalar {
        return (s, 0.0);
    }
    let dense = CMat::from_fn(d, d, |i, j| re(field.to_f64(&u[i][j]) * scale));
    let mean = dense.trace().re / d as f64;
    (mean, op_norm(&(&dense - identity(d) * re(mean))) / mean.abs().max(f64::MIN_POSITIVE))
}

/// `Σ B K_{2rho} A` from the floating-point terms. For `q < 1` and large
/// weights this sum cancels badly; the scalar stored on [`RMatrixRep`] comes
/// from the exact terms instead.
pub fn drinfeld_v_inverse(rm: &RMatrixRep) -> CMat {
    let d = rm.dim;
    let mut u = CMat::zeros(d, d);
    for t in &rm.terms {
        u += &t.b * &rm.k_two_rho * &t.a;
    }
    u
}

/// `R^T R`. For an uncorrupted R-matrix this equals `(P R P) R`.
pub fn build_rtr(rm: &RMatrixRep) -> CMat {
    rm.rtr.clone()
}

/// `‖R12 R13 R23 - R23 R13 R12‖ / ‖R‖³` on `V ⊗ V ⊗ V`.
pub fn yang_baxter_residual(rm: &RMatrixRep) -> f64 {
    let d = rm.dim;
    let i = identity(d);
    let r12 = kron(&rm.r, &i);
    let r23 = kron(&i, &rm.r);
    let p23 = kron(&i, &crate::linalg::flip(d));
    let r13 = &p23 * &r12 * &p23;
    let lhs = &r12 * &r13 * &r23;
    let rhs = &r23 * &r13 * &r12;
    op_norm(&(lhs - rhs)) / op_norm(&rm.r).powi(3).max(1.0)
}

#[derive(Clone, Debug)]
pub struct Component {
    pub highest_weight: Weight,
    pub dim: usize,
    /// `C(mu) - 2 C(lambda)`.
    pub exponent: Rational64,
    /// `q^exponent`.
    pub eigenvalue: f64,
    pub projector: CMat,
}

#[derive(Clone, Debug, Default)]
pub struct DecompositionResiduals {
    pub completeness: f64,
    pub idempotence: f64,
    pub orthogonality: f64,
    /// `max_i ‖M P_i - x_i P_i‖ / ‖M‖`.
    pub eigen: f64,
    pub hermiticity: f64,
    /// `max_i |tr P_i - dim V(mu_i)|`.
    pub trace: f64,
    pub exact_eigen_identity: bool,
}

impl DecompositionResiduals {
    pub fn within_tolerance(&self) -> bool {
        self.completeness <= PROJECTOR_TOL
            && self.idempotence <= PROJECTOR_TOL
            && self.orthogonality <= PROJECTOR_TOL
            && self.hermiticity <= PROJECTOR_TOL
            && self.trace <= 1e-8
            && self.eigen <= EIGEN_TOL
            && self.exact_eigen_identity
    }
}

#[derive(Clone, Debug)]
pub struct TensorSquareDecomposition {
    pub components: Vec<Component>,
    pub residuals: DecompositionResiduals,
    pub block_count: usize,
}

impl TensorSquareDecomposition {
    pub fn eigenvalues(&self) -> Vec<f64> {
        self.components.iter().map(|c| c.eigenvalue).collect()
    }
}

struct Predicted {
    highest_weight: Weight,
    dim: usize,
    exponent: Rational64,
}

fn predicted_components(rm: &RMatrixRep) -> Result<Vec<Predicted>> {
    let cd = crate::cartan::CartanData::new(rm.backend.algebra())?;
    let c_lambda = rm.casimir;
    let two = Rational64::from_integer(2);
    let mk = |w: Weight, dim: usize| -> Result<Predicted> {
        let exponent = cd.casimir_exponent(&w)? - two * c_lambda;
        Ok(Predicted { highest_weight: w, dim, exponent })
    };
    match rm.backend {
        Backend::Sl2Spin { n } => (0..=n)
            .map(|j| {
                let mu = 2 * n - 2 * j;
                mk(Weight::from_ints(&[mu as i64]), mu + 1)
            })
            .collect(),
        Backend::SlnFundamental { n } => {
            let r = n - 1;
            let sym = Rational64::from_integer(2) * &Weight::fundamental(r, 1);
            let alt = if r >= 2 { Weight::fundamental(r, 2) } else { Weight::zero(r) };
            Ok(vec![mk(sym, n * (n + 1) / 2)?, mk(alt, n * (n - 1) / 2)?])
        }
    }
}

/// Whether the component indexed `i` has a weight space containing `e_a ⊗ e_b`.
fn supports(backend: Backend, i: usize, a: usize, b: usize) -> bool {
    match backend {
        Backend::Sl2Spin { n } => {
            let mu = 2 * n - 2 * i;
            let w = (2 * n) as i64 - 2 * (a + b) as i64;
            w.unsigned_abs() as usize <= mu
        }
        Backend::SlnFundamental { .. } => i == 0 || a != b,
    }
}

/// Spectral decomposition of `R^T R` with residuals; fails if any check is
/// out of tolerance.
pub fn decompose_tensor_square(rm: &RMatrixRep) -> Result<TensorSquareDecomposition> {
    let dec = decompose_unchecked(rm)?;
    if !dec.residuals.within_tolerance() {
        return Err(Error::Decomposition(format!("{:?}", dec.residuals)));
    }
    Ok(dec)
}

/// As [`decompose_tensor_square`] but returns the residuals without judging them.
pub fn decompose_unchecked(rm: &RMatrixRep) -> Result<TensorSquareDecomposition> {
    let d = rm.dim;
    let size = d * d;
    let preds = predicted_components(rm)?;
    let dp = &rm.dp;
    let xs: Vec<f64> = preds.iter().map(|p| dp.pow_rational(p.exponent)).collect();
    {
        let mut sorted = xs.clone();
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for w in sorted.windows(2) {
            if (w[1] - w[0]).abs() <= DEGENERACY_TOL * w[1].abs() {
                return Err(Error::DegenerateSpectrum { a: w[0], b: w[1], tol: DEGENERACY_TOL });
            }
        }
    }
    let backend = rm.backend;
    let support_fns: Vec<Box<dyn Fn(usize) -> bool>> =
        (0..preds.len()).map(|i| Box::new(move |k: usize| supports(backend, i, k / d, k % d)) as _).collect();
    let mut specs = Vec::with_capacity(preds.len());
    for (p, f) in preds.iter().zip(&support_fns) {
        let t_exp = Rational64::from_integer(2) * (p.exponent - Rational64::from_integer(2) * rm.exact.scale);
        if !t_exp.is_integer() {
            return Err(Error::Numerical(format!("eigenvalue exponent {} is not in Q(sqrt q)", p.exponent)));
        }
        specs.push(ComponentSpec { t_exponent: t_exp.to_integer(), supports: f.as_ref() });
    }
    let exact = spectral_projectors(&rm.exact.field, &rm.exact.raw, d, &specs)?;
    let s = |k: usize| rm.rescale[k / d] * rm.rescale[k % d];
    let mut components = Vec::with_capacity(preds.len());
    for (i, p) in preds.into_iter().enumerate() {
        let raw = &exact.projectors[i];
        let proj = CMat::from_fn(size, size, |r, c| re(raw[r][c] * s(r) / s(c)));
        components.push(Component {
            highest_weight: p.highest_weight,
            dim: p.dim,
            exponent: p.exponent,
            eigenvalue: xs[i],
            projector: proj,
        });
    }
    let residuals = residuals(&rm.rtr, &components, exact.eigen_identity_exact);
    Ok(TensorSquareDecomposition { components, residuals, block_count: exact.block_count })
}

fn residuals(m: &CMat, comps: &[Component], exact_ok: bool) -> DecompositionResiduals {
    let n = m.nrows();
    let mut sum = CMat::zeros(n, n);
    let mut out = DecompositionResiduals { exact_eigen_identity: exact_ok, ..Default::default() };
    let m_norm = op_norm(m).max(f64::MIN_POSITIVE);
    for (i, c) in comps.iter().enumerate() {
        let p = &c.projector;
        sum += p;
        out.idempotence = out.idempotence.max(op_norm(&(p * p - p)));
        out.hermiticity = out.hermiticity.max(op_norm(&(p - p.adjoint())));
        out.eigen = out.eigen.max(op_norm(&(m * p - p * re(c.eigenvalue))) / m_norm);
        out.trace = out.trace.max((p.trace().re - c.dim as f64).abs());
        for other in &comps[i + 1..] {
            out.orthogonality = out.orthogonality.max(op_norm(&(p * &other.projector)));
        }
    }
    out.completeness = op_norm(&(sum - identity(n)));
    if !comps.iter().all(|c| crate::linalg::all_finite(&c.projector)) {
        out.completeness = f64::NAN;
    }
    for v in [&mut out.completeness, &mut out.idempotence, &mut out.orthogonality, &mut out.eigen] {
        if v.is_nan() {
            *v = f64::INFINITY;
        }
    }
    out
}

/// Exponent as f64, for display.
pub fn exponent_f64(c: &Component) -> f64 {
    rational_to_f64(c.exponent)
}
