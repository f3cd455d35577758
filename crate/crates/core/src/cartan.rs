//! Deformation parameter, weights and the invariant form for sl_2 and sl_n.

use std::fmt;
use std::ops::{Add, Mul, Sub};

use num_rational::Rational64;
use num_traits::{ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Smallest admissible `|eta|` in quantum mode.
pub const ETA_MIN: f64 = 1e-9;

/// `q = exp(eta)`, or the classical point `q = 1` when constructed explicitly.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DeformationParameter {
    eta: f64,
    q: f64,
    classical: bool,
}

impl DeformationParameter {
    pub fn from_eta(eta: f64) -> Result<Self> {
        if !eta.is_finite() {
            return Err(Error::InvalidDeformation(format!("eta = {eta} is not finite")));
        }
        if eta.abs() < ETA_MIN {
            return Err(Error::NearClassical { eta: eta.abs(), min: ETA_MIN });
        }
        Ok(Self { eta, q: eta.exp(), classical: false })
    }

    pub fn from_q(q: f64) -> Result<Self> {
        if !(q.is_finite() && q > 0.0) {
            return Err(Error::InvalidDeformation(format!("q = {q} must be positive and finite")));
        }
        let eta = q.ln();
        if eta.abs() < ETA_MIN {
            return Err(Error::NearClassical { eta: eta.abs(), min: ETA_MIN });
        }
        Ok(Self { eta, q, classical: false })
    }

    /// The undeformed point. Only the classical layer accepts it.
    pub fn classical() -> Self {
        Self { eta: 0.0, q: 1.0, classical: true }
    }

    pub fn is_classical(&self) -> bool {
        self.classical
    }

    pub fn require_quantum(&self) -> Result<()> {
        if self.classical {
            Err(Error::ClassicalMode)
        } else {
            Ok(())
        }
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    /// `q^x`; integer powers are taken directly, others as `exp(eta x)`.
    pub fn pow(&self, x: f64) -> f64 {
        if x.fract() == 0.0 && x.abs() <= 1024.0 {
            self.q.powi(x as i32)
        } else {
            (self.eta * x).exp()
        }
    }

    pub fn pow_rational(&self, x: Rational64) -> f64 {
        if x.is_integer() && x.to_integer().abs() <= 1024 {
            self.q.powi(x.to_integer() as i32)
        } else {
            self.pow(rational_to_f64(x))
        }
    }

    /// `q - q^{-1}`.
    pub fn q_minus_qinv(&self) -> f64 {
        2.0 * self.eta.sinh()
    }
}

/// `[m]_q = (q^m - q^{-m}) / (q - q^{-1})`, evaluated as `sinh(m eta)/sinh(eta)`.
pub fn q_number(m: f64, dp: &DeformationParameter) -> Result<f64> {
    dp.require_quantum()?;
    Ok((m * dp.eta()).sinh() / dp.eta().sinh())
}

/// `[m]_q!`.
pub fn q_factorial(m: usize, dp: &DeformationParameter) -> Result<f64> {
    let mut acc = 1.0;
    for k in 1..=m {
        acc *= q_number(k as f64, dp)?;
    }
    Ok(acc)
}

pub fn rational_to_f64(x: Rational64) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

/// Weight expressed in the fundamental-weight basis.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Weight {
    coords: Vec<Rational64>,
}

impl Weight {
    pub fn new(coords: Vec<Rational64>) -> Self {
        Self { coords }
    }

    pub fn from_ints(coords: &[i64]) -> Self {
        Self { coords: coords.iter().map(|&c| Rational64::from_integer(c)).collect() }
    }

    pub fn zero(rank: usize) -> Self {
        Self { coords: vec![Rational64::zero(); rank] }
    }

    /// `omega_i`, with `i` counted from 1.
    pub fn fundamental(rank: usize, i: usize) -> Self {
        let mut w = Self::zero(rank);
        w.coords[i - 1] = Rational64::from_integer(1);
        w
    }

    pub fn coords(&self) -> &[Rational64] {
        &self.coords
    }

    pub fn rank(&self) -> usize {
        self.coords.len()
    }

    pub fn is_dominant(&self) -> bool {
        self.coords.iter().all(|c| c.is_integer() && *c >= Rational64::zero())
    }
}

impl fmt::Display for Weight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.coords.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

impl Add for &Weight {
    type Output = Weight;
    fn add(self, rhs: &Weight) -> Weight {
        Weight { coords: self.coords.iter().zip(&rhs.coords).map(|(a, b)| a + b).collect() }
    }
}

impl Sub for &Weight {
    type Output = Weight;
    fn sub(self, rhs: &Weight) -> Weight {
        Weight { coords: self.coords.iter().zip(&rhs.coords).map(|(a, b)| a - b).collect() }
    }
}

impl Mul<&Weight> for Rational64 {
    type Output = Weight;
    fn mul(self, rhs: &Weight) -> Weight {
        Weight { coords: rhs.coords.iter().map(|c| self * c).collect() }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Algebra {
    Sl2,
    /// `sl_n`, carrying `n` (rank `n - 1`).
    Sln(usize),
}

impl Algebra {
    pub fn n(&self) -> usize {
        match self {
            Algebra::Sl2 => 2,
            Algebra::Sln(n) => *n,
        }
    }

    pub fn tag(&self) -> &'static str {
        match self {
            Algebra::Sl2 => "sl2",
            Algebra::Sln(_) => "sln",
        }
    }
}

/// Cartan matrix and the invariant form `(omega_i, omega_j)` normalised so
/// that long roots have square length 2.
#[derive(Clone, Debug)]
pub struct CartanData {
    algebra: Algebra,
    cartan: Vec<Vec<i64>>,
    gram: Vec<Vec<Rational64>>,
}

impl CartanData {
    pub fn new(algebra: Algebra) -> Result<Self> {
        let n = algebra.n();
        if n < 2 {
            return Err(Error::InvalidParameter(format!("sl_n requires n >= 2, got {n}")));
        }
        let r = n - 1;
        let cartan = (0..r)
            .map(|i| {
                (0..r)
                    .map(|j| match i.abs_diff(j) {
                        0 => 2,
                        1 => -1,
                        _ => 0,
                    })
                    .collect()
            })
            .collect();
        let nn = n as i64;
        let gram = (1..=r as i64)
            .map(|i| {
                (1..=r as i64)
                    .map(|j| Rational64::from_integer(i.min(j)) - Rational64::new(i * j, nn))
                    .collect()
            })
            .collect();
        Ok(Self { algebra, cartan, gram })
    }

    pub fn sl2() -> Self {
        Self::new(Algebra::Sl2).expect("sl2 is valid")
    }

    pub fn algebra(&self) -> Algebra {
        self.algebra
    }

    pub fn rank(&self) -> usize {
        self.cartan.len()
    }

    pub fn cartan_matrix(&self) -> &[Vec<i64>] {
        &self.cartan
    }

    /// Simple root `alpha_i` (from 1) in the fundamental-weight basis.
    pub fn simple_root(&self, i: usize) -> Weight {
        Weight::from_ints(&self.cartan[i - 1])
    }

    pub fn rho(&self) -> Weight {
        Weight::from_ints(&vec![1; self.rank()])
    }

    pub fn inner(&self, a: &Weight, b: &Weight) -> Rational64 {
        let mut acc = Rational64::zero();
        for (i, ai) in a.coords().iter().enumerate() {
            if ai.is_zero() {
                continue;
            }
            for (j, bj) in b.coords().iter().enumerate() {
                acc += ai * bj * self.gram[i][j];
            }
        }
        acc
    }

    fn check_weight(&self, w: &Weight) -> Result<()> {
        if w.rank() != self.rank() {
            return Err(Error::DimensionMismatch { expected: self.rank(), got: w.rank() });
        }
        Ok(())
    }

    /// `(lambda + 2 rho, lambda)`.
    pub fn casimir_exponent(&self, lambda: &Weight) -> Result<Rational64> {
        self.check_weight(lambda)?;
        if !lambda.is_dominant() {
            return Err(Error::NotDominant(lambda.to_string()));
        }
        let two_rho = Rational64::from_integer(2) * &self.rho();
        Ok(self.inner(&(lambda + &two_rho), lambda))
    }
}

/// `[q^{2(lambda+2rho,lambda)} - q^{2(lambda,lambda)}] / (q - q^{-1})`.
///
/// Evaluated as `e^{(C+L)eta} sinh((C-L)eta) / sinh(eta)`, which has no
/// cancellation near `q = 1`.
pub fn min_delta_formula(lambda: &Weight, dp: &DeformationParameter, cd: &CartanData) -> Result<f64> {
    dp.require_quantum()?;
    let c = rational_to_f64(cd.casimir_exponent(lambda)?);
    let l = rational_to_f64(cd.inner(lambda, lambda));
    let eta = dp.eta();
    Ok(((c + l) * eta).exp() * ((c - l) * eta).sinh() / eta.sinh())
}
