use qdisp_core::dispersion::StateVector;
use qdisp_core::linalg::{CVec, C64};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Parsed `--state` argument.
#[derive(Clone, Debug, PartialEq)]
pub enum StateSpec {
    Highest,
    Lowest,
    Random,
    Amplitudes(Vec<C64>),
}

impl StateSpec {
    pub fn parse(s: &str) -> Result<Self, String> {
        match s.trim() {
            "highest" => Ok(Self::Highest),
            "lowest" => Ok(Self::Lowest),
            "random" => Ok(Self::Random),
            list => list.split(',').map(parse_complex).collect::<Result<Vec<_>, _>>().map(Self::Amplitudes),
        }
    }

    /// Builds the normalized state and reports the norm that was divided out.
    pub fn build(&self, dim: usize, seed: u64) -> Result<(StateVector, f64), String> {
        match self {
            Self::Highest => Ok((StateVector::basis(dim, 0), 1.0)),
            Self::Lowest => Ok((StateVector::basis(dim, dim - 1), 1.0)),
            Self::Random => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                Ok((StateVector::random(dim, &mut rng), 1.0))
            }
            Self::Amplitudes(a) => {
                if a.len() != dim {
                    return Err(format!("state has {} amplitudes, representation has dimension {dim}", a.len()));
                }
                StateVector::normalized(CVec::from_vec(a.clone())).map_err(|e| e.to_string())
            }
        }
    }
}

fn parse_real(s: &str, token: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|_| format!("cannot parse amplitude `{token}`"))?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(format!("amplitude `{token}` is not finite"))
    }
}

/// Accepts `re`, `imj`, `re+imj` and `re-imj`.
pub fn parse_complex(token: &str) -> Result<C64, String> {
    let t = token.trim();
    if t.is_empty() {
        return Err("empty amplitude".into());
    }
    let Some(body) = t.strip_suffix('j') else {
        return Ok(C64::new(parse_real(t, token)?, 0.0));
    };
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&i| (bytes[i] == b'+' || bytes[i] == b'-') && !matches!(bytes[i - 1], b'e' | b'E'));
    let (re, im) = match split {
        Some(i) => (&body[..i], &body[i..]),
        None => ("", body),
    };
    let im = match im {
        "" | "+" => 1.0,
        "-" => -1.0,
        s => parse_real(s, token)?,
    };
    let re = if re.is_empty() { 0.0 } else { parse_real(re, token)? };
    Ok(C64::new(re, im))
}
