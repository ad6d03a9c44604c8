//! Map parameters: the kick strength α, the map variant and the complete
//! recipe ([`MapSpec`]) for one unitary.
//!
//! Rational α is kept as a reduced fraction so that the semi-Poisson
//! conjecture `aN ≡ ±1 (mod b)` is decided with integer arithmetic.

use std::fmt;
use std::str::FromStr;

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// Golden mean `(1 + √5) / 2`, the standard "irrational" kick.
pub const GOLDEN_MEAN: f64 = 1.618_033_988_749_895;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Alpha {
    /// `num / den`, reduced, `den ≥ 1`.
    Rational { num: u64, den: u64 },
    /// A value declared irrational by the caller.
    Real(f64),
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

impl Alpha {
    pub fn rational(num: u64, den: u64) -> Result<Self> {
        if den == 0 {
            return Err(Error::InvalidParameter("alpha denominator is zero".into()));
        }
        let g = gcd(num, den).max(1);
        Ok(Alpha::Rational {
            num: num / g,
            den: den / g,
        })
    }

    pub fn real(value: f64) -> Result<Self> {
        if !value.is_finite() {
            return Err(Error::InvalidParameter(format!("alpha = {value}")));
        }
        Ok(Alpha::Real(value))
    }

    pub fn golden() -> Self {
        Alpha::Real(GOLDEN_MEAN)
    }

    /// Fractional part of α in `[0, 1)`. Only this part enters any operator.
    pub fn value(&self) -> f64 {
        match *self {
            Alpha::Rational { num, den } => (num % den) as f64 / den as f64,
            Alpha::Real(x) => {
                let f = x - x.floor();
                if f >= 1.0 {
                    0.0
                } else {
                    f
                }
            }
        }
    }

    /// `1 - α`, reduced mod 1.
    pub fn complement(&self) -> Self {
        match *self {
            Alpha::Rational { num, den } => {
                let r = num % den;
                // (den - r) / den, with 0 mapping to 0
                Alpha::rational((den - r) % den, den).expect("den > 0")
            }
            Alpha::Real(_) => Alpha::Real(1.0 - self.value()),
        }
    }

    /// Fractional part of `α·k` for integer `k`, exact for rational α.
    pub fn frac_times(&self, k: u64) -> f64 {
        match *self {
            Alpha::Rational { num, den } => {
                let r = ((num % den) as u128 * k as u128 % den as u128) as f64;
                r / den as f64
            }
            Alpha::Real(_) => {
                let x = self.value() * k as f64;
                x - x.floor()
            }
        }
    }

    pub fn as_rational(&self) -> Option<(u64, u64)> {
        match *self {
            Alpha::Rational { num, den } => Some((num, den)),
            Alpha::Real(_) => None,
        }
    }
}

impl fmt::Display for Alpha {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Alpha::Rational { num, den } => write!(f, "{num}/{den}"),
            Alpha::Real(x) => write!(f, "{x}"),
        }
    }
}

impl FromStr for Alpha {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("golden") {
            return Ok(Alpha::golden());
        }
        if let Some((a, b)) = s.split_once('/') {
            let num = a
                .trim()
                .parse::<u64>()
                .map_err(|e| Error::InvalidParameter(format!("alpha numerator {a:?}: {e}")))?;
            let den = b
                .trim()
                .parse::<u64>()
                .map_err(|e| Error::InvalidParameter(format!("alpha denominator {b:?}: {e}")))?;
            return Alpha::rational(num, den);
        }
        let x = s
            .parse::<f64>()
            .map_err(|e| Error::InvalidParameter(format!("alpha {s:?}: {e}")))?;
        Alpha::real(x)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Variant {
    Deterministic,
    IsrmNonSymmetric,
    IsrmSymmetric,
}

impl Variant {
    pub fn is_isrm(self) -> bool {
        !matches!(self, Variant::Deterministic)
    }

    pub fn code(self) -> u8 {
        match self {
            Variant::Deterministic => 0,
            Variant::IsrmNonSymmetric => 1,
            Variant::IsrmSymmetric => 2,
        }
    }

    pub fn from_code(code: u8) -> Option<Self> {
        match code {
            0 => Some(Variant::Deterministic),
            1 => Some(Variant::IsrmNonSymmetric),
            2 => Some(Variant::IsrmSymmetric),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Variant::Deterministic => "det",
            Variant::IsrmNonSymmetric => "isrm-nonsym",
            Variant::IsrmSymmetric => "isrm-sym",
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "det" | "deterministic" => Ok(Variant::Deterministic),
            "isrm-nonsym" | "isrm_nonsymmetric" | "nonsym" => Ok(Variant::IsrmNonSymmetric),
            "isrm-sym" | "isrm_symmetric" | "sym" => Ok(Variant::IsrmSymmetric),
            other => Err(Error::InvalidParameter(format!("unknown variant {other:?}"))),
        }
    }
}

/// Distribution of the random diagonal phases of an ISRM realization.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub enum PhaseModel {
    /// Independent `U[0, 2π)`.
    #[default]
    Uniform,
    /// Independent `N(0, σ²)`.
    Gaussian { sigma: f64 },
    /// Phases produced by the economical randomization circuit with `n_s`
    /// CNOT-sandwiched rotations. Correlated across basis states.
    Circuit { n_s: usize },
}

impl fmt::Display for PhaseModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PhaseModel::Uniform => f.write_str("uniform"),
            PhaseModel::Gaussian { sigma } => write!(f, "gaussian({sigma})"),
            PhaseModel::Circuit { n_s } => write!(f, "circuit({n_s})"),
        }
    }
}

/// Everything needed to reproduce one unitary.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MapSpec {
    pub n_qubits: u32,
    pub alpha: Alpha,
    pub variant: Variant,
    /// Ignored for the deterministic variant.
    pub phase_model: PhaseModel,
    /// Ignored for the deterministic variant.
    pub seed: u64,
}

/// Largest register for which a dense `N × N` matrix is ever built.
pub const DEFAULT_DENSE_CAP: u32 = 12;

/// Largest register accepted at all (statevector operations only).
pub const MAX_QUBITS: u32 = 30;

impl MapSpec {
    pub fn deterministic(n_qubits: u32, alpha: Alpha) -> Result<Self> {
        Self::new(n_qubits, alpha, Variant::Deterministic, PhaseModel::Uniform, 0)
    }

    pub fn new(n_qubits: u32, alpha: Alpha, variant: Variant, phase_model: PhaseModel, seed: u64) -> Result<Self> {
        if n_qubits == 0 || n_qubits > MAX_QUBITS {
            return Err(Error::InvalidParameter(format!(
                "n_qubits = {n_qubits} outside 1..={MAX_QUBITS}"
            )));
        }
        if let PhaseModel::Gaussian { sigma } = phase_model {
            if !(sigma.is_finite() && sigma >= 0.0) {
                return Err(Error::InvalidParameter(format!("sigma = {sigma}")));
            }
        }
        if variant == Variant::IsrmSymmetric {
            if let PhaseModel::Circuit { .. } = phase_model {
                return Err(Error::InvalidParameter(
                    "the randomization circuit cannot produce symmetric phases".into(),
                ));
            }
        }
        Ok(MapSpec {
            n_qubits,
            alpha,
            variant,
            phase_model,
            seed,
        })
    }

    /// Hilbert-space dimension `N = 2^n_q`.
    pub fn dim(&self) -> usize {
        1usize << self.n_qubits
    }

    pub fn with_alpha(mut self, alpha: Alpha) -> Self {
        self.alpha = alpha;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    /// Byte string that identifies the spec. Deterministic specs drop the
    /// phase model and seed so equal operators hash equally.
    pub fn canonical_encoding(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(48);
        out.extend_from_slice(b"mapspec/1");
        out.push(self.n_qubits as u8);
        out.push(self.variant.code());
        match self.alpha {
            Alpha::Rational { num, den } => {
                out.push(0);
                out.extend_from_slice(&num.to_le_bytes());
                out.extend_from_slice(&den.to_le_bytes());
            }
            Alpha::Real(x) => {
                out.push(1);
                out.extend_from_slice(&x.to_le_bytes());
            }
        }
        if self.variant.is_isrm() {
            match self.phase_model {
                PhaseModel::Uniform => out.push(0),
                PhaseModel::Gaussian { sigma } => {
                    out.push(1);
                    out.extend_from_slice(&sigma.to_le_bytes());
                }
                PhaseModel::Circuit { n_s } => {
                    out.push(2);
                    out.extend_from_slice(&(n_s as u64).to_le_bytes());
                }
            }
            out.extend_from_slice(&self.seed.to_le_bytes());
        }
        out
    }

    /// First 16 hex digits of the SHA-256 of [`canonical_encoding`](Self::canonical_encoding).
    pub fn hash_hex(&self) -> String {
        let digest = Sha256::digest(self.canonical_encoding());
        digest[..8].iter().map(|b| format!("{b:02x}")).collect()
    }
}

/// Semi-Poisson exponent predicted for the spacing distribution, if any.
///
/// Rational α = a/b with `aN ≡ ±1 (mod b)`: `β = b/2 - 1` for the
/// deterministic map and the symmetric ISRM, `β = b - 1` for the
/// non-symmetric ISRM. Anything else (irrational α, `b < 2`, condition
/// violated) has no prediction.
pub fn predicted_beta(alpha: &Alpha, dim: usize, variant: Variant) -> Option<f64> {
    let (a, b) = alpha.as_rational()?;
    if !satisfies_conjecture(a, b, dim) {
        return None;
    }
    let b = b as f64;
    Some(match variant {
        Variant::Deterministic | Variant::IsrmSymmetric => b / 2.0 - 1.0,
        Variant::IsrmNonSymmetric => b - 1.0,
    })
}

/// `aN ≡ ±1 (mod b)` with `b ≥ 2`.
pub fn satisfies_conjecture(a: u64, b: u64, dim: usize) -> bool {
    if b < 2 {
        return false;
    }
    let r = (a as u128 * dim as u128 % b as u128) as u64;
    r == 1 || r == b - 1
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn alpha_values() {
        let third = Alpha::rational(1, 3).unwrap();
        assert!((third.value() - 1.0 / 3.0).abs() < 1e-16);
        let g = Alpha::real(1.618_033_988_7).unwrap();
        assert!((g.value() - 0.618_033_988_7).abs() < 1e-12);
        let four_thirds = Alpha::rational(4, 3).unwrap();
        assert_eq!(four_thirds.value(), 1.0 / 3.0);
        assert_eq!(Alpha::rational(2, 6).unwrap(), third);
    }

    #[test]
    fn alpha_parse() {
        assert_eq!("1/3".parse::<Alpha>().unwrap(), Alpha::rational(1, 3).unwrap());
        assert_eq!("golden".parse::<Alpha>().unwrap(), Alpha::golden());
        assert_eq!("0.25".parse::<Alpha>().unwrap(), Alpha::Real(0.25));
        assert!("1/0".parse::<Alpha>().is_err());
        assert!("x".parse::<Alpha>().is_err());
    }

    #[test]
    fn complement_is_exact_for_rationals() {
        let a = Alpha::rational(1, 5).unwrap();
        assert_eq!(a.complement(), Alpha::rational(4, 5).unwrap());
        assert_eq!(Alpha::rational(0, 1).unwrap().complement().value(), 0.0);
    }

    #[test]
    fn frac_times_exact() {
        let a = Alpha::rational(1, 3).unwrap();
        assert_eq!(a.frac_times(3_000_000_001), 1.0 / 3.0);
    }

    #[test]
    fn beta_examples() {
        let third = Alpha::rational(1, 3).unwrap();
        assert_eq!(predicted_beta(&third, 4096, Variant::Deterministic), Some(0.5));
        assert_eq!(predicted_beta(&third, 512, Variant::IsrmNonSymmetric), Some(2.0));
        assert_eq!(predicted_beta(&third, 512, Variant::IsrmSymmetric), Some(0.5));
        let fifth = Alpha::rational(1, 5).unwrap();
        // 2^n mod 5 cycles through {2, 4, 3, 1}
        assert_eq!(predicted_beta(&fifth, 512, Variant::Deterministic), None);
        assert_eq!(predicted_beta(&fifth, 1024, Variant::Deterministic), Some(1.5));
        assert_eq!(predicted_beta(&Alpha::golden(), 1024, Variant::Deterministic), None);
    }

    #[test]
    fn hash_ignores_seed_for_deterministic() {
        let a = MapSpec::deterministic(5, Alpha::rational(1, 3).unwrap()).unwrap();
        assert_eq!(a.hash_hex(), a.with_seed(99).hash_hex());
        let b = MapSpec::new(
            5,
            Alpha::rational(1, 3).unwrap(),
            Variant::IsrmNonSymmetric,
            PhaseModel::Uniform,
            1,
        )
        .unwrap();
        assert_ne!(b.hash_hex(), b.with_seed(2).hash_hex());
    }

    proptest::proptest! {
        #[test]
        fn beta_symmetric_under_complement(a in 1u64..50, b in 2u64..50, k in 1u32..16) {
            let alpha = Alpha::rational(a, b).unwrap();
            let dim = 1usize << k;
            for v in [Variant::Deterministic, Variant::IsrmNonSymmetric, Variant::IsrmSymmetric] {
                proptest::prop_assert_eq!(
                    predicted_beta(&alpha, dim, v),
                    predicted_beta(&alpha.complement(), dim, v)
                );
            }
        }
    }
}
