//! Eigenvector and column diagnostics: Meyer-Wallach Q, inverse
//! participation ratio, Haar-random reference states, intensity samples,
//! power-law fits and histograms.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::linalg::{Representation, StateVector, C64, ZERO};

/// Largest `|‖ψ‖ - 1|` accepted by [`meyer_wallach_q`].
pub const NORM_TOL: f64 = 1e-8;

/// `Q = 2 - (2/n_q) Σ_k Tr ρ_k²`, each `ρ_k` divided by its trace so that
/// rounding in the norm does not leak into `Q`.
pub fn meyer_wallach_q(psi: &StateVector) -> Result<f64> {
    let n_q = psi.n_qubits()?;
    let deviation = (psi.norm() - 1.0).abs();
    if deviation > NORM_TOL {
        return Err(Error::NotNormalized { deviation });
    }
    if n_q == 0 {
        return Ok(0.0);
    }
    let amps = psi.amplitudes();
    let mut purity_sum = 0.0;
    for k in 0..n_q {
        let m = 1usize << k;
        let (mut a, mut b, mut c) = (0.0, 0.0, ZERO);
        for x in (0..amps.len()).filter(|x| x & m == 0) {
            let (u, v) = (amps[x], amps[x | m]);
            a += u.norm_sqr();
            b += v.norm_sqr();
            c += u * v.conj();
        }
        purity_sum += (a * a + b * b + 2.0 * c.norm_sqr()) / ((a + b) * (a + b));
    }
    Ok((2.0 - 2.0 * purity_sum / n_q as f64).max(0.0))
}

/// `ξ = (Σ|ψ_i|²)² / Σ|ψ_i|⁴`.
pub fn ipr(psi: &StateVector) -> Result<f64> {
    ipr_of(psi.amplitudes())
}

pub fn ipr_of(amps: &[C64]) -> Result<f64> {
    let (s2, s4) = amps.iter().fold((0.0, 0.0), |(s2, s4), a| {
        let p = a.norm_sqr();
        (s2 + p, s4 + p * p)
    });
    if s4 == 0.0 {
        return Err(Error::ZeroVector);
    }
    Ok(s2 * s2 / s4)
}

/// Normalized vector of independent standard complex Gaussians.
pub fn haar_state<R: Rng + ?Sized>(dim: usize, repr: Representation, rng: &mut R) -> Result<StateVector> {
    let amps: Vec<C64> = (0..dim)
        .map(|_| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
        .collect();
    StateVector::new(amps, repr).normalized()
}

/// Pooled `y = N|x|²` over a set of columns.
#[derive(Clone, Debug, PartialEq)]
pub struct IntensitySample {
    pub y: Vec<f64>,
    pub repr: Representation,
    /// `[lo, hi)` iterate window the columns came from.
    pub window: Option<(u64, u64)>,
}

impl IntensitySample {
    pub fn mean(&self) -> f64 {
        self.y.iter().sum::<f64>() / self.y.len() as f64
    }
}

pub fn column_intensities(columns: &[StateVector], repr: Representation) -> Result<IntensitySample> {
    let mut y = Vec::new();
    for col in columns {
        if col.repr() != repr {
            return Err(Error::RepresentationMismatch {
                expected: repr,
                found: col.repr(),
            });
        }
        let n = col.len() as f64;
        y.extend(col.amplitudes().iter().map(|a| n * a.norm_sqr()));
    }
    if y.is_empty() {
        return Err(Error::EmptySample);
    }
    Ok(IntensitySample { y, repr, window: None })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScalingPoint {
    pub dim: usize,
    pub mean_xi: f64,
    pub std_xi: f64,
    pub count: usize,
}

impl ScalingPoint {
    pub fn from_values(dim: usize, xi: &[f64]) -> Self {
        let (mean_xi, std_xi) = mean_std(xi);
        ScalingPoint {
            dim,
            mean_xi,
            std_xi,
            count: xi.len(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScalingSeries {
    pub points: Vec<ScalingPoint>,
    /// Least-squares slope of `log₂⟨ξ⟩` against `log₂ N`.
    pub gamma: f64,
    pub intercept: f64,
    /// Root-mean-square deviation of the fit in `log₂` units.
    pub residual: f64,
}

pub fn fit_power_law(points: &[ScalingPoint]) -> Result<ScalingSeries> {
    if points.len() < 3 {
        return Err(Error::TooFewPoints {
            needed: 3,
            got: points.len(),
        });
    }
    if points.windows(2).any(|w| w[1].dim <= w[0].dim) || points.iter().any(|p| !(p.mean_xi > 0.0)) {
        return Err(Error::InvalidParameter(
            "scaling points need increasing N and positive mean IPR".into(),
        ));
    }
    let xs: Vec<f64> = points.iter().map(|p| (p.dim as f64).log2()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.mean_xi.log2()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let gamma = sxy / sxx;
    let intercept = my - gamma * mx;
    let residual = (xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - intercept - gamma * x).powi(2))
        .sum::<f64>()
        / n)
        .sqrt();
    Ok(ScalingSeries {
        points: points.to_vec(),
        gamma,
        intercept,
        residual,
    })
}

/// Sample mean and standard deviation (`n - 1` denominator).
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// One histogram bin.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Bin {
    pub lo: f64,
    pub hi: f64,
    pub center: f64,
    pub density: f64,
}

fn histogram_with_edges(values: &[f64], edges: &[f64], center: impl Fn(f64, f64) -> f64) -> Vec<Bin> {
    let lo = edges[0];
    let hi = edges[edges.len() - 1];
    let mut counts = vec![0usize; edges.len() - 1];
    for &v in values {
        if v >= lo && v < hi {
            let k = edges.partition_point(|&e| e <= v) - 1;
            let last = counts.len() - 1;
            counts[k.min(last)] += 1;
        }
    }
    let total: usize = counts.iter().sum();
    edges
        .windows(2)
        .zip(&counts)
        .map(|(w, &c)| Bin {
            lo: w[0],
            hi: w[1],
            center: center(w[0], w[1]),
            density: if total == 0 {
                0.0
            } else {
                c as f64 / (total as f64 * (w[1] - w[0]))
            },
        })
        .collect()
}

/// Equal-width bins on `[lo, hi)`, densities normalized over in-range values.
pub fn histogram(values: &[f64], lo: f64, hi: f64, bins: usize) -> Vec<Bin> {
    let edges: Vec<f64> = (0..=bins).map(|k| lo + (hi - lo) * k as f64 / bins as f64).collect();
    histogram_with_edges(values, &edges, |a, b| (a + b) / 2.0)
}

/// Logarithmic bins on `[lo, hi)`, geometric centers, densities per unit `y`.
pub fn log_histogram(values: &[f64], lo: f64, hi: f64, bins: usize) -> Vec<Bin> {
    let (a, b) = (lo.ln(), hi.ln());
    let edges: Vec<f64> = (0..=bins)
        .map(|k| (a + (b - a) * k as f64 / bins as f64).exp())
        .collect();
    histogram_with_edges(values, &edges, |a, b| (a * b).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{simulate, Circuit, Gate};
    use crate::linalg::{dense_fourier, ComplexMatrix};
    use crate::rng::RngStream;
    use crate::spectral::ks_distance;
    use proptest::prelude::*;

    #[test]
    fn q_examples() {
        for x in [0usize, 5, 255] {
            let e = StateVector::basis(256, x, Representation::Position);
            assert_eq!(meyer_wallach_q(&e).unwrap(), 0.0);
        }
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let bell = StateVector::new(
            vec![C64::new(r, 0.0), ZERO, ZERO, C64::new(r, 0.0)],
            Representation::Position,
        );
        assert!((meyer_wallach_q(&bell).unwrap() - 1.0).abs() < 1e-15);
        let bad = StateVector::new(vec![C64::new(1.0, 0.0); 4], Representation::Position);
        assert!(matches!(meyer_wallach_q(&bad), Err(Error::NotNormalized { .. })));
    }

    #[test]
    fn q_invariant_under_local_phases() {
        let mut rng = RngStream::new(3, 0).rng();
        let psi = haar_state(64, Representation::Position, &mut rng).unwrap();
        let q0 = meyer_wallach_q(&psi).unwrap();
        let mut c = Circuit::new(6);
        for j in 0..6 {
            c.push(Gate::Phase1(j, 0.37 * (j + 1) as f64));
        }
        let q1 = meyer_wallach_q(&simulate(&c, &psi).unwrap()).unwrap();
        assert!((q0 - q1).abs() < 1e-12);
    }

    #[test]
    fn ipr_examples() {
        assert_eq!(ipr(&StateVector::basis(64, 3, Representation::Position)).unwrap(), 1.0);
        assert!((ipr(&StateVector::uniform(64, Representation::Position)).unwrap() - 64.0).abs() < 1e-10);
        assert!(matches!(ipr_of(&[ZERO; 4]), Err(Error::ZeroVector)));
    }

    proptest! {
        #[test]
        fn ipr_permutation_and_phase_invariant(
            re in proptest::collection::vec(-1.0f64..1.0, 8),
            im in proptest::collection::vec(-1.0f64..1.0, 8),
            phase in 0.0f64..6.0,
            shift in 0usize..8,
        ) {
            let amps: Vec<C64> = re.iter().zip(&im).map(|(a, b)| C64::new(*a, *b)).collect();
            prop_assume!(amps.iter().any(|a| a.norm() > 1e-3));
            let base = ipr_of(&amps).unwrap();
            let mut rotated = amps.clone();
            rotated.rotate_left(shift);
            prop_assert!((ipr_of(&rotated).unwrap() - base).abs() <= 1e-12 * base);
            let e = crate::linalg::cis(phase);
            let phased: Vec<C64> = amps.iter().map(|a| a * e).collect();
            prop_assert!((ipr_of(&phased).unwrap() - base).abs() <= 1e-12 * base);
        }
    }

    #[test]
    fn haar_state_statistics() {
        let mut rng = RngStream::new(8, 0).rng();
        let mut y = Vec::new();
        let mut xi = Vec::new();
        for _ in 0..1000 {
            let s = haar_state(256, Representation::Position, &mut rng).unwrap();
            assert!((s.norm() - 1.0).abs() < 1e-12);
            xi.push(ipr(&s).unwrap());
            if y.len() < 10_000 {
                y.extend(s.amplitudes().iter().map(|a| 256.0 * a.norm_sqr()));
            }
        }
        let ks = ks_distance(&y[..10_000], |v| 1.0 - (-v).exp()).unwrap();
        assert!(ks < 0.02, "{ks}");
        let (m, _) = mean_std(&xi);
        assert!((m / 128.0 - 1.0).abs() < 0.05, "{m}");
    }

    #[test]
    fn intensities_of_simple_unitaries() {
        let id = ComplexMatrix::identity(16, Representation::Position);
        let cols: Vec<StateVector> = (0..16).map(|k| id.column(k)).collect();
        let s = column_intensities(&cols, Representation::Position).unwrap();
        assert!(s.y.iter().all(|&y| y == 0.0 || y == 16.0));
        assert!((s.mean() - 1.0).abs() < 1e-12);
        let w = dense_fourier(16);
        let cols: Vec<StateVector> = (0..16).map(|k| w.column(k)).collect();
        let s = column_intensities(&cols, Representation::Momentum).unwrap();
        assert!(s.y.iter().all(|&y| (y - 1.0).abs() < 1e-12));
        assert!(column_intensities(&cols, Representation::Position).is_err());
    }

    #[test]
    fn power_law_fits() {
        let exact: Vec<ScalingPoint> = (6..=10)
            .map(|k| ScalingPoint::from_values(1 << k, &[(1u64 << k) as f64]))
            .collect();
        let s = fit_power_law(&exact).unwrap();
        assert!((s.gamma - 1.0).abs() < 1e-12 && s.residual < 1e-12);
        let root: Vec<ScalingPoint> = (6..=10)
            .map(|k| ScalingPoint::from_values(1 << k, &[((1u64 << k) as f64).sqrt()]))
            .collect();
        assert!((fit_power_law(&root).unwrap().gamma - 0.5).abs() < 1e-12);
        assert!(matches!(fit_power_law(&exact[..2]), Err(Error::TooFewPoints { .. })));
    }

    #[test]
    fn histograms_integrate_to_one() {
        let v: Vec<f64> = (1..1000).map(|k| k as f64 / 100.0).collect();
        for bins in [histogram(&v, 0.0, 5.0, 20), log_histogram(&v, 1e-4, 1e2, 60)] {
            let area: f64 = bins.iter().map(|b| b.density * (b.hi - b.lo)).sum();
            assert!((area - 1.0).abs() < 1e-12);
        }
    }
}
