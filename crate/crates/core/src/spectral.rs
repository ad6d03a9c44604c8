//! Eigenphases, unfolded spacings, reference spacing laws, goodness of fit,
//! trace series and number variance.

use std::f64::consts::{PI, TAU};
use std::fmt;

use statrs::function::erf::erf;
use statrs::function::gamma::{gamma_lr, ln_gamma};

use crate::eigen;
use crate::error::{Error, Result};
use crate::linalg::{cis, ComplexMatrix, C64, ZERO};
use crate::params::MapSpec;

/// Spacings below this are reported as degenerate.
pub const DEGENERATE_SPACING: f64 = 1e-12;

/// Which part of a symmetric spectrum an eigensystem describes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Block {
    Full,
    Even,
    Odd,
}

impl Block {
    pub fn name(self) -> &'static str {
        match self {
            Block::Full => "full",
            Block::Even => "even",
            Block::Odd => "odd",
        }
    }
}

impl fmt::Display for Block {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SpectrumSource {
    pub spec: MapSpec,
    pub block: Block,
}

#[derive(Clone, Debug)]
pub struct EigenSystem {
    /// Sorted, in `[0, 2π)`.
    pub phases: Vec<f64>,
    /// Columns are eigenvectors in the order of `phases`.
    pub vectors: Option<ComplexMatrix>,
    pub max_residual: f64,
    pub source: Option<SpectrumSource>,
}

impl EigenSystem {
    pub fn dim(&self) -> usize {
        self.phases.len()
    }

    pub fn vectors(&self) -> Result<&ComplexMatrix> {
        self.vectors
            .as_ref()
            .ok_or_else(|| Error::InvalidParameter("eigensystem was computed without eigenvectors".into()))
    }

    pub fn with_source(mut self, spec: MapSpec, block: Block) -> Self {
        self.source = Some(SpectrumSource { spec, block });
        self
    }

    /// `e^{inθ}` with the angle reduced before exponentiation.
    pub fn power_phase(&self, theta: f64, n: u64) -> C64 {
        cis((n as f64 * theta).rem_euclid(TAU))
    }
}

/// Full eigen-decomposition of a unitary.
pub fn eigensystem(u: &ComplexMatrix) -> Result<EigenSystem> {
    let d = eigen::decompose(u, true)?;
    let vectors = match d.vectors {
        Some(v) => Some(ComplexMatrix::from_mat(v, u.repr())?),
        None => None,
    };
    Ok(EigenSystem {
        phases: d.phases,
        vectors,
        max_residual: d.max_residual,
        source: None,
    })
}

/// Sorted eigenphases only.
pub fn eigenphases(u: &ComplexMatrix) -> Result<Vec<f64>> {
    Ok(eigen::decompose(u, false)?.phases)
}

#[derive(Clone, Debug, PartialEq)]
pub struct SpacingSample {
    pub s: Vec<f64>,
    /// Spacings below [`DEGENERATE_SPACING`], kept as (near) zeros.
    pub degenerate: usize,
    pub desymmetrized: bool,
    pub source: Option<SpectrumSource>,
}

impl SpacingSample {
    pub fn len(&self) -> usize {
        self.s.len()
    }

    pub fn is_empty(&self) -> bool {
        self.s.is_empty()
    }

    pub fn mean(&self) -> f64 {
        self.s.iter().sum::<f64>() / self.s.len() as f64
    }

    /// Concatenate samples (pooling across spectra).
    pub fn pooled<'a>(samples: impl IntoIterator<Item = &'a SpacingSample>) -> SpacingSample {
        let mut out = SpacingSample {
            s: Vec::new(),
            degenerate: 0,
            desymmetrized: true,
            source: None,
        };
        for x in samples {
            out.s.extend_from_slice(&x.s);
            out.degenerate += x.degenerate;
            out.desymmetrized &= x.desymmetrized;
        }
        out
    }
}

/// Nearest-neighbour spacings on the circle, `s_k = N (θ_{k+1} - θ_k) / 2π`
/// with the wraparound spacing last.
pub fn unfold_spacings(phases: &[f64]) -> Result<SpacingSample> {
    let n = phases.len();
    if n == 0 {
        return Err(Error::EmptySample);
    }
    if phases.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::InvalidParameter("phases must be sorted".into()));
    }
    let scale = n as f64 / TAU;
    let mut s: Vec<f64> = phases.windows(2).map(|w| (w[1] - w[0]) * scale).collect();
    s.push((phases[0] + TAU - phases[n - 1]) * scale);
    let degenerate = s.iter().filter(|&&x| x < DEGENERATE_SPACING).count();
    if degenerate > 0 {
        log::warn!("{degenerate} degenerate spacings");
    }
    Ok(SpacingSample {
        s,
        degenerate,
        desymmetrized: false,
        source: None,
    })
}

/// `ln A` with `A = (β+1)^{β+1} / Γ(β+1)`.
fn semi_poisson_ln_norm(beta: f64) -> f64 {
    (beta + 1.0) * (beta + 1.0).ln() - ln_gamma(beta + 1.0)
}

/// `A s^β e^{-(β+1)s}`, unit area and unit mean.
pub fn semi_poisson_pdf(beta: f64, s: f64) -> f64 {
    if s < 0.0 {
        return 0.0;
    }
    if s == 0.0 {
        return if beta == 0.0 { 1.0 } else { 0.0 };
    }
    (semi_poisson_ln_norm(beta) + beta * s.ln() - (beta + 1.0) * s).exp()
}

pub fn semi_poisson_cdf(beta: f64, s: f64) -> f64 {
    if s <= 0.0 {
        return 0.0;
    }
    gamma_lr(beta + 1.0, (beta + 1.0) * s)
}

pub fn poisson_pdf(s: f64) -> f64 {
    if s < 0.0 {
        0.0
    } else {
        (-s).exp()
    }
}

pub fn poisson_cdf(s: f64) -> f64 {
    if s <= 0.0 {
        0.0
    } else {
        -(-s).exp_m1()
    }
}

/// Orthogonal-class Wigner surmise `(π/2) s e^{-πs²/4}`.
pub fn wigner_coe_pdf(s: f64) -> f64 {
    if s < 0.0 {
        0.0
    } else {
        PI / 2.0 * s * (-PI * s * s / 4.0).exp()
    }
}

pub fn wigner_coe_cdf(s: f64) -> f64 {
    if s <= 0.0 {
        0.0
    } else {
        -(-PI * s * s / 4.0).exp_m1()
    }
}

/// Unitary-class Wigner surmise `(32/π²) s² e^{-4s²/π}`.
pub fn wigner_cue_pdf(s: f64) -> f64 {
    if s < 0.0 {
        0.0
    } else {
        32.0 / (PI * PI) * s * s * (-4.0 * s * s / PI).exp()
    }
}

pub fn wigner_cue_cdf(s: f64) -> f64 {
    if s <= 0.0 {
        0.0
    } else {
        erf(2.0 * s / PI.sqrt()) - 4.0 * s / PI * (-4.0 * s * s / PI).exp()
    }
}

/// A reference spacing law.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SpacingLaw {
    SemiPoisson(f64),
    Poisson,
    Coe,
    Cue,
}

impl SpacingLaw {
    pub fn pdf(&self, s: f64) -> f64 {
        match *self {
            SpacingLaw::SemiPoisson(b) => semi_poisson_pdf(b, s),
            SpacingLaw::Poisson => poisson_pdf(s),
            SpacingLaw::Coe => wigner_coe_pdf(s),
            SpacingLaw::Cue => wigner_cue_pdf(s),
        }
    }

    pub fn cdf(&self, s: f64) -> f64 {
        match *self {
            SpacingLaw::SemiPoisson(b) => semi_poisson_cdf(b, s),
            SpacingLaw::Poisson => poisson_cdf(s),
            SpacingLaw::Coe => wigner_coe_cdf(s),
            SpacingLaw::Cue => wigner_cue_cdf(s),
        }
    }
}

impl fmt::Display for SpacingLaw {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SpacingLaw::SemiPoisson(b) => write!(f, "semi-Poisson(beta={b})"),
            SpacingLaw::Poisson => f.write_str("Poisson"),
            SpacingLaw::Coe => f.write_str("COE"),
            SpacingLaw::Cue => f.write_str("CUE"),
        }
    }
}

/// Kolmogorov-Smirnov distance `sup |F_n(s) - F(s)|`.
pub fn ks_distance(sample: &[f64], cdf: impl Fn(f64) -> f64) -> Result<f64> {
    if sample.is_empty() {
        return Err(Error::EmptySample);
    }
    let mut xs = sample.to_vec();
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    let mut d = 0.0f64;
    let mut i = 0;
    while i < xs.len() {
        let x = xs[i];
        let mut j = i;
        while j < xs.len() && xs[j] == x {
            j += 1;
        }
        let f = cdf(x);
        d = d.max((f - i as f64 / n).abs()).max((j as f64 / n - f).abs());
        i = j;
    }
    Ok(d)
}

/// `t_n = Tr Uⁿ` for `n = 0..=n_max`.
#[derive(Clone, Debug, PartialEq)]
pub struct TraceSeries {
    pub dim: usize,
    pub t: Vec<C64>,
}

impl TraceSeries {
    pub fn n_max(&self) -> usize {
        self.t.len() - 1
    }
}

/// Spectral traces `t_n = Σ_k e^{inθ_k}`.
pub fn trace_series(phases: &[f64], n_max: usize) -> TraceSeries {
    let mut t = Vec::with_capacity(n_max + 1);
    t.push(C64::new(phases.len() as f64, 0.0));
    for n in 1..=n_max {
        t.push(phases.iter().map(|&th| cis((n as f64 * th).rem_euclid(TAU))).sum());
    }
    TraceSeries { dim: phases.len(), t }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KappaEstimate {
    /// `(1/w) Σ_{n=1}^{w} t_n / √N`.
    pub kappa: C64,
    /// `|κ|²` of the complex mean.
    pub kappa_abs2: f64,
    /// Window average of the form factor, `(1/w) Σ |t_n|² / N`.
    pub form_factor: f64,
}

pub fn kappa_estimate(ts: &TraceSeries, window: usize) -> Result<KappaEstimate> {
    if window == 0 {
        return Err(Error::InvalidParameter("kappa window must be at least 1".into()));
    }
    if window > ts.n_max() {
        return Err(Error::TooFewPoints {
            needed: window + 1,
            got: ts.t.len(),
        });
    }
    let n = ts.dim as f64;
    let w = window as f64;
    let terms = &ts.t[1..=window];
    let kappa = terms.iter().fold(ZERO, |a, b| a + b) / (w * n.sqrt());
    let form_factor = terms.iter().map(|t| t.norm_sqr()).sum::<f64>() / (w * n);
    Ok(KappaEstimate {
        kappa,
        kappa_abs2: kappa.norm_sqr(),
        form_factor,
    })
}

/// `Σ²(L) = ⟨(n(L) - L)²⟩`, with `n(L)` the count of unfolded levels in a
/// window of length `L`. Window starts sit at `(j + 1/2)` for `j = 0..N` on
/// the unfolded circle of circumference `N`.
pub fn number_variance(phases: &[f64], l_values: &[f64]) -> Result<Vec<f64>> {
    let n = phases.len();
    if n == 0 {
        return Err(Error::EmptySample);
    }
    let nf = n as f64;
    let mut x: Vec<f64> = phases.iter().map(|t| t.rem_euclid(TAU) * nf / TAU).collect();
    x.sort_by(f64::total_cmp);
    // count of x_k < v for v in [0, 2N)
    let below = |v: f64| -> f64 {
        let wraps = (v / nf).floor();
        let r = v - wraps * nf;
        wraps * nf + x.partition_point(|&y| y < r) as f64
    };
    l_values
        .iter()
        .map(|&l| {
            if !(l >= 0.0) || l > nf {
                return Err(Error::InvalidParameter(format!("window length {l} outside [0, N]")));
            }
            let mut acc = 0.0;
            for j in 0..n {
                let start = j as f64 + 0.5;
                let count = below(start + l) - below(start);
                acc += (count - l).powi(2);
            }
            Ok(acc / nf)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::Representation;
    use proptest::prelude::*;

    /// Composite Simpson on `s = u²` to tame the `s^β` endpoint.
    fn moments(law: SpacingLaw) -> (f64, f64) {
        let m = 40_000;
        let (a, b) = (0.0, 12.0);
        let h = (b - a) / m as f64;
        let f = |u: f64, k: i32| law.pdf(u * u) * (u * u).powi(k) * 2.0 * u;
        let mut s0 = 0.0;
        let mut s1 = 0.0;
        for i in 0..=m {
            let u = a + i as f64 * h;
            let w = if i == 0 || i == m {
                1.0
            } else if i % 2 == 1 {
                4.0
            } else {
                2.0
            };
            s0 += w * f(u, 0);
            s1 += w * f(u, 1);
        }
        (s0 * h / 3.0, s1 * h / 3.0)
    }

    #[test]
    fn eigensystem_examples() {
        let d: Vec<C64> = [0.0, PI / 2.0, PI, 1.5 * PI].iter().map(|&t| cis(t)).collect();
        let u = ComplexMatrix::diagonal(&d, Representation::Position);
        let e = eigensystem(&u).unwrap();
        for (a, b) in e.phases.iter().zip([0.0, PI / 2.0, PI, 1.5 * PI]) {
            assert!((a - b).abs() < 1e-12);
        }
        let e = eigensystem(&ComplexMatrix::identity(5, Representation::Position)).unwrap();
        assert!(e.phases.iter().all(|&t| t.abs() < 1e-12 || (t - TAU).abs() < 1e-12));
    }

    #[test]
    fn eigensystem_residual_on_map() {
        let spec = MapSpec::deterministic(8, crate::params::Alpha::rational(1, 3).unwrap()).unwrap();
        let u = crate::map_operator::build_unitary(&spec).unwrap();
        let e = eigensystem(&u).unwrap();
        assert!(e.max_residual < 1e-7);
        assert!(e.phases.windows(2).all(|w| w[0] <= w[1]));
        let general = eigen::general_decomposition(&u, false).unwrap();
        for (a, b) in e.phases.iter().zip(&general.phases) {
            assert!((a - b).abs() < 1e-9);
        }
        assert!(eigen::orthonormality_defect(e.vectors().unwrap().as_mat()) < 1e-10);
    }

    #[test]
    fn spectrum_is_representation_invariant() {
        let spec = MapSpec::deterministic(6, crate::params::Alpha::golden()).unwrap();
        let up = crate::map_operator::build_unitary(&spec).unwrap();
        let uq = up.to_representation(Representation::Position).unwrap();
        let a = eigenphases(&up).unwrap();
        let b = eigenphases(&uq).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-8);
        }
    }

    #[test]
    fn unfold_examples() {
        let eq: Vec<f64> = (0..16).map(|k| TAU * k as f64 / 16.0).collect();
        let s = unfold_spacings(&eq).unwrap();
        assert!(s.s.iter().all(|&x| (x - 1.0).abs() < 1e-12));
        let s = unfold_spacings(&[0.0, PI]).unwrap();
        assert_eq!(s.s, vec![1.0, 1.0]);
        assert!(unfold_spacings(&[]).is_err());
        assert!(unfold_spacings(&[1.0, 0.5]).is_err());
        let s = unfold_spacings(&[0.0, 0.0, 1.0]).unwrap();
        assert_eq!(s.degenerate, 1);
    }

    proptest! {
        #[test]
        fn unfolded_mean_is_one(mut phases in proptest::collection::vec(0.0..TAU, 1..200)) {
            phases.sort_by(f64::total_cmp);
            let s = unfold_spacings(&phases).unwrap();
            prop_assert!((s.mean() - 1.0).abs() < 1e-12);
            prop_assert!(s.s.iter().all(|&x| x >= 0.0));
        }

        #[test]
        fn cdf_is_integral_of_pdf(beta in prop::sample::select(vec![0.5, 1.0, 1.5, 2.0]), s in 0.05f64..6.0) {
            let h = 1e-5;
            let d = (semi_poisson_cdf(beta, s + h) - semi_poisson_cdf(beta, s - h)) / (2.0 * h);
            prop_assert!((d - semi_poisson_pdf(beta, s)).abs() < 1e-5);
        }
    }

    #[test]
    fn reference_laws_normalized() {
        for law in [
            SpacingLaw::SemiPoisson(0.5),
            SpacingLaw::SemiPoisson(1.0),
            SpacingLaw::SemiPoisson(1.5),
            SpacingLaw::SemiPoisson(2.0),
            SpacingLaw::Coe,
            SpacingLaw::Cue,
        ] {
            let (m0, m1) = moments(law);
            assert!((m0 - 1.0).abs() < 1e-8, "{law}: {m0}");
            assert!((m1 - 1.0).abs() < 1e-8, "{law}: {m1}");
            assert!((law.cdf(40.0) - 1.0).abs() < 1e-12);
        }
        for s in [0.0, 0.3, 1.0, 4.0] {
            assert!((semi_poisson_pdf(0.0, s) - (-s).exp()).abs() < 1e-15);
        }
        assert!((semi_poisson_pdf(1.0, 1.0) - 4.0 * (-2.0f64).exp()).abs() < 1e-14);
        assert!((semi_poisson_ln_norm(0.5).exp() - 1.5f64.powf(1.5) / (PI.sqrt() / 2.0)).abs() < 1e-12);
    }

    #[test]
    fn coe_surmise_mode() {
        assert_eq!(wigner_coe_pdf(0.0), 0.0);
        let mode = (2.0 / PI).sqrt();
        let h = 1e-6;
        let slope = (wigner_coe_pdf(mode + h) - wigner_coe_pdf(mode - h)) / (2.0 * h);
        assert!(slope.abs() < 1e-8);
        assert!(wigner_coe_pdf(mode) > wigner_coe_pdf(mode * 0.9));
    }

    #[test]
    fn ks_examples() {
        let ones = vec![1.0; 10];
        let d = ks_distance(&ones, poisson_cdf).unwrap();
        assert!((d - (1.0 - (-1.0f64).exp())).abs() < 1e-12);
        assert!(ks_distance(&[], poisson_cdf).is_err());
        // exact quantiles of the reference
        let n = 10_000;
        let q: Vec<f64> = (0..n).map(|k| -(1.0 - (k as f64 + 0.5) / n as f64).ln()).collect();
        assert!(ks_distance(&q, poisson_cdf).unwrap() < 0.02);
    }

    #[test]
    fn trace_examples() {
        let ts = trace_series(&[0.0; 4], 5);
        assert!(ts.t.iter().all(|t| (t - C64::new(4.0, 0.0)).norm() < 1e-12));
        let ts = trace_series(&[0.0, PI], 4);
        for (n, t) in ts.t.iter().enumerate() {
            let e = if n % 2 == 0 { 2.0 } else { 0.0 };
            assert!((t - C64::new(e, 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn spectral_trace_matches_direct_powers() {
        let spec = MapSpec::deterministic(6, crate::params::Alpha::rational(1, 3).unwrap()).unwrap();
        let u = crate::map_operator::build_unitary(&spec).unwrap();
        let ts = trace_series(&eigenphases(&u).unwrap(), 16);
        let mut p = u.clone();
        for n in 1..=16 {
            let tr: C64 = (0..u.dim()).map(|k| p.get(k, k)).sum();
            assert!((tr - ts.t[n]).norm() < 1e-6, "n={n}");
            p = p.matmul(&u).unwrap();
        }
    }

    #[test]
    fn kappa_examples() {
        let n = 64usize;
        let ts = TraceSeries {
            dim: n,
            t: vec![C64::new(8.0, 0.0); 10],
        };
        let k = kappa_estimate(&ts, 9).unwrap();
        assert!((k.kappa - C64::new(1.0, 0.0)).norm() < 1e-14);
        assert!((k.kappa_abs2 - 1.0).abs() < 1e-14 && (k.form_factor - 1.0).abs() < 1e-14);
        let ts = TraceSeries {
            dim: n,
            t: vec![ZERO; 4],
        };
        assert_eq!(kappa_estimate(&ts, 3).unwrap().kappa, ZERO);
        assert!(kappa_estimate(&ts, 0).is_err());
        assert!(kappa_estimate(&ts, 4).is_err());
    }

    #[test]
    fn number_variance_examples() {
        let eq: Vec<f64> = (0..100).map(|k| TAU * k as f64 / 100.0).collect();
        let v = number_variance(&eq, &[1.0, 2.0, 5.0]).unwrap();
        assert!(v.iter().all(|&x| x.abs() < 1e-12));

        use rand::Rng;
        let mut rng = crate::rng::RngStream::new(21, 0).rng();
        let poisson: Vec<f64> = (0..10_000).map(|_| rng.random::<f64>() * TAU).collect();
        let ls: Vec<f64> = (1..=10).map(|l| l as f64).collect();
        let v = number_variance(&poisson, &ls).unwrap();
        for (l, s2) in ls.iter().zip(&v) {
            assert!(*s2 >= 0.0);
            assert!((s2 / l - 1.0).abs() < 0.1, "L={l} Σ²={s2}");
        }
    }
}
