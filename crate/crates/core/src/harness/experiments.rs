//! The six experiments and the building blocks they share.

use std::path::{Path, PathBuf};

use crate::circuit::{build_map_circuit, build_qft, circuit_unitary, count_gates, scattering_trace, CountingMode};
use crate::error::{Error, Result};
use crate::isrm::{build_isrm_circuit, build_isrm_unitary, circuit_phases, RandomCircuitSpec};
use crate::linalg::{dense_fourier, ComplexMatrix, Representation};
use crate::map_operator::{build_unitary_capped, desymmetrize, matrix_power};
use crate::observables::{
    column_intensities, fit_power_law, histogram, ipr_of, log_histogram, meyer_wallach_q, IntensitySample, ScalingPoint,
};
use crate::params::{predicted_beta, satisfies_conjecture, Alpha, MapSpec, Variant};
use crate::rng::RngStream;
use crate::spectral::{
    eigenphases, eigensystem, kappa_estimate, ks_distance, number_variance, trace_series, unfold_spacings, Block,
    SpacingLaw, SpacingSample,
};

use super::cache::{build_spec_matrix, cache_matrix};
use super::config::{Experiment, ExperimentConfig};
use super::parallel_map;
use super::table::{Cell, Provenance, ResultTable};

/// Tolerance for circuit-versus-matrix comparisons.
pub const CIRCUIT_TOL: f64 = 1e-9;
/// Tolerance for the spectral-versus-probe trace comparison (times N).
pub const TRACE_TOL: f64 = 1e-6;
/// Intensity histogram range and bins.
pub const INTENSITY_BINS: (f64, f64, usize) = (1e-4, 1e2, 60);
/// Spacing histogram range and bins.
pub const SPACING_BINS: (f64, f64, usize) = (0.0, 4.0, 40);
/// Window lengths for the number variance.
pub const NUMBER_VARIANCE_L: [f64; 6] = [0.5, 1.0, 2.0, 4.0, 8.0, 16.0];

/// A pass/fail numerical check performed while running.
#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn new(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        Check {
            name: name.into(),
            passed,
            detail: detail.into(),
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct ExperimentOutput {
    pub tables: Vec<ResultTable>,
    pub checks: Vec<Check>,
}

impl ExperimentOutput {
    pub fn write(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        self.tables.iter().map(|t| t.write(dir)).collect()
    }

    pub fn failures(&self) -> Vec<&Check> {
        self.checks.iter().filter(|c| !c.passed).collect()
    }
}

pub fn run(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    cfg.validate()?;
    let mut out = match cfg.experiment {
        Experiment::Spacing => run_spacing(cfg),
        Experiment::FormFactor => run_formfactor(cfg),
        Experiment::Iterates => run_iterates(cfg),
        Experiment::Ipr => run_ipr(cfg),
        Experiment::CircuitVerify => run_circuit_verify(cfg),
        Experiment::IsrmStats => run_isrm_stats(cfg),
    }?;
    for t in &mut out.tables {
        t.sort();
    }
    Ok(out)
}

fn provenance(spec: &MapSpec) -> Provenance {
    Provenance {
        spec_hash: spec.hash_hex(),
        seed: spec.seed,
    }
}

fn matrix(cfg: &ExperimentConfig, spec: &MapSpec, realization: u64) -> Result<ComplexMatrix> {
    match &cfg.cache_dir {
        Some(dir) => Ok(cache_matrix(dir, spec, realization, cfg.dense_cap)?.0),
        None => build_spec_matrix(spec, realization, cfg.dense_cap),
    }
}

/// Eigenphases of the deterministic map, split into S-parity blocks when
/// `N ≡ 0 (mod 4)`.
pub fn deterministic_block_phases(spec: &MapSpec, dense_cap: u32) -> Result<Vec<(Block, Vec<f64>)>> {
    let u = build_unitary_capped(spec, dense_cap)?;
    block_phases_of(&u)
}

fn block_phases_of(u: &ComplexMatrix) -> Result<Vec<(Block, Vec<f64>)>> {
    if !u.dim().is_multiple_of(4) {
        return Ok(vec![(Block::Full, eigenphases(u)?)]);
    }
    let uq = u.to_representation(Representation::Position)?;
    let blocks = desymmetrize(&uq)?;
    Ok(vec![
        (Block::Even, eigenphases(&blocks.even)?),
        (Block::Odd, eigenphases(&blocks.odd)?),
    ])
}

fn unfold_blocks(blocks: &[(Block, Vec<f64>)]) -> Result<Vec<SpacingSample>> {
    blocks
        .iter()
        .map(|(b, phases)| {
            let mut s = unfold_spacings(phases)?;
            s.desymmetrized = *b != Block::Full;
            Ok(s)
        })
        .collect()
}

/// Desymmetrized spacings of the deterministic map for `α` and `1 - α`,
/// pooled in that order.
pub fn pooled_map_spacings(n_qubits: u32, alpha: &Alpha, dense_cap: u32, workers: usize) -> Result<SpacingSample> {
    let alphas = [*alpha, alpha.complement()];
    let per_alpha = parallel_map(workers, &alphas, |a| {
        let spec = MapSpec::deterministic(n_qubits, *a)?;
        unfold_blocks(&deterministic_block_phases(&spec, dense_cap)?)
    })?;
    let all: Vec<SpacingSample> = per_alpha.into_iter().flatten().collect();
    Ok(SpacingSample::pooled(&all))
}

/// Spacings pooled over realizations `0..ensemble` of an ISRM spec.
pub fn pooled_isrm_spacings(spec: &MapSpec, ensemble: usize, workers: usize) -> Result<SpacingSample> {
    let idx: Vec<u64> = (0..ensemble as u64).collect();
    let samples = parallel_map(workers, &idx, |&k| {
        let u = build_spec_matrix(spec, k, crate::params::DEFAULT_DENSE_CAP)?;
        unfold_spacings(&eigenphases(&u)?)
    })?;
    Ok(SpacingSample::pooled(&samples))
}

/// KS distances of a sample to a list of laws.
pub fn ks_against(sample: &SpacingSample, laws: &[SpacingLaw]) -> Result<Vec<f64>> {
    laws.iter().map(|law| ks_distance(&sample.s, |s| law.cdf(s))).collect()
}

fn run_spacing(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    let mut hist = ResultTable::new(
        "spacing",
        &[
            "alpha",
            "N",
            "block",
            "s_bin_center",
            "density",
            "ks_sp",
            "ks_poisson",
            "ks_coe",
        ],
        4,
    )
    .with_plot("s_bin_center", "density", false, false);
    let mut nv = ResultTable::new("number_variance", &["alpha", "N", "block", "L", "sigma2"], 4)
        .with_plot("L", "sigma2", true, true);
    for &n in &cfg.n_qubits {
        let spec = cfg.spec(n)?;
        let prov = provenance(&spec);
        let dim = spec.dim();
        let beta = predicted_beta(&cfg.alpha, dim, cfg.variant);
        if beta.is_none() {
            if let Some((a, b)) = cfg.alpha.as_rational() {
                log::warn!("alpha = {a}/{b}, N = {dim}: aN is not ±1 mod b, no semi-Poisson prediction");
            }
        }
        let (sample, spectra) = if cfg.variant == Variant::Deterministic {
            let u = matrix(cfg, &spec, 0)?;
            (
                pooled_map_spacings(n, &cfg.alpha, cfg.dense_cap, cfg.workers)?,
                block_phases_of(&u)?,
            )
        } else {
            let u = matrix(cfg, &spec, 0)?;
            (
                pooled_isrm_spacings(&spec, cfg.ensemble, cfg.workers)?,
                vec![(Block::Full, eigenphases(&u)?)],
            )
        };
        let ks_sp = match beta {
            Some(b) => ks_distance(&sample.s, |s| SpacingLaw::SemiPoisson(b).cdf(s))?,
            None => f64::NAN,
        };
        let ks_poisson = ks_distance(&sample.s, |s| SpacingLaw::Poisson.cdf(s))?;
        let ks_coe = ks_distance(&sample.s, |s| SpacingLaw::Coe.cdf(s))?;
        log::info!(
            "spacing alpha={} N={dim}: {} spacings, KS sp={ks_sp:.4} poisson={ks_poisson:.4} coe={ks_coe:.4}",
            cfg.alpha,
            sample.len()
        );
        let (lo, hi, bins) = SPACING_BINS;
        for bin in histogram(&sample.s, lo, hi, bins) {
            hist.push(
                vec![
                    Cell::from(cfg.alpha.to_string()),
                    Cell::from(dim),
                    Cell::from("pooled"),
                    Cell::from(bin.center),
                    Cell::from(bin.density),
                    Cell::from(ks_sp),
                    Cell::from(ks_poisson),
                    Cell::from(ks_coe),
                ],
                &prov,
            )?;
        }
        for (block, phases) in &spectra {
            let ls: Vec<f64> = NUMBER_VARIANCE_L
                .iter()
                .copied()
                .filter(|&l| l <= phases.len() as f64)
                .collect();
            let s2 = number_variance(phases, &ls)?;
            for (l, v) in ls.iter().zip(s2) {
                nv.push(
                    vec![
                        Cell::from(cfg.alpha.to_string()),
                        Cell::from(dim),
                        Cell::from(block.name()),
                        Cell::from(*l),
                        Cell::from(v),
                    ],
                    &prov,
                )?;
            }
        }
    }
    Ok(ExperimentOutput {
        tables: vec![hist, nv],
        checks: Vec::new(),
    })
}

/// Spectral trace series of the deterministic map, `t_0..=t_window`.
pub fn map_trace_series(spec: &MapSpec, window: usize, dense_cap: u32) -> Result<crate::spectral::TraceSeries> {
    let u = build_unitary_capped(spec, dense_cap)?;
    Ok(trace_series(&eigenphases(&u)?, window))
}

fn run_formfactor(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    if cfg.variant != Variant::Deterministic {
        return Err(Error::Config("formfactor runs on the deterministic map".into()));
    }
    let mut main = ResultTable::new(
        "formfactor",
        &["alpha", "N", "n", "re_t", "im_t", "kappa_re", "kappa_im", "ff"],
        3,
    )
    .with_plot("n", "re_t", false, false);
    let mut sym = ResultTable::new(
        "formfactor_sym",
        &[
            "alpha", "N", "n", "re_t", "im_t", "re_st", "im_st", "re_diff", "im_diff",
        ],
        3,
    )
    .with_plot("n", "re_diff", false, false);
    let mut cross = ResultTable::new(
        "formfactor_check",
        &[
            "alpha",
            "N",
            "n",
            "re_spectral",
            "im_spectral",
            "re_probe",
            "im_probe",
            "deviation",
        ],
        3,
    );
    let mut checks = Vec::new();
    let specs: Vec<MapSpec> = cfg.n_qubits.iter().map(|&n| cfg.spec(n)).collect::<Result<_>>()?;
    let results = parallel_map(cfg.workers, &specs, |spec| {
        let u = matrix(cfg, spec, 0)?;
        let eig = eigensystem(&u)?;
        let ts = trace_series(&eig.phases, cfg.window);
        let blocks = if spec.dim() % 4 == 0 {
            let b = block_phases_of(&u)?;
            Some((trace_series(&b[0].1, cfg.window), trace_series(&b[1].1, cfg.window)))
        } else {
            None
        };
        let probe = if spec.n_qubits <= 8 {
            let mut rng = RngStream::new(cfg.seed, spec.n_qubits as u64).rng();
            Some(scattering_trace(&eig, 1, cfg.shots, &mut rng)? * spec.dim() as f64)
        } else {
            None
        };
        Ok((ts, blocks, probe))
    })?;
    for (spec, (ts, blocks, probe)) in specs.iter().zip(results) {
        let prov = provenance(spec);
        let dim = spec.dim();
        let k = kappa_estimate(&ts, cfg.window)?;
        if let Some((a, b)) = cfg.alpha.as_rational() {
            if !satisfies_conjecture(a, b, dim) {
                log::warn!("alpha = {a}/{b}, N = {dim}: aN is not ±1 mod b");
            }
        }
        log::info!(
            "formfactor alpha={} N={dim}: kappa={:.4}{:+.4}i |kappa|^2={:.4e} ff={:.4}",
            cfg.alpha,
            k.kappa.re,
            k.kappa.im,
            k.kappa_abs2,
            k.form_factor
        );
        for (n, t) in ts.t.iter().enumerate() {
            main.push(
                vec![
                    Cell::from(cfg.alpha.to_string()),
                    Cell::from(dim),
                    Cell::from(n),
                    Cell::from(t.re),
                    Cell::from(t.im),
                    Cell::from(k.kappa.re),
                    Cell::from(k.kappa.im),
                    Cell::from(k.form_factor),
                ],
                &prov,
            )?;
        }
        if let Some((even, odd)) = blocks {
            for n in 0..=cfg.window {
                let t = ts.t[n];
                let st = even.t[n] - odd.t[n];
                let diff = t - st;
                sym.push(
                    vec![
                        Cell::from(cfg.alpha.to_string()),
                        Cell::from(dim),
                        Cell::from(n),
                        Cell::from(t.re),
                        Cell::from(t.im),
                        Cell::from(st.re),
                        Cell::from(st.im),
                        Cell::from(diff.re),
                        Cell::from(diff.im),
                    ],
                    &prov,
                )?;
            }
        }
        if let Some(p) = probe {
            let dev = (p - ts.t[1]).norm();
            cross.push(
                vec![
                    Cell::from(cfg.alpha.to_string()),
                    Cell::from(dim),
                    Cell::from(1usize),
                    Cell::from(ts.t[1].re),
                    Cell::from(ts.t[1].im),
                    Cell::from(p.re),
                    Cell::from(p.im),
                    Cell::from(dev),
                ],
                &prov,
            )?;
            if cfg.shots.is_none() {
                checks.push(Check::new(
                    format!("probe trace N={dim}"),
                    dev < TRACE_TOL,
                    format!("|probe - spectral| = {dev:e}"),
                ));
            }
        }
    }
    Ok(ExperimentOutput {
        tables: vec![main, sym, cross],
        checks,
    })
}

/// Pooled samples from the columns of `Uⁿ` over an iterate window.
#[derive(Clone, Debug)]
pub struct IterateSample {
    pub p: IntensitySample,
    pub q: IntensitySample,
    /// Meyer-Wallach Q of the q-representation columns (even block when
    /// `N ≡ 0 mod 4`).
    pub q_entanglement: Vec<f64>,
}

/// Columns of `Uⁿ` for `n ∈ [lo, hi)`, `u` in momentum representation.
///
/// With `symmetric_block` and `N ≡ 0 (mod 4)` only the even S-parity class
/// is analyzed: its `N/2` block in q representation, and the same block
/// after an `N/2`-point Fourier transform for the p representation (the
/// class written in the basis `(|p⟩ + |p + N/2⟩)/√2`). Otherwise the full
/// columns are used.
pub fn iterate_sample(u: &ComplexMatrix, window: (u64, u64), symmetric_block: bool) -> Result<IterateSample> {
    let (lo, hi) = window;
    if hi <= lo {
        return Err(Error::InvalidParameter(format!("empty iterate window [{lo}, {hi})")));
    }
    let eig = eigensystem(u)?;
    let mut power = matrix_power(&eig, lo)?;
    let dim = u.dim();
    let mut p_cols = Vec::new();
    let mut q_cols = Vec::new();
    let mut q_values = Vec::new();
    for n in lo..hi {
        if n > lo {
            power = u.matmul(&power)?;
        }
        let uq = power.to_representation(Representation::Position)?;
        if symmetric_block && dim.is_multiple_of(4) {
            let even = desymmetrize(&uq)?.even;
            let even_p = even.to_representation(Representation::Momentum)?;
            for k in 0..even.dim() {
                let col = even.column(k);
                q_values.push(meyer_wallach_q(&col)?);
                q_cols.push(col);
                p_cols.push(even_p.column(k));
            }
        } else {
            for k in 0..dim {
                let col = uq.column(k);
                q_values.push(meyer_wallach_q(&col)?);
                q_cols.push(col);
                p_cols.push(power.column(k));
            }
        }
    }
    let mut p = column_intensities(&p_cols, Representation::Momentum)?;
    let mut q = column_intensities(&q_cols, Representation::Position)?;
    p.window = Some(window);
    q.window = Some(window);
    Ok(IterateSample {
        p,
        q,
        q_entanglement: q_values,
    })
}

/// KS distance of intensities to the Porter-Thomas law `1 - e^{-y}`.
pub fn porter_thomas_ks(sample: &IntensitySample) -> Result<f64> {
    ks_distance(&sample.y, |y| -(-y).exp_m1())
}

fn run_iterates(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    let mut tables = Vec::new();
    let mut summary = ResultTable::new(
        "iterates_summary",
        &[
            "variant",
            "alpha",
            "N",
            "representation",
            "window_lo",
            "window_hi",
            "stat_kind",
            "ks_porter_thomas",
            "mean",
            "count",
        ],
        7,
    );
    for &n in &cfg.n_qubits {
        let spec = cfg.spec(n)?;
        let prov = provenance(&spec);
        let mut table = ResultTable::new(
            &format!("iterates_nq{n}"),
            &[
                "variant",
                "representation",
                "window_lo",
                "window_hi",
                "bin_center",
                "density",
                "stat_kind",
            ],
            7,
        )
        .with_plot("bin_center", "density", true, true);
        let realizations: Vec<u64> = if cfg.variant.is_isrm() {
            (0..cfg.ensemble as u64).collect()
        } else {
            vec![0]
        };
        for window in cfg.iterate_windows() {
            let parts = parallel_map(cfg.workers, &realizations, |&r| {
                let u = matrix(cfg, &spec, r)?;
                iterate_sample(&u, window, !cfg.variant.is_isrm())
            })?;
            let mut p_all = Vec::new();
            let mut q_all = Vec::new();
            let mut ent = Vec::new();
            for part in parts {
                p_all.extend(part.p.y);
                q_all.extend(part.q.y);
                ent.extend(part.q_entanglement);
            }
            let (lo, hi, bins) = INTENSITY_BINS;
            let variant = cfg.variant.name();
            for (repr, ys) in [("p", &p_all), ("q", &q_all)] {
                for bin in log_histogram(ys, lo, hi, bins) {
                    table.push(
                        vec![
                            Cell::from(variant),
                            Cell::from(repr),
                            Cell::from(window.0),
                            Cell::from(window.1),
                            Cell::from(bin.center),
                            Cell::from(bin.density),
                            Cell::from("intensity"),
                        ],
                        &prov,
                    )?;
                }
                let ks = ks_distance(ys, |y| -(-y).exp_m1())?;
                let mean = ys.iter().sum::<f64>() / ys.len() as f64;
                summary.push(
                    vec![
                        Cell::from(variant),
                        Cell::from(cfg.alpha.to_string()),
                        Cell::from(spec.dim()),
                        Cell::from(repr),
                        Cell::from(window.0),
                        Cell::from(window.1),
                        Cell::from("intensity"),
                        Cell::from(ks),
                        Cell::from(mean),
                        Cell::from(ys.len()),
                    ],
                    &prov,
                )?;
            }
            for bin in histogram(&ent, 0.0, 1.0 + 1e-12, 50) {
                table.push(
                    vec![
                        Cell::from(variant),
                        Cell::from("q"),
                        Cell::from(window.0),
                        Cell::from(window.1),
                        Cell::from(bin.center),
                        Cell::from(bin.density),
                        Cell::from("Q"),
                    ],
                    &prov,
                )?;
            }
            let mean_q = ent.iter().sum::<f64>() / ent.len() as f64;
            summary.push(
                vec![
                    Cell::from(variant),
                    Cell::from(cfg.alpha.to_string()),
                    Cell::from(spec.dim()),
                    Cell::from("q"),
                    Cell::from(window.0),
                    Cell::from(window.1),
                    Cell::from("Q"),
                    Cell::from(f64::NAN),
                    Cell::from(mean_q),
                    Cell::from(ent.len()),
                ],
                &prov,
            )?;
        }
        tables.push(table);
    }
    tables.push(summary);
    Ok(ExperimentOutput {
        tables,
        checks: Vec::new(),
    })
}

/// IPR values of one realization: all eigenvectors, and all columns of
/// `U^late`, both in momentum representation.
pub fn ipr_values(u: &ComplexMatrix, late: u64) -> Result<(Vec<f64>, Vec<f64>)> {
    let eig = eigensystem(u)?;
    let v = eig.vectors()?;
    let eigvec = (0..v.dim())
        .map(|k| ipr_of(v.column_slice(k)))
        .collect::<Result<Vec<f64>>>()?;
    let power = matrix_power(&eig, late)?;
    let columns = (0..power.dim())
        .map(|k| ipr_of(power.column_slice(k)))
        .collect::<Result<Vec<f64>>>()?;
    Ok((eigvec, columns))
}

/// Per-N pooled IPR values over realizations `0..ensemble`.
pub fn ipr_point(
    spec: &MapSpec,
    ensemble: usize,
    late: u64,
    dense_cap: u32,
    workers: usize,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let idx: Vec<u64> = if spec.variant.is_isrm() {
        (0..ensemble as u64).collect()
    } else {
        vec![0]
    };
    let parts = parallel_map(workers, &idx, |&r| {
        ipr_values(&build_spec_matrix(spec, r, dense_cap)?, late)
    })?;
    let mut eig = Vec::new();
    let mut col = Vec::new();
    for (e, c) in parts {
        eig.extend(e);
        col.extend(c);
    }
    Ok((eig, col))
}

fn run_ipr(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    let mut table = ResultTable::new(
        "ipr",
        &[
            "variant", "alpha", "N", "series", "mean_xi", "std_xi", "gamma", "residual",
        ],
        4,
    )
    .with_plot("N", "mean_xi", true, true);
    let mut eig_points = Vec::new();
    let mut col_points = Vec::new();
    let mut specs = Vec::new();
    for &n in &cfg.n_qubits {
        let spec = cfg.spec(n)?;
        if let Some((a, b)) = cfg.alpha.as_rational() {
            if !satisfies_conjecture(a, b, spec.dim()) {
                log::warn!("skipping N = {}: {a}N is not ±1 mod {b}", spec.dim());
                continue;
            }
        }
        let (e, c) = ipr_point(&spec, cfg.ensemble, cfg.late_iterate, cfg.dense_cap, cfg.workers)?;
        eig_points.push(ScalingPoint::from_values(spec.dim(), &e));
        col_points.push(ScalingPoint::from_values(spec.dim(), &c));
        specs.push(spec);
    }
    let fit = |pts: &[ScalingPoint]| match fit_power_law(pts) {
        Ok(s) => (s.gamma, s.residual),
        Err(e) => {
            log::warn!("no power-law fit: {e}");
            (f64::NAN, f64::NAN)
        }
    };
    for (series, points) in [("eigvec", &eig_points), ("column", &col_points)] {
        let (gamma, residual) = fit(points);
        log::info!("ipr {series}: gamma = {gamma:.4} (rms residual {residual:.3e})");
        for (spec, p) in specs.iter().zip(points.iter()) {
            table.push(
                vec![
                    Cell::from(cfg.variant.name()),
                    Cell::from(cfg.alpha.to_string()),
                    Cell::from(p.dim),
                    Cell::from(series),
                    Cell::from(p.mean_xi),
                    Cell::from(p.std_xi),
                    Cell::from(gamma),
                    Cell::from(residual),
                ],
                &provenance(spec),
            )?;
        }
    }
    Ok(ExperimentOutput {
        tables: vec![table],
        checks: Vec::new(),
    })
}

/// Expected (one-qubit, two-qubit) counts of the paper-faithful map circuit.
pub fn expected_map_counts(n_qubits: usize) -> (usize, usize) {
    let total = 2 * n_qubits * n_qubits + 2 * n_qubits;
    let two = 2 * n_qubits * n_qubits - n_qubits;
    (total - two, two)
}

/// Expected (one-qubit, two-qubit) counts of the ISRM circuit.
pub fn expected_isrm_counts(n_qubits: usize, n_s: usize) -> (usize, usize) {
    (4 * n_qubits + n_s, n_qubits * n_qubits - n_qubits + 2 * n_s)
}

fn run_circuit_verify(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    let mut table = ResultTable::new(
        "circuit_verify",
        &[
            "n_qubits",
            "circuit",
            "n_s",
            "one_qubit",
            "two_qubit",
            "total",
            "expected_one",
            "expected_two",
            "expected_total",
            "deviation",
        ],
        3,
    );
    let mut checks = Vec::new();
    for &n in &cfg.n_qubits {
        let nq = n as usize;
        let spec = MapSpec::deterministic(n, cfg.alpha)?;
        let prov = provenance(&spec);
        let dense = n <= 8;
        let mut record = |table: &mut ResultTable,
                          name: &str,
                          n_s: usize,
                          got: crate::circuit::GateCounts,
                          expected: Option<(usize, usize)>,
                          deviation: f64|
         -> Result<()> {
            let (e1, e2) = expected.map_or((f64::NAN, f64::NAN), |(a, b)| (a as f64, b as f64));
            table.push(
                vec![
                    Cell::from(n),
                    Cell::from(name),
                    Cell::from(n_s),
                    Cell::from(got.one_qubit),
                    Cell::from(got.two_qubit),
                    Cell::from(got.total),
                    Cell::from(e1),
                    Cell::from(e2),
                    Cell::from(e1 + e2),
                    Cell::from(deviation),
                ],
                &prov,
            )?;
            if let Some((a, b)) = expected {
                checks.push(Check::new(
                    format!("{name} counts n_q={n} n_s={n_s}"),
                    got.one_qubit == a && got.two_qubit == b,
                    format!("({}, {}) vs ({a}, {b})", got.one_qubit, got.two_qubit),
                ));
            }
            if dense {
                checks.push(Check::new(
                    format!("{name} matrix n_q={n} n_s={n_s}"),
                    deviation < CIRCUIT_TOL,
                    format!("max deviation {deviation:e}"),
                ));
            }
            Ok(())
        };

        let map = build_map_circuit(&spec, cfg.counting)?;
        let map_dev = if dense {
            let uq = build_unitary_capped(&spec, cfg.dense_cap)?.to_representation(Representation::Position)?;
            let other = build_map_circuit(
                &spec,
                match cfg.counting {
                    CountingMode::PaperFaithful => CountingMode::Optimized,
                    CountingMode::Optimized => CountingMode::PaperFaithful,
                },
            )?;
            let a = circuit_unitary(&map)?;
            a.max_abs_diff_up_to_phase(&uq)
                .max(a.max_abs_diff(&circuit_unitary(&other)?))
        } else {
            f64::NAN
        };
        let expected = (cfg.counting == CountingMode::PaperFaithful).then(|| expected_map_counts(nq));
        record(&mut table, "map", 0, count_gates(&map), expected, map_dev)?;

        let qft = build_qft(n);
        let qft_dev = if dense {
            circuit_unitary(&qft)?.max_abs_diff(&relabel_repr(dense_fourier(1 << n)))
        } else {
            f64::NAN
        };
        let q = count_gates(&qft);
        record(&mut table, "qft", 0, q, Some((nq, nq * (nq - 1) / 2)), qft_dev)?;

        if nq >= 2 {
            for n_s in [4usize, 8, 16] {
                let mut rng = RngStream::new(cfg.seed, (n as u64) << 8 | n_s as u64).rng();
                let rcs = RandomCircuitSpec::random(n, n_s, &mut rng)?;
                let c = build_isrm_circuit(&cfg.alpha, &rcs)?;
                let dev = if dense {
                    let m = build_isrm_unitary(&circuit_phases(&rcs)?, &cfg.alpha)?
                        .to_representation(Representation::Position)?;
                    circuit_unitary(&c)?.max_abs_diff_up_to_phase(&m)
                } else {
                    f64::NAN
                };
                record(
                    &mut table,
                    "isrm",
                    n_s,
                    count_gates(&c),
                    Some(expected_isrm_counts(nq, n_s)),
                    dev,
                )?;
            }
        }
    }
    Ok(ExperimentOutput {
        tables: vec![table],
        checks,
    })
}

fn relabel_repr(w: ComplexMatrix) -> ComplexMatrix {
    let dim = w.dim();
    ComplexMatrix::from_fn(dim, Representation::Position, |i, j| w.get(i, j))
}

fn run_isrm_stats(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    if !cfg.variant.is_isrm() {
        return Err(Error::Config("isrm_stats needs variant isrm-sym or isrm-nonsym".into()));
    }
    let mut stats = ResultTable::new(
        "isrm_stats",
        &["variant", "alpha", "N", "ensemble", "law", "beta", "ks"],
        5,
    );
    let mut hist = ResultTable::new("isrm_spacing", &["variant", "alpha", "N", "s_bin_center", "density"], 4)
        .with_plot("s_bin_center", "density", false, false);
    for &n in &cfg.n_qubits {
        let spec = cfg.spec(n)?;
        let prov = provenance(&spec);
        let dim = spec.dim();
        let sample = pooled_isrm_spacings(&spec, cfg.ensemble, cfg.workers)?;
        let mut laws = vec![SpacingLaw::Poisson, SpacingLaw::Coe, SpacingLaw::Cue];
        match predicted_beta(&cfg.alpha, dim, cfg.variant) {
            Some(b) => laws.insert(0, SpacingLaw::SemiPoisson(b)),
            None => log::warn!("alpha = {}, N = {dim}: no semi-Poisson prediction", cfg.alpha),
        }
        for (law, ks) in laws.iter().zip(ks_against(&sample, &laws)?) {
            let (name, beta) = match law {
                SpacingLaw::SemiPoisson(b) => ("semi_poisson", *b),
                SpacingLaw::Poisson => ("poisson", 0.0),
                SpacingLaw::Coe => ("coe", f64::NAN),
                SpacingLaw::Cue => ("cue", f64::NAN),
            };
            log::info!("isrm {} alpha={} N={dim}: KS {law} = {ks:.4}", cfg.variant, cfg.alpha);
            stats.push(
                vec![
                    Cell::from(cfg.variant.name()),
                    Cell::from(cfg.alpha.to_string()),
                    Cell::from(dim),
                    Cell::from(cfg.ensemble),
                    Cell::from(name),
                    Cell::from(beta),
                    Cell::from(ks),
                ],
                &prov,
            )?;
        }
        let (lo, hi, bins) = SPACING_BINS;
        for bin in histogram(&sample.s, lo, hi, bins) {
            hist.push(
                vec![
                    Cell::from(cfg.variant.name()),
                    Cell::from(cfg.alpha.to_string()),
                    Cell::from(dim),
                    Cell::from(bin.center),
                    Cell::from(bin.density),
                ],
                &prov,
            )?;
        }
    }
    Ok(ExperimentOutput {
        tables: vec![stats, hist],
        checks: Vec::new(),
    })
}

/// `Φ ≡ 0` helper used by tests of degenerate configurations.
#[doc(hidden)]
pub fn identity_iterates(dim: usize) -> Result<IterateSample> {
    let u = ComplexMatrix::identity(dim, Representation::Momentum);
    iterate_sample(&u, (1, 2), false)
}
