//! ISRM ensemble: the map with its kinetic factor replaced by random
//! diagonal phases, either ideal (independent draws) or produced by the
//! CNOT/rotation randomization circuit.

use std::f64::consts::TAU;

use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::circuit::{sandwich, Circuit, CountingMode, Gate};
use crate::error::{Error, Result};
use crate::linalg::ComplexMatrix;
use crate::map_operator::{check_dense_cap, diagonal_times_kick};
use crate::params::{Alpha, MapSpec, PhaseModel, Variant, DEFAULT_DENSE_CAP};
use crate::rng::RngStream;

#[derive(Clone, Debug, PartialEq)]
pub struct PhaseVector {
    pub phi: Vec<f64>,
    /// `Φ_{N-p} = Φ_p`.
    pub symmetric: bool,
}

impl PhaseVector {
    pub fn len(&self) -> usize {
        self.phi.len()
    }

    pub fn is_empty(&self) -> bool {
        self.phi.is_empty()
    }

    pub fn is_mirror_symmetric(&self) -> bool {
        let n = self.phi.len();
        (1..n).all(|p| self.phi[n - p] == self.phi[p])
    }
}

/// Independent phases from `model`; the symmetric case draws `p = 0..=N/2`
/// and mirrors. The circuit model is handled by [`circuit_phases`].
pub fn sample_phases<R: Rng + ?Sized>(
    dim: usize,
    model: &PhaseModel,
    symmetric: bool,
    rng: &mut R,
) -> Result<PhaseVector> {
    if dim == 0 {
        return Err(Error::EmptySample);
    }
    if symmetric && !dim.is_multiple_of(2) {
        return Err(Error::InvalidParameter(format!(
            "symmetric phases need even N, got {dim}"
        )));
    }
    let mut draw: Box<dyn FnMut(&mut R) -> f64> = match *model {
        PhaseModel::Uniform => Box::new(|r: &mut R| r.random::<f64>() * TAU),
        PhaseModel::Gaussian { sigma } => {
            let normal = Normal::new(0.0, sigma).map_err(|e| Error::InvalidParameter(e.to_string()))?;
            Box::new(move |r: &mut R| normal.sample(r))
        }
        PhaseModel::Circuit { .. } => {
            return Err(Error::InvalidParameter(
                "circuit phases come from a random circuit, use circuit_phases".into(),
            ))
        }
    };
    let phi = if symmetric {
        let half: Vec<f64> = (0..=dim / 2).map(|_| draw(rng)).collect();
        (0..dim).map(|p| half[p.min(dim - p)]).collect()
    } else {
        (0..dim).map(|_| draw(rng)).collect()
    };
    Ok(PhaseVector { phi, symmetric })
}

/// `diag(e^{iΦ_p}) · W D_α W†` in momentum representation.
pub fn build_isrm_unitary(phases: &PhaseVector, alpha: &Alpha) -> Result<ComplexMatrix> {
    let dim = phases.len();
    if !dim.is_power_of_two() {
        return Err(Error::NotPowerOfTwo(dim));
    }
    check_dense_cap(dim.trailing_zeros(), DEFAULT_DENSE_CAP)?;
    diagonal_times_kick(&phases.phi, alpha)
}

/// Parameters of the randomization circuit.
#[derive(Clone, Debug, PartialEq)]
pub struct RandomCircuitSpec {
    pub n_qubits: u32,
    /// `φ_k`, one per qubit.
    pub phi: Vec<f64>,
    /// `φ'_k`, one per CNOT pair.
    pub phi_prime: Vec<f64>,
    /// `(i_k, j_k)` control and target.
    pub pairs: Vec<(usize, usize)>,
}

impl RandomCircuitSpec {
    pub fn n_s(&self) -> usize {
        self.pairs.len()
    }

    /// Uniform angles on `[0, 2π)` and uniformly random ordered pairs `i ≠ j`.
    pub fn random<R: Rng + ?Sized>(n_qubits: u32, n_s: usize, rng: &mut R) -> Result<Self> {
        let n = n_qubits as usize;
        if n < 2 {
            return Err(Error::InvalidParameter(
                "the randomization circuit needs at least 2 qubits".into(),
            ));
        }
        let phi = (0..n).map(|_| rng.random::<f64>() * TAU).collect();
        let mut phi_prime = Vec::with_capacity(n_s);
        let mut pairs = Vec::with_capacity(n_s);
        for _ in 0..n_s {
            phi_prime.push(rng.random::<f64>() * TAU);
            let i = rng.random_range(0..n);
            let j = (i + rng.random_range(1..n)) % n;
            pairs.push((i, j));
        }
        let rcs = RandomCircuitSpec {
            n_qubits,
            phi,
            phi_prime,
            pairs,
        };
        Ok(rcs)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.n_qubits as usize;
        if self.phi.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: self.phi.len(),
            });
        }
        if self.phi_prime.len() != self.pairs.len() {
            return Err(Error::DimensionMismatch {
                expected: self.pairs.len(),
                found: self.phi_prime.len(),
            });
        }
        for &(i, j) in &self.pairs {
            if i >= n || j >= n {
                return Err(Error::QubitOutOfRange {
                    qubit: i.max(j),
                    n_qubits: self.n_qubits,
                });
            }
            if i == j {
                return Err(Error::InvalidParameter(format!("CNOT pair ({i}, {j}) repeats a qubit")));
            }
        }
        Ok(())
    }
}

/// `Π_{k=n_s}^{1} CNOT_k · Π_{k=1}^{n_s} (R_{j_k}(φ'_k) CNOT_k) · Π_{k=1}^{n_q} R_k(φ_k)`,
/// products written left to right with the rightmost factor applied first.
pub fn build_random_phase_circuit(rcs: &RandomCircuitSpec) -> Result<Circuit> {
    rcs.validate()?;
    let mut c = Circuit::new(rcs.n_qubits);
    for (k, &phi) in rcs.phi.iter().enumerate() {
        c.push(Gate::Rz(k, phi));
    }
    for (&(i, j), &phi) in rcs.pairs.iter().zip(&rcs.phi_prime).rev() {
        c.push(Gate::Cnot(i, j));
        c.push(Gate::Rz(j, phi));
    }
    for &(i, j) in &rcs.pairs {
        c.push(Gate::Cnot(i, j));
    }
    Ok(c)
}

/// Phase of `basis_state` relative to `|0⟩` under the randomization circuit,
/// in `[0, 2π)`. Each qubit's current value is tracked as a parity mask over
/// the input bits; `R_j(φ)` then contributes `-φ · parity(mask_j & x)`.
pub fn circuit_phase_oracle(rcs: &RandomCircuitSpec, basis_state: usize) -> Result<f64> {
    rcs.validate()?;
    let n = rcs.n_qubits as usize;
    let mut masks: Vec<usize> = (0..n).map(|j| 1usize << j).collect();
    let bit = |mask: usize| ((mask & basis_state).count_ones() & 1) as f64;
    let mut phase = 0.0;
    for (j, &phi) in rcs.phi.iter().enumerate() {
        phase -= phi * bit(masks[j]);
    }
    for (&(i, j), &phi) in rcs.pairs.iter().zip(&rcs.phi_prime).rev() {
        masks[j] ^= masks[i];
        phase -= phi * bit(masks[j]);
    }
    Ok(phase.rem_euclid(TAU))
}

/// `Φ_p` from the oracle for every momentum `p`.
pub fn circuit_phases(rcs: &RandomCircuitSpec) -> Result<PhaseVector> {
    let dim = 1usize << rcs.n_qubits;
    let phi = (0..dim)
        .map(|p| circuit_phase_oracle(rcs, p))
        .collect::<Result<Vec<f64>>>()?;
    Ok(PhaseVector { phi, symmetric: false })
}

/// Full ISRM circuit: kick phases, QFT, randomization circuit on the momentum
/// register, inverse QFT. The randomization gates are relabeled so that
/// momentum `p` receives `circuit_phase_oracle(rcs, p)`.
pub fn build_isrm_circuit(alpha: &Alpha, rcs: &RandomCircuitSpec) -> Result<Circuit> {
    let n = rcs.n_qubits as usize;
    let spec = MapSpec::deterministic(rcs.n_qubits, *alpha)?;
    let random = build_random_phase_circuit(rcs)?;
    let middle = crate::circuit::relabel(&random.gates, |q| n - 1 - q);
    let mut c = sandwich(&spec, &middle);
    c.counting = CountingMode::Optimized;
    Ok(c)
}

/// Phases of realization `index` of an ISRM spec, from stream
/// `(spec.seed, index)`.
pub fn realization_phases(spec: &MapSpec, index: u64) -> Result<PhaseVector> {
    let symmetric = match spec.variant {
        Variant::IsrmSymmetric => true,
        Variant::IsrmNonSymmetric => false,
        Variant::Deterministic => {
            return Err(Error::InvalidParameter(
                "deterministic spec has no random phases".into(),
            ))
        }
    };
    let mut rng = RngStream::new(spec.seed, index).rng();
    match spec.phase_model {
        PhaseModel::Circuit { n_s } => {
            let rcs = RandomCircuitSpec::random(spec.n_qubits, n_s, &mut rng)?;
            circuit_phases(&rcs)
        }
        model => sample_phases(spec.dim(), &model, symmetric, &mut rng),
    }
}

/// Dense unitary of realization `index`.
pub fn realization_unitary(spec: &MapSpec, index: u64) -> Result<ComplexMatrix> {
    build_isrm_unitary(&realization_phases(spec, index)?, &spec.alpha)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{circuit_unitary, count_gates};
    use crate::linalg::{cis, Representation, C64};
    use crate::map_operator::{build_unitary, kinetic_angle};

    fn rng(seed: u64) -> rand_chacha::ChaCha8Rng {
        RngStream::new(seed, 0).rng()
    }

    #[test]
    fn symmetric_pairing() {
        let v = sample_phases(8, &PhaseModel::Uniform, true, &mut rng(1)).unwrap();
        assert_eq!(v.phi[3], v.phi[5]);
        assert_eq!(v.phi[1], v.phi[7]);
        assert!(v.is_mirror_symmetric());
        assert!(sample_phases(7, &PhaseModel::Uniform, true, &mut rng(1)).is_err());
        let g = sample_phases(64, &PhaseModel::Gaussian { sigma: 0.3 }, true, &mut rng(2)).unwrap();
        assert!(g.is_mirror_symmetric());
    }

    #[test]
    fn uniform_phases_average_out() {
        let mut small = 0;
        for seed in 0..100 {
            let v = sample_phases(1024, &PhaseModel::Uniform, false, &mut rng(seed)).unwrap();
            let m: C64 = v.phi.iter().map(|&p| cis(p)).sum::<C64>() / 1024.0;
            if m.norm() < 0.1 {
                small += 1;
            }
        }
        assert!(small >= 99);
    }

    #[test]
    fn replay_is_identical() {
        let a = sample_phases(32, &PhaseModel::Uniform, false, &mut rng(5)).unwrap();
        let b = sample_phases(32, &PhaseModel::Uniform, false, &mut rng(5)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn realizations_are_uncorrelated() {
        let spec = MapSpec::new(
            10,
            Alpha::rational(1, 3).unwrap(),
            Variant::IsrmNonSymmetric,
            PhaseModel::Uniform,
            9,
        )
        .unwrap();
        let a = realization_phases(&spec, 0).unwrap().phi;
        let b = realization_phases(&spec, 1).unwrap().phi;
        let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
        let (ma, mb) = (mean(&a), mean(&b));
        let cov: f64 = a.iter().zip(&b).map(|(x, y)| (x - ma) * (y - mb)).sum();
        let va: f64 = a.iter().map(|x| (x - ma).powi(2)).sum();
        let vb: f64 = b.iter().map(|y| (y - mb).powi(2)).sum();
        assert!((cov / (va * vb).sqrt()).abs() < 0.1);
    }

    #[test]
    fn isrm_unitary_examples() {
        let zero = PhaseVector {
            phi: vec![0.0; 16],
            symmetric: false,
        };
        let u = build_isrm_unitary(&zero, &Alpha::rational(0, 1).unwrap()).unwrap();
        assert!(u.max_abs_diff(&ComplexMatrix::identity(16, Representation::Momentum)) < 1e-14);

        let spec = MapSpec::deterministic(6, Alpha::golden()).unwrap();
        let kin = PhaseVector {
            phi: (0..64).map(|p| kinetic_angle(p, 64)).collect(),
            symmetric: true,
        };
        assert_eq!(
            build_isrm_unitary(&kin, &spec.alpha).unwrap(),
            build_unitary(&spec).unwrap()
        );

        for n in [4u32, 10] {
            let v = sample_phases(1 << n, &PhaseModel::Uniform, false, &mut rng(n as u64)).unwrap();
            let u = build_isrm_unitary(&v, &Alpha::rational(1, 3).unwrap()).unwrap();
            assert!(u.unitarity_residual() < 1e-10);
        }
    }

    #[test]
    fn diagonal_factor_spectrum_is_the_phases() {
        let v = sample_phases(32, &PhaseModel::Uniform, false, &mut rng(4)).unwrap();
        let u = build_isrm_unitary(&v, &Alpha::rational(0, 1).unwrap()).unwrap();
        let mut got = crate::spectral::eigenphases(&u).unwrap();
        let mut want: Vec<f64> = v.phi.iter().map(|p| p.rem_euclid(TAU)).collect();
        got.sort_by(f64::total_cmp);
        want.sort_by(f64::total_cmp);
        for (a, b) in got.iter().zip(&want) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn random_circuit_size_and_diagonality() {
        let rcs = RandomCircuitSpec::random(3, 5, &mut rng(3)).unwrap();
        assert_eq!(build_random_phase_circuit(&rcs).unwrap().len(), 3 + 3 * 5);
        for seed in 0..100 {
            let mut r = rng(seed);
            let n_q = r.random_range(2..=6u32);
            let n_s = r.random_range(1..=64usize);
            let rcs = RandomCircuitSpec::random(n_q, n_s, &mut r).unwrap();
            let c = build_random_phase_circuit(&rcs).unwrap();
            assert_eq!(c.len(), 3 * n_s + n_q as usize);
            let m = circuit_unitary(&c).unwrap();
            let dim = m.dim();
            let mut off = 0.0f64;
            for i in 0..dim {
                for j in 0..dim {
                    if i != j {
                        off = off.max(m.get(i, j).norm());
                    }
                }
            }
            assert!(off < 1e-12);
            let ref0 = m.get(0, 0);
            for x in 0..dim {
                let rel = (m.get(x, x) / ref0).arg().rem_euclid(TAU);
                let oracle = circuit_phase_oracle(&rcs, x).unwrap();
                let d = (rel - oracle).rem_euclid(TAU);
                assert!(d.min(TAU - d) < 1e-10, "seed {seed} state {x}");
            }
        }
    }

    #[test]
    fn oracle_without_cnots() {
        let rcs = RandomCircuitSpec {
            n_qubits: 3,
            phi: vec![0.1, 0.2, 0.4],
            phi_prime: vec![],
            pairs: vec![],
        };
        assert_eq!(circuit_phase_oracle(&rcs, 0).unwrap(), 0.0);
        let x = circuit_phase_oracle(&rcs, 0b101).unwrap();
        assert!((x - (-0.5f64).rem_euclid(TAU)).abs() < 1e-12);
    }

    #[test]
    fn isrm_circuit_counts_and_matrix() {
        for n_q in 2..=12u32 {
            for n_s in [4usize, 8, 16] {
                let rcs = RandomCircuitSpec::random(n_q, n_s, &mut rng(n_q as u64)).unwrap();
                let k = count_gates(&build_isrm_circuit(&Alpha::rational(1, 3).unwrap(), &rcs).unwrap());
                let n = n_q as usize;
                assert_eq!(k.two_qubit, n * n - n + 2 * n_s);
                assert_eq!(k.one_qubit, 4 * n + n_s);
            }
        }
        let rcs = RandomCircuitSpec::random(5, 12, &mut rng(8)).unwrap();
        let alpha = Alpha::rational(1, 5).unwrap();
        let c = circuit_unitary(&build_isrm_circuit(&alpha, &rcs).unwrap()).unwrap();
        let m = build_isrm_unitary(&circuit_phases(&rcs).unwrap(), &alpha)
            .unwrap()
            .to_representation(Representation::Position)
            .unwrap();
        assert!(c.max_abs_diff_up_to_phase(&m) < 1e-9);
    }

    #[test]
    fn realization_dispatch() {
        let det = MapSpec::deterministic(4, Alpha::golden()).unwrap();
        assert!(realization_phases(&det, 0).is_err());
        let sym = MapSpec::new(4, Alpha::golden(), Variant::IsrmSymmetric, PhaseModel::Uniform, 1).unwrap();
        assert!(realization_phases(&sym, 3).unwrap().is_mirror_symmetric());
        let circ = MapSpec::new(
            4,
            Alpha::golden(),
            Variant::IsrmNonSymmetric,
            PhaseModel::Circuit { n_s: 6 },
            1,
        )
        .unwrap();
        assert_eq!(
            realization_phases(&circ, 0).unwrap(),
            realization_phases(&circ, 0).unwrap()
        );
        assert!(MapSpec::new(
            4,
            Alpha::golden(),
            Variant::IsrmSymmetric,
            PhaseModel::Circuit { n_s: 6 },
            1
        )
        .is_err());
    }
}
