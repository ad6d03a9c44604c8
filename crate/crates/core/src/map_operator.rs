//! The deterministic map `U = e^{-2iπp̂²/N} e^{2iπαq̂}`: classical step,
//! dense construction, closed-form matrix elements, fast application, the
//! parity symmetry `S = diag((-1)^q)` and desymmetrization.
//!
//! In momentum representation `U = D_kin · C`, where `D_kin = diag(e^{-2iπp²/N})`
//! and `C = W D_α W†` is circulant: `C_{pp'} = c[(p - p') mod N]`.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::linalg::{check_power_of_two, cis, ComplexMatrix, Fourier, Representation, StateVector, C64, ONE, ZERO};
use crate::params::{Alpha, MapSpec, Variant, DEFAULT_DENSE_CAP};
use crate::spectral::EigenSystem;

/// Below this modulus the closed-form denominator is treated as zero.
pub const DEGENERACY_TOL: f64 = 1e-9;

/// One iteration of the classical map on the unit torus.
pub fn classical_step(p: f64, q: f64, alpha: &Alpha) -> (f64, f64) {
    let frac = |x: f64| x - x.floor();
    let p_bar = frac(p + alpha.value());
    let q_bar = frac(q + 2.0 * p_bar);
    (p_bar, q_bar)
}

/// Kinetic phase angle `-2π (p² mod N) / N`.
#[inline]
pub fn kinetic_angle(p: usize, dim: usize) -> f64 {
    let r = (p as u128 * p as u128 % dim as u128) as f64;
    -2.0 * PI * r / dim as f64
}

pub fn kinetic_angles(dim: usize) -> Vec<f64> {
    (0..dim).map(|p| kinetic_angle(p, dim)).collect()
}

/// `e^{2iπαq}` for `q = 0..N`, reduced mod 1 exactly for rational α.
pub fn kick_phases(dim: usize, alpha: &Alpha) -> Vec<C64> {
    (0..dim).map(|q| cis(2.0 * PI * alpha.frac_times(q as u64))).collect()
}

/// First column of the circulant `C = W D_α W†`:
/// `c_k = (1/N) Σ_q e^{2iπkq/N} e^{2iπαq}`.
pub fn kick_circulant_column(dim: usize, alpha: &Alpha) -> Result<Vec<C64>> {
    let fourier = Fourier::new(dim)?;
    let mut c = kick_phases(dim, alpha);
    // W applies e^{+2iπkq/N}/√N; one more 1/√N gives the 1/N.
    fourier.to_momentum(&mut c);
    let s = 1.0 / (dim as f64).sqrt();
    for x in &mut c {
        *x *= s;
    }
    Ok(c)
}

pub(crate) fn check_dense_cap(n_qubits: u32, cap: u32) -> Result<()> {
    if n_qubits > cap {
        return Err(Error::DimensionCap { n_qubits, cap });
    }
    Ok(())
}

/// `diag(e^{iΦ_p}) · W D_α W†` in momentum representation.
pub fn diagonal_times_kick(phases: &[f64], alpha: &Alpha) -> Result<ComplexMatrix> {
    let dim = phases.len();
    let c = kick_circulant_column(dim, alpha)?;
    let d: Vec<C64> = phases.iter().map(|&phi| cis(phi)).collect();
    Ok(ComplexMatrix::from_fn(dim, Representation::Momentum, |p, pp| {
        d[p] * c[(p + dim - pp) % dim]
    }))
}

/// Dense deterministic map in momentum representation, with the default cap.
pub fn build_unitary(spec: &MapSpec) -> Result<ComplexMatrix> {
    build_unitary_capped(spec, DEFAULT_DENSE_CAP)
}

pub fn build_unitary_capped(spec: &MapSpec, cap: u32) -> Result<ComplexMatrix> {
    if spec.variant != Variant::Deterministic {
        return Err(Error::InvalidParameter(format!(
            "build_unitary needs the deterministic variant, got {}",
            spec.variant
        )));
    }
    check_dense_cap(spec.n_qubits, cap)?;
    diagonal_times_kick(&kinetic_angles(spec.dim()), &spec.alpha)
}

/// Matrix element from the geometric-series closed form
///
/// `(1/N) e^{-2iπp'²/N} (1 - e^{2iπNα}) / (1 - e^{2iπ(p - p' + Nα)/N})`.
///
/// The phase sits on the column index, so these are the entries of the
/// kick-first ordering `C · D_kin = D_kin† U D_kin` (same spectrum as `U`).
/// When the denominator vanishes the analytic limit is returned.
pub fn closed_form_element(p: usize, pp: usize, spec: &MapSpec) -> C64 {
    let dim = spec.dim();
    let n = dim as f64;
    let phase = cis(kinetic_angle(pp, dim));
    // Nα mod N, exactly for rational α
    let n_alpha = match spec.alpha {
        Alpha::Rational { num, den } => {
            let r = (num % den) as u128 * dim as u128;
            ((r / den as u128) % dim as u128) as f64 + (r % den as u128) as f64 / den as f64
        }
        Alpha::Real(_) => spec.alpha.value() * n,
    };
    let shift = p as f64 - pp as f64 + n_alpha;
    let denom = ONE - cis(2.0 * PI * shift / n);
    if denom.norm() > DEGENERACY_TOL {
        let numer = ONE - cis(2.0 * PI * spec.alpha.frac_times(dim as u64));
        phase * numer / denom / n
    } else {
        let m = n_alpha.round() as i64;
        let k = (p as i64 - pp as i64 + m).rem_euclid(dim as i64);
        if k == 0 {
            phase
        } else {
            ZERO
        }
    }
}

/// Full matrix of [`closed_form_element`].
pub fn closed_form_matrix(spec: &MapSpec) -> Result<ComplexMatrix> {
    check_dense_cap(spec.n_qubits, DEFAULT_DENSE_CAP)?;
    let dim = spec.dim();
    Ok(ComplexMatrix::from_fn(dim, Representation::Momentum, |p, pp| {
        closed_form_element(p, pp, spec)
    }))
}

/// `D_kin† · U · D_kin`: moves the kinetic phase from rows to columns.
pub fn kick_first_ordering(u: &ComplexMatrix) -> Result<ComplexMatrix> {
    if u.repr() != Representation::Momentum {
        return Err(Error::RepresentationMismatch {
            expected: Representation::Momentum,
            found: u.repr(),
        });
    }
    let dim = u.dim();
    let d: Vec<C64> = (0..dim).map(|p| cis(kinetic_angle(p, dim))).collect();
    Ok(ComplexMatrix::from_fn(dim, Representation::Momentum, |p, pp| {
        d[p].conj() * u.get(p, pp) * d[pp]
    }))
}

fn check_state(psi: &StateVector, spec: &MapSpec) -> Result<()> {
    check_power_of_two(psi.len())?;
    if psi.len() != spec.dim() {
        return Err(Error::DimensionMismatch {
            expected: spec.dim(),
            found: psi.len(),
        });
    }
    if psi.repr() != Representation::Position {
        return Err(Error::RepresentationMismatch {
            expected: Representation::Position,
            found: psi.repr(),
        });
    }
    Ok(())
}

/// `ψ ← W† D_kin W D_α ψ` in `O(N log N)`, on position amplitudes.
pub fn apply_map(psi: &StateVector, spec: &MapSpec) -> Result<StateVector> {
    check_state(psi, spec)?;
    let dim = spec.dim();
    let fourier = Fourier::new(dim)?;
    let kick = kick_phases(dim, &spec.alpha);
    let mut amps: Vec<C64> = psi.amplitudes().iter().zip(&kick).map(|(a, k)| a * k).collect();
    fourier.to_momentum(&mut amps);
    for (p, a) in amps.iter_mut().enumerate() {
        *a *= cis(kinetic_angle(p, dim));
    }
    fourier.to_position(&mut amps);
    Ok(StateVector::new(amps, Representation::Position))
}

/// `ψ ← U† ψ`, the exact inverse of [`apply_map`].
pub fn apply_map_inverse(psi: &StateVector, spec: &MapSpec) -> Result<StateVector> {
    check_state(psi, spec)?;
    let dim = spec.dim();
    let fourier = Fourier::new(dim)?;
    let mut amps = psi.amplitudes().to_vec();
    fourier.to_momentum(&mut amps);
    for (p, a) in amps.iter_mut().enumerate() {
        *a *= cis(-kinetic_angle(p, dim));
    }
    fourier.to_position(&mut amps);
    for (a, k) in amps.iter_mut().zip(kick_phases(dim, &spec.alpha)) {
        *a *= k.conj();
    }
    Ok(StateVector::new(amps, Representation::Position))
}

/// `S = diag((-1)^q)` in position representation.
pub fn build_symmetry_s(dim: usize) -> ComplexMatrix {
    let d: Vec<C64> = (0..dim).map(|q| if q % 2 == 0 { ONE } else { -ONE }).collect();
    ComplexMatrix::diagonal(&d, Representation::Position)
}

/// `max |US − SU|`. Only entries coupling opposite parities contribute.
pub fn parity_commutator(u: &ComplexMatrix) -> f64 {
    let n = u.dim();
    let mut worst = 0.0f64;
    for j in 0..n {
        for (i, v) in u.column_slice(j).iter().enumerate() {
            if (i ^ j) & 1 == 1 {
                worst = worst.max(2.0 * v.norm());
            }
        }
    }
    worst
}

/// The two parity blocks of an operator commuting with `S`.
#[derive(Clone, Debug)]
pub struct SymmetryBlocks {
    /// `U` restricted to even `q` (S = +1).
    pub even: ComplexMatrix,
    /// `U` restricted to odd `q` (S = −1).
    pub odd: ComplexMatrix,
    pub even_indices: Vec<usize>,
    pub odd_indices: Vec<usize>,
}

/// Largest `|US − SU|` accepted by [`desymmetrize`].
pub const SYMMETRY_TOL: f64 = 1e-8;

/// Split a position-representation operator into its S-parity blocks.
/// Block index `m` corresponds to `q = 2m` (even) or `q = 2m + 1` (odd).
pub fn desymmetrize(u: &ComplexMatrix) -> Result<SymmetryBlocks> {
    if u.repr() != Representation::Position {
        return Err(Error::RepresentationMismatch {
            expected: Representation::Position,
            found: u.repr(),
        });
    }
    let n = u.dim();
    if !n.is_multiple_of(4) {
        return Err(Error::InvalidParameter(format!(
            "desymmetrization needs N ≡ 0 (mod 4), got N = {n}"
        )));
    }
    let commutator = parity_commutator(u);
    if commutator >= SYMMETRY_TOL {
        return Err(Error::SymmetryViolation { commutator });
    }
    let even_indices: Vec<usize> = (0..n).step_by(2).collect();
    let odd_indices: Vec<usize> = (1..n).step_by(2).collect();
    let restrict =
        |idx: &[usize]| ComplexMatrix::from_fn(idx.len(), Representation::Position, |a, b| u.get(idx[a], idx[b]));
    Ok(SymmetryBlocks {
        even: restrict(&even_indices),
        odd: restrict(&odd_indices),
        even_indices,
        odd_indices,
    })
}

/// Column `column` of `Uⁿ` via the eigendecomposition, `V e^{inθ} V† e_column`.
pub fn matrix_power_apply(eig: &EigenSystem, n: u64, column: usize) -> Result<StateVector> {
    let v = eig.vectors()?;
    let dim = v.dim();
    if column >= dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: column,
        });
    }
    let weights: Vec<C64> = eig
        .phases
        .iter()
        .enumerate()
        .map(|(k, &theta)| eig.power_phase(theta, n) * v.get(column, k).conj())
        .collect();
    let mut out = vec![ZERO; dim];
    for (k, w) in weights.iter().enumerate() {
        for (o, x) in out.iter_mut().zip(v.column_slice(k)) {
            *o += x * w;
        }
    }
    Ok(StateVector::new(out, v.repr()))
}

/// Full `Uⁿ = V diag(e^{inθ}) V†`.
pub fn matrix_power(eig: &EigenSystem, n: u64) -> Result<ComplexMatrix> {
    let v = eig.vectors()?;
    let dim = v.dim();
    let mut scaled = v.clone();
    for k in 0..dim {
        let f = eig.power_phase(eig.phases[k], n);
        for i in 0..dim {
            let x = scaled.get(i, k);
            scaled.set(i, k, x * f);
        }
    }
    scaled.matmul(&v.adjoint())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::dense_fourier;
    use crate::spectral::eigensystem;

    fn spec(n: u32, alpha: Alpha) -> MapSpec {
        MapSpec::deterministic(n, alpha).unwrap()
    }

    fn third() -> Alpha {
        Alpha::rational(1, 3).unwrap()
    }

    /// Oracle: D_kin · W · D_α · W† by explicit dense products.
    fn dense_oracle(spec: &MapSpec) -> ComplexMatrix {
        let n = spec.dim();
        let w = dense_fourier(n);
        let kin: Vec<C64> = (0..n).map(|p| cis(-2.0 * PI * (p * p) as f64 / n as f64)).collect();
        let kick: Vec<C64> = (0..n).map(|q| cis(2.0 * PI * spec.alpha.value() * q as f64)).collect();
        let dk = ComplexMatrix::diagonal(&kin, Representation::Momentum);
        let da = ComplexMatrix::diagonal(&kick, Representation::Momentum);
        dk.matmul(&w)
            .unwrap()
            .matmul(&da)
            .unwrap()
            .matmul(&w.adjoint())
            .unwrap()
    }

    #[test]
    fn classical_examples() {
        let (p, q) = classical_step(0.2, 0.3, &Alpha::rational(1, 2).unwrap());
        assert!((p - 0.7).abs() < 1e-15 && (q - 0.7).abs() < 1e-15);
        assert_eq!(classical_step(0.0, 0.0, &Alpha::rational(0, 1).unwrap()), (0.0, 0.0));
        let (p, q) = classical_step(0.9, 0.9, &third());
        assert!((p - 0.233_333_333_333_333_3).abs() < 1e-12);
        assert!((q - 0.366_666_666_666_666_6).abs() < 1e-12);
    }

    #[test]
    fn one_qubit_alpha_zero_is_kinetic_diagonal() {
        let u = build_unitary(&spec(1, Alpha::rational(0, 1).unwrap())).unwrap();
        assert!((u.get(0, 0) - ONE).norm() < 1e-15);
        assert!((u.get(1, 1) + ONE).norm() < 1e-15);
        assert!(u.get(0, 1).norm() < 1e-15 && u.get(1, 0).norm() < 1e-15);
    }

    #[test]
    fn half_kick_is_momentum_shift() {
        let s = spec(2, Alpha::rational(1, 2).unwrap());
        let u = build_unitary(&s).unwrap();
        for p in 0..4 {
            for pp in 0..4 {
                let expected = if p == (pp + 2) % 4 {
                    cis(-2.0 * PI * (pp * pp) as f64 / 4.0)
                } else {
                    ZERO
                };
                assert!((u.get(p, pp) - expected).norm() < 1e-12, "({p},{pp})");
            }
        }
        assert!(u.max_abs_diff(&dense_oracle(&s)) < 1e-12);
    }

    #[test]
    fn construction_matches_dense_oracle() {
        for n in 2..=7 {
            for alpha in [third(), Alpha::rational(1, 5).unwrap(), Alpha::golden()] {
                let s = spec(n, alpha);
                let u = build_unitary(&s).unwrap();
                assert!(u.max_abs_diff(&dense_oracle(&s)) < 1e-11, "n={n} alpha={alpha}");
                assert!(u.unitarity_residual() < 1e-10);
            }
        }
    }

    #[test]
    fn closed_form_matches_kick_first_conjugate() {
        for n in 2..=8 {
            for alpha in [
                third(),
                Alpha::rational(1, 5).unwrap(),
                Alpha::golden(),
                Alpha::rational(1, 2).unwrap(),
            ] {
                let s = spec(n, alpha);
                let reference = kick_first_ordering(&build_unitary(&s).unwrap()).unwrap();
                let closed = closed_form_matrix(&s).unwrap();
                assert!(closed.max_abs_diff(&reference) < 1e-10, "n={n} alpha={alpha}");
            }
        }
    }

    #[test]
    fn closed_form_degenerate_limit() {
        let s = spec(2, Alpha::rational(1, 2).unwrap());
        assert!((closed_form_element(0, 2, &s) - ONE).norm() < 1e-15);
        assert_eq!(closed_form_element(0, 1, &s), ZERO);
        // Nα integer with α = 1/4, N = 8
        let s = spec(3, Alpha::rational(1, 4).unwrap());
        let reference = kick_first_ordering(&build_unitary(&s).unwrap()).unwrap();
        assert!(closed_form_matrix(&s).unwrap().max_abs_diff(&reference) < 1e-12);
    }

    #[test]
    fn representations_agree() {
        let s = spec(6, third());
        let up = build_unitary(&s).unwrap();
        let uq = up.to_representation(Representation::Position).unwrap();
        let w = dense_fourier(s.dim());
        let back = ComplexMatrix::from_mat(
            w.matmul(&ComplexMatrix::from_mat(uq.clone().into_mat(), Representation::Momentum).unwrap())
                .unwrap()
                .matmul(&w.adjoint())
                .unwrap()
                .into_mat(),
            Representation::Momentum,
        )
        .unwrap();
        assert!(back.max_abs_diff(&up) < 1e-10);
    }

    #[test]
    fn apply_map_matches_dense() {
        use rand::Rng;
        let s = spec(8, Alpha::golden());
        let uq = build_unitary(&s)
            .unwrap()
            .to_representation(Representation::Position)
            .unwrap();
        let mut rng = crate::rng::RngStream::new(3, 0).rng();
        let psi = StateVector::new(
            (0..s.dim())
                .map(|_| C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
                .collect(),
            Representation::Position,
        )
        .normalized()
        .unwrap();
        let fast = apply_map(&psi, &s).unwrap();
        let dense = uq.apply(&psi).unwrap();
        assert!(fast.max_abs_diff(&dense) < 1e-9);
        let back = apply_map_inverse(&fast, &s).unwrap();
        assert!(back.max_abs_diff(&psi) < 1e-10);
    }

    #[test]
    fn apply_map_norm_and_identity_case() {
        let s = spec(5, Alpha::rational(0, 1).unwrap());
        let psi = StateVector::uniform(32, Representation::Position);
        let out = apply_map_inverse(&apply_map(&psi, &s).unwrap(), &s).unwrap();
        assert!(out.max_abs_diff(&psi) < 1e-10);
        let s = spec(5, third());
        let e0 = StateVector::basis(32, 0, Representation::Position);
        assert!((apply_map(&e0, &s).unwrap().norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn apply_map_errors() {
        let s = spec(3, third());
        let bad = StateVector::new(vec![ONE; 6], Representation::Position);
        assert!(matches!(apply_map(&bad, &s), Err(Error::NotPowerOfTwo(6))));
        let p = StateVector::basis(8, 0, Representation::Momentum);
        assert!(apply_map(&p, &s).is_err());
    }

    #[test]
    fn symmetry_s() {
        let s = build_symmetry_s(4);
        for (q, sign) in [1.0, -1.0, 1.0, -1.0].iter().enumerate() {
            assert_eq!(s.get(q, q), C64::new(*sign, 0.0));
        }
        assert_eq!(
            s.matmul(&s).unwrap(),
            ComplexMatrix::identity(4, Representation::Position)
        );
        // in momentum representation S is the half shift
        let sp = build_symmetry_s(8).to_representation(Representation::Momentum).unwrap();
        for p in 0..8 {
            for pp in 0..8 {
                let e = if p == (pp + 4) % 8 { ONE } else { ZERO };
                assert!((sp.get(p, pp) - e).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn map_commutes_with_s_when_n_divisible_by_four() {
        for alpha in [third(), Alpha::golden()] {
            let uq = build_unitary(&spec(3, alpha))
                .unwrap()
                .to_representation(Representation::Position)
                .unwrap();
            let s = build_symmetry_s(8);
            let c = uq.matmul(&s).unwrap().max_abs_diff(&s.matmul(&uq).unwrap());
            assert!(c < 1e-10);
            assert!((parity_commutator(&uq) - c).abs() < 1e-12);
        }
    }

    #[test]
    fn desymmetrize_blocks() {
        let uq = build_unitary(&spec(6, third()))
            .unwrap()
            .to_representation(Representation::Position)
            .unwrap();
        let blocks = desymmetrize(&uq).unwrap();
        assert_eq!(blocks.even.dim(), 32);
        assert_eq!(blocks.odd.dim(), 32);
        assert!(blocks.even.unitarity_residual() < 1e-9);
        assert!(blocks.odd.unitarity_residual() < 1e-9);

        let full = eigensystem(&uq).unwrap().phases;
        let mut joined = eigensystem(&blocks.even).unwrap().phases;
        joined.extend(eigensystem(&blocks.odd).unwrap().phases);
        joined.sort_by(f64::total_cmp);
        for (a, b) in full.iter().zip(&joined) {
            assert!((a - b).abs() < 1e-8);
        }
    }

    #[test]
    fn desymmetrize_rejects() {
        let up = build_unitary(&spec(4, third())).unwrap();
        assert!(matches!(desymmetrize(&up), Err(Error::RepresentationMismatch { .. })));
        let mut uq = up.to_representation(Representation::Position).unwrap();
        uq.set(0, 1, C64::new(0.1, 0.0));
        assert!(matches!(desymmetrize(&uq), Err(Error::SymmetryViolation { .. })));
        let small = build_unitary(&spec(1, third()))
            .unwrap()
            .to_representation(Representation::Position)
            .unwrap();
        assert!(desymmetrize(&small).is_err());
    }

    #[test]
    fn powers_via_eigensystem() {
        let s = spec(5, third());
        let u = build_unitary(&s).unwrap();
        let eig = eigensystem(&u).unwrap();
        let e3 = matrix_power_apply(&eig, 0, 3).unwrap();
        assert!(e3.max_abs_diff(&StateVector::basis(32, 3, Representation::Momentum)) < 1e-12);
        let one = matrix_power_apply(&eig, 1, 3).unwrap();
        assert!(one.max_abs_diff(&u.column(3)) < 1e-9);
        // U^16 by four squarings
        let mut sq = u.clone();
        for _ in 0..4 {
            sq = sq.matmul(&sq).unwrap();
        }
        let p16 = matrix_power(&eig, 16).unwrap();
        assert!(p16.max_abs_diff(&sq) < 1e-8);
        assert!(matrix_power_apply(&eig, 16, 7).unwrap().max_abs_diff(&sq.column(7)) < 1e-8);
    }

    #[test]
    fn dense_cap_enforced() {
        let s = spec(13, third());
        assert!(matches!(build_unitary(&s), Err(Error::DimensionCap { .. })));
    }
}
