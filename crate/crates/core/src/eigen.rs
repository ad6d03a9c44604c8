//! Eigen-decomposition of dense unitaries.
//!
//! The default route is a Cayley transform: for unitary `V = e^{iφ}U`, the
//! matrix `H = i (I + V)^{-1} (I - V)` is Hermitian with eigenvalues
//! `tan(ψ/2)` and the same eigenvectors, so a Hermitian solver gives an
//! orthonormal basis. The shift `φ` keeps `-1` away from the spectrum.
//! The general complex EVD is kept as a fallback and as an independent check.

use std::f64::consts::{PI, TAU};

use faer::diag::Diag;
use faer::dyn_stack::{MemBuffer, MemStack};
use faer::linalg::evd::{self, ComputeEigenvectors};
use faer::linalg::lu::partial_pivoting::{factor, solve};
use faer::{Mat, Par};

use crate::error::{Error, Result};
use crate::linalg::{cis, ComplexMatrix, C64, ONE, ZERO};

/// Largest accepted `max |U†U - I|` on input.
pub const UNITARITY_TOL: f64 = 1e-8;
/// Largest accepted `‖U v - e^{iθ} v‖` per eigenvector.
pub const RESIDUAL_TOL: f64 = 1e-7;

const INITIAL_SHIFT: f64 = std::f64::consts::FRAC_1_PI;

/// Eigenphases in `[0, 2π)` (sorted) and optionally the eigenvector columns.
#[derive(Clone, Debug)]
pub struct Decomposition {
    pub phases: Vec<f64>,
    pub vectors: Option<Mat<C64>>,
    pub max_residual: f64,
}

fn wrap(theta: f64) -> f64 {
    let t = theta.rem_euclid(TAU);
    if t >= TAU {
        0.0
    } else {
        t
    }
}

/// `H = i (I + e^{iφ}U)^{-1} (I - e^{iφ}U)`, symmetrized.
fn cayley(u: &Mat<C64>, shift: f64) -> Result<Mat<C64>> {
    let n = u.nrows();
    let e = cis(shift);
    let mut a = Mat::<C64>::from_fn(n, n, |i, j| {
        let v = u[(i, j)] * e;
        if i == j {
            ONE + v
        } else {
            v
        }
    });
    let mut b = Mat::<C64>::from_fn(n, n, |i, j| {
        let v = -u[(i, j)] * e;
        if i == j {
            ONE + v
        } else {
            v
        }
    });
    let par = Par::Seq;
    let mut perm = vec![0usize; n];
    let mut perm_inv = vec![0usize; n];
    let mut buf = MemBuffer::new(
        factor::lu_in_place_scratch::<usize, C64>(n, n, par, Default::default())
            .or(solve::solve_in_place_scratch::<usize, C64>(n, n, par)),
    );
    let stack = MemStack::new(&mut buf);
    let (_, p) = factor::lu_in_place(a.as_mut(), &mut perm, &mut perm_inv, par, stack, Default::default());
    let pivot = (0..n).map(|k| a[(k, k)].norm()).fold(f64::INFINITY, f64::min);
    if !(pivot > 1e-13) {
        return Err(Error::Eigen {
            message: format!("Cayley factor singular at shift {shift}"),
            residual: pivot,
        });
    }
    solve::solve_in_place(a.as_ref(), a.as_ref(), p, b.as_mut(), par, stack);
    let i = C64::new(0.0, 1.0);
    Ok(Mat::from_fn(n, n, |r, c| {
        (i * b[(r, c)] + (i * b[(c, r)]).conj()) * 0.5
    }))
}

fn hermitian_evd(h: &Mat<C64>, vectors: bool) -> Result<(Vec<f64>, Option<Mat<C64>>)> {
    let n = h.nrows();
    let par = Par::Seq;
    let flag = if vectors {
        ComputeEigenvectors::Yes
    } else {
        ComputeEigenvectors::No
    };
    let mut s = Diag::<C64>::zeros(n);
    let mut v = vectors.then(|| Mat::<C64>::zeros(n, n));
    let mut buf = MemBuffer::new(evd::self_adjoint_evd_scratch::<C64>(n, flag, par, Default::default()));
    evd::self_adjoint_evd(
        h.as_ref(),
        s.as_mut(),
        v.as_mut().map(|m| m.as_mut()),
        par,
        MemStack::new(&mut buf),
        Default::default(),
    )
    .map_err(|e| Error::Eigen {
        message: format!("Hermitian solver: {e:?}"),
        residual: f64::NAN,
    })?;
    let lambdas = (0..n).map(|k| s[k].re).collect();
    Ok((lambdas, v))
}

/// Midpoint of the widest gap between consecutive phases, as a shift that
/// moves it onto `-1`.
fn shift_for_widest_gap(phases: &[f64]) -> f64 {
    let mut sorted: Vec<f64> = phases.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    let mut best = (sorted[0] + TAU - sorted[n - 1], sorted[n - 1]);
    for k in 1..n {
        let gap = sorted[k] - sorted[k - 1];
        if gap > best.0 {
            best = (gap, sorted[k - 1]);
        }
    }
    let mid = best.1 + best.0 / 2.0;
    PI - mid
}

fn closest_to_minus_one(phases: &[f64], shift: f64) -> f64 {
    phases
        .iter()
        .map(|&t| (wrap(t + shift) - PI).abs())
        .fold(f64::INFINITY, f64::min)
}

/// Rayleigh-quotient phases and per-column residuals `‖U v - e^{iθ} v‖`.
fn refine(u: &Mat<C64>, v: &Mat<C64>) -> (Vec<f64>, f64) {
    let n = u.nrows();
    let mut uv = Mat::<C64>::zeros(n, n);
    faer::linalg::matmul::matmul(uv.as_mut(), faer::Accum::Replace, u.as_ref(), v.as_ref(), ONE, Par::Seq);
    let mut phases = Vec::with_capacity(n);
    let mut worst = 0.0f64;
    for k in 0..n {
        let vk = v.col_as_slice(k);
        let wk = uv.col_as_slice(k);
        let rq: C64 = vk.iter().zip(wk).map(|(a, b)| a.conj() * b).sum();
        let theta = wrap(rq.arg());
        let lam = cis(theta);
        let res = vk
            .iter()
            .zip(wk)
            .map(|(a, b)| (b - a * lam).norm_sqr())
            .sum::<f64>()
            .sqrt();
        worst = worst.max(res);
        phases.push(theta);
    }
    (phases, worst)
}

fn sort_by_phase(phases: Vec<f64>, vectors: Option<Mat<C64>>, max_residual: f64) -> Decomposition {
    let mut order: Vec<usize> = (0..phases.len()).collect();
    order.sort_by(|&a, &b| phases[a].total_cmp(&phases[b]));
    let sorted: Vec<f64> = order.iter().map(|&k| phases[k]).collect();
    let vectors = vectors.map(|v| Mat::from_fn(v.nrows(), v.ncols(), |i, j| v[(i, order[j])]));
    Decomposition {
        phases: sorted,
        vectors,
        max_residual,
    }
}

fn cayley_decomposition(u: &Mat<C64>, vectors: bool) -> Result<Decomposition> {
    let n = u.nrows();
    let mut shift = INITIAL_SHIFT;
    for attempt in 0..2 {
        let h = match cayley(u, shift) {
            Ok(h) => h,
            Err(e) if attempt == 0 => {
                log::debug!("{e}; retrying with a new shift");
                shift += PI / n as f64;
                continue;
            }
            Err(e) => return Err(e),
        };
        let (lambdas, v) = hermitian_evd(&h, vectors)?;
        let phases: Vec<f64> = lambdas.iter().map(|&l| wrap(2.0 * l.atan() - shift)).collect();
        // The transform loses accuracy for eigenvalues near -1.
        let margin = closest_to_minus_one(&phases, shift);
        if attempt == 0 && margin < 1e-3 / n as f64 {
            shift = shift_for_widest_gap(&phases);
            continue;
        }
        return Ok(match v {
            Some(v) => {
                let (refined, res) = refine(u, &v);
                sort_by_phase(refined, Some(v), res)
            }
            None => sort_by_phase(phases, None, f64::NAN),
        });
    }
    Err(Error::Eigen {
        message: "Cayley route failed".into(),
        residual: f64::NAN,
    })
}

/// General complex EVD, no Hermitian structure assumed.
pub fn general_decomposition(u: &ComplexMatrix, vectors: bool) -> Result<Decomposition> {
    let m = u.as_mat();
    let n = m.nrows();
    let par = Par::Seq;
    let flag = if vectors {
        ComputeEigenvectors::Yes
    } else {
        ComputeEigenvectors::No
    };
    let mut s = Diag::<C64>::zeros(n);
    let mut v = vectors.then(|| Mat::<C64>::zeros(n, n));
    let mut buf = MemBuffer::new(evd::evd_scratch::<C64>(
        n,
        ComputeEigenvectors::No,
        flag,
        par,
        Default::default(),
    ));
    evd::evd_cplx(
        m.as_ref(),
        s.as_mut(),
        None,
        v.as_mut().map(|x| x.as_mut()),
        par,
        MemStack::new(&mut buf),
        Default::default(),
    )
    .map_err(|e| Error::Eigen {
        message: format!("general solver: {e:?}"),
        residual: f64::NAN,
    })?;
    let phases: Vec<f64> = (0..n).map(|k| wrap(s[k].arg())).collect();
    Ok(match v {
        Some(mut v) => {
            for k in 0..n {
                let col = v.col_as_slice_mut(k);
                let norm = col.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
                for x in col.iter_mut() {
                    *x /= norm;
                }
            }
            let (refined, res) = refine(m, &v);
            sort_by_phase(refined, Some(v), res)
        }
        None => sort_by_phase(phases, None, f64::NAN),
    })
}

/// Decompose a unitary; Cayley route with general-EVD fallback.
pub fn decompose(u: &ComplexMatrix, vectors: bool) -> Result<Decomposition> {
    let n = u.dim();
    if n == 0 {
        return Err(Error::EmptySample);
    }
    let residual = u.unitarity_residual();
    if !(residual < UNITARITY_TOL) {
        return Err(Error::NotUnitary { residual });
    }
    if n == 1 {
        let z = u.get(0, 0);
        return Ok(Decomposition {
            phases: vec![wrap(z.arg())],
            vectors: vectors.then(|| Mat::from_fn(1, 1, |_, _| ONE)),
            max_residual: 0.0,
        });
    }
    match cayley_decomposition(u.as_mat(), vectors) {
        Ok(d) if !vectors || d.max_residual < RESIDUAL_TOL => Ok(d),
        Ok(d) => {
            log::warn!("Cayley residual {:e} too large, using general EVD", d.max_residual);
            checked(general_decomposition(u, vectors)?)
        }
        Err(e) => {
            log::warn!("{e}; using general EVD");
            checked(general_decomposition(u, vectors)?)
        }
    }
}

fn checked(d: Decomposition) -> Result<Decomposition> {
    if d.vectors.is_some() && !(d.max_residual < RESIDUAL_TOL) {
        return Err(Error::Eigen {
            message: "eigenvector residual above tolerance".into(),
            residual: d.max_residual,
        });
    }
    Ok(d)
}

/// Max modulus of `V†V - I`.
pub fn orthonormality_defect(v: &Mat<C64>) -> f64 {
    let n = v.ncols();
    let mut g = Mat::<C64>::zeros(n, n);
    faer::linalg::matmul::matmul(g.as_mut(), faer::Accum::Replace, v.adjoint(), v.as_ref(), ONE, Par::Seq);
    let mut worst = 0.0f64;
    for j in 0..n {
        for i in 0..n {
            let d = g[(i, j)] - if i == j { ONE } else { ZERO };
            worst = worst.max(d.norm());
        }
    }
    worst
}
