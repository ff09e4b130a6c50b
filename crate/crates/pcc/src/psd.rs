//! Positive-semidefiniteness checks and the 3x3 validity machinery.
//!
//! A unit-diagonal matrix assembled entry-by-entry from pairwise sign
//! estimates is not automatically a valid covariance matrix: beyond three
//! real (two complex) channels it can acquire a negative eigenvalue.  This
//! module provides the eigenvalue evidence for that statement and the
//! analytic pieces that prove the small-p cases:
//!
//! - a dependency-free cyclic Jacobi eigensolver for real-symmetric
//!   matrices, with Hermitian input handled through the real 2p x 2p
//!   embedding `[[A, -B], [B, A]]`;
//! - [`check_psd`], producing a [`PsdReport`] verdict at a configurable
//!   tolerance;
//! - [`valid_range_3x3`] (the determinant-derived interval of admissible
//!   r23 given r12, r13) and [`sign_range`] (the attainable interval of
//!   rs23 given rs12, rs13 at finite N);
//! - [`identity_check`], the exact sine identities showing the sine map
//!   carries the attainable sign-correlation range precisely onto the
//!   admissible correlation range — which is why p = 3 never fails;
//! - [`canonical_pack`], the strip reordering that left-packs agreement
//!   positions and exhibits those attainable ranges geometrically.
//!
//! Jacobi was chosen over an external solver because the matrices are tiny
//! (p rarely above 32), the results must be bit-stable across platforms,
//! and the enumeration hot loop needs an allocation-free in-place kernel.

use std::f64::consts::FRAC_PI_2;

use crate::error::{Error, Result};
use crate::estimator::{CorrMatrix, Mode, HERMITIAN_TOLERANCE};
use crate::signs::{self, SignSequence};

/// Default absolute tolerance for PSD verdicts.  Eigenvalues of
/// unit-diagonal matrices are O(1) and the canonical counterexample dips to
/// about -0.414, eight orders of magnitude beyond this.
pub const DEFAULT_TOLERANCE: f64 = 1e-9;

/// Jacobi sweeps are capped defensively; quadratic convergence reaches the
/// off-diagonal threshold in well under ten sweeps for p <= 32.
const MAX_SWEEPS: usize = 64;

/// Eigenvalue evidence for a PSD verdict.
#[derive(Debug, Clone, PartialEq)]
pub struct PsdReport {
    /// All eigenvalues, ascending.
    pub eigenvalues: Vec<f64>,
    /// Smallest eigenvalue (`eigenvalues[0]`).
    pub min_eig: f64,
    /// `min_eig >= -tolerance`.
    pub is_psd: bool,
    /// The absolute tolerance the verdict was taken at.
    pub tolerance: f64,
}

/// The strip ("packed positions") canonical form of a set of sign
/// sequences: samples permuted so agreements with channel 0 form
/// contiguous strips, plus the strip fractions themselves.
#[derive(Debug, Clone, PartialEq)]
pub struct StripModel {
    /// `a[i] = (1 + sign_corr(seq0, seq_i)) / 2`, the fraction of positions
    /// where channel i agrees with channel 0; `a[0] = 1`.
    pub a: Vec<f64>,
    /// The input sequences under the canonical sample permutation.  The
    /// permutation is shared by all channels, so every pairwise sign
    /// correlation — and hence the PCC matrix — is unchanged.
    pub reordered: Vec<SignSequence>,
}

/// Reusable scratch for the in-place Jacobi kernel.  The enumeration hot
/// loop owns one per worker and refills the matrix buffer per
/// configuration; the public eigvals functions allocate one per call.
pub(crate) struct JacobiWork {
    a: Vec<f64>,
    evals: Vec<f64>,
}

impl JacobiWork {
    pub(crate) fn new(dim_cap: usize) -> Self {
        Self {
            a: vec![0.0; dim_cap * dim_cap],
            evals: vec![0.0; dim_cap],
        }
    }

    /// Row-major matrix buffer for a `dim x dim` problem.  The caller fills
    /// it (symmetrically) before calling [`Self::solve`].
    pub(crate) fn matrix_mut(&mut self, dim: usize) -> &mut [f64] {
        &mut self.a[..dim * dim]
    }

    /// Runs cyclic Jacobi sweeps in place and returns the eigenvalues of
    /// the current buffer contents, sorted ascending.  Destroys the buffer.
    pub(crate) fn solve(&mut self, dim: usize) -> Result<&[f64]> {
        let a = &mut self.a[..dim * dim];
        if dim == 1 {
            self.evals[0] = a[0];
            return Ok(&self.evals[..1]);
        }
        // Terminate when the off-diagonal Frobenius norm drops below
        // 1e-14 * dim; first-order perturbation then bounds each eigenvalue
        // error far below the 1e-9 accuracy contract.
        let threshold_sq = {
            let t = 1e-14 * dim as f64;
            t * t
        };
        let mut converged = false;
        for _sweep in 0..MAX_SWEEPS {
            let mut off_sq = 0.0;
            for i in 0..dim {
                for j in (i + 1)..dim {
                    off_sq += 2.0 * a[i * dim + j] * a[i * dim + j];
                }
            }
            if off_sq <= threshold_sq {
                converged = true;
                break;
            }
            for p in 0..dim - 1 {
                for q in (p + 1)..dim {
                    let apq = a[p * dim + q];
                    if apq == 0.0 {
                        continue;
                    }
                    let app = a[p * dim + p];
                    let aqq = a[q * dim + q];
                    let tau = (aqq - app) / (2.0 * apq);
                    let t = if tau >= 0.0 {
                        1.0 / (tau + (1.0 + tau * tau).sqrt())
                    } else {
                        1.0 / (tau - (1.0 + tau * tau).sqrt())
                    };
                    let c = 1.0 / (1.0 + t * t).sqrt();
                    let s = t * c;
                    for k in 0..dim {
                        if k == p || k == q {
                            continue;
                        }
                        let akp = a[k * dim + p];
                        let akq = a[k * dim + q];
                        let new_kp = c * akp - s * akq;
                        let new_kq = s * akp + c * akq;
                        a[k * dim + p] = new_kp;
                        a[p * dim + k] = new_kp;
                        a[k * dim + q] = new_kq;
                        a[q * dim + k] = new_kq;
                    }
                    a[p * dim + p] = app - t * apq;
                    a[q * dim + q] = aqq + t * apq;
                    a[p * dim + q] = 0.0;
                    a[q * dim + p] = 0.0;
                }
            }
        }
        if !converged {
            return Err(Error::EigConvergence { sweeps: MAX_SWEEPS });
        }
        for i in 0..dim {
            self.evals[i] = a[i * dim + i];
        }
        self.evals[..dim].sort_by(f64::total_cmp);
        Ok(&self.evals[..dim])
    }
}

/// Eigenvalues of a real symmetric correlation matrix, ascending.
///
/// Accepts a matrix of either mode as long as every imaginary part is
/// within `1e-12` of zero; genuinely complex entries are rejected because
/// they make the realified matrix non-symmetric.
pub fn eigvals_sym(m: &CorrMatrix) -> Result<Vec<f64>> {
    let p = m.p();
    for i in 0..p {
        for j in 0..p {
            let im = m.get(i, j).im;
            if im.abs() > HERMITIAN_TOLERANCE {
                return Err(Error::NotHermitian {
                    i,
                    j,
                    defect: im.abs(),
                });
            }
        }
    }
    let mut work = JacobiWork::new(p);
    let buf = work.matrix_mut(p);
    for i in 0..p {
        for j in 0..p {
            buf[i * p + j] = m.get(i, j).re;
        }
    }
    Ok(work.solve(p)?.to_vec())
}

/// Eigenvalues of a Hermitian correlation matrix, ascending.
///
/// Implemented through the real-symmetric embedding `[[A, -B], [B, A]]` of
/// `m = A + jB`, whose spectrum is each eigenvalue of `m` doubled; the
/// doubled values are paired after sorting (indices 0&1, 2&3, ...) and each
/// pair is averaged, which tolerates the pairs splitting by roundoff.
pub fn eigvals_herm(m: &CorrMatrix) -> Result<Vec<f64>> {
    let p = m.p();
    let dim = 2 * p;
    let mut work = JacobiWork::new(dim);
    let buf = work.matrix_mut(dim);
    for i in 0..p {
        for j in 0..p {
            let v = m.get(i, j);
            buf[i * dim + j] = v.re;
            buf[(p + i) * dim + (p + j)] = v.re;
            buf[i * dim + (p + j)] = -v.im;
            buf[(p + i) * dim + j] = v.im;
        }
    }
    let doubled = work.solve(dim)?;
    let mut out = Vec::with_capacity(p);
    for k in 0..p {
        out.push(0.5 * (doubled[2 * k] + doubled[2 * k + 1]));
    }
    Ok(out)
}

/// Eigenvalue-based PSD verdict at an absolute tolerance.
///
/// Real-mode matrices go through the real solver, complex-mode ones through
/// the Hermitian embedding.
pub fn check_psd(m: &CorrMatrix, tolerance: f64) -> Result<PsdReport> {
    if !tolerance.is_finite() || tolerance <= 0.0 {
        return Err(Error::InvalidTolerance { value: tolerance });
    }
    let eigenvalues = match m.mode() {
        Mode::Real => eigvals_sym(m)?,
        Mode::Complex => eigvals_herm(m)?,
    };
    let min_eig = eigenvalues[0];
    Ok(PsdReport {
        is_psd: min_eig >= -tolerance,
        min_eig,
        eigenvalues,
        tolerance,
    })
}

/// Determinant of the unit-diagonal symmetric 3x3 correlation matrix, by
/// cofactor expansion: `1 + 2*r12*r13*r23 - r12^2 - r13^2 - r23^2`.
pub fn det3_corr(r12: f64, r13: f64, r23: f64) -> f64 {
    1.0 + 2.0 * r12 * r13 * r23 - r12 * r12 - r13 * r13 - r23 * r23
}

/// The interval of r23 values keeping the 3x3 unit-diagonal matrix PSD:
///
/// ```text
/// r12*r13 - sqrt((1 - r12^2)(1 - r13^2)) <= r23 <= r12*r13 + sqrt(...)
/// ```
///
/// Any r23 inside makes the matrix PSD, any r23 outside makes it
/// indefinite; the determinant vanishes at both endpoints.
pub fn valid_range_3x3(r12: f64, r13: f64) -> Result<(f64, f64)> {
    for r in [r12, r13] {
        if !r.is_finite() || r.abs() > 1.0 {
            return Err(Error::CorrelationOutOfRange { value: r });
        }
    }
    let product = r12 * r13;
    let root = ((1.0 - r12 * r12) * (1.0 - r13 * r13)).sqrt();
    Ok((product - root, product + root))
}

/// The attainable interval of rs23 given rs12 and rs13 at sample count N:
///
/// ```text
/// |rs12 + rs13| - 1 <= rs23 <= 1 - |rs12 - rs13|
/// ```
///
/// Both endpoints are attained by explicit strip packings.  Inputs must lie
/// on the N-sample quantization grid `{-1 + 2k/N}`; off-grid values are not
/// produced by any length-N sequence pair and are rejected.
pub fn sign_range(rs12: f64, rs13: f64, n: usize) -> Result<(f64, f64)> {
    if n == 0 {
        return Err(Error::EmptyInput);
    }
    for rs in [rs12, rs13] {
        if !rs.is_finite() || rs.abs() > 1.0 {
            return Err(Error::CorrelationOutOfRange { value: rs });
        }
        let steps = (rs + 1.0) * n as f64 / 2.0;
        if (steps - steps.round()).abs() > 1e-9 {
            return Err(Error::OffGrid { value: rs, n });
        }
    }
    Ok(((rs12 + rs13).abs() - 1.0, 1.0 - (rs12 - rs13).abs()))
}

/// Residuals of the exact sine identities tying [`sign_range`] to
/// [`valid_range_3x3`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IdentityResiduals {
    /// `sin((pi/2)(1 - |rs12 - rs13|)) - [r12*r13 + sqrt((1-r12^2)(1-r13^2))]`
    pub hi: f64,
    /// `sin((pi/2)(|rs12 + rs13| - 1)) - [r12*r13 - sqrt((1-r12^2)(1-r13^2))]`
    pub lo: f64,
}

/// Evaluates both sine identities at `(rs12, rs13)`, with
/// `r1i = sin((pi/2) rs1i)`.
///
/// Mathematically both residuals are exactly zero for any inputs in
/// `[-1, 1]` — the sine map sends the attainable sign-correlation endpoints
/// precisely onto the PSD-admissible correlation endpoints, which is the
/// heart of the p = 3 guarantee.  Floating point leaves a few 1e-16.
pub fn identity_check(rs12: f64, rs13: f64) -> Result<IdentityResiduals> {
    for rs in [rs12, rs13] {
        if !rs.is_finite() || rs.abs() > 1.0 {
            return Err(Error::CorrelationOutOfRange { value: rs });
        }
    }
    let r12 = (FRAC_PI_2 * rs12).sin();
    let r13 = (FRAC_PI_2 * rs13).sin();
    let product = r12 * r13;
    let root = ((1.0 - r12 * r12) * (1.0 - r13 * r13)).sqrt();
    Ok(IdentityResiduals {
        hi: (FRAC_PI_2 * (1.0 - (rs12 - rs13).abs())).sin() - (product + root),
        lo: (FRAC_PI_2 * ((rs12 + rs13).abs() - 1.0)).sin() - (product - root),
    })
}

/// Canonical strip packing: permutes samples (identically in every
/// channel) so that positions agreeing with channel 0 form left-packed
/// contiguous strips.
///
/// Samples are stably ordered by their agreement state with channels 1
/// and 2, in the fixed state order
///
/// ```text
/// (agree1, !agree2), (agree1, agree2), (!agree1, agree2), (!agree1, !agree2)
/// ```
///
/// which places channel 1's agreement strip leftmost and channel 2's
/// agreement strip contiguously starting inside it.  For p = 2 the rule
/// degenerates to agreements-first; for p > 3 the ordering key still uses
/// only channels 1 and 2, and the remaining channels follow the same
/// permutation.  A shared permutation never changes any pairwise product,
/// so the PCC matrix of the reordered set equals the original exactly.
pub fn canonical_pack(seqs: &[SignSequence]) -> Result<StripModel> {
    if seqs.len() < 2 {
        return Err(Error::InvalidDimension {
            p: seqs.len(),
            reason: "strip packing needs at least two channels".to_string(),
        });
    }
    let n = seqs[0].n();
    for s in &seqs[1..] {
        if s.n() != n {
            return Err(Error::LengthMismatch {
                left: n,
                right: s.n(),
            });
        }
    }
    let state_key = |i: usize| -> u8 {
        let agree1 = seqs[1].get(i) == seqs[0].get(i);
        let agree2 = if seqs.len() >= 3 {
            seqs[2].get(i) == seqs[0].get(i)
        } else {
            true
        };
        match (agree1, agree2) {
            (true, false) => 0,
            (true, true) => 1,
            (false, true) => 2,
            (false, false) => 3,
        }
    };
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&i| state_key(i));
    let reordered: Vec<SignSequence> = seqs
        .iter()
        .map(|s| {
            let permuted: Vec<i8> = order.iter().map(|&i| s.get(i)).collect();
            SignSequence::pack(&permuted).expect("permutation preserves length >= 1")
        })
        .collect();
    let a: Vec<f64> = seqs
        .iter()
        .map(|s| Ok((1.0 + signs::sign_corr(&seqs[0], s)?) / 2.0))
        .collect::<Result<_>>()?;
    Ok(StripModel { a, reordered })
}
