//! Sine-mapped correlation estimates from sign agreements.
//!
//! For a zero-mean Gaussian pair with correlation `r`, the expected sign
//! agreement satisfies the arcsine relation, so the empirical sign
//! correlation maps back through `sin(pi/2 * rs)` to a consistent estimate
//! of `r`.  Complex signals use the componentwise sign pair and a quarter-
//! angle version of the same map, yielding separate real and imaginary
//! estimates whose sine arguments `alpha`, `beta` always satisfy
//! `|alpha| + |beta| <= pi/2` — which is what keeps every 2x2 (and, less
//! obviously, every real 3x3) estimated matrix positive semidefinite.
//!
//! Full matrices are assembled one pair at a time; the mirrored entry is
//! produced by conjugation rather than recomputation, so Hermitian symmetry
//! is exact by construction, and the diagonal is hard-set to 1.

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::signs::{self, ComplexSignSequence, SignSequence};

/// Hermitian-defect and unit-diagonal tolerance accepted when validating
/// externally supplied matrices.
pub const HERMITIAN_TOLERANCE: f64 = 1e-12;

/// Whether a matrix holds real or complex correlation estimates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Real,
    Complex,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Real => "real",
            Mode::Complex => "complex",
        }
    }
}

/// A p x p correlation matrix with unit diagonal, Hermitian by construction.
///
/// Real-mode matrices keep imaginary parts identically zero.  The lower
/// triangle always mirrors the upper by conjugation; it is never computed
/// separately, so `m[i][j] == conj(m[j][i])` holds bit-for-bit.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrMatrix {
    p: usize,
    mode: Mode,
    entries: Vec<Complex64>,
}

impl CorrMatrix {
    /// Assembles a matrix from a strict-upper-triangle generator.  The
    /// diagonal is set to exactly 1 and the lower triangle to the
    /// conjugate of the upper.
    pub(crate) fn from_upper<F>(p: usize, mode: Mode, mut upper: F) -> Self
    where
        F: FnMut(usize, usize) -> Complex64,
    {
        let mut entries = vec![Complex64::new(0.0, 0.0); p * p];
        for i in 0..p {
            entries[i * p + i] = Complex64::new(1.0, 0.0);
            for j in (i + 1)..p {
                let v = upper(i, j);
                entries[i * p + j] = v;
                entries[j * p + i] = v.conj();
            }
        }
        Self { p, mode, entries }
    }

    /// Validates and canonicalizes an externally supplied matrix (e.g. read
    /// from a file): the diagonal must be within `1e-12` of exactly 1, the
    /// Hermitian defect within `1e-12`, and every off-diagonal modulus at
    /// most `1 + 1e-12`.  The stored matrix is canonical: diagonal exactly
    /// 1, lower triangle conjugate-mirrored from the upper.
    pub fn from_entries(p: usize, mode: Mode, entries: &[Complex64]) -> Result<Self> {
        if p == 0 {
            return Err(Error::InvalidDimension {
                p,
                reason: "matrix must have at least one row".to_string(),
            });
        }
        if entries.len() != p * p {
            return Err(Error::InvalidDimension {
                p,
                reason: format!("expected {} entries, got {}", p * p, entries.len()),
            });
        }
        for (i, e) in entries.iter().enumerate() {
            if !e.re.is_finite() || !e.im.is_finite() {
                return Err(Error::NonFiniteSample { position: i });
            }
        }
        for i in 0..p {
            let d = entries[i * p + i];
            if (d.re - 1.0).abs() > HERMITIAN_TOLERANCE || d.im.abs() > HERMITIAN_TOLERANCE {
                return Err(Error::NotUnitDiagonal { i, value: d.re });
            }
        }
        for i in 0..p {
            for j in (i + 1)..p {
                let defect = (entries[i * p + j] - entries[j * p + i].conj()).norm();
                if defect > HERMITIAN_TOLERANCE {
                    return Err(Error::NotHermitian { i, j, defect });
                }
                let modulus = entries[i * p + j].norm();
                if modulus > 1.0 + HERMITIAN_TOLERANCE {
                    return Err(Error::CorrelationOutOfRange { value: modulus });
                }
                if mode == Mode::Real && entries[i * p + j].im.abs() > HERMITIAN_TOLERANCE {
                    return Err(Error::NotHermitian {
                        i,
                        j,
                        defect: entries[i * p + j].im.abs(),
                    });
                }
            }
        }
        Ok(Self::from_upper(p, mode, |i, j| {
            let mut v = entries[i * p + j];
            if mode == Mode::Real {
                v.im = 0.0;
            }
            v
        }))
    }

    /// Matrix dimension p.
    pub fn p(&self) -> usize {
        self.p
    }

    /// Real or complex mode.
    pub fn mode(&self) -> Mode {
        self.mode
    }

    /// Entry (i, j).  Panics on out-of-range indices.
    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        assert!(
            i < self.p && j < self.p,
            "index ({i}, {j}) out of range for p = {}",
            self.p
        );
        self.entries[i * self.p + j]
    }

    /// Real part of entry (i, j); the whole entry in real mode.
    pub fn get_re(&self, i: usize, j: usize) -> f64 {
        self.get(i, j).re
    }

    /// Row-major entries.
    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }
}

/// The two components of a complex PCC estimate, with the sine arguments
/// that produced them.
///
/// `alpha` and `beta` are the arguments passed to `sin` (already in
/// `[-pi/2, pi/2]`, so they equal the arcsines of `r_re` / `r_im`).  They
/// are recorded directly instead of recovered by `asin`, avoiding a
/// round-trip through inverse trig in the invariant `|alpha| + |beta| <=
/// pi/2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComplexPccPair {
    /// Estimate of the real part of the correlation.
    pub r_re: f64,
    /// Estimate of the imaginary part of the correlation.
    pub r_im: f64,
    /// Sine argument of `r_re`, in radians.
    pub alpha: f64,
    /// Sine argument of `r_im`, in radians.
    pub beta: f64,
}

impl ComplexPccPair {
    /// The estimate as a complex number `r_re + j*r_im`.
    pub fn value(&self) -> Complex64 {
        Complex64::new(self.r_re, self.r_im)
    }
}

/// PCC estimate for a real pair: `sin(pi/2 * sign_corr(a, b))`.
pub fn pcc_real(a: &SignSequence, b: &SignSequence) -> Result<f64> {
    let rs = signs::sign_corr(a, b)?;
    Ok((FRAC_PI_2 * rs).sin())
}

/// PCC estimate for a complex pair.
///
/// With `s_a = sgn_c(x)` and `s_b = sgn_c(y)` componentwise,
///
/// ```text
/// r_re = sin( pi/(4N) * sum_i [ s_aiR*s_biR + s_aiI*s_biI ] )
/// r_im = sin( pi/(4N) * sum_i [ s_aiI*s_biR - s_aiR*s_biI ] )
/// ```
///
/// Both sums are computed exactly from four popcount agreement counts.
pub fn pcc_complex(a: &ComplexSignSequence, b: &ComplexSignSequence) -> Result<ComplexPccPair> {
    if a.n() != b.n() {
        return Err(Error::LengthMismatch {
            left: a.n(),
            right: b.n(),
        });
    }
    let n = a.n() as i64;
    let agree_rr = signs::agreement_count(a.re(), b.re())? as i64;
    let agree_ii = signs::agreement_count(a.im(), b.im())? as i64;
    let agree_ir = signs::agreement_count(a.im(), b.re())? as i64;
    let agree_ri = signs::agreement_count(a.re(), b.im())? as i64;
    // Each sum of N products in {-1,+1} is (2*agreements - N); both combined
    // sums stay within [-2N, 2N], so alpha and beta stay within [-pi/2, pi/2].
    let sum_re = 2 * (agree_rr + agree_ii) - 2 * n;
    let sum_im = 2 * (agree_ir - agree_ri);
    let scale = PI / (4.0 * n as f64);
    let alpha = scale * sum_re as f64;
    let beta = scale * sum_im as f64;
    Ok(ComplexPccPair {
        r_re: alpha.sin(),
        r_im: beta.sin(),
        alpha,
        beta,
    })
}

/// Element-wise PCC correlation matrix for p real channels.
///
/// Each unordered pair is estimated once; the mirror entry is copied, and
/// the diagonal is exactly 1.
pub fn pcc_matrix_real(seqs: &[SignSequence]) -> Result<CorrMatrix> {
    if seqs.is_empty() {
        return Err(Error::EmptyInput);
    }
    for s in &seqs[1..] {
        if s.n() != seqs[0].n() {
            return Err(Error::LengthMismatch {
                left: seqs[0].n(),
                right: s.n(),
            });
        }
    }
    let mut first_err = None;
    let m = CorrMatrix::from_upper(seqs.len(), Mode::Real, |i, j| {
        match pcc_real(&seqs[i], &seqs[j]) {
            Ok(r) => Complex64::new(r, 0.0),
            Err(e) => {
                first_err.get_or_insert(e);
                Complex64::new(0.0, 0.0)
            }
        }
    });
    match first_err {
        Some(e) => Err(e),
        None => Ok(m),
    }
}

/// Element-wise PCC correlation matrix for p complex channels.
pub fn pcc_matrix_complex(seqs: &[ComplexSignSequence]) -> Result<CorrMatrix> {
    if seqs.is_empty() {
        return Err(Error::EmptyInput);
    }
    for s in &seqs[1..] {
        if s.n() != seqs[0].n() {
            return Err(Error::LengthMismatch {
                left: seqs[0].n(),
                right: s.n(),
            });
        }
    }
    let mut first_err = None;
    let m = CorrMatrix::from_upper(seqs.len(), Mode::Complex, |i, j| {
        match pcc_complex(&seqs[i], &seqs[j]) {
            Ok(pair) => pair.value(),
            Err(e) => {
                first_err.get_or_insert(e);
                Complex64::new(0.0, 0.0)
            }
        }
    });
    match first_err {
        Some(e) => Err(e),
        None => Ok(m),
    }
}

/// Classical (Pearson) sample correlation matrix for p real channels,
/// rows = channels.  The baseline the PCC estimate is compared against.
pub fn sample_corr_real(channels: &[Vec<f64>]) -> Result<CorrMatrix> {
    let stats = centered_stats(channels, |&x| Complex64::new(x, 0.0))?;
    Ok(CorrMatrix::from_upper(
        channels.len(),
        Mode::Real,
        |i, j| Complex64::new(cross_corr(&stats[i], &stats[j]).re, 0.0),
    ))
}

/// Classical sample correlation matrix for p complex channels.  Entry
/// (i, j) is `sum (x_i - mean_i) * conj(x_j - mean_j)` normalized by the
/// two channel deviations.
pub fn sample_corr_complex(channels: &[Vec<Complex64>]) -> Result<CorrMatrix> {
    let stats = centered_stats(channels, |&z| z)?;
    Ok(CorrMatrix::from_upper(
        channels.len(),
        Mode::Complex,
        |i, j| cross_corr(&stats[i], &stats[j]),
    ))
}

/// A mean-centered channel and its sum of squared deviations.
struct CenteredChannel {
    deviations: Vec<Complex64>,
    sum_sq: f64,
}

fn centered_stats<T, F>(channels: &[Vec<T>], to_complex: F) -> Result<Vec<CenteredChannel>>
where
    F: Fn(&T) -> Complex64,
{
    if channels.is_empty() {
        return Err(Error::EmptyInput);
    }
    let n = channels[0].len();
    if n < 2 {
        return Err(Error::EmptyInput);
    }
    for ch in &channels[1..] {
        if ch.len() != n {
            return Err(Error::LengthMismatch {
                left: n,
                right: ch.len(),
            });
        }
    }
    let mut out = Vec::with_capacity(channels.len());
    for (c, ch) in channels.iter().enumerate() {
        let values: Vec<Complex64> = ch.iter().map(&to_complex).collect();
        for (i, v) in values.iter().enumerate() {
            if !v.re.is_finite() || !v.im.is_finite() {
                return Err(Error::NonFiniteSample { position: i });
            }
        }
        let mean = values.iter().sum::<Complex64>() / n as f64;
        let deviations: Vec<Complex64> = values.iter().map(|v| v - mean).collect();
        let sum_sq: f64 = deviations.iter().map(|d| d.norm_sqr()).sum();
        if sum_sq == 0.0 {
            return Err(Error::ZeroVariance { channel: c });
        }
        out.push(CenteredChannel { deviations, sum_sq });
    }
    Ok(out)
}

fn cross_corr(a: &CenteredChannel, b: &CenteredChannel) -> Complex64 {
    let cross: Complex64 = a
        .deviations
        .iter()
        .zip(&b.deviations)
        .map(|(x, y)| x * y.conj())
        .sum();
    cross / (a.sum_sq * b.sum_sq).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signs::{ComplexSignSequence, SignSequence};

    const SIN_QUARTER_PI: f64 = std::f64::consts::FRAC_1_SQRT_2;

    fn reference_real_seqs() -> Vec<SignSequence> {
        ["++++", "++--", "+++-", "++-+"]
            .iter()
            .map(|p| SignSequence::from_pattern(p).unwrap())
            .collect()
    }

    fn reference_complex_seqs() -> Vec<ComplexSignSequence> {
        ["++ ++", "++ -+", "++ --"]
            .iter()
            .map(|p| ComplexSignSequence::from_pattern(p).unwrap())
            .collect()
    }

    /// All 4^n complex sign sequences of length n, in no particular order.
    fn all_complex_seqs(n: usize) -> Vec<ComplexSignSequence> {
        let mut out = Vec::with_capacity(1 << (2 * n));
        for code in 0..(1u32 << (2 * n)) {
            let mut re = Vec::with_capacity(n);
            let mut im = Vec::with_capacity(n);
            for s in 0..n {
                re.push(if code >> (2 * s) & 1 == 1 { 1 } else { -1 });
                im.push(if code >> (2 * s + 1) & 1 == 1 { 1 } else { -1 });
            }
            out.push(ComplexSignSequence::pack(&re, &im).unwrap());
        }
        out
    }

    #[test]
    fn pcc_real_reference_points() {
        let x = SignSequence::from_pattern("++++").unwrap();
        let z = SignSequence::from_pattern("+++-").unwrap();
        let y = SignSequence::from_pattern("++--").unwrap();
        let r = pcc_real(&x, &z).unwrap();
        assert!(
            (r - SIN_QUARTER_PI).abs() < 1e-15,
            "sign_corr 0.5 must map to sin(pi/4), got {r}"
        );
        assert_eq!(
            pcc_real(&x, &y).unwrap(),
            0.0,
            "sign_corr 0 maps to exactly 0"
        );
        assert_eq!(
            pcc_real(&x, &x).unwrap(),
            1.0,
            "sign_corr 1 maps to exactly 1"
        );
    }

    #[test]
    fn pcc_real_magnitude_bounded_exhaustively() {
        // All pairs at n = 4: 256 combinations.
        for a_code in 0..16u8 {
            for b_code in 0..16u8 {
                let decode = |code: u8| {
                    let signs: Vec<i8> = (0..4)
                        .map(|k| if code >> k & 1 == 1 { 1 } else { -1 })
                        .collect();
                    SignSequence::pack(&signs).unwrap()
                };
                let r = pcc_real(&decode(a_code), &decode(b_code)).unwrap();
                assert!(r.abs() <= 1.0, "|pcc| must not exceed 1, got {r}");
            }
        }
    }

    #[test]
    fn pcc_complex_reference_entries() {
        let seqs = reference_complex_seqs();
        let xy = pcc_complex(&seqs[0], &seqs[1]).unwrap();
        assert!((xy.r_re - SIN_QUARTER_PI).abs() < 1e-15);
        assert!((xy.r_im + SIN_QUARTER_PI).abs() < 1e-15);

        let xz = pcc_complex(&seqs[0], &seqs[2]).unwrap();
        assert_eq!(xz.r_re, 0.0);
        assert_eq!(xz.r_im, 0.0);

        let self_corr = pcc_complex(&seqs[0], &seqs[0]).unwrap();
        assert_eq!(self_corr.r_re, 1.0);
        assert_eq!(
            self_corr.r_im, 0.0,
            "imaginary sum of a self-pair is identically zero"
        );
    }

    #[test]
    fn pcc_complex_rejects_length_mismatch() {
        let a = ComplexSignSequence::from_pattern("++ ++").unwrap();
        let b = ComplexSignSequence::from_pattern("++").unwrap();
        assert_eq!(
            pcc_complex(&a, &b),
            Err(crate::Error::LengthMismatch { left: 2, right: 1 })
        );
    }

    #[test]
    fn pcc_complex_conjugate_symmetry() {
        for (i, a) in all_complex_seqs(3).iter().enumerate() {
            for b in all_complex_seqs(3).iter().skip(i) {
                let ab = pcc_complex(a, b).unwrap();
                let ba = pcc_complex(b, a).unwrap();
                assert_eq!(ab.r_re.to_bits(), ba.r_re.to_bits());
                // The imaginary part flows from an integer sum, so both
                // orientations of a zero sum produce +0.0 rather than a
                // negated zero.
                let negated = if ab.r_im == 0.0 { 0.0 } else { -ab.r_im };
                assert_eq!(negated.to_bits(), ba.r_im.to_bits());
            }
        }
    }

    #[test]
    fn alpha_beta_budget_exhaustive_small_n() {
        // |alpha| + |beta| <= pi/2 for every complex sign pair at N <= 5,
        // and the estimate modulus stays within the unit disc.
        for n in 1..=5usize {
            let seqs = all_complex_seqs(n);
            for a in &seqs {
                for b in &seqs {
                    let pair = pcc_complex(a, b).unwrap();
                    let budget = pair.alpha.abs() + pair.beta.abs();
                    assert!(
                        budget <= std::f64::consts::FRAC_PI_2 + 1e-12,
                        "angle budget violated at n={n}: |{}| + |{}| = {budget}",
                        pair.alpha,
                        pair.beta
                    );
                    let modulus_sq = pair.r_re * pair.r_re + pair.r_im * pair.r_im;
                    assert!(
                        modulus_sq <= 1.0 + 1e-12,
                        "estimate modulus exceeded 1 at n={n}: {modulus_sq}"
                    );
                }
            }
        }
    }

    #[test]
    fn combined_sum_summands_are_plus_minus_two() {
        // The combined alpha+beta sum has per-sample summands
        // saR*(sbR - sbI) + saI*(sbR + sbI); exhaust all 16 sign combos.
        for combo in 0..16u8 {
            let sar = if combo & 1 == 1 { 1i64 } else { -1 };
            let sai = if combo & 2 == 2 { 1i64 } else { -1 };
            let sbr = if combo & 4 == 4 { 1i64 } else { -1 };
            let sbi = if combo & 8 == 8 { 1i64 } else { -1 };
            let summand = sar * (sbr - sbi) + sai * (sbr + sbi);
            assert!(
                summand == 2 || summand == -2,
                "summand must be +-2, got {summand} for combo {combo:04b}"
            );
        }
    }

    #[test]
    fn combined_sum_matches_alpha_plus_beta_on_random_pairs() {
        let mut state = 0x1cc5u64;
        let mut mix = move || {
            state = state.wrapping_add(0x9E3779B97F4A7C15);
            let mut z = state;
            z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
            z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
            z ^ (z >> 31)
        };
        for _ in 0..100 {
            let n = 1 + (mix() % 80) as usize;
            let rand_signs = |bits: u64, n: usize| -> Vec<i8> {
                (0..n)
                    .map(|i| if bits >> (i % 64) & 1 == 1 { 1 } else { -1 })
                    .collect()
            };
            let a =
                ComplexSignSequence::pack(&rand_signs(mix(), n), &rand_signs(mix(), n)).unwrap();
            let b =
                ComplexSignSequence::pack(&rand_signs(mix(), n), &rand_signs(mix(), n)).unwrap();
            let pair = pcc_complex(&a, &b).unwrap();
            let mut combined = 0i64;
            for i in 0..n {
                let (sar, sai) = (a.re().get(i) as i64, a.im().get(i) as i64);
                let (sbr, sbi) = (b.re().get(i) as i64, b.im().get(i) as i64);
                let summand = sar * (sbr - sbi) + sai * (sbr + sbi);
                assert!(summand.abs() == 2, "summand must be +-2");
                combined += summand;
            }
            let expected = PI / (4.0 * n as f64) * combined as f64;
            assert!(
                (pair.alpha + pair.beta - expected).abs() < 1e-12,
                "alpha + beta must equal the combined-sum angle"
            );
        }
    }

    #[test]
    fn matrix_real_reference_entries() {
        let m = pcc_matrix_real(&reference_real_seqs()).unwrap();
        assert_eq!(m.p(), 4);
        assert_eq!(m.mode(), Mode::Real);
        let a = SIN_QUARTER_PI;
        let expected = [
            [1.0, 0.0, a, a],
            [0.0, 1.0, a, a],
            [a, a, 1.0, 0.0],
            [a, a, 0.0, 1.0],
        ];
        for (i, row) in expected.iter().enumerate() {
            for (j, &want) in row.iter().enumerate() {
                assert!(
                    (m.get_re(i, j) - want).abs() < 1e-15,
                    "entry ({i}, {j}) = {} expected {want}",
                    m.get_re(i, j),
                );
                assert_eq!(m.get(i, j).im, 0.0);
            }
            assert_eq!(m.get(i, i).re, 1.0, "diagonal must be exactly 1");
        }
    }

    #[test]
    fn matrix_real_trivial_cases() {
        let single = pcc_matrix_real(&[SignSequence::from_pattern("+-+").unwrap()]).unwrap();
        assert_eq!(single.p(), 1);
        assert_eq!(single.get(0, 0), Complex64::new(1.0, 0.0));

        let s = SignSequence::from_pattern("+--+").unwrap();
        let all_same = pcc_matrix_real(&[s.clone(), s.clone(), s]).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(all_same.get_re(i, j), 1.0);
            }
        }
    }

    #[test]
    fn matrix_complex_reference_entries() {
        let m = pcc_matrix_complex(&reference_complex_seqs()).unwrap();
        let a = SIN_QUARTER_PI;
        assert_eq!(m.p(), 3);
        assert!((m.get(0, 1) - Complex64::new(a, -a)).norm() < 1e-15);
        assert!((m.get(1, 2) - Complex64::new(a, -a)).norm() < 1e-15);
        assert_eq!(m.get(0, 2), Complex64::new(0.0, 0.0));
        // Mirror is the exact conjugate, bit for bit.
        for i in 0..3 {
            for j in (i + 1)..3 {
                let upper = m.get(i, j);
                let lower = m.get(j, i);
                assert_eq!(upper.re.to_bits(), lower.re.to_bits());
                assert_eq!((-upper.im).to_bits(), lower.im.to_bits());
            }
        }
    }

    #[test]
    fn matrix_invariant_under_common_sample_permutation() {
        let seqs = reference_real_seqs();
        let before = pcc_matrix_real(&seqs).unwrap();
        // Rotate sample order the same way in every channel.
        let rotate = |s: &SignSequence| {
            let mut v: Vec<i8> = s.iter_signs().collect();
            v.rotate_left(2);
            SignSequence::pack(&v).unwrap()
        };
        let after = pcc_matrix_real(&seqs.iter().map(rotate).collect::<Vec<_>>()).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                assert_eq!(
                    before.get(i, j).re.to_bits(),
                    after.get(i, j).re.to_bits(),
                    "common permutation must leave the matrix unchanged"
                );
            }
        }
    }

    #[test]
    fn real_embedding_differs_from_real_estimate() {
        // Embedding real signs as complex with all-+1 imaginary parts does
        // NOT commute with estimation: the real component then averages
        // (sR*sR + 1), not sR*sR.
        let a_re = SignSequence::from_pattern("++--").unwrap();
        let b_re = SignSequence::from_pattern("+-+-").unwrap();
        let plain = pcc_real(&a_re, &b_re).unwrap();
        let a = ComplexSignSequence::from_pattern("++ ++ -+ -+").unwrap();
        let b = ComplexSignSequence::from_pattern("++ -+ ++ -+").unwrap();
        let embedded = pcc_complex(&a, &b).unwrap();
        assert_eq!(plain, 0.0);
        assert!(
            (embedded.r_re - plain).abs() > 0.5,
            "embedded estimate {} must differ from real estimate {plain}",
            embedded.r_re
        );
    }

    #[test]
    fn sample_corr_exact_cases() {
        let x = vec![1.0, -2.0, 3.0, 0.5];
        let neg: Vec<f64> = x.iter().map(|v| -v).collect();
        let m = sample_corr_real(&[x.clone(), x.clone(), neg]).unwrap();
        assert_eq!(
            m.get_re(0, 1),
            1.0,
            "identical channels correlate to exactly 1"
        );
        assert_eq!(
            m.get_re(0, 2),
            -1.0,
            "negated channel correlates to exactly -1"
        );
        assert_eq!(m.get_re(0, 0), 1.0);
    }

    #[test]
    fn sample_corr_rejects_zero_variance() {
        let flat = vec![2.5, 2.5, 2.5];
        let live = vec![1.0, 2.0, 3.0];
        assert_eq!(
            sample_corr_real(&[live, flat]),
            Err(crate::Error::ZeroVariance { channel: 1 })
        );
    }

    #[test]
    fn sample_corr_recovers_known_mixing() {
        // x = u, y = r*u + sqrt(1-r^2)*v with unit-variance independent
        // streams: the sample correlation must land near r = 0.5.
        let r = 0.5f64;
        let pairs = crate::sampling::sample_bivariate_gaussian(r, 1_000_000, 7).unwrap();
        let (xs, ys): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
        let m = sample_corr_real(&[xs, ys]).unwrap();
        assert!(
            (m.get_re(0, 1) - r).abs() < 0.01,
            "sample correlation {} strays from target {r}",
            m.get_re(0, 1)
        );
    }

    #[test]
    fn sample_corr_complex_hermitian() {
        let x = vec![
            Complex64::new(1.0, 0.5),
            Complex64::new(-0.3, 1.0),
            Complex64::new(0.2, -0.7),
        ];
        let y = vec![
            Complex64::new(0.4, -1.0),
            Complex64::new(1.5, 0.1),
            Complex64::new(-0.6, 0.3),
        ];
        let m = sample_corr_complex(&[x, y]).unwrap();
        assert_eq!(m.get(0, 0), Complex64::new(1.0, 0.0));
        assert_eq!(m.get(1, 1), Complex64::new(1.0, 0.0));
        let upper = m.get(0, 1);
        let lower = m.get(1, 0);
        assert_eq!(upper.re.to_bits(), lower.re.to_bits());
        assert_eq!((-upper.im).to_bits(), lower.im.to_bits());
        assert!(upper.norm() <= 1.0 + 1e-12);
    }

    #[test]
    fn from_entries_validates() {
        let good = [
            Complex64::new(1.0, 0.0),
            Complex64::new(0.5, 0.0),
            Complex64::new(0.5, 0.0),
            Complex64::new(1.0, 0.0),
        ];
        assert!(CorrMatrix::from_entries(2, Mode::Real, &good).is_ok());

        let asym = [
            Complex64::new(1.0, 0.0),
            Complex64::new(0.5, 0.0),
            Complex64::new(0.4, 0.0),
            Complex64::new(1.0, 0.0),
        ];
        assert!(matches!(
            CorrMatrix::from_entries(2, Mode::Real, &asym),
            Err(crate::Error::NotHermitian { .. })
        ));

        let bad_diag = [
            Complex64::new(1.0, 0.0),
            Complex64::new(0.5, 0.0),
            Complex64::new(0.5, 0.0),
            Complex64::new(0.9, 0.0),
        ];
        assert!(matches!(
            CorrMatrix::from_entries(2, Mode::Real, &bad_diag),
            Err(crate::Error::NotUnitDiagonal { i: 1, .. })
        ));

        let too_big = [
            Complex64::new(1.0, 0.0),
            Complex64::new(1.5, 0.0),
            Complex64::new(1.5, 0.0),
            Complex64::new(1.0, 0.0),
        ];
        assert!(matches!(
            CorrMatrix::from_entries(2, Mode::Real, &too_big),
            Err(crate::Error::CorrelationOutOfRange { .. })
        ));
    }
}
