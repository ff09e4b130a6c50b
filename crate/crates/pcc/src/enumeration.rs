//! Exhaustive small-case verification of the PSD guarantee boundary.
//!
//! For small channel counts and sample lengths the space of sign
//! configurations is finite, so the claim "every PCC estimate with p real
//! channels is positive semidefinite" can be machine-checked by visiting
//! every configuration, building its estimate, and examining the smallest
//! eigenvalue.  This module provides:
//!
//! - [`enumerate_real`] / [`enumerate_complex`]: full sweeps with tallies,
//!   a tracked global minimum eigenvalue, and the first few violating
//!   configurations retained as [`Witness`]es;
//! - [`base_counterexample_real`] / [`base_counterexample_complex`]: the
//!   canonical hand-sized violating configurations (4 real channels over 4
//!   samples; 3 complex channels over 2 samples);
//! - [`augment_real`] / [`augment_complex`]: the sample-doubling
//!   construction that extends a violating configuration by one channel
//!   without disturbing its spectrum, and [`counterexample_real`] /
//!   [`counterexample_complex`] which iterate it to any requested p.
//!
//! Enumeration visits configurations in lexicographic order of the
//! concatenated sign pattern with `+` ordered before `-`, channel-major
//! and sample-major within a channel (complex samples contribute their
//! real sign then their imaginary sign).  The order is part of the
//! contract: witness lists are "first K violations in visit order" and are
//! identical for every worker count, because workers own contiguous index
//! ranges and results merge in range order.

use std::f64::consts::{FRAC_PI_2, PI};
use std::thread;

use crate::error::{Error, Result};
use crate::estimator::{pcc_matrix_complex, pcc_matrix_real, CorrMatrix, Mode};
use crate::psd::{check_psd, JacobiWork, PsdReport, DEFAULT_TOLERANCE};
use crate::signs::{ComplexSignSequence, SignSequence};

/// Default ceiling on the number of configurations a sweep may visit.
pub const DEFAULT_BUDGET: u128 = 1 << 32;

/// Default number of violating configurations retained per sweep.
pub const DEFAULT_WITNESS_CAP: usize = 16;

/// Tuning knobs for an enumeration sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct EnumOptions {
    /// Violation threshold: a configuration counts as violating when its
    /// smallest eigenvalue is below `-tolerance`.
    pub tolerance: f64,
    /// Refuse sweeps whose configuration count exceeds this.  Values above
    /// 2^62 are clamped — visit indices are 64-bit.
    pub budget: u128,
    /// Worker threads.  Zero is treated as one.  The output is byte-for-byte
    /// identical for every worker count.
    pub workers: usize,
    /// Maximum number of violating configurations stored as witnesses (the
    /// first ones in visit order).
    pub witness_cap: usize,
}

impl Default for EnumOptions {
    fn default() -> Self {
        Self {
            tolerance: DEFAULT_TOLERANCE,
            budget: DEFAULT_BUDGET,
            workers: 1,
            witness_cap: DEFAULT_WITNESS_CAP,
        }
    }
}

/// One violating configuration, reconstructed through the public
/// estimator + PSD pipeline so it can be replayed independently.
#[derive(Debug, Clone, PartialEq)]
pub struct Witness {
    /// Position of the configuration in visit order (0-based).
    pub index: u64,
    /// One pattern string per channel: `"++-+"` in real mode, quadrant
    /// pairs like `"++ -+"` in complex mode.
    pub channels: Vec<String>,
    /// The PCC estimate of the configuration.
    pub matrix: CorrMatrix,
    /// Its eigenvalue evidence; `is_psd` is always false here.
    pub report: PsdReport,
}

/// Outcome of one enumeration sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct EnumerationSummary {
    pub p: usize,
    pub n: usize,
    pub mode: Mode,
    /// Configurations visited (after symmetry reduction, when enabled).
    pub total_configs: u64,
    /// Configurations whose smallest eigenvalue fell below `-tolerance`.
    pub violations: u64,
    /// Smallest eigenvalue seen anywhere in the sweep.
    pub min_min_eig: f64,
    /// The violation threshold the sweep ran at.
    pub tolerance: f64,
    /// Whether channel 0 was pinned to all-`+` (real mode only).
    pub symmetry_reduce: bool,
    /// The first violations in visit order, up to the configured cap.
    pub witnesses: Vec<Witness>,
}

/// Per-worker tally over one contiguous index range.
struct Shard {
    violations: u64,
    min_min_eig: f64,
    witness_indices: Vec<u64>,
}

/// Exhaustive sweep over real sign configurations: p channels, n samples
/// each, all `2^(p*n)` assignments — or `2^((p-1)*n)` with
/// `symmetry_reduce`, which pins channel 0 to all-`+`.
///
/// The reduction is sound because flipping any sample position across all
/// channels simultaneously preserves every pairwise product: each orbit of
/// such flips contains exactly one representative with channel 0 all-`+`,
/// and every configuration in an orbit shares one PCC matrix.  The
/// reduction is cross-checked against full enumeration in this module's
/// tests before anything relies on it.
pub fn enumerate_real(
    p: usize,
    n: usize,
    symmetry_reduce: bool,
    opts: &EnumOptions,
) -> Result<EnumerationSummary> {
    validate_common(p, n, opts)?;
    if n > 64 {
        return Err(Error::EnumerationTooWide { n });
    }
    let varying = if symmetry_reduce { p - 1 } else { p };
    let bits = (varying * n) as u32;
    let budget = check_budget(bits, opts)?;
    let total = 1u64 << bits;
    debug_assert!(u128::from(total) <= budget);

    // One sine per attainable agreement count, computed by the exact
    // expression the pairwise estimator uses so witness verdicts match the
    // hot loop bit for bit.
    let nf = n as f64;
    let tab: Vec<f64> = (0..=n)
        .map(|agreements| {
            let rs = (2.0 * agreements as f64 - nf) / nf;
            (FRAC_PI_2 * rs).sin()
        })
        .collect();

    let merged = run_sharded(total, opts, |lo, hi, shard| {
        scan_real_range(lo..hi, p, n, symmetry_reduce, &tab, opts, shard)
    })?;

    let witnesses = merged
        .witness_indices
        .iter()
        .map(|&index| {
            let seqs = real_config_seqs(index, p, n, symmetry_reduce);
            let matrix = pcc_matrix_real(&seqs)?;
            let report = check_psd(&matrix, opts.tolerance)?;
            debug_assert!(!report.is_psd);
            Ok(Witness {
                index,
                channels: seqs.iter().map(SignSequence::to_pattern).collect(),
                matrix,
                report,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(EnumerationSummary {
        p,
        n,
        mode: Mode::Real,
        total_configs: total,
        violations: merged.violations,
        min_min_eig: merged.min_min_eig,
        tolerance: opts.tolerance,
        symmetry_reduce,
        witnesses,
    })
}

/// Exhaustive sweep over complex sign configurations: every sample of every
/// channel ranges over the four quadrant signs, `4^(p*n)` configurations.
/// No symmetry reduction is applied in complex mode.
pub fn enumerate_complex(p: usize, n: usize, opts: &EnumOptions) -> Result<EnumerationSummary> {
    validate_common(p, n, opts)?;
    if n > 32 {
        return Err(Error::EnumerationTooWide { n });
    }
    let bits = (2 * p * n) as u32;
    let budget = check_budget(bits, opts)?;
    let total = 1u64 << bits;
    debug_assert!(u128::from(total) <= budget);

    // One sine per attainable half-sum value; mirrors the pairwise
    // estimator's arithmetic exactly (see `scan_complex_range`).
    let scale = PI / (4.0 * n as f64);
    let tab: Vec<f64> = (0..=2 * n)
        .map(|t| {
            let sum = 2 * t as i64 - 2 * n as i64;
            (scale * sum as f64).sin()
        })
        .collect();

    let merged = run_sharded(total, opts, |lo, hi, shard| {
        scan_complex_range(lo..hi, p, n, &tab, opts, shard)
    })?;

    let witnesses = merged
        .witness_indices
        .iter()
        .map(|&index| {
            let seqs = complex_config_seqs(index, p, n);
            let matrix = pcc_matrix_complex(&seqs)?;
            let report = check_psd(&matrix, opts.tolerance)?;
            debug_assert!(!report.is_psd);
            Ok(Witness {
                index,
                channels: seqs.iter().map(ComplexSignSequence::to_pattern).collect(),
                matrix,
                report,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(EnumerationSummary {
        p,
        n,
        mode: Mode::Complex,
        total_configs: total,
        violations: merged.violations,
        min_min_eig: merged.min_min_eig,
        tolerance: opts.tolerance,
        symmetry_reduce: false,
        witnesses,
    })
}

fn validate_common(p: usize, n: usize, opts: &EnumOptions) -> Result<()> {
    if p < 2 {
        return Err(Error::InvalidDimension {
            p,
            reason: "enumeration needs at least two channels".to_string(),
        });
    }
    if n == 0 {
        return Err(Error::EmptyInput);
    }
    if !opts.tolerance.is_finite() || opts.tolerance <= 0.0 {
        return Err(Error::InvalidTolerance {
            value: opts.tolerance,
        });
    }
    Ok(())
}

fn check_budget(bits: u32, opts: &EnumOptions) -> Result<u128> {
    let budget = opts.budget.min(1u128 << 62);
    if bits >= 128 || (1u128 << bits) > budget {
        return Err(Error::BudgetExceeded {
            required_log2: bits,
            budget,
        });
    }
    Ok(budget)
}

/// Splits `[0, total)` into contiguous ranges, runs `scan` on each (in
/// parallel when more than one worker), and merges shard tallies in range
/// order.  Witness indices concatenate in that order and truncate to the
/// cap, which preserves "first K in visit order" for any worker count.
fn run_sharded<F>(total: u64, opts: &EnumOptions, scan: F) -> Result<Shard>
where
    F: Fn(u64, u64, &mut Shard) -> Result<()> + Sync,
{
    let workers = opts
        .workers
        .max(1)
        .min(usize::try_from(total).unwrap_or(usize::MAX));
    let chunk = total.div_ceil(workers as u64);
    let new_shard = || Shard {
        violations: 0,
        min_min_eig: f64::INFINITY,
        witness_indices: Vec::new(),
    };
    let shards: Vec<Result<Shard>> = if workers == 1 {
        let mut shard = new_shard();
        vec![scan(0, total, &mut shard).map(|()| shard)]
    } else {
        thread::scope(|s| {
            let handles: Vec<_> = (0..workers)
                .map(|w| {
                    let lo = w as u64 * chunk;
                    let hi = total.min(lo + chunk);
                    let scan = &scan;
                    s.spawn(move || {
                        let mut shard = new_shard();
                        scan(lo, hi, &mut shard).map(|()| shard)
                    })
                })
                .collect();
            handles
                .into_iter()
                .map(|h| h.join().expect("enumeration worker panicked"))
                .collect()
        })
    };
    let mut merged = new_shard();
    for shard in shards {
        let shard = shard?;
        merged.violations += shard.violations;
        merged.min_min_eig = merged.min_min_eig.min(shard.min_min_eig);
        for idx in shard.witness_indices {
            if merged.witness_indices.len() < opts.witness_cap {
                merged.witness_indices.push(idx);
            }
        }
    }
    debug_assert_eq!(
        merged.violations == 0,
        merged.min_min_eig >= -opts.tolerance
    );
    Ok(merged)
}

fn channel_mask(bits: usize) -> u64 {
    if bits == 64 {
        u64::MAX
    } else {
        (1u64 << bits) - 1
    }
}

/// Allocation-free scan of one real index range.  Channel j's sign pattern
/// is the j-th n-bit slice of the index, most significant slice first,
/// samples most-significant-bit first, with bit 0 meaning `+`.
fn scan_real_range(
    range: std::ops::Range<u64>,
    p: usize,
    n: usize,
    reduced: bool,
    tab: &[f64],
    opts: &EnumOptions,
    shard: &mut Shard,
) -> Result<()> {
    let varying = if reduced { p - 1 } else { p };
    let mask = channel_mask(n);
    let base = usize::from(reduced);
    let mut slices = vec![0u64; p];
    let mut work = JacobiWork::new(p);
    for c in range {
        for j in 0..varying {
            let shift = ((varying - 1 - j) * n) as u32;
            slices[base + j] = (c >> shift) & mask;
        }
        let buf = work.matrix_mut(p);
        for i in 0..p {
            buf[i * p + i] = 1.0;
            for j in (i + 1)..p {
                let agreements = n - (slices[i] ^ slices[j]).count_ones() as usize;
                let v = tab[agreements];
                buf[i * p + j] = v;
                buf[j * p + i] = v;
            }
        }
        let min_eig = work.solve(p)?[0];
        if min_eig < shard.min_min_eig {
            shard.min_min_eig = min_eig;
        }
        if min_eig < -opts.tolerance {
            shard.violations += 1;
            if shard.witness_indices.len() < opts.witness_cap {
                shard.witness_indices.push(c);
            }
        }
    }
    Ok(())
}

/// Allocation-free scan of one complex index range.  Channel j's pattern is
/// a 2n-bit slice (most significant slice first); within a slice, samples
/// run most-significant-first, each contributing its real sign bit then its
/// imaginary sign bit, bit 0 meaning `+`.
///
/// Eigenvalues come from the same real 2p x 2p embedding the Hermitian
/// solver uses, filled with sines drawn from `tab` by the estimator's exact
/// arithmetic, so every value here matches the public pipeline bit for bit.
fn scan_complex_range(
    range: std::ops::Range<u64>,
    p: usize,
    n: usize,
    tab: &[f64],
    opts: &EnumOptions,
    shard: &mut Shard,
) -> Result<()> {
    let chan_bits = 2 * n;
    let mask = channel_mask(chan_bits);
    let dim = 2 * p;
    let mut re_words = vec![0u64; p];
    let mut im_words = vec![0u64; p];
    let mut re_mat = vec![0.0; p * p];
    let mut im_mat = vec![0.0; p * p];
    let mut work = JacobiWork::new(dim);
    for c in range {
        for j in 0..p {
            let slice = (c >> (((p - 1 - j) * chan_bits) as u32)) & mask;
            let mut rw = 0u64;
            let mut iw = 0u64;
            for s in 0..n {
                rw |= ((slice >> (chan_bits - 1 - 2 * s)) & 1) << s;
                iw |= ((slice >> (chan_bits - 2 - 2 * s)) & 1) << s;
            }
            re_words[j] = rw;
            im_words[j] = iw;
        }
        for i in 0..p {
            re_mat[i * p + i] = 1.0;
            im_mat[i * p + i] = 0.0;
            for j in (i + 1)..p {
                let agree_rr = n - (re_words[i] ^ re_words[j]).count_ones() as usize;
                let agree_ii = n - (im_words[i] ^ im_words[j]).count_ones() as usize;
                let agree_ir = n - (im_words[i] ^ re_words[j]).count_ones() as usize;
                let agree_ri = n - (re_words[i] ^ im_words[j]).count_ones() as usize;
                let r_re = tab[agree_rr + agree_ii];
                let r_im = tab[n + agree_ir - agree_ri];
                re_mat[i * p + j] = r_re;
                re_mat[j * p + i] = r_re;
                im_mat[i * p + j] = r_im;
                im_mat[j * p + i] = -r_im;
            }
        }
        let buf = work.matrix_mut(dim);
        for i in 0..p {
            for j in 0..p {
                let re = re_mat[i * p + j];
                let im = im_mat[i * p + j];
                buf[i * dim + j] = re;
                buf[(p + i) * dim + (p + j)] = re;
                buf[i * dim + (p + j)] = -im;
                buf[(p + i) * dim + j] = im;
            }
        }
        let doubled = work.solve(dim)?;
        let min_eig = 0.5 * (doubled[0] + doubled[1]);
        if min_eig < shard.min_min_eig {
            shard.min_min_eig = min_eig;
        }
        if min_eig < -opts.tolerance {
            shard.violations += 1;
            if shard.witness_indices.len() < opts.witness_cap {
                shard.witness_indices.push(c);
            }
        }
    }
    Ok(())
}

/// Decodes a real visit index back into packed sign sequences.
fn real_config_seqs(c: u64, p: usize, n: usize, reduced: bool) -> Vec<SignSequence> {
    let varying = if reduced { p - 1 } else { p };
    let mask = channel_mask(n);
    let mut out = Vec::with_capacity(p);
    if reduced {
        out.push(SignSequence::pack(&vec![1i8; n]).expect("n >= 1"));
    }
    for j in 0..varying {
        let slice = (c >> (((varying - 1 - j) * n) as u32)) & mask;
        let signs: Vec<i8> = (0..n)
            .map(|i| {
                if (slice >> (n - 1 - i)) & 1 == 1 {
                    -1
                } else {
                    1
                }
            })
            .collect();
        out.push(SignSequence::pack(&signs).expect("n >= 1"));
    }
    out
}

/// Decodes a complex visit index back into packed quadrant sequences.
fn complex_config_seqs(c: u64, p: usize, n: usize) -> Vec<ComplexSignSequence> {
    let chan_bits = 2 * n;
    let mask = channel_mask(chan_bits);
    let mut out = Vec::with_capacity(p);
    for j in 0..p {
        let slice = (c >> (((p - 1 - j) * chan_bits) as u32)) & mask;
        let re: Vec<i8> = (0..n)
            .map(|s| {
                if (slice >> (chan_bits - 1 - 2 * s)) & 1 == 1 {
                    -1
                } else {
                    1
                }
            })
            .collect();
        let im: Vec<i8> = (0..n)
            .map(|s| {
                if (slice >> (chan_bits - 2 - 2 * s)) & 1 == 1 {
                    -1
                } else {
                    1
                }
            })
            .collect();
        out.push(ComplexSignSequence::pack(&re, &im).expect("n >= 1"));
    }
    out
}

/// The smallest hand-constructed real violating configuration: four
/// channels of four samples whose PCC matrix has off-diagonals 0 and
/// sin(pi/4) arranged so the spectrum is `{1 - sqrt(2), 1, 1, 1 + sqrt(2)}`.
pub fn base_counterexample_real() -> (Vec<SignSequence>, CorrMatrix, PsdReport) {
    let seqs: Vec<SignSequence> = ["++++", "++--", "+++-", "++-+"]
        .iter()
        .map(|pat| SignSequence::from_pattern(pat).expect("reference pattern is valid"))
        .collect();
    let matrix = pcc_matrix_real(&seqs).expect("reference configuration is well-formed");
    let report = check_psd(&matrix, DEFAULT_TOLERANCE).expect("default tolerance is valid");
    (seqs, matrix, report)
}

/// The smallest hand-constructed complex violating configuration: three
/// channels of two quadrant samples with spectrum
/// `{1 - sqrt(2), 1, 1 + sqrt(2)}`.
pub fn base_counterexample_complex() -> (Vec<ComplexSignSequence>, CorrMatrix, PsdReport) {
    let seqs: Vec<ComplexSignSequence> = ["++ ++", "++ -+", "++ --"]
        .iter()
        .map(|pat| ComplexSignSequence::from_pattern(pat).expect("reference pattern is valid"))
        .collect();
    let matrix = pcc_matrix_complex(&seqs).expect("reference configuration is well-formed");
    let report = check_psd(&matrix, DEFAULT_TOLERANCE).expect("default tolerance is valid");
    (seqs, matrix, report)
}

/// Extends a real configuration by one channel without changing the
/// existing PCC matrix: every sample is duplicated (which leaves all
/// pairwise sign correlations literally unchanged), then a channel
/// alternating `+`, `-` over the doubled length is appended.  The new
/// channel agrees with any duplicated channel on exactly half the
/// positions, so its PCC with every old channel is exactly zero and the
/// output matrix is the input matrix bordered by a unit diagonal entry.
pub fn augment_real(seqs: &[SignSequence]) -> Result<Vec<SignSequence>> {
    if seqs.is_empty() {
        return Err(Error::EmptyInput);
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
    let mut out = Vec::with_capacity(seqs.len() + 1);
    for s in seqs {
        let doubled: Vec<i8> = s.iter_signs().flat_map(|x| [x, x]).collect();
        out.push(SignSequence::pack(&doubled)?);
    }
    let alternating: Vec<i8> = (0..2 * n)
        .map(|i| if i % 2 == 0 { 1 } else { -1 })
        .collect();
    out.push(SignSequence::pack(&alternating)?);
    Ok(out)
}

/// Complex analogue of [`augment_real`]: samples are duplicated and the
/// appended channel alternates between the quadrant signs `++` (1 + j) and
/// `--` (-1 - j), which zeroes both the real and imaginary parts of its
/// PCC with every duplicated channel.
pub fn augment_complex(seqs: &[ComplexSignSequence]) -> Result<Vec<ComplexSignSequence>> {
    if seqs.is_empty() {
        return Err(Error::EmptyInput);
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
    let mut out = Vec::with_capacity(seqs.len() + 1);
    for s in seqs {
        let re: Vec<i8> = s.re().iter_signs().flat_map(|x| [x, x]).collect();
        let im: Vec<i8> = s.im().iter_signs().flat_map(|x| [x, x]).collect();
        out.push(ComplexSignSequence::pack(&re, &im)?);
    }
    let alternating: Vec<i8> = (0..2 * n)
        .map(|i| if i % 2 == 0 { 1 } else { -1 })
        .collect();
    out.push(ComplexSignSequence::pack(&alternating, &alternating)?);
    Ok(out)
}

/// A p-channel real configuration whose PCC matrix is not PSD, built by
/// augmenting the base counterexample `p - 4` times.  The negative
/// eigenvalue `1 - sqrt(2)` survives every augmentation step.
///
/// For p <= 3 no such configuration exists — the estimate is provably PSD —
/// and an error says so.
pub fn counterexample_real(p: usize) -> Result<(Vec<SignSequence>, CorrMatrix, PsdReport)> {
    if p < 4 {
        return Err(Error::NoCounterexample {
            mode: "real",
            p,
            limit: 3,
        });
    }
    let (mut seqs, _, _) = base_counterexample_real();
    while seqs.len() < p {
        seqs = augment_real(&seqs)?;
    }
    let matrix = pcc_matrix_real(&seqs)?;
    let report = check_psd(&matrix, DEFAULT_TOLERANCE)?;
    assert!(
        !report.is_psd,
        "augmentation must preserve the negative eigenvalue"
    );
    Ok((seqs, matrix, report))
}

/// Complex analogue of [`counterexample_real`]; exists for p >= 3.
pub fn counterexample_complex(
    p: usize,
) -> Result<(Vec<ComplexSignSequence>, CorrMatrix, PsdReport)> {
    if p < 3 {
        return Err(Error::NoCounterexample {
            mode: "complex",
            p,
            limit: 2,
        });
    }
    let (mut seqs, _, _) = base_counterexample_complex();
    while seqs.len() < p {
        seqs = augment_complex(&seqs)?;
    }
    let matrix = pcc_matrix_complex(&seqs)?;
    let report = check_psd(&matrix, DEFAULT_TOLERANCE)?;
    assert!(
        !report.is_psd,
        "augmentation must preserve the negative eigenvalue"
    );
    Ok((seqs, matrix, report))
}
