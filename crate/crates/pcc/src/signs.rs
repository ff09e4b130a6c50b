//! Sign extraction and bit-packed sign sequences.
//!
//! A signal enters the estimator only through the polarity of its samples:
//! `+1` when a sample is `>= 0`, `-1` otherwise (the zero convention is
//! deliberate and propagates to both components of complex samples).
//! Sequences are stored packed, 64 signs per `u64` word with bit = 1 for
//! `+1`, so agreement counting between two channels collapses to XOR plus
//! popcount over whole words.  That kernel is what keeps the estimator
//! cheap at large sample counts, and everything downstream (correlation
//! matrices, exhaustive enumeration) is built on top of it.

use crate::error::{Error, Result};

/// Samples per packed storage word.  Internal; the public contract is only
/// the integer counts.
const WORD_BITS: usize = 64;

/// Sign of a finite sample: `+1` for `x >= 0`, `-1` for `x < 0`.
///
/// Zero maps to `+1`.  NaN and infinities are rejected rather than given an
/// arbitrary polarity.
pub fn sign(x: f64) -> Result<i8> {
    if !x.is_finite() {
        return Err(Error::NonFiniteSample { position: 0 });
    }
    Ok(if x >= 0.0 { 1 } else { -1 })
}

/// Componentwise sign of a complex sample: `(sign(re), sign(im))`.
pub fn sign_c(re: f64, im: f64) -> Result<(i8, i8)> {
    Ok((sign(re)?, sign(im)?))
}

/// A fixed-length sequence of ±1 signs, bit-packed 64 per word.
///
/// Bit `i % 64` of word `i / 64` is set exactly when sample `i` has sign
/// `+1`.  Padding bits beyond the logical length are always zero, so whole
/// words can be XOR-ed and popcounted without masking anything but the
/// final partial word.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SignSequence {
    n: usize,
    bits: Vec<u64>,
}

impl SignSequence {
    /// Packs a slice of ±1 signs.  Rejects empty input and any value other
    /// than +1 or -1.
    pub fn pack(signs: &[i8]) -> Result<Self> {
        if signs.is_empty() {
            return Err(Error::EmptyInput);
        }
        let mut bits = vec![0u64; signs.len().div_ceil(WORD_BITS)];
        for (i, &s) in signs.iter().enumerate() {
            match s {
                1 => bits[i / WORD_BITS] |= 1u64 << (i % WORD_BITS),
                -1 => {}
                other => {
                    return Err(Error::InvalidSign {
                        value: other,
                        position: i,
                    })
                }
            }
        }
        Ok(Self {
            n: signs.len(),
            bits,
        })
    }

    /// Extracts signs from raw samples and packs them in one pass.
    /// Rejects non-finite samples, reporting the offending position.
    pub fn from_samples(samples: &[f64]) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::EmptyInput);
        }
        let mut bits = vec![0u64; samples.len().div_ceil(WORD_BITS)];
        for (i, &x) in samples.iter().enumerate() {
            if !x.is_finite() {
                return Err(Error::NonFiniteSample { position: i });
            }
            if x >= 0.0 {
                bits[i / WORD_BITS] |= 1u64 << (i % WORD_BITS);
            }
        }
        Ok(Self {
            n: samples.len(),
            bits,
        })
    }

    /// Parses a pattern like `"++--"` (one character per sample).
    pub fn from_pattern(pattern: &str) -> Result<Self> {
        let signs: Vec<i8> = pattern
            .chars()
            .map(|c| match c {
                '+' => Ok(1),
                '-' => Ok(-1),
                other => Err(Error::InvalidPattern {
                    pattern: pattern.to_string(),
                    reason: format!("unexpected character {other:?}"),
                }),
            })
            .collect::<Result<_>>()?;
        if signs.is_empty() {
            return Err(Error::InvalidPattern {
                pattern: pattern.to_string(),
                reason: "pattern is empty".to_string(),
            });
        }
        Self::pack(&signs)
    }

    /// Number of samples.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Packed words, padding bits zero.
    pub fn words(&self) -> &[u64] {
        &self.bits
    }

    /// Sign of sample `i` as +1/-1.  Panics if `i >= n`.
    pub fn get(&self, i: usize) -> i8 {
        assert!(i < self.n, "sample index {i} out of range (n = {})", self.n);
        if self.bits[i / WORD_BITS] >> (i % WORD_BITS) & 1 == 1 {
            1
        } else {
            -1
        }
    }

    /// The sequence with every sign flipped.
    pub fn complement(&self) -> Self {
        let mut bits: Vec<u64> = self.bits.iter().map(|w| !w).collect();
        let tail = self.n % WORD_BITS;
        if tail != 0 {
            *bits.last_mut().expect("at least one word") &= mask_for(tail);
        }
        Self { n: self.n, bits }
    }

    /// Iterator over signs in sample order.
    pub fn iter_signs(&self) -> impl Iterator<Item = i8> + '_ {
        (0..self.n).map(move |i| self.get(i))
    }

    /// Renders the sequence as a `"++--"` style pattern.
    pub fn to_pattern(&self) -> String {
        self.iter_signs()
            .map(|s| if s == 1 { '+' } else { '-' })
            .collect()
    }
}

/// A fixed-length sequence of complex signs: one ±1 polarity per component.
///
/// Sample `i` carries the pair `(re_i, im_i)`, i.e. the complex sign
/// `re_i + j*im_i` with `re_i, im_i` in {+1, -1}.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ComplexSignSequence {
    re: SignSequence,
    im: SignSequence,
}

impl ComplexSignSequence {
    /// Packs parallel slices of real-part and imaginary-part signs.
    pub fn pack(re_signs: &[i8], im_signs: &[i8]) -> Result<Self> {
        if re_signs.len() != im_signs.len() {
            return Err(Error::LengthMismatch {
                left: re_signs.len(),
                right: im_signs.len(),
            });
        }
        Ok(Self {
            re: SignSequence::pack(re_signs)?,
            im: SignSequence::pack(im_signs)?,
        })
    }

    /// Extracts componentwise signs from raw `(re, im)` samples.
    pub fn from_samples(samples: &[(f64, f64)]) -> Result<Self> {
        let re: Vec<f64> = samples.iter().map(|&(re, _)| re).collect();
        let im: Vec<f64> = samples.iter().map(|&(_, im)| im).collect();
        Ok(Self {
            re: SignSequence::from_samples(&re)?,
            im: SignSequence::from_samples(&im)?,
        })
    }

    /// Parses whitespace-separated quadrant pairs like `"++ -+ --"`, one
    /// two-character pair per sample (`"-+"` denotes `-1 + j`).
    pub fn from_pattern(pattern: &str) -> Result<Self> {
        let mut re = Vec::new();
        let mut im = Vec::new();
        for pair in pattern.split_whitespace() {
            let mut chars = pair.chars();
            let (Some(rc), Some(ic), None) = (chars.next(), chars.next(), chars.next()) else {
                return Err(Error::InvalidPattern {
                    pattern: pattern.to_string(),
                    reason: format!("quadrant pair {pair:?} must be exactly two characters"),
                });
            };
            let parse = |c: char| match c {
                '+' => Ok(1),
                '-' => Ok(-1),
                other => Err(Error::InvalidPattern {
                    pattern: pattern.to_string(),
                    reason: format!("unexpected character {other:?}"),
                }),
            };
            re.push(parse(rc)?);
            im.push(parse(ic)?);
        }
        if re.is_empty() {
            return Err(Error::InvalidPattern {
                pattern: pattern.to_string(),
                reason: "pattern is empty".to_string(),
            });
        }
        Self::pack(&re, &im)
    }

    /// Number of samples.
    pub fn n(&self) -> usize {
        self.re.n()
    }

    /// Real-part sign sequence.
    pub fn re(&self) -> &SignSequence {
        &self.re
    }

    /// Imaginary-part sign sequence.
    pub fn im(&self) -> &SignSequence {
        &self.im
    }

    /// Renders the sequence as space-separated quadrant pairs.
    pub fn to_pattern(&self) -> String {
        (0..self.n())
            .map(|i| {
                let rc = if self.re.get(i) == 1 { '+' } else { '-' };
                let ic = if self.im.get(i) == 1 { '+' } else { '-' };
                format!("{rc}{ic}")
            })
            .collect::<Vec<_>>()
            .join(" ")
    }
}

/// Number of positions where the two sequences agree, via XOR + popcount.
///
/// Exact integer for any N; the final partial word is masked so padding
/// never contributes.
pub fn agreement_count(a: &SignSequence, b: &SignSequence) -> Result<u64> {
    if a.n != b.n {
        return Err(Error::LengthMismatch {
            left: a.n,
            right: b.n,
        });
    }
    Ok(a.n as u64 - xor_popcount(&a.bits, &b.bits, a.n))
}

/// Empirical sign correlation `(1/N) * sum_i a_i * b_i`.
///
/// Equals `(2 * agreements - N) / N`, so the output always lies on the
/// quantization grid `{-1, -1 + 2/N, ..., +1}`.
pub fn sign_corr(a: &SignSequence, b: &SignSequence) -> Result<f64> {
    let agreements = agreement_count(a, b)?;
    let n = a.n as f64;
    Ok((2.0 * agreements as f64 - n) / n)
}

/// Counts disagreeing positions between two packed words slices of logical
/// length `n`.  The hot kernel: one XOR + popcount per word, final word
/// masked.
pub(crate) fn xor_popcount(a: &[u64], b: &[u64], n: usize) -> u64 {
    debug_assert_eq!(a.len(), b.len());
    let mut disagreements = 0u64;
    let full_words = n / WORD_BITS;
    for i in 0..full_words {
        disagreements += (a[i] ^ b[i]).count_ones() as u64;
    }
    let tail = n % WORD_BITS;
    if tail != 0 {
        disagreements += ((a[full_words] ^ b[full_words]) & mask_for(tail)).count_ones() as u64;
    }
    disagreements
}

/// Mask selecting the low `tail` bits (1 <= tail < 64).
fn mask_for(tail: usize) -> u64 {
    debug_assert!(tail > 0 && tail < WORD_BITS);
    (1u64 << tail) - 1
}
