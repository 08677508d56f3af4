//! Weighted equicontractive iterated function systems `S_j(x) = r x + d_j`.

use std::fmt;

use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::rational::{fmt_rat, frac, Rat};

/// One violated invariant of a candidate system.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    RatioOutOfRange,
    TooFewMaps,
    LengthMismatch { digits: usize, probs: usize },
    DigitsNotIncreasing { index: usize },
    /// `d_0 != 0` (index 0) or `d_k != 1 - r` (index k).
    HullViolation { index: usize },
    /// `d_{index+1} - d_index > r`: the images of `[0,1]` leave a gap.
    SupportGap { index: usize, gap: Rat },
    NonPositiveProbability { index: usize },
    ProbabilitySum { sum: Rat },
    /// `p_0 = p_k = min p_j` fails at `index`.
    StandardAssumptionViolation { index: usize },
}

impl Violation {
    pub fn name(&self) -> &'static str {
        match self {
            Violation::RatioOutOfRange => "RatioOutOfRange",
            Violation::TooFewMaps => "TooFewMaps",
            Violation::LengthMismatch { .. } => "LengthMismatch",
            Violation::DigitsNotIncreasing { .. } => "DigitsNotIncreasing",
            Violation::HullViolation { .. } => "HullViolation",
            Violation::SupportGap { .. } => "SupportGap",
            Violation::NonPositiveProbability { .. } => "NonPositiveProbability",
            Violation::ProbabilitySum { .. } => "ProbabilitySum",
            Violation::StandardAssumptionViolation { .. } => "StandardAssumptionViolation",
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::RatioOutOfRange => write!(f, "RatioOutOfRange: ratio must lie in (0,1)"),
            Violation::TooFewMaps => write!(f, "TooFewMaps: at least two maps are required"),
            Violation::LengthMismatch { digits, probs } => {
                write!(f, "LengthMismatch: {digits} digits but {probs} probabilities")
            }
            Violation::DigitsNotIncreasing { index } => {
                write!(f, "DigitsNotIncreasing at index {index}")
            }
            Violation::HullViolation { index } => write!(f, "HullViolation at index {index}"),
            Violation::SupportGap { index, gap } => {
                write!(f, "SupportGap after index {index} (gap {})", fmt_rat(gap))
            }
            Violation::NonPositiveProbability { index } => {
                write!(f, "NonPositiveProbability at index {index}")
            }
            Violation::ProbabilitySum { sum } => {
                write!(f, "ProbabilitySum: probabilities sum to {}", fmt_rat(sum))
            }
            Violation::StandardAssumptionViolation { index } => {
                write!(f, "StandardAssumptionViolation at index {index}")
            }
        }
    }
}

/// Every invariant a candidate system violates.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("invalid IFS: {}", .0.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))]
pub struct ValidationError(pub Vec<Violation>);

impl ValidationError {
    pub fn contains(&self, name: &str) -> bool {
        self.0.iter().any(|v| v.name() == name)
    }

    /// Name of the first violation, used for CLI exit reporting.
    pub fn first_name(&self) -> &'static str {
        self.0.first().map(Violation::name).unwrap_or("ValidationError")
    }
}

/// Unchecked system description, as read from a config file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IfsSpec {
    pub ratio: Rat,
    pub digits: Vec<Rat>,
    pub probs: Vec<Rat>,
}

impl IfsSpec {
    /// Maps `x/R + j/R^2` for the given indices `j`.
    pub fn from_indices(r_inv: u64, indices: &[u64], probs: Vec<Rat>) -> Self {
        let r2 = (r_inv * r_inv) as i64;
        IfsSpec {
            ratio: frac(1, r_inv as i64),
            digits: indices.iter().map(|&j| frac(j as i64, r2)).collect(),
            probs,
        }
    }

    pub fn violations(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        let r = &self.ratio;
        if !(r.is_positive() && r < &Rat::one()) {
            out.push(Violation::RatioOutOfRange);
        }
        if self.digits.len() < 2 {
            out.push(Violation::TooFewMaps);
        }
        if self.digits.len() != self.probs.len() {
            out.push(Violation::LengthMismatch {
                digits: self.digits.len(),
                probs: self.probs.len(),
            });
        }
        for (i, w) in self.digits.windows(2).enumerate() {
            if w[0] >= w[1] {
                out.push(Violation::DigitsNotIncreasing { index: i + 1 });
            }
        }
        if let (Some(first), Some(last)) = (self.digits.first(), self.digits.last()) {
            if !first.is_zero() {
                out.push(Violation::HullViolation { index: 0 });
            }
            if *last != Rat::one() - r {
                out.push(Violation::HullViolation {
                    index: self.digits.len() - 1,
                });
            }
        }
        for (i, w) in self.digits.windows(2).enumerate() {
            let gap = &w[1] - &w[0];
            if &gap > r {
                out.push(Violation::SupportGap { index: i, gap });
            }
        }
        for (i, p) in self.probs.iter().enumerate() {
            if !p.is_positive() {
                out.push(Violation::NonPositiveProbability { index: i });
            }
        }
        let sum: Rat = self.probs.iter().sum();
        if !sum.is_one() {
            out.push(Violation::ProbabilitySum { sum });
        }
        if let (Some(first), Some(last)) = (self.probs.first(), self.probs.last()) {
            let k = self.probs.len() - 1;
            if first != last {
                out.push(Violation::StandardAssumptionViolation { index: k });
            }
            for (i, p) in self.probs.iter().enumerate() {
                if p < first && !(i == k && first != last) {
                    out.push(Violation::StandardAssumptionViolation { index: i });
                }
            }
        }
        out
    }

    pub fn validate(self) -> Result<WeightedIfs, ValidationError> {
        let v = self.violations();
        if v.is_empty() {
            Ok(WeightedIfs(self))
        } else {
            Err(ValidationError(v))
        }
    }
}

/// A validated system: `0 < r < 1`, hull and support `[0,1]`, positive
/// probabilities summing to one, and `p_0 = p_k = min p_j`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WeightedIfs(IfsSpec);

impl WeightedIfs {
    pub fn ratio(&self) -> &Rat {
        &self.0.ratio
    }

    pub fn digits(&self) -> &[Rat] {
        &self.0.digits
    }

    pub fn probs(&self) -> &[Rat] {
        &self.0.probs
    }

    pub fn alphabet_size(&self) -> usize {
        self.0.digits.len()
    }

    pub fn min_prob(&self) -> &Rat {
        &self.0.probs[0]
    }

    pub fn spec(&self) -> &IfsSpec {
        &self.0
    }

    pub fn ratio_f64(&self) -> f64 {
        crate::rational::to_f64(&self.0.ratio)
    }

    /// `S_w` as an affine map together with `p_w`.
    pub fn compose(&self, w: &Word) -> AffineWord {
        let mut scale = Rat::one();
        let mut offset = Rat::zero();
        let mut weight = Rat::one();
        for &l in w.letters() {
            offset += &scale * &self.0.digits[l];
            scale *= &self.0.ratio;
            weight *= &self.0.probs[l];
        }
        AffineWord {
            scale,
            offset,
            weight,
        }
    }

    pub fn word(&self, letters: Vec<usize>) -> Result<Word, WordError> {
        Word::new(letters, self.alphabet_size())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("letter {letter} at position {position} is outside the alphabet of size {alphabet}")]
pub struct WordError {
    pub position: usize,
    pub letter: usize,
    pub alphabet: usize,
}

/// Finite word over `{0..k}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Word(Vec<usize>);

impl Word {
    pub fn new(letters: Vec<usize>, alphabet: usize) -> Result<Self, WordError> {
        if let Some((position, &letter)) =
            letters.iter().enumerate().find(|(_, &l)| l >= alphabet)
        {
            return Err(WordError {
                position,
                letter,
                alphabet,
            });
        }
        Ok(Word(letters))
    }

    pub fn empty() -> Self {
        Word(Vec::new())
    }

    pub fn letters(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn concat(&self, other: &Word) -> Word {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        Word(v)
    }
}

/// `x -> scale * x + offset`, carrying the word weight `p_w`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AffineWord {
    pub scale: Rat,
    pub offset: Rat,
    pub weight: Rat,
}

impl AffineWord {
    pub fn apply(&self, x: &Rat) -> Rat {
        &self.scale * x + &self.offset
    }

    /// `self ∘ other`.
    pub fn then_inner(&self, other: &AffineWord) -> AffineWord {
        AffineWord {
            scale: &self.scale * &other.scale,
            offset: &self.scale * &other.offset + &self.offset,
            weight: &self.weight * &other.weight,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::int;

    fn three_four_example() -> IfsSpec {
        let idx = [0u64, 1, 2, 3, 4, 6, 8, 9, 10, 11, 12];
        let w = [1i64, 20, 20, 20, 20, 2, 20, 20, 20, 20, 1];
        IfsSpec::from_indices(4, &idx, w.iter().map(|&n| frac(n, 164)).collect())
    }

    #[test]
    fn accepts_the_sixteen_index_example() {
        let ifs = three_four_example().validate().unwrap();
        assert_eq!(ifs.alphabet_size(), 11);
        assert_eq!(ifs.min_prob(), &frac(1, 164));
    }

    #[test]
    fn accepts_two_map_uniform() {
        let spec = IfsSpec {
            ratio: frac(1, 2),
            digits: vec![int(0), frac(1, 2)],
            probs: vec![frac(1, 2), frac(1, 2)],
        };
        assert!(spec.validate().is_ok());
    }

    #[test]
    fn reports_support_gap() {
        let spec = IfsSpec {
            ratio: frac(1, 4),
            digits: vec![int(0), frac(3, 4)],
            probs: vec![frac(1, 2), frac(1, 2)],
        };
        let err = spec.validate().unwrap_err();
        assert_eq!(
            err.0,
            vec![Violation::SupportGap {
                index: 0,
                gap: frac(3, 4)
            }]
        );
    }

    #[test]
    fn reports_every_violation() {
        let spec = IfsSpec {
            ratio: frac(1, 4),
            digits: vec![frac(1, 16), frac(1, 2)],
            probs: vec![frac(1, 2), frac(1, 4)],
        };
        let err = spec.validate().unwrap_err();
        for name in [
            "HullViolation",
            "SupportGap",
            "ProbabilitySum",
            "StandardAssumptionViolation",
        ] {
            assert!(err.contains(name), "missing {name} in {err}");
        }
    }

    #[test]
    fn min_probability_must_sit_at_both_ends() {
        let spec = IfsSpec {
            ratio: frac(1, 2),
            digits: vec![int(0), frac(1, 4), frac(1, 2)],
            probs: vec![frac(1, 3), frac(1, 6), frac(1, 2)],
        };
        let err = spec.validate().unwrap_err();
        assert!(err.0.contains(&Violation::StandardAssumptionViolation { index: 1 }));
        assert!(err.0.contains(&Violation::StandardAssumptionViolation { index: 2 }));
    }

    #[test]
    fn compose_examples() {
        let ifs = three_four_example().validate().unwrap();
        let id = ifs.compose(&Word::empty());
        assert_eq!(id.scale, int(1));
        assert_eq!(id.offset, int(0));
        assert_eq!(id.weight, int(1));

        let zz = ifs.compose(&ifs.word(vec![0, 0]).unwrap());
        assert_eq!(zz.scale, frac(1, 16));
        assert_eq!(zz.offset, int(0));
        assert_eq!(zz.weight, frac(1, 164 * 164));

        // letter 5 is the map with digit 6/16
        let ss = ifs.compose(&ifs.word(vec![5, 5]).unwrap());
        assert_eq!(ss.scale, frac(1, 16));
        assert_eq!(ss.offset, frac(15, 32));
        assert_eq!(ss.weight, frac(4, 164 * 164));
    }

    #[test]
    fn word_rejects_foreign_letters() {
        assert!(Word::new(vec![0, 3], 3).is_err());
    }
}
