//! Distances between summary vectors.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pool::SummaryVector;

/// Distance used in the ABC acceptance rule.
///
/// Both variants are sums of squared differences of transformed components;
/// they differ only in the per-component transform.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Distance {
    /// Squared difference of logs of the shifted values `v - L + 1`.
    #[default]
    LogSquare,
    /// Plain squared Euclidean distance.
    Squared,
}

impl Distance {
    #[inline]
    pub fn transform(self, value: f64, lower_bound: f64) -> f64 {
        match self {
            Distance::LogSquare => shifted_log(value, lower_bound),
            Distance::Squared => value,
        }
    }

    /// Transformed value divided by its scale: the coordinate distances are taken in.
    #[inline]
    pub fn coordinate(self, value: f64, lower_bound: f64, scale: f64) -> f64 {
        self.transform(value, lower_bound) / scale
    }

    pub fn between(self, a: &SummaryVector, b: &SummaryVector) -> Result<f64> {
        check_layout(a, b)?;
        Ok(a.values
            .iter()
            .zip(&b.values)
            .zip(a.lower_bounds.iter().zip(&a.scales))
            .map(|((&x, &y), (&l, &s))| {
                let d = self.coordinate(x, l, s) - self.coordinate(y, l, s);
                d * d
            })
            .sum())
    }
}

/// `ln(v - L + 1)` for `v >= L`, continued as `v - L` below the bound.
///
/// The continuation matches value and slope at `v = L`, so a statistic that
/// strays below its declared bound still gets a finite, monotone distance.
#[inline]
pub fn shifted_log(value: f64, lower_bound: f64) -> f64 {
    let x = value - lower_bound;
    if x >= 0.0 {
        x.ln_1p()
    } else {
        x
    }
}

fn check_layout(a: &SummaryVector, b: &SummaryVector) -> Result<()> {
    if a.len() != b.len() || a.keys != b.keys {
        return Err(Error::LengthMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    Ok(())
}

/// `Σ (ln ã − ln b̃)²` over the shifted components.
pub fn log_square_distance(a: &SummaryVector, b: &SummaryVector) -> Result<f64> {
    Distance::LogSquare.between(a, b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sv(v: &[f64]) -> SummaryVector {
        SummaryVector::from_values(v.to_vec())
    }

    /// Raw log form for strictly positive values, bypassing the shift.
    fn shifted(v: &[f64]) -> SummaryVector {
        // v - L + 1 = v when L = 1
        let mut s = sv(v);
        s.lower_bounds = vec![1.0; v.len()];
        s
    }

    #[test]
    fn identical_summaries_have_zero_distance() {
        assert_eq!(log_square_distance(&sv(&[0.3, 7.0]), &sv(&[0.3, 7.0])).unwrap(), 0.0);
    }

    #[test]
    fn one_vs_e_is_one() {
        let d = log_square_distance(&shifted(&[1.0]), &shifted(&[std::f64::consts::E])).unwrap();
        assert!((d - 1.0).abs() < 1e-15);
    }

    #[test]
    fn swapped_pair() {
        let d = log_square_distance(&shifted(&[2.0, 4.0]), &shifted(&[4.0, 2.0])).unwrap();
        let expected = 2.0 * std::f64::consts::LN_2.powi(2);
        assert!((d - expected).abs() < 1e-15);
        assert!((d - 0.9609).abs() < 1e-4);
    }

    #[test]
    fn length_mismatch_is_error() {
        assert!(matches!(
            log_square_distance(&sv(&[1.0]), &sv(&[1.0, 2.0])),
            Err(Error::LengthMismatch { .. })
        ));
    }

    #[test]
    fn continuation_below_bound_is_c1() {
        let l = -2.0;
        let h = 1e-7;
        let left = (shifted_log(l, l) - shifted_log(l - h, l)) / h;
        let right = (shifted_log(l + h, l) - shifted_log(l, l)) / h;
        assert_eq!(shifted_log(l, l), 0.0);
        assert!((left - 1.0).abs() < 1e-6 && (right - 1.0).abs() < 1e-6);
    }

    proptest! {
        #[test]
        fn premetric(a in prop::collection::vec(-50.0f64..50.0, 1..6), seed in prop::collection::vec(-50.0f64..50.0, 6)) {
            let b: Vec<f64> = seed[..a.len()].to_vec();
            let (a, b) = (sv(&a), sv(&b));
            let ab = log_square_distance(&a, &b).unwrap();
            let ba = log_square_distance(&b, &a).unwrap();
            prop_assert!(ab >= 0.0);
            prop_assert_eq!(ab, ba);
            prop_assert_eq!(log_square_distance(&a, &a).unwrap(), 0.0);
        }
    }
}
