//! Pearson homogeneity test on two count vectors.

use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::error::{Error, Result};

/// Chi-square statistic and p-value of the 2 x q table with rows `a` and `b`.
///
/// When a category is empty in both rows its expected count is zero; every
/// cell then gets a Haldane-Anscombe half count.
pub fn pearson_chi2(a: &[u64], b: &[u64]) -> Result<(f64, f64)> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    if a.len() < 2 {
        return Err(Error::InvalidConfig("chi-square needs at least two categories".into()));
    }
    let (sa, sb): (u64, u64) = (a.iter().sum(), b.iter().sum());
    if sa == 0 && sb == 0 {
        return Err(Error::AllZeroCounts);
    }
    if sa == 0 || sb == 0 {
        return Err(Error::InvalidConfig("each count vector needs a positive total".into()));
    }
    let half = if a.iter().zip(b).any(|(&x, &y)| x + y == 0) { 0.5 } else { 0.0 };
    let rows: [Vec<f64>; 2] = [
        a.iter().map(|&x| x as f64 + half).collect(),
        b.iter().map(|&x| x as f64 + half).collect(),
    ];
    let row_totals = [rows[0].iter().sum::<f64>(), rows[1].iter().sum::<f64>()];
    let total = row_totals[0] + row_totals[1];
    let mut stat = 0.0;
    for (x, y) in rows[0].iter().zip(&rows[1]) {
        let col = x + y;
        for (observed, row_total) in [(x, row_totals[0]), (y, row_totals[1])] {
            let expected = row_total * col / total;
            stat += (observed - expected).powi(2) / expected;
        }
    }
    let df = (a.len() - 1) as f64;
    let p = ChiSquared::new(df).expect("df >= 1").sf(stat);
    Ok((stat, p))
}
