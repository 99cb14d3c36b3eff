//! Summary statistics S1-S11 of a haplotype matrix.

use std::collections::HashMap;

use rand::Rng;

use crate::data::{HaplotypeMatrix, Variant};
use crate::pool::{Statistic, StatisticPool};

fn haplotype_counts(m: &HaplotypeMatrix) -> Vec<usize> {
    let mut counts: HashMap<Vec<u64>, usize> = HashMap::new();
    for key in m.row_keys() {
        *counts.entry(key).or_default() += 1;
    }
    counts.into_values().collect()
}

/// Number of segregating sites.
pub fn segregating_sites(m: &HaplotypeMatrix) -> f64 {
    m.sites() as f64
}

pub fn distinct_haplotypes(m: &HaplotypeMatrix) -> f64 {
    haplotype_counts(m).len() as f64
}

/// Probability that two sequences drawn with replacement are identical.
pub fn haplotype_homozygosity(m: &HaplotypeMatrix) -> f64 {
    let n = m.sequences() as f64;
    haplotype_counts(m).iter().map(|&c| (c as f64 / n).powi(2)).sum()
}

/// Mean over sites of the per-site homozygosity; 1 without sites.
pub fn snp_homozygosity(m: &HaplotypeMatrix) -> f64 {
    if m.sites() == 0 {
        return 1.0;
    }
    let n = m.sequences() as f64;
    let total: f64 = (0..m.sites())
        .map(|j| {
            let p = m.derived_count(j) as f64 / n;
            p * p + (1.0 - p) * (1.0 - p)
        })
        .sum();
    total / m.sites() as f64
}

pub fn most_common_haplotype(m: &HaplotypeMatrix) -> f64 {
    haplotype_counts(m).into_iter().max().unwrap_or(0) as f64
}

/// Mean number of differences over unordered pairs of sequences.
pub fn mean_pairwise_differences(m: &HaplotypeMatrix) -> f64 {
    let n = m.sequences();
    if n < 2 {
        return 0.0;
    }
    let total: usize = (0..m.sites())
        .map(|j| {
            let c = m.derived_count(j);
            c * (n - c)
        })
        .sum();
    total as f64 / (n * (n - 1) / 2) as f64
}

/// Haplotypes carried by exactly one sequence.
pub fn singleton_haplotypes(m: &HaplotypeMatrix) -> f64 {
    haplotype_counts(m).into_iter().filter(|&c| c == 1).count() as f64
}

/// Sites whose derived allele is carried by exactly one sequence.
pub fn singleton_sites(m: &HaplotypeMatrix) -> f64 {
    (0..m.sites()).filter(|&j| m.derived_count(j) == 1).count() as f64
}

fn joint_count(a: &[u64], b: &[u64]) -> usize {
    a.iter().zip(b).map(|(x, y)| (x & y).count_ones() as usize).sum()
}

/// Visits every site pair `i < j` with `(c_i, c_j, c_ij)`.
fn for_each_pair(m: &HaplotypeMatrix, mut f: impl FnMut(usize, usize, usize)) {
    let counts: Vec<usize> = (0..m.sites()).map(|j| m.derived_count(j)).collect();
    for i in 0..m.sites() {
        for j in i + 1..m.sites() {
            f(counts[i], counts[j], joint_count(m.column(i), m.column(j)));
        }
    }
}

/// Mean r^2 over site pairs; 0 with fewer than two sites.
pub fn mean_r2(m: &HaplotypeMatrix) -> f64 {
    let s = m.sites();
    if s < 2 {
        return 0.0;
    }
    let n = m.sequences() as f64;
    let mut total = 0.0;
    for_each_pair(m, |ci, cj, cij| {
        let (pi, pj, pij) = (ci as f64 / n, cj as f64 / n, cij as f64 / n);
        let dev = pij - pi * pj;
        total += dev * dev / (pi * (1.0 - pi) * pj * (1.0 - pj));
    });
    total * 2.0 / (s * (s - 1)) as f64
}

/// Fraction of site pairs showing all four gametes; 0 with fewer than two sites.
pub fn four_gamete_fraction(m: &HaplotypeMatrix) -> f64 {
    let s = m.sites();
    if s < 2 {
        return 0.0;
    }
    let n = m.sequences();
    let mut hits = 0usize;
    for_each_pair(m, |ci, cj, cij| {
        if cij > 0 && ci > cij && cj > cij && n + cij > ci + cj {
            hits += 1;
        }
    });
    hits as f64 * 2.0 / (s * (s - 1)) as f64
}

pub fn popgen_pool() -> StatisticPool {
    type F = fn(&HaplotypeMatrix) -> f64;
    let hm = Variant::HaplotypeMatrix;
    let plain: [(&str, F); 10] = [
        ("S1", segregating_sites),
        ("S2", distinct_haplotypes),
        ("S3", haplotype_homozygosity),
        ("S4", snp_homozygosity),
        ("S5", most_common_haplotype),
        ("S6", mean_pairwise_differences),
        ("S7", singleton_haplotypes),
        ("S8", singleton_sites),
        ("S9", mean_r2),
        ("S10", four_gamete_fraction),
    ];
    let mut stats: Vec<Statistic> = plain
        .into_iter()
        .map(|(name, f)| {
            Statistic::new(name, 1, hm, 0.0, move |d, _, out| {
                out.push(f(d.as_haplotypes().expect("variant checked by the pool")))
            })
        })
        .collect();
    stats.push(Statistic::new("S11", 1, hm, 0.0, |d, ctx, out| {
        out.push(ctx.rng(d).random::<f64>())
    }));
    StatisticPool::new("popgen11", stats).expect("static pool is valid")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::Dataset;
    use crate::models::coalescent::{coalescent_models, simulate_coalescent, CoalescentOptions, CoalescentSpec, Scenario};
    use crate::pool::evaluate_subset;
    use crate::rng::{self, NoiseStream};

    fn all(m: HaplotypeMatrix) -> Vec<f64> {
        let pool = popgen_pool();
        let d = Dataset::haplotypes(0, m);
        evaluate_subset(&pool, &pool.full_subset(), &d, NoiseStream::new(0)).unwrap().values
    }

    #[test]
    fn monomorphic_sample() {
        let m = HaplotypeMatrix::from_columns(4, vec![]).unwrap();
        let s = all(m);
        assert_eq!(&s[..7], &[0.0, 1.0, 1.0, 1.0, 4.0, 0.0, 0.0]);
        assert_eq!(s[8], 0.0);
        assert_eq!(s[9], 0.0);
    }

    #[test]
    fn two_complementary_haplotypes() {
        let m = HaplotypeMatrix::from_rows(&[vec![1, 0], vec![0, 1]]).unwrap();
        let s = all(m);
        assert_eq!(s[0], 2.0);
        assert_eq!(s[1], 2.0);
        assert_eq!(s[2], 0.5);
        assert_eq!(s[3], 0.5);
        assert_eq!(s[5], 2.0);
        assert_eq!(s[7], 2.0);
        assert_eq!(s[9], 0.0);
    }

    /// Direct row-by-row definitions, for cross-checking the bitset paths.
    fn brute(rows: &[Vec<u8>]) -> (f64, f64, f64) {
        let n = rows.len();
        let s = rows[0].len();
        let mut diffs = 0usize;
        for a in 0..n {
            for b in a + 1..n {
                diffs += (0..s).filter(|&j| rows[a][j] != rows[b][j]).count();
            }
        }
        let mut r2 = 0.0;
        let mut four = 0usize;
        for i in 0..s {
            for j in i + 1..s {
                let mut g = [[0usize; 2]; 2];
                for r in rows {
                    g[r[i] as usize][r[j] as usize] += 1;
                }
                if g.iter().flatten().all(|&c| c > 0) {
                    four += 1;
                }
                let nf = n as f64;
                let pi = (g[1][0] + g[1][1]) as f64 / nf;
                let pj = (g[0][1] + g[1][1]) as f64 / nf;
                let d = g[1][1] as f64 / nf - pi * pj;
                r2 += d * d / (pi * (1.0 - pi) * pj * (1.0 - pj));
            }
        }
        let pairs = (s * (s - 1) / 2) as f64;
        (diffs as f64 / (n * (n - 1) / 2) as f64, r2 / pairs, four as f64 / pairs)
    }

    #[test]
    fn simulated_matrices_match_brute_force() {
        for i in 0..40 {
            let spec = CoalescentSpec {
                scenario: Scenario::Constant,
                n: 70,
                theta: 8.0,
            };
            let d = simulate_coalescent(&spec, i, &mut rng::stream(9, &[i])).unwrap();
            let m = d.as_haplotypes().unwrap();
            if m.sites() < 2 {
                continue;
            }
            let rows: Vec<Vec<u8>> = (0..m.sequences())
                .map(|r| (0..m.sites()).map(|j| m.allele(r, j)).collect())
                .collect();
            let (pi, r2, four) = brute(&rows);
            assert!((mean_pairwise_differences(m) - pi).abs() < 1e-12);
            assert!((mean_r2(m) - r2).abs() < 1e-12);
            assert_eq!(four_gamete_fraction(m), four);
            assert_eq!(four, 0.0);
        }
    }

    #[test]
    fn four_gametes_detected() {
        let m = HaplotypeMatrix::from_rows(&[vec![0, 0], vec![0, 1], vec![1, 0], vec![1, 1]]).unwrap();
        assert_eq!(four_gamete_fraction(&m), 1.0);
        assert_eq!(mean_r2(&m), 0.0);
    }

    #[test]
    fn tajima_expectation() {
        let reps = 10_000;
        let spec = CoalescentSpec {
            scenario: Scenario::Constant,
            n: 100,
            theta: 20.0,
        };
        let mean = (0..reps)
            .map(|i| {
                let d = simulate_coalescent(&spec, i, &mut rng::stream(10, &[i])).unwrap();
                mean_pairwise_differences(d.as_haplotypes().unwrap())
            })
            .sum::<f64>()
            / reps as f64;
        assert!((mean / 20.0 - 1.0).abs() < 0.05, "{mean}");
    }

    #[test]
    fn statistic_ranges_on_simulations() {
        let pool = popgen_pool();
        let models = coalescent_models(&CoalescentOptions {
            n: 40,
            ..Default::default()
        });
        for m in &models {
            for i in 0..60 {
                let mut rng = rng::stream(11, &[m.index as u64, i]);
                let theta = m.model.sample_prior(&mut rng);
                let d = m.model.simulate(&theta, i, &mut rng).unwrap();
                let s = evaluate_subset(&pool, &pool.full_subset(), &d, NoiseStream::new(1)).unwrap().values;
                let n = 40.0;
                assert!(s[2] > 0.0 && s[2] <= 1.0);
                assert!(s[3] > 0.0 && s[3] <= 1.0);
                assert!(s[1] <= n && s[4] <= n);
                assert!(s[6] <= s[1]);
                assert!(s[7] <= s[0]);
                assert!((0.0..=1.0 + 1e-12).contains(&s[8]));
                assert_eq!(s[9], 0.0);
                assert!((0.0..1.0).contains(&s[10]));
            }
        }
    }
}
