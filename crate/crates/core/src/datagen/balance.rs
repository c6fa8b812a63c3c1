use std::fmt;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::dataset::DatasetRecord;
use crate::board::Centipawns;

/// Target label distribution. Fractions are of the whole output unless noted.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BalanceQuotas {
    /// Share of positive labels among the nonzero ones.
    pub sign_split: f64,
    /// Minimum share with |label| <= `band`.
    pub quiet_band_min: f64,
    /// Minimum share with |label| > `band`.
    pub imbalanced_min: f64,
    pub tolerance: f64,
    pub band: Centipawns,
    /// Optional cap on the output size.
    pub max_records: Option<usize>,
}

impl Default for BalanceQuotas {
    fn default() -> BalanceQuotas {
        BalanceQuotas {
            sign_split: 0.5,
            quiet_band_min: 0.5,
            imbalanced_min: 0.4,
            tolerance: 0.02,
            band: 100,
            max_records: None,
        }
    }
}

impl BalanceQuotas {
    pub fn validate(&self) -> Result<(), String> {
        let unit = |x: f64| (0.0..=1.0).contains(&x);
        if !(unit(self.sign_split) && unit(self.quiet_band_min) && unit(self.imbalanced_min)) {
            return Err("quota fractions must lie in [0, 1]".into());
        }
        if self.quiet_band_min + self.imbalanced_min > 1.0 {
            return Err("band and imbalanced minimums add up to more than 1".into());
        }
        if !(0.0..0.5).contains(&self.tolerance) || self.band < 0 {
            return Err("bad tolerance or band".into());
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Stratum {
    PositiveBand,
    PositiveImbalanced,
    NegativeBand,
    NegativeImbalanced,
    Zero,
}

fn stratum(label: Centipawns, band: Centipawns) -> Stratum {
    match label {
        0 => Stratum::Zero,
        l if l > 0 && l <= band => Stratum::PositiveBand,
        l if l > 0 => Stratum::PositiveImbalanced,
        l if l >= -band => Stratum::NegativeBand,
        _ => Stratum::NegativeImbalanced,
    }
}

/// Record counts per (sign x band) stratum; zero labels are counted apart.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct StrataCounts {
    pub positive_band: usize,
    pub positive_imbalanced: usize,
    pub negative_band: usize,
    pub negative_imbalanced: usize,
    pub zero: usize,
}

impl StrataCounts {
    pub fn of(records: &[DatasetRecord], band: Centipawns) -> StrataCounts {
        let mut c = StrataCounts::default();
        for r in records {
            match stratum(r.label(), band) {
                Stratum::PositiveBand => c.positive_band += 1,
                Stratum::PositiveImbalanced => c.positive_imbalanced += 1,
                Stratum::NegativeBand => c.negative_band += 1,
                Stratum::NegativeImbalanced => c.negative_imbalanced += 1,
                Stratum::Zero => c.zero += 1,
            }
        }
        c
    }

    pub fn total(&self) -> usize {
        self.positive() + self.negative() + self.zero
    }

    pub fn positive(&self) -> usize {
        self.positive_band + self.positive_imbalanced
    }

    pub fn negative(&self) -> usize {
        self.negative_band + self.negative_imbalanced
    }

    pub fn band(&self) -> usize {
        self.positive_band + self.negative_band + self.zero
    }

    pub fn imbalanced(&self) -> usize {
        self.positive_imbalanced + self.negative_imbalanced
    }

    /// Positive share among nonzero labels.
    pub fn positive_fraction(&self) -> f64 {
        self.positive() as f64 / (self.positive() + self.negative()).max(1) as f64
    }

    pub fn band_fraction(&self) -> f64 {
        self.band() as f64 / self.total().max(1) as f64
    }

    pub fn imbalanced_fraction(&self) -> f64 {
        self.imbalanced() as f64 / self.total().max(1) as f64
    }

    /// Whether the counts satisfy `q` within its tolerance. The sign split is
    /// checked both among nonzero labels and over the whole set.
    pub fn meets(&self, q: &BalanceQuotas) -> bool {
        let n = self.total().max(1) as f64;
        let eps = 1e-12;
        self.total() > 0
            && (self.positive_fraction() - q.sign_split).abs() <= q.tolerance + eps
            && (self.positive() as f64 / n - q.sign_split).abs() <= q.tolerance + eps
            && (self.negative() as f64 / n - (1.0 - q.sign_split)).abs() <= q.tolerance + eps
            && self.band_fraction() >= q.quiet_band_min - q.tolerance - eps
            && self.imbalanced_fraction() >= q.imbalanced_min - q.tolerance - eps
    }
}

impl fmt::Display for StrataCounts {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "+band {} +imbalanced {} -band {} -imbalanced {} zero {}",
            self.positive_band, self.positive_imbalanced, self.negative_band, self.negative_imbalanced, self.zero
        )
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum BalanceError {
    #[error("invalid quotas: {0}")]
    Quotas(String),
    #[error("quotas cannot be met: {stratum} stratum is deficient ({counts})")]
    Infeasible { stratum: &'static str, counts: StrataCounts },
}

/// Chosen per-stratum sizes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
struct Plan {
    pb: usize,
    pi: usize,
    nb: usize,
    ni: usize,
    z: usize,
}

fn ceil_frac(x: f64, n: usize) -> usize {
    (x * n as f64 - 1e-9).ceil().max(0.0) as usize
}

fn plan(c: &StrataCounts, q: &BalanceQuotas) -> Option<Plan> {
    let (avail_p, avail_n) = (c.positive(), c.negative());
    let cap = q.max_records.unwrap_or(usize::MAX);
    let natural_imb = c.imbalanced() as f64 / c.total().max(1) as f64;
    let max_signed = (avail_p + avail_n).min(cap);

    for t in (1..=max_signed).rev() {
        let p = (q.sign_split * t as f64).round() as usize;
        let n = t - p;
        if p > avail_p || n > avail_n || (p as f64 / t as f64 - q.sign_split).abs() > q.tolerance {
            continue;
        }
        // Zero labels may dilute each sign's overall share by at most the tolerance.
        let mut z = c.zero.min(cap - t);
        let lo_p = q.sign_split - q.tolerance;
        if lo_p > 0.0 {
            z = z.min(((p as f64 / lo_p).floor() as usize).saturating_sub(t));
        }
        let lo_n = 1.0 - q.sign_split - q.tolerance;
        if lo_n > 0.0 {
            z = z.min(((n as f64 / lo_n).floor() as usize).saturating_sub(t));
        }
        let total = t + z;

        let pi_lo = p.saturating_sub(c.positive_band);
        let pi_hi = p.min(c.positive_imbalanced);
        let ni_lo = n.saturating_sub(c.negative_band);
        let ni_hi = n.min(c.negative_imbalanced);
        if pi_lo > pi_hi || ni_lo > ni_hi {
            continue;
        }
        let need_imb = ceil_frac(q.imbalanced_min, total);
        let need_band = ceil_frac(q.quiet_band_min, total);
        let lower = (pi_lo + ni_lo).max(need_imb);
        if total < need_band {
            continue;
        }
        let upper = (pi_hi + ni_hi).min(total - need_band);
        if lower > upper {
            continue;
        }
        let imb = ((natural_imb * total as f64).round() as usize).clamp(lower, upper);
        let pi_target = (imb as f64 * p as f64 / t as f64).round() as usize;
        let pi = pi_target.clamp(pi_lo.max(imb.saturating_sub(ni_hi)), pi_hi.min(imb - ni_lo));
        let ni = imb - pi;
        return Some(Plan {
            pb: p - pi,
            pi,
            nb: n - ni,
            ni,
            z,
        });
    }
    None
}

fn deficient(c: &StrataCounts, q: &BalanceQuotas) -> &'static str {
    if c.positive() == 0 && q.sign_split > 0.0 {
        "positive"
    } else if c.negative() == 0 && q.sign_split < 1.0 {
        "negative"
    } else if c.imbalanced() == 0 && q.imbalanced_min > 0.0 {
        "imbalanced"
    } else if c.band() == 0 && q.quiet_band_min > 0.0 {
        "band"
    } else if (c.imbalanced() as f64) < q.imbalanced_min * c.total() as f64 {
        "imbalanced"
    } else {
        "band"
    }
}

/// Stratified downsampling to the quotas, as large as possible. Selection
/// within each stratum is uniform under `seed` and the output order is a
/// seeded shuffle.
pub fn balance_dataset(records: &[DatasetRecord], quotas: &BalanceQuotas, seed: u64) -> Result<Vec<DatasetRecord>, BalanceError> {
    quotas.validate().map_err(BalanceError::Quotas)?;
    let counts = StrataCounts::of(records, quotas.band);
    let plan = plan(&counts, quotas).ok_or_else(|| BalanceError::Infeasible {
        stratum: deficient(&counts, quotas),
        counts,
    })?;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(plan.pb + plan.pi + plan.nb + plan.ni + plan.z);
    for (s, k) in [
        (Stratum::PositiveBand, plan.pb),
        (Stratum::PositiveImbalanced, plan.pi),
        (Stratum::NegativeBand, plan.nb),
        (Stratum::NegativeImbalanced, plan.ni),
        (Stratum::Zero, plan.z),
    ] {
        let mut members: Vec<&DatasetRecord> =
            records.iter().filter(|r| stratum(r.label(), quotas.band) == s).collect();
        members.shuffle(&mut rng);
        out.extend(members.into_iter().take(k).copied());
    }
    out.shuffle(&mut rng);
    debug_assert!(StrataCounts::of(&out, quotas.band).meets(quotas));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::board::Position;
    use rand::Rng;

    fn with_labels(labels: &[Centipawns]) -> Vec<DatasetRecord> {
        let p = Position::startpos();
        labels.iter().map(|&l| DatasetRecord::new(&p, l)).collect()
    }

    #[test]
    fn uniform_labels_meet_quotas() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let labels: Vec<Centipawns> = (0..10_000).map(|_| rng.gen_range(-300..=300)).collect();
        let recs = with_labels(&labels);
        let q = BalanceQuotas::default();
        let out = balance_dataset(&recs, &q, 5).unwrap();
        let c = StrataCounts::of(&out, 100);
        assert!(c.meets(&q), "{c}");
        assert!((c.positive_fraction() - 0.5).abs() <= 0.02);
        assert!(c.band_fraction() >= 0.48);
        assert!(c.imbalanced_fraction() >= 0.38);
        // Band-limited: roughly twice the band stratum survives.
        assert!(out.len() > 6_000, "{}", out.len());
    }

    #[test]
    fn no_negatives_is_infeasible() {
        let recs = with_labels(&[10, 50, 150, 300, 0]);
        match balance_dataset(&recs, &BalanceQuotas::default(), 1) {
            Err(BalanceError::Infeasible { stratum, .. }) => assert_eq!(stratum, "negative"),
            other => panic!("{other:?}"),
        }
        let err = balance_dataset(&recs, &BalanceQuotas::default(), 1).unwrap_err();
        assert!(err.to_string().contains("negative"));
    }

    #[test]
    fn no_imbalanced_is_infeasible() {
        let recs = with_labels(&[10, -50, 20, -30]);
        match balance_dataset(&recs, &BalanceQuotas::default(), 1) {
            Err(BalanceError::Infeasible { stratum, .. }) => assert_eq!(stratum, "imbalanced"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn already_balanced_input_is_kept_and_shuffled() {
        let labels = [50, -50, 60, -60, 200, -200, 70, -70, 300, -300];
        let recs = with_labels(&labels);
        let a = balance_dataset(&recs, &BalanceQuotas::default(), 9).unwrap();
        let b = balance_dataset(&recs, &BalanceQuotas::default(), 9).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 10);
        let mut sorted: Vec<i16> = a.iter().map(|r| r.label).collect();
        sorted.sort();
        let mut orig: Vec<i16> = labels.iter().map(|&l| l as i16).collect();
        orig.sort();
        assert_eq!(sorted, orig);
    }

    #[test]
    fn zero_labels_are_limited() {
        let mut labels = vec![0; 50];
        labels.extend([50, -50, 200, -200, 60, -60, 250, -250, 10, -10]);
        let out = balance_dataset(&with_labels(&labels), &BalanceQuotas::default(), 3).unwrap();
        let c = StrataCounts::of(&out, 100);
        assert!(c.meets(&BalanceQuotas::default()), "{c}");
        assert!(c.zero <= 1);
    }

    #[test]
    fn max_records_caps_output() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let labels: Vec<Centipawns> = (0..5_000).map(|_| rng.gen_range(-400..=400)).collect();
        let q = BalanceQuotas {
            max_records: Some(1_000),
            ..BalanceQuotas::default()
        };
        let out = balance_dataset(&with_labels(&labels), &q, 3).unwrap();
        assert_eq!(out.len(), 1_000);
        assert!(StrataCounts::of(&out, 100).meets(&q));
    }
}
