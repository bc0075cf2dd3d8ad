//! Shared test infrastructure: random dataset/distribution generators and
//! an independent brute-force evaluator that deliberately avoids the
//! library's prefix-sum machinery.

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use vocbench::{ConfidenceDistribution, PredictionRecord, ScoredDataset};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// How confidences are drawn.
#[derive(Clone, Copy)]
pub enum ConfidenceStyle {
    /// Uniform doubles in [0, 1).
    Continuous,
    /// Multiples of 1/denominator — guarantees ties and, for dyadic
    /// denominators, exact `1 − c` flips.
    Grid(u32),
}

/// How weights are drawn.
#[derive(Clone, Copy)]
pub enum WeightStyle {
    /// Coin flip between unit weights and reals in [0.25, 4).
    Mixed,
    /// Small integers — weight sums are exact in any summation order, so
    /// order-insensitive quantities can be asserted bitwise.
    SmallInt,
}

/// A random weighted dataset with mixed correctness and optional ties.
pub fn random_dataset(
    rng: &mut ChaCha8Rng,
    max_n: usize,
    style: ConfidenceStyle,
    weights: WeightStyle,
) -> ScoredDataset {
    let n = rng.gen_range(1..=max_n.max(1));
    let weighted: bool = rng.gen();
    let calibrated_leaning: bool = rng.gen();
    let mut records = Vec::with_capacity(n);
    for _ in 0..n {
        let confidence = match style {
            ConfidenceStyle::Continuous => rng.gen::<f64>(),
            ConfidenceStyle::Grid(denominator) => {
                f64::from(rng.gen_range(0..=denominator)) / f64::from(denominator)
            }
        };
        let predicted = rng.gen_range(1..=3u32);
        let correct = if calibrated_leaning {
            rng.gen::<f64>() < confidence
        } else {
            rng.gen()
        };
        let label = if correct { predicted } else { predicted % 3 + 1 };
        let weight = match weights {
            WeightStyle::Mixed if weighted => rng.gen_range(0.25..4.0),
            WeightStyle::Mixed => 1.0,
            WeightStyle::SmallInt => f64::from(rng.gen_range(1..=8u32)),
        };
        records.push(PredictionRecord::new(confidence, predicted, label, weight).unwrap());
    }
    ScoredDataset::new(records).unwrap()
}

/// A random atom distribution whose confidences avoid the calibrated
/// thresholds ω/(ω+1) for ω ∈ {1/4, 1/2, 1, 2, 4} by at least `margin`,
/// so accept-set comparisons at those penalties are unambiguous.
pub fn random_distribution(rng: &mut ChaCha8Rng, margin: f64) -> ConfidenceDistribution {
    const BOUNDARIES: [f64; 5] = [0.2, 1.0 / 3.0, 0.5, 2.0 / 3.0, 0.8];
    let n_atoms = rng.gen_range(1..=6);
    let mut atoms: Vec<(f64, f64)> = Vec::with_capacity(n_atoms);
    while atoms.len() < n_atoms {
        let confidence = rng.gen_range(0.01..0.99);
        if BOUNDARIES.iter().any(|b| (confidence - b).abs() < margin) {
            continue;
        }
        if atoms.iter().any(|&(c, _)| (c - confidence).abs() < 1e-9) {
            continue;
        }
        atoms.push((confidence, rng.gen_range(0.1..1.0)));
    }
    let total: f64 = atoms.iter().map(|&(_, m)| m).sum();
    for atom in &mut atoms {
        atom.1 /= total;
    }
    ConfidenceDistribution::new(atoms).unwrap()
}

/// Applies a confidence transform to every record.
pub fn map_confidences(data: &ScoredDataset, f: impl Fn(f64) -> f64) -> ScoredDataset {
    let records: Vec<PredictionRecord> = data
        .records()
        .iter()
        .map(|r| r.with_confidence(f(r.confidence())).unwrap())
        .collect();
    ScoredDataset::new(records).unwrap()
}

/// Five strictly increasing confidence rescales mapping [0,1] into [0,1].
pub fn strict_rescales() -> Vec<(&'static str, fn(f64) -> f64)> {
    vec![
        ("square", |c| c * c),
        ("sqrt", f64::sqrt),
        ("affine_into_0.1_0.9", |c| 0.1 + 0.8 * c),
        ("cube", |c| c * c * c),
        ("odd_cubic", |c| (3.0 * c + c * c * c) / 4.0),
    ]
}

/// Independently computed value lines, one per candidate threshold:
/// accepted correct/wrong weight at each candidate, summed naively in
/// canonical dataset order.
pub struct BruteLines {
    pub thresholds: Vec<f64>,
    pub n_correct: Vec<f64>,
    pub n_wrong: Vec<f64>,
    pub total: f64,
}

pub fn brute_lines(data: &ScoredDataset) -> BruteLines {
    let mut thresholds: Vec<f64> = data.records().iter().map(|r| r.confidence()).collect();
    thresholds.push(0.0);
    thresholds.push(2.0); // always-abstain sentinel
    thresholds.sort_by(|a, b| a.total_cmp(b));
    thresholds.dedup();

    let total: f64 = data.records().iter().map(|r| r.weight()).sum();
    let mut n_correct = Vec::with_capacity(thresholds.len());
    let mut n_wrong = Vec::with_capacity(thresholds.len());
    for &t in &thresholds {
        let (mut nc, mut nw) = (0.0, 0.0);
        for r in data.records() {
            if r.confidence() >= t {
                if r.is_correct() {
                    nc += r.weight();
                } else {
                    nw += r.weight();
                }
            }
        }
        n_correct.push(nc);
        n_wrong.push(nw);
    }
    BruteLines {
        thresholds,
        n_correct,
        n_wrong,
        total,
    }
}

impl BruteLines {
    /// Dimensionless value of candidate `i` at penalty `omega`.
    pub fn value(&self, i: usize, omega: f64) -> f64 {
        (self.n_correct[i] - omega * self.n_wrong[i]) / self.total
    }

    /// Best achievable value at `omega`, maximizing over every candidate.
    pub fn best_value(&self, omega: f64) -> f64 {
        (0..self.thresholds.len())
            .map(|i| self.value(i, omega))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Best (value, threshold) at `omega`, ties resolved toward the larger
    /// threshold, mirroring the optimizer's tie rule.
    pub fn best(&self, omega: f64) -> (f64, f64) {
        let mut best_value = f64::NEG_INFINITY;
        let mut best_threshold = 2.0;
        for i in 0..self.thresholds.len() {
            let v = self.value(i, omega);
            if v >= best_value {
                best_value = v;
                best_threshold = self.thresholds[i];
            }
        }
        (best_value, best_threshold)
    }
}
