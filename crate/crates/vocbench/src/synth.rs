//! Calibrated synthetic confidence distributions.
//!
//! A [`ConfidenceDistribution`] is a discrete probability measure over
//! confidence values. Realizing it produces a dataset that is calibrated *by
//! construction*: an atom at confidence `c` with mass `m` contributes correct
//! weight `m·c` and wrong weight `m·(1−c)`, so empirical accuracy at every
//! confidence level equals the confidence itself. The transformations here —
//! mean-preserving polarization and upward mass pushing — keep or improve
//! that structure and drive the bundled `m1`/`m2`/`m3` presets.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::model::{PredictionRecord, ScoredDataset, ABSTAIN_CLASS};

/// Atom masses must sum to 1 within this absolute tolerance.
pub const MASS_TOLERANCE: f64 = 1e-12;

/// One point mass of a distribution.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Atom {
    pub confidence: f64,
    pub mass: f64,
}

/// A discrete probability distribution over confidence values: distinct
/// atoms sorted ascending, positive masses summing to 1 within
/// [`MASS_TOLERANCE`].
#[derive(Debug, Clone, PartialEq)]
pub struct ConfidenceDistribution {
    atoms: Vec<Atom>,
}

impl ConfidenceDistribution {
    /// Builds a distribution from (confidence, mass) pairs, sorting them and
    /// validating every invariant.
    pub fn new(atoms: impl IntoIterator<Item = (f64, f64)>) -> Result<Self> {
        let mut atoms: Vec<Atom> = atoms
            .into_iter()
            .map(|(confidence, mass)| Atom { confidence, mass })
            .collect();
        if atoms.is_empty() {
            return Err(Error::field("atoms", "distribution needs at least one atom"));
        }
        for a in &atoms {
            if !a.confidence.is_finite() || !(0.0..=1.0).contains(&a.confidence) {
                return Err(Error::field(
                    "confidence",
                    format!("must lie in [0, 1], got {}", a.confidence),
                ));
            }
            if !a.mass.is_finite() || a.mass <= 0.0 {
                return Err(Error::field(
                    "mass",
                    format!("must be positive and finite, got {}", a.mass),
                ));
            }
        }
        atoms.sort_by(|x, y| x.confidence.total_cmp(&y.confidence));
        for pair in atoms.windows(2) {
            if pair[0].confidence == pair[1].confidence {
                return Err(Error::field(
                    "confidence",
                    format!("atoms must be distinct, {} appears twice", pair[0].confidence),
                ));
            }
        }
        let mut sum = 0.0;
        for a in &atoms {
            sum += a.mass;
        }
        if (sum - 1.0).abs() > MASS_TOLERANCE {
            return Err(Error::field(
                "mass",
                format!("atom masses must sum to 1 within {MASS_TOLERANCE}, got {sum}"),
            ));
        }
        Ok(ConfidenceDistribution { atoms })
    }

    /// Atoms in ascending confidence order.
    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    /// Mean confidence `Σ m·c` — the accuracy of any calibrated realization.
    pub fn mean_confidence(&self) -> f64 {
        let mut mean = 0.0;
        for a in &self.atoms {
            mean += a.mass * a.confidence;
        }
        mean
    }

    /// Mass at an exact confidence value, or None.
    fn mass_at(&self, confidence: f64) -> Option<f64> {
        self.atoms
            .iter()
            .find(|a| a.confidence == confidence)
            .map(|a| a.mass)
    }
}

impl serde::Serialize for ConfidenceDistribution {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        self.atoms.serialize(serializer)
    }
}

impl<'de> serde::Deserialize<'de> for ConfidenceDistribution {
    fn deserialize<D: serde::Deserializer<'de>>(
        deserializer: D,
    ) -> std::result::Result<Self, D::Error> {
        let atoms = Vec::<Atom>::deserialize(deserializer)?;
        ConfidenceDistribution::new(atoms.into_iter().map(|a| (a.confidence, a.mass)))
            .map_err(serde::de::Error::custom)
    }
}

/// Merges exact-duplicate confidences (summing masses), drops zero masses,
/// and revalidates.
fn rebuild(atoms: Vec<Atom>) -> Result<ConfidenceDistribution> {
    let mut atoms = atoms;
    atoms.sort_by(|x, y| x.confidence.total_cmp(&y.confidence));
    let mut merged: Vec<Atom> = Vec::with_capacity(atoms.len());
    for a in atoms {
        match merged.last_mut() {
            Some(prev) if prev.confidence == a.confidence => prev.mass += a.mass,
            _ => merged.push(a),
        }
    }
    ConfidenceDistribution::new(
        merged
            .into_iter()
            .filter(|a| a.mass > 0.0)
            .map(|a| (a.confidence, a.mass)),
    )
}

/// How to turn a distribution into a dataset.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RealizeMode {
    /// Exact weighted encoding: two records per atom (correct with weight
    /// `m·c`, wrong with weight `m·(1−c)`), zero-weight records omitted.
    Population,
    /// `n` unit-weight records drawn with the fixed generator below.
    Sample { n: usize, seed: u64 },
}

/// Realizes a distribution as a calibrated dataset.
///
/// Sampling is reproducible by construction and the algorithm is frozen:
/// the generator is ChaCha8 seeded with `seed` (`seed_from_u64`), and each
/// record consumes exactly two consecutive `f64` draws from the uniform
/// [0, 1) distribution — the first selects the atom (first atom in ascending
/// confidence order whose cumulative mass exceeds the draw, last atom as the
/// rounding fallback), the second decides correctness (`draw < confidence`).
pub fn realize(dist: &ConfidenceDistribution, mode: RealizeMode) -> Result<ScoredDataset> {
    let predicted = ABSTAIN_CLASS + 1;
    let wrong_label = ABSTAIN_CLASS + 2;
    match mode {
        RealizeMode::Population => {
            let mut records = Vec::with_capacity(dist.atoms().len() * 2);
            for a in dist.atoms() {
                let correct_weight = a.mass * a.confidence;
                if correct_weight > 0.0 {
                    records.push(PredictionRecord::new(
                        a.confidence,
                        predicted,
                        predicted,
                        correct_weight,
                    )?);
                }
                let wrong_weight = a.mass * (1.0 - a.confidence);
                if wrong_weight > 0.0 {
                    records.push(PredictionRecord::new(
                        a.confidence,
                        predicted,
                        wrong_label,
                        wrong_weight,
                    )?);
                }
            }
            ScoredDataset::new(records)
        }
        RealizeMode::Sample { n, seed } => {
            if n == 0 {
                return Err(Error::field("n", "sample size must be at least 1"));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut records = Vec::with_capacity(n);
            for _ in 0..n {
                let atom_draw: f64 = rng.gen();
                let correct_draw: f64 = rng.gen();
                let mut chosen = *dist.atoms().last().expect("distribution is non-empty");
                let mut cumulative = 0.0;
                for a in dist.atoms() {
                    cumulative += a.mass;
                    if atom_draw < cumulative {
                        chosen = *a;
                        break;
                    }
                }
                let correct = correct_draw < chosen.confidence;
                records.push(PredictionRecord::unweighted(
                    chosen.confidence,
                    predicted,
                    if correct { predicted } else { wrong_label },
                )?);
            }
            ScoredDataset::new(records)
        }
    }
}

/// Mean-preserving polarization: takes `fraction` of the mass at `c0` and
/// splits it between `c_hi` and `c_lo` so the mean confidence — hence the
/// accuracy of calibrated realizations — is unchanged. The split puts
/// `p = (c0 − c_lo)/(c_hi − c_lo)` of the moved mass at `c_hi` and the rest
/// at `c_lo`, merging with any existing atoms there.
pub fn polarize(
    dist: &ConfidenceDistribution,
    c0: f64,
    fraction: f64,
    c_hi: f64,
    c_lo: f64,
) -> Result<ConfidenceDistribution> {
    if !fraction.is_finite() || fraction <= 0.0 || fraction > 1.0 {
        return Err(Error::field(
            "fraction",
            format!("must lie in (0, 1], got {fraction}"),
        ));
    }
    for (field, v) in [("c_lo", c_lo), ("c_hi", c_hi)] {
        if !v.is_finite() || !(0.0..=1.0).contains(&v) {
            return Err(Error::field(field, format!("must lie in [0, 1], got {v}")));
        }
    }
    if !(c_lo < c0) {
        return Err(Error::field(
            "c_lo",
            format!("must lie strictly below c0, got c_lo={c_lo} with c0={c0}"),
        ));
    }
    if !(c_hi > c0) {
        return Err(Error::field(
            "c_hi",
            format!("must lie strictly above c0, got c_hi={c_hi} with c0={c0}"),
        ));
    }
    let mass = dist
        .mass_at(c0)
        .ok_or_else(|| Error::field("c0", format!("no atom at confidence {c0}")))?;
    let moved = fraction * mass;
    let p = (c0 - c_lo) / (c_hi - c_lo);

    let mut atoms: Vec<Atom> = dist
        .atoms()
        .iter()
        .map(|a| {
            if a.confidence == c0 {
                Atom {
                    confidence: c0,
                    mass: a.mass - moved,
                }
            } else {
                *a
            }
        })
        .collect();
    atoms.push(Atom {
        confidence: c_hi,
        mass: p * moved,
    });
    atoms.push(Atom {
        confidence: c_lo,
        mass: (1.0 - p) * moved,
    });
    rebuild(atoms)
}

/// Moves `delta_mass` from the atom at `c0` strictly upward to `c_target`,
/// increasing the mean confidence. Pushing down is rejected.
pub fn push_up(
    dist: &ConfidenceDistribution,
    c0: f64,
    delta_mass: f64,
    c_target: f64,
) -> Result<ConfidenceDistribution> {
    if !delta_mass.is_finite() || delta_mass <= 0.0 {
        return Err(Error::field(
            "delta_mass",
            format!("must be positive, got {delta_mass}"),
        ));
    }
    if !c_target.is_finite() || c_target > 1.0 {
        return Err(Error::field(
            "c_target",
            format!("must lie in [0, 1], got {c_target}"),
        ));
    }
    if !(c_target > c0) {
        return Err(Error::field(
            "c_target",
            format!("must exceed the source confidence (pushing mass down is rejected), got c_target={c_target} with c0={c0}"),
        ));
    }
    let mass = dist
        .mass_at(c0)
        .ok_or_else(|| Error::field("c0", format!("no atom at confidence {c0}")))?;
    if mass < delta_mass {
        return Err(Error::field(
            "delta_mass",
            format!("atom at {c0} holds only {mass}, cannot move {delta_mass}"),
        ));
    }

    let mut atoms: Vec<Atom> = dist
        .atoms()
        .iter()
        .map(|a| {
            if a.confidence == c0 {
                Atom {
                    confidence: c0,
                    mass: a.mass - delta_mass,
                }
            } else {
                *a
            }
        })
        .collect();
    atoms.push(Atom {
        confidence: c_target,
        mass: delta_mass,
    });
    rebuild(atoms)
}

/// The three bundled snapshots: equal mean confidence 0.6, increasingly
/// polarized. Qualitative stand-ins for a model that keeps its accuracy and
/// calibration while learning to separate easy cases from hard ones.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    M1,
    M2,
    M3,
}

impl Preset {
    pub fn as_str(&self) -> &'static str {
        match self {
            Preset::M1 => "m1",
            Preset::M2 => "m2",
            Preset::M3 => "m3",
        }
    }

    pub const ALL: [Preset; 3] = [Preset::M1, Preset::M2, Preset::M3];
}

impl std::str::FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "m1" => Ok(Preset::M1),
            "m2" => Ok(Preset::M2),
            "m3" => Ok(Preset::M3),
            other => Err(Error::field(
                "preset",
                format!("expected m1, m2, or m3, got {other:?}"),
            )),
        }
    }
}

/// Literal preset distributions.
///
/// The chain "polarize m1 at 0.6 onto (0.4, 0.8)" reproduces m2 (and m2 → m3
/// similarly) only to within rounding, so the presets are fixed literal atom
/// lists and the polarization story is checked by tests at 1e−12 instead of
/// being used for construction.
pub fn preset(name: Preset) -> ConfidenceDistribution {
    let atoms: &[(f64, f64)] = match name {
        Preset::M1 => &[(0.6, 1.0)],
        Preset::M2 => &[(0.4, 0.5), (0.8, 0.5)],
        Preset::M3 => &[(0.2, 0.5), (1.0, 0.5)],
    };
    ConfidenceDistribution::new(atoms.iter().copied()).expect("presets are valid")
}
