//! Seeded property campaigns over random PSD ensembles.
//!
//! Each campaign draws `trials` independent instances, evaluates a
//! normalised margin per trial, and reduces them into a
//! [`VerificationReport`] that keeps the worst trial's inputs for replay.
//! Trials run on the rayon pool; the reduction walks results in trial order,
//! so reports do not depend on scheduling.

mod ensemble;
mod properties;

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use ensemble::{generate_psd, EnsembleSpec, RankMode, MAX_DIM};
pub use properties::{evaluate, sample, PropertyId, Witness, EXTRAPOLATION_THRESHOLD};

use crate::error::{Error, Result};

/// Extrapolation weights scanned by default.
pub const DEFAULT_EXTRAPOLATION_P: [f64; 4] = [-1.0, -0.5, 1.5, 2.0];

/// Margin recorded for a trial whose evaluation failed outright.
pub const ERROR_MARGIN: f64 = f64::MIN;

/// Knobs shared by every campaign of a run.
#[derive(Debug, Clone, PartialEq)]
pub struct CampaignOptions {
    pub extrapolation_p: Vec<f64>,
    /// Flips the main-theorem inequality so that campaigns fail; exercises
    /// the violation path end to end.
    pub invert_main_theorem: bool,
}

impl Default for CampaignOptions {
    fn default() -> Self {
        Self {
            extrapolation_p: DEFAULT_EXTRAPOLATION_P.to_vec(),
            invert_main_theorem: false,
        }
    }
}

/// One extrapolation witness of a given sign.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignWitness {
    pub trial: u64,
    pub p: f64,
    /// `det D_S(p) − det D_H(p)`.
    pub difference: f64,
    /// The pair, with `params = [p]`.
    pub inputs: Witness,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtrapolationSummary {
    pub p_values: Vec<f64>,
    /// Differences counted as strictly positive.
    pub positive: u64,
    /// Differences counted as strictly negative.
    pub negative: u64,
    pub positive_witness: Option<SignWitness>,
    pub negative_witness: Option<SignWitness>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub property: PropertyId,
    pub dim: usize,
    pub rank_mode: RankMode,
    pub seed: u64,
    pub trials_run: u64,
    pub failures: u64,
    /// Passing trials whose margin fell in `[−tolerance, 0)`.
    pub near_misses: u64,
    /// Trials where the property has nothing to check.
    pub skipped: u64,
    /// Trials whose evaluation returned an error (counted as failures).
    pub errors: u64,
    pub tolerance: f64,
    pub worst_margin: Option<f64>,
    pub worst_trial: Option<u64>,
    pub worst_case_inputs: Option<Witness>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub extrapolation: Option<ExtrapolationSummary>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub inverted: bool,
    pub elapsed_ms: f64,
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        self.failures == 0
    }

    /// The report with its timing zeroed, for byte comparison.
    pub fn without_timing(&self) -> Self {
        Self {
            elapsed_ms: 0.0,
            ..self.clone()
        }
    }

    /// Re-evaluates the stored worst case; `None` if nothing was stored.
    pub fn replay(&self) -> Result<Option<f64>> {
        match &self.worst_case_inputs {
            None => Ok(None),
            Some(w) => Ok(Some(
                margin_of(evaluate(self.property, w, self.inverted)).0.unwrap_or(0.0),
            )),
        }
    }
}

/// Maps a trial outcome to `(margin, is_error)`; `None` means skipped.
fn margin_of(outcome: Result<Option<f64>>) -> (Option<f64>, bool) {
    match outcome {
        Ok(Some(m)) if m.is_nan() => (Some(ERROR_MARGIN), true),
        Ok(m) => (m, false),
        Err(_) => (Some(ERROR_MARGIN), true),
    }
}

fn empty_report(spec: &EnsembleSpec, property: PropertyId, inverted: bool) -> VerificationReport {
    VerificationReport {
        property,
        dim: spec.dim,
        rank_mode: spec.rank_mode,
        seed: spec.seed,
        trials_run: spec.trials,
        failures: 0,
        near_misses: 0,
        skipped: 0,
        errors: 0,
        tolerance: property.tolerance(),
        worst_margin: None,
        worst_trial: None,
        worst_case_inputs: None,
        extrapolation: None,
        inverted,
        elapsed_ms: 0.0,
    }
}

/// Runs one property campaign.
pub fn run_property(spec: &EnsembleSpec, property: PropertyId, opts: &CampaignOptions) -> Result<VerificationReport> {
    spec.validate()?;
    if property == PropertyId::ExtrapolationSearch {
        return run_extrapolation(spec, &opts.extrapolation_p);
    }
    let start = Instant::now();
    let inverted = opts.invert_main_theorem && property == PropertyId::MainTheorem;
    let outcomes: Vec<(Option<f64>, bool)> = (0..spec.trials)
        .into_par_iter()
        .map(|t| margin_of(evaluate(property, &sample(property, spec, t), inverted)))
        .collect();

    let mut report = empty_report(spec, property, inverted);
    let tol = property.tolerance();
    let mut worst: Option<(f64, u64)> = None;
    for (t, (margin, error)) in (0u64..).zip(outcomes) {
        let Some(m) = margin else {
            report.skipped += 1;
            continue;
        };
        if error {
            report.errors += 1;
        }
        if m < -tol {
            report.failures += 1;
        } else if m < 0.0 {
            report.near_misses += 1;
        }
        // strict comparison keeps the lowest index among ties
        if worst.is_none_or(|(w, _)| m < w) {
            worst = Some((m, t));
        }
    }
    if let Some((m, t)) = worst {
        report.worst_margin = Some(m);
        report.worst_trial = Some(t);
        report.worst_case_inputs = Some(sample(property, spec, t));
    }
    report.elapsed_ms = start.elapsed().as_secs_f64() * 1e3;
    Ok(report)
}

/// Searches for both signs of `det D_S(p) − det D_H(p)` at each `p`.
///
/// The campaign margin is the smaller of the two best witnesses' magnitudes
/// minus [`EXTRAPOLATION_THRESHOLD`]; each missing sign counts as one
/// failure.
pub fn search_extrapolation_counterexamples(spec: &EnsembleSpec, p_values: &[f64]) -> Result<VerificationReport> {
    spec.validate()?;
    run_extrapolation(spec, p_values)
}

fn run_extrapolation(spec: &EnsembleSpec, p_values: &[f64]) -> Result<VerificationReport> {
    if p_values.is_empty() {
        return Err(Error::InvalidConfig("no extrapolation weights given".into()));
    }
    if let Some(p) = p_values.iter().find(|p| !p.is_finite() || (0.0..=1.0).contains(*p)) {
        return Err(Error::InvalidConfig(format!(
            "extrapolation weight {p} is not outside [0, 1]"
        )));
    }
    let start = Instant::now();
    let property = PropertyId::ExtrapolationSearch;
    let outcomes: Vec<Result<Vec<(f64, f64)>>> = (0..spec.trials)
        .into_par_iter()
        .map(|t| properties::extrapolation_differences(&sample(property, spec, t), p_values))
        .collect();

    let mut report = empty_report(spec, property, false);
    let (mut positive, mut negative) = (0u64, 0u64);
    // (|difference|, trial, index of p, difference)
    let mut best_pos: Option<(f64, u64, usize, f64)> = None;
    let mut best_neg: Option<(f64, u64, usize, f64)> = None;
    for (t, outcome) in (0u64..).zip(outcomes) {
        let Ok(diffs) = outcome else {
            report.errors += 1;
            continue;
        };
        for (k, (d, threshold)) in diffs.into_iter().enumerate() {
            let slot = if d > threshold {
                positive += 1;
                &mut best_pos
            } else if d < -threshold {
                negative += 1;
                &mut best_neg
            } else {
                continue;
            };
            if slot.is_none_or(|(m, ..)| d.abs() > m) {
                *slot = Some((d.abs(), t, k, d));
            }
        }
    }
    let witness = |best: Option<(f64, u64, usize, f64)>| {
        best.map(|(_, trial, k, difference)| {
            let mut inputs = sample(property, spec, trial);
            inputs.params = vec![p_values[k]];
            SignWitness {
                trial,
                p: p_values[k],
                difference,
                inputs,
            }
        })
    };
    let (pos, neg) = (witness(best_pos), witness(best_neg));
    let missing = [&pos, &neg].iter().filter(|w| w.is_none()).count() as u64;
    report.failures = missing + report.errors;
    match (&pos, &neg) {
        (Some(p), Some(n)) => {
            let weaker = if p.difference.abs() <= n.difference.abs() { p } else { n };
            report.worst_margin = Some(weaker.difference.abs() - EXTRAPOLATION_THRESHOLD);
            report.worst_trial = Some(weaker.trial);
            report.worst_case_inputs = Some(weaker.inputs.clone());
            if weaker.difference.abs() <= EXTRAPOLATION_THRESHOLD {
                report.failures += 1;
            }
        }
        _ => report.worst_margin = Some(-EXTRAPOLATION_THRESHOLD),
    }
    report.extrapolation = Some(ExtrapolationSummary {
        p_values: p_values.to_vec(),
        positive,
        negative,
        positive_witness: pos,
        negative_witness: neg,
    });
    report.elapsed_ms = start.elapsed().as_secs_f64() * 1e3;
    Ok(report)
}

pub fn verify_main_theorem(spec: &EnsembleSpec) -> Result<VerificationReport> {
    run_property(spec, PropertyId::MainTheorem, &CampaignOptions::default())
}

pub fn verify_det_geomean(spec: &EnsembleSpec) -> Result<VerificationReport> {
    run_property(spec, PropertyId::DetGeoMean, &CampaignOptions::default())
}

pub fn verify_log_majo_lemma(spec: &EnsembleSpec) -> Result<VerificationReport> {
    run_property(spec, PropertyId::LogMajoLemma, &CampaignOptions::default())
}

/// Equality case of the determinant inequality on simultaneously
/// diagonalisable pairs.
pub fn verify_det_geomean_commuting(spec: &EnsembleSpec) -> Result<VerificationReport> {
    run_property(spec, PropertyId::DetGeoMeanCommuting, &CampaignOptions::default())
}

/// Runs `properties` in order with default options.
pub fn run_all(spec: &EnsembleSpec, properties: &[PropertyId]) -> Result<Vec<VerificationReport>> {
    run_all_with(spec, properties, &CampaignOptions::default())
}

pub fn run_all_with(
    spec: &EnsembleSpec,
    properties: &[PropertyId],
    opts: &CampaignOptions,
) -> Result<Vec<VerificationReport>> {
    if properties.is_empty() {
        return Err(Error::InvalidConfig("no properties requested".into()));
    }
    properties.iter().map(|&p| run_property(spec, p, opts)).collect()
}
