//! Named preset runs. Each returns its report files in memory; writing
//! them is left to the caller.

use rand::seq::index::sample;
use rand::Rng;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::channel::{Permutation, TrialRng};
use crate::feedback::{
    apply_patch, ram_monitor, run_adapter_scenario, ErrorFunction, Family, InverseModel, Session, SessionConfig,
};
use crate::stack::{compare_contextual, scenario_case1, CASE1_FLIP_P, CASE1_SEED};

use super::HarnessError;

pub const SCENARIO_NAMES: [&str; 5] = ["case1", "driver-driven", "ram-monitor", "contextual", "feedback-affine"];

const RAM_SEED: u64 = 8;
const RAM_BITS: usize = 8 * 1024;
const RAM_FLIPS: usize = 8;

const CONTEXTUAL_SEED: u64 = 25;
const CONTEXTUAL_SIGMAS: [f64; 3] = [0.05, 0.1, 0.2];
const CONTEXTUAL_TRIALS: u64 = 20_000;

const ADAPTER_ROUNDS: usize = 100;
const ADAPTER_INSTALL: usize = 50;

const FEEDBACK_ROUNDS: usize = 80;
const FEEDBACK_DISTURBANCE: (usize, f64) = (40, 4.0);

/// A report file: name relative to the output directory, and contents.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Artifact {
    pub name: String,
    pub contents: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioOutput {
    pub name: String,
    /// Whether the run showed what the scenario is meant to show.
    pub ok: bool,
    pub summary: serde_json::Value,
    pub artifacts: Vec<Artifact>,
}

impl ScenarioOutput {
    fn new(name: &str, ok: bool, summary: serde_json::Value, csv: String) -> Self {
        let artifacts = vec![
            Artifact { name: format!("{name}.csv"), contents: csv },
            Artifact {
                name: format!("{name}.json"),
                contents: serde_json::to_string_pretty(&json!({ "scenario": name, "ok": ok, "summary": summary }))
                    .expect("plain data serializes"),
            },
        ];
        ScenarioOutput { name: name.to_string(), ok, summary, artifacts }
    }
}

fn csv_of<R: IntoIterator<Item = Vec<String>>>(header: &[&str], rows: R) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for row in rows {
        w.write_record(row).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("ascii csv")
}

/// Runs a preset by name. `seed` replaces the preset's default seed where
/// the scenario is random.
pub fn run_scenario(name: &str, seed: Option<u64>) -> Result<ScenarioOutput, HarnessError> {
    match name {
        "case1" => case1(seed.unwrap_or(CASE1_SEED)),
        "driver-driven" => driver_driven(),
        "ram-monitor" => ram(seed.unwrap_or(RAM_SEED)),
        "contextual" => contextual(seed.unwrap_or(CONTEXTUAL_SEED)),
        "feedback-affine" => feedback_affine(),
        other => Err(HarnessError::UnknownScenario(other.to_string())),
    }
}

fn case1(seed: u64) -> Result<ScenarioOutput, HarnessError> {
    let (_, run) = scenario_case1(seed, CASE1_FLIP_P)?;
    let ok = run.matches_truth();
    let summary = json!({
        "seed": seed,
        "p": run.p,
        "sent": run.sent,
        "truth": run.truth,
        "received": run.received,
        "matches_truth": ok,
        "layers": run.report.layers,
    });
    Ok(ScenarioOutput::new("case1", ok, summary, run.report.to_csv()))
}

fn driver_driven() -> Result<ScenarioOutput, HarnessError> {
    let shift = Permutation::cyclic_shift(4, 1);
    let trace = run_adapter_scenario(&shift, ADAPTER_ROUNDS, Some(ADAPTER_INSTALL))?;
    let ok = trace.iter().all(|r| r.lag == usize::from(r.round <= ADAPTER_INSTALL));
    let summary = json!({
        "mapping": shift.images(),
        "rounds": ADAPTER_ROUNDS,
        "install_at": ADAPTER_INSTALL,
        "lag_before": trace[0].lag,
        "lag_after": trace.last().map(|r| r.lag),
    });
    let csv = csv_of(
        &["round", "driver", "driven", "lag"],
        trace.iter().map(|r| vec![r.round.to_string(), r.driver.to_string(), r.driven.to_string(), r.lag.to_string()]),
    );
    Ok(ScenarioOutput::new("driver-driven", ok, summary, csv))
}

fn ram(seed: u64) -> Result<ScenarioOutput, HarnessError> {
    let trial = TrialRng::new(seed, 0);
    let mut rng = trial.rng();
    let backup: Vec<u8> = (0..RAM_BITS).map(|_| rng.random_range(0..2u8)).collect();
    let mut memory = backup.clone();
    let mut flipped = sample(&mut trial.fork(1).rng(), RAM_BITS, RAM_FLIPS).into_vec();
    flipped.sort_unstable();
    for &i in &flipped {
        memory[i] ^= 1;
    }
    let patch = ram_monitor(&memory, &backup)?;
    apply_patch(&mut memory, &patch);
    let restored = memory == backup;
    let ok = restored && patch.positions == flipped;
    let summary = json!({
        "seed": seed,
        "memory_bits": RAM_BITS,
        "flips": RAM_FLIPS,
        "positions": patch.positions,
        "corrective_bits": patch.corrective_bits,
        "address_bits": patch.address_bits,
        "total_bits": patch.total_bits(),
        "restored": restored,
    });
    let csv = csv_of(&["position"], patch.positions.iter().map(|p| vec![p.to_string()]));
    Ok(ScenarioOutput::new("ram-monitor", ok, summary, csv))
}

fn contextual(seed: u64) -> Result<ScenarioOutput, HarnessError> {
    let mut rows = Vec::new();
    let mut ok = true;
    for sigma in CONTEXTUAL_SIGMAS {
        let c = compare_contextual(seed, sigma, CONTEXTUAL_TRIALS)?;
        ok &= c.contextual_errors <= c.plain_errors;
        rows.push((sigma, c));
    }
    let summary = json!({
        "seed": seed,
        "trials": CONTEXTUAL_TRIALS,
        "rows": rows.iter().map(|(s, c)| json!({ "sigma": s, "comparison": c })).collect::<Vec<_>>(),
    });
    let csv = csv_of(
        &["sigma", "trials", "contextual_errors", "plain_errors", "contextual_rate", "plain_rate"],
        rows.iter().map(|(s, c)| {
            vec![
                s.to_string(),
                c.trials.to_string(),
                c.contextual_errors.to_string(),
                c.plain_errors.to_string(),
                c.contextual_rate().to_string(),
                c.plain_rate().to_string(),
            ]
        }),
    );
    Ok(ScenarioOutput::new("contextual", ok, summary, csv))
}

fn feedback_affine() -> Result<ScenarioOutput, HarnessError> {
    let config = SessionConfig {
        reference: 5.0,
        q: 1e-3,
        gain: 0.5,
        delay: 2,
        receiver: ErrorFunction::Affine { a: 1.0, b: 2.0 },
    };
    let mut session = Session::new(config.clone(), InverseModel::default())?;
    let probes = session.identify(Family::Affine)?;
    session.run(FEEDBACK_ROUNDS, &[FEEDBACK_DISTURBANCE])?;
    let final_plant = session.plant()?;
    let quiet_at_end = session.log().last().is_some_and(|r| r.fill_bits == 0);
    let ok = quiet_at_end && (final_plant - config.reference).abs() <= config.q;
    let summary = json!({
        "config": config,
        "probes": probes,
        "inverse": session.inverse(),
        "disturbance": { "round": FEEDBACK_DISTURBANCE.0, "amount": FEEDBACK_DISTURBANCE.1 },
        "final_plant": final_plant,
        "total_fill_bits": session.log().iter().map(|r| r.fill_bits).sum::<usize>(),
    });
    Ok(ScenarioOutput::new("feedback-affine", ok, summary, session.log_csv()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_preset_runs_and_succeeds() {
        for name in SCENARIO_NAMES {
            let out = run_scenario(name, None).unwrap();
            assert!(out.ok, "{name}: {}", out.summary);
            assert_eq!(out.artifacts.len(), 2);
            assert!(out.artifacts[0].contents.lines().count() > 1);
        }
    }

    #[test]
    fn ram_patch_has_eight_positions() {
        let out = run_scenario("ram-monitor", Some(99)).unwrap();
        assert_eq!(out.summary["positions"].as_array().unwrap().len(), 8);
        assert_eq!(out.summary["address_bits"], 8 * 13);
    }

    #[test]
    fn unknown_name() {
        assert!(matches!(run_scenario("no-such-scenario", None), Err(HarnessError::UnknownScenario(_))));
    }
}
