//! Declarative experiments: a JSON config in, a report with tables and
//! pass/fail verdicts out. Everything is driven by one seeded ChaCha8 stream,
//! so identical configs give byte-identical reports.

pub mod config;
pub mod report;
mod scenarios;

use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub use config::{BaseSpec, ClosingSpec, ExperimentConfig, GeneratorSpec, Scenario, SweepSpec};
pub use report::{emit, Cell, Format, LabeledBunching, Report, SuiteReport, Table, Verdict};

use crate::dynamics::{SftSystem, TorusSystem};
use crate::error::{Error, Result};

/// Configs shipped with the binary, run by `livsic suite`.
pub const BUILTIN_CONFIGS: &[(&str, &str)] = &[
    ("reconstruct_sft", include_str!("../../configs/reconstruct_sft.json")),
    ("reconstruct_torus", include_str!("../../configs/reconstruct_torus.json")),
    ("periodic_mismatch", include_str!("../../configs/periodic_mismatch.json")),
    ("holonomy_rate_torus", include_str!("../../configs/holonomy_rate_torus.json")),
    ("holonomy_rate_twisted", include_str!("../../configs/holonomy_rate_twisted.json")),
    ("margin_sweep", include_str!("../../configs/margin_sweep.json")),
    ("closing_sft", include_str!("../../configs/closing_sft.json")),
    ("closing_torus", include_str!("../../configs/closing_torus.json")),
];

pub fn builtin_configs() -> Result<Vec<ExperimentConfig>> {
    BUILTIN_CONFIGS
        .iter()
        .map(|(name, text)| ExperimentConfig::from_json(text).map_err(|e| Error::ConfigInvalid(format!("{name}: {e}"))))
        .collect()
}

fn sft(base: &BaseSpec) -> Result<Option<SftSystem>> {
    Ok(match base {
        BaseSpec::FullShift { symbols, lambda } => Some(SftSystem::full_shift(*symbols, *lambda)?),
        BaseSpec::Sft { rows, lambda } => {
            let rows: Vec<&str> = rows.iter().map(String::as_str).collect();
            Some(SftSystem::from_rows(&rows, *lambda)?)
        }
        BaseSpec::Torus { .. } => None,
    })
}

/// Runs one scenario.
pub fn run(cfg: &ExperimentConfig) -> Result<Report> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    match (&cfg.base, sft(&cfg.base)?) {
        (_, Some(sys)) => {
            let sys = Arc::new(sys);
            if cfg.scenario == Scenario::PeriodicMismatch {
                scenarios::periodic_mismatch(cfg, sys, &mut rng)
            } else {
                scenarios::run_on(cfg, sys, &mut rng)
            }
        }
        (BaseSpec::Torus { matrix }, None) => {
            scenarios::run_on(cfg, Arc::new(TorusSystem::new(*matrix)?), &mut rng)
        }
        _ => unreachable!("sft() covers the symbolic bases"),
    }
}

/// Runs every config in order, prefixing failures with the scenario name.
pub fn run_suite(configs: &[ExperimentConfig]) -> Result<SuiteReport> {
    let reports = configs
        .iter()
        .map(|c| run(c).map_err(|e| context(c, e)))
        .collect::<Result<Vec<_>>>()?;
    Ok(SuiteReport::new(reports))
}

fn context(cfg: &ExperimentConfig, e: Error) -> Error {
    match e {
        Error::ConfigInvalid(m) => Error::ConfigInvalid(format!("{} (seed {}): {m}", cfg.scenario.as_str(), cfg.seed)),
        other => other,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn builtin(name: &str) -> ExperimentConfig {
        let text = BUILTIN_CONFIGS.iter().find(|(n, _)| *n == name).unwrap().1;
        ExperimentConfig::from_json(text).unwrap()
    }

    #[test]
    fn builtin_configs_parse() {
        assert_eq!(builtin_configs().unwrap().len(), BUILTIN_CONFIGS.len());
    }

    #[test]
    fn identity_conjugacy_reconstructs_exactly() {
        let mut cfg = builtin("reconstruct_sft");
        cfg.conjugator = Some(GeneratorSpec::Identity);
        cfg.samples = 6;
        let r = run(&cfg).unwrap();
        assert!(r.passed);
        let errors = r.table("reconstruction").unwrap().column("error").unwrap();
        assert_eq!(errors.len(), 6);
        assert!(errors.iter().all(|e| e.as_f64().unwrap() <= 1e-10));
    }

    #[test]
    fn identical_configs_give_identical_bytes() {
        let cfg = builtin("holonomy_rate_torus");
        assert_eq!(run(&cfg).unwrap().to_json(), run(&cfg).unwrap().to_json());
    }

    #[test]
    fn full_shift_closing_constant_is_one() {
        let r = run(&builtin("closing_sft")).unwrap();
        assert!(r.passed);
        let rates = r.table("closing").unwrap().column("fitted_rate").unwrap();
        for rate in rates.iter().filter_map(|c| c.as_f64()) {
            assert!((rate - std::f64::consts::LN_2).abs() < 1e-9, "rate {rate}");
        }
    }

    #[test]
    fn sweep_crosses_where_predicted() {
        let r = run(&builtin("margin_sweep")).unwrap();
        assert!(r.passed, "{:?}", r.verdicts);
        assert_eq!(r.table("sweep").unwrap().rows.len(), 61);
    }

    #[test]
    fn module_errors_carry_scenario_context() {
        let mut cfg = builtin("reconstruct_torus");
        cfg.conjugator = Some(GeneratorSpec::TorusSmooth { amplitude: 5.0 });
        assert!(run(&cfg).is_err());
        let mut bad = builtin("closing_sft");
        bad.closing = None;
        let err = run_suite(&[bad]).unwrap_err();
        assert!(err.to_string().contains("closing (seed 17)"), "{err}");
    }
}
