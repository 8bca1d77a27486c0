//! Sweeps the atomic coherence decay rate and prints the fidelity table as
//! CSV, the same output the command-line `sweep` subcommand produces.

use cavity_cz::sweep::{emit_csv, run_sweep, Metric, Spacing, SweepSpec, SweepTarget};

fn main() -> Result<(), cavity_cz::Error> {
    let baseline = cavity_cz::config::parse_config(
        r#"{
            "g": 1.0,
            "kappa": 2.0,
            "delta": 1.0,
            "pulse": { "shape": "gaussian", "width": 0.02 }
        }"#,
    )?;

    let spec = SweepSpec {
        target: SweepTarget::Gamma,
        start: 0.0,
        stop: 0.1,
        n_points: 9,
        spacing: Spacing::Linear,
        baseline,
        metrics: vec![
            Metric::ControlledPhase,
            Metric::FidelityRaw,
            Metric::FidelityOpt,
        ],
        time_domain: false,
    };

    let table = run_sweep(&spec)?;
    print!("{}", emit_csv(&table)?);
    Ok(())
}
