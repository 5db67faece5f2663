//! The five experiment stages. Every command writes its artifacts into the
//! `--out` directory and prints a one-line human summary; all file contents
//! are deterministic functions of the resolved configuration.

use std::path::{Path, PathBuf};

use ltiguard::{
    check_undetectable, hankel_information, index_report, rank_curve, run_monitor, simulate,
    synthesize_undetectable, AttackScenario, InputSeries, OutputSeries, Vector,
};
use serde_json::json;

use crate::config::Experiment;
use crate::CliError;

fn write_artifact(out: &Path, name: &str, text: &str) -> Result<PathBuf, CliError> {
    std::fs::create_dir_all(out)
        .map_err(|e| CliError::Config(format!("cannot create {}: {e}", out.display())))?;
    let path = out.join(name);
    std::fs::write(&path, text)
        .map_err(|e| CliError::Config(format!("cannot write {}: {e}", path.display())))?;
    Ok(path)
}

fn pretty(value: &serde_json::Value) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("JSON value serializes");
    text.push('\n');
    text
}

fn fmt_opt(v: Option<usize>) -> String {
    match v {
        Some(k) => k.to_string(),
        None => "none".into(),
    }
}

/// Simulates the configured stream: the attack inputs when a scenario is
/// present, zero input otherwise.
fn simulate_stream(exp: &Experiment, with_attack: bool) -> Result<OutputSeries, CliError> {
    if exp.horizon == 0 {
        return Err(CliError::Config(
            "horizon must be positive for this command".into(),
        ));
    }
    let zero = InputSeries::zero(exp.sys.m());
    let u = match (&exp.attack, with_attack) {
        (Some(a), true) => &a.inputs,
        _ => &zero,
    };
    let (y, _) = simulate(&exp.sys, &exp.x0, u, exp.horizon)?;
    Ok(y)
}

pub fn generate(exp: &Experiment, out: &Path) -> Result<(), CliError> {
    let mut text = exp.sys.to_json();
    text.push('\n');
    let path = write_artifact(out, "system.json", &text)?;
    println!(
        "wrote {} (n={}, m={}, p={})",
        path.display(),
        exp.sys.n(),
        exp.sys.m(),
        exp.sys.p()
    );
    Ok(())
}

pub fn indices(exp: &Experiment, out: &Path) -> Result<(), CliError> {
    let report = index_report(&exp.sys, Some(&exp.x0), &exp.tolerance)?;
    let mut value = serde_json::to_value(&report).expect("index report serializes");
    value["seed"] = json!(exp.seed);
    let path = write_artifact(out, "indices.json", &pretty(&value))?;
    println!(
        "nu={} mu={} mu_of_x0={} t_safe_model={} t_safe_data={} t_safe_heuristic={} -> {}",
        report.nu,
        report.mu,
        fmt_opt(report.mu_of_x0),
        report.t_safe_model,
        report.t_safe_data,
        report.t_safe_heuristic,
        path.display()
    );
    Ok(())
}

pub fn rank_curve_cmd(exp: &Experiment, out: &Path) -> Result<(), CliError> {
    // The curve is a nominal-data object: the attack scenario, if any, is
    // deliberately ignored here.
    let y = simulate_stream(exp, false)?;
    let curve = rank_curve(&y, &exp.tolerance)?;
    let info = hankel_information(&y, &exp.tolerance)?;

    let last = curve.last().expect("rank_curve returns at least one point");
    if last.rank != info.gamma {
        return Err(CliError::Numerical(format!(
            "heuristic curve ends at rank {} but the information estimate is {}; \
             the horizon ({}) is too short for the curve to saturate",
            last.rank, info.gamma, exp.horizon
        )));
    }

    let mut csv = String::from("T,N,rank,sigma_min_kept\n");
    for point in &curve {
        csv.push_str(&format!(
            "{},{},{},{:.16e}\n",
            point.horizon, point.window, point.rank, point.sigma_min_kept
        ));
    }
    let csv_path = write_artifact(out, "rank_curve.csv", &csv)?;

    let (window, horizon) = info.achieved_at;
    let value = json!({
        "gamma": info.gamma,
        "achieved_at": { "N": window, "T": horizon },
        "horizon": exp.horizon,
        "seed": exp.seed,
    });
    write_artifact(out, "rank_info.json", &pretty(&value))?;

    println!(
        "gamma={} first attained at (N={}, T={}); curve -> {}",
        info.gamma,
        window,
        horizon,
        csv_path.display()
    );
    Ok(())
}

pub fn monitor(exp: &Experiment, out: &Path) -> Result<(), CliError> {
    let y = simulate_stream(exp, true)?;
    let model = run_monitor(&y, &exp.monitor, Some(&exp.sys), &exp.tolerance)?;
    let data = run_monitor(&y, &exp.monitor, None, &exp.tolerance)?;
    let report = index_report(&exp.sys, Some(&exp.x0), &exp.tolerance)?;
    // Gamma is the information content of the plant's nominal behavior (what
    // training can ever extract), so it is measured on the unattacked stream.
    let y_nominal = simulate_stream(exp, false)?;
    let info = hankel_information(&y_nominal, &exp.tolerance)?;

    write_artifact(out, "residuals_model.csv", &model.to_csv())?;
    write_artifact(out, "residuals_data.csv", &data.to_csv())?;

    let value = json!({
        "seed": exp.seed,
        "horizon": exp.horizon,
        "threshold": exp.monitor.threshold,
        "tolerance": serde_json::to_value(exp.tolerance).expect("tolerance serializes"),
        "indices": serde_json::to_value(&report).expect("index report serializes"),
        "gamma": info.gamma,
        "attack": exp.attack.as_ref().map(|a| json!({
            "start": a.start,
            "label": a.label,
        })),
        "model_based": model.summary(),
        "data_driven": data.summary(),
    });
    let path = write_artifact(out, "summary.json", &pretty(&value))?;

    println!(
        "model-based: armed_at={} first_detection={}",
        fmt_opt(model.armed_at),
        fmt_opt(model.first_detection)
    );
    println!(
        "data-driven: armed_at={} first_detection={}",
        fmt_opt(data.armed_at),
        fmt_opt(data.first_detection)
    );
    println!("summary -> {}", path.display());
    Ok(())
}

pub fn synthesize_attack(exp: &Experiment, out: &Path) -> Result<(), CliError> {
    let report = index_report(&exp.sys, None, &exp.tolerance)?;
    let synth = exp.synthesis;
    let window = synth.and_then(|s| s.window).unwrap_or(report.nu);
    let start = synth
        .and_then(|s| s.start)
        .unwrap_or(report.nu + report.mu + 1);
    if window == 0 {
        return Err(CliError::Config("synthesis window must be positive".into()));
    }
    // The undetectability check only applies once the monitors have had a
    // chance to arm; earlier starts are a configuration mistake.
    let quiet = report.nu + report.mu;
    if start < quiet + 1 {
        return Err(CliError::Config(format!(
            "synthesis start {start} is inside the training regime; first admissible start is {}",
            quiet + 1
        )));
    }

    let Some(burst) = synthesize_undetectable(&exp.sys, window, &exp.tolerance)? else {
        let value = json!({
            "result": "none",
            "window": window,
            "seed": exp.seed,
        });
        let path = write_artifact(out, "attack.json", &pretty(&value))?;
        println!(
            "no undetectable burst of window {window} exists for this plant -> {}",
            path.display()
        );
        return Ok(());
    };

    let m = exp.sys.m();
    let mut samples = vec![Vector::zeros(m); start];
    for j in 0..window {
        samples.push(burst.rows(j * m, m).into_owned());
    }
    let inputs = InputSeries::new(m, samples, start)?;
    let scenario = AttackScenario::new(start, inputs, "synthesized undetectable burst")?;
    let verdict = check_undetectable(&exp.sys, &scenario, exp.sys.n() + 1, &exp.tolerance)?;
    if verdict.detectable {
        return Err(CliError::Numerical(
            "synthesized burst failed the kernel re-check".into(),
        ));
    }

    let value = json!({
        "result": "burst",
        "window": window,
        "start": start,
        "seed": exp.seed,
        "scenario": serde_json::to_value(&scenario).expect("scenario serializes"),
        "verdict": serde_json::to_value(&verdict).expect("verdict serializes"),
    });
    let path = write_artifact(out, "attack.json", &pretty(&value))?;
    println!(
        "synthesized a window-{window} burst starting at {start}; scenario -> {}",
        path.display()
    );
    Ok(())
}
