use ltiguard::{
    companion_system, index_report, random_unit_state, run_monitor, simulate, InputSeries,
    MonitorConfig, RankTolerance, Vector,
};

#[test]
fn readme_snippet() -> ltiguard::Result<()> {
    let sys = companion_system(50, 5, 10, 23)?;
    let x0 = random_unit_state(50, 23)?;
    let tol = RankTolerance::default();
    let report = index_report(&sys, Some(&x0), &tol)?;
    assert_eq!(report.nu, 15);
    assert_eq!(report.mu, 50);

    let pulse = Vector::from_row_slice(&[0.0, 0.0, 0.0, 1.0, 0.0]);
    let attack = InputSeries::pulse(5, 249, pulse)?;
    let (stream, _states) = simulate(&sys, &x0, &attack, 300)?;

    let cfg = MonitorConfig::default();

    let data = run_monitor(&stream, &cfg, None, &tol)?;
    assert_eq!(data.armed_at, Some(164));
    assert_eq!(data.first_detection, Some(249));

    let model = run_monitor(&stream, &cfg, Some(&sys), &tol)?;
    assert_eq!(model.armed_at, Some(15));
    Ok(())
}
