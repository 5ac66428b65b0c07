//! CSV reporting for simulation runs and comparisons.
//!
//! Four files describe a run: `steps.csv` (one row per step per target),
//! `assignments.csv` (one row per assigned target per step), `summary.csv`
//! (cumulative RMSE at the checkpoint steps), and `ratios.csv` (per-step
//! greedy/optimal quality from a policy comparison). Floating-point values
//! are written with six significant digits.

use std::io::{self, Write};

use crate::harness::{RatioRow, RunSummary, StepRecord};

/// Formats a float with six significant digits: plain decimal for moderate
/// exponents, scientific notation otherwise. Infinities become `inf`/`-inf`.
pub fn format_sig6(value: f64) -> String {
    if value.is_nan() {
        return "nan".to_string();
    }
    if value.is_infinite() {
        return if value > 0.0 { "inf" } else { "-inf" }.to_string();
    }
    let scientific = format!("{value:.5e}");
    let exponent: i32 = scientific
        .split('e')
        .nth(1)
        .and_then(|e| e.parse().ok())
        .unwrap_or(0);
    if !(-4..=5).contains(&exponent) {
        return scientific;
    }
    format!("{value:.*}", (5 - exponent).max(0) as usize)
}

/// `steps.csv`: step, target_id, true/estimated positions, error, covariance
/// trace, and the assigned unit id (empty when unassigned).
pub fn write_steps_csv(mut writer: impl Write, records: &[StepRecord]) -> io::Result<()> {
    writeln!(
        writer,
        "step,target_id,true_x,true_y,est_x,est_y,error_m,cov_trace,unit_id"
    )?;
    for record in records {
        for (target_id, target) in record.targets.iter().enumerate() {
            let unit = target.unit.map(|u| u.to_string()).unwrap_or_default();
            writeln!(
                writer,
                "{},{},{},{},{},{},{},{},{}",
                record.step,
                target_id,
                format_sig6(target.true_position.x),
                format_sig6(target.true_position.y),
                format_sig6(target.estimated_mean.x),
                format_sig6(target.estimated_mean.y),
                format_sig6(target.error),
                format_sig6(target.covariance_trace),
                unit,
            )?;
        }
    }
    Ok(())
}

/// `assignments.csv`: the chosen unit per assigned target per step, with the
/// step's greedy total and (when computed) optimal total.
pub fn write_assignments_csv(mut writer: impl Write, records: &[StepRecord]) -> io::Result<()> {
    writeln!(writer, "step,target_id,unit_id,greedy_total,optimal_total")?;
    for record in records {
        let optimal = record.optimal_total.map(format_sig6).unwrap_or_default();
        for (target_id, unit) in record.assignment.iter() {
            writeln!(
                writer,
                "{},{},{},{},{}",
                record.step,
                target_id,
                unit,
                format_sig6(record.greedy_total),
                optimal,
            )?;
        }
    }
    Ok(())
}

/// `summary.csv`: cumulative RMSE per target at each checkpoint step.
pub fn write_summary_csv(mut writer: impl Write, summary: &RunSummary) -> io::Result<()> {
    writeln!(writer, "target_id,checkpoint,rmse_m")?;
    for (target_id, checkpoints) in summary.rmse.iter().enumerate() {
        for &(step, rmse) in checkpoints {
            writeln!(writer, "{target_id},{step},{}", format_sig6(rmse))?;
        }
    }
    Ok(())
}

/// `ratios.csv`: per-seed, per-step greedy/optimal totals, raw and shifted.
pub fn write_ratios_csv(mut writer: impl Write, rows: &[RatioRow]) -> io::Result<()> {
    writeln!(
        writer,
        "seed,step,greedy_raw,optimal_raw,greedy_shifted,optimal_shifted,ratio"
    )?;
    for row in rows {
        writeln!(
            writer,
            "{},{},{},{},{},{},{}",
            row.seed,
            row.step,
            format_sig6(row.greedy_raw),
            format_sig6(row.optimal_raw),
            format_sig6(row.greedy_shifted),
            format_sig6(row.optimal_shifted),
            format_sig6(row.ratio),
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::{run, Policy};
    use crate::scenario::ScenarioConfig;

    #[test]
    fn six_significant_digits() {
        assert_eq!(format_sig6(0.0), "0.00000");
        assert_eq!(format_sig6(1.0), "1.00000");
        assert_eq!(format_sig6(123.456789), "123.457");
        assert_eq!(format_sig6(-0.2318), "-0.231800");
        assert_eq!(format_sig6(123456.7), "123457");
        assert_eq!(format_sig6(1234567.0), "1.23457e6");
        assert_eq!(format_sig6(0.000123456), "0.000123456");
        assert_eq!(format_sig6(1.5e-7), "1.50000e-7");
        assert_eq!(format_sig6(f64::NEG_INFINITY), "-inf");
        assert_eq!(format_sig6(f64::INFINITY), "inf");
    }

    #[test]
    fn steps_csv_shape() {
        let config = ScenarioConfig {
            n_targets: 2,
            time_steps: 5,
            ..ScenarioConfig::default()
        };
        let (records, summary) = run(&config, Policy::Greedy).unwrap();

        let mut steps = Vec::new();
        write_steps_csv(&mut steps, &records).unwrap();
        let text = String::from_utf8(steps).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(
            lines[0],
            "step,target_id,true_x,true_y,est_x,est_y,error_m,cov_trace,unit_id"
        );
        assert_eq!(lines.len(), 1 + 5 * 2);
        assert!(lines[1].starts_with("1,0,"));

        let mut assignments = Vec::new();
        write_assignments_csv(&mut assignments, &records).unwrap();
        let text = String::from_utf8(assignments).unwrap();
        assert!(text.lines().count() > 1);

        let mut summary_csv = Vec::new();
        write_summary_csv(&mut summary_csv, &summary).unwrap();
        let text = String::from_utf8(summary_csv).unwrap();
        // Checkpoint 1 for both targets; 0.7071 by construction.
        assert!(text.contains("0,1,0.707107"));
        assert!(text.contains("1,1,0.707107"));
    }
}
