use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use super::runner::{ExperimentResult, PolicySummary};
use crate::error::Result;

const SUPERSCRIPT: [char; 10] = ['⁰', '¹', '²', '³', '⁴', '⁵', '⁶', '⁷', '⁸', '⁹'];

/// Three significant digits in `a.bc×10ⁿ` form.
pub fn format_sci(x: f64) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    let s = format!("{x:.2e}");
    let (mantissa, exp) = s.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    let mut out = format!("{mantissa}×10");
    if exp < 0 {
        out.push('⁻');
    }
    for digit in exp.unsigned_abs().to_string().bytes() {
        out.push(SUPERSCRIPT[(digit - b'0') as usize]);
    }
    out
}

/// Summaries by descending mean regret; ties keep config order.
pub fn ranked(result: &ExperimentResult) -> Vec<&PolicySummary> {
    let mut rows: Vec<&PolicySummary> = result.policies.iter().collect();
    rows.sort_by(|a, b| {
        b.mean
            .total_cmp(&a.mean)
            .then(a.policy_index.cmp(&b.policy_index))
    });
    rows
}

/// One row per policy: name, mean ± std of the final regret, mean seconds.
pub fn report_table(result: &ExperimentResult) -> String {
    let rows: Vec<(String, String, String)> = ranked(result)
        .into_iter()
        .map(|p| {
            (
                p.policy.clone(),
                format!("{} ± {}", format_sci(p.mean), format_sci(p.std)),
                format_sci(p.mean_seconds),
            )
        })
        .collect();
    let width = |f: fn(&(String, String, String)) -> &String, header: &str| {
        rows.iter()
            .map(|r| f(r).chars().count())
            .chain([header.chars().count()])
            .max()
            .unwrap_or(0)
    };
    let w0 = width(|r| &r.0, "policy");
    let w1 = width(|r| &r.1, "Reg(T)");
    let pad = |s: &str, w: usize| format!("{s}{}", " ".repeat(w - s.chars().count()));

    let mut out = format!(
        "L={} K={} T={} runs={}\n{}  {}  seconds\n",
        result.l,
        result.k,
        result.horizon,
        result.runs,
        pad("policy", w0),
        pad("Reg(T)", w1)
    );
    for (name, reg, secs) in &rows {
        let _ = writeln!(out, "{}  {}  {}", pad(name, w0), pad(reg, w1), secs);
    }
    out
}

fn csv_bytes(header: &[&str], rows: impl Iterator<Item = Vec<String>>) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for row in rows {
        w.write_record(&row)?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| std::io::Error::other(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

/// `policy,run,T,final_regret,seconds`, one row per (policy, run).
pub fn runs_csv(result: &ExperimentResult) -> Result<String> {
    csv_bytes(
        &["policy", "run", "T", "final_regret", "seconds"],
        result.records.iter().map(|r| {
            vec![
                r.policy.clone(),
                r.run.to_string(),
                r.horizon.to_string(),
                r.final_regret.to_string(),
                r.seconds.to_string(),
            ]
        }),
    )
}

/// `policy,run,t,regret`, one row per checkpoint of every run.
pub fn trajectory_csv(result: &ExperimentResult) -> Result<String> {
    csv_bytes(
        &["policy", "run", "t", "regret"],
        result.records.iter().flat_map(|r| {
            result
                .checkpoints
                .iter()
                .zip(&r.trajectory)
                .map(move |(t, reg)| {
                    vec![
                        r.policy.clone(),
                        r.run.to_string(),
                        t.to_string(),
                        reg.to_string(),
                    ]
                })
        }),
    )
}

/// Paths written by [`emit_report`].
#[derive(Debug, Clone)]
pub struct ReportFiles {
    pub table: PathBuf,
    pub runs_csv: PathBuf,
    pub trajectory_csv: PathBuf,
    pub result_json: PathBuf,
}

/// Writes `report.txt`, `runs.csv`, `trajectory.csv` and `result.json` into
/// `dir` and returns the table text.
pub fn emit_report(
    result: &ExperimentResult,
    dir: impl AsRef<Path>,
) -> Result<(String, ReportFiles)> {
    let dir = dir.as_ref();
    std::fs::create_dir_all(dir)?;
    let files = ReportFiles {
        table: dir.join("report.txt"),
        runs_csv: dir.join("runs.csv"),
        trajectory_csv: dir.join("trajectory.csv"),
        result_json: dir.join("result.json"),
    };
    let table = report_table(result);
    std::fs::write(&files.table, &table)?;
    std::fs::write(&files.runs_csv, runs_csv(result)?)?;
    std::fs::write(&files.trajectory_csv, trajectory_csv(result)?)?;
    std::fs::write(&files.result_json, result.to_json()?)?;
    Ok((table, files))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::runner::{summarize, RunRecord};

    fn record(policy: &str, idx: usize, run: usize, reg: f64) -> RunRecord {
        RunRecord {
            policy: policy.into(),
            policy_index: idx,
            run,
            horizon: 100,
            final_regret: reg,
            realized_reward: 0.0,
            trajectory: vec![reg / 2.0, reg],
            seconds: 14.7,
        }
    }

    fn result() -> ExperimentResult {
        let records = vec![
            record("cts", 0, 0, 10.0),
            record("cts", 0, 1, 14.0),
            record("cascade-ucb1", 1, 0, 26000.0),
            record("cascade-ucb1", 1, 1, 26000.0),
        ];
        ExperimentResult {
            horizon: 100,
            runs: 2,
            base_seed: 0,
            l: 8,
            k: 2,
            optimal_reward: 0.5,
            checkpoints: vec![50, 100],
            policies: vec![summarize(&records[..2]), summarize(&records[2..])],
            records,
        }
    }

    #[test]
    fn scientific_notation() {
        assert_eq!(format_sci(26000.0), "2.60×10⁴");
        assert_eq!(format_sci(33.2), "3.32×10¹");
        assert_eq!(format_sci(14.7), "1.47×10¹");
        assert_eq!(format_sci(0.0), "0.00×10⁰");
        assert_eq!(format_sci(0.0123), "1.23×10⁻²");
        assert_eq!(format_sci(1.2e15), "1.20×10¹⁵");
    }

    #[test]
    fn table_sorted_by_descending_mean() {
        let table = report_table(&result());
        let lines: Vec<&str> = table.lines().collect();
        assert!(lines[2].starts_with("cascade-ucb1"));
        assert!(lines[2].contains("2.60×10⁴ ± 0.00×10⁰  1.47×10¹"));
        assert!(lines[3].starts_with("cts"));
        assert!(lines[3].contains("1.20×10¹ ± 2.83×10⁰"));
    }

    #[test]
    fn csv_schemas() {
        let r = result();
        let runs = runs_csv(&r).unwrap();
        assert_eq!(
            runs.lines().next(),
            Some("policy,run,T,final_regret,seconds")
        );
        assert_eq!(runs.lines().count(), 5);
        assert_eq!(runs.lines().nth(1), Some("cts,0,100,10,14.7"));
        let traj = trajectory_csv(&r).unwrap();
        assert_eq!(traj.lines().next(), Some("policy,run,t,regret"));
        assert_eq!(traj.lines().count(), 9);
    }

    #[test]
    fn emit_and_reload() {
        let dir = tempfile::tempdir().unwrap();
        let (_, files) = emit_report(&result(), dir.path()).unwrap();
        assert_eq!(
            ExperimentResult::from_file(&files.result_json).unwrap(),
            result()
        );
        assert!(files.table.exists() && files.runs_csv.exists() && files.trajectory_csv.exists());
    }
}
