//! Result rendering: human-readable summaries, machine-readable JSON
//! records, and the fixed-layout CSV for regret curves (UTF-8, LF endings,
//! shortest round-trip float formatting for byte-stable reruns).

use replearn_core::checks::ConditionReport;
use replearn_core::model::BanditInstance;
use replearn_core::simulator::RegretCurve;
use replearn_core::solver::{ComplexitySolution, SolveStatus, SolverOptions};

pub struct ComplexityRecord {
    pub family: String,
    pub value: f64,
    pub status: SolveStatus,
    pub json: serde_json::Value,
}

/// Builds the result record embedding the full effective configuration.
pub fn complexity_record(
    family: &str,
    instance: &BanditInstance,
    solution: &ComplexitySolution,
    opts: &SolverOptions,
) -> ComplexityRecord {
    let allocation: Vec<Vec<f64>> = (0..instance.num_contexts)
        .map(|x| {
            (0..instance.num_arms)
                .map(|a| solution.allocation.eta[(x, a)])
                .collect()
        })
        .collect();
    let json = serde_json::json!({
        "family": family,
        "value": solution.value,
        "status": solution.status,
        "iterations": solution.iterations,
        "m_used": solution.m_used,
        "near_zero": solution.near_zero,
        "sublog_check": solution.sublog_check,
        "allocation": allocation,
        "constraint_slacks": solution.constraint_slacks,
        "clb_audit": solution.clb_audit,
        "fr_assignment": solution.fr_assignment,
        "config": opts,
    });
    ComplexityRecord {
        family: family.to_string(),
        value: solution.value,
        status: solution.status,
        json,
    }
}

pub fn render_complexity(record: &ComplexityRecord) -> String {
    let mut out = String::new();
    out.push_str(&format!("family {}\n", record.family));
    out.push_str(&format!("value {}\n", record.value));
    out.push_str(&format!("status {:?}\n", record.status));
    if let Some(slacks) = record.json.get("constraint_slacks").and_then(|v| v.as_array()) {
        let mut worst = f64::INFINITY;
        for entry in slacks {
            if let Some(v) = entry.get("value").and_then(|v| v.as_f64()) {
                let vacuous = entry
                    .get("vacuous")
                    .and_then(|v| v.as_bool())
                    .unwrap_or(false);
                if !vacuous {
                    worst = worst.min(v);
                }
            }
        }
        if worst.is_finite() {
            out.push_str(&format!("min_constraint {worst}\n"));
        }
    }
    if let Some(alloc) = record.json.get("allocation") {
        out.push_str(&format!("allocation {alloc}\n"));
    }
    if record
        .json
        .get("near_zero")
        .and_then(|v| v.as_bool())
        .unwrap_or(false)
    {
        out.push_str("near-zero (sub-logarithmic regime candidate)\n");
        if let Some(check) = record.json.get("sublog_check").and_then(|v| v.as_bool()) {
            out.push_str(&format!("structural_sublog_check {check}\n"));
        }
    }
    out
}

pub fn print_witnesses(report: &ConditionReport) {
    for w in &report.witnesses {
        let place = match (w.context, w.arm) {
            (Some(x), Some(a)) => format!(" at x{x} a{a}"),
            (Some(x), None) => format!(" at x{x}"),
            _ => String::new(),
        };
        println!("witness: {}{place}: {}", w.rep, w.detail);
    }
    for note in &report.notes {
        println!("note: {note}");
    }
}

/// Fixed-layout CSV: one row per (seed, checkpoint).
pub fn curves_to_csv(instance: &BanditInstance, curves: &[RegretCurve], emit_plays: bool) -> String {
    let mut out = String::new();
    out.push_str("algorithm,seed,t,cumulative_regret,regret_over_log_t");
    if emit_plays {
        for x in 0..instance.num_contexts {
            for a in 0..instance.num_arms {
                out.push_str(&format!(",n_x{x}_a{a}"));
            }
        }
    }
    out.push_str(",elim_time,eliminated\n");
    for curve in curves {
        let elim_time = curve
            .elimination_time
            .map(|t| t.to_string())
            .unwrap_or_default();
        let eliminated = curve
            .eliminations
            .iter()
            .map(|(name, t)| format!("{name}@{t}"))
            .collect::<Vec<_>>()
            .join(";");
        for (i, &t) in curve.checkpoints.iter().enumerate() {
            out.push_str(&format!(
                "{},{},{},{},{}",
                curve.algorithm_id, curve.seed, t, curve.cumulative_regret[i],
                curve.regret_over_log_t[i]
            ));
            if emit_plays {
                for n in &curve.plays[i] {
                    out.push_str(&format!(",{n}"));
                }
            }
            out.push_str(&format!(",{elim_time},{eliminated}\n"));
        }
    }
    out
}
