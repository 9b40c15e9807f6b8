use std::fmt::Write;

use serde::{Deserialize, Serialize};

use super::{CampaignStats, TieConvention};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ReportOptions {
    /// Significance level for the overall preference test.
    pub alpha_overall: f64,
    /// Significance level for each per-question z-test.
    pub alpha_question: f64,
}

impl Default for ReportOptions {
    fn default() -> Self {
        Self { alpha_overall: 0.001, alpha_question: 0.05 }
    }
}

fn convention_name(c: TieConvention) -> &'static str {
    match c {
        TieConvention::ExcludeTies => "exclude_ties",
        TieConvention::TiesAsLosses => "ties_as_losses",
        TieConvention::TiesAsWins => "ties_as_wins",
    }
}

fn yes_no(p: f64, alpha: f64) -> &'static str {
    if p < alpha {
        "yes"
    } else {
        "no"
    }
}

/// Plain-text summary with one row per test: statistic, p-value, and
/// significance at the configured level.
pub fn render_report(stats: &CampaignStats, opts: &ReportOptions) -> String {
    let mut out = String::new();
    let pct = |x: f64| x * 100.0;
    let _ = writeln!(out, "items judged      {}", stats.n_items);
    let _ = writeln!(out, "unanswered        {}", stats.n_unanswered);
    if stats.duplicate_judgments > 0 {
        let _ = writeln!(out, "duplicates        {} (first kept)", stats.duplicate_judgments);
    }
    let _ = writeln!(out, "llm wins          {}", stats.llm_wins);
    let _ = writeln!(out, "ties              {}", stats.ties);
    let _ = writeln!(out, "ml wins           {}", stats.ml_wins);
    let _ = writeln!(out, "win rate          {:.1}%", pct(stats.win_rate));
    let _ = writeln!(out, "win-or-tie rate   {:.2}%", pct(stats.win_or_tie_rate));
    let _ = writeln!(out, "tie convention    {}", convention_name(stats.convention));
    let _ = writeln!(out);
    let _ = writeln!(out, "{:<22} {:>10} {:>10} {:>12}", "test", "statistic", "p-value", "significant");
    match stats.binomial_p {
        Some(p) => {
            let _ = writeln!(
                out,
                "{:<22} {:>10} {:>10.2e} {:>12}",
                "binomial (overall)",
                format!("{}/{}", stats.binomial_k, stats.binomial_n),
                p,
                format!("{} @{}", yes_no(p, opts.alpha_overall), opts.alpha_overall)
            );
        }
        None => {
            let _ = writeln!(out, "{:<22} {:>10} {:>10} {:>12}", "binomial (overall)", "-", "-", "no informative");
        }
    }
    for q in &stats.per_question {
        let sig = if q.degenerate {
            "degenerate".to_string()
        } else {
            format!("{} @{}", yes_no(q.p, opts.alpha_question), opts.alpha_question)
        };
        let _ = writeln!(out, "{:<22} {:>10.2} {:>10.2e} {:>12}", q.question, q.z, q.p, sig);
    }
    out
}
