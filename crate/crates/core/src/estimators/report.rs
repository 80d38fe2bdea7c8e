//! Monte Carlo report records and suite aggregation.
//!
//! Every experiment produces one `McReport` per estimated quantity. A report
//! either carries a target with a z-score and a pass/fail verdict, or is
//! informational (no closed-form target exists). A `SuiteReport` collects
//! the reports of one plan run in deterministic order and maps to an exit
//! code: 0 when every gated report passes, 1 when any fails, 2 for an empty
//! suite.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

/// Widened default gate: many reports per suite, so 1.96 would false-alarm.
pub const DEFAULT_GATE: f64 = 4.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
    Informational,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
            Verdict::Informational => "informational",
        }
    }
}

/// One Monte Carlo estimate. `extra` holds named auxiliary scalars
/// (secondary means, violation counts, bootstrap endpoints) that do not fit
/// the fixed CSV columns; a BTreeMap keeps serialization order stable.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct McReport {
    pub label: String,
    pub n: usize,
    pub lambda: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub k: Option<usize>,
    pub trials: u64,
    pub mean: f64,
    pub stderr: f64,
    pub ci95: (f64, f64),
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub target: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub zscore: Option<f64>,
    /// Gate in standard errors used for the verdict; `one_sided` gates only
    /// the upper excess (used when the target is an upper bound).
    pub gate: f64,
    pub one_sided: bool,
    pub verdict: Verdict,
    #[serde(skip_serializing_if = "BTreeMap::is_empty", default)]
    pub extra: BTreeMap<String, f64>,
}

impl McReport {
    /// Gated report: mean against a target at `gate` standard errors.
    /// Two-sided gates on |z|; one-sided passes whenever the mean does not
    /// exceed the target by more than `gate` standard errors.
    pub fn gated(
        label: impl Into<String>,
        n: usize,
        lambda: f64,
        k: Option<usize>,
        trials: u64,
        mean: f64,
        stderr: f64,
        target: f64,
        gate: f64,
        one_sided: bool,
    ) -> Self {
        let z = zscore(mean, stderr, target);
        let ok = if one_sided { z <= gate } else { z.abs() <= gate };
        McReport {
            label: label.into(),
            n,
            lambda,
            k,
            trials,
            mean,
            stderr,
            ci95: ci95(mean, stderr),
            target: Some(target),
            zscore: Some(z),
            gate,
            one_sided,
            verdict: if ok { Verdict::Pass } else { Verdict::Fail },
            extra: BTreeMap::new(),
        }
    }

    /// Informational report: an estimate with no gating target.
    pub fn informational(
        label: impl Into<String>,
        n: usize,
        lambda: f64,
        k: Option<usize>,
        trials: u64,
        mean: f64,
        stderr: f64,
    ) -> Self {
        McReport {
            label: label.into(),
            n,
            lambda,
            k,
            trials,
            mean,
            stderr,
            ci95: ci95(mean, stderr),
            target: None,
            zscore: None,
            gate: DEFAULT_GATE,
            one_sided: false,
            verdict: Verdict::Informational,
            extra: BTreeMap::new(),
        }
    }

    pub fn with_extra(mut self, key: &str, value: f64) -> Self {
        self.extra.insert(key.to_string(), value);
        self
    }
}

fn ci95(mean: f64, stderr: f64) -> (f64, f64) {
    (mean - 1.96 * stderr, mean + 1.96 * stderr)
}

/// (mean - target) / stderr, with the degenerate zero-variance cases mapped
/// to 0 (exact hit) or infinity (certain miss).
pub fn zscore(mean: f64, stderr: f64, target: f64) -> f64 {
    let diff = mean - target;
    if stderr == 0.0 {
        if diff == 0.0 {
            0.0
        } else {
            f64::INFINITY.copysign(diff)
        }
    } else {
        diff / stderr
    }
}

/// All reports of one suite run, in plan order.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SuiteReport {
    pub schema: u32,
    pub seed: u64,
    pub reports: Vec<McReport>,
    /// False while the run is in flight (partial flushes); true at the end.
    pub complete: bool,
}

impl SuiteReport {
    pub fn new(seed: u64) -> Self {
        SuiteReport { schema: 1, seed, reports: Vec::new(), complete: false }
    }

    /// 0 all gated reports pass, 1 any failure, 2 empty suite.
    pub fn exit_code(&self) -> i32 {
        if self.reports.is_empty() {
            return 2;
        }
        if self.reports.iter().any(|r| r.verdict == Verdict::Fail) {
            1
        } else {
            0
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("reports are serializable");
        s.push('\n');
        s
    }

    /// Fixed-column CSV; `extra` fields are JSON-only. Floats use shortest
    /// round-trip formatting, so output is byte-stable.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("label,n,lambda,k,trials,mean,stderr,target,zscore,verdict\n");
        for r in &self.reports {
            let k = r.k.map(|v| v.to_string()).unwrap_or_default();
            let target = r.target.map(fmt_f64).unwrap_or_default();
            let z = r.zscore.map(fmt_f64).unwrap_or_default();
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{}",
                r.label,
                r.n,
                fmt_f64(r.lambda),
                k,
                r.trials,
                fmt_f64(r.mean),
                fmt_f64(r.stderr),
                target,
                z,
                r.verdict.as_str()
            );
        }
        out
    }
}

fn fmt_f64(v: f64) -> String {
    format!("{v}")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn verdict_gating() {
        let pass = McReport::gated("a", 2, 0.5, Some(1), 100, 0.51, 0.01, 0.5, 4.0, false);
        assert_eq!(pass.verdict, Verdict::Pass);
        let fail = McReport::gated("b", 2, 0.5, Some(1), 100, 0.55, 0.01, 0.5, 4.0, false);
        assert_eq!(fail.verdict, Verdict::Fail);
        // One-sided: far below the bound is fine no matter how many SE.
        let below = McReport::gated("c", 2, 0.5, Some(1), 100, 0.01, 0.001, 0.5, 4.0, true);
        assert_eq!(below.verdict, Verdict::Pass);
        let above = McReport::gated("d", 2, 0.5, Some(1), 100, 0.6, 0.01, 0.5, 4.0, true);
        assert_eq!(above.verdict, Verdict::Fail);
    }

    #[test]
    fn zscore_degenerate_cases() {
        assert_eq!(zscore(1.0, 0.0, 1.0), 0.0);
        assert_eq!(zscore(2.0, 0.0, 1.0), f64::INFINITY);
        assert_eq!(zscore(0.0, 0.0, 1.0), f64::NEG_INFINITY);
        assert!((zscore(1.5, 0.25, 1.0) - 2.0).abs() < 1e-15);
    }

    #[test]
    fn exit_codes() {
        let mut suite = SuiteReport::new(7);
        assert_eq!(suite.exit_code(), 2, "empty suite");
        suite
            .reports
            .push(McReport::informational("i", 2, 0.5, None, 10, 0.1, 0.01));
        assert_eq!(suite.exit_code(), 0, "informational only");
        suite
            .reports
            .push(McReport::gated("g", 2, 0.5, None, 10, 0.5, 0.01, 0.5, 4.0, false));
        assert_eq!(suite.exit_code(), 0);
        suite
            .reports
            .push(McReport::gated("h", 2, 0.5, None, 10, 0.9, 0.01, 0.5, 4.0, false));
        assert_eq!(suite.exit_code(), 1);
    }

    #[test]
    fn csv_golden_row() {
        let mut suite = SuiteReport::new(7);
        suite.reports.push(McReport::gated(
            "moment-k1",
            4,
            0.5,
            Some(1),
            100000,
            0.4992,
            0.0022,
            0.5,
            4.0,
            false,
        ));
        suite.reports.push(McReport::informational("tv-n2", 2, 0.01, None, 1000, 0.015, 0.003));
        suite.complete = true;
        let csv = suite.to_csv();
        let mut lines = csv.lines();
        assert_eq!(
            lines.next().unwrap(),
            "label,n,lambda,k,trials,mean,stderr,target,zscore,verdict"
        );
        let row = lines.next().unwrap();
        assert!(row.starts_with("moment-k1,4,0.5,1,100000,0.4992,0.0022,0.5,"));
        assert!(row.ends_with(",pass"));
        let row2 = lines.next().unwrap();
        assert_eq!(row2, "tv-n2,2,0.01,,1000,0.015,0.003,,,informational");
    }

    #[test]
    fn json_round_trip() {
        let mut suite = SuiteReport::new(3);
        suite.reports.push(
            McReport::gated("x", 3, 0.25, Some(2), 50, 0.1, 0.02, 0.09, 4.0, false)
                .with_extra("aborted_trials", 0.0),
        );
        suite.complete = true;
        let json = suite.to_json();
        let back: SuiteReport = serde_json::from_str(&json).unwrap();
        assert_eq!(back.to_json(), json, "serialization is a fixed point");
        assert_eq!(back.reports[0].extra["aborted_trials"], 0.0);
    }
}
