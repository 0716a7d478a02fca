//! Metric rows and their CSV form.

use std::fmt;
use std::io::{self, Write};
use std::path::Path;
use std::str::FromStr;

use super::stats::{proportion, Estimate};

/// How an estimate is compared with its reference value.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Relation {
    /// The interval contains the reference.
    Equal,
    /// The interval reaches down to the reference or below.
    AtMost,
    /// The interval reaches up to the reference or above.
    AtLeast,
    /// Reported only; always passes.
    Info,
}

impl Relation {
    pub fn as_str(&self) -> &'static str {
        match self {
            Relation::Equal => "eq",
            Relation::AtMost => "le",
            Relation::AtLeast => "ge",
            Relation::Info => "info",
        }
    }

    pub fn holds(&self, est: &Estimate, reference: f64) -> bool {
        match self {
            Relation::Equal => est.low <= reference && reference <= est.high,
            Relation::AtMost => est.low <= reference,
            Relation::AtLeast => est.high >= reference,
            Relation::Info => true,
        }
    }
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Relation {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "eq" => Ok(Relation::Equal),
            "le" => Ok(Relation::AtMost),
            "ge" => Ok(Relation::AtLeast),
            "info" => Ok(Relation::Info),
            other => Err(format!("unknown relation {other:?}")),
        }
    }
}

/// One measured quantity with its reference.
#[derive(Clone, Debug, PartialEq)]
pub struct MetricRow {
    pub scenario: String,
    pub metric: String,
    /// Which stated property the row checks.
    pub claim: String,
    pub trials: u64,
    pub estimate: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub reference: f64,
    pub relation: Relation,
    pub pass: bool,
}

impl MetricRow {
    pub fn new(
        scenario: &str,
        metric: &str,
        claim: &str,
        trials: u64,
        est: Estimate,
        reference: f64,
        relation: Relation,
    ) -> Self {
        Self {
            scenario: scenario.to_owned(),
            metric: metric.to_owned(),
            claim: claim.to_owned(),
            trials,
            estimate: est.value,
            ci_low: est.low,
            ci_high: est.high,
            reference,
            relation,
            pass: relation.holds(&est, reference),
        }
    }

    /// A proportion `successes / trials` with the standard interval.
    pub fn rate(
        scenario: &str,
        metric: &str,
        claim: &str,
        successes: u64,
        trials: u64,
        reference: f64,
        relation: Relation,
    ) -> Self {
        Self::new(scenario, metric, claim, trials, proportion(successes, trials), reference, relation)
    }

    /// An exactly computed value (zero-width interval).
    pub fn exact(
        scenario: &str,
        metric: &str,
        claim: &str,
        trials: u64,
        value: f64,
        reference: f64,
        relation: Relation,
    ) -> Self {
        Self::new(scenario, metric, claim, trials, Estimate::exact(value), reference, relation)
    }

    fn csv_line(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{}",
            self.scenario,
            self.metric,
            self.claim,
            self.trials,
            self.estimate,
            self.ci_low,
            self.ci_high,
            self.reference,
            self.relation,
            self.pass
        )
    }
}

/// All rows produced by one scenario run.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ExperimentResult {
    pub rows: Vec<MetricRow>,
}

pub const CSV_HEADER: &str = "scenario,metric,claim,trials,estimate,ci_low,ci_high,reference,relation,pass";

impl ExperimentResult {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, row: MetricRow) {
        self.rows.push(row);
    }

    pub fn extend(&mut self, other: ExperimentResult) {
        self.rows.extend(other.rows);
    }

    pub fn all_pass(&self) -> bool {
        self.rows.iter().all(|r| r.pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &MetricRow> {
        self.rows.iter().filter(|r| !r.pass)
    }

    /// First row with this metric name.
    pub fn metric(&self, name: &str) -> Option<&MetricRow> {
        self.rows.iter().find(|r| r.metric == name)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(CSV_HEADER);
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.csv_line());
            out.push('\n');
        }
        out
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> io::Result<()> {
        let mut file = std::fs::File::create(path)?;
        file.write_all(self.to_csv().as_bytes())?;
        file.sync_all()
    }
}

impl fmt::Display for ExperimentResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_csv())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn relations() {
        let e = Estimate {
            value: 0.5,
            low: 0.4,
            high: 0.6,
        };
        assert!(Relation::Equal.holds(&e, 0.45));
        assert!(!Relation::Equal.holds(&e, 0.7));
        assert!(Relation::AtMost.holds(&e, 0.4));
        assert!(!Relation::AtMost.holds(&e, 0.3));
        assert!(Relation::AtLeast.holds(&e, 0.6));
        assert!(!Relation::AtLeast.holds(&e, 0.61));
        assert!(Relation::Info.holds(&e, 100.0));
        for r in [Relation::Equal, Relation::AtMost, Relation::AtLeast, Relation::Info] {
            assert_eq!(r.as_str().parse::<Relation>().unwrap(), r);
        }
    }

    #[test]
    fn csv_layout() {
        let mut res = ExperimentResult::new();
        res.push(MetricRow::exact("s", "m", "c", 3, 0.25, 0.25, Relation::Equal));
        assert_eq!(res.to_csv(), format!("{CSV_HEADER}\ns,m,c,3,0.25,0.25,0.25,0.25,eq,true\n"));
    }
}
