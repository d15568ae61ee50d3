use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::Result;

/// One checked quantity. `criterion` states the pass rule in words so the
/// CSV reads on its own.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub experiment: String,
    /// The inequality or identity the row tests.
    pub tag: String,
    pub quantity: String,
    pub lhs: f64,
    pub rhs: f64,
    /// `lhs / rhs` when `rhs > 0`, otherwise NaN.
    pub ratio: f64,
    /// Fitted constant, NaN when the row fits none.
    pub constant: f64,
    pub threshold: f64,
    pub criterion: String,
    pub pass: bool,
}

impl ReportRow {
    pub fn new(experiment: &str, tag: &str, quantity: impl Into<String>, lhs: f64, rhs: f64) -> Self {
        Self {
            experiment: experiment.to_string(),
            tag: tag.to_string(),
            quantity: quantity.into(),
            lhs,
            rhs,
            ratio: if rhs > 0.0 { lhs / rhs } else { f64::NAN },
            constant: f64::NAN,
            threshold: f64::NAN,
            criterion: String::new(),
            pass: false,
        }
    }

    pub fn with_constant(mut self, c: f64) -> Self {
        self.constant = c;
        self
    }

    /// Passes when `value <= threshold`.
    pub fn at_most(mut self, what: &str, value: f64, threshold: f64) -> Self {
        self.threshold = threshold;
        self.criterion = format!("{what} <= {threshold}");
        self.pass = value <= threshold;
        self
    }

    /// Passes when `value >= threshold`.
    pub fn at_least(mut self, what: &str, value: f64, threshold: f64) -> Self {
        self.threshold = threshold;
        self.criterion = format!("{what} >= {threshold}");
        self.pass = value >= threshold;
        self
    }

    pub fn judged(mut self, criterion: impl Into<String>, threshold: f64, pass: bool) -> Self {
        self.threshold = threshold;
        self.criterion = criterion.into();
        self.pass = pass;
        self
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub rows: Vec<ReportRow>,
}

impl Report {
    pub fn push(&mut self, row: ReportRow) {
        self.rows.push(row);
    }

    pub fn extend(&mut self, rows: impl IntoIterator<Item = ReportRow>) {
        self.rows.extend(rows);
    }

    pub fn all_pass(&self) -> bool {
        self.rows.iter().all(|r| r.pass)
    }

    pub fn failures(&self) -> usize {
        self.rows.iter().filter(|r| !r.pass).count()
    }

    /// `0` when every row passes, `1` otherwise.
    pub fn exit_code(&self) -> i32 {
        if self.all_pass() {
            0
        } else {
            1
        }
    }

    pub fn summary(&self) -> String {
        format!("{} rows, {} passed, {} failed", self.rows.len(), self.rows.len() - self.failures(), self.failures())
    }

    /// CSV with a header row; numbers in shortest round-trip form.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["experiment", "tag", "quantity", "lhs", "rhs", "ratio", "constant", "threshold", "criterion", "pass"])?;
        for r in &self.rows {
            out.write_record([
                r.experiment.clone(),
                r.tag.clone(),
                r.quantity.clone(),
                format!("{:e}", r.lhs),
                format!("{:e}", r.rhs),
                format!("{:e}", r.ratio),
                format!("{:e}", r.constant),
                format!("{:e}", r.threshold),
                r.criterion.clone(),
                if r.pass { "pass".into() } else { "fail".into() },
            ])?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        Ok(String::from_utf8(buf).expect("csv output is utf-8"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ratio_and_csv() {
        let mut rep = Report::default();
        rep.push(ReportRow::new("x", "t", "q", 2.0, 4.0).at_most("ratio", 0.5, 1.0));
        rep.push(ReportRow::new("x", "t", "q", 1.0, 0.0).at_least("lhs", 1.0, 2.0));
        assert_eq!(rep.rows[0].ratio, 0.5);
        assert!(rep.rows[1].ratio.is_nan());
        assert_eq!(rep.exit_code(), 1);
        let text = rep.to_csv_string().unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), "experiment,tag,quantity,lhs,rhs,ratio,constant,threshold,criterion,pass");
        assert!(lines.next().unwrap().ends_with("ratio <= 1,pass"));
        assert_eq!(rep.summary(), "2 rows, 1 passed, 1 failed");
    }
}
