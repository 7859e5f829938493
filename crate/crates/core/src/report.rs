//! Uniform check records and their deterministic text rendering.
//!
//! Every verification routine in this crate reports through these records so
//! the command-line output is byte-identical across runs: records render in
//! insertion order and all collections feeding them iterate in their stable
//! id or lexicographic orders.

use std::fmt;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Pass,
    Fail,
    Skip,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Status::Pass => write!(f, "pass"),
            Status::Fail => write!(f, "fail"),
            Status::Skip => write!(f, "skip"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CheckRecord {
    pub check: String,
    pub instance: String,
    pub status: Status,
    pub detail: String,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Report {
    pub records: Vec<CheckRecord>,
}

impl Report {
    pub fn new() -> Report {
        Report::default()
    }

    pub fn add(&mut self, check: &str, instance: &str, pass: bool, detail: impl Into<String>) {
        self.records.push(CheckRecord {
            check: check.to_string(),
            instance: instance.to_string(),
            status: if pass { Status::Pass } else { Status::Fail },
            detail: detail.into(),
        });
    }

    pub fn skip(&mut self, check: &str, instance: &str, detail: impl Into<String>) {
        self.records.push(CheckRecord {
            check: check.to_string(),
            instance: instance.to_string(),
            status: Status::Skip,
            detail: detail.into(),
        });
    }

    pub fn extend(&mut self, other: Report) {
        self.records.extend(other.records);
    }

    pub fn all_pass(&self) -> bool {
        self.records.iter().all(|r| r.status != Status::Fail)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckRecord> {
        self.records.iter().filter(|r| r.status == Status::Fail)
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for r in &self.records {
            out.push_str(&format!(
                "check={} instance={} status={}",
                r.check, r.instance, r.status
            ));
            if !r.detail.is_empty() {
                out.push_str(&format!(" detail={}", r.detail));
            }
            out.push('\n');
        }
        let fails = self.records.iter().filter(|r| r.status == Status::Fail).count();
        out.push_str(&format!(
            "summary total={} pass={} fail={} skip={}\n",
            self.records.len(),
            self.records
                .iter()
                .filter(|r| r.status == Status::Pass)
                .count(),
            fails,
            self.records
                .iter()
                .filter(|r| r.status == Status::Skip)
                .count(),
        ));
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rendering_is_stable_and_counts_statuses() {
        let mut rep = Report::new();
        rep.add("alpha", "g1", true, "");
        rep.add("beta", "g1", false, "mismatch at x");
        rep.skip("gamma", "g2", "not applicable");
        let text = rep.render();
        assert_eq!(
            text,
            "check=alpha instance=g1 status=pass\n\
             check=beta instance=g1 status=fail detail=mismatch at x\n\
             check=gamma instance=g2 status=skip detail=not applicable\n\
             summary total=3 pass=1 fail=1 skip=1\n"
        );
        assert!(!rep.all_pass());
        assert_eq!(rep.failures().count(), 1);
    }
}
