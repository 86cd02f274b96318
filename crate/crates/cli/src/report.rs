//! Verdict reports and their text and JSON renderings.

use std::fmt::Write as _;

use serde::ser::{SerializeMap, Serializer};
use serde::Serialize;

use crate::error::exit;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    /// A computation that finished; nothing was asserted.
    Ok,
    Pass,
    Fail,
    /// The engine could not decide.
    Stuck,
}

impl Status {
    fn tag(self) -> &'static str {
        match self {
            Status::Ok => "ok",
            Status::Pass => "pass",
            Status::Fail => "fail",
            Status::Stuck => "stuck",
        }
    }
}

/// Result fields in insertion order.
#[derive(Clone, Debug, Default)]
pub struct Fields(Vec<(String, String)>);

impl Fields {
    pub fn push(&mut self, key: impl Into<String>, value: impl ToString) {
        self.0.push((key.into(), value.to_string()));
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.0.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &str)> {
        self.0.iter().map(|(k, v)| (k.as_str(), v.as_str()))
    }
}

impl Serialize for Fields {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut m = s.serialize_map(Some(self.0.len()))?;
        for (k, v) in &self.0 {
            m.serialize_entry(k, v)?;
        }
        m.end()
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct TaskReport {
    pub name: String,
    pub op: String,
    pub inputs_digest: String,
    pub status: Status,
    pub fields: Fields,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub certificate: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_ms: Option<u128>,
}

#[derive(Clone, Debug, Serialize)]
pub struct SuiteLine {
    pub check: String,
    pub status: Status,
    pub instances: usize,
    pub unknown: usize,
    pub detail: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_ms: Option<u128>,
}

#[derive(Clone, Debug, Serialize)]
pub struct Summary {
    pub tasks: usize,
    pub checks: usize,
    pub failed: usize,
    pub stuck: usize,
    pub exit_code: i32,
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub command: String,
    pub seed: u64,
    pub document: String,
    pub tasks: Vec<TaskReport>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub suite: Vec<SuiteLine>,
    pub summary: Summary,
}

impl Report {
    pub fn new(command: &str, seed: u64, document: String, tasks: Vec<TaskReport>, suite: Vec<SuiteLine>) -> Self {
        let statuses = tasks.iter().map(|t| t.status).chain(suite.iter().map(|l| l.status));
        let (failed, stuck) = statuses.fold((0, 0), |(f, s), st| match st {
            Status::Fail => (f + 1, s),
            Status::Stuck => (f, s + 1),
            _ => (f, s),
        });
        let exit_code = if failed > 0 {
            exit::VERIFICATION
        } else if stuck > 0 {
            exit::STUCK
        } else {
            exit::OK
        };
        let summary = Summary { tasks: tasks.len(), checks: suite.len(), failed, stuck, exit_code };
        Report { command: command.into(), seed, document, tasks, suite, summary }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize") + "\n"
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "whtor {} (seed {}, document {})", self.command, self.seed, self.document);
        for t in &self.tasks {
            let _ = write!(out, "[{}] {} ({}, inputs {})", t.status.tag(), t.name, t.op, t.inputs_digest);
            if let Some(ms) = t.wall_ms {
                let _ = write!(out, " {ms} ms");
            }
            out.push('\n');
            for (k, v) in t.fields.iter() {
                let _ = writeln!(out, "    {k}: {v}");
            }
            if let Some(c) = &t.certificate {
                let _ = writeln!(out, "    certificate: {c}");
            }
        }
        if !self.suite.is_empty() {
            out.push_str("suite:\n");
            for l in &self.suite {
                let _ = write!(out, "[{}] {}: {} instances", l.status.tag(), l.check, l.instances);
                if l.unknown > 0 {
                    let _ = write!(out, ", {} unknown", l.unknown);
                }
                if let Some(ms) = l.wall_ms {
                    let _ = write!(out, ", {ms} ms");
                }
                let _ = writeln!(out, "; {}", l.detail);
            }
        }
        let s = &self.summary;
        let _ = writeln!(out, "{} tasks, {} checks, {} failed, {} stuck, exit {}", s.tasks, s.checks, s.failed, s.stuck, s.exit_code);
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(status: Status) -> SuiteLine {
        SuiteLine { check: "c".into(), status, instances: 1, unknown: 0, detail: String::new(), wall_ms: None }
    }

    #[test]
    fn exit_code_prefers_failure_over_stuck() {
        assert_eq!(Report::new("verify", 1, "d".into(), vec![], vec![line(Status::Pass)]).summary.exit_code, 0);
        assert_eq!(Report::new("verify", 1, "d".into(), vec![], vec![line(Status::Stuck)]).summary.exit_code, 13);
        let r = Report::new("verify", 1, "d".into(), vec![], vec![line(Status::Stuck), line(Status::Fail)]);
        assert_eq!(r.summary.exit_code, 14);
    }

    #[test]
    fn fields_keep_insertion_order() {
        let mut f = Fields::default();
        f.push("zeta", 1);
        f.push("alpha", 2);
        let t = TaskReport { name: "n".into(), op: "o".into(), inputs_digest: "x".into(), status: Status::Ok, fields: f, certificate: None, wall_ms: None };
        let r = Report::new("torsion", 0, "d".into(), vec![t], vec![]);
        let j = r.to_json();
        assert!(j.find("zeta").unwrap() < j.find("alpha").unwrap());
        assert!(!j.contains("wall_ms"));
    }
}
