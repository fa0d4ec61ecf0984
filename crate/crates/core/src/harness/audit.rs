//! Leakage audit over a recorded transcript.
//!
//! Rules for main-construction runs:
//! * the blinding scalar r never appears on any wire;
//! * r_main never reaches C_aid;
//! * r_aid never reaches C_main or leaves it (C_main only sees r_aid-powers);
//! * no plaintext keyword appears anywhere.

use serde::Serialize;
use serde_json::Value;

use super::message::Message;
use super::transport::{Role, TranscriptEntry};
use crate::backbone::{normalize_keyword, Scalar};
use crate::error::{KaseError, Result};

/// Values the auditor knows and the wire must not carry.
#[derive(Clone, Debug, Default)]
pub struct AuditSecrets {
    pub r: Option<Scalar>,
    pub r_main: Option<Scalar>,
    pub r_aid: Option<Scalar>,
    pub keywords: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Finding {
    pub seq: u64,
    pub rule: String,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct AuditReport {
    pub messages: usize,
    pub findings: Vec<Finding>,
    pub notes: Vec<String>,
}

impl AuditReport {
    pub fn is_clean(&self) -> bool {
        self.findings.is_empty()
    }

    /// The first finding as an error.
    pub fn into_result(self) -> Result<AuditReport> {
        match self.findings.first() {
            Some(f) => Err(KaseError::Audit {
                seq: f.seq,
                rule: f.rule.clone(),
            }),
            None => Ok(self),
        }
    }
}

pub const RULE_R_ON_WIRE: &str = "blinding scalar r on the wire";
pub const RULE_R_MAIN_TO_AID: &str = "r_main delivered to C_aid";
pub const RULE_R_AID_AT_MAIN: &str = "r_aid visible to C_main";
pub const RULE_PLAINTEXT_KEYWORD: &str = "plaintext keyword on the wire";

pub const NOTE_DETERMINISTIC_TRAPDOOR: &str =
    "first-construction trapdoors are a deterministic function of (aggregate key, keyword): repeated searches for one keyword are linkable";

/// All string values of a message, except the message tag.
fn strings(v: &Value, out: &mut Vec<String>) {
    match v {
        Value::String(s) => out.push(s.clone()),
        Value::Array(a) => a.iter().for_each(|x| strings(x, out)),
        Value::Object(m) => m.values().for_each(|x| strings(x, out)),
        _ => {}
    }
}

fn message_strings(msg: &Message) -> Vec<String> {
    let mut v = serde_json::to_value(msg).expect("messages serialise");
    if let Value::Object(m) = &mut v {
        m.remove("type");
    }
    let mut out = Vec::new();
    strings(&v, &mut out);
    out
}

fn is_hex(s: &str) -> bool {
    !s.is_empty() && s.bytes().all(|b| b.is_ascii_hexdigit())
}

/// A hex field that happens to spell a short keyword is not a leak; any
/// other string equal to or containing the keyword is.
fn mentions_keyword(s: &str, kw: &str) -> bool {
    !kw.is_empty() && (s == kw || (!is_hex(s) && s.contains(kw)))
}

pub fn audit(entries: &[TranscriptEntry], secrets: &AuditSecrets) -> AuditReport {
    let r_hex = secrets.r.map(|x| x.to_hex());
    let r_main_hex = secrets.r_main.map(|x| x.to_hex());
    let r_aid_hex = secrets.r_aid.map(|x| x.to_hex());
    let keywords: Vec<String> = secrets.keywords.iter().map(|w| normalize_keyword(w)).collect();
    let mut report = AuditReport {
        messages: entries.len(),
        ..Default::default()
    };
    let mut first_trapdoors = Vec::new();

    for e in entries {
        let ss = message_strings(&e.message);
        let carries = |hex: &Option<String>| hex.as_ref().is_some_and(|h| ss.iter().any(|s| s.contains(h.as_str())));
        let mut flag = |rule: &str| {
            report.findings.push(Finding {
                seq: e.seq,
                rule: rule.to_string(),
            })
        };

        if carries(&r_hex) {
            flag(RULE_R_ON_WIRE);
        }
        if e.to == Role::Aid && carries(&r_main_hex) {
            flag(RULE_R_MAIN_TO_AID);
        }
        if (e.to == Role::Main || e.from == Role::Main) && carries(&r_aid_hex) {
            flag(RULE_R_AID_AT_MAIN);
        }
        if keywords.iter().any(|kw| ss.iter().any(|s| mentions_keyword(s, kw))) {
            flag(RULE_PLAINTEXT_KEYWORD);
        }
        if let Message::FirstQuery(q) = &e.message {
            first_trapdoors.push(q.tr);
        }
    }

    if !first_trapdoors.is_empty() {
        report.notes.push(NOTE_DETERMINISTIC_TRAPDOOR.to_string());
        let mut seen = std::collections::HashSet::new();
        let repeats = first_trapdoors.iter().filter(|t| !seen.insert(t.to_bytes())).count();
        if repeats > 0 {
            report
                .notes
                .push(format!("{repeats} first-construction trapdoor(s) repeat an earlier one in this transcript"));
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn keyword_matching_ignores_hex_fields() {
        assert!(!mentions_keyword("00cafe11", "cafe"));
        assert!(mentions_keyword("cafe", "cafe"));
        assert!(mentions_keyword("kw=apple", "apple"));
        assert!(!mentions_keyword("banana", "apple"));
    }
}
