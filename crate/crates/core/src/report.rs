use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

/// Outcome of one identity or inequality check.
///
/// `lhs` and `rhs` are computed along disjoint code paths. For inequalities
/// the convention is `lhs >= rhs`. `terms` holds every sub-integral that went
/// into either side, keyed by a stable name.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentityReport {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    pub residual_abs: f64,
    pub residual_rel: f64,
    pub pass: bool,
    pub hypothesis_met: bool,
    pub tolerance: f64,
    pub terms: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    /// `lhs == rhs` within tolerance.
    Equal,
    /// `lhs >= rhs` up to tolerance.
    AtLeast,
}

impl IdentityReport {
    /// Builds a report and decides `pass`.
    ///
    /// The comparison scale is `max(|lhs|, |rhs|, Σ|terms|)`, so identities
    /// whose two sides both vanish are judged against the size of the
    /// integrals that cancelled. `residual_rel` follows the reporting
    /// convention `|lhs - rhs| / max(|lhs|, |rhs|, 1e-14 Σ|terms|)`.
    pub fn new(
        name: &str,
        lhs: f64,
        rhs: f64,
        relation: Relation,
        tolerance: f64,
        hypothesis_met: bool,
        terms: BTreeMap<String, f64>,
    ) -> IdentityReport {
        let term_sum: f64 = terms.values().map(|v| v.abs()).filter(|v| v.is_finite()).sum();
        let residual_abs = (lhs - rhs).abs();
        let floor = 1e-14 * term_sum;
        let denom = lhs.abs().max(rhs.abs()).max(floor);
        let residual_rel = if denom > 0.0 { residual_abs / denom } else { 0.0 };
        let scale = lhs.abs().max(rhs.abs()).max(term_sum);
        let ok = match relation {
            Relation::Equal => residual_abs <= tolerance * scale,
            Relation::AtLeast => lhs - rhs >= -tolerance * scale,
        };
        let finite = lhs.is_finite() && rhs.is_finite();
        IdentityReport {
            name: name.to_string(),
            lhs,
            rhs,
            residual_abs,
            residual_rel,
            pass: hypothesis_met && finite && ok,
            hypothesis_met,
            tolerance,
            terms,
            notes: Vec::new(),
        }
    }

    /// A report for a check whose hypotheses are not satisfied; never passes.
    pub fn hypothesis_not_met(name: &str, reason: &str, tolerance: f64) -> IdentityReport {
        IdentityReport {
            name: name.to_string(),
            lhs: f64::NAN,
            rhs: f64::NAN,
            residual_abs: f64::NAN,
            residual_rel: f64::NAN,
            pass: false,
            hypothesis_met: false,
            tolerance,
            terms: BTreeMap::new(),
            notes: vec![reason.to_string()],
        }
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.notes.push(note.into());
        self
    }

    /// Adds an extra condition that must hold for the report to pass.
    pub fn require(mut self, condition: bool, note: &str) -> Self {
        if !condition {
            self.pass = false;
            self.notes.push(note.to_string());
        }
        self
    }

    pub fn term(&self, key: &str) -> f64 {
        self.terms.get(key).copied().unwrap_or(f64::NAN)
    }
}

/// Convenience for building term maps.
pub(crate) fn terms<const N: usize>(pairs: [(&str, f64); N]) -> BTreeMap<String, f64> {
    pairs.into_iter().map(|(k, v)| (k.to_string(), v)).collect()
}
