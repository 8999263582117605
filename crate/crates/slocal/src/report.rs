//! Check outcomes with honest truncation accounting.
//!
//! Every verifier in this crate reports one of three verdicts. `Pass` means
//! at least one coefficient identity was actually checked and none failed;
//! `Fail` always carries a concrete witness (coordinates plus both computed
//! values); `Inconclusive` means the carrier truncation left nothing
//! computable, which is deliberately distinct from `Pass`.

use serde::Serialize;

use crate::formal::WindowCompare;

#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
    Inconclusive,
}

impl Verdict {
    /// Process exit code used by the command-line front end.
    pub fn exit_code(self) -> i32 {
        match self {
            Verdict::Pass => 0,
            Verdict::Fail => 1,
            Verdict::Inconclusive => 2,
        }
    }

    /// Combine: any failure dominates, then any inconclusive.
    pub fn and(self, other: Verdict) -> Verdict {
        use Verdict::*;
        match (self, other) {
            (Fail, _) | (_, Fail) => Fail,
            (Inconclusive, _) | (_, Inconclusive) => Inconclusive,
            _ => Pass,
        }
    }

    pub fn is_pass(self) -> bool {
        self == Verdict::Pass
    }

    pub fn is_fail(self) -> bool {
        self == Verdict::Fail
    }
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Verdict::Pass => write!(f, "pass"),
            Verdict::Fail => write!(f, "fail"),
            Verdict::Inconclusive => write!(f, "inconclusive"),
        }
    }
}

/// Concrete evidence for a failed check: where, and what both sides were.
#[derive(Clone, PartialEq, Eq, Debug, Serialize)]
pub struct Witness {
    pub location: String,
    pub left: String,
    pub right: String,
}

/// Result of one verified identity.
#[derive(Clone, PartialEq, Eq, Debug, Serialize)]
pub struct Check {
    /// Stable machine-readable identifier of the law being verified.
    pub rule: String,
    /// Human-readable description of the objects involved.
    pub subject: String,
    pub verdict: Verdict,
    /// Number of coefficient identities (or discrete facts) confirmed.
    pub checked: usize,
    /// Number of points skipped because the truncation made them unknowable.
    pub skipped: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Witness>,
}

impl Check {
    pub fn pass(rule: &str, subject: &str, checked: usize, skipped: usize) -> Self {
        assert!(checked > 0, "a pass must have checked something");
        Check {
            rule: rule.to_string(),
            subject: subject.to_string(),
            verdict: Verdict::Pass,
            checked,
            skipped,
            witness: None,
        }
    }

    pub fn fail(rule: &str, subject: &str, checked: usize, skipped: usize, witness: Witness) -> Self {
        Check {
            rule: rule.to_string(),
            subject: subject.to_string(),
            verdict: Verdict::Fail,
            checked,
            skipped,
            witness: Some(witness),
        }
    }

    pub fn inconclusive(rule: &str, subject: &str, skipped: usize) -> Self {
        Check {
            rule: rule.to_string(),
            subject: subject.to_string(),
            verdict: Verdict::Inconclusive,
            checked: 0,
            skipped,
            witness: None,
        }
    }

    /// Resolve a batched sweep: an encountered failure wins, an empty sweep
    /// is inconclusive, anything else passes.
    pub fn settle(
        rule: &str,
        subject: &str,
        checked: usize,
        skipped: usize,
        fail: Option<Check>,
    ) -> Self {
        match fail {
            Some(c) => c,
            None if checked == 0 => Check::inconclusive(rule, subject, skipped),
            None => Check::pass(rule, subject, checked, skipped),
        }
    }

    /// Build a check from a window comparison; `fmt` renders carrier vectors
    /// for the witness.
    pub fn from_compare<T>(
        rule: &str,
        subject: &str,
        cmp: &WindowCompare<T>,
        mut fmt: impl FnMut(&T) -> String,
    ) -> Self {
        if let Some(m) = cmp.mismatches.first() {
            Check::fail(
                rule,
                subject,
                cmp.checked,
                cmp.skipped,
                Witness {
                    location: format!("(i, j) = ({}, {})", m.i, m.j),
                    left: fmt(&m.left),
                    right: fmt(&m.right),
                },
            )
        } else if cmp.checked == 0 {
            Check::inconclusive(rule, subject, cmp.skipped)
        } else {
            Check::pass(rule, subject, cmp.checked, cmp.skipped)
        }
    }
}

impl std::fmt::Display for Check {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "[{}] {} ({}): checked {}, skipped {}",
            self.verdict, self.rule, self.subject, self.checked, self.skipped
        )?;
        if let Some(w) = &self.witness {
            write!(f, "; witness at {}: {} vs {}", w.location, w.left, w.right)?;
        }
        Ok(())
    }
}

/// A batch of checks with a combined verdict.
#[derive(Clone, PartialEq, Eq, Debug, Default, Serialize)]
pub struct CheckSet {
    pub checks: Vec<Check>,
}

impl CheckSet {
    pub fn new() -> Self {
        CheckSet { checks: Vec::new() }
    }

    pub fn push(&mut self, c: Check) {
        self.checks.push(c);
    }

    pub fn extend(&mut self, other: CheckSet) {
        self.checks.extend(other.checks);
    }

    /// Combined verdict, aggregated per rule: any failure fails the set; a
    /// rule counts as inconclusive only when *every* check of that rule was
    /// inconclusive (individual subjects outside the truncation contract are
    /// recorded as skipped without poisoning a rule verified elsewhere).
    pub fn verdict(&self) -> Verdict {
        let mut per_rule: std::collections::BTreeMap<&str, Verdict> = std::collections::BTreeMap::new();
        for c in &self.checks {
            let entry = per_rule.entry(c.rule.as_str()).or_insert(Verdict::Inconclusive);
            *entry = match (*entry, c.verdict) {
                (Verdict::Fail, _) | (_, Verdict::Fail) => Verdict::Fail,
                (Verdict::Pass, _) | (_, Verdict::Pass) => Verdict::Pass,
                _ => Verdict::Inconclusive,
            };
        }
        per_rule.values().fold(Verdict::Pass, |acc, v| acc.and(*v))
    }

    pub fn total_checked(&self) -> usize {
        self.checks.iter().map(|c| c.checked).sum()
    }

    pub fn total_skipped(&self) -> usize {
        self.checks.iter().map(|c| c.skipped).sum()
    }

    pub fn first_failure(&self) -> Option<&Check> {
        self.checks.iter().find(|c| c.verdict == Verdict::Fail)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formal::{BiWindow, WindowSpec};
    use crate::rat_int;
    use crate::Rat;

    #[test]
    fn verdict_combination_and_exit_codes() {
        use Verdict::*;
        assert_eq!(Pass.and(Pass), Pass);
        assert_eq!(Pass.and(Inconclusive), Inconclusive);
        assert_eq!(Inconclusive.and(Fail), Fail);
        assert_eq!(Pass.exit_code(), 0);
        assert_eq!(Fail.exit_code(), 1);
        assert_eq!(Inconclusive.exit_code(), 2);
    }

    #[test]
    fn all_unknown_windows_yield_inconclusive() {
        let spec = WindowSpec::square(1);
        let a: BiWindow<Rat> = BiWindow::from_fn(spec, |_, _| None);
        let b: BiWindow<Rat> = BiWindow::from_fn(spec, |_, _| Some(rat_int(0)));
        let cmp = a.compare(&b);
        let check = Check::from_compare("equality", "test window", &cmp, |r| r.to_string());
        assert_eq!(check.verdict, Verdict::Inconclusive);
        assert_eq!(check.skipped, 9);
    }

    #[test]
    fn mismatch_becomes_failure_with_witness() {
        let spec = WindowSpec::square(0);
        let a: BiWindow<Rat> = BiWindow::from_fn(spec, |_, _| Some(rat_int(1)));
        let b: BiWindow<Rat> = BiWindow::from_fn(spec, |_, _| Some(rat_int(2)));
        let check = Check::from_compare("equality", "test", &a.compare(&b), |r| r.to_string());
        assert_eq!(check.verdict, Verdict::Fail);
        let w = check.witness.unwrap();
        assert_eq!(w.location, "(i, j) = (0, 0)");
        assert_eq!(w.left, "1");
        assert_eq!(w.right, "2");
    }

    #[test]
    fn set_verdict_aggregates() {
        let mut set = CheckSet::new();
        set.push(Check::pass("a", "x", 3, 0));
        assert_eq!(set.verdict(), Verdict::Pass);
        set.push(Check::inconclusive("b", "y", 2));
        assert_eq!(set.verdict(), Verdict::Inconclusive);
        set.push(Check::fail(
            "c",
            "z",
            1,
            0,
            Witness { location: "p".into(), left: "0".into(), right: "1".into() },
        ));
        assert_eq!(set.verdict(), Verdict::Fail);
        assert_eq!(set.total_checked(), 4);
    }
}
