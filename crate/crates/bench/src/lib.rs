//! Timing helpers and the check record used by the acceptance target.

use std::fmt;
use std::time::{Duration, Instant};

/// Runs `f` once and returns its result with the wall-clock time it took.
pub fn timed<T>(f: impl FnOnce() -> T) -> (T, Duration) {
    let start = Instant::now();
    let out = f();
    (out, start.elapsed())
}

/// Outcome of one acceptance criterion.
#[derive(Debug, Clone)]
pub struct Check {
    pub id: u32,
    pub name: &'static str,
    /// Whether the numerical conditions hold, ignoring the time budget.
    pub values_ok: bool,
    pub detail: String,
    pub elapsed: Duration,
    pub budget: Option<Duration>,
}

impl Check {
    pub fn new(id: u32, name: &'static str, values_ok: bool, detail: impl Into<String>, elapsed: Duration) -> Self {
        Self { id, name, values_ok, detail: detail.into(), elapsed, budget: None }
    }

    pub fn with_budget(mut self, budget: Duration) -> Self {
        self.budget = Some(budget);
        self
    }

    pub fn within_budget(&self) -> bool {
        self.budget.is_none_or(|b| self.elapsed < b)
    }

    pub fn passed(&self) -> bool {
        self.values_ok && self.within_budget()
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let verdict = if self.passed() { "PASS" } else { "FAIL" };
        let time = match self.budget {
            Some(b) => format!("{:.3} s of {:.0} s", self.elapsed.as_secs_f64(), b.as_secs_f64()),
            None => format!("{:.3} s", self.elapsed.as_secs_f64()),
        };
        write!(f, "{verdict} [{}] {}: {} ({time})", self.id, self.name, self.detail)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn budget_overrun_fails() {
        let c = Check::new(1, "x", true, "", Duration::from_secs(2)).with_budget(Duration::from_secs(1));
        assert!(!c.passed());
        assert!(c.to_string().starts_with("FAIL [1] x"));
        let ok = Check::new(2, "y", true, "", Duration::from_millis(5));
        assert!(ok.passed());
    }
}
