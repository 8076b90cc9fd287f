//! Runner for the acceptance criteria: each criterion runs isolated from
//! panics, is timed against its budget and reports one line.

use std::panic::{self, AssertUnwindSafe};
use std::time::{Duration, Instant};

#[derive(Clone, Debug, PartialEq)]
pub struct Outcome {
    pub id: u32,
    pub name: &'static str,
    pub passed: bool,
    pub elapsed: Duration,
    pub detail: String,
}

impl Outcome {
    pub fn line(&self) -> String {
        format!(
            "criterion {:>2} {} {} ({:.2} s) {}",
            self.id,
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.elapsed.as_secs_f64(),
            self.detail
        )
    }
}

fn panic_message(e: &(dyn std::any::Any + Send)) -> String {
    if let Some(s) = e.downcast_ref::<&str>() {
        (*s).to_owned()
    } else if let Some(s) = e.downcast_ref::<String>() {
        s.clone()
    } else {
        "panicked".to_owned()
    }
}

/// Runs `check`, which panics on a violated property and otherwise returns
/// a short summary. A run over `budget` fails as well.
pub fn run_criterion(id: u32, name: &'static str, budget: Option<Duration>, check: impl FnOnce() -> String) -> Outcome {
    let start = Instant::now();
    let result = panic::catch_unwind(AssertUnwindSafe(check));
    let elapsed = start.elapsed();
    let (passed, detail) = match result {
        Ok(summary) => match budget {
            Some(b) if elapsed > b => (false, format!("{summary}; over the {} s budget", b.as_secs())),
            _ => (true, summary),
        },
        Err(e) => (false, panic_message(e.as_ref())),
    };
    Outcome {
        id,
        name,
        passed,
        elapsed,
        detail,
    }
}
