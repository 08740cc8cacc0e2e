//! One line per acceptance criterion; the target fails if any criterion does.

use std::time::{Duration, Instant};

use qss_core::acceptance::{self, CriterionResult, DEFAULT_SEED};
use qss_core::Result;

fn timed(
    budget: Duration,
    f: impl FnOnce() -> Result<CriterionResult>,
) -> (CriterionResult, Duration, Duration) {
    let start = Instant::now();
    let r = f().expect("criterion raised an error");
    (r, start.elapsed(), budget)
}

#[test]
fn acceptance_criteria() {
    let seed = DEFAULT_SEED;
    let secs = Duration::from_secs;
    let mut results = vec![
        timed(secs(1), acceptance::transversality),
        timed(secs(1), acceptance::table),
        timed(secs(10), || acceptance::round_trip(seed.wrapping_add(3))),
        timed(secs(30), || acceptance::threshold(seed.wrapping_add(4))),
        timed(secs(120), acceptance::t_gate),
    ];
    let start = Instant::now();
    let (six, eight) =
        acceptance::circuits(seed.wrapping_add(6)).expect("criterion raised an error");
    let shared = start.elapsed();
    results.push((six, shared, secs(120)));
    results.push(timed(secs(120), || {
        acceptance::honest_bit(seed.wrapping_add(7))
    }));
    results.push((eight, shared, secs(120)));
    results.push(timed(secs(60), || {
        acceptance::sampled_encoding(seed.wrapping_add(9))
    }));
    results.push(timed(secs(60), || {
        acceptance::backend_agreement(seed.wrapping_add(10))
    }));

    let mut failed = Vec::new();
    for (r, elapsed, budget) in &results {
        println!("{} [{:.2}s]", r.line(), elapsed.as_secs_f64());
        if !r.passed {
            failed.push(r.id);
        }
        if elapsed > budget {
            println!(
                "     criterion {:>2} exceeded its {}s runtime budget",
                r.id,
                budget.as_secs()
            );
            failed.push(r.id);
        }
    }
    assert!(failed.is_empty(), "failing criteria: {failed:?}");
}
