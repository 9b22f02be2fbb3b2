// Renovation indices of the upper recursion, and coalescence of every
// trajectory started below the upper solution within `S - 1` steps.

use impatience::coupling::{detect_renovation, verify_coalescence};
use impatience::loynes::LoynesOptions;
use impatience::{Distribution, SequenceSpec, StationaryPath};

pub fn run() -> impatience::Result<()> {
    let servers = 3;
    let spec = SequenceSpec::iid(
        Distribution::Exponential { rate: 1.0 },
        Distribution::Exponential { rate: 0.5 },
        Distribution::Exponential { rate: 2.0 },
        5,
    );
    let path = StationaryPath::new(spec)?;
    let scan = detect_renovation(&path, servers, 0, 999, &LoynesOptions::default())?;
    println!(
        "{} renovation indices in [0, 999], frequency {:.4} ± {:.4}",
        scan.events.len(),
        scan.frequency.mean,
        scan.frequency.half_width
    );
    if let Some(e) = scan.events.first() {
        println!("first at n={} with upper {:?}", e.index, e.upper.as_slice());
    }
    let summary = verify_coalescence(&path, &scan, 10, 8)?;
    println!(
        "{} coalescence checks, {} failures",
        summary.checks, summary.failures
    );
    assert_eq!(summary.failures, 0);
    Ok(())
}

#[allow(dead_code)]
fn main() {
    if let Err(e) = run() {
        eprintln!("{e}");
        std::process::exit(1);
    }
}
