// Coupling from the past: an exact draw of the stationary workload vector.

use impatience::coupling::{cftp, CftpOptions};
use impatience::loynes::LoynesOptions;
use impatience::{Distribution, SequenceSpec, StationaryPath};

pub fn run() -> impatience::Result<()> {
    let servers = 2;
    let spec = SequenceSpec::iid(
        Distribution::Exponential { rate: 1.0 },
        Distribution::Exponential { rate: 0.7 },
        Distribution::Deterministic { value: 0.8 },
        12,
    );
    let path = StationaryPath::new(spec)?;
    let loynes = LoynesOptions::default();
    let small = CftpOptions::default();
    let large = CftpOptions {
        extra_points: 64,
        ..small
    };

    for at in [0, 1, 2, 1_000] {
        let a = cftp(&path, at, servers, &small, &loynes)?;
        let b = cftp(&path, at, servers, &large, &loynes)?;
        println!(
            "W at {at}: {:?} after horizon {} ({} initial states)",
            a.value.as_ref().map(|w| w.as_slice().to_vec()),
            a.horizon_used,
            a.initial_set_size
        );
        // a larger initial set cannot change a coalesced value
        assert_eq!(a.value, b.value);
    }

    let drain = StationaryPath::new(SequenceSpec::deterministic(10.0, 1.0, 1.0))?;
    let r = cftp(&drain, 0, servers, &small, &loynes)?;
    println!(
        "drain configuration: {:?} at horizon {}",
        r.value, r.horizon_used
    );
    Ok(())
}

#[allow(dead_code)]
fn main() {
    if let Err(e) = run() {
        eprintln!("{e}");
        std::process::exit(1);
    }
}
