// Exact enumeration of the sets `H^n` on a lattice, their nesting and
// collapse to a single point.

use impatience::coupling::{h_set_profile, DEFAULT_HSET_CAP};
use impatience::loynes::LoynesOptions;
use impatience::{Distribution, SequenceSpec, StationaryPath};

pub fn run() -> impatience::Result<()> {
    let servers = 2;
    let spec = SequenceSpec::lattice(
        0.5,
        Distribution::Discrete {
            values: vec![0.5, 1.0, 2.0],
            probs: vec![0.3, 0.4, 0.3],
        },
        Distribution::Discrete {
            values: vec![0.5, 1.5, 3.0],
            probs: vec![0.5, 0.3, 0.2],
        },
        Distribution::Deterministic { value: 1.0 },
        3,
    );
    let lattice = StationaryPath::new(spec)?.lattice()?;
    let depth = 10 * servers;
    let mut singletons = 0;
    for at in 0..10 {
        let p = h_set_profile(
            &lattice,
            at,
            servers,
            depth,
            DEFAULT_HSET_CAP,
            &LoynesOptions::default(),
        )?;
        assert!(p.nested());
        if p.singleton_at(depth) {
            singletons += 1;
        }
        println!("at {at}: |H^n| for n=1..{depth} = {:?}", p.sizes);
    }
    println!("single point at depth {depth}: {singletons}/10");
    Ok(())
}

#[allow(dead_code)]
fn main() {
    if let Err(e) = run() {
        eprintln!("{e}");
        std::process::exit(1);
    }
}
