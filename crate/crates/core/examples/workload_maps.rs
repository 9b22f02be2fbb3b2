// The exact workload map and its two monotone bounds on a hand-sized vector.

use impatience::kernel::{phi, phi_direct, phi_lower, phi_upper, WorkloadVector};
use impatience::DriverSample;

pub fn run() -> impatience::Result<()> {
    let w = WorkloadVector::new(vec![0.0, 2.0, 5.0])?;

    for (tau, sigma, patience) in [(1.0, 4.0, 1.0), (1.0, 4.0, 0.0), (10.0, 1.0, 1.0)] {
        let d = DriverSample::new(tau, sigma, patience)?;
        let step = phi(&w, &d);
        assert_eq!(step.next, phi_direct(&w, &d));
        println!(
            "tau={tau} sigma={sigma} D={patience}: served={} next={:?} lower={:?} upper={:?}",
            step.accepted,
            step.next.as_slice(),
            phi_lower(&w, &d).as_slice(),
            phi_upper(&w, &d).as_slice(),
        );
        assert!(phi_lower(&w, &d).precedes(&step.next));
        assert!(step.next.precedes(&phi_upper(&w, &d)));
    }

    // the same map on integer lattice units
    let u = WorkloadVector::<u64>::new(vec![0, 4, 10])?;
    let d = DriverSample {
        tau: 2u64,
        sigma: 8,
        patience: 2,
    };
    println!(
        "lattice: {:?} -> {:?}",
        u.as_slice(),
        phi(&u, &d).next.as_slice()
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
