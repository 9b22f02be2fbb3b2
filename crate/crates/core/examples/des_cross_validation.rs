// Event-driven simulation of the physical queue against the workload
// recursion, in floating point and in exact lattice arithmetic.

use impatience::oracle_des::{cross_validate, write_trace_csv};
use impatience::{Distribution, SequenceSpec, StationaryPath};

pub fn run() -> impatience::Result<()> {
    let spec = SequenceSpec::iid(
        Distribution::Exponential { rate: 1.0 },
        Distribution::Exponential { rate: 0.45 },
        Distribution::Exponential { rate: 1.0 },
        77,
    );
    let path = StationaryPath::new(spec)?;
    let (report, trace) = cross_validate(&path, 2, 0, 20_000, 1e-9)?;
    println!(
        "M/M/2+M: {} arrivals, max discrepancy {:e}, {} losses",
        report.n_arrivals, report.max_discrepancy, report.losses
    );
    let report = report.into_result()?;
    assert_eq!(report.decision_mismatches, 0);

    let mut head = Vec::new();
    write_trace_csv(&trace[..5], &mut head).expect("in-memory write");
    print!("{}", String::from_utf8_lossy(&head));

    let lattice = SequenceSpec::lattice(
        0.125,
        Distribution::Discrete {
            values: vec![0.125, 0.5, 1.0],
            probs: vec![0.2, 0.5, 0.3],
        },
        Distribution::Discrete {
            values: vec![0.25, 1.0, 2.5],
            probs: vec![0.4, 0.4, 0.2],
        },
        Distribution::Uniform {
            low: 0.0,
            high: 2.0,
        },
        78,
    );
    let lattice = StationaryPath::new(lattice)?.lattice()?;
    let (exact, _) = cross_validate(&lattice, 3, 0, 20_000, 0.0)?;
    println!("lattice M/G/3+G: max discrepancy {}", exact.max_discrepancy);
    exact.into_result()?;
    Ok(())
}

#[allow(dead_code)]
fn main() {
    if let Err(e) = run() {
        eprintln!("{e}");
        std::process::exit(1);
    }
}
