// Bi-infinite, reproducible driver sequences: i.i.d., lattice and
// Markov-modulated models, pointwise access and the shift.

use impatience::sequences::{Components, DriverModel, LatticePath};
use impatience::{Distribution, DriverSource, SequenceSpec, StationaryPath};

pub fn run() -> impatience::Result<()> {
    let mm1 = SequenceSpec::iid(
        Distribution::Exponential { rate: 1.0 },
        Distribution::Exponential { rate: 2.0 },
        Distribution::Deterministic { value: 1.0 },
        2024,
    );
    let path = StationaryPath::new(mm1)?;

    // any index, in any order, always the same value
    let far_past = path.sample_at(-1_000_000_000);
    assert_eq!(far_past, path.sample_at(-1_000_000_000));
    let window = path.drivers(-3, 6);
    println!("drivers at -3..3:");
    for (k, d) in window.iter().enumerate() {
        println!(
            "  n={:>2} tau={:.4} sigma={:.4} D={}",
            k as i64 - 3,
            d.tau,
            d.sigma,
            d.patience
        );
    }
    // the shift: (theta^k x)(n) = x(n + k)
    assert_eq!(path.shifted(5).sample_at(-3), path.sample_at(2));

    let lattice = SequenceSpec::lattice(
        0.25,
        Distribution::Discrete {
            values: vec![0.5, 1.0],
            probs: vec![0.5, 0.5],
        },
        Distribution::Discrete {
            values: vec![0.25, 1.5],
            probs: vec![0.7, 0.3],
        },
        Distribution::Exponential { rate: 1.0 },
        7,
    );
    let lattice: LatticePath = StationaryPath::new(lattice)?.lattice()?;
    let steps: Vec<_> = lattice
        .drivers(0, 4)
        .iter()
        .map(|d| (d.tau, d.sigma, d.patience))
        .collect();
    println!("lattice steps (alpha = 0.25): {steps:?}");

    let modulated = SequenceSpec::new(
        DriverModel::MarkovModulated {
            transition: vec![vec![0.95, 0.05], vec![0.10, 0.90]],
            states: vec![
                Components {
                    tau: Distribution::Exponential { rate: 2.0 },
                    sigma: Distribution::Exponential { rate: 1.0 },
                    patience: Distribution::Deterministic { value: 0.5 },
                },
                Components {
                    tau: Distribution::Exponential { rate: 0.5 },
                    sigma: Distribution::Uniform {
                        low: 0.0,
                        high: 1.0,
                    },
                    patience: Distribution::Deterministic { value: 2.0 },
                },
            ],
            burn_in: 10_000,
        },
        11,
    );
    let modulated = StationaryPath::new(modulated)?;
    let states: String = (0..40)
        .map(|n| char::from(b'0' + modulated.modulation_state(n).unwrap_or(0) as u8))
        .collect();
    println!("modulating states 0..40: {states}");
    Ok(())
}

#[allow(dead_code)]
fn main() {
    if let Err(e) = run() {
        eprintln!("{e}");
        std::process::exit(1);
    }
}
