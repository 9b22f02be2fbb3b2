// Special cases with closed forms: zero patience gives the Erlang loss
// system, infinite patience the M/M/1 queue.

use impatience::metrics::{erlang_b, loss_probability, mm1_wait_tail, Estimate};
use impatience::oracle_des::run as simulate;
use impatience::{Distribution, SequenceSpec, StationaryPath};

pub fn run() -> impatience::Result<()> {
    for (servers, load) in [(2usize, 1.0), (3, 1.2)] {
        let spec = SequenceSpec::iid(
            Distribution::Exponential { rate: load },
            Distribution::Exponential { rate: 1.0 },
            Distribution::Deterministic { value: 0.0 },
            servers as u64,
        );
        let trace = simulate(&StationaryPath::new(spec)?, servers, 0, 100_000)?;
        let est = loss_probability(&trace)?;
        println!(
            "M/M/{servers}/{servers}, load {load}: simulated {:.4} ± {:.4}, Erlang B {:.4}",
            est.mean,
            est.half_width,
            erlang_b(servers, load)?
        );
    }

    let spec = SequenceSpec::iid(
        Distribution::Exponential { rate: 0.5 },
        Distribution::Exponential { rate: 1.0 },
        Distribution::Deterministic {
            value: f64::INFINITY,
        },
        1,
    );
    let trace = simulate(&StationaryPath::new(spec)?, 1, 0, 100_000)?;
    let idle = Estimate::from_indicators(trace.iter().map(|r| r.workload_seen[0] == 0.0));
    let wait_gt_1 = Estimate::from_indicators(trace.iter().map(|r| r.workload_seen[0] > 1.0));
    println!(
        "M/M/1, rho 0.5: P(W=0) {:.4} ± {:.4} (exact 0.5), P(W>1) {:.4} ± {:.4} (exact {:.4})",
        idle.mean,
        idle.half_width,
        wait_gt_1.mean,
        wait_gt_1.half_width,
        mm1_wait_tail(0.5, 1.0, 1.0)?
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
