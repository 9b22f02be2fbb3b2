// Backward (Loynes) schemes for the bounding recursions and the sandwich
// of loss-probability bounds for an M/M/2+D queue.

use impatience::coupling::CftpOptions;
use impatience::kernel::Bound;
use impatience::loynes::{loynes_estimate, z_vector_stabilized, LoynesOptions};
use impatience::metrics::bound_report;
use impatience::{Distribution, SequenceSpec, StationaryPath};

pub fn run() -> impatience::Result<()> {
    let servers = 2;
    let spec = SequenceSpec::iid(
        Distribution::Exponential { rate: 1.0 },
        Distribution::Exponential { rate: 0.6 },
        Distribution::Deterministic { value: 1.0 },
        99,
    );
    let path = StationaryPath::new(spec)?;
    let opts = LoynesOptions::default();

    let upper = loynes_estimate(&path, 0, Bound::Upper, servers, &opts)?;
    let lower = loynes_estimate(&path, 0, Bound::Lower, servers, &opts)?;
    let z = z_vector_stabilized(&path, 0, Bound::Upper, servers, &opts)?;
    println!(
        "index 0: lower {:?}, upper {:?} (depth {}), Z {:?}",
        lower.vector.as_slice(),
        upper.vector.as_slice(),
        upper.depth,
        z.values.as_slice()
    );

    let (report, _) = bound_report(&path, servers, 0, 2_000, &opts, &CftpOptions::default())?;
    for (name, e) in [
        ("P(lower(1) > D)", report.p_lower),
        ("P_loss", report.p_loss),
        ("P(upper(1) > D)", report.p_upper),
        ("P(Z_S > D)", report.p_z),
    ] {
        println!("{name:>16} = {:.4} ± {:.4}", e.mean, e.half_width);
    }
    println!("ordered within half-widths: {}", report.ordered);
    assert_eq!(report.pathwise_violations, 0);
    Ok(())
}

#[allow(dead_code)]
fn main() {
    if let Err(e) = run() {
        eprintln!("{e}");
        std::process::exit(1);
    }
}
