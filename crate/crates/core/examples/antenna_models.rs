//! Cut crossings that can be active together under the omnidirectional,
//! single-beam and multi-beam models, plus the occupancy limit behind the
//! single-beam count.

use netcap::antenna::{
    check_schedule, expected_empty_bins, omni_cut_upper, schedule, simulate_empty_bins, AntennaModel,
};
use netcap::geometry::{generate_instance, XiMode};
use netcap::rng::{stream, Stream};

fn main() -> netcap::Result<()> {
    let models = [
        AntennaModel::parse("omni", 0.0)?,
        AntennaModel::parse("single-beam", 1e-9)?,
        AntennaModel::parse("multi-beam", 1e-9)?,
    ];
    for n in [1_000, 4_000, 16_000] {
        let inst = generate_instance(n, 5, XiMode::LogLog)?;
        let counts: Vec<usize> = models
            .iter()
            .map(|&m| {
                let s = schedule(&inst, m).expect("valid model");
                check_schedule(&inst, &s).expect("schedule certifies");
                s.len()
            })
            .collect();
        let nf = n as f64;
        let d = inst.d;
        println!(
            "n = {n:>6}: omni {:>3} (bound {:.1}), single {:>4} (/nd {:.3}), multi {:>5} (/n²d³ {:.3})",
            counts[0],
            omni_cut_upper(d)?,
            counts[1],
            counts[1] as f64 / (nf * d),
            counts[2],
            counts[2] as f64 / (nf * nf * d.powi(3))
        );
    }

    let m = 100_000;
    let empty = simulate_empty_bins(m, m, &mut stream(0, Stream::Aux(0)))?;
    println!(
        "{m} balls in {m} bins: {empty} empty, expected {:.1}, 1/e share {:.1}",
        expected_empty_bins(m as u64)?,
        m as f64 / std::f64::consts::E
    );
    Ok(())
}
