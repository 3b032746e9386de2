//! Prints M, chi_tilde and U over a small temperature grid.
//!
//!     cargo run --release -p potts-csg --example binder_scan

use potts_csg::runner::{run_sweep, Ensemble, SweepPlan};
use potts_csg::ModelParams;

fn main() -> potts_csg::Result<()> {
    let temps: Vec<f64> = (0..7).map(|i| 0.7 + 0.1 * i as f64).collect();
    let mut plan = SweepPlan::new(ModelParams::default(), temps, vec![32, 64, 128, 256]);
    plan.ensemble = Ensemble::DESK;
    plan.master_seed = 2024;
    plan.keep_samples = false;
    let res = run_sweep(&plan)?;
    println!("{:>6} {:>5} {:>8} {:>10} {:>8}", "T", "N", "M", "chi_tilde", "U");
    for p in &res.points {
        for s in &p.stats {
            let u = s.binder.map_or(f64::NAN, |b| b.value);
            println!(
                "{:>6.2} {:>5} {:>8.4} {:>10.3} {:>8.4}",
                p.params.temperature, s.length, s.m.value, s.chi_tilde.value, u
            );
        }
    }
    eprintln!("elapsed {:.1}s", res.elapsed.as_secs_f64());
    Ok(())
}
