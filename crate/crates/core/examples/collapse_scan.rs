//! Collapse residual of chi_tilde against nu at fixed T_c and gamma.
//!
//!     cargo run --release -p potts-csg --example collapse_scan -- [seed] [sizes]

use potts_csg::fss::{collapse_residual, CollapsePoint, ReducedTemperature};
use potts_csg::runner::{run_sweep, Ensemble, SweepPlan};
use potts_csg::ModelParams;

fn main() -> potts_csg::Result<()> {
    let seed = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(2024);
    let temps: Vec<f64> = (0..7).map(|i| ((0.7 + 0.1 * i as f64) * 1e12).round() / 1e12).collect();
    let sizes: Vec<usize> = std::env::args()
        .nth(2)
        .map(|s| s.split(',').filter_map(|v| v.parse().ok()).collect())
        .unwrap_or_else(|| vec![32, 64, 128, 256]);
    let mut plan = SweepPlan::new(ModelParams::default(), temps, sizes);
    plan.ensemble = Ensemble::DESK;
    plan.master_seed = seed;
    plan.keep_samples = false;
    let res = run_sweep(&plan)?;
    let data: Vec<CollapsePoint> = res
        .points
        .iter()
        .flat_map(|p| {
            p.stats.iter().map(|s| CollapsePoint {
                temperature: p.params.temperature,
                size: s.length as f64,
                value: s.chi_tilde.value,
                stderr: s.chi_tilde.stderr,
            })
        })
        .collect();
    println!("{:>6} {:>10} {:>10}", "nu", "two-sided", "signed");
    for i in 0..=20 {
        let nu = 1.5 + 0.1 * i as f64;
        let a = collapse_residual(&data, 0.96, nu, 2.05, ReducedTemperature::TwoSided);
        let b = collapse_residual(&data, 0.96, nu, 2.05, ReducedTemperature::Signed);
        println!("{nu:>6.2} {a:>10.4} {b:>10.4}");
    }
    for nu in [2.29, 2.50] {
        let a = collapse_residual(&data, 0.96, nu, 2.05, ReducedTemperature::TwoSided);
        let b = collapse_residual(&data, 0.96, nu, 2.05, ReducedTemperature::Signed);
        println!("{nu:>6.2} {a:>10.4} {b:>10.4}");
    }
    Ok(())
}
