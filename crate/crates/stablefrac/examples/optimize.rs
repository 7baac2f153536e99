//! Estimate the fractional Sobolev constant by constrained descent.
use stablefrac::optimizer::{minimize_sobolev, OptimizerOptions};
use stablefrac::{Grid, StableModel};

fn main() -> stablefrac::Result<()> {
    let model = StableModel::rotational(1.5, 2)?;
    let grid = Grid::new(2, 8.0, 128)?;
    let est = minimize_sobolev(&model, &grid, 2.0, &OptimizerOptions::default())?;
    println!("S estimate        = {:.6}", est.s_estimate);
    println!("critical exponent = {}", est.p_star);
    println!("iterations        = {} ({:?})", est.flow.iterations, est.flow.stop);
    println!("EL residual       = {:.2e}", est.euler_lagrange_residual);
    for (w, q) in &est.starts {
        println!("  start width {w:.4}·L -> {q:.6}");
    }
    Ok(())
}
