//! Evolve a Gaussian bump under the stable semigroup; mass is conserved
//! while the sup norm decays.
use stablefrac::{Grid, GridField, SpectralEngine, StableModel};

fn main() -> stablefrac::Result<()> {
    let model = StableModel::rotational(1.5, 2)?;
    let grid = Grid::new(2, 8.0, 128)?;
    let engine = SpectralEngine::new(&model, grid)?;
    let f = GridField::from_fn(grid, |x| (-(x[0] * x[0] + x[1] * x[1]) / 0.5).exp());
    println!("{:>6} {:>12} {:>12}", "t", "mass", "sup");
    for t in [0.0, 0.1, 0.5, 1.0, 2.0] {
        let u = engine.semigroup(&f, t)?;
        println!("{t:>6} {:>12.8} {:>12.6}", u.integral(), u.max_abs());
    }
    let grad = engine.frac_gradient(&f)?;
    println!("‖D^(α−1) f‖₂ = {:.6}", grad.components.iter().map(|c| c.inner(c)).sum::<f64>().sqrt());
    Ok(())
}
