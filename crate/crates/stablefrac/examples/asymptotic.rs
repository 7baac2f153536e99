//! Bourgain–Brezis–Mironescu (α ↑ 2) and Maz'ya–Shaposhnikova (α ↓ 1)
//! limits of the fractional energy.
use stablefrac::verifier::{asymptotic_study, AsymptoticKind};
use stablefrac::{Grid, GridField, StableModel};

fn main() -> stablefrac::Result<()> {
    let grid = Grid::new(2, 8.0, 128)?;
    let f = GridField::from_fn(grid, |x| (-(x[0] * x[0] + x[1] * x[1]) / 2.0).exp());
    for (kind, m) in [
        (AsymptoticKind::Bbm, StableModel::rotational(1.6, 2)?),
        (AsymptoticKind::Ms, StableModel::rotational(1.4, 2)?),
    ] {
        let s = asymptotic_study(kind, &m, &grid, &f, &kind.default_alphas(), 2.0)?;
        println!("{kind:?}");
        for (a, e) in s.alphas.iter().zip(&s.errors) {
            println!("  α = {a:<6} error = {e:.4e}");
        }
        println!("  final/initial = {:.3e}, verdict {:?}", s.ratio, s.verdict);
    }
    Ok(())
}
