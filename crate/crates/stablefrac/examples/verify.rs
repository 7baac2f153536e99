//! Run the core inequality suite for a rotational model.
use stablefrac::verifier::{run_suite, suite, CheckInputs};
use stablefrac::{Grid, StableModel};

fn main() -> stablefrac::Result<()> {
    let model = StableModel::rotational(1.5, 2)?;
    let grid = Grid::new(2, 8.0, 128)?;
    let (reports, skipped) = run_suite(&suite("core")?, &model, &grid, &CheckInputs::default())?;
    for r in &reports {
        println!("{:>2} {:<24} {:?} margin {:+.3e} ({})", r.entry, r.name, r.verdict, r.margin, r.worst_case);
    }
    for (name, why) in skipped {
        println!("   {name:<24} skipped: {why}");
    }
    Ok(())
}
