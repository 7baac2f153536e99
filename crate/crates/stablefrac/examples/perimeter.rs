//! Perimeter and heat-content slope of the square [−1,1]² under the
//! product model; compare with the exact perimeter 8.
use stablefrac::geometry::{geometry_study, study_times, HeatFlow, Shape};
use stablefrac::{Grid, StableModel};

fn main() -> stablefrac::Result<()> {
    let model = StableModel::product(1.5, &[0.5, 0.5])?;
    let grid = Grid::new(2, 8.0, 512)?;
    let flow = HeatFlow::stable(&model, grid)?;
    let square = Shape::rect(&[1.0, 1.0]);
    let study = geometry_study(&flow, &square, &study_times(1.5, &grid))?;
    study.write_csv(std::io::stdout().lock())?;
    println!("{}", serde_json::to_string_pretty(&study.summary()).unwrap());
    Ok(())
}
