//! One-dimensional stable density values and moments.
use stablefrac::densities::{abs_moment_1d, density_1d, moment_1d_quadrature, moments};
use stablefrac::quad::gamma;
use stablefrac::StableModel;

fn main() -> stablefrac::Result<()> {
    let al = 1.5;
    for x in [0.0, 0.5, 1.0, 2.0, 5.0] {
        println!("p_{al}({x}) = {:.8}", density_1d(al, x));
    }
    println!("p(0) closed form = {:.8}", gamma(5.0 / 3.0) / std::f64::consts::PI);
    println!("E|Y|: closed form {:.7}, quadrature {:.7}", abs_moment_1d(al, 1.0), moment_1d_quadrature(al, 1.0));
    let m = moments(&StableModel::rotational(al, 2)?, &[1.0, 2.0])?;
    println!("{}", serde_json::to_string_pretty(&m).unwrap());
    Ok(())
}
