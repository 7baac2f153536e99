//! Build product and rotational models and print their derived constants.
use stablefrac::StableModel;

fn main() -> stablefrac::Result<()> {
    for (name, m) in [
        ("product w=(½,½), α=1.5", StableModel::product(1.5, &[0.5, 0.5])?),
        ("rotational d=2, α=1.5", StableModel::rotational(1.5, 2)?),
    ] {
        let gc = m.geometry_constants();
        println!("{name}");
        println!("  σ_α(1,1)         = {:.6}", m.sigma_alpha(&[1.0, 1.0]));
        println!("  non-degeneracy   = {:.6}", m.nondeg_margin());
        println!("  |K_α|, |K̊_α|     = {:.6}, {:.6}", gc.vol_k_alpha, gc.vol_k_alpha_polar);
        println!("  Σ                = {:?}", m.sigma_matrix().entries);
    }
    // the same model from a JSON description
    let m = StableModel::from_json(r#"{"alpha": 1.3, "dim": 2, "sigma": {"kind": "rotinv"}}"#)?;
    println!("from JSON: α = {}, d = {}", m.alpha(), m.dim());
    Ok(())
}
