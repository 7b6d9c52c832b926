//! Quantization map and star products of polynomials.

use fedforge::geometry::{preset_with, Orders};
use fedforge::poly::parse_polynomial;
use fedforge::quantizer::Quantizer;

fn main() -> fedforge::error::Result<()> {
    for chart in ["moyal2", "wick2", "torsion2"] {
        let q = Quantizer::for_geometry(&preset_with(chart, Orders::for_degree(6))?)?;
        let p = q.geometry().weyl_profile();
        let f = parse_polynomial("x1^2", p)?;
        let g = parse_polynomial("x2^2 + x1*x2", p)?;
        println!("[{chart}]");
        println!("  tau(x1^2) = {}", q.tau(&f)?);
        println!("  f * g     = {}", q.star(&f, &g)?);
        println!("  C_1(f, g) = {}", q.extract_c(1, &f, &g)?);
        let k = q.kappa()?;
        for (i, c) in k.components.iter().enumerate() {
            println!("  kappa{}    = {c}", i + 1);
        }
    }
    Ok(())
}
