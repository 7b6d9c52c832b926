//! The Fedosov form r and its classical limit, with flatness checks.

use fedforge::fedosov::{f4_coefficients, FedosovData};
use fedforge::geometry::{preset_with, Orders};

fn main() -> fedforge::error::Result<()> {
    let data = FedosovData::compute(&preset_with("torsion2", Orders::for_degree(6))?)?;
    for k in 0..=data.max_deg() as usize {
        let part = data.r_component(k);
        if !part.is_zero() {
            println!("r^({k}) = {part}");
        }
    }
    println!("D^2 defect: {:?}", data.check_flatness()?);
    println!("classical D^2 defect: {:?}", data.check_classical_flatness()?);

    // With a symplectic curvature nu dx1^dx2, r = c(nu) (y1 dx2 - y2 dx1).
    let omega = FedosovData::compute(&preset_with("moyal2-omega", Orders::for_degree(8))?)?;
    println!("r = {}", omega.r());
    let c: Vec<String> = f4_coefficients(4).iter().map(ToString::to_string).collect();
    println!("c(nu) coefficients: {}", c.join(", "));
    Ok(())
}
