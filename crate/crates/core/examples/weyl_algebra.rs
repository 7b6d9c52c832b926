//! The fiberwise product and the operators delta, its inverse and nabla.

use fedforge::geometry::preset_with;
use fedforge::geometry::Orders;
use fedforge::series::GradedSeries;
use fedforge::weyl::{self, WeylElement};

fn main() -> fedforge::error::Result<()> {
    let geo = preset_with("torsion2", Orders::for_degree(4))?;
    let p = geo.weyl_profile();
    let y1 = WeylElement::new(GradedSeries::fiber_var(p, 0));
    let y2 = WeylElement::new(GradedSeries::fiber_var(p, 1));
    println!("y1 o y2          = {}", weyl::fiber_product(&geo, &y1, &y2)?);
    println!("(1/i nu)[y1, y2] = {}", weyl::scaled_commutator(&geo, &y1, &y2)?);
    println!("{{y1, y2}}        = {}", weyl::fiber_poisson(&geo, &y1, &y2)?);
    println!("<y1, y2>         = {}", weyl::pairing(&geo, &y1, &y2)?);

    let t = geo.element_t()?;
    println!("T                = {t}");
    println!("delta T          = {}", weyl::delta(&t));
    println!("delta^-1 T       = {}", weyl::delta_inv(&t));
    println!("nabla y1         = {}", weyl::nabla_ext(&geo, &y1)?);
    Ok(())
}
