//! Natural operators recovered by probing, and their sigma-symbols.

use fedforge::geometry::{preset_with, Orders};
use fedforge::poly::parse_polynomial;
use fedforge::quantizer::Quantizer;
use fedforge::series::FiberTag;
use fedforge::symbols;

fn main() -> fedforge::error::Result<()> {
    let q = Quantizer::for_geometry(&preset_with("torsion2", Orders::for_degree(8))?)?;
    let xi = q.geometry().symbol_profile(FiberTag::Xi);
    let f = parse_polynomial("x1*x2", q.geometry().weyl_profile())?;

    let lf = symbols::op_l_of(&q, &f)?;
    println!("L_f         = {lf}");
    println!("sigma(L_f)  = {}", lf.sigma(xi)?);
    println!("sigma(R_f)  = {}", symbols::op_r_of(&q, &f)?.sigma(xi)?);

    let z1 = symbols::op_z(&q, 0)?;
    println!("Z_1         = {z1}");
    for (p, z) in symbols::zeta(&q)?.iter().enumerate() {
        println!("zeta{}       = {z}", p + 1);
    }
    for (k, l) in [(3, 1), (5, 2), (6, 0)] {
        println!("order bound (k, l) = ({k}, {l}): {:?}", q.verify_natural(k, l)?);
    }
    Ok(())
}
