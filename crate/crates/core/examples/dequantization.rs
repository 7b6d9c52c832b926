//! Source and target maps of a star product, with their identities.

use fedforge::dequant::{sample_functions, Dequantizer};
use fedforge::geometry::preset;
use fedforge::quantizer::Quantizer;
use fedforge::series::FiberTag;

fn main() -> fedforge::error::Result<()> {
    let q = Quantizer::for_geometry(&preset("curved2")?)?;
    let d = Dequantizer::new(&q)?;
    for (k, (s, t)) in d.source().iter().zip(d.target()).enumerate() {
        println!("s{} = {s}", k + 1);
        println!("t{} = {t}", k + 1);
    }
    for (p, z) in d.zeta_of_xi().iter().enumerate() {
        println!("zeta{}(xi) = {z}", p + 1);
    }
    let samples = sample_functions(q.geometry().symbol_profile(FiberTag::Xi), 6, 11);
    let result = d.run(&samples, 1)?;
    for v in &result.verdicts {
        println!("{} {}", if v.passed { "PASS" } else { "FAIL" }, v.name);
    }
    println!("t - s = {:?} * omega xi", result.t_minus_s_constant.map(|c| c.to_string()));

    let swapped = d.with_swapped_source()?.check_symplectic()?;
    println!("swapped source map, symplectic: {}", if swapped.passed { "PASS" } else { "FAIL" });
    Ok(())
}
