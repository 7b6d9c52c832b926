//! Presets, chart files and the geometric validation report.

use fedforge::geometry::{parse_chart_json, preset, preset_names};

fn main() -> fedforge::error::Result<()> {
    for name in preset_names() {
        let geo = preset(name)?;
        let report = geo.validate();
        println!("{name}: {}", if report.passed() { "valid" } else { "invalid" });
        println!("  T = {}", geo.element_t()?);
        println!("  R = {}", geo.element_r()?);
    }

    let text = include_str!("../charts/torsion-shear.json");
    let spec = parse_chart_json(text, "torsion-shear")?;
    let geo = spec.build(spec.file_orders().resolve())?;
    println!("torsion-shear orders {:?}", geo.orders());
    print!("{}", geo.validate());

    // A Christoffel symbol that does not preserve the Poisson tensor.
    let bad = text.replace(r#"[[[], [{"coeff": 1}]], [[], []]]"#, r#"[[[{"coeff": 1}], [{"coeff": 1}]], [[], []]]"#);
    let geo = parse_chart_json(&bad, "bad")?.build(spec.file_orders().resolve())?;
    if let Some(c) = geo.validate().first_failure() {
        println!("bad chart: {} {}", c.name, c.detail.clone().unwrap_or_default());
    }
    Ok(())
}
