//! Truncated graded series: arithmetic, substitution and reversion.

use fedforge::series::{reverse_fiber_system, FiberTag, GradedSeries, Substitution, TermSpec, VariableProfile};

fn main() -> fedforge::error::Result<()> {
    let p = VariableProfile::new(2, 6, 4, 3, FiberTag::Y)?;
    let x1 = GradedSeries::x_var(p, 0);
    let y2 = GradedSeries::fiber_var(p, 1);
    let a = &(&x1 * &y2) + &GradedSeries::nu(p);
    println!("a        = {a}");
    println!("a^2      = {}", a.pow(2)?);

    let w = GradedSeries::make(p, vec![TermSpec::new(1).fiber(&[1, 0]).dx(&[1]), TermSpec::new(-1).fiber(&[0, 1]).dx(&[0])])?;
    println!("w        = {w}");
    println!("w ^ w    = {}", w.mul(&w)?);

    // Taylor shift x1 -> x1 + y1.
    let shift = Substitution::new(p).x(0, &x1 + &GradedSeries::fiber_var(p, 0));
    println!("(x1 + y1)^3 = {}", x1.pow(3)?.substitute(&shift)?);

    // Reversion of xi = zeta + zeta1^2 (zeta2, zeta1).
    let zp = p.with_tag(FiberTag::Zeta);
    let z1 = GradedSeries::fiber_var(zp, 0);
    let z2 = GradedSeries::fiber_var(zp, 1);
    let system = vec![&z1 + &z2.pow(2)?, &z2 + &(&z1 * &z2)];
    for (k, z) in reverse_fiber_system(&system, FiberTag::Xi)?.iter().enumerate() {
        println!("zeta{}(xi) = {z}", k + 1);
    }
    Ok(())
}
