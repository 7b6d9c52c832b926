//! Built-in two-dimensional charts.

use super::{ChartGeometry, JetMatrix, Orders};
use crate::error::{Error, Result};
use crate::series::{FiberTag, GradedSeries, TermSpec, VariableProfile};

const NAMES: [&str; 6] = ["moyal2", "wick2", "torsion2", "moyal2-omega", "symmetric2", "curved2"];

pub fn preset_names() -> &'static [&'static str] {
    &NAMES
}

/// A named preset at the default orders.
pub fn preset(name: &str) -> Result<ChartGeometry> {
    preset_with(name, Orders::default())
}

/// A named preset at the given orders.
///
/// * `moyal2`: `Λ = [[0,1],[−1,0]]`, `Γ = 0`, `Ω = 0`.
/// * `wick2`: `Λ = [[0,2],[0,0]]`, `Γ = 0`, `Ω = 0`.
/// * `torsion2`: `moyal2` with `Γ¹₁₂ = 1`.
/// * `moyal2-omega`: `moyal2` with `Ω = ν dx¹∧dx²`.
/// * `symmetric2`: `moyal2` with `Γ¹₂₂ = 1`.
/// * `curved2`: `moyal2` with `Γ¹₁₂ = −x²`, nonzero constant curvature.
pub fn preset_with(name: &str, orders: Orders) -> Result<ChartGeometry> {
    let p = VariableProfile::new(2, orders.x, orders.deg + 2, orders.nu, FiberTag::Y)?;
    let c = |v: i64| GradedSeries::constant(p, v.into());
    let zero = || GradedSeries::zero(p);
    let symplectic: JetMatrix = vec![vec![zero(), c(1)], vec![c(-1), zero()]];
    let no_gamma = || vec![vec![vec![zero(); 2]; 2]; 2];
    let (lambda, gamma, omega2) = match name {
        "moyal2" => (symplectic, no_gamma(), zero()),
        "wick2" => (vec![vec![zero(), c(2)], vec![zero(), zero()]], no_gamma(), zero()),
        "torsion2" => {
            let mut g = no_gamma();
            g[0][0][1] = c(1);
            (symplectic, g, zero())
        }
        "moyal2-omega" => {
            let omega = GradedSeries::polynomial(p, vec![TermSpec::new(1).nu(1).dx(&[0, 1])])?;
            (symplectic, no_gamma(), omega)
        }
        "symmetric2" => {
            let mut g = no_gamma();
            g[0][1][1] = c(1);
            (symplectic, g, zero())
        }
        "curved2" => {
            // Γ^j_{lm} = A^{jk}_l ω_{km} with A^{11}_1 = x².
            let mut g = no_gamma();
            g[0][0][1] = GradedSeries::polynomial(p, vec![TermSpec::new(-1).x(&[0, 1])])?;
            (symplectic, g, zero())
        }
        other => {
            return Err(Error::Parse {
                context: "chart".into(),
                message: format!("unknown preset '{other}' (known: {})", NAMES.join(", ")),
            })
        }
    };
    ChartGeometry::new(name, lambda, gamma, omega2, orders)
}
