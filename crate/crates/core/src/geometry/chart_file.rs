//! JSON chart files.
//!
//! ```json
//! {"n": 2,
//!  "lambda": [[[], [{"coeff": "1", "exp": [0, 0]}]],
//!             [[{"coeff": "-1"}], []]],
//!  "gamma": [[[[], []], [[], []]], [[[], []], [[], []]]],
//!  "omega2": [{"coeff": "1", "nu": 1, "dx": [1, 2]}],
//!  "orders": {"deg": 8, "x": 10, "fiber": 4, "nu": 5}}
//! ```
//!
//! `gamma[l][j][k]` is `Γ^l_{jk}`; `dx` indices are one-based; `exp` may be
//! omitted for constants; `orders` and each of its fields are optional.

use serde::Deserialize;

use super::{ChartGeometry, JetMatrix, Orders};
use crate::error::{Error, Result};
use crate::scalar::GaussianRational;
use crate::series::{FiberTag, GradedSeries, TermSpec, VariableProfile};

#[derive(Deserialize)]
#[serde(untagged)]
enum CoeffJson {
    Int(i64),
    Text(String),
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct TermJson {
    coeff: CoeffJson,
    #[serde(default)]
    exp: Vec<u32>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct FormTermJson {
    coeff: CoeffJson,
    #[serde(default)]
    exp: Vec<u32>,
    #[serde(default)]
    nu: u32,
    dx: Vec<usize>,
}

/// Truncation orders with every field optional.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PartialOrders {
    pub deg: Option<u32>,
    pub x: Option<u32>,
    pub fiber: Option<u32>,
    pub nu: Option<u32>,
}

impl PartialOrders {
    /// Fields of `over` take precedence.
    pub fn overlay(self, over: PartialOrders) -> PartialOrders {
        PartialOrders {
            deg: over.deg.or(self.deg),
            x: over.x.or(self.x),
            fiber: over.fiber.or(self.fiber),
            nu: over.nu.or(self.nu),
        }
    }

    /// Fills missing fields from [`Orders::for_degree`].
    pub fn resolve(self) -> Orders {
        let base = Orders::for_degree(self.deg.unwrap_or(8));
        Orders {
            deg: base.deg,
            x: self.x.unwrap_or(base.x),
            fiber: self.fiber.unwrap_or(base.fiber),
            nu: self.nu.unwrap_or(base.nu),
        }
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ChartJson {
    n: usize,
    lambda: Vec<Vec<Vec<TermJson>>>,
    gamma: Vec<Vec<Vec<Vec<TermJson>>>>,
    #[serde(default)]
    omega2: Vec<FormTermJson>,
    #[serde(default)]
    orders: PartialOrders,
}

/// A parsed chart file, not yet truncated to concrete orders.
pub struct ChartSpec {
    name: String,
    raw: ChartJson,
}

fn parse_err(path: impl Into<String>, message: impl Into<String>) -> Error {
    Error::Parse { context: path.into(), message: message.into() }
}

/// Parses chart JSON. Errors name the JSON path and, for syntax errors, the
/// line and column.
pub fn parse_chart_json(text: &str, name: &str) -> Result<ChartSpec> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let raw: ChartJson = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        parse_err(format!("{name}: {path}"), format!("{inner}"))
    })?;
    let n = raw.n;
    if !(2..=crate::series::MAX_DIM).contains(&n) || n % 2 == 1 {
        return Err(parse_err(format!("{name}: n"), format!("dimension {n} must be even and in 2..=8")));
    }
    if raw.lambda.len() != n || raw.lambda.iter().any(|r| r.len() != n) {
        return Err(parse_err(format!("{name}: lambda"), format!("expected a {n}x{n} table")));
    }
    let gamma_ok = raw.gamma.len() == n && raw.gamma.iter().all(|m| m.len() == n && m.iter().all(|r| r.len() == n));
    if !gamma_ok {
        return Err(parse_err(format!("{name}: gamma"), format!("expected a {n}x{n}x{n} table")));
    }
    Ok(ChartSpec { name: name.to_string(), raw })
}

fn coeff(c: &CoeffJson, path: &str) -> Result<GaussianRational> {
    match c {
        CoeffJson::Int(v) => Ok(GaussianRational::integer(*v)),
        CoeffJson::Text(s) => s.parse().map_err(|e: Error| parse_err(path, e.to_string())),
    }
}

impl ChartSpec {
    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn file_orders(&self) -> PartialOrders {
        self.raw.orders
    }

    /// Builds the geometry at the given orders (not validated).
    pub fn build(&self, orders: Orders) -> Result<ChartGeometry> {
        let n = self.raw.n;
        let p = VariableProfile::new(n, orders.x, orders.deg + 2, orders.nu, FiberTag::Y)?;
        let poly = |terms: &[TermJson], path: String| -> Result<GradedSeries> {
            let mut specs = Vec::with_capacity(terms.len());
            for (t, term) in terms.iter().enumerate() {
                let tp = format!("{path}[{t}]");
                if term.exp.len() > n {
                    return Err(parse_err(format!("{tp}.exp"), format!("expected at most {n} exponents")));
                }
                specs.push(TermSpec::new(coeff(&term.coeff, &format!("{tp}.coeff"))?).x(&term.exp));
            }
            GradedSeries::polynomial(p, specs).map_err(|e| parse_err(path, e.to_string()))
        };
        let name = &self.name;
        let lambda: JetMatrix = (0..n)
            .map(|j| (0..n).map(|k| poly(&self.raw.lambda[j][k], format!("{name}: lambda[{j}][{k}]"))).collect())
            .collect::<Result<_>>()?;
        let gamma: Vec<JetMatrix> = (0..n)
            .map(|l| {
                (0..n)
                    .map(|j| {
                        (0..n).map(|k| poly(&self.raw.gamma[l][j][k], format!("{name}: gamma[{l}][{j}][{k}]"))).collect()
                    })
                    .collect()
            })
            .collect::<Result<_>>()?;
        let mut specs = Vec::with_capacity(self.raw.omega2.len());
        for (t, term) in self.raw.omega2.iter().enumerate() {
            let tp = format!("{name}: omega2[{t}]");
            let c = coeff(&term.coeff, &format!("{tp}.coeff"))?;
            if term.dx.len() != 2 || term.dx.iter().any(|&d| d == 0 || d > n) || term.dx[0] >= term.dx[1] {
                return Err(parse_err(format!("{tp}.dx"), format!("expected two increasing indices in 1..={n}")));
            }
            if term.exp.len() > n {
                return Err(parse_err(format!("{tp}.exp"), format!("expected at most {n} exponents")));
            }
            let dx: Vec<usize> = term.dx.iter().map(|d| d - 1).collect();
            specs.push(TermSpec::new(c).x(&term.exp).nu(term.nu).dx(&dx));
        }
        let omega2 =
            GradedSeries::polynomial(p, specs).map_err(|e| parse_err(format!("{name}: omega2"), e.to_string()))?;
        ChartGeometry::new(name.clone(), lambda, gamma, omega2, orders)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MOYAL: &str = r#"{"n": 2,
        "lambda": [[[], [{"coeff": "1", "exp": [0, 0]}]], [[{"coeff": -1}], []]],
        "gamma": [[[[], []], [[], []]], [[[], []], [[], []]]],
        "omega2": [{"coeff": "1", "nu": 1, "dx": [1, 2]}],
        "orders": {"deg": 4}}"#;

    #[test]
    fn parses_moyal_with_omega() {
        let spec = parse_chart_json(MOYAL, "file").unwrap();
        let orders = spec.file_orders().resolve();
        assert_eq!(orders, Orders { deg: 4, x: 6, fiber: 4, nu: 3 });
        let geo = spec.build(orders).unwrap();
        assert!(geo.validate().passed());
        assert_eq!(geo.omega2().to_string(), "nu*dx1^dx2");
        assert_eq!(geo.lambda(1, 0).to_string(), "-1");
    }

    #[test]
    fn syntax_error_cites_position() {
        let err = parse_chart_json("{\"n\": 2,\n \"lambda\": [}", "bad").err().unwrap();
        let msg = err.to_string();
        assert!(msg.contains("line 2"), "{msg}");
    }

    #[test]
    fn type_error_cites_path() {
        let text = MOYAL.replace("\"exp\": [0, 0]", "\"exp\": [0, \"a\"]");
        let msg = parse_chart_json(&text, "f").err().unwrap().to_string();
        assert!(msg.contains("lambda[0][1][0].exp[1]"), "{msg}");
    }

    #[test]
    fn bad_coefficient_cites_path() {
        let text = MOYAL.replace("\"coeff\": \"1\", \"exp\"", "\"coeff\": \"1/0\", \"exp\"");
        let spec = parse_chart_json(&text, "f").unwrap();
        let msg = spec.build(Orders::for_degree(4)).err().unwrap().to_string();
        assert!(msg.contains("lambda[0][1][0].coeff"), "{msg}");
    }

    #[test]
    fn singular_and_open_charts_fail_validation() {
        let singular = MOYAL.replace("[{\"coeff\": -1}]", "[{\"coeff\": 1}]");
        let geo = parse_chart_json(&singular, "s").unwrap().build(Orders::for_degree(4)).unwrap();
        let report = geo.validate();
        assert!(!report.check("omega-nondegenerate").unwrap().passed);
        let open = MOYAL.replace("\"omega2\": [{\"coeff\": \"1\", \"nu\": 1, \"dx\": [1, 2]}]", "\"omega2\": [{\"coeff\": \"1\", \"dx\": [1, 2]}]");
        let geo = parse_chart_json(&open, "o").unwrap().build(Orders::for_degree(4)).unwrap();
        assert!(!geo.validate().check("omega2-nu-divisible").unwrap().passed);
    }
}
