//! Geometric input on one chart: the tensor `Λ^{jk}`, the connection
//! `Γ^l_{jk}` and the closed `ν`-formal two-form `Ω`, all as jets at the
//! origin. Also builds the torsion and curvature elements of the Weyl
//! bundle.

mod chart_file;
mod presets;

use std::fmt;

use crate::error::{Error, Result};
use crate::scalar::GaussianRational;
use crate::series::{FiberTag, GradedSeries, JetValidity, Monomial, Var, VariableProfile};
use crate::weyl::{ContractionTable, WeylElement};

pub use chart_file::parse_chart_json;
pub use chart_file::{ChartSpec, PartialOrders};
pub use presets::{preset, preset_names, preset_with};

/// Jet table indexed `[j][k]`.
pub type JetMatrix = Vec<Vec<GradedSeries>>;

/// Truncation orders for a computation: maximal `Deg` of Weyl elements,
/// `x`-jet order, fiber order of the dequantization series, and `ν`-order.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Orders {
    pub deg: u32,
    pub x: u32,
    pub fiber: u32,
    pub nu: u32,
}

impl Orders {
    /// `N_x = K + 2`, `N_f = 4` (capped by `K`), `N_ν = ⌊K/2⌋ + 1`.
    pub fn for_degree(k: u32) -> Self {
        Self { deg: k, x: k + 2, fiber: 4.min(k), nu: k / 2 + 1 }
    }

    fn check(&self) -> Result<()> {
        if self.deg < 2 {
            return Err(Error::InvalidProfile(format!("maximal Deg {} must be at least 2", self.deg)));
        }
        if self.nu < self.deg / 2 + 1 {
            return Err(Error::InvalidProfile(format!(
                "nu order {} is below floor(K/2)+1 = {}",
                self.nu,
                self.deg / 2 + 1
            )));
        }
        if self.fiber == 0 || self.fiber > self.deg {
            return Err(Error::InvalidProfile(format!(
                "fiber order {} must be in 1..=K ({})",
                self.fiber, self.deg
            )));
        }
        if self.x == 0 {
            return Err(Error::InvalidProfile("x order must be positive".into()));
        }
        Ok(())
    }
}

impl Default for Orders {
    fn default() -> Self {
        Self::for_degree(8)
    }
}

/// Validated-or-not geometric data on one chart. Immutable once built.
#[derive(Clone, Debug)]
pub struct ChartGeometry {
    name: String,
    n: usize,
    orders: Orders,
    weyl: VariableProfile,
    lambda: JetMatrix,
    gamma: Vec<JetMatrix>,
    omega2: GradedSeries,
    contractions: ContractionTable,
}

/// Outcome of one named validation check.
#[derive(Clone, Debug, PartialEq)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub passed: bool,
    pub detail: Option<String>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ValidationReport {
    pub checks: Vec<CheckOutcome>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn check(&self, name: &str) -> Option<&CheckOutcome> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn first_failure(&self) -> Option<&CheckOutcome> {
        self.checks.iter().find(|c| !c.passed)
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            write!(f, "{} {}", if c.passed { "PASS" } else { "FAIL" }, c.name)?;
            if let Some(d) = &c.detail {
                write!(f, ": {d}")?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

impl ChartGeometry {
    /// Assembles a chart. `gamma[l][j][k]` is `Γ^l_{jk}`; `omega2` must be a
    /// fiber-free two-form. Jets are moved into the Weyl profile derived from
    /// `orders`. Nothing is validated here; see [`validate`](Self::validate).
    pub fn new(
        name: impl Into<String>,
        lambda: JetMatrix,
        gamma: Vec<JetMatrix>,
        omega2: GradedSeries,
        orders: Orders,
    ) -> Result<Self> {
        orders.check()?;
        let n = lambda.len();
        let weyl = VariableProfile::new(n, orders.x, orders.deg + 2, orders.nu, FiberTag::Y)?
            .with_deg_cap(orders.deg + 2);
        let shape_ok = lambda.iter().all(|row| row.len() == n)
            && gamma.len() == n
            && gamma.iter().all(|m| m.len() == n && m.iter().all(|row| row.len() == n));
        if !shape_ok {
            return Err(Error::ProfileMismatch(format!("lambda must be {n}x{n} and gamma {n}x{n}x{n}")));
        }
        let jet = |s: &GradedSeries, what: &str| -> Result<GradedSeries> {
            if s.terms().any(|(m, _)| m.fiber_deg() > 0 || m.dx != 0 || m.nu > 0) {
                return Err(Error::FormPartNotAllowed(format!("{what} entries must be x-jets")));
            }
            s.reprofile(weyl)
        };
        let lambda = lambda
            .iter()
            .map(|row| row.iter().map(|s| jet(s, "lambda")).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        let gamma = gamma
            .iter()
            .map(|m| {
                m.iter()
                    .map(|row| row.iter().map(|s| jet(s, "gamma")).collect::<Result<Vec<_>>>())
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        if omega2.terms().any(|(m, _)| m.fiber_deg() > 0 || m.form_deg() != 2) {
            return Err(Error::FormPartNotAllowed("Omega must be a fiber-free two-form".into()));
        }
        let omega2 = omega2.reprofile(weyl)?;
        let contractions = ContractionTable::build(&lambda, weyl)?;
        Ok(Self { name: name.into(), n, orders, weyl, lambda, gamma, omega2, contractions })
    }

    /// The same chart data truncated at different orders.
    pub fn with_orders(&self, orders: Orders) -> Result<Self> {
        Self::new(self.name.clone(), self.lambda.clone(), self.gamma.clone(), self.omega2.clone(), orders)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn orders(&self) -> Orders {
        self.orders
    }

    /// Profile of Weyl-bundle elements: fiber tag `y`, `Deg ≤ K + 2`.
    pub fn weyl_profile(&self) -> VariableProfile {
        self.weyl
    }

    /// Profile of the dequantization series in the given fiber coordinates.
    pub fn symbol_profile(&self, tag: FiberTag) -> VariableProfile {
        VariableProfile { deg_cap: None, fiber_order: self.orders.fiber, tag, ..self.weyl }
    }

    pub fn lambda(&self, j: usize, k: usize) -> &GradedSeries {
        &self.lambda[j][k]
    }

    /// `Γ^l_{jk}`.
    pub fn gamma(&self, l: usize, j: usize, k: usize) -> &GradedSeries {
        &self.gamma[l][j][k]
    }

    pub fn omega2(&self) -> &GradedSeries {
        &self.omega2
    }

    pub(crate) fn contractions(&self) -> &ContractionTable {
        &self.contractions
    }

    /// `ω^{jk} = (Λ^{jk} − Λ^{kj}) / 2`.
    pub fn omega_upper(&self) -> JetMatrix {
        let half = GaussianRational::ratio(1, 2);
        (0..self.n)
            .map(|j| (0..self.n).map(|k| (&self.lambda[j][k] - &self.lambda[k][j]).scale(&half)).collect())
            .collect()
    }

    /// Constant term of `ω^{jk}`.
    fn omega_constant(&self) -> Vec<Vec<GaussianRational>> {
        self.omega_upper().iter().map(|row| row.iter().map(|s| s.coefficient(&Monomial::ONE)).collect()).collect()
    }

    /// The jet inverse `ω_{jk}` of `ω^{jk}`: constant-term inversion followed
    /// by the geometric-series correction.
    pub fn omega_lower(&self) -> Result<JetMatrix> {
        let upper = self.omega_upper();
        let c0 = self.omega_constant();
        let inv0 = invert_matrix(&c0).ok_or(Error::SingularOmega)?;
        let p = self.weyl;
        let inv0_jets: JetMatrix = inv0
            .iter()
            .map(|row| row.iter().map(|c| GradedSeries::constant(p, c.clone())).collect())
            .collect();
        // E = ω − ω0 has no constant term; ω^{-1} = Σ_m (−ω0^{-1} E)^m ω0^{-1}.
        let e: JetMatrix = upper
            .iter()
            .map(|row| row.iter().map(|s| s.select(|m| *m != Monomial::ONE)).collect())
            .collect();
        let step = matrix_mul(&inv0_jets, &e).into_iter().map(|row| row.iter().map(|s| s.neg()).collect()).collect();
        let mut term = inv0_jets.clone();
        let mut total = inv0_jets;
        for _ in 0..=p.x_order {
            term = matrix_mul(&step, &term);
            if term.iter().flatten().all(GradedSeries::is_zero) {
                break;
            }
            total = matrix_add(&total, &term);
        }
        // Every entry is trusted only as far as the inputs are.
        let valid = upper.iter().flatten().map(GradedSeries::valid_x).min().unwrap_or(JetValidity::Exact);
        let valid = valid.min(term.iter().flatten().map(GradedSeries::valid_x).min().unwrap_or(JetValidity::Exact));
        Ok(total.iter().map(|row| row.iter().map(|s| s.with_validity(valid)).collect()).collect())
    }

    /// `T^j_{kl} = Γ^j_{kl} − Γ^j_{lk}`, indexed `[j][k][l]`.
    pub fn torsion(&self) -> Vec<JetMatrix> {
        (0..self.n)
            .map(|j| {
                (0..self.n)
                    .map(|k| (0..self.n).map(|l| &self.gamma[j][k][l] - &self.gamma[j][l][k]).collect())
                    .collect()
            })
            .collect()
    }

    /// `R^s_{tkl} = ∂_kΓ^s_{lt} − ∂_lΓ^s_{kt} + Γ^s_{kα}Γ^α_{lt} − Γ^s_{lα}Γ^α_{kt}`,
    /// indexed `[s][t][k][l]`. Consumes one `x`-order.
    pub fn curvature(&self) -> Result<Vec<Vec<JetMatrix>>> {
        let n = self.n;
        let g = |s: usize, j: usize, k: usize| &self.gamma[s][j][k];
        let mut out = Vec::with_capacity(n);
        for s in 0..n {
            let mut by_t = Vec::with_capacity(n);
            for t in 0..n {
                let mut by_k = Vec::with_capacity(n);
                for k in 0..n {
                    let mut by_l = Vec::with_capacity(n);
                    for l in 0..n {
                        let mut acc = g(s, l, t).partial_deriv(Var::X(k))?.sub(&g(s, k, t).partial_deriv(Var::X(l))?)?;
                        for a in 0..n {
                            acc = &acc + &(g(s, k, a) * g(a, l, t));
                            acc = &acc - &(g(s, l, a) * g(a, k, t));
                        }
                        by_l.push(acc);
                    }
                    by_k.push(by_l);
                }
                by_t.push(by_k);
            }
            out.push(by_t);
        }
        Ok(out)
    }

    /// `T = ½ ω_{sα} T^α_{kl} y^s dx^k ∧ dx^l`.
    pub fn element_t(&self) -> Result<WeylElement> {
        let lower = self.omega_lower()?;
        let tor = self.torsion();
        let p = self.weyl;
        let mut acc = GradedSeries::zero(p);
        for s in 0..self.n {
            for k in 0..self.n {
                for l in 0..self.n {
                    if k == l {
                        continue;
                    }
                    let mut coeff = GradedSeries::zero(p);
                    for a in 0..self.n {
                        coeff = &coeff + &(&lower[s][a] * &tor[a][k][l]);
                    }
                    let form = &GradedSeries::dx(p, k) * &GradedSeries::dx(p, l);
                    acc = &acc + &(&(&coeff * &GradedSeries::fiber_var(p, s)) * &form);
                }
            }
        }
        Ok(WeylElement::new(acc.scale(&GaussianRational::ratio(1, 2))))
    }

    /// `R = ¼ ω_{sα} R^α_{tkl} y^s y^t dx^k ∧ dx^l`.
    pub fn element_r(&self) -> Result<WeylElement> {
        let lower = self.omega_lower()?;
        let curv = self.curvature()?;
        let p = self.weyl;
        let mut acc = GradedSeries::zero(p);
        for s in 0..self.n {
            for t in 0..self.n {
                for k in 0..self.n {
                    for l in 0..self.n {
                        if k == l {
                            continue;
                        }
                        let mut coeff = GradedSeries::zero(p);
                        for a in 0..self.n {
                            coeff = &coeff + &(&lower[s][a] * &curv[a][t][k][l]);
                        }
                        if coeff.is_zero() {
                            continue;
                        }
                        let ys = &GradedSeries::fiber_var(p, s) * &GradedSeries::fiber_var(p, t);
                        let form = &GradedSeries::dx(p, k) * &GradedSeries::dx(p, l);
                        acc = &acc + &(&(&coeff * &ys) * &form);
                    }
                }
            }
        }
        Ok(WeylElement::new(acc.scale(&GaussianRational::ratio(1, 4))))
    }

    /// `∂_l T^{jk} + Γ^j_{lm} T^{mk} + Γ^k_{lm} T^{jm}` for a contravariant
    /// two-tensor, reported at the first nonzero `(j,k,l)`.
    fn covariant_derivative_defect(&self, tensor: &JetMatrix) -> Option<String> {
        let n = self.n;
        for j in 0..n {
            for k in 0..n {
                for l in 0..n {
                    let mut acc = match tensor[j][k].partial_deriv(Var::X(l)) {
                        Ok(d) => d,
                        Err(e) => return Some(format!("({},{},{}): {e}", j + 1, k + 1, l + 1)),
                    };
                    for m in 0..n {
                        acc = &acc + &(&self.gamma[j][l][m] * &tensor[m][k]);
                        acc = &acc + &(&self.gamma[k][l][m] * &tensor[j][m]);
                    }
                    if !acc.agrees_with(&GradedSeries::zero(self.weyl)) {
                        return Some(format!("(j,k,l)=({},{},{}): {}", j + 1, k + 1, l + 1, acc));
                    }
                }
            }
        }
        None
    }

    /// Runs every chart check and reports pass/fail per check.
    pub fn validate(&self) -> ValidationReport {
        let mut checks = Vec::new();
        let defect = self.covariant_derivative_defect(&self.lambda);
        checks.push(CheckOutcome { name: "nabla-lambda", passed: defect.is_none(), detail: defect });
        let defect = self.covariant_derivative_defect(&self.omega_upper());
        checks.push(CheckOutcome { name: "nabla-omega", passed: defect.is_none(), detail: defect });

        let det_ok = invert_matrix(&self.omega_constant()).is_some();
        checks.push(CheckOutcome {
            name: "omega-nondegenerate",
            passed: det_ok,
            detail: (!det_ok).then(|| "constant term of omega^{jk} is singular".to_string()),
        });

        let closed = self.exterior_derivative(&self.omega2);
        let closed_detail = match closed {
            Ok(d) if d.agrees_with(&GradedSeries::zero(self.weyl)) => None,
            Ok(d) => Some(format!("dOmega = {d}")),
            Err(e) => Some(e.to_string()),
        };
        checks.push(CheckOutcome { name: "omega2-closed", passed: closed_detail.is_none(), detail: closed_detail });

        let nu_free = self.omega2.nu_free();
        checks.push(CheckOutcome {
            name: "omega2-nu-divisible",
            passed: nu_free.is_zero(),
            detail: (!nu_free.is_zero()).then(|| format!("nu-free part {nu_free}")),
        });
        ValidationReport { checks }
    }

    /// Validates and converts a failing report into an error.
    pub fn validated(self) -> Result<Self> {
        let report = self.validate();
        match report.first_failure() {
            None => Ok(self),
            Some(c) => Err(Error::Validation(format!(
                "{}{}",
                c.name,
                c.detail.as_ref().map(|d| format!(": {d}")).unwrap_or_default()
            ))),
        }
    }

    /// `d = dx^l ∧ ∂/∂x^l` on fiber-free forms.
    pub fn exterior_derivative(&self, form: &GradedSeries) -> Result<GradedSeries> {
        let mut acc = GradedSeries::zero(*form.profile());
        for l in 0..self.n {
            acc = acc.add(&form.partial_deriv(Var::X(l))?.wedge_dx_left(l))?;
        }
        Ok(acc)
    }
}

fn matrix_mul(a: &JetMatrix, b: &JetMatrix) -> JetMatrix {
    let n = a.len();
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    (0..n).fold(GradedSeries::zero(*a[0][0].profile()), |acc, k| &acc + &(&a[i][k] * &b[k][j]))
                })
                .collect()
        })
        .collect()
}

fn matrix_add(a: &JetMatrix, b: &JetMatrix) -> JetMatrix {
    a.iter().zip(b).map(|(ra, rb)| ra.iter().zip(rb).map(|(x, y)| x + y).collect()).collect()
}

/// Gauss–Jordan inverse over ℚ(i); `None` if singular.
pub(crate) fn invert_matrix(m: &[Vec<GaussianRational>]) -> Option<Vec<Vec<GaussianRational>>> {
    let n = m.len();
    let mut a: Vec<Vec<GaussianRational>> = m
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend((0..n).map(|j| if i == j { GaussianRational::one() } else { GaussianRational::zero() }));
            r
        })
        .collect();
    for col in 0..n {
        let pivot = (col..n).find(|&r| !a[r][col].is_zero())?;
        a.swap(col, pivot);
        let inv = a[col][col].inv()?;
        for x in a[col].iter_mut() {
            *x = &*x * &inv;
        }
        for r in 0..n {
            if r != col && !a[r][col].is_zero() {
                let f = a[r][col].clone();
                let pivot_row = a[col].clone();
                for (x, p) in a[r].iter_mut().zip(&pivot_row) {
                    *x = &*x - &(&f * p);
                }
            }
        }
    }
    Some(a.into_iter().map(|r| r[n..].to_vec()).collect())
}
