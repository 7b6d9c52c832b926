//! Natural `ν`-formal differential operators: reconstruction from their
//! action on monomials, composition, σ-symbols, and the operators `L[w]`,
//! `R[w]`, `Z_p` built from the quantization map.

use std::collections::BTreeMap;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::quantizer::Quantizer;
use crate::scalar::GaussianRational;
use crate::series::{multi_degree, FiberTag, GradedSeries, Monomial, MultiIndex, Var, VariableProfile, MAX_DIM};
use crate::weyl::{self, WeylElement};

/// All multi-indices in `n` variables of total degree `≤ d`, by degree.
pub fn multi_indices_up_to(n: usize, d: u32) -> Vec<MultiIndex> {
    let mut out = Vec::new();
    for deg in 0..=d {
        let mut cur = [0u8; MAX_DIM];
        fill(n, 0, deg, &mut cur, &mut out);
    }
    out
}

fn fill(n: usize, pos: usize, left: u32, cur: &mut MultiIndex, out: &mut Vec<MultiIndex>) {
    if pos + 1 == n {
        cur[pos] = left as u8;
        out.push(*cur);
        cur[pos] = 0;
        return;
    }
    for e in (0..=left).rev() {
        cur[pos] = e as u8;
        fill(n, pos + 1, left - e, cur, out);
    }
    cur[pos] = 0;
}

fn leq(a: &MultiIndex, b: &MultiIndex) -> bool {
    a.iter().zip(b).all(|(x, y)| x <= y)
}

/// `β! / (β − γ)!`.
fn falling(beta: &MultiIndex, gamma: &MultiIndex) -> i64 {
    let mut f = 1i64;
    for k in 0..MAX_DIM {
        for t in 0..gamma[k] as i64 {
            f *= beta[k] as i64 - t;
        }
    }
    f
}

fn binomial_multi(a: &MultiIndex, b: &MultiIndex) -> i64 {
    let mut f = 1i64;
    for k in 0..MAX_DIM {
        let (n, r) = (a[k] as i64, b[k] as i64);
        let mut c = 1i64;
        for t in 0..r {
            c = c * (n - t) / (t + 1);
        }
        f *= c;
    }
    f
}

fn x_monomial(profile: VariableProfile, beta: &MultiIndex) -> GradedSeries {
    GradedSeries::monomial(profile, Monomial::x_only(*beta), GaussianRational::one())
}

/// `∂^γ f` in the `x` variables.
pub fn x_derivative(f: &GradedSeries, gamma: &MultiIndex) -> Result<GradedSeries> {
    let mut out = f.clone();
    for (k, &e) in gamma.iter().enumerate() {
        for _ in 0..e {
            out = out.partial_deriv(Var::X(k))?;
        }
    }
    Ok(out)
}

/// A random polynomial of degree exactly `d` with small integer coefficients.
pub fn random_polynomial(profile: VariableProfile, d: u32, rng: &mut ChaCha8Rng) -> GradedSeries {
    let mut acc = GradedSeries::zero(profile);
    for beta in multi_indices_up_to(profile.n, d) {
        let mut c: i64 = rng.gen_range(-3..=3);
        if multi_degree(&beta) == d && beta[0] as u32 == d {
            c = rng.gen_range(1..=3);
        }
        if c != 0 {
            acc = &acc + &GradedSeries::monomial(profile, Monomial::x_only(beta), c.into());
        }
    }
    acc
}

/// Recovers `a_γ` with `A f = Σ_γ a_γ ∂^γ f` from the action on `x^β`,
/// `|β| ≤ max_order`, by the triangular solve
/// `a_β = (A(x^β) − Σ_{γ<β} a_γ β!/(β−γ)! x^{β−γ}) / β!`, then checks the
/// result on a held-out random polynomial of degree `max_order + 1`.
/// Zero coefficients are omitted.
pub fn reconstruct_table<F>(
    n: usize,
    input: VariableProfile,
    max_order: u32,
    action: F,
    seed: u64,
) -> Result<BTreeMap<MultiIndex, GradedSeries>>
where
    F: Fn(&GradedSeries) -> Result<GradedSeries> + Sync,
{
    if max_order + 1 > input.x_order {
        return Err(Error::ProbeBudget(format!(
            "probing to order {max_order} needs x-order {} but the profile has {}",
            max_order + 1,
            input.x_order
        )));
    }
    let betas = multi_indices_up_to(n, max_order);
    let images: Vec<Result<GradedSeries>> = betas.par_iter().map(|b| action(&x_monomial(input, b))).collect();
    let mut table: BTreeMap<MultiIndex, GradedSeries> = BTreeMap::new();
    for (beta, image) in betas.iter().zip(images) {
        let mut rest = image?;
        let out_profile = *rest.profile();
        for (gamma, a) in &table {
            if gamma != beta && leq(gamma, beta) {
                let mut shift = [0u8; MAX_DIM];
                for k in 0..MAX_DIM {
                    shift[k] = beta[k] - gamma[k];
                }
                let term = a.mul(&x_monomial(out_profile, &shift))?.scale(&falling(beta, gamma).into());
                rest = rest.sub(&term)?;
            }
        }
        let a = rest.scale(&GaussianRational::ratio(1, falling(beta, beta)));
        if !a.is_zero() {
            table.insert(*beta, a);
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let held_out = random_polynomial(input, max_order + 1, &mut rng);
    let direct = action(&held_out)?;
    let mut via = GradedSeries::zero(*direct.profile());
    for (gamma, a) in &table {
        let d = x_derivative(&held_out, gamma)?.reprofile(*direct.profile())?;
        via = via.add(&a.mul(&d)?)?;
    }
    if let Some(report) = direct.difference_report(&via) {
        return Err(Error::HeldOutMismatch(format!("order {max_order} reconstruction {report}")));
    }
    Ok(table)
}

/// `A = Σ_r (iν)^r A_r` with `A_r = Σ_γ a_{r,γ}(x) ∂^γ`, through `ν`-order
/// `nu_orders`. Naturality (`|γ| ≤ r`) is enforced on construction.
#[derive(Clone, Debug, PartialEq)]
pub struct NaturalDiffOp {
    profile: VariableProfile,
    coeffs: BTreeMap<(u32, MultiIndex), GradedSeries>,
    nu_orders: u32,
}

impl NaturalDiffOp {
    /// Builds from `(r, γ) ↦ a_{r,γ}`; coefficients must be `x`-jets in
    /// `profile`.
    pub fn from_coefficients(
        profile: VariableProfile,
        nu_orders: u32,
        coeffs: BTreeMap<(u32, MultiIndex), GradedSeries>,
    ) -> Result<Self> {
        let mut clean = BTreeMap::new();
        for ((r, gamma), a) in coeffs {
            if r > nu_orders || a.is_zero() {
                continue;
            }
            if a.terms().any(|(m, _)| m.nu > 0 || m.fiber_deg() > 0 || m.dx != 0) {
                return Err(Error::Invariant("operator coefficients must be x-jets".into()));
            }
            if multi_degree(&gamma) > r {
                return Err(Error::NaturalityViolated { order: r, diff_order: multi_degree(&gamma) });
            }
            clean.insert((r, gamma), a.reprofile(profile)?);
        }
        Ok(Self { profile, coeffs: clean, nu_orders })
    }

    pub fn identity(profile: VariableProfile, nu_orders: u32) -> Self {
        let mut coeffs = BTreeMap::new();
        coeffs.insert((0, [0u8; MAX_DIM]), GradedSeries::one(profile));
        Self { profile, coeffs, nu_orders }
    }

    /// `iν ∂/∂x^p`.
    pub fn i_nu_partial(profile: VariableProfile, nu_orders: u32, p: usize) -> Self {
        let mut coeffs = BTreeMap::new();
        if nu_orders >= 1 {
            coeffs.insert((1, crate::series::unit_index(p)), GradedSeries::one(profile));
        }
        Self { profile, coeffs, nu_orders }
    }

    pub fn nu_orders(&self) -> u32 {
        self.nu_orders
    }

    pub fn coefficients(&self) -> impl Iterator<Item = (&(u32, MultiIndex), &GradedSeries)> {
        self.coeffs.iter()
    }

    pub fn coefficient(&self, r: u32, gamma: &MultiIndex) -> GradedSeries {
        self.coeffs.get(&(r, *gamma)).cloned().unwrap_or_else(|| GradedSeries::zero(self.profile))
    }

    /// Largest `|γ|` present at `ν`-order `r`.
    pub fn order_bound(&self, r: u32) -> Option<u32> {
        self.coeffs.keys().filter(|(s, _)| *s == r).map(|(_, g)| multi_degree(g)).max()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Restricts to `ν`-orders `≤ r`.
    pub fn truncate(&self, r: u32) -> Self {
        let coeffs = self.coeffs.iter().filter(|((s, _), _)| *s <= r).map(|(k, v)| (*k, v.clone())).collect();
        Self { profile: self.profile, coeffs, nu_orders: self.nu_orders.min(r) }
    }

    fn combine(&self, other: &Self, sign: i64) -> Result<Self> {
        let nu_orders = self.nu_orders.min(other.nu_orders);
        let mut coeffs = self.truncate(nu_orders).coeffs;
        for (k, v) in &other.coeffs {
            if k.0 > nu_orders {
                continue;
            }
            let v = v.scale(&sign.into());
            let slot = coeffs.entry(*k).or_insert_with(|| GradedSeries::zero(self.profile));
            *slot = slot.add(&v)?;
        }
        coeffs.retain(|_, v| !v.is_zero());
        Ok(Self { profile: self.profile, coeffs, nu_orders })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.combine(other, 1)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.combine(other, -1)
    }

    /// Left multiplication of every coefficient by an `x`-jet.
    pub fn scale_by(&self, f: &GradedSeries) -> Result<Self> {
        let f = f.reprofile(self.profile)?;
        let mut coeffs = BTreeMap::new();
        for (k, v) in &self.coeffs {
            let p = f.mul(v)?;
            if !p.is_zero() {
                coeffs.insert(*k, p);
            }
        }
        Ok(Self { profile: self.profile, coeffs, nu_orders: self.nu_orders })
    }

    /// `A f = Σ_r (iν)^r Σ_γ a_{r,γ} ∂^γ f`; `f` may be `ν`-formal.
    pub fn apply(&self, f: &GradedSeries) -> Result<GradedSeries> {
        let f = f.reprofile(self.profile)?;
        let mut out = GradedSeries::zero(self.profile);
        for ((r, gamma), a) in &self.coeffs {
            let d = x_derivative(&f, gamma)?;
            let factor = GaussianRational::i_pow(*r as i64);
            out = out.add(&a.mul(&d)?.scale(&factor).mul_nu_pow(*r))?;
        }
        Ok(out)
    }

    /// `AB` by the Leibniz rule
    /// `a ∂^γ (b ∂^δ) = Σ_{ε ≤ γ} C(γ,ε) a ∂^ε b ∂^{γ−ε+δ}`; `(iν)` powers add.
    pub fn compose(&self, other: &Self) -> Result<Self> {
        let nu_orders = self.nu_orders.min(other.nu_orders);
        let mut coeffs: BTreeMap<(u32, MultiIndex), GradedSeries> = BTreeMap::new();
        for ((ra, gamma), a) in &self.coeffs {
            for ((rb, delta), b) in &other.coeffs {
                let r = ra + rb;
                if r > nu_orders {
                    continue;
                }
                for eps in multi_indices_up_to(self.profile.n, multi_degree(gamma)) {
                    if !leq(&eps, gamma) {
                        continue;
                    }
                    let db = x_derivative(b, &eps)?;
                    if db.is_zero() {
                        continue;
                    }
                    let mut key = [0u8; MAX_DIM];
                    for k in 0..MAX_DIM {
                        key[k] = gamma[k] - eps[k] + delta[k];
                    }
                    let term = a.mul(&db)?.scale(&binomial_multi(gamma, &eps).into());
                    let slot = coeffs.entry((r, key)).or_insert_with(|| GradedSeries::zero(self.profile));
                    *slot = slot.add(&term)?;
                }
            }
        }
        coeffs.retain(|_, v| !v.is_zero());
        Self::from_coefficients(self.profile, nu_orders, coeffs)
    }

    /// `(1/iν)[A, B]`, exact through `ν`-order `min(nu_orders) − 1`.
    pub fn scaled_commutator(&self, other: &Self) -> Result<Self> {
        let ab = self.compose(other)?;
        let ba = other.compose(self)?;
        let diff = ab.sub(&ba)?;
        let mut coeffs = BTreeMap::new();
        for ((r, gamma), v) in diff.coeffs {
            if r == 0 {
                return Err(Error::NotDivisibleByNu(format!("commutator has a nu-free coefficient at {gamma:?}")));
            }
            coeffs.insert((r - 1, gamma), v);
        }
        Self::from_coefficients(self.profile, diff.nu_orders.saturating_sub(1), coeffs)
    }

    /// `σ(A) = Σ_r Σ_{|γ|=r} a_{r,γ}(x) ξ^γ` in `target` (fiber tag `ξ`).
    pub fn sigma(&self, target: VariableProfile) -> Result<GradedSeries> {
        let mut out = GradedSeries::zero(target);
        for ((r, gamma), a) in &self.coeffs {
            if multi_degree(gamma) != *r {
                continue;
            }
            let xi = GradedSeries::monomial(target, Monomial::fiber_only(*gamma), GaussianRational::one());
            out = out.add(&a.reprofile(target)?.mul(&xi)?)?;
        }
        Ok(out)
    }

    /// First coefficient where the operators differ on shared `ν`-orders.
    pub fn difference_report(&self, other: &Self) -> Option<String> {
        let top = self.nu_orders.min(other.nu_orders);
        let keys: std::collections::BTreeSet<_> =
            self.coeffs.keys().chain(other.coeffs.keys()).filter(|(r, _)| *r <= top).collect();
        keys.into_iter().find_map(|k| {
            self.coefficient(k.0, &k.1)
                .difference_report(&other.coefficient(k.0, &k.1))
                .map(|d| format!("(iν)^{} ∂^{:?}: {d}", k.0, &k.1[..self.profile.n]))
        })
    }
}

impl fmt::Display for NaturalDiffOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coeffs.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .coeffs
            .iter()
            .map(|((r, gamma), a)| {
                let d: Vec<String> = (0..self.profile.n)
                    .filter(|&k| gamma[k] > 0)
                    .map(|k| if gamma[k] == 1 { format!("d{}", k + 1) } else { format!("d{}^{}", k + 1, gamma[k]) })
                    .collect();
                let nu = match r {
                    0 => String::new(),
                    1 => "(i*nu)*".into(),
                    r => format!("(i*nu)^{r}*"),
                };
                let op = if d.is_empty() { String::new() } else { format!("*{}", d.join("*")) };
                format!("{nu}({a}){op}")
            })
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

/// Reconstructs a scalar `ν`-formal operator, keeping `ν`-orders
/// `≤ nu_orders` and dividing the `ν^r` coefficient by `i^r`.
pub fn reconstruct<F>(
    profile: VariableProfile,
    max_order: u32,
    nu_orders: u32,
    action: F,
    seed: u64,
) -> Result<NaturalDiffOp>
where
    F: Fn(&GradedSeries) -> Result<GradedSeries> + Sync,
{
    let truncated = |f: &GradedSeries| -> Result<GradedSeries> {
        let out = action(f)?.reprofile(profile)?;
        Ok(out.select(|m| m.nu as u32 <= nu_orders))
    };
    let table = reconstruct_table(profile.n, profile, max_order, truncated, seed)?;
    let mut coeffs = BTreeMap::new();
    for (gamma, a) in table {
        for r in 0..=nu_orders {
            let part = a.filter_map(profile, a.valid_x(), |m, c| {
                (m.nu as u32 == r).then(|| (Monomial { nu: 0, ..*m }, c.clone()))
            });
            if !part.is_zero() {
                coeffs.insert((r, gamma), part.scale(&GaussianRational::i_pow(-(r as i64))));
            }
        }
    }
    NaturalDiffOp::from_coefficients(profile, nu_orders, coeffs)
}

/// `{f, g}_{T*M} = ∂f/∂ξ_k ∂g/∂x^k − ∂g/∂ξ_k ∂f/∂x^k`.
pub fn poisson_tstar(f: &GradedSeries, g: &GradedSeries) -> Result<GradedSeries> {
    let n = f.profile().n;
    let mut out = GradedSeries::zero(*f.profile());
    for k in 0..n {
        let a = f.partial_deriv(Var::Fiber(k))?.mul(&g.partial_deriv(Var::X(k))?)?;
        let b = g.partial_deriv(Var::Fiber(k))?.mul(&f.partial_deriv(Var::X(k))?)?;
        out = out.add(&a)?.sub(&b)?;
    }
    Ok(out)
}

/// Scalar profile used for operator coefficients: the Weyl profile without
/// the `Deg` cap.
pub fn operator_profile(q: &Quantizer) -> VariableProfile {
    VariableProfile { deg_cap: None, ..q.geometry().weyl_profile() }
}

/// Probe order: one more than the certified `ν`-order.
fn probe_order(nu_orders: u32) -> u32 {
    nu_orders + 1
}

/// `L[w] f = ⟨w, τ(f)⟩` for form-free `w`.
pub fn op_l(q: &Quantizer, w: &WeylElement) -> Result<NaturalDiffOp> {
    let geo = q.geometry();
    let r = q.certified_order();
    reconstruct(operator_profile(q), probe_order(r), r, |f| weyl::pairing(geo, w, &q.tau(f)?), 0x11)
}

/// `R[w] f = ⟨τ(f), w⟩` for form-free `w`.
pub fn op_r(q: &Quantizer, w: &WeylElement) -> Result<NaturalDiffOp> {
    let geo = q.geometry();
    let r = q.certified_order();
    reconstruct(operator_profile(q), probe_order(r), r, |f| weyl::pairing(geo, &q.tau(f)?, w), 0x22)
}

/// `ν`-orders of `Z_p` exact at the computed `Deg`: `⌊(K+1)/2⌋`.
pub fn z_certified_order(q: &Quantizer) -> u32 {
    q.data().max_deg().div_ceil(2)
}

/// `Z_p f = iν ∂τ(f)/∂y^p |_{y=0}`.
pub fn op_z(q: &Quantizer, p: usize) -> Result<NaturalDiffOp> {
    let r = z_certified_order(q);
    reconstruct(
        operator_profile(q),
        probe_order(r),
        r,
        |f| {
            let d = q.tau(f)?.partial_deriv(Var::Fiber(p))?.at_fiber_zero();
            Ok(d.mul_nu_pow(1).scale(&GaussianRational::i()))
        },
        0x33 + p as u64,
    )
}

/// `ζ_p = σ(Z_p)` in `ξ` variables through the chart's fiber order.
pub fn zeta(q: &Quantizer) -> Result<Vec<GradedSeries>> {
    let target = q.geometry().symbol_profile(FiberTag::Xi);
    let n = q.geometry().dim();
    let r = z_certified_order(q);
    if r < target.fiber_order {
        return Err(Error::UncertifiedOrder { requested: target.fiber_order, certified: r });
    }
    (0..n).into_par_iter().map(|p| op_z(q, p)?.sigma(target)).collect()
}

/// `L_f = L[τ(f)]`, whose symbol is `Sf`.
pub fn op_l_of(q: &Quantizer, f: &GradedSeries) -> Result<NaturalDiffOp> {
    op_l(q, &q.tau(f)?)
}

/// `R_f = R[τ(f)]`, whose symbol is `Tf`.
pub fn op_r_of(q: &Quantizer, f: &GradedSeries) -> Result<NaturalDiffOp> {
    op_r(q, &q.tau(f)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{preset_with, Orders};
    use crate::poly::parse_polynomial;
    use crate::series::unit_index;

    fn prof() -> VariableProfile {
        VariableProfile::new(2, 8, 4, 4, FiberTag::Y).unwrap()
    }

    #[test]
    fn reconstructs_simple_operators() {
        let p = prof();
        let d1 = reconstruct_table(2, p, 3, |f| f.partial_deriv(Var::X(0)), 1).unwrap();
        assert_eq!(d1.len(), 1);
        assert_eq!(d1[&unit_index(0)].to_string(), "1");
        assert!(matches!(
            reconstruct(p, 3, 2, |f| f.partial_deriv(Var::X(0)), 1),
            Err(Error::NaturalityViolated { order: 0, diff_order: 1 })
        ));

        let inu = reconstruct(p, 3, 2, |f| Ok(f.mul_nu_pow(1).scale(&GaussianRational::i())), 2).unwrap();
        assert_eq!(inu.coefficient(1, &[0; MAX_DIM]).to_string(), "1");
        assert_eq!(inu.coefficients().count(), 1);

        let x2 = GradedSeries::x_var(p, 1);
        let op = reconstruct_table(2, p, 3, |f| x2.mul(&x_derivative(f, &[2, 0, 0, 0, 0, 0, 0, 0])?), 3).unwrap();
        assert_eq!(op.len(), 1);
        assert_eq!(op[&[2, 0, 0, 0, 0, 0, 0, 0]].to_string(), "x2");
    }

    #[test]
    fn held_out_catches_high_order() {
        let p = prof();
        let third = |f: &GradedSeries| x_derivative(f, &[3, 0, 0, 0, 0, 0, 0, 0]);
        assert!(matches!(reconstruct_table(2, p, 2, third, 4), Err(Error::HeldOutMismatch(_))));
    }

    #[test]
    fn sigma_and_kernel() {
        let p = prof();
        let xi = p.with_tag(FiberTag::Xi);
        assert_eq!(NaturalDiffOp::i_nu_partial(p, 2, 1).sigma(xi).unwrap().to_string(), "xi2");
        let mut c = BTreeMap::new();
        c.insert((0, [0; MAX_DIM]), GradedSeries::x_var(p, 0));
        let mult = NaturalDiffOp::from_coefficients(p, 2, c).unwrap();
        assert_eq!(mult.sigma(xi).unwrap().to_string(), "x1");
        // ν·(iν ∂₁) = (iν)² (−i ∂₁): order 1 at ν-order 2, no symbol.
        let mut c = BTreeMap::new();
        c.insert((2, unit_index(0)), GradedSeries::constant(p, -GaussianRational::i()));
        assert!(NaturalDiffOp::from_coefficients(p, 2, c).unwrap().sigma(xi).unwrap().is_zero());
    }

    #[test]
    fn compose_and_commutator() {
        let p = prof();
        let xi = p.with_tag(FiberTag::Xi);
        let mut c = BTreeMap::new();
        c.insert((0, [0; MAX_DIM]), GradedSeries::x_var(p, 0));
        let x1 = NaturalDiffOp::from_coefficients(p, 3, c).unwrap();
        let d1 = NaturalDiffOp::i_nu_partial(p, 3, 0);
        // (1/iν)[iν∂₁, x1] = 1
        let comm = d1.scaled_commutator(&x1).unwrap();
        assert_eq!(comm.sigma(xi).unwrap().to_string(), "1");
        let brk = poisson_tstar(&d1.sigma(xi).unwrap(), &x1.sigma(xi).unwrap()).unwrap();
        assert_eq!(brk.to_string(), "1");
        let f = parse_polynomial("x1^2*x2", p).unwrap();
        let composed = d1.compose(&x1).unwrap().apply(&f).unwrap();
        let stepwise = d1.apply(&x1.apply(&f).unwrap()).unwrap();
        assert_eq!(composed, stepwise);
    }

    #[test]
    fn flat_zeta_and_left_multiplication() {
        let q = Quantizer::for_geometry(&preset_with("moyal2", Orders { fiber: 2, ..Orders::for_degree(4) }).unwrap()).unwrap();
        let z = zeta(&q).unwrap();
        assert_eq!(z[0].to_string(), "xi1");
        assert_eq!(z[1].to_string(), "xi2");
        let zop = op_z(&q, 0).unwrap();
        assert!(zop.difference_report(&NaturalDiffOp::i_nu_partial(operator_profile(&q), zop.nu_orders(), 0)).is_none());
        let one = WeylElement::new(GradedSeries::one(q.geometry().weyl_profile()));
        let l1 = op_l(&q, &one).unwrap();
        assert!(l1.difference_report(&NaturalDiffOp::identity(operator_profile(&q), l1.nu_orders())).is_none());
        let f = parse_polynomial("x1", q.geometry().weyl_profile()).unwrap();
        let sf = op_l_of(&q, &f).unwrap().sigma(q.geometry().symbol_profile(FiberTag::Xi)).unwrap();
        assert_eq!(sf.to_string(), "1/2*xi2 + x1");
    }
}
