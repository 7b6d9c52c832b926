//! Sparse truncated series in base-jet variables `x`, fiber variables (`y`,
//! `ξ` or `ζ`), Grassmann form variables `dx` and the deformation parameter
//! `ν`, with exact Gaussian-rational coefficients.
//!
//! The `x`-dependence is a jet at the chart origin. Every series carries a
//! [`JetValidity`]: coefficients of `x`-degree above it are not trusted and
//! are never stored. Differentiation in `x` consumes one order; exact
//! polynomials stay exact until a product is truncated.

mod render;
mod subst;

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::ops::{Add, Mul, Neg, Sub};

use crate::error::{Error, Result};
use crate::scalar::GaussianRational;

pub use subst::{reverse_fiber_system, Substitution};

/// Largest supported chart dimension.
pub const MAX_DIM: usize = 8;

/// Exponent vector for one variable class; entries past `n` are zero.
pub type MultiIndex = [u8; MAX_DIM];

pub fn multi_degree(m: &MultiIndex) -> u32 {
    m.iter().map(|&e| e as u32).sum()
}

/// Unit multi-index `e_k`.
pub fn unit_index(k: usize) -> MultiIndex {
    let mut m = [0u8; MAX_DIM];
    m[k] = 1;
    m
}

/// Which fiber coordinates a series is written in.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FiberTag {
    /// Tangent fiber coordinates `y^k` of the Weyl bundle.
    Y,
    /// Cotangent fiber coordinates `ξ_k`.
    Xi,
    /// The symbol coordinates `ζ_k`.
    Zeta,
}

impl FiberTag {
    pub fn symbol(self) -> &'static str {
        match self {
            FiberTag::Y => "y",
            FiberTag::Xi => "xi",
            FiberTag::Zeta => "zeta",
        }
    }
}

/// Variable classes and their truncation orders. Terms are kept while
/// `x`-degree ≤ `x_order`, fiber degree ≤ `fiber_order`, `ν`-exponent ≤
/// `nu_order` and, if set, `2·deg_ν + deg_s ≤ deg_cap`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct VariableProfile {
    pub n: usize,
    pub x_order: u32,
    pub fiber_order: u32,
    pub nu_order: u32,
    pub deg_cap: Option<u32>,
    pub tag: FiberTag,
}

impl VariableProfile {
    pub fn new(n: usize, x_order: u32, fiber_order: u32, nu_order: u32, tag: FiberTag) -> Result<Self> {
        if n < 2 || !n.is_multiple_of(2) || n > MAX_DIM {
            return Err(Error::InvalidProfile(format!(
                "dimension {n} must be even and between 2 and {MAX_DIM}"
            )));
        }
        for (name, v) in [("x", x_order), ("fiber", fiber_order), ("nu", nu_order)] {
            if v == 0 || v > 200 {
                return Err(Error::InvalidProfile(format!("{name} order {v} must be in 1..=200")));
            }
        }
        Ok(Self { n, x_order, fiber_order, nu_order, deg_cap: None, tag })
    }

    pub fn with_deg_cap(mut self, cap: u32) -> Self {
        self.deg_cap = Some(cap);
        self
    }

    pub fn with_tag(mut self, tag: FiberTag) -> Self {
        self.tag = tag;
        self
    }

    pub fn with_fiber_order(mut self, fiber_order: u32) -> Self {
        self.fiber_order = fiber_order;
        self
    }

    fn admits(&self, m: &Monomial) -> bool {
        m.nu as u32 <= self.nu_order
            && m.fiber_deg() <= self.fiber_order
            && self.deg_cap.is_none_or(|c| m.total_deg() <= c)
    }

    fn describe(&self) -> String {
        format!(
            "n={}, x≤{}, {}≤{}, nu≤{}{}",
            self.n,
            self.x_order,
            self.tag.symbol(),
            self.fiber_order,
            self.nu_order,
            self.deg_cap.map(|c| format!(", Deg≤{c}")).unwrap_or_default()
        )
    }
}

/// Largest `x`-degree through which a series' jets are trustworthy.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum JetValidity {
    Through(u32),
    /// A polynomial in `x` with nothing truncated.
    Exact,
}

impl JetValidity {
    pub fn admits(self, x_deg: u32) -> bool {
        match self {
            JetValidity::Exact => true,
            JetValidity::Through(v) => x_deg <= v,
        }
    }

    /// Validity after one `x`-derivative.
    pub fn after_derivative(self) -> Result<Self> {
        match self {
            JetValidity::Exact => Ok(JetValidity::Exact),
            JetValidity::Through(0) => Err(Error::XOrderExhausted),
            JetValidity::Through(v) => Ok(JetValidity::Through(v - 1)),
        }
    }
}

/// One monomial `ν^c x^α (fiber)^β dx^S`; the form part is a bitmask whose
/// set bits are the (strictly increasing) indices of `S`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Monomial {
    pub nu: u8,
    pub x: MultiIndex,
    pub fiber: MultiIndex,
    pub dx: u8,
}

impl Monomial {
    pub const ONE: Monomial = Monomial { nu: 0, x: [0; MAX_DIM], fiber: [0; MAX_DIM], dx: 0 };

    pub fn x_deg(&self) -> u32 {
        multi_degree(&self.x)
    }

    pub fn fiber_deg(&self) -> u32 {
        multi_degree(&self.fiber)
    }

    pub fn form_deg(&self) -> u32 {
        self.dx.count_ones()
    }

    /// `Deg = 2·deg_ν + deg_s`.
    pub fn total_deg(&self) -> u32 {
        2 * self.nu as u32 + self.fiber_deg()
    }

    pub fn grading(&self, g: Grading) -> u32 {
        match g {
            Grading::Nu => self.nu as u32,
            Grading::Sym => self.fiber_deg(),
            Grading::Form => self.form_deg(),
            Grading::Total => self.total_deg(),
        }
    }

    pub fn form_indices(&self) -> Vec<usize> {
        (0..MAX_DIM).filter(|&k| self.dx & (1 << k) != 0).collect()
    }

    pub fn x_only(x: MultiIndex) -> Self {
        Monomial { x, ..Monomial::ONE }
    }

    pub fn fiber_only(fiber: MultiIndex) -> Self {
        Monomial { fiber, ..Monomial::ONE }
    }
}

/// Sign of `dx^A ∧ dx^B`, or `None` if the subsets overlap.
pub(crate) fn wedge_sign(a: u8, b: u8) -> Option<bool> {
    if a & b != 0 {
        return None;
    }
    let mut swaps = 0u32;
    let mut rest = b;
    while rest != 0 {
        let k = rest.trailing_zeros();
        swaps += (a >> k).count_ones();
        rest &= rest - 1;
    }
    Some(swaps % 2 == 1)
}

fn add_index(a: &MultiIndex, b: &MultiIndex) -> MultiIndex {
    let mut out = *a;
    for k in 0..MAX_DIM {
        out[k] += b[k];
    }
    out
}

pub(crate) fn monomial_product(a: &Monomial, b: &Monomial) -> Option<(Monomial, bool)> {
    let neg = wedge_sign(a.dx, b.dx)?;
    Some((
        Monomial {
            nu: a.nu + b.nu,
            x: add_index(&a.x, &b.x),
            fiber: add_index(&a.fiber, &b.fiber),
            dx: a.dx | b.dx,
        },
        neg,
    ))
}

fn cmp_subsets(a: u8, b: u8) -> Ordering {
    a.count_ones().cmp(&b.count_ones()).then_with(|| {
        let d = a ^ b;
        if d == 0 {
            Ordering::Equal
        } else if a & (d & d.wrapping_neg()) != 0 {
            Ordering::Less
        } else {
            Ordering::Greater
        }
    })
}

/// Canonical graded-lex order over (`ν`, `x`, fiber, `dx`): lower degree
/// first, higher leading exponents first within a degree.
impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.nu
            .cmp(&other.nu)
            .then_with(|| self.x_deg().cmp(&other.x_deg()))
            .then_with(|| other.x.cmp(&self.x))
            .then_with(|| self.fiber_deg().cmp(&other.fiber_deg()))
            .then_with(|| other.fiber.cmp(&self.fiber))
            .then_with(|| cmp_subsets(self.dx, other.dx))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// The four gradings of the Weyl bundle.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Grading {
    /// `deg_ν`
    Nu,
    /// `deg_s`, the fiber degree
    Sym,
    /// `deg_a`, the form degree
    Form,
    /// `Deg = 2 deg_ν + deg_s`
    Total,
}

/// An even variable that can be differentiated.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Var {
    X(usize),
    Fiber(usize),
    Nu,
}

/// Input form of one term for [`GradedSeries::make`]. Indices are zero-based.
#[derive(Clone, Debug)]
pub struct TermSpec {
    pub coeff: GaussianRational,
    pub nu: u32,
    pub x: Vec<u32>,
    pub fiber: Vec<u32>,
    pub dx: Vec<usize>,
}

impl TermSpec {
    pub fn new(coeff: impl Into<GaussianRational>) -> Self {
        Self { coeff: coeff.into(), nu: 0, x: vec![], fiber: vec![], dx: vec![] }
    }
    pub fn nu(mut self, e: u32) -> Self {
        self.nu = e;
        self
    }
    pub fn x(mut self, exps: &[u32]) -> Self {
        self.x = exps.to_vec();
        self
    }
    pub fn fiber(mut self, exps: &[u32]) -> Self {
        self.fiber = exps.to_vec();
        self
    }
    pub fn dx(mut self, idx: &[usize]) -> Self {
        self.dx = idx.to_vec();
        self
    }
}

/// A truncated multigraded series. Immutable in practice: every operation
/// returns a new value.
#[derive(Clone, Debug)]
pub struct GradedSeries {
    profile: VariableProfile,
    terms: BTreeMap<Monomial, GaussianRational>,
    valid_x: JetValidity,
}

/// Equality compares profile and terms; jet validity is bookkeeping.
impl PartialEq for GradedSeries {
    fn eq(&self, other: &Self) -> bool {
        self.profile == other.profile && self.terms == other.terms
    }
}

/// Accumulates terms into a series, applying the profile's truncation.
pub(crate) struct TermSink {
    profile: VariableProfile,
    terms: BTreeMap<Monomial, GaussianRational>,
    valid_x: JetValidity,
}

impl TermSink {
    pub(crate) fn new(profile: VariableProfile, valid_x: JetValidity) -> Self {
        let valid_x = valid_x.min(JetValidity::Exact);
        Self { profile, terms: BTreeMap::new(), valid_x }
    }

    pub(crate) fn push(&mut self, m: Monomial, c: GaussianRational) {
        if c.is_zero() || !self.profile.admits(&m) {
            return;
        }
        let xd = m.x_deg();
        if xd > self.profile.x_order {
            self.valid_x = self.valid_x.min(JetValidity::Through(self.profile.x_order));
            return;
        }
        if !self.valid_x.admits(xd) {
            return;
        }
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                *e.get_mut() += c;
            }
        }
    }

    pub(crate) fn push_signed(&mut self, m: Monomial, c: GaussianRational, negate: bool) {
        if negate {
            self.push(m, -c)
        } else {
            self.push(m, c)
        }
    }

    pub(crate) fn limit_validity(&mut self, v: JetValidity) {
        self.valid_x = self.valid_x.min(v);
    }

    pub(crate) fn finish(self) -> GradedSeries {
        let valid_x = self.valid_x;
        let terms = self
            .terms
            .into_iter()
            .filter(|(m, c)| !c.is_zero() && valid_x.admits(m.x_deg()))
            .collect();
        GradedSeries { profile: self.profile, terms, valid_x }
    }
}

impl GradedSeries {
    /// Builds a normalized series from explicit terms, valid through
    /// `x_order`. Rejects terms outside the profile, duplicate keys and
    /// non-canonical `dx` subsets.
    pub fn make(profile: VariableProfile, terms: Vec<TermSpec>) -> Result<Self> {
        Self::make_with(profile, terms, JetValidity::Through(profile.x_order))
    }

    /// As [`make`](Self::make), but declares the `x`-dependence an exact
    /// polynomial.
    pub fn polynomial(profile: VariableProfile, terms: Vec<TermSpec>) -> Result<Self> {
        Self::make_with(profile, terms, JetValidity::Exact)
    }

    fn make_with(profile: VariableProfile, specs: Vec<TermSpec>, valid_x: JetValidity) -> Result<Self> {
        let mut terms = BTreeMap::new();
        for spec in specs {
            let m = Self::monomial_from_spec(&profile, &spec)?;
            let xd = m.x_deg();
            if !profile.admits(&m) || xd > profile.x_order {
                return Err(Error::TermExceedsTruncation {
                    term: render::monomial_string(&m, &profile),
                    limit: profile.describe(),
                });
            }
            if spec.coeff.is_zero() {
                continue;
            }
            if terms.insert(m, spec.coeff).is_some() {
                return Err(Error::DuplicateMonomial(render::monomial_string(&m, &profile)));
            }
        }
        Ok(Self { profile, terms, valid_x })
    }

    fn monomial_from_spec(profile: &VariableProfile, spec: &TermSpec) -> Result<Monomial> {
        let n = profile.n;
        let exps = |v: &[u32], what: &str| -> Result<MultiIndex> {
            if v.len() > n {
                return Err(Error::ProfileMismatch(format!(
                    "{what} exponent vector has length {} > n = {n}",
                    v.len()
                )));
            }
            let mut m = [0u8; MAX_DIM];
            for (k, &e) in v.iter().enumerate() {
                if e > 255 {
                    return Err(Error::InvalidProfile(format!("exponent {e} too large")));
                }
                m[k] = e as u8;
            }
            Ok(m)
        };
        let mut dx = 0u8;
        let mut last: Option<usize> = None;
        for &k in &spec.dx {
            if k >= n || last.is_some_and(|l| k <= l) {
                return Err(Error::NonCanonicalForm(spec.dx.clone()));
            }
            dx |= 1 << k;
            last = Some(k);
        }
        if spec.nu > 255 {
            return Err(Error::InvalidProfile(format!("nu exponent {} too large", spec.nu)));
        }
        Ok(Monomial { nu: spec.nu as u8, x: exps(&spec.x, "x")?, fiber: exps(&spec.fiber, "fiber")?, dx })
    }

    pub fn zero(profile: VariableProfile) -> Self {
        Self { profile, terms: BTreeMap::new(), valid_x: JetValidity::Exact }
    }

    pub fn constant(profile: VariableProfile, c: GaussianRational) -> Self {
        Self::monomial(profile, Monomial::ONE, c)
    }

    pub fn one(profile: VariableProfile) -> Self {
        Self::constant(profile, GaussianRational::one())
    }

    /// A single exact monomial term (dropped if the profile excludes it).
    pub fn monomial(profile: VariableProfile, m: Monomial, c: GaussianRational) -> Self {
        let mut sink = TermSink::new(profile, JetValidity::Exact);
        sink.push(m, c);
        sink.finish()
    }

    pub fn x_var(profile: VariableProfile, k: usize) -> Self {
        Self::monomial(profile, Monomial::x_only(unit_index(k)), GaussianRational::one())
    }

    pub fn fiber_var(profile: VariableProfile, k: usize) -> Self {
        Self::monomial(profile, Monomial::fiber_only(unit_index(k)), GaussianRational::one())
    }

    pub fn nu(profile: VariableProfile) -> Self {
        Self::monomial(profile, Monomial { nu: 1, ..Monomial::ONE }, GaussianRational::one())
    }

    pub fn dx(profile: VariableProfile, k: usize) -> Self {
        Self::monomial(profile, Monomial { dx: 1 << k, ..Monomial::ONE }, GaussianRational::one())
    }

    pub fn profile(&self) -> &VariableProfile {
        &self.profile
    }

    pub fn valid_x(&self) -> JetValidity {
        self.valid_x
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &GaussianRational)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficient(&self, m: &Monomial) -> GaussianRational {
        self.terms.get(m).cloned().unwrap_or_else(GaussianRational::zero)
    }

    /// Declares a weaker jet validity (never a stronger one).
    pub fn with_validity(&self, v: JetValidity) -> Self {
        self.filter_map(self.profile, self.valid_x.min(v), |m, c| Some((*m, c.clone())))
    }

    fn check_same(&self, other: &Self) -> Result<()> {
        if self.profile != other.profile {
            return Err(Error::ProfileMismatch(format!(
                "[{}] vs [{}]",
                self.profile.describe(),
                other.profile.describe()
            )));
        }
        Ok(())
    }

    /// Rebuilds the series through a term map into `profile`.
    pub(crate) fn filter_map<F>(&self, profile: VariableProfile, valid: JetValidity, mut f: F) -> Self
    where
        F: FnMut(&Monomial, &GaussianRational) -> Option<(Monomial, GaussianRational)>,
    {
        let mut sink = TermSink::new(profile, valid);
        for (m, c) in &self.terms {
            if let Some((m2, c2)) = f(m, c) {
                sink.push(m2, c2);
            }
        }
        sink.finish()
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same(other)?;
        let mut sink = TermSink::new(self.profile, self.valid_x.min(other.valid_x));
        for (m, c) in self.terms.iter().chain(other.terms.iter()) {
            sink.push(*m, c.clone());
        }
        Ok(sink.finish())
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        self.filter_map(self.profile, self.valid_x, |m, c| Some((*m, -c)))
    }

    pub fn scale(&self, s: &GaussianRational) -> Self {
        if s.is_zero() {
            return Self { terms: BTreeMap::new(), ..self.clone() };
        }
        self.filter_map(self.profile, self.valid_x, |m, c| Some((*m, c * s)))
    }

    /// Multiplies by the monomial `c·m` (left factor), with Grassmann signs.
    pub fn mul_monomial_left(&self, m: &Monomial, c: &GaussianRational) -> Self {
        self.filter_map(self.profile, self.valid_x, |tm, tc| {
            let (pm, neg) = monomial_product(m, tm)?;
            let v = c * tc;
            Some((pm, if neg { -v } else { v }))
        })
    }

    /// Graded-commutative product: even variables commute, `dx` factors
    /// anticommute. Truncated to the shared profile.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check_same(other)?;
        let mut sink = TermSink::new(self.profile, self.valid_x.min(other.valid_x));
        let cap = self.profile.deg_cap;
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                if let Some(cap) = cap {
                    if ma.total_deg() + mb.total_deg() > cap {
                        continue;
                    }
                }
                if let Some((m, neg)) = monomial_product(ma, mb) {
                    sink.push_signed(m, ca * cb, neg);
                }
            }
        }
        Ok(sink.finish())
    }

    pub fn pow(&self, e: u32) -> Result<Self> {
        let mut out = Self::one(self.profile);
        for _ in 0..e {
            out = out.mul(self)?;
        }
        Ok(out)
    }

    /// Formal partial derivative in an even variable. An `x`-derivative
    /// lowers the jet validity by one.
    pub fn partial_deriv(&self, var: Var) -> Result<Self> {
        let valid = match var {
            Var::X(_) => self.valid_x.after_derivative()?,
            _ => self.valid_x,
        };
        Ok(self.filter_map(self.profile, valid, |m, c| {
            let mut m2 = *m;
            let e = match var {
                Var::X(k) => &mut m2.x[k],
                Var::Fiber(k) => &mut m2.fiber[k],
                Var::Nu => &mut m2.nu,
            };
            if *e == 0 {
                return None;
            }
            let factor = *e as i64;
            *e -= 1;
            Some((m2, c.scale_int(factor)))
        }))
    }

    /// Higher fiber derivative `∂^α/∂(fiber)^α`.
    pub fn fiber_deriv_multi(&self, alpha: &MultiIndex) -> Self {
        self.filter_map(self.profile, self.valid_x, |m, c| {
            let mut m2 = *m;
            let mut factor = 1i64;
            for k in 0..MAX_DIM {
                let (e, a) = (m.fiber[k] as i64, alpha[k] as i64);
                if a > e {
                    return None;
                }
                for t in 0..a {
                    factor *= e - t;
                }
                m2.fiber[k] = (e - a) as u8;
            }
            Some((m2, c.scale_int(factor)))
        })
    }

    /// Contraction `i(∂/∂x^j)`: removes `dx^j` with sign `(-1)^position`.
    pub fn interior_product(&self, j: usize) -> Self {
        self.filter_map(self.profile, self.valid_x, |m, c| {
            if m.dx & (1 << j) == 0 {
                return None;
            }
            let pos = (m.dx & ((1u8 << j) - 1)).count_ones();
            let m2 = Monomial { dx: m.dx & !(1 << j), ..*m };
            Some((m2, if pos % 2 == 1 { -c } else { c.clone() }))
        })
    }

    /// Left exterior multiplication `dx^j ∧ a`.
    pub fn wedge_dx_left(&self, j: usize) -> Self {
        self.filter_map(self.profile, self.valid_x, |m, c| {
            if m.dx & (1 << j) != 0 {
                return None;
            }
            let pos = (m.dx & ((1u8 << j) - 1)).count_ones();
            let m2 = Monomial { dx: m.dx | (1 << j), ..*m };
            Some((m2, if pos % 2 == 1 { -c } else { c.clone() }))
        })
    }

    /// Homogeneous part of degree `k` in the given grading.
    pub fn component(&self, grading: Grading, k: u32) -> Self {
        self.select(|m| m.grading(grading) == k)
    }

    /// Terms with grading ≤ `k`.
    pub fn up_to(&self, grading: Grading, k: u32) -> Self {
        self.select(|m| m.grading(grading) <= k)
    }

    pub fn select<P: Fn(&Monomial) -> bool>(&self, keep: P) -> Self {
        self.filter_map(self.profile, self.valid_x, |m, c| keep(m).then(|| (*m, c.clone())))
    }

    /// Divides by `ν`, requiring every term to carry a positive `ν`-power.
    /// The top `ν`-order of the result is undetermined by the input.
    pub fn exact_div_nu(&self) -> Result<Self> {
        if let Some((m, _)) = self.terms.iter().find(|(m, _)| m.nu == 0) {
            return Err(Error::NotDivisibleByNu(render::monomial_string(m, &self.profile)));
        }
        Ok(self.filter_map(self.profile, self.valid_x, |m, c| Some((Monomial { nu: m.nu - 1, ..*m }, c.clone()))))
    }

    /// Multiplies by `ν^e`.
    pub fn mul_nu_pow(&self, e: u32) -> Self {
        self.filter_map(self.profile, self.valid_x, |m, c| Some((Monomial { nu: m.nu + e as u8, ..*m }, c.clone())))
    }

    /// The `ν = 0` part.
    pub fn nu_free(&self) -> Self {
        self.select(|m| m.nu == 0)
    }

    /// Evaluation at zero fiber variables.
    pub fn at_fiber_zero(&self) -> Self {
        self.select(|m| m.fiber_deg() == 0)
    }

    /// The coefficient series of `dx^S` (with `S` given as a bitmask).
    pub fn form_component(&self, subset: u8) -> Self {
        self.filter_map(self.profile, self.valid_x, |m, c| {
            (m.dx == subset).then(|| (Monomial { dx: 0, ..*m }, c.clone()))
        })
    }

    /// Moves the series into another profile of the same dimension,
    /// dropping what the new profile excludes.
    pub fn reprofile(&self, profile: VariableProfile) -> Result<Self> {
        if profile.n != self.profile.n {
            return Err(Error::ProfileMismatch(format!("dimension {} vs {}", self.profile.n, profile.n)));
        }
        Ok(self.filter_map(profile, self.valid_x, |m, c| Some((*m, c.clone()))))
    }

    /// Lowest and highest grading present, `None` for zero.
    pub fn grading_range(&self, g: Grading) -> Option<(u32, u32)> {
        let mut it = self.terms.keys().map(|m| m.grading(g));
        let first = it.next()?;
        Some(it.fold((first, first), |(lo, hi), d| (lo.min(d), hi.max(d))))
    }

    pub fn max_x_deg(&self) -> u32 {
        self.terms.keys().map(|m| m.x_deg()).max().unwrap_or(0)
    }

    /// First monomial (canonical order) where the two series disagree among
    /// `x`-degrees both trust. `None` means they agree.
    pub fn first_difference(&self, other: &Self) -> Option<(Monomial, GaussianRational, GaussianRational)> {
        let valid = self.valid_x.min(other.valid_x);
        let keys: std::collections::BTreeSet<&Monomial> = self.terms.keys().chain(other.terms.keys()).collect();
        keys.into_iter().filter(|m| valid.admits(m.x_deg())).find_map(|m| {
            let a = self.coefficient(m);
            let b = other.coefficient(m);
            (a != b).then_some((*m, a, b))
        })
    }

    /// Agreement modulo the jet validity of both sides.
    pub fn agrees_with(&self, other: &Self) -> bool {
        self.first_difference(other).is_none()
    }

    /// Human-readable description of the first disagreement.
    pub fn difference_report(&self, other: &Self) -> Option<String> {
        self.first_difference(other).map(|(m, a, b)| {
            format!("at {}: {} vs {}", render::monomial_string(&m, &self.profile), a, b)
        })
    }

    pub fn render_monomial(&self, m: &Monomial) -> String {
        render::monomial_string(m, &self.profile)
    }
}

impl Add for &GradedSeries {
    type Output = GradedSeries;
    /// Panics on profile mismatch; use [`GradedSeries::add`] to handle it.
    fn add(self, rhs: &GradedSeries) -> GradedSeries {
        GradedSeries::add(self, rhs).expect("series profiles must match")
    }
}

impl Sub for &GradedSeries {
    type Output = GradedSeries;
    fn sub(self, rhs: &GradedSeries) -> GradedSeries {
        GradedSeries::sub(self, rhs).expect("series profiles must match")
    }
}

impl Mul for &GradedSeries {
    type Output = GradedSeries;
    fn mul(self, rhs: &GradedSeries) -> GradedSeries {
        GradedSeries::mul(self, rhs).expect("series profiles must match")
    }
}

impl Neg for &GradedSeries {
    type Output = GradedSeries;
    fn neg(self) -> GradedSeries {
        GradedSeries::neg(self)
    }
}
