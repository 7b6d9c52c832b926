//! Dequantization: `ξ(ζ)`, `ζ(ξ)`, the source and target maps `s`, `t`, the
//! morphisms `S`, `T`, and their identities.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::geometry::{invert_matrix, CheckOutcome, ChartGeometry, JetMatrix};
use crate::quantizer::{Kappa, Quantizer};
use crate::scalar::GaussianRational;
use crate::series::{reverse_fiber_system, FiberTag, GradedSeries, Grading, Monomial, Substitution, Var, VariableProfile};
use crate::symbols;

/// Which index of `Λ` is contracted with `ζ`: `½Λ^{kj}ζ_j` (source) or
/// `½Λ^{jk}ζ_j` (target).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Source,
    Target,
}

/// `y^k ← ½Λ^{kj}ζ_j` or `y^k ← ½Λ^{jk}ζ_j`, into `target`.
pub fn half_lambda_substitution(geo: &ChartGeometry, target: VariableProfile, side: Side) -> Result<Substitution> {
    let n = geo.dim();
    let half = GaussianRational::ratio(1, 2);
    let mut sub = Substitution::new(target);
    for k in 0..n {
        let mut acc = GradedSeries::zero(target);
        for j in 0..n {
            let lam = match side {
                Side::Source => geo.lambda(k, j),
                Side::Target => geo.lambda(j, k),
            };
            let term = lam.reprofile(target)?.mul(&GradedSeries::fiber_var(target, j))?;
            acc = acc.add(&term)?;
        }
        sub = sub.fiber(k, acc.scale(&half));
    }
    Ok(sub)
}

fn reject_forms(s: &GradedSeries, what: &str) -> Result<()> {
    if s.terms().any(|(m, _)| m.dx != 0) {
        return Err(Error::FormPartNotAllowed(format!("{what} must be a function")));
    }
    Ok(())
}

/// `ξ_p = ζ_p − r∨_p(x, ½Λ^{·j}ζ_j) + r∨_p(x, ½Λ^{j·}ζ_j)`.
pub fn xi_of_zeta(q: &Quantizer) -> Result<Vec<GradedSeries>> {
    let geo = q.geometry();
    let zp = geo.symbol_profile(FiberTag::Zeta);
    let src = half_lambda_substitution(geo, zp, Side::Source)?;
    let tgt = half_lambda_substitution(geo, zp, Side::Target)?;
    (0..geo.dim())
        .map(|p| {
            let rp = q.data().r_classical_form(p);
            let a = rp.substitute(&src)?;
            let b = rp.substitute(&tgt)?;
            GradedSeries::fiber_var(zp, p).sub(&a)?.add(&b)
        })
        .collect()
}

/// `ζ_p(x, ξ)` by reverting [`xi_of_zeta`].
pub fn zeta_of_xi(xi: &[GradedSeries]) -> Result<Vec<GradedSeries>> {
    reverse_fiber_system(xi, FiberTag::Xi)
}

/// `ζ_j ← ζ_j(x, ξ)`, from the `ζ`- to the `ξ`-presentation.
fn to_xi(zeta: &[GradedSeries]) -> Substitution {
    let xp = *zeta[0].profile();
    zeta.iter().enumerate().fold(Substitution::new(xp), |s, (j, z)| s.fiber(j, z.clone()))
}

/// `f(x ← s)`.
pub fn compose(f: &GradedSeries, s: &[GradedSeries]) -> Result<GradedSeries> {
    reject_forms(f, "composed function")?;
    if f.terms().any(|(m, _)| m.fiber_deg() > 0) {
        return Err(Error::FormPartNotAllowed("composed function must be fiber-free".into()));
    }
    let target = *s[0].profile();
    let sub = s.iter().enumerate().fold(Substitution::new(target), |acc, (k, sk)| acc.x(k, sk.clone()));
    f.reprofile(target)?.substitute(&sub)
}

/// `{f, g} = ω^{jk} ∂_j f ∂_k g` on the base.
pub fn base_poisson(geo: &ChartGeometry, f: &GradedSeries, g: &GradedSeries) -> Result<GradedSeries> {
    let p = *f.profile();
    let omega = geo.omega_upper();
    let n = geo.dim();
    let mut out = GradedSeries::zero(p);
    for j in 0..n {
        let dj = f.partial_deriv(Var::X(j))?;
        for k in 0..n {
            let w = omega[j][k].reprofile(p)?;
            if w.is_zero() {
                continue;
            }
            out = out.add(&w.mul(&dj)?.mul(&g.partial_deriv(Var::X(k))?)?)?;
        }
    }
    Ok(out)
}

/// Deterministic sample of polynomials of degree 1..=3.
pub fn sample_functions(profile: VariableProfile, count: usize, seed: u64) -> Vec<GradedSeries> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|i| symbols::random_polynomial(profile, 1 + (i % 3) as u32, &mut rng)).collect()
}

fn outcome(name: &'static str, failure: Option<String>) -> CheckOutcome {
    CheckOutcome { name, passed: failure.is_none(), detail: failure }
}

fn first_failure(items: impl IntoIterator<Item = Result<Option<String>>>) -> Result<Option<String>> {
    for item in items {
        if let Some(d) = item? {
            return Ok(Some(d));
        }
    }
    Ok(None)
}

fn compare(label: &str, a: &GradedSeries, b: &GradedSeries) -> Option<String> {
    a.difference_report(b).map(|d| format!("{label} {d}"))
}

/// `∂κ^p/∂y^k ω_{pq}(κ) ∂κ^q/∂y^l = ω_{kl}(x)` on fiber degrees `≤ K − 1`.
pub fn check_kappa_poisson(q: &Quantizer) -> Result<CheckOutcome> {
    let geo = q.geometry();
    let k_max = q.data().max_deg();
    let kp = VariableProfile { deg_cap: None, fiber_order: k_max, ..geo.weyl_profile() };
    let kappa: Vec<GradedSeries> =
        q.kappa()?.components.iter().map(|c| c.reprofile(kp)).collect::<Result<_>>()?;
    let n = geo.dim();
    let lower = geo.omega_lower()?;
    let at_kappa: JetMatrix = lower
        .iter()
        .map(|row| row.iter().map(|w| compose(&w.reprofile(kp)?, &kappa)).collect::<Result<Vec<_>>>())
        .collect::<Result<_>>()?;
    let dk: JetMatrix = kappa
        .iter()
        .map(|c| (0..n).map(|k| c.partial_deriv(Var::Fiber(k))).collect::<Result<Vec<_>>>())
        .collect::<Result<_>>()?;
    let cut = k_max.saturating_sub(1);
    for k in 0..n {
        for l in 0..n {
            let mut acc = GradedSeries::zero(kp);
            for p in 0..n {
                for r in 0..n {
                    if at_kappa[p][r].is_zero() {
                        continue;
                    }
                    acc = acc.add(&dk[p][k].mul(&at_kappa[p][r])?.mul(&dk[r][l])?)?;
                }
            }
            let want = lower[k][l].reprofile(kp)?;
            if let Some(d) = compare(&format!("({},{})", k + 1, l + 1), &acc.up_to(Grading::Sym, cut), &want) {
                return Ok(outcome("kappa-poisson", Some(d)));
            }
        }
    }
    Ok(outcome("kappa-poisson", None))
}

/// Everything the dequantization produces, in both fiber presentations.
#[derive(Clone, Debug)]
pub struct DequantizationResult {
    pub xi_of_zeta: Vec<GradedSeries>,
    pub zeta_of_xi: Vec<GradedSeries>,
    pub s: Vec<GradedSeries>,
    pub t: Vec<GradedSeries>,
    pub s_zeta: Vec<GradedSeries>,
    pub t_zeta: Vec<GradedSeries>,
    /// `c` with `t − s = c·ω^{kl}ξ_l` at fiber degree one, if proportional.
    pub t_minus_s_constant: Option<GaussianRational>,
    pub verdicts: Vec<CheckOutcome>,
}

impl DequantizationResult {
    pub fn passed(&self) -> bool {
        self.verdicts.iter().all(|v| v.passed)
    }

    pub fn first_failure(&self) -> Option<&CheckOutcome> {
        self.verdicts.iter().find(|v| !v.passed)
    }
}

/// The dequantization of one chart. Built from a [`Quantizer`]; the
/// `with_*` constructors produce altered copies for negative controls.
#[derive(Clone)]
pub struct Dequantizer<'q> {
    q: &'q Quantizer,
    kappa: Kappa,
    xi_of_zeta: Vec<GradedSeries>,
    zeta_of_xi: Vec<GradedSeries>,
    s_zeta: Vec<GradedSeries>,
    t_zeta: Vec<GradedSeries>,
    s: Vec<GradedSeries>,
    t: Vec<GradedSeries>,
}

impl<'q> Dequantizer<'q> {
    pub fn new(q: &'q Quantizer) -> Result<Self> {
        let kappa = q.kappa()?;
        let xi = xi_of_zeta(q)?;
        let zeta = zeta_of_xi(&xi)?;
        Self::assemble(q, kappa, xi, zeta, Side::Source)
    }

    fn assemble(
        q: &'q Quantizer,
        kappa: Kappa,
        xi_of_zeta: Vec<GradedSeries>,
        zeta_of_xi: Vec<GradedSeries>,
        source_side: Side,
    ) -> Result<Self> {
        let geo = q.geometry();
        let zp = geo.symbol_profile(FiberTag::Zeta);
        let src = half_lambda_substitution(geo, zp, source_side)?;
        let tgt = half_lambda_substitution(geo, zp, Side::Target)?;
        let s_zeta: Vec<GradedSeries> = kappa.components.iter().map(|k| k.substitute(&src)).collect::<Result<_>>()?;
        let t_zeta: Vec<GradedSeries> = kappa.components.iter().map(|k| k.substitute(&tgt)).collect::<Result<_>>()?;
        let back = to_xi(&zeta_of_xi);
        let s = s_zeta.iter().map(|c| c.substitute(&back)).collect::<Result<_>>()?;
        let t = t_zeta.iter().map(|c| c.substitute(&back)).collect::<Result<_>>()?;
        Ok(Self { q, kappa, xi_of_zeta, zeta_of_xi, s_zeta, t_zeta, s, t })
    }

    /// Copy whose `ζ(ξ)` has its lowest nonlinear term removed. `None` if
    /// `ζ(ξ) = ξ`.
    pub fn with_corrupted_zeta(&self) -> Result<Option<Self>> {
        let mut zeta = self.zeta_of_xi.clone();
        let Some((p, m)) = zeta
            .iter()
            .enumerate()
            .flat_map(|(p, z)| z.terms().filter(|(m, _)| m.fiber_deg() >= 2).map(move |(m, _)| (p, *m)))
            .min_by_key(|(_, m)| m.fiber_deg())
        else {
            return Ok(None);
        };
        zeta[p] = zeta[p].select(|t| *t != m);
        Self::assemble(self.q, self.kappa.clone(), self.xi_of_zeta.clone(), zeta, Side::Source).map(Some)
    }

    /// Copy whose source map contracts the wrong index of `Λ`.
    pub fn with_swapped_source(&self) -> Result<Self> {
        Self::assemble(self.q, self.kappa.clone(), self.xi_of_zeta.clone(), self.zeta_of_xi.clone(), Side::Target)
    }

    pub fn quantizer(&self) -> &Quantizer {
        self.q
    }

    pub fn geometry(&self) -> &ChartGeometry {
        self.q.geometry()
    }

    pub fn xi_of_zeta(&self) -> &[GradedSeries] {
        &self.xi_of_zeta
    }

    pub fn zeta_of_xi(&self) -> &[GradedSeries] {
        &self.zeta_of_xi
    }

    /// `s^k(x, ξ)`.
    pub fn source(&self) -> &[GradedSeries] {
        &self.s
    }

    /// `t^k(x, ξ)`.
    pub fn target(&self) -> &[GradedSeries] {
        &self.t
    }

    pub fn source_zeta(&self) -> &[GradedSeries] {
        &self.s_zeta
    }

    pub fn target_zeta(&self) -> &[GradedSeries] {
        &self.t_zeta
    }

    fn xi_profile(&self) -> VariableProfile {
        self.geometry().symbol_profile(FiberTag::Xi)
    }

    fn fiber_order(&self) -> u32 {
        self.geometry().orders().fiber
    }

    /// `Sf = f(s)`.
    pub fn s_of(&self, f: &GradedSeries) -> Result<GradedSeries> {
        compose(f, &self.s)
    }

    /// `Tf = f(t)`.
    pub fn t_of(&self, f: &GradedSeries) -> Result<GradedSeries> {
        compose(f, &self.t)
    }

    /// `ξ_p(x, ζ(x, ξ)) = ξ_p`.
    pub fn check_round_trip(&self) -> Result<CheckOutcome> {
        let back = to_xi(&self.zeta_of_xi);
        let xp = self.xi_profile();
        let failure = first_failure(self.xi_of_zeta.iter().enumerate().map(|(p, x)| {
            Ok(compare(&format!("xi{}", p + 1), &x.substitute(&back)?, &GradedSeries::fiber_var(xp, p)))
        }))?;
        Ok(outcome("round-trip", failure))
    }

    /// `ζ(ξ)` equals `σ(Z_p)` from operator probing.
    pub fn check_pipeline_agreement(&self) -> Result<CheckOutcome> {
        let probed = symbols::zeta(self.q)?;
        let failure = self
            .zeta_of_xi
            .iter()
            .zip(&probed)
            .enumerate()
            .find_map(|(p, (a, b))| compare(&format!("zeta{}", p + 1), a, b));
        Ok(outcome("pipeline-agreement", failure))
    }

    /// `s^k = x^k + ½Λ^{kl}ξ_l`, `t^k = x^k + ½Λ^{lk}ξ_l` mod `ξ²`.
    pub fn check_first_order(&self) -> Result<CheckOutcome> {
        let geo = self.geometry();
        let xp = self.xi_profile();
        let mut failure = None;
        for (side, maps, label) in [(Side::Source, &self.s, "s"), (Side::Target, &self.t, "t")] {
            let sub = half_lambda_substitution(geo, xp, side)?;
            for (k, sk) in maps.iter().enumerate() {
                let expected = GradedSeries::x_var(xp, k).add(&GradedSeries::fiber_var(xp, k).substitute(&sub)?)?;
                let low = sk.up_to(Grading::Sym, 1);
                if failure.is_none() {
                    failure = compare(&format!("{label}{}", k + 1), &low, &expected);
                }
            }
        }
        Ok(outcome("first-order", failure))
    }

    /// `s|_{ξ=0} = t|_{ξ=0} = x`.
    pub fn check_zero_section(&self) -> CheckOutcome {
        let xp = self.xi_profile();
        let failure = self.s.iter().chain(&self.t).enumerate().find_map(|(i, m)| {
            let k = i % self.s.len();
            compare(&format!("component {}", i + 1), &m.at_fiber_zero(), &GradedSeries::x_var(xp, k))
        });
        outcome("zero-section", failure)
    }

    /// The measured `c` in `t^k − s^k = c·ω^{kl}ξ_l` (mod `ξ²`), or `None`
    /// if the difference is not a constant multiple of `ω^{kl}ξ_l`.
    pub fn t_minus_s_constant(&self) -> Result<Option<GaussianRational>> {
        let xp = self.xi_profile();
        let omega = self.geometry().omega_upper();
        let n = self.s.len();
        let mut diff: JetMatrix = Vec::with_capacity(n);
        for k in 0..n {
            let d = self.t[k].sub(&self.s[k])?;
            if !d.component(Grading::Sym, 0).is_zero() {
                return Ok(None);
            }
            let row = (0..n)
                .map(|l| Ok(d.partial_deriv(Var::Fiber(l))?.at_fiber_zero()))
                .collect::<Result<Vec<_>>>()?;
            diff.push(row);
        }
        let mut c = None;
        'find: for k in 0..n {
            for l in 0..n {
                let w0 = omega[k][l].coefficient(&Monomial::ONE);
                if let Some(inv) = w0.inv() {
                    c = Some(&diff[k][l].coefficient(&Monomial::ONE) * &inv);
                    break 'find;
                }
            }
        }
        let Some(c) = c else { return Ok(None) };
        for k in 0..n {
            for l in 0..n {
                let want = omega[k][l].reprofile(xp)?.scale(&c);
                if !diff[k][l].agrees_with(&want) {
                    return Ok(None);
                }
            }
        }
        Ok(Some(c))
    }

    /// The Jacobian of `(x, ξ) ↦ (s, t)` at the zero section is invertible.
    pub fn check_joint_linear_part(&self) -> Result<CheckOutcome> {
        let n = self.s.len();
        let mut rows = Vec::with_capacity(2 * n);
        for map in self.s.iter().chain(&self.t) {
            let mut row = Vec::with_capacity(2 * n);
            for m in 0..n {
                row.push(map.partial_deriv(Var::X(m))?.at_fiber_zero().coefficient(&Monomial::ONE));
            }
            for m in 0..n {
                row.push(map.partial_deriv(Var::Fiber(m))?.at_fiber_zero().coefficient(&Monomial::ONE));
            }
            rows.push(row);
        }
        let failure = invert_matrix(&rows).is_none().then(|| "Jacobian of (s, t) is singular at the origin".to_string());
        Ok(outcome("joint-linear-part", failure))
    }

    /// `ω_{jk}(s) ds^j∧ds^k − ω_{jk}(t) dt^j∧dt^k = 2 dx^p∧dξ_p` in the
    /// variables `(x, ζ)`, on fiber degrees `≤ N_f − 1`. A two-form over the
    /// odd generators `(dx, dζ)` is held as its coefficient table
    /// `C_{ab}`, `a < b`.
    pub fn check_symplectic(&self) -> Result<CheckOutcome> {
        let n = self.s_zeta.len();
        let zp = *self.s_zeta[0].profile();
        let cut = self.fiber_order().saturating_sub(1);
        let omega: JetMatrix = self
            .geometry()
            .omega_lower()?
            .iter()
            .map(|row| row.iter().map(|w| w.reprofile(zp)).collect::<Result<Vec<_>>>())
            .collect::<Result<_>>()?;
        let jac = |maps: &[GradedSeries]| -> Result<JetMatrix> {
            maps.iter()
                .map(|m| {
                    let mut row = Vec::with_capacity(2 * n);
                    for a in 0..n {
                        row.push(m.partial_deriv(Var::X(a))?);
                    }
                    for a in 0..n {
                        row.push(m.partial_deriv(Var::Fiber(a))?);
                    }
                    Ok(row)
                })
                .collect()
        };
        // M_{ab} = Σ ω_{jk}(map) J^j_a J^k_b
        let gram = |maps: &[GradedSeries]| -> Result<JetMatrix> {
            let j = jac(maps)?;
            let w: JetMatrix = omega
                .iter()
                .map(|row| row.iter().map(|e| compose(e, maps)).collect::<Result<Vec<_>>>())
                .collect::<Result<_>>()?;
            let mut m = vec![vec![GradedSeries::zero(zp); 2 * n]; 2 * n];
            for a in 0..2 * n {
                for b in 0..2 * n {
                    let mut acc = GradedSeries::zero(zp);
                    for p in 0..n {
                        for q in 0..n {
                            if w[p][q].is_zero() {
                                continue;
                            }
                            acc = acc.add(&w[p][q].mul(&j[p][a])?.mul(&j[q][b])?)?;
                        }
                    }
                    m[a][b] = acc;
                }
            }
            Ok(m)
        };
        let ms = gram(&self.s_zeta)?;
        let mt = gram(&self.t_zeta)?;
        let mut rhs = vec![vec![GradedSeries::zero(zp); 2 * n]; 2 * n];
        for p in 0..n {
            for m in 0..n {
                rhs[p][m] = self.xi_of_zeta[p].partial_deriv(Var::X(m))?.scale(&2.into());
                rhs[p][n + m] = self.xi_of_zeta[p].partial_deriv(Var::Fiber(m))?.scale(&2.into());
            }
        }
        let label = |a: usize| if a < n { format!("dx{}", a + 1) } else { format!("dzeta{}", a - n + 1) };
        for a in 0..2 * n {
            for b in a + 1..2 * n {
                let lhs = ms[a][b].sub(&ms[b][a])?.sub(&mt[a][b])?.add(&mt[b][a])?;
                let right = rhs[a][b].sub(&rhs[b][a])?;
                let l = lhs.up_to(Grading::Sym, cut);
                let r = right.up_to(Grading::Sym, cut);
                if let Some(d) = compare(&format!("{}^{}", label(a), label(b)), &l, &r) {
                    return Ok(outcome("symplectic", Some(d)));
                }
            }
        }
        Ok(outcome("symplectic", None))
    }

    /// Morphism identities on consecutive pairs of `samples`.
    pub fn check_morphisms(&self, samples: &[GradedSeries]) -> Result<Vec<CheckOutcome>> {
        let geo = self.geometry();
        let xp = self.xi_profile();
        let cut = self.fiber_order().saturating_sub(1);
        let samples: Vec<GradedSeries> = samples.iter().map(|f| f.reprofile(xp)).collect::<Result<_>>()?;
        let sf: Vec<GradedSeries> = samples.iter().map(|f| self.s_of(f)).collect::<Result<_>>()?;
        let tf: Vec<GradedSeries> = samples.iter().map(|f| self.t_of(f)).collect::<Result<_>>()?;
        let pairs: Vec<(usize, usize)> = (0..samples.len()).map(|i| (i, (i + 1) % samples.len())).collect();
        let cutb = |s: GradedSeries| s.up_to(Grading::Sym, cut);
        let run = |name: &'static str, check: &dyn Fn(usize, usize) -> Result<Option<String>>| -> Result<CheckOutcome> {
            let failure = first_failure(pairs.iter().map(|&(i, j)| {
                Ok(check(i, j)?.map(|d| format!("f = {}, g = {}: {d}", samples[i], samples[j])))
            }))?;
            Ok(outcome(name, failure))
        };
        Ok(vec![
            run("S-multiplicative", &|i, j| {
                let fg = samples[i].mul(&samples[j])?;
                Ok(compare("S(fg) vs Sf*Sg", &self.s_of(&fg)?, &sf[i].mul(&sf[j])?))
            })?,
            run("T-multiplicative", &|i, j| {
                let fg = samples[i].mul(&samples[j])?;
                Ok(compare("T(fg) vs Tf*Tg", &self.t_of(&fg)?, &tf[i].mul(&tf[j])?))
            })?,
            run("S-poisson", &|i, j| {
                let b = base_poisson(geo, &samples[i], &samples[j])?;
                let lhs = cutb(self.s_of(&b)?);
                Ok(compare("S{f,g} vs {Sf,Sg}", &lhs, &cutb(symbols::poisson_tstar(&sf[i], &sf[j])?)))
            })?,
            run("T-antipoisson", &|i, j| {
                let b = base_poisson(geo, &samples[i], &samples[j])?;
                let lhs = cutb(self.t_of(&b)?);
                Ok(compare("T{f,g} vs -{Tf,Tg}", &lhs, &cutb(symbols::poisson_tstar(&tf[i], &tf[j])?.neg())))
            })?,
            run("S-T-commute", &|i, j| {
                let br = cutb(symbols::poisson_tstar(&sf[i], &tf[j])?);
                Ok((!br.is_zero()).then(|| format!("{{Sf,Tg}} = {br}")))
            })?,
        ])
    }

    /// `Sf = σ(L_f)`, `Tf = σ(R_f)` and `Sf = τ∨(f)(x, ½Λ^{·j}ζ_j)` on the
    /// `ν`-orders the operators certify.
    pub fn check_symbol_routes(&self, samples: &[GradedSeries]) -> Result<Vec<CheckOutcome>> {
        let q = self.q;
        let geo = self.geometry();
        let xp = self.xi_profile();
        let zp = geo.symbol_profile(FiberTag::Zeta);
        let cut = self.fiber_order().min(q.certified_order());
        let src = half_lambda_substitution(geo, zp, Side::Source)?;
        let mut corollary = None;
        let mut left = None;
        let mut right = None;
        for f in samples {
            let fw = f.reprofile(geo.weyl_profile())?;
            if corollary.is_none() {
                let direct = q.tau_classical(&fw)?.substitute(&src)?;
                corollary = compare(&format!("f = {f}:"), &direct, &compose(&f.reprofile(zp)?, &self.s_zeta)?);
            }
            if left.is_none() {
                let sigma = symbols::op_l_of(q, &fw)?.sigma(xp)?.up_to(Grading::Sym, cut);
                left = compare(&format!("f = {f}:"), &sigma, &self.s_of(f)?.up_to(Grading::Sym, cut));
            }
            if right.is_none() {
                let sigma = symbols::op_r_of(q, &fw)?.sigma(xp)?.up_to(Grading::Sym, cut);
                right = compare(&format!("f = {f}:"), &sigma, &self.t_of(f)?.up_to(Grading::Sym, cut));
            }
        }
        Ok(vec![
            outcome("S-corollary", corollary),
            outcome("S-symbol-of-L", left),
            outcome("T-symbol-of-R", right),
        ])
    }

    /// Runs every check. `samples` feed the morphism checks; the first
    /// `symbol_samples` of them also feed the operator-symbol routes.
    pub fn run(&self, samples: &[GradedSeries], symbol_samples: usize) -> Result<DequantizationResult> {
        let mut verdicts = vec![
            self.check_round_trip()?,
            self.check_first_order()?,
            self.check_zero_section(),
            self.check_joint_linear_part()?,
        ];
        let c = self.t_minus_s_constant()?;
        verdicts.push(outcome(
            "t-minus-s-proportional",
            c.is_none().then(|| "t - s is not a constant multiple of omega^{kl} xi_l".to_string()),
        ));
        verdicts.push(self.check_symplectic()?);
        verdicts.extend(self.check_morphisms(samples)?);
        verdicts.push(self.check_pipeline_agreement()?);
        let k = symbol_samples.min(samples.len());
        if k > 0 {
            verdicts.extend(self.check_symbol_routes(&samples[..k])?);
        }
        Ok(DequantizationResult {
            xi_of_zeta: self.xi_of_zeta.clone(),
            zeta_of_xi: self.zeta_of_xi.clone(),
            s: self.s.clone(),
            t: self.t.clone(),
            s_zeta: self.s_zeta.clone(),
            t_zeta: self.t_zeta.clone(),
            t_minus_s_constant: c,
            verdicts,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{preset_with, Orders};
    use crate::poly::parse_polynomial;

    fn quant(name: &str, k: u32, fiber: u32) -> Quantizer {
        Quantizer::for_geometry(&preset_with(name, Orders { fiber, ..Orders::for_degree(k) }).unwrap()).unwrap()
    }

    fn strings(v: &[GradedSeries]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn flat_maps() {
        let q = quant("moyal2", 4, 2);
        let d = Dequantizer::new(&q).unwrap();
        assert_eq!(strings(d.xi_of_zeta()), ["zeta1", "zeta2"]);
        assert_eq!(strings(d.zeta_of_xi()), ["xi1", "xi2"]);
        assert_eq!(strings(d.source()), ["1/2*xi2 + x1", "-1/2*xi1 + x2"]);
        assert_eq!(strings(d.target()), ["-1/2*xi2 + x1", "1/2*xi1 + x2"]);
        let f = parse_polynomial("x1", q.geometry().symbol_profile(FiberTag::Xi)).unwrap();
        assert_eq!(d.s_of(&f).unwrap().to_string(), "1/2*xi2 + x1");
        assert_eq!(d.t_minus_s_constant().unwrap(), Some(GaussianRational::integer(-1)));
        assert!(d.check_symplectic().unwrap().passed);
        assert!(check_kappa_poisson(&q).unwrap().passed);
        assert!(!d.with_swapped_source().unwrap().check_symplectic().unwrap().passed);
    }

    #[test]
    fn wick_maps() {
        let q = quant("wick2", 4, 2);
        let d = Dequantizer::new(&q).unwrap();
        assert_eq!(strings(d.source()), ["xi2 + x1", "x2"]);
        assert_eq!(strings(d.target()), ["x1", "xi1 + x2"]);
    }

    #[test]
    fn torsion_quadratic_correction() {
        let q = quant("torsion2", 6, 3);
        let d = Dequantizer::new(&q).unwrap();
        // Λ antisymmetric: y ← ±½Λζ, so even fiber degrees of r∨ cancel.
        let quad = |s: &GradedSeries| s.component(Grading::Sym, 2);
        let xp = q.geometry().symbol_profile(FiberTag::Zeta);
        let r2 = q.data().r_classical_component(2);
        assert_eq!(r2.to_string(), "1/3*y1*y2*dx2 - 1/3*y2^2*dx1");
        for side in [Side::Source, Side::Target] {
            let sub = half_lambda_substitution(q.geometry(), xp, side).unwrap();
            let r1 = r2.form_component(1).substitute(&sub).unwrap();
            assert_eq!(r1.to_string(), "-1/12*zeta1^2");
        }
        assert!(d.xi_of_zeta().iter().all(|x| quad(x).is_zero()));
        assert_eq!(strings(d.xi_of_zeta()), ["zeta1 + 1/144*zeta1^3", "zeta2 + 1/144*zeta1^2*zeta2"]);
        let samples = sample_functions(q.geometry().symbol_profile(FiberTag::Xi), 4, 7);
        let res = d.run(&samples, 1).unwrap();
        assert!(res.passed(), "{:?}", res.first_failure());
        assert!(check_kappa_poisson(&q).unwrap().passed);
        let bad = d.with_corrupted_zeta().unwrap().expect("nonlinear term");
        let checks = bad.check_morphisms(&samples).unwrap();
        assert!(!checks.iter().find(|c| c.name == "S-T-commute").unwrap().passed);
    }
}
