//! The full invariant checklist for one chart.

use std::fmt;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::dequant::{self, Dequantizer};
use crate::error::Result;
use crate::fedosov::{self, FedosovData, SumOrder};
use crate::geometry::{CheckOutcome, ChartGeometry, Orders};
use crate::quantizer::Quantizer;
use crate::scalar::GaussianRational;
use crate::series::{FiberTag, GradedSeries, Grading, Var, VariableProfile};
use crate::symbols::{self, NaturalDiffOp};
use crate::weyl::{self, WeylElement};

/// Sample sizes and the seed of the pseudo-random inputs.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct VerifyConfig {
    pub seed: u64,
    /// Function pairs for the star-product and morphism checks.
    pub pairs: usize,
    /// Triples for associativity.
    pub triples: usize,
    /// Functions whose `L_f`, `R_f` are reconstructed by probing.
    pub operator_samples: usize,
    /// Recompute at `K + 2` and compare certified coefficients.
    pub stability: bool,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self { seed: 2024, pairs: 10, triples: 10, operator_samples: 2, stability: true }
    }
}

/// Named check outcomes grouped by section.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Report {
    pub chart: String,
    pub sections: Vec<(&'static str, Vec<CheckOutcome>)>,
    /// The measured constant `c` in `t − s = c·ω^{kl}ξ_l`.
    pub t_minus_s_constant: Option<GaussianRational>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.checks().all(|c| c.passed)
    }

    pub fn checks(&self) -> impl Iterator<Item = &CheckOutcome> {
        self.sections.iter().flat_map(|(_, c)| c.iter())
    }

    pub fn check(&self, name: &str) -> Option<&CheckOutcome> {
        self.checks().find(|c| c.name == name)
    }

    pub fn first_failure(&self) -> Option<(&'static str, &CheckOutcome)> {
        self.sections.iter().find_map(|(s, cs)| cs.iter().find(|c| !c.passed).map(|c| (*s, c)))
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "chart {}", self.chart)?;
        for (section, checks) in &self.sections {
            writeln!(f, "[{section}]")?;
            for c in checks {
                write!(f, "  {} {}", if c.passed { "PASS" } else { "FAIL" }, c.name)?;
                if let Some(d) = &c.detail {
                    write!(f, ": {d}")?;
                }
                writeln!(f)?;
            }
        }
        if let Some(c) = &self.t_minus_s_constant {
            writeln!(f, "t - s = ({c}) * omega^(kl) xi_l mod xi^2")?;
        }
        Ok(())
    }
}

fn outcome(name: &'static str, failure: Option<String>) -> CheckOutcome {
    CheckOutcome { name, passed: failure.is_none(), detail: failure }
}

/// Turns an error of a check into a failed verdict.
fn guarded(name: &'static str, f: impl FnOnce() -> Result<Option<String>>) -> CheckOutcome {
    match f() {
        Ok(failure) => outcome(name, failure),
        Err(e) => outcome(name, Some(format!("error: {e}"))),
    }
}

fn first<T>(items: impl IntoIterator<Item = T>, f: impl Fn(T) -> Result<Option<String>>) -> Result<Option<String>> {
    for item in items {
        if let Some(d) = f(item)? {
            return Ok(Some(d));
        }
    }
    Ok(None)
}

fn compare(label: &str, a: &GradedSeries, b: &GradedSeries) -> Option<String> {
    a.difference_report(b).map(|d| format!("{label} {d}"))
}

fn op_compare(label: &str, a: &NaturalDiffOp, b: &NaturalDiffOp) -> Option<String> {
    a.difference_report(b).map(|d| format!("{label} {d}"))
}

/// Random polynomials of degree `≤ max_deg` in the Weyl profile.
pub fn random_functions(profile: VariableProfile, count: usize, max_deg: u32, seed: u64) -> Vec<GradedSeries> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|i| symbols::random_polynomial(profile, 1 + (i as u32 % max_deg), &mut rng)).collect()
}

/// `(i/2) Λ^{jk} ∂_j f ∂_k g`.
pub fn c1_formula(geo: &ChartGeometry, f: &GradedSeries, g: &GradedSeries) -> Result<GradedSeries> {
    let p = *f.profile();
    let n = geo.dim();
    let mut out = GradedSeries::zero(p);
    for j in 0..n {
        for k in 0..n {
            let lam = geo.lambda(j, k).reprofile(p)?;
            if lam.is_zero() {
                continue;
            }
            let term = lam.mul(&f.partial_deriv(Var::X(j))?)?.mul(&g.partial_deriv(Var::X(k))?)?;
            out = out.add(&term)?;
        }
    }
    Ok(out.scale(&(&GaussianRational::ratio(1, 2) * &GaussianRational::i())))
}

fn geometry_section(geo: &ChartGeometry) -> Vec<CheckOutcome> {
    let mut out = geo.validate().checks;
    out.push(guarded("delta-T", || {
        let d = weyl::delta(&geo.element_t()?);
        Ok((!d.is_zero()).then(|| format!("delta T = {d}")))
    }));
    out.push(guarded("delta-R-equals-nabla-T", || {
        let lhs = weyl::delta(&geo.element_r()?);
        let rhs = weyl::nabla_ext(geo, &geo.element_t()?)?;
        Ok(compare("delta R vs nabla T", &lhs, &rhs))
    }));
    out
}

fn fedosov_section(data: &FedosovData) -> Vec<CheckOutcome> {
    let geo = data.geometry();
    vec![
        guarded("r-residual", || fedosov::residual_r(geo, data.r())),
        guarded("r-classical-residual", || fedosov::residual_r_classical(geo, data.r_classical())),
        guarded("D-squared", || data.check_flatness()),
        guarded("D-classical-squared", || data.check_classical_flatness()),
        outcome("r-nu-free-is-classical", data.classical_consistency()),
        guarded("sum-order-invariance", || {
            let rev = fedosov::compute_r_ordered(geo, SumOrder::Reverse)?;
            let rev_c = fedosov::compute_r_classical_ordered(geo, SumOrder::Reverse)?;
            let a = first(rev.iter().enumerate(), |(k, part)| {
                Ok(compare(&format!("r^({k})"), part, &data.r_component(k)))
            })?;
            if a.is_some() {
                return Ok(a);
            }
            first(rev_c.iter().enumerate(), |(m, part)| {
                Ok(compare(&format!("r_classical_{m}"), part, &data.r_classical_component(m)))
            })
        }),
    ]
}

fn quantizer_section(q: &Quantizer, cfg: &VerifyConfig) -> Vec<CheckOutcome> {
    let geo = q.geometry();
    let p = geo.weyl_profile();
    let fs = random_functions(p, cfg.pairs, 3, cfg.seed);
    let gs = random_functions(p, cfg.pairs, 3, cfg.seed ^ 0x9e37);
    let hs = random_functions(p, cfg.triples, 2, cfg.seed ^ 0x51ed);
    let r = q.certified_order();
    let mut out = vec![
        guarded("tau-postconditions", || first(fs.iter(), |f| Ok(q.verify_tau(f)?.map(|d| format!("f = {f}: {d}"))))),
        guarded("tau-classical-postconditions", || {
            first(fs.iter(), |f| Ok(q.verify_tau_classical(f)?.map(|d| format!("f = {f}: {d}"))))
        }),
        guarded("tau-nu-free-is-classical", || {
            first(fs.iter(), |f| {
                let a = q.tau(f)?.nu_free().up_to(Grading::Sym, q.data().max_deg());
                Ok(compare(&format!("f = {f}:"), &a, q.tau_classical(f)?.series()))
            })
        }),
        guarded("kappa-linear-part", || {
            let k = q.kappa()?;
            Ok((!k.linear_part_is_identity()).then(|| "kappa is not x + y mod y^2".to_string()))
        }),
    ];
    let pairs: Vec<(&GradedSeries, &GradedSeries)> = fs.iter().zip(&gs).collect();
    out.push(guarded("C0-pointwise", || {
        first(pairs.iter(), |(f, g)| Ok(compare(&format!("f = {f}, g = {g}:"), &q.extract_c(0, f, g)?, &f.mul(g)?)))
    }));
    out.push(guarded("C1-antisymmetric-part", || {
        first(pairs.iter(), |(f, g)| {
            let lhs = q.extract_c(1, f, g)?.sub(&q.extract_c(1, g, f)?)?;
            let rhs = dequant::base_poisson(geo, f, g)?.scale(&GaussianRational::i());
            Ok(compare(&format!("f = {f}, g = {g}:"), &lhs, &rhs))
        })
    }));
    out.push(guarded("C1-formula", || {
        first(pairs.iter(), |(f, g)| {
            Ok(compare(&format!("f = {f}, g = {g}:"), &q.extract_c(1, f, g)?, &c1_formula(geo, f, g)?))
        })
    }));
    out.push(guarded("associativity", || {
        first(0..cfg.triples, |i| {
            let (f, g, h) = (&fs[i % fs.len()], &gs[i % gs.len()], &hs[i]);
            let fg = q.star(f, g)?.certified_series();
            let gh = q.star(g, h)?.certified_series();
            let left = q.star(&fg, h)?;
            let right = q.star(f, &gh)?;
            first(0..=r, |k| {
                Ok(compare(&format!("f = {f}, g = {g}, h = {h} at nu^{k}:"), left.coefficient(k)?, right.coefficient(k)?))
            })
        })
    }));
    out.push(guarded("order-bounds", || {
        let k_max = q.data().max_deg();
        first((1..=k_max).flat_map(|k| (0..=(k - 1) / 2).map(move |l| (k, l))), |(k, l)| {
            let v = q.verify_natural(k, l)?;
            Ok((!v.passed).then(|| format!("(k, l) = ({k}, {l}): order {:?} exceeds {}", v.observed, v.bound)))
        })
    }));
    out
}

fn symbols_section(q: &Quantizer, cfg: &VerifyConfig) -> Vec<CheckOutcome> {
    let geo = q.geometry();
    let n = geo.dim();
    let wp = geo.weyl_profile();
    let op = symbols::operator_profile(q);
    let xp = geo.symbol_profile(FiberTag::Xi);
    let fs = random_functions(wp, cfg.operator_samples.max(2), 2, cfg.seed ^ 0x0b5);
    let mut out = vec![guarded("L-of-one-is-identity", || {
        let l1 = symbols::op_l(q, &WeylElement::new(GradedSeries::one(wp)))?;
        Ok(op_compare("L[1] vs id", &l1, &NaturalDiffOp::identity(op, l1.nu_orders())))
    })];
    out.push(guarded("zeta-first-order", || {
        let z = symbols::zeta(q)?;
        first(0..n, |p| Ok(compare(&format!("zeta{}", p + 1), &z[p].up_to(Grading::Sym, 1), &GradedSeries::fiber_var(xp, p))))
    }));
    out.push(guarded("Z-via-L-minus-R", || {
        let lower = geo.omega_lower()?;
        let diffs: Vec<NaturalDiffOp> = (0..n)
            .map(|p| {
                let y = WeylElement::new(GradedSeries::fiber_var(wp, p));
                symbols::op_l(q, &y)?.sub(&symbols::op_r(q, &y)?)
            })
            .collect::<Result<_>>()?;
        first(0..n, |qi| {
            let z = symbols::op_z(q, qi)?;
            let mut acc = NaturalDiffOp::from_coefficients(op, diffs[0].nu_orders(), Default::default())?;
            for p in 0..n {
                acc = acc.add(&diffs[p].scale_by(&lower[qi][p])?)?;
            }
            Ok(op_compare(&format!("Z_{}", qi + 1), &z, &acc))
        })
    }));
    out.push(guarded("Z-operator-identity", || {
        first(0..n, |p| {
            let rp = q.data().r_form(p);
            let z = symbols::op_z(q, p)?;
            let lhs = NaturalDiffOp::i_nu_partial(op, z.nu_orders(), p)
                .sub(&z)?
                .add(&symbols::op_l(q, &rp)?)?
                .sub(&symbols::op_r(q, &rp)?)?;
            Ok((!lhs.is_zero()).then(|| format!("p = {}: {lhs}", p + 1)))
        })
    }));
    let ops: Result<Vec<(NaturalDiffOp, NaturalDiffOp)>> =
        fs.iter().map(|f| Ok((symbols::op_l_of(q, f)?, symbols::op_r_of(q, f)?))).collect();
    let ops = match ops {
        Ok(o) => o,
        Err(e) => {
            out.push(outcome("L-R-natural", Some(format!("error: {e}"))));
            return out;
        }
    };
    out.push(outcome("L-R-natural", None));
    let m = ops.len();
    out.push(guarded("L-R-commute", || {
        first(0..m, |i| {
            let (l, _) = &ops[i];
            let (_, r) = &ops[(i + 1) % m];
            let c = l.compose(r)?.sub(&r.compose(l)?)?;
            Ok((!c.is_zero()).then(|| format!("f = {}, g = {}: [L_f, R_g] = {c}", fs[i], fs[(i + 1) % m])))
        })
    }));
    out.push(guarded("symbol-multiplicative", || {
        first(0..m, |i| {
            let (a, b) = (&ops[i].0, &ops[(i + 1) % m].0);
            let lhs = a.compose(b)?.sigma(xp)?;
            let rhs = a.sigma(xp)?.mul(&b.sigma(xp)?)?.up_to(Grading::Sym, a.nu_orders().min(b.nu_orders()));
            Ok(compare(&format!("sigma(L_f L_g), f = {}:", fs[i]), &lhs, &rhs))
        })
    }));
    out.push(guarded("commutator-symbol-law", || {
        first(0..m, |i| {
            let (a, b) = (&ops[i].0, &ops[(i + 1) % m].0);
            let c = a.scaled_commutator(b)?;
            let lhs = c.sigma(xp)?;
            let rhs = symbols::poisson_tstar(&a.sigma(xp)?, &b.sigma(xp)?)?.up_to(Grading::Sym, c.nu_orders());
            Ok(compare(&format!("sigma((1/i nu)[L_f, L_g]), f = {}:", fs[i]), &lhs, &rhs))
        })
    }));
    out.push(guarded("symbol-depends-on-nu-free-part", || {
        first(0..m, |i| {
            let w = q.tau(&fs[i])?;
            let shifted = WeylElement::new(w.add(&GradedSeries::fiber_var(wp, 0).mul_nu_pow(1))?);
            let a = symbols::op_l(q, &shifted)?.sigma(xp)?;
            let b = ops[i].0.sigma(xp)?;
            let c = symbols::op_r(q, &shifted)?.sigma(xp)?;
            let d = ops[i].1.sigma(xp)?;
            Ok(compare("L", &a, &b).or_else(|| compare("R", &c, &d)))
        })
    }));
    out
}

fn dequant_section(q: &Quantizer, cfg: &VerifyConfig) -> (Vec<CheckOutcome>, Option<GaussianRational>) {
    let xp = q.geometry().symbol_profile(FiberTag::Xi);
    let samples = dequant::sample_functions(xp, cfg.pairs, cfg.seed ^ 0xd0);
    let mut out = Vec::new();
    let mut constant = None;
    match Dequantizer::new(q).and_then(|d| d.run(&samples, cfg.operator_samples)) {
        Ok(res) => {
            constant = res.t_minus_s_constant.clone();
            out.extend(res.verdicts);
        }
        Err(e) => out.push(outcome("dequantization", Some(format!("error: {e}")))),
    }
    out.push(match dequant::check_kappa_poisson(q) {
        Ok(c) => c,
        Err(e) => outcome("kappa-poisson", Some(format!("error: {e}"))),
    });
    (out, constant)
}

/// Orders two degrees higher in `Deg`, with the `x` and `ν` orders raised
/// to match and the fiber order kept.
pub fn raised_orders(o: Orders) -> Orders {
    Orders { deg: o.deg + 2, x: o.x + 2, fiber: o.fiber, nu: o.nu + 1 }
}

/// Every certified coefficient at `K` against a recomputation at `K + 2`.
pub fn truncation_stability(q: &Quantizer, samples: &[GradedSeries]) -> Result<Option<String>> {
    let geo = q.geometry();
    let k = q.data().max_deg();
    let hi = Quantizer::for_geometry(&geo.with_orders(raised_orders(geo.orders()))?)?;
    let lo_p = geo.weyl_profile();
    let d = first(0..=k as usize, |i| {
        let a = q.data().r_component(i);
        let b = hi.data().r_component(i).reprofile(lo_p)?;
        let c = q.data().r_classical_component(i);
        let e = hi.data().r_classical_component(i).reprofile(lo_p)?;
        Ok(compare(&format!("r^({i})"), &a, &b).or_else(|| compare(&format!("r_classical_{i}"), &c, &e)))
    })?;
    if d.is_some() {
        return Ok(d);
    }
    let d = first(samples.windows(2), |w| {
        let (f, g) = (&w[0], &w[1]);
        let a = q.star(f, g)?;
        let b = hi.star(&f.reprofile(hi.geometry().weyl_profile())?, &g.reprofile(hi.geometry().weyl_profile())?)?;
        first(0..=q.certified_order(), |r| {
            let br = b.coefficient(r)?.reprofile(lo_p)?;
            Ok(compare(&format!("C_{r}(f, g), f = {f}, g = {g}:"), a.coefficient(r)?, &br))
        })
    })?;
    if d.is_some() {
        return Ok(d);
    }
    let za = symbols::zeta(q)?;
    let zb = symbols::zeta(&hi)?;
    let xp = geo.symbol_profile(FiberTag::Xi);
    first(0..za.len(), |p| Ok(compare(&format!("zeta{}", p + 1), &za[p], &zb[p].reprofile(xp)?)))
}

/// Runs the full checklist on a chart. Geometry failures stop the run
/// before the Fedosov stage.
pub fn verify_chart(geo: &ChartGeometry, cfg: &VerifyConfig) -> Result<Report> {
    let mut report = Report { chart: geo.name().to_string(), ..Default::default() };
    let g = geometry_section(geo);
    let geometry_ok = g.iter().all(|c| c.passed);
    report.sections.push(("geometry", g));
    if !geometry_ok {
        return Ok(report);
    }
    let q = match Quantizer::for_geometry(geo) {
        Ok(q) => q,
        Err(e) => {
            report.sections.push(("fedosov", vec![outcome("fedosov-data", Some(format!("error: {e}")))]));
            return Ok(report);
        }
    };
    report.sections.push(("fedosov", fedosov_section(q.data())));
    report.sections.push(("quantizer", quantizer_section(&q, cfg)));
    report.sections.push(("symbols", symbols_section(&q, cfg)));
    let (d, c) = dequant_section(&q, cfg);
    report.sections.push(("dequantization", d));
    report.t_minus_s_constant = c;
    if cfg.stability {
        let samples = random_functions(geo.weyl_profile(), 3, 3, cfg.seed ^ 0x57ab);
        let s = guarded("truncation-stability", || truncation_stability(&q, &samples));
        report.sections.push(("stability", vec![s]));
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::preset_with;

    #[test]
    fn small_checklist_passes_on_torsion_fixture() {
        let geo = preset_with("torsion2", Orders::for_degree(4)).unwrap();
        let geo = geo.with_orders(Orders { fiber: 2, ..geo.orders() }).unwrap();
        let cfg = VerifyConfig { pairs: 3, triples: 2, operator_samples: 1, ..Default::default() };
        let report = verify_chart(&geo, &cfg).unwrap();
        assert!(report.passed(), "{report}");
        assert_eq!(report.t_minus_s_constant, Some(GaussianRational::integer(-1)));
        assert!(report.check("truncation-stability").is_some());
    }
}
