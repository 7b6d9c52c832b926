//! Acceptance criteria, one PASS/FAIL line each.

use std::collections::BTreeMap;
use std::process::ExitCode;
use std::time::Instant;

use num_bigint::BigInt;
use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use fedforge::dequant::{sample_functions, Dequantizer};
use fedforge::fedosov::FedosovData;
use fedforge::geometry::{preset_names, preset_with, Orders};
use fedforge::quantizer::Quantizer;
use fedforge::scalar::GaussianRational;
use fedforge::series::{FiberTag, GradedSeries, TermSpec, VariableProfile};
use fedforge::verify::{verify_chart, Report, VerifyConfig};

const K: u32 = 8;
const FIXTURES: [&str; 4] = ["moyal2", "wick2", "torsion2", "moyal2-omega"];

// Criteria whose literal statement is false; the line prints FAIL and the
// run only requires the measured alternative to hold.
const REFUTED: [u32; 1] = [5];

struct Line {
    id: u32,
    passed: bool,
    text: String,
}

fn line(id: u32, passed: bool, text: impl Into<String>) -> Line {
    Line { id, passed, text: text.into() }
}

// ═══ Independent Moyal oracle on ℚ(i)[x1, x2, ν] ═══

type OraclePoly = BTreeMap<(u32, u32, u32), GaussianRational>;

fn oracle_derive(f: &OraclePoly, d1: u32, d2: u32) -> OraclePoly {
    let mut out = OraclePoly::new();
    for (&(nu, a, b), c) in f {
        if a < d1 || b < d2 {
            continue;
        }
        let falling = |e: u32, d: u32| (0..d).map(|i| (e - i) as i64).product::<i64>();
        let c = c.scale_int(falling(a, d1) * falling(b, d2));
        *out.entry((nu, a - d1, b - d2)).or_insert_with(GaussianRational::zero) += &c;
    }
    out.retain(|_, c| !c.is_zero());
    out
}

fn oracle_mul(f: &OraclePoly, g: &OraclePoly, s: &GaussianRational, nu: u32) -> OraclePoly {
    let mut out = OraclePoly::new();
    for (&(n1, a1, b1), c1) in f {
        for (&(n2, a2, b2), c2) in g {
            let c = &(c1 * c2) * s;
            *out.entry((n1 + n2 + nu, a1 + a2, b1 + b2)).or_insert_with(GaussianRational::zero) += &c;
        }
    }
    out
}

fn binomial(n: u32, k: u32) -> i64 {
    (0..k).fold(1i64, |acc, i| acc * (n - i) as i64 / (i + 1) as i64)
}

/// `Σ_r (iν/2)^r / r! (∂₁⊗∂₂ − ∂₂⊗∂₁)^r (f ⊗ g)` through `ν^max_nu`.
fn oracle_moyal(f: &OraclePoly, g: &OraclePoly, max_nu: u32) -> OraclePoly {
    let mut out = OraclePoly::new();
    let mut fact = 1i64;
    for r in 0..=max_nu {
        if r > 0 {
            fact *= r as i64;
        }
        let pref = &GaussianRational::i_pow(r as i64) * &GaussianRational::ratio(1, (1i64 << r) * fact);
        for a in 0..=r {
            let sign = if a % 2 == 0 { 1 } else { -1 };
            let s = pref.scale_int(sign * binomial(r, a));
            let term = oracle_mul(&oracle_derive(f, r - a, a), &oracle_derive(g, a, r - a), &s, r);
            for (k, c) in term {
                *out.entry(k).or_insert_with(GaussianRational::zero) += &c;
            }
        }
    }
    out.retain(|_, c| !c.is_zero());
    out
}

fn random_oracle_poly(rng: &mut ChaCha8Rng, max_deg: u32) -> OraclePoly {
    let mut f = OraclePoly::new();
    for _ in 0..rng.gen_range(1..=5) {
        let a = rng.gen_range(0..=max_deg);
        let b = rng.gen_range(0..=max_deg - a);
        let c = GaussianRational::new(
            BigRational::new(BigInt::from(rng.gen_range(-6i64..=6)), BigInt::from(rng.gen_range(1i64..=3))),
            BigRational::from_integer(BigInt::from(rng.gen_range(-1i64..=1))),
        );
        *f.entry((0, a, b)).or_insert_with(GaussianRational::zero) += &c;
    }
    f.retain(|_, c| !c.is_zero());
    if f.is_empty() {
        f.insert((0, 1, 0), GaussianRational::one());
    }
    f
}

fn to_series(f: &OraclePoly, p: VariableProfile) -> GradedSeries {
    let terms = f.iter().map(|(&(nu, a, b), c)| TermSpec::new(c.clone()).nu(nu).x(&[a, b])).collect();
    GradedSeries::polynomial(p, terms).expect("oracle term inside profile")
}

fn criterion_1() -> Line {
    let q = Quantizer::for_geometry(&preset_with("moyal2", Orders::for_degree(K)).unwrap()).unwrap();
    let p = q.geometry().weyl_profile();
    let mut rng = ChaCha8Rng::seed_from_u64(0x4d6f79);
    let mut failure = None;
    for i in 0..20 {
        let (f, g) = (random_oracle_poly(&mut rng, 4), random_oracle_poly(&mut rng, 4));
        let expected = to_series(&oracle_moyal(&f, &g, 4), p);
        let got = q.star(&to_series(&f, p), &to_series(&g, p)).unwrap().certified_series();
        if let Some(d) = got.difference_report(&expected) {
            failure = Some(format!("pair {i}: {d}"));
            break;
        }
    }
    let ok = failure.is_none() && q.certified_order() >= 4;
    line(1, ok, format!("star on moyal2 equals the Moyal expansion for 20 pairs through nu^4{}", detail(failure)))
}

fn detail(failure: Option<String>) -> String {
    failure.map(|d| format!(" ({d})")).unwrap_or_default()
}

// ═══ Checks drawn from the per-chart reports ═══

fn require(reports: &[Report], charts: &[&str], names: &[&str]) -> Option<String> {
    for r in reports.iter().filter(|r| charts.contains(&r.chart.as_str())) {
        for name in names {
            match r.check(name) {
                Some(c) if c.passed => {}
                Some(c) => return Some(format!("{}: {} {}", r.chart, name, c.detail.clone().unwrap_or_default())),
                None => return Some(format!("{}: {} missing", r.chart, name)),
            }
        }
    }
    None
}

fn from_reports(id: u32, reports: &[Report], charts: &[&str], names: &[&str], text: &str) -> Line {
    let failure = require(reports, charts, names);
    line(id, failure.is_none(), format!("{text}{}", detail(failure)))
}

// ═══ Closed form of r with a symplectic curvature ═══

/// `c = (ν + c²)/2` solved as a power series: with `r = c(ν)θ`,
/// `θ = y¹dx² − y²dx¹`, `δr = 2c dx¹∧dx²` and `−(i/ν) r∘r = c² dx¹∧dx²`.
fn oracle_c(max_nu: usize) -> Vec<BigRational> {
    let zero = || BigRational::from_integer(BigInt::from(0));
    let mut c = vec![zero(); max_nu + 1];
    for _ in 0..=max_nu {
        let mut next = vec![zero(); max_nu + 1];
        next[1] = BigRational::new(BigInt::from(1), BigInt::from(2));
        for i in 0..=max_nu {
            for j in 0..=max_nu - i {
                next[i + j] += &c[i] * &c[j] / BigRational::from_integer(BigInt::from(2));
            }
        }
        c = next;
    }
    c
}

fn theta_series(p: VariableProfile, coeffs: &[BigRational]) -> GradedSeries {
    let mut terms = Vec::new();
    for (m, c) in coeffs.iter().enumerate() {
        if *c == BigRational::from_integer(BigInt::from(0)) {
            continue;
        }
        terms.push(TermSpec::new(GaussianRational::real(c.clone())).nu(m as u32).fiber(&[1, 0]).dx(&[1]));
        terms.push(TermSpec::new(GaussianRational::real(-c.clone())).nu(m as u32).fiber(&[0, 1]).dx(&[0]));
    }
    GradedSeries::make(p, terms).unwrap()
}

fn criterion_5() -> (Line, bool) {
    let mut lines = Vec::new();
    for k in [K, K + 2] {
        let data = FedosovData::compute(&preset_with("moyal2-omega", Orders::for_degree(k)).unwrap()).unwrap();
        let p = data.geometry().weyl_profile();
        let m_max = ((k - 1) / 2) as usize;
        let oracle = theta_series(p, &oracle_c(m_max)[..=m_max]);
        let literal = theta_series(p, &oracle_c(1)[..=1]);
        let got = data.r().series().clone();
        lines.push((got.difference_report(&literal), got.difference_report(&oracle)));
    }
    let literal_holds = lines.iter().all(|(l, _)| l.is_none());
    let oracle_holds = lines.iter().all(|(_, o)| o.is_none());
    let c: Vec<String> = oracle_c(4).iter().skip(1).map(|v| v.to_string()).collect();
    let text = format!(
        "moyal2-omega r = (nu/2)(y1 dx2 - y2 dx1) at K and K+2: {}; oracle r = c(nu)(y1 dx2 - y2 dx1), c = 1 - sqrt(1 - nu) = {} + ...: {}",
        if literal_holds { "holds" } else { "refuted" },
        c.iter().enumerate().map(|(i, v)| format!("{v}*nu^{}", i + 1)).collect::<Vec<_>>().join(" + "),
        if oracle_holds { "matches" } else { "differs" },
    );
    (line(5, literal_holds, text), oracle_holds)
}

// ═══ Negative controls ═══

fn negative_controls() -> Option<String> {
    for chart in ["torsion2", "curved2"] {
        let q = Quantizer::for_geometry(&preset_with(chart, Orders::for_degree(K)).unwrap()).unwrap();
        let d = Dequantizer::new(&q).unwrap();
        let samples = sample_functions(q.geometry().symbol_profile(FiberTag::Xi), 4, 0xbad);
        let Some(bad) = d.with_corrupted_zeta().unwrap() else {
            return Some(format!("{chart}: zeta(xi) has no nonlinear term to corrupt"));
        };
        let pipeline = bad.check_pipeline_agreement().unwrap();
        let commute = bad.check_morphisms(&samples).unwrap().into_iter().find(|c| c.name == "S-T-commute").unwrap();
        if pipeline.passed || commute.passed {
            return Some(format!("{chart}: corrupted zeta passes pipeline-agreement or S-T-commute"));
        }
        if d.with_swapped_source().unwrap().check_symplectic().unwrap().passed {
            return Some(format!("{chart}: swapped substitution passes symplectic"));
        }
    }
    None
}

fn main() -> ExitCode {
    let start = Instant::now();
    let cfg = VerifyConfig::default();
    let reports: Vec<Report> = preset_names()
        .iter()
        .map(|name| verify_chart(&preset_with(name, Orders::for_degree(K)).unwrap(), &cfg).unwrap())
        .collect();
    let all: Vec<&str> = preset_names().to_vec();

    let (c5, c5_alternative) = criterion_5();
    let mut lines = vec![
        criterion_1(),
        from_reports(2, &reports, &FIXTURES, &["associativity"], "associativity through nu^4 on F1-F4, 10 triples each"),
        from_reports(
            3,
            &reports,
            &all,
            &["C0-pointwise", "C1-antisymmetric-part", "C1-formula"],
            "C0 = fg, C1 antisymmetric part = i{f,g}, C1 = (i/2) Lambda df dg on all presets",
        ),
        from_reports(
            4,
            &reports,
            &all,
            &[
                "r-residual",
                "r-classical-residual",
                "D-squared",
                "D-classical-squared",
                "r-nu-free-is-classical",
                "delta-T",
                "delta-R-equals-nabla-T",
            ],
            "Fedosov residuals, D^2 = 0, classical limit, delta T = 0, delta R = nabla T on all presets",
        ),
        c5,
        from_reports(6, &reports, &FIXTURES, &["pipeline-agreement"], "zeta by inversion equals sigma(Z_p) by probing on F1-F4"),
        from_reports(
            7,
            &reports,
            &FIXTURES,
            &["S-multiplicative", "T-multiplicative", "S-poisson", "T-antipoisson", "S-T-commute"],
            "S, T multiplicative, Poisson and anti-Poisson, {Sf, Tg} = 0 on 10 pairs, F1-F4",
        ),
        from_reports(8, &reports, &FIXTURES, &["symplectic", "kappa-poisson"], "symplectic identity and kappa Poisson identity on F1-F4"),
        from_reports(
            9,
            &reports,
            &all,
            &["order-bounds", "L-R-natural"],
            "verify_natural for all (k, l), k <= 8, and L/R naturality on all presets",
        ),
    ];
    let controls = negative_controls();
    let stability = require(&reports, &all, &["truncation-stability"]);
    lines.push(line(
        10,
        controls.is_none() && stability.is_none(),
        format!(
            "certified coefficients stable at K+2; corrupted zeta and swapped substitution rejected{}",
            detail(stability.or(controls))
        ),
    ));

    for l in &lines {
        println!("{} criterion {:>2}: {}", if l.passed { "PASS" } else { "FAIL" }, l.id, l.text);
    }
    println!("acceptance finished in {:.1}s", start.elapsed().as_secs_f64());

    let unexpected: Vec<u32> = lines.iter().filter(|l| !l.passed && !REFUTED.contains(&l.id)).map(|l| l.id).collect();
    if !unexpected.is_empty() || !c5_alternative {
        eprintln!("unexpected failures: {unexpected:?}");
        return ExitCode::FAILURE;
    }
    ExitCode::SUCCESS
}
