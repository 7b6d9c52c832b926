//! The `fedforge` command line: chart ingestion, dispatch, text and JSON
//! output, exit codes.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crate::dequant::{self, Dequantizer};
use crate::error::{Error, Result};
use crate::fedosov::{self, FedosovData};
use crate::geometry::{parse_chart_json, preset_names, preset_with, CheckOutcome, ChartGeometry, PartialOrders};
use crate::poly::parse_polynomial;
use crate::quantizer::Quantizer;
use crate::series::{FiberTag, GradedSeries};
use crate::symbols;
use crate::verify::{verify_chart, VerifyConfig};
use crate::weyl::WeylElement;

/// Environment variable naming the directory searched for relative chart
/// paths.
pub const CHART_DIR_ENV: &str = "FEDFORGE_CHART_DIR";

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_INTERNAL: i32 = 3;
pub const EXIT_VERIFICATION: i32 = 4;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
}

/// Chart selection, truncation orders and output format.
#[derive(Clone, Debug, Args)]
pub struct ChartArgs {
    /// Preset name or path to a chart JSON file.
    #[arg(long)]
    pub chart: String,
    /// Maximal total degree K of Weyl-bundle elements.
    #[arg(long)]
    pub deg: Option<u32>,
    /// Fiber order of the dequantization series.
    #[arg(long = "fiber-order")]
    pub fiber_order: Option<u32>,
    /// Jet order in the base variables.
    #[arg(long = "x-order")]
    pub x_order: Option<u32>,
    /// Truncation order in nu.
    #[arg(long = "nu-order")]
    pub nu_order: Option<u32>,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    pub format: Format,
}

#[derive(Clone, Debug, Subcommand)]
pub enum Command {
    /// The Fedosov form r, or its classical counterpart.
    R {
        #[command(flatten)]
        chart: ChartArgs,
        #[arg(long)]
        classical: bool,
        /// Append residual and flatness verdicts.
        #[arg(long)]
        check: bool,
    },
    /// The flat section tau(f).
    Tau {
        #[command(flatten)]
        chart: ChartArgs,
        #[arg(long)]
        f: String,
        #[arg(long)]
        classical: bool,
        #[arg(long)]
        check: bool,
    },
    /// The star product f * g.
    Star {
        #[command(flatten)]
        chart: ChartArgs,
        #[arg(long)]
        f: String,
        #[arg(long)]
        g: String,
    },
    /// kappa^k = tau(x^k) without nu.
    Kappa {
        #[command(flatten)]
        chart: ChartArgs,
    },
    /// zeta_p = sigma(Z_p) by operator probing.
    Zeta {
        #[command(flatten)]
        chart: ChartArgs,
    },
    /// xi(zeta), zeta(xi), s, t and their verdicts.
    Dequantize {
        #[command(flatten)]
        chart: ChartArgs,
        #[arg(long, default_value_t = 2024)]
        seed: u64,
    },
    /// Every invariant check on the chart.
    Verify {
        #[command(flatten)]
        chart: ChartArgs,
        #[arg(long, default_value_t = 2024)]
        seed: u64,
    },
}

#[derive(Clone, Debug, Parser)]
#[command(name = "fedforge", version, about = "Exact Fedosov star products and their dequantization on a chart")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

/// A parsed invocation.
#[derive(Clone, Debug)]
pub struct RunConfig {
    pub command: Command,
}

impl RunConfig {
    pub fn chart_args(&self) -> &ChartArgs {
        match &self.command {
            Command::R { chart, .. }
            | Command::Tau { chart, .. }
            | Command::Star { chart, .. }
            | Command::Kappa { chart }
            | Command::Zeta { chart }
            | Command::Dequantize { chart, .. }
            | Command::Verify { chart, .. } => chart,
        }
    }
}

fn flag_orders(a: &ChartArgs) -> PartialOrders {
    PartialOrders { deg: a.deg, x: a.x_order, fiber: a.fiber_order, nu: a.nu_order }
}

fn resolve_path(name: &str) -> Option<PathBuf> {
    let direct = PathBuf::from(name);
    if direct.is_file() {
        return Some(direct);
    }
    let dir = std::env::var_os(CHART_DIR_ENV)?;
    let dir = Path::new(&dir);
    [dir.join(name), dir.join(format!("{name}.json"))].into_iter().find(|p| p.is_file())
}

/// Loads a preset or chart file at the orders given by the flags over the
/// file's own, and validates it.
pub fn parse_chart(args: &ChartArgs) -> Result<ChartGeometry> {
    let flags = flag_orders(args);
    let geo = if preset_names().contains(&args.chart.as_str()) {
        let orders = flags.resolve();
        orders_ok(&orders)?;
        preset_with(&args.chart, orders)?
    } else {
        let path = resolve_path(&args.chart).ok_or_else(|| Error::Parse {
            context: args.chart.clone(),
            message: format!("not a preset ({}) and no such chart file", preset_names().join(", ")),
        })?;
        let text = std::fs::read_to_string(&path)
            .map_err(|e| Error::Parse { context: path.display().to_string(), message: e.to_string() })?;
        let spec = parse_chart_json(&text, &path.display().to_string())?;
        let orders = spec.file_orders().overlay(flags).resolve();
        orders_ok(&orders)?;
        spec.build(orders)?
    };
    geo.validated()
}

fn orders_ok(o: &crate::geometry::Orders) -> Result<()> {
    if o.deg == 0 || o.x == 0 || o.fiber == 0 || o.nu == 0 {
        return Err(Error::InvalidProfile("all orders must be at least 1".into()));
    }
    Ok(())
}

/// Exit code of an error.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Parse { .. } | Error::Validation(_) | Error::InvalidProfile(_) | Error::UncertifiedOrder { .. } => {
            EXIT_INPUT
        }
        Error::NaturalityViolated { .. } | Error::HeldOutMismatch(_) => EXIT_VERIFICATION,
        _ => EXIT_INTERNAL,
    }
}

/// Command output: text lines and the equivalent JSON document.
struct Output {
    text: Vec<String>,
    json: serde_json::Map<String, Value>,
    failed: bool,
}

impl Output {
    fn new(command: &str, geo: &ChartGeometry) -> Self {
        let o = geo.orders();
        let mut json = serde_json::Map::new();
        json.insert("command".into(), json!(command));
        json.insert("chart".into(), json!(geo.name()));
        json.insert("orders".into(), json!({"deg": o.deg, "x": o.x, "fiber": o.fiber, "nu": o.nu}));
        Self { text: Vec::new(), json, failed: false }
    }

    fn line(&mut self, s: impl Into<String>) {
        self.text.push(s.into());
    }

    fn field(&mut self, key: &str, v: Value) {
        self.json.insert(key.into(), v);
    }

    fn verdicts(&mut self, checks: &[CheckOutcome]) {
        let mut list = Vec::new();
        for c in checks {
            self.failed |= !c.passed;
            let mut l = format!("{} {}", if c.passed { "PASS" } else { "FAIL" }, c.name);
            if let Some(d) = &c.detail {
                l.push_str(&format!(": {d}"));
            }
            self.line(l);
            list.push(json!({"name": c.name, "passed": c.passed, "detail": c.detail}));
        }
        let entry = self.json.entry("verdicts").or_insert_with(|| json!([]));
        if let Value::Array(a) = entry {
            a.extend(list);
        }
    }

    fn emit(self, format: Format, out: &mut dyn Write) -> std::io::Result<()> {
        match format {
            Format::Text => {
                for l in &self.text {
                    writeln!(out, "{l}")?;
                }
            }
            Format::Json => {
                writeln!(out, "{}", serde_json::to_string_pretty(&Value::Object(self.json)).expect("json"))?;
            }
        }
        Ok(())
    }
}

fn strings(v: &[GradedSeries]) -> Vec<String> {
    v.iter().map(|s| s.to_string()).collect()
}

fn check(name: &'static str, failure: Option<String>) -> CheckOutcome {
    CheckOutcome { name, passed: failure.is_none(), detail: failure }
}

fn named_series(out: &mut Output, key: &str, label: &str, series: &[GradedSeries]) {
    for (i, s) in series.iter().enumerate() {
        out.line(format!("{label}{} = {s}", i + 1));
    }
    out.field(key, json!(strings(series)));
}

fn run_r(geo: &ChartGeometry, classical: bool, with_check: bool) -> Result<Output> {
    let mut out = Output::new("r", geo);
    let data = FedosovData::compute(geo)?;
    let k = data.max_deg() as usize;
    let (label, parts): (&str, Vec<WeylElement>) = if classical {
        ("r_classical_", (0..=k).map(|m| data.r_classical_component(m)).collect())
    } else {
        ("r^", (0..=k).map(|m| data.r_component(m)).collect())
    };
    let mut comps = serde_json::Map::new();
    for (m, p) in parts.iter().enumerate() {
        if !p.is_zero() {
            let key = if classical { format!("{label}{m}") } else { format!("{label}({m})") };
            out.line(format!("{key} = {p}"));
            comps.insert(m.to_string(), json!(p.to_string()));
        }
    }
    let total = if classical { data.r_classical() } else { data.r() };
    out.line(format!("{} = {total}", if classical { "r_classical" } else { "r" }));
    out.field("classical", json!(classical));
    out.field("components", Value::Object(comps));
    out.field("total", json!(total.to_string()));
    if with_check {
        let checks = if classical {
            vec![
                check("r-classical-residual", fedosov::residual_r_classical(geo, data.r_classical())?),
                check("D-classical-squared", data.check_classical_flatness()?),
                check("r-nu-free-is-classical", data.classical_consistency()),
            ]
        } else {
            vec![
                check("r-residual", fedosov::residual_r(geo, data.r())?),
                check("D-squared", data.check_flatness()?),
                check("r-nu-free-is-classical", data.classical_consistency()),
            ]
        };
        out.verdicts(&checks);
    }
    Ok(out)
}

fn run_tau(geo: &ChartGeometry, f: &str, classical: bool, with_check: bool) -> Result<Output> {
    let mut out = Output::new("tau", geo);
    let q = Quantizer::for_geometry(geo)?;
    let f = parse_polynomial(f, geo.weyl_profile())?;
    let t = if classical { q.tau_classical(&f)? } else { q.tau(&f)? };
    let name = if classical { "tau_classical" } else { "tau" };
    out.line(format!("{name}({f}) = {t}"));
    out.field("f", json!(f.to_string()));
    out.field(name, json!(t.to_string()));
    if with_check {
        let v = if classical { q.verify_tau_classical(&f)? } else { q.verify_tau(&f)? };
        out.verdicts(&[check("tau-postconditions", v)]);
    }
    Ok(out)
}

fn run_star(geo: &ChartGeometry, f: &str, g: &str) -> Result<Output> {
    let mut out = Output::new("star", geo);
    let q = Quantizer::for_geometry(geo)?;
    let f = parse_polynomial(f, geo.weyl_profile())?;
    let g = parse_polynomial(g, geo.weyl_profile())?;
    let s = q.star(&f, &g)?;
    out.line(s.to_string());
    let coeffs: Vec<String> = (0..=s.certified_order).map(|r| s.coeffs[r as usize].to_string()).collect();
    out.field("f", json!(f.to_string()));
    out.field("g", json!(g.to_string()));
    out.field("product", json!(s.to_string()));
    out.field("coefficients", json!(coeffs));
    out.field("certified_order", json!(s.certified_order));
    Ok(out)
}

fn run_kappa(geo: &ChartGeometry) -> Result<Output> {
    let mut out = Output::new("kappa", geo);
    let q = Quantizer::for_geometry(geo)?;
    let k = q.kappa()?;
    let comps: Vec<GradedSeries> = k.components.iter().map(|c| c.series().clone()).collect();
    named_series(&mut out, "kappa", "kappa", &comps);
    out.verdicts(&[
        check("kappa-linear-part", (!k.linear_part_is_identity()).then(|| "kappa is not x + y mod y^2".into())),
        dequant::check_kappa_poisson(&q)?,
    ]);
    Ok(out)
}

fn run_zeta(geo: &ChartGeometry) -> Result<Output> {
    let mut out = Output::new("zeta", geo);
    let q = Quantizer::for_geometry(geo)?;
    let target = geo.symbol_profile(FiberTag::Xi);
    let mut zs = Vec::new();
    for p in 0..geo.dim() {
        let z = symbols::op_z(&q, p)?;
        let bounds: Vec<String> = (0..=z.nu_orders())
            .map(|r| z.order_bound(r).map_or("-".to_string(), |b| b.to_string()))
            .collect();
        out.line(format!("Z_{} differential orders by nu-order: [{}]", p + 1, bounds.join(", ")));
        zs.push(z.sigma(target)?);
    }
    let r = symbols::z_certified_order(&q);
    if r < target.fiber_order {
        return Err(Error::UncertifiedOrder { requested: target.fiber_order, certified: r });
    }
    named_series(&mut out, "zeta", "zeta", &zs);
    // Reconstruction rejects non-natural coefficients, so reaching here is the verdict.
    out.verdicts(&[check("Z-natural", None)]);
    Ok(out)
}

fn run_dequantize(geo: &ChartGeometry, seed: u64) -> Result<Output> {
    let mut out = Output::new("dequantize", geo);
    let q = Quantizer::for_geometry(geo)?;
    let d = Dequantizer::new(&q)?;
    let samples = dequant::sample_functions(geo.symbol_profile(FiberTag::Xi), 10, seed);
    let res = d.run(&samples, 2)?;
    named_series(&mut out, "zeta_of_xi", "zeta", &res.zeta_of_xi);
    named_series(&mut out, "xi_of_zeta", "xi", &res.xi_of_zeta);
    named_series(&mut out, "s", "s", &res.s);
    named_series(&mut out, "t", "t", &res.t);
    let c = res.t_minus_s_constant.as_ref().map(|c| c.to_string());
    if let Some(c) = &c {
        out.line(format!("t - s = ({c}) * omega^(kl) xi_l mod xi^2"));
    }
    out.field("t_minus_s_constant", json!(c));
    out.verdicts(&res.verdicts);
    Ok(out)
}

fn run_verify(geo: &ChartGeometry, seed: u64) -> Result<Output> {
    let mut out = Output::new("verify", geo);
    let cfg = VerifyConfig { seed, ..Default::default() };
    let report = verify_chart(geo, &cfg)?;
    let mut sections = serde_json::Map::new();
    for (name, checks) in &report.sections {
        out.line(format!("[{name}]"));
        let before = out.json.remove("verdicts");
        out.verdicts(checks);
        if let Some(v) = out.json.remove("verdicts") {
            sections.insert((*name).into(), v);
        }
        if let Some(b) = before {
            out.json.insert("verdicts".into(), b);
        }
    }
    let c = report.t_minus_s_constant.as_ref().map(|c| c.to_string());
    if let Some(c) = &c {
        out.line(format!("t - s = ({c}) * omega^(kl) xi_l mod xi^2"));
    }
    out.field("sections", Value::Object(sections));
    out.field("t_minus_s_constant", json!(c));
    out.field("passed", json!(report.passed()));
    match report.first_failure() {
        Some((s, f)) => {
            let msg = format!("first failure: [{s}] {}: {}", f.name, f.detail.clone().unwrap_or_default());
            out.line(msg.clone());
            out.field("first_failure", json!(msg));
        }
        None => out.line(format!("all {} checks passed", report.checks().count())),
    }
    Ok(out)
}

/// Runs a parsed invocation, writing results to `out` and diagnostics to
/// `err`. Returns the exit code.
pub fn run(config: &RunConfig, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let args = config.chart_args();
    let result = parse_chart(args).and_then(|geo| match &config.command {
        Command::R { classical, check, .. } => run_r(&geo, *classical, *check),
        Command::Tau { f, classical, check, .. } => run_tau(&geo, f, *classical, *check),
        Command::Star { f, g, .. } => run_star(&geo, f, g),
        Command::Kappa { .. } => run_kappa(&geo),
        Command::Zeta { .. } => run_zeta(&geo),
        Command::Dequantize { seed, .. } => run_dequantize(&geo, *seed),
        Command::Verify { seed, .. } => run_verify(&geo, *seed),
    });
    match result {
        Ok(output) => {
            let failed = output.failed;
            if let Err(e) = output.emit(args.format, out) {
                let _ = writeln!(err, "error: {e}");
                return EXIT_INTERNAL;
            }
            if failed {
                EXIT_VERIFICATION
            } else {
                EXIT_OK
            }
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
    }
}

/// Parses `argv` and runs. Usage errors print clap's message and return 1.
pub fn main_with_args<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    match Cli::try_parse_from(argv) {
        Ok(cli) => run(&RunConfig { command: cli.command }, out, err),
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let rendered = e.render().to_string();
            if code == EXIT_OK {
                let _ = write!(out, "{rendered}");
            } else {
                let _ = write!(err, "{rendered}");
            }
            code
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn call(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let code = main_with_args(std::iter::once("fedforge").chain(args.iter().copied()), &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn star_on_moyal() {
        let (code, out, _) = call(&["star", "--chart", "moyal2", "--f", "x1", "--g", "x2"]);
        assert_eq!(code, 0);
        assert_eq!(out, "x1*x2 + 1/2*i*nu\n");
    }

    #[test]
    fn usage_and_input_errors() {
        assert_eq!(call(&["star", "--chart", "moyal2"]).0, EXIT_USAGE);
        assert_eq!(call(&["bogus"]).0, EXIT_USAGE);
        assert_eq!(call(&["r", "--chart", "no-such-chart"]).0, EXIT_INPUT);
        assert_eq!(call(&["star", "--chart", "moyal2", "--f", "x3", "--g", "x1"]).0, EXIT_INPUT);
        assert_eq!(call(&["r", "--chart", "moyal2", "--deg", "1"]).0, EXIT_INPUT);
    }

    #[test]
    fn r_with_check_on_torsion() {
        let (code, out, _) = call(&["r", "--chart", "torsion2", "--deg", "4", "--check"]);
        assert_eq!(code, 0, "{out}");
        assert!(out.contains("r^(2) = 1/3*y1*y2*dx2 - 1/3*y2^2*dx1"), "{out}");
        assert!(out.contains("PASS D-squared"));
        let (code, json_out, _) = call(&["r", "--chart", "torsion2", "--deg", "4", "--format", "json"]);
        assert_eq!(code, 0);
        let v: Value = serde_json::from_str(&json_out).unwrap();
        assert_eq!(v["components"]["2"], "1/3*y1*y2*dx2 - 1/3*y2^2*dx1");
    }
}
