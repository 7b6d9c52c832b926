//! The full checklist on a chart file, at reduced sample sizes.

use fedforge::geometry::parse_chart_json;
use fedforge::verify::{verify_chart, VerifyConfig};

fn main() -> fedforge::error::Result<()> {
    let spec = parse_chart_json(include_str!("../charts/moyal-omega.json"), "moyal-omega")?;
    let geo = spec.build(spec.file_orders().resolve())?.validated()?;
    let cfg = VerifyConfig { pairs: 4, triples: 3, operator_samples: 1, stability: false, ..Default::default() };
    let report = verify_chart(&geo, &cfg)?;
    print!("{report}");
    std::process::exit(if report.passed() { 0 } else { 4 });
}
