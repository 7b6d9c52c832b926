//! Driving the command-line front end in process.

use fedforge::cli::main_with_args;

fn main() {
    let mut out = std::io::stdout();
    let mut err = std::io::stderr();
    for args in [
        vec!["fedforge", "star", "--chart", "moyal2", "--f", "x1", "--g", "x2"],
        vec!["fedforge", "r", "--chart", "torsion2", "--deg", "4", "--check"],
        vec!["fedforge", "tau", "--chart", "wick2", "--deg", "4", "--f", "x1*x2", "--format", "json"],
    ] {
        let code = main_with_args(args.clone(), &mut out, &mut err);
        println!("-- {} exited {code}", args[1..].join(" "));
    }
}
