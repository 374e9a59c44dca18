// The query tester: random cube constraints for low degree, then a sampled
// bias estimate compared with a threshold.
//
// ```bash
// cargo run -p polylab --example tester
// ```

use polylab::tester::{concise_test, low_degree_test};
use polylab::{parse_polynomial, FieldSpec};

pub fn run_example() -> polylab::Result<()> {
    let f2 = FieldSpec::new(2)?;
    for (text, d, theta) in [
        ("x0*x1", 2, 0.3),
        ("x0", 2, 0.3),
        ("x0*x1*x2*x3 + x4", 3, 0.2),
        ("x0*x1*x2 + x3*x4", 3, 0.2),
    ] {
        let mut q = parse_polynomial(text, f2, 6)?;
        let v = concise_test(&mut q, d, theta, 4000, 32, 7)?;
        println!(
            "{text:>20} d={d} theta={theta}: {:?} in {:?} phase after {} queries",
            v.decision, v.phase, v.queries_used
        );
    }

    let mut q = parse_polynomial("x0*x1*x2", f2, 4)?;
    let v = low_degree_test(&mut q, 2, 3, 1);
    println!("\ntranscript of a rejected low-degree run:");
    print!("{}", v.transcript_jsonl());
    Ok(())
}

fn main() {
    if let Err(e) = run_example() {
        eprintln!("{e}");
        std::process::exit(1);
    }
}
