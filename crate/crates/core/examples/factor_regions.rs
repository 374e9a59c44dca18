// Regions of a factor, their uniformity, and exact function-of checks.
//
// ```bash
// cargo run -p polylab --example factor_regions
// ```

use polylab::factor::{is_function_of, region_decompose, uniformity_report, Factor, FunctionOf};
use polylab::{parse_polynomial, FieldSpec};

pub fn run_example() -> polylab::Result<()> {
    let f2 = FieldSpec::new(2)?;
    let p = |s: &str| parse_polynomial(s, f2, 4);

    let linear = Factor::new(f2, 4, vec![p("x0 + x1")?, p("x2")?])?;
    let and = Factor::new(f2, 4, vec![p("x0*x1")?])?;
    for (name, g) in [("independent linear", &linear), ("x0*x1", &and)] {
        let map = region_decompose(g)?;
        let u = uniformity_report(g)?;
        println!(
            "{name}: counts {:?}, max relative deviation {}",
            map.counts(),
            u.max_rel_dev
        );
    }

    let g = Factor::new(f2, 4, vec![p("x0*x1")?, p("x2 + x3")?])?;
    for text in ["x0*x1 + x2 + x3 + 1", "x0*x1*x2", "x0*x1*x2 + x0*x1*x3"] {
        match is_function_of(&p(text)?, &g)? {
            FunctionOf::Lookup(l) => println!("{text}: function of g via table {:?}", l.entries()),
            FunctionOf::Witness {
                region,
                first,
                second,
            } => {
                println!(
                    "{text}: not a function of g; region {region:?} holds {first} and {second}"
                )
            }
        }
    }
    Ok(())
}

fn main() {
    if let Err(e) = run_example() {
        eprintln!("{e}");
        std::process::exit(1);
    }
}
