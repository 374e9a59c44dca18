// Refining a dependent set of polynomials into a strongly regular factor.
//
// ```bash
// cargo run -p polylab --example regularize
// ```

use polylab::factor::{
    is_function_of, regularize, violation_search, Factor, RegularizeConfig, SearchConfig,
};
use polylab::{parse_polynomial, FieldSpec};

pub fn run_example() -> polylab::Result<()> {
    let f2 = FieldSpec::new(2)?;
    let inputs = vec![
        parse_polynomial("x0*x1 + x2", f2, 4)?,
        parse_polynomial("x0*x1", f2, 4)?,
        parse_polynomial("x2 + x3", f2, 4)?,
    ];

    let g = Factor::new(f2, 4, inputs.clone())?;
    let search = violation_search(&g, &SearchConfig::default())?;
    match &search.witness {
        Some(w) => println!(
            "input set violates regularity with r = {} via {:?}",
            w.r,
            w.participants()
        ),
        None => println!(
            "input set has no violation up to r = {:?}",
            search.searched_up_to
        ),
    }

    let reg = regularize(&inputs, &RegularizeConfig::default())?;
    println!("stopped: {:?}, refined: {}", reg.stop, reg.refined);
    for (i, step) in reg.iterations.iter().enumerate() {
        println!(
            "  step {i}: lowered member {} (degree {}), new bound {:?}, added {:?}",
            step.lowered, step.lowered_degree, step.new_delta, step.added
        );
    }
    for ((q, d), id) in reg
        .factor
        .polys()
        .iter()
        .zip(reg.factor.deltas())
        .zip(&reg.ids)
    {
        println!("  member {id}: {q}  (bound {d})");
    }
    for q in &inputs {
        let ok = is_function_of(q, &reg.factor)?.lookup().is_some();
        println!("  {q} is a function of the refinement: {ok}");
    }
    Ok(())
}

fn main() {
    if let Err(e) = run_example() {
        eprintln!("{e}");
        std::process::exit(1);
    }
}
