// Exact bias, value distribution and character spectrum of a few small
// polynomials, plus a sampled estimate with its confidence radius.
//
// ```bash
// cargo run -p polylab --example bias_and_spectrum
// ```

use polylab::spectral::{bias_estimate, bias_exact, character_spectrum};
use polylab::{parse_polynomial, FieldSpec, Point};

pub fn run_example() -> polylab::Result<()> {
    let f2 = FieldSpec::new(2)?;
    for text in ["x0*x1", "x0*x1 + x2*x3", "x0*x1*x2", "x0 + x1"] {
        let q = parse_polynomial(text, f2, 4)?;
        let rep = bias_exact(&q.tabulate()?);
        println!(
            "{text:>16}  |bias| = {:.4}  distribution = {:?}",
            rep.magnitude, rep.value_distribution
        );
    }

    let q = parse_polynomial("x0*x1 + x2", f2, 3)?;
    let spectrum = character_spectrum(&q.tabulate()?)?;
    println!("\nspectrum of {q} (energy {:.3}):", spectrum.energy());
    print!("{}", spectrum.to_csv());
    let alpha = Point::new(f2, &[0, 0, 1]);
    println!(
        "coefficient at {alpha}: {:.3}",
        spectrum.coefficient(&alpha)?
    );

    let f3 = FieldSpec::new(3)?;
    let q = parse_polynomial("x0^2 + x1^2 + x2*x3", f3, 4)?;
    let exact = bias_exact(&q.tabulate()?);
    let est = bias_estimate(f3, 4, |x| f3.element(q.eval_raw(x.coords())), 20_000, 1)?;
    println!(
        "\nover F_3, {q}: exact |bias| {:.4}, sampled {:.4} +- {:.4}",
        exact.magnitude,
        est.estimate.norm(),
        est.radius
    );
    Ok(())
}

fn main() {
    if let Err(e) = run_example() {
        eprintln!("{e}");
        std::process::exit(1);
    }
}
