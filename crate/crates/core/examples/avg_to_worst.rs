// From an approximation by a factor to an exact computation: a majority
// vote approximator, Fourier peeling, and a merged certificate.
//
// ```bash
// cargo run -p polylab --example avg_to_worst
// ```

use polylab::derivative::direction_pool;
use polylab::factor::Lookup;
use polylab::reductions::{avg_to_worst, bv_approximator, verify_certificate};
use polylab::{parse_polynomial, FieldSpec};

pub fn run_example() -> polylab::Result<()> {
    let f2 = FieldSpec::new(2)?;
    let q = parse_polynomial("x0*x1 + x2*x3 + x4*x5", f2, 6)?;
    for s in [1, 5, 9, 25] {
        let a = bv_approximator(&q, s, 3)?;
        println!(
            "majority of {s:>2} derivative votes agrees with q on {:.3}",
            a.measured_agreement
        );
    }

    // q = g1*g2 except on the 1/16 of points where x0..x3 are all one.
    let q = parse_polynomial("x0*x1 + x2*x3 + x0*x1*x2*x3 + x4*x5", f2, 6)?;
    let gs = vec![
        parse_polynomial("x0*x1 + x4*x5", f2, 6)?,
        parse_polynomial("x2*x3 + x4*x5", f2, 6)?,
    ];
    let lookup = Lookup::sum(f2, 2)?;
    let out = avg_to_worst(&q, &gs, &lookup, 4, &direction_pool(f2, 6, 0)?)?;
    println!(
        "approximation bias {:.3}, peeled bias {:.3} with alphas {:?}",
        out.peel.approximation_bias, out.peel.peeled_bias, out.peel.alphas
    );
    println!("residual: {}", out.residual);
    if let Some(cert) = &out.certificate {
        println!(
            "certificate of size {} verified: {}",
            cert.size(),
            verify_certificate(cert, &q)?
        );
    }
    Ok(())
}

fn main() {
    if let Err(e) = run_example() {
        eprintln!("{e}");
        std::process::exit(1);
    }
}
