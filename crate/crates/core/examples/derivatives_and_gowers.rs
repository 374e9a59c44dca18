// Derivatives, cube sums and the bias of iterated derivatives.
//
// The degree-4 elementary symmetric polynomial over `F_2` has derivative
// bias close to 1/8 once `n` is moderately large.
//
// ```bash
// cargo run --release -p polylab --example derivatives_and_gowers
// ```

use polylab::derivative::{cube_sum, derivative, gowers_derivative_bias, BlockPolynomial};
use polylab::poly::parse_system;
use polylab::spectral::derivative_bias_check;
use polylab::{parse_polynomial, FieldSpec, Point};

pub fn run_example() -> polylab::Result<()> {
    let f2 = FieldSpec::new(2)?;
    let q = parse_polynomial("x0*x1*x2 + x1*x3 + x2", f2, 4)?;
    let a = Point::new(f2, &[1, 1, 0, 0]);
    println!("D_a q for a = {a}: {}", derivative(&q, &a)?);

    let x = Point::new(f2, &[1, 0, 1, 1]);
    let ys: Vec<Point> = [[1, 0, 0, 1], [0, 1, 1, 0], [1, 1, 0, 0], [0, 0, 1, 1]]
        .iter()
        .map(|y| Point::new(f2, y))
        .collect();
    println!("4-cube sum of a cubic: {}", cube_sum(&q, &x, &ys)?);

    let h = BlockPolynomial::with_default_names(2, 1, parse_polynomial("x0*x1", f2, 2)?)?;
    let check = derivative_bias_check(&h, 1)?;
    println!(
        "bias(h) = {:.3}, bias(h') = {:.3}, bias(h') >= bias(h)^2: {}",
        check.bias_h, check.bias_h_prime, check.holds
    );

    let text = std::fs::read_to_string(concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/examples/data/s4_n12.poly"
    ))
    .map_err(|e| polylab::Error::Invalid(e.to_string()))?;
    let s4 = parse_system(&text)?.polys.remove(0).1;
    for n in [4usize, 6, 8] {
        let small = parse_polynomial(&symmetric4(n), f2, n)?;
        println!(
            "S_4 on {n:>2} variables: derivative bias {:.6}",
            gowers_derivative_bias(&small, 4)?
        );
    }
    println!(
        "S_4 on 12 variables: derivative bias {:.6}",
        gowers_derivative_bias(&s4, 4)?
    );
    Ok(())
}

fn symmetric4(n: usize) -> String {
    let mut terms = Vec::new();
    for a in 0..n {
        for b in a + 1..n {
            for c in b + 1..n {
                for d in c + 1..n {
                    terms.push(format!("x{a}*x{b}*x{c}*x{d}"));
                }
            }
        }
    }
    terms.join(" + ")
}

fn main() {
    if let Err(e) = run_example() {
        eprintln!("{e}");
        std::process::exit(1);
    }
}
