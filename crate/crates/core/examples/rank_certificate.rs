// Certifying that a biased quadratic is a function of a few of its own
// derivatives, then checking the certificate after a JSON round trip.
//
// ```bash
// cargo run -p polylab --example rank_certificate
// ```

use polylab::derivative::direction_pool;
use polylab::reductions::{rank_via_derivatives, verify_certificate, ComputationCertificate};
use polylab::spectral::bias_exact;
use polylab::{parse_polynomial, FieldSpec};

pub fn run_example() -> polylab::Result<()> {
    let f2 = FieldSpec::new(2)?;
    let q = parse_polynomial("x0*x1 + x2*x3 + x0", f2, 5)?;
    let pool = direction_pool(f2, 5, 0)?;
    println!("|bias| = {}", bias_exact(&q.tabulate()?).magnitude);

    for c_max in 1..=4 {
        let r = rank_via_derivatives(&q, c_max, &pool)?;
        match r.certificate {
            None => println!(
                "c_max {c_max}: no certificate ({} subsets checked)",
                r.subsets_checked
            ),
            Some(cert) => {
                println!(
                    "c_max {c_max}: certificate with {} derivatives",
                    cert.size()
                );
                for comp in &cert.components {
                    println!("  D_{} q = {}", comp.shift, comp.poly()?);
                }
                let back = ComputationCertificate::from_json(&cert.to_json())?;
                println!(
                    "  verified after round trip: {}",
                    verify_certificate(&back, &q)?
                );
                break;
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
