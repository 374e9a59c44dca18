// Bias of bilinear and quadratic forms against the rank of their matrix,
// and the rank of a trilinear form through its restrictions.
//
// ```bash
// cargo run -p polylab --example dixon
// ```

use polylab::reductions::{bilinear_dixon_check, multilinear_bias_rank, MultilinearForm};
use polylab::{FieldSpec, Matrix};

pub fn run_example() -> polylab::Result<()> {
    for (p, rows) in [
        (2, vec![vec![1, 1], vec![0, 1]]),
        (2, vec![vec![0, 1, 0], vec![1, 0, 0], vec![0, 0, 0]]),
        (3, vec![vec![1, 2, 0], vec![0, 1, 1], vec![1, 0, 2]]),
    ] {
        let a = Matrix::from_rows(FieldSpec::new(p)?, &rows)?;
        let r = bilinear_dixon_check(&a)?;
        println!(
            "p={p} rank {} : |bias x^T A y| = {:.4} (law holds {}), |bias x^T A x| = {:.4} (law holds {})",
            r.rank_a, r.bias_mag, r.bilinear_law_holds, r.quadratic_bias, r.quadratic_law_holds
        );
    }

    let f2 = FieldSpec::new(2)?;
    let l = MultilinearForm::new(f2, 3, 2, vec![(vec![0, 0, 0], 1), (vec![1, 1, 1], 1)])?;
    let r = multilinear_bias_rank(&l, 4)?;
    println!(
        "trilinear x0 y0 z0 + x1 y1 z1: bias {:.4}, restrictions needed {:?}",
        r.bias,
        r.components.as_ref().map(Vec::len)
    );
    Ok(())
}

fn main() {
    if let Err(e) = run_example() {
        eprintln!("{e}");
        std::process::exit(1);
    }
}
