//! Upper bounds on alpha + beta, compared with closed forms.

use std::f64::consts::PI;

use mstor::nonlinear::tridiagonal;
use mstor::splitting::{tor_parameter_bound, HypothesisKind, ValidationConfig};
use mstor::SparseMatrix;

fn main() -> mstor::Result<()> {
    let cfg = ValidationConfig::default();
    println!(
        "{:>4} {:>6} {:>14} {:>14}",
        "n", "P", "computed", "closed form"
    );
    for n in [2, 5, 10, 40] {
        for c in [0.0, 0.1, 0.4] {
            let p = SparseMatrix::identity(n).scale(c);
            let bound = tor_parameter_bound(&tridiagonal(n), &p, HypothesisKind::HMatrix, &cfg)?;
            let exact = 4.0 / (1.0 + (PI / (n + 1) as f64).cos() + c / 2.0);
            println!("{n:>4} {c:>6} {bound:>14.10} {exact:>14.10}");
        }
    }
    let monotone = tor_parameter_bound(
        &tridiagonal(10),
        &SparseMatrix::zeros(10, 10),
        HypothesisKind::Monotone,
        &cfg,
    )?;
    println!("monotone case: alpha + beta < {monotone}");
    Ok(())
}
