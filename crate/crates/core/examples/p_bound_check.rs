//! Samples pairs of points to check `|G(x) - G(y)| <= P |x - y|` for the
//! built-in maps and for a custom evaluator with a deliberately wrong `P`.

use mstor::nonlinear::verify_p_bound;
use mstor::{BoundedMap, Nonlinearity, SparseMatrix};

fn main() -> mstor::Result<()> {
    let n = 8;
    for g in [
        Nonlinearity::Sine,
        Nonlinearity::Arctan,
        Nonlinearity::ExpDecay,
        Nonlinearity::Constant(1.5),
        Nonlinearity::Linear(-0.5),
    ] {
        let map = BoundedMap::componentwise(n, g, 0.7, None)?;
        let r = verify_p_bound(&map, 1000, 100.0, 42)?;
        println!(
            "{:<12} violations={} worst margin={:.3e}",
            g.to_string(),
            r.violations,
            r.worst_margin
        );
    }

    // neighbour coupling x_{i+1} without the matching entry in P
    let p = SparseMatrix::identity(n).scale(0.5);
    let custom = BoundedMap::new(p, "0.5 sin(x_i) + 0.1 x_{i+1}", move |x, out| {
        for i in 0..x.len() {
            let next = if i + 1 < x.len() { x[i + 1] } else { 0.0 };
            out[i] = 0.5 * x[i].sin() + 0.1 * next;
        }
    })?;
    let r = verify_p_bound(&custom, 1000, 100.0, 42)?;
    println!(
        "{:<12} violations={} worst at index {:?}",
        "custom", r.violations, r.worst_index
    );
    Ok(())
}
