use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::map::{BoundedMap, MapSpec, Nonlinearity};
use crate::error::{Error, Result};
use crate::sparse::{dense_lu_solve, norm_inf, SparseMatrix, DENSE_LIMIT};

/// Relative tolerance for a stored solution: `||A x* - G(x*)|| <= tol (1 + ||x*||)`.
pub const KNOWN_SOLUTION_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    Generated,
    Loaded,
}

/// The system `A x = G(x)`.
#[derive(Debug, Clone)]
pub struct WeaklyNonlinearProblem {
    a: SparseMatrix,
    g: BoundedMap,
    name: String,
    known_solution: Option<Vec<f64>>,
    provenance: Provenance,
}

impl WeaklyNonlinearProblem {
    pub fn new(
        a: SparseMatrix,
        g: BoundedMap,
        name: impl Into<String>,
        known_solution: Option<Vec<f64>>,
        provenance: Provenance,
    ) -> Result<Self> {
        let n = a.require_square("system matrix")?;
        if g.dim() != n {
            return Err(Error::Dimension(format!(
                "G maps R^{}, A is {n}x{n}",
                g.dim()
            )));
        }
        let problem = Self {
            a,
            g,
            name: name.into(),
            known_solution: None,
            provenance,
        };
        match known_solution {
            Some(x) => problem.with_known_solution(x),
            None => Ok(problem),
        }
    }

    /// Attaches `x` as the solution after checking its residual.
    pub fn with_known_solution(mut self, x: Vec<f64>) -> Result<Self> {
        if x.len() != self.dim() {
            return Err(Error::Dimension(format!(
                "solution has length {}, expected {}",
                x.len(),
                self.dim()
            )));
        }
        let r = self.absolute_residual(&x)?;
        let allowed = KNOWN_SOLUTION_TOL * (1.0 + norm_inf(&x));
        if r > allowed {
            return Err(Error::Parameter(format!(
                "stored solution has residual {r:e}, above {allowed:e}"
            )));
        }
        self.known_solution = Some(x);
        Ok(self)
    }

    pub fn without_known_solution(mut self) -> Self {
        self.known_solution = None;
        self
    }

    pub fn dim(&self) -> usize {
        self.a.n_rows()
    }

    pub fn a(&self) -> &SparseMatrix {
        &self.a
    }

    pub fn g(&self) -> &BoundedMap {
        &self.g
    }

    pub fn p(&self) -> &SparseMatrix {
        self.g.p()
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn known_solution(&self) -> Option<&[f64]> {
        self.known_solution.as_deref()
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    /// `||A x - G(x)||_inf`.
    pub fn absolute_residual(&self, x: &[f64]) -> Result<f64> {
        let mut r = self.g.evaluate(x)?;
        for v in r.iter_mut() {
            *v = -*v;
        }
        self.a.mul_vec_add(x, &mut r);
        Ok(norm_inf(&r))
    }

    /// Replaces `G` by `G + f`. A stored solution is dropped unless `f = 0`.
    pub fn with_source(self, f: Vec<f64>) -> Result<Self> {
        let n = self.dim();
        if f.len() != n {
            return Err(Error::Dimension(format!(
                "source has length {}, expected {n}",
                f.len()
            )));
        }
        if f.iter().all(|&v| v == 0.0) {
            return Ok(self);
        }
        let g = match self.g.spec() {
            MapSpec::Componentwise {
                function,
                coupling,
                offset,
            } => {
                let mut total = offset.clone().unwrap_or_else(|| vec![0.0; n]);
                total.iter_mut().zip(&f).for_each(|(t, v)| *t += v);
                BoundedMap::componentwise(n, *function, *coupling, Some(total))?
            }
            MapSpec::Affine { k, offset } => {
                let total = offset.iter().zip(&f).map(|(a, b)| a + b).collect();
                BoundedMap::affine(k.clone(), total)?
            }
            MapSpec::Custom => {
                let inner = self.g.clone();
                let description = format!("{} + f", inner.description());
                BoundedMap::new(inner.p().clone(), description, move |x, out| {
                    // a non-finite component survives the shift and is reported by the caller
                    inner.evaluate_into(x, out).ok();
                    out.iter_mut().zip(&f).for_each(|(o, v)| *o += v);
                })?
            }
        };
        Ok(Self {
            g,
            known_solution: None,
            ..self
        })
    }
}

/// Five-point Laplacian on an `m x m` interior grid with spacing
/// `h = 1/(m+1)`, scaled by `1/h^2`. Unknowns are numbered row by row.
pub fn laplacian_2d(m: usize) -> SparseMatrix {
    let n = m * m;
    let s = ((m + 1) * (m + 1)) as f64;
    let mut t = Vec::with_capacity(5 * n);
    for r in 0..m {
        for c in 0..m {
            let i = r * m + c;
            if r > 0 {
                t.push((i, i - m, -s));
            }
            if c > 0 {
                t.push((i, i - 1, -s));
            }
            t.push((i, i, 4.0 * s));
            if c + 1 < m {
                t.push((i, i + 1, -s));
            }
            if r + 1 < m {
                t.push((i, i + m, -s));
            }
        }
    }
    SparseMatrix::from_triplets(n, n, t).expect("indices are in range")
}

/// Smallest eigenvalue of [`laplacian_2d`]: `(8/h^2) sin^2(pi h / 2)`.
pub fn laplacian_2d_min_eigenvalue(m: usize) -> f64 {
    let h = 1.0 / (m + 1) as f64;
    8.0 / (h * h) * (PI * h / 2.0).sin().powi(2)
}

/// `tridiag(-1, 2, -1)` of order `n`.
pub fn tridiagonal(n: usize) -> SparseMatrix {
    let t = (0..n).flat_map(|i| {
        let lower = (i > 0).then(|| (i, i - 1, -1.0));
        let upper = (i + 1 < n).then(|| (i, i + 1, -1.0));
        lower.into_iter().chain([(i, i, 2.0)]).chain(upper)
    });
    SparseMatrix::from_triplets(n, n, t).expect("indices are in range")
}

/// Smallest eigenvalue of [`tridiagonal`]: `2 - 2 cos(pi / (n + 1))`.
pub fn tridiagonal_min_eigenvalue(n: usize) -> f64 {
    2.0 - 2.0 * (PI / (n + 1) as f64).cos()
}

fn check_coupling(coupling: f64, g: Nonlinearity, lambda_min: f64) -> Result<f64> {
    if !(coupling.is_finite() && coupling >= 0.0) {
        return Err(Error::Parameter(format!(
            "coupling must be finite and nonnegative, got {coupling}"
        )));
    }
    let lip = g.lipschitz();
    // A is symmetric positive definite and P = coupling * L * I, so
    // rho(A^-1 P) = coupling * L / lambda_min
    let rho = coupling * lip / lambda_min;
    if rho >= 1.0 {
        return Err(Error::Generation {
            coupling,
            max_safe: lambda_min / lip,
        });
    }
    Ok(rho)
}

fn finish(
    a: SparseMatrix,
    g: Nonlinearity,
    coupling: f64,
    name: String,
) -> Result<WeaklyNonlinearProblem> {
    let n = a.n_rows();
    let map = BoundedMap::componentwise(n, g, coupling, None)?;
    let known = match g {
        _ if coupling * g.eval(0.0) == 0.0 => Some(vec![0.0; n]),
        Nonlinearity::Constant(c) if n <= DENSE_LIMIT => {
            Some(dense_lu_solve(&a, &vec![coupling * c; n])?)
        }
        _ => None,
    };
    WeaklyNonlinearProblem::new(a, map, name, known, Provenance::Generated)
}

/// Grid problem `A x = coupling * g(x)` with `A` from [`laplacian_2d`].
///
/// Fails with [`Error::Generation`] unless `rho(A^-1 P) < 1`, which makes the
/// solution unique. The achieved value is recorded in the problem name.
pub fn generate_grid_problem(
    m: usize,
    nonlinearity: Nonlinearity,
    coupling: f64,
) -> Result<WeaklyNonlinearProblem> {
    if m < 2 {
        return Err(Error::Parameter(format!(
            "grid size m must be at least 2, got {m}"
        )));
    }
    let rho = check_coupling(coupling, nonlinearity, laplacian_2d_min_eigenvalue(m))?;
    let name = format!("grid m={m} {nonlinearity} coupling={coupling} rho={rho:.6}");
    finish(laplacian_2d(m), nonlinearity, coupling, name)
}

/// Problem `A x = coupling * g(x)` with `A` from [`tridiagonal`].
pub fn generate_tridiagonal_problem(
    n: usize,
    nonlinearity: Nonlinearity,
    coupling: f64,
) -> Result<WeaklyNonlinearProblem> {
    if n == 0 {
        return Err(Error::Parameter("order must be at least 1".into()));
    }
    let rho = check_coupling(coupling, nonlinearity, tridiagonal_min_eigenvalue(n))?;
    let name = format!("tridiag n={n} {nonlinearity} coupling={coupling} rho={rho:.6}");
    finish(tridiagonal(n), nonlinearity, coupling, name)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sparse::{is_m_matrix, ClassConfig};
    use crate::splitting::{
        build_multisplitting, validate_h_hypotheses, LowerPartition, SplittingStrategy,
        ValidationConfig,
    };

    #[test]
    fn laplacian_structure() {
        let a = laplacian_2d(3);
        assert_eq!(a.n_rows(), 9);
        assert_eq!(a.get(4, 4), 64.0);
        assert_eq!(a.get(4, 1), -16.0);
        assert_eq!(a.get(2, 3), 0.0);
        assert_eq!(a.nnz(), 9 + 2 * 12);
        assert!(
            is_m_matrix(&a, &ClassConfig::default())
                .unwrap()
                .is_m_matrix
        );
    }

    #[test]
    fn min_eigenvalue_matches_dense_rayleigh_bound() {
        // A - lambda_min I is singular: check via the eigenvector sin(pi i h) sin(pi j h)
        let m = 5;
        let h = 1.0 / 6.0;
        let v: Vec<f64> = (0..m * m)
            .map(|k| ((k / m + 1) as f64 * PI * h).sin() * ((k % m + 1) as f64 * PI * h).sin())
            .collect();
        let av = laplacian_2d(m).mul_vec(&v);
        let lambda = laplacian_2d_min_eigenvalue(m);
        for (x, y) in av.iter().zip(&v) {
            assert!((x - lambda * y).abs() <= 1e-10);
        }
    }

    #[test]
    fn zero_constant_has_zero_solution() {
        let p = generate_grid_problem(2, Nonlinearity::Constant(0.0), 1.0).unwrap();
        assert_eq!(p.dim(), 4);
        assert_eq!(p.known_solution(), Some(&[0.0; 4][..]));
    }

    #[test]
    fn constant_source_solution_is_checked() {
        let p = generate_grid_problem(4, Nonlinearity::Constant(1.0), 2.0).unwrap();
        let x = p.known_solution().unwrap();
        assert!(p.absolute_residual(x).unwrap() <= 1e-10);
        assert!(x.iter().all(|&v| v > 0.0));
    }

    #[test]
    fn sine_grid_has_zero_solution_and_passes_validation() {
        let p = generate_grid_problem(3, Nonlinearity::Sine, 1.0).unwrap();
        assert_eq!(p.known_solution(), Some(&[0.0; 9][..]));
        let ms = build_multisplitting(
            p.a(),
            1,
            SplittingStrategy::BlockJacobi,
            &LowerPartition::AllToV,
        )
        .unwrap();
        let r = validate_h_hypotheses(p.a(), &ms, p.p(), &ValidationConfig::default()).unwrap();
        assert!(r.all_passed(), "{r:#?}");
    }

    #[test]
    fn exp_decay_has_no_closed_form() {
        let p = generate_grid_problem(3, Nonlinearity::ExpDecay, 1.0).unwrap();
        assert!(p.known_solution().is_none());
    }

    #[test]
    fn coupling_limit() {
        let lambda = laplacian_2d_min_eigenvalue(4);
        match generate_grid_problem(4, Nonlinearity::Arctan, lambda * 1.01) {
            Err(Error::Generation { max_safe, .. }) => assert!((max_safe - lambda).abs() < 1e-12),
            other => panic!("{other:?}"),
        }
        assert!(generate_tridiagonal_problem(3, Nonlinearity::Arctan, 0.5).is_ok());
        assert!(generate_tridiagonal_problem(4, Nonlinearity::Arctan, 0.5).is_err());
        assert!(generate_grid_problem(1, Nonlinearity::Sine, 1.0).is_err());
        assert!(generate_grid_problem(3, Nonlinearity::Sine, -1.0).is_err());
    }

    #[test]
    fn stored_solution_is_verified() {
        let p = generate_tridiagonal_problem(3, Nonlinearity::Sine, 0.5).unwrap();
        assert!(p.clone().with_known_solution(vec![0.0, 1.0, 0.0]).is_err());
        let shifted = p.with_source(vec![1.0, 0.0, 0.0]).unwrap();
        assert!(shifted.known_solution().is_none());
        assert_eq!(
            shifted.g().evaluate(&[0.0; 3]).unwrap(),
            vec![1.0, 0.0, 0.0]
        );
    }
}
