//! Problem directories: `A.mtx`, `problem.json` and an optional
//! `solution.vec`.
//!
//! ```json
//! { "schema_version": 1, "name": "grid m=8",
//!   "map": { "kind": "componentwise", "function": "sin", "coupling": 1.0 } }
//! ```
//!
//! `map.kind` is one of
//! - `componentwise`: `G(x)_i = coupling * g(x_i) + offset_i`, with an
//!   optional `offset` array;
//! - `affine`: `G(x) = K x + offset`, `K` read from the file named by
//!   `matrix`;
//! - `external`: the evaluator is supplied by the caller and only `P` is
//!   stored, in the file named by `p_matrix`.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::mm::{read_matrix_market, read_vector, write_matrix_market, write_text, write_vector};
use crate::error::{Error, Result};
use crate::nonlinear::{BoundedMap, MapSpec, Nonlinearity, Provenance, WeaklyNonlinearProblem};
use crate::sparse::SparseMatrix;

pub const SCHEMA_VERSION: u32 = 1;

const MATRIX_FILE: &str = "A.mtx";
const META_FILE: &str = "problem.json";
const SOLUTION_FILE: &str = "solution.vec";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MapFile {
    Componentwise {
        function: Nonlinearity,
        coupling: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        offset: Option<Vec<f64>>,
    },
    Affine {
        matrix: String,
        offset: Vec<f64>,
    },
    External {
        p_matrix: String,
        #[serde(default)]
        description: String,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemFile {
    pub schema_version: u32,
    pub name: String,
    pub map: MapFile,
}

/// Writes `problem` into `dir`, creating it if needed.
pub fn save_problem(problem: &WeaklyNonlinearProblem, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    write_matrix_market(&dir.join(MATRIX_FILE), problem.a())?;
    let map = match problem.g().spec() {
        MapSpec::Componentwise {
            function,
            coupling,
            offset,
        } => MapFile::Componentwise {
            function: *function,
            coupling: *coupling,
            offset: offset.clone(),
        },
        MapSpec::Affine { k, offset } => {
            write_matrix_market(&dir.join("K.mtx"), k)?;
            MapFile::Affine {
                matrix: "K.mtx".into(),
                offset: offset.clone(),
            }
        }
        MapSpec::Custom => {
            write_matrix_market(&dir.join("P.mtx"), problem.p())?;
            MapFile::External {
                p_matrix: "P.mtx".into(),
                description: problem.g().description().to_string(),
            }
        }
    };
    let meta = ProblemFile {
        schema_version: SCHEMA_VERSION,
        name: problem.name().to_string(),
        map,
    };
    let meta_path = dir.join(META_FILE);
    let json = serde_json::to_string_pretty(&meta).map_err(|e| Error::Json {
        path: meta_path.clone(),
        source: e,
    })?;
    write_text(&meta_path, &(json + "\n"))?;
    let solution = dir.join(SOLUTION_FILE);
    match problem.known_solution() {
        Some(x) => write_vector(&solution, x)?,
        None if solution.exists() => {
            fs::remove_file(&solution).map_err(|e| Error::io(&solution, e))?
        }
        None => {}
    }
    Ok(())
}

/// Loads a problem with a built-in or affine map.
pub fn load_problem(dir: &Path) -> Result<WeaklyNonlinearProblem> {
    load(dir, None::<fn(&[f64], &mut [f64])>)
}

/// Loads a problem whose map is `external`, attaching `eval` as `G`.
pub fn load_external_problem<F>(dir: &Path, eval: F) -> Result<WeaklyNonlinearProblem>
where
    F: Fn(&[f64], &mut [f64]) + Send + Sync + 'static,
{
    load(dir, Some(eval))
}

pub fn read_problem_file(dir: &Path) -> Result<ProblemFile> {
    let path = dir.join(META_FILE);
    let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
    let meta: ProblemFile = serde_json::from_str(&text).map_err(|e| Error::Json {
        path: path.clone(),
        source: e,
    })?;
    if meta.schema_version != SCHEMA_VERSION {
        return Err(Error::parse(
            &path,
            1,
            format!("unsupported schema_version {}", meta.schema_version),
        ));
    }
    Ok(meta)
}

fn check_len(what: &str, len: usize, n: usize) -> Result<()> {
    if len != n {
        return Err(Error::Dimension(format!(
            "{what} has length {len}, A has n = {n}"
        )));
    }
    Ok(())
}

fn check_square(what: &str, m: &SparseMatrix, n: usize) -> Result<()> {
    if m.n_rows() != n || m.n_cols() != n {
        return Err(Error::Dimension(format!(
            "{what} is {}x{}, A is {n}x{n}",
            m.n_rows(),
            m.n_cols()
        )));
    }
    Ok(())
}

fn load<F>(dir: &Path, eval: Option<F>) -> Result<WeaklyNonlinearProblem>
where
    F: Fn(&[f64], &mut [f64]) + Send + Sync + 'static,
{
    let meta = read_problem_file(dir)?;
    let a = read_matrix_market(&dir.join(MATRIX_FILE))?;
    let n = a.require_square("A")?;
    let g = match meta.map {
        MapFile::Componentwise {
            function,
            coupling,
            offset,
        } => {
            if let Some(f) = &offset {
                check_len("offset", f.len(), n)?;
            }
            BoundedMap::componentwise(n, function, coupling, offset)?
        }
        MapFile::Affine { matrix, offset } => {
            let k = read_matrix_market(&dir.join(&matrix))?;
            check_square(&matrix, &k, n)?;
            check_len("offset", offset.len(), n)?;
            BoundedMap::affine(k, offset)?
        }
        MapFile::External {
            p_matrix,
            description,
        } => {
            let p = read_matrix_market(&dir.join(&p_matrix))?;
            check_square(&p_matrix, &p, n)?;
            let eval = eval.ok_or_else(|| {
                Error::Parameter(format!(
                    "{} declares an external map; load it with an evaluator",
                    dir.display()
                ))
            })?;
            BoundedMap::new(p, description, eval)?
        }
    };
    let solution_path = dir.join(SOLUTION_FILE);
    let known = if solution_path.exists() {
        let x = read_vector(&solution_path)?;
        check_len(SOLUTION_FILE, x.len(), n)?;
        Some(x)
    } else {
        None
    };
    WeaklyNonlinearProblem::new(a, g, meta.name, known, Provenance::Loaded)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nonlinear::generate_grid_problem;

    #[test]
    fn generated_problem_round_trips() {
        let dir = tempfile::tempdir().unwrap();
        let p = generate_grid_problem(4, Nonlinearity::Constant(1.5), 1.0).unwrap();
        save_problem(&p, dir.path()).unwrap();
        let q = load_problem(dir.path()).unwrap();
        assert_eq!(q.a(), p.a());
        assert_eq!(q.p(), p.p());
        assert_eq!(q.known_solution(), p.known_solution());
        assert_eq!(q.provenance(), Provenance::Loaded);
        assert_eq!(q.name(), p.name());
    }

    #[test]
    fn offset_and_affine_maps() {
        let dir = tempfile::tempdir().unwrap();
        let p = generate_grid_problem(2, Nonlinearity::Arctan, 0.5)
            .unwrap()
            .with_source(vec![1.0, -1.0, 0.25, 0.0])
            .unwrap();
        save_problem(&p, dir.path()).unwrap();
        let q = load_problem(dir.path()).unwrap();
        let x = [0.3, -0.1, 2.0, 0.0];
        assert_eq!(q.g().evaluate(&x).unwrap(), p.g().evaluate(&x).unwrap());

        let k = SparseMatrix::from_triplets(4, 4, [(0, 1, 0.5), (3, 3, -0.25)]).unwrap();
        let g = BoundedMap::affine(k, vec![1.0; 4]).unwrap();
        let p =
            WeaklyNonlinearProblem::new(p.a().clone(), g, "affine", None, Provenance::Generated)
                .unwrap();
        save_problem(&p, dir.path()).unwrap();
        let q = load_problem(dir.path()).unwrap();
        assert_eq!(q.p(), p.p());
        assert!(q.known_solution().is_none());
        assert_eq!(q.g().evaluate(&x).unwrap(), p.g().evaluate(&x).unwrap());
    }

    #[test]
    fn external_map_needs_evaluator() {
        let dir = tempfile::tempdir().unwrap();
        let a = SparseMatrix::from_diagonal(&[2.0, 2.0]);
        let g = BoundedMap::new(SparseMatrix::identity(2), "cos", |x, o| {
            o.iter_mut().zip(x).for_each(|(o, t)| *o = t.cos())
        })
        .unwrap();
        let p = WeaklyNonlinearProblem::new(a, g, "cos", None, Provenance::Generated).unwrap();
        save_problem(&p, dir.path()).unwrap();
        assert!(matches!(load_problem(dir.path()), Err(Error::Parameter(_))));
        let q = load_external_problem(dir.path(), |x, o| {
            o.iter_mut().zip(x).for_each(|(o, t)| *o = t.cos())
        })
        .unwrap();
        assert_eq!(q.p(), &SparseMatrix::identity(2));
    }

    #[test]
    fn mismatched_p_is_dimension_error() {
        let dir = tempfile::tempdir().unwrap();
        write_matrix_market(&dir.path().join("A.mtx"), &SparseMatrix::identity(2)).unwrap();
        write_matrix_market(&dir.path().join("P.mtx"), &SparseMatrix::identity(3)).unwrap();
        write_text(
            &dir.path().join("problem.json"),
            r#"{"schema_version":1,"name":"bad","map":{"kind":"external","p_matrix":"P.mtx"}}"#,
        )
        .unwrap();
        assert!(matches!(
            load_external_problem(dir.path(), |_, o| o.fill(0.0)),
            Err(Error::Dimension(_))
        ));
    }

    #[test]
    fn missing_files_are_io_errors() {
        let dir = tempfile::tempdir().unwrap();
        assert!(matches!(load_problem(dir.path()), Err(Error::Io { .. })));
    }
}
