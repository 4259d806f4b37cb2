use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sparse::{abs_matrix, SparseMatrix};

/// Slack added to the right-hand side of `|G(x) - G(y)| <= P|x - y|`.
pub const P_BOUND_SLACK: f64 = 1e-12;

/// Scalar functions applied componentwise by the built-in maps.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum Nonlinearity {
    Sine,
    Arctan,
    /// `exp(-max(t, 0))`.
    ExpDecay,
    /// `t -> c`.
    Constant(f64),
    /// `t -> k t`.
    Linear(f64),
}

impl Nonlinearity {
    pub fn eval(self, t: f64) -> f64 {
        match self {
            Nonlinearity::Sine => t.sin(),
            Nonlinearity::Arctan => t.atan(),
            Nonlinearity::ExpDecay => (-t.max(0.0)).exp(),
            Nonlinearity::Constant(c) => c,
            Nonlinearity::Linear(k) => k * t,
        }
    }

    /// Global Lipschitz constant.
    pub fn lipschitz(self) -> f64 {
        match self {
            Nonlinearity::Sine | Nonlinearity::Arctan | Nonlinearity::ExpDecay => 1.0,
            Nonlinearity::Constant(_) => 0.0,
            Nonlinearity::Linear(k) => k.abs(),
        }
    }

    /// Whether `g(0) = 0`, so that `x = 0` solves `Ax = c g(x)`.
    pub fn vanishes_at_zero(self) -> bool {
        self.eval(0.0) == 0.0
    }
}

impl fmt::Display for Nonlinearity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Nonlinearity::Sine => f.write_str("sin"),
            Nonlinearity::Arctan => f.write_str("arctan"),
            Nonlinearity::ExpDecay => f.write_str("expdecay"),
            Nonlinearity::Constant(c) => write!(f, "const:{c}"),
            Nonlinearity::Linear(k) => write!(f, "linear:{k}"),
        }
    }
}

impl FromStr for Nonlinearity {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let number = |v: &str| {
            v.parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .ok_or_else(|| Error::Parameter(format!("'{v}' in '{s}' is not a finite number")))
        };
        match s {
            "sin" | "sine" => Ok(Nonlinearity::Sine),
            "arctan" | "atan" => Ok(Nonlinearity::Arctan),
            "expdecay" | "exp_decay" => Ok(Nonlinearity::ExpDecay),
            _ => {
                if let Some(c) = s.strip_prefix("const:") {
                    number(c).map(Nonlinearity::Constant)
                } else if let Some(k) = s.strip_prefix("linear:") {
                    number(k).map(Nonlinearity::Linear)
                } else {
                    Err(Error::Parameter(format!(
                        "unknown nonlinearity '{s}' (expected sin, arctan, expdecay, const:<c> or linear:<k>)"
                    )))
                }
            }
        }
    }
}

impl TryFrom<String> for Nonlinearity {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<Nonlinearity> for String {
    fn from(g: Nonlinearity) -> String {
        g.to_string()
    }
}

/// How a [`BoundedMap`] was built, kept so that it can be written back out.
#[derive(Debug, Clone, PartialEq)]
pub enum MapSpec {
    /// `G(x)_i = coupling * g(x_i) + offset_i`, `P = coupling * L_g * I`.
    Componentwise {
        function: Nonlinearity,
        coupling: f64,
        offset: Option<Vec<f64>>,
    },
    /// `G(x) = K x + offset`, `P = |K|`.
    Affine { k: SparseMatrix, offset: Vec<f64> },
    /// Arbitrary evaluator supplied by the caller.
    Custom,
}

type Evaluator = dyn Fn(&[f64], &mut [f64]) + Send + Sync;

/// A map `G: R^n -> R^n` together with a nonnegative `P` such that
/// `|G(x) - G(y)| <= P |x - y|`.
#[derive(Clone)]
pub struct BoundedMap {
    eval: Arc<Evaluator>,
    p: SparseMatrix,
    description: String,
    spec: MapSpec,
}

impl fmt::Debug for BoundedMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("BoundedMap")
            .field("n", &self.dim())
            .field("description", &self.description)
            .field("spec", &self.spec)
            .finish()
    }
}

impl BoundedMap {
    /// Wraps a caller-supplied evaluator. `eval(x, out)` must overwrite all
    /// of `out` and be a pure function of `x`.
    pub fn new<F>(p: SparseMatrix, description: impl Into<String>, eval: F) -> Result<Self>
    where
        F: Fn(&[f64], &mut [f64]) + Send + Sync + 'static,
    {
        Self::with_spec(Arc::new(eval), p, description.into(), MapSpec::Custom)
    }

    fn with_spec(
        eval: Arc<Evaluator>,
        p: SparseMatrix,
        description: String,
        spec: MapSpec,
    ) -> Result<Self> {
        p.require_square("P")?;
        if let Some((i, j, v)) = p.first_negative() {
            return Err(Error::Domain(format!(
                "P has negative entry ({i}, {j}) = {v}"
            )));
        }
        if !p.all_finite() {
            return Err(Error::Domain("P has non-finite entries".into()));
        }
        Ok(Self {
            eval,
            p,
            description,
            spec,
        })
    }

    pub fn componentwise(
        n: usize,
        function: Nonlinearity,
        coupling: f64,
        offset: Option<Vec<f64>>,
    ) -> Result<Self> {
        if !(coupling.is_finite() && coupling >= 0.0) {
            return Err(Error::Parameter(format!(
                "coupling must be finite and nonnegative, got {coupling}"
            )));
        }
        if let Some(f) = &offset {
            if f.len() != n {
                return Err(Error::Dimension(format!(
                    "offset has length {}, expected {n}",
                    f.len()
                )));
            }
        }
        let p = SparseMatrix::from_diagonal(&vec![coupling * function.lipschitz(); n]);
        let description = match &offset {
            Some(_) => format!("{coupling} * {function}(x) + f"),
            None => format!("{coupling} * {function}(x)"),
        };
        let captured = offset.clone();
        let eval = move |x: &[f64], out: &mut [f64]| {
            for (o, &t) in out.iter_mut().zip(x) {
                *o = coupling * function.eval(t);
            }
            if let Some(f) = &captured {
                for (o, &fi) in out.iter_mut().zip(f) {
                    *o += fi;
                }
            }
        };
        let spec = MapSpec::Componentwise {
            function,
            coupling,
            offset,
        };
        Self::with_spec(Arc::new(eval), p, description, spec)
    }

    pub fn affine(k: SparseMatrix, offset: Vec<f64>) -> Result<Self> {
        let n = k.require_square("K")?;
        if offset.len() != n {
            return Err(Error::Dimension(format!(
                "offset has length {}, expected {n}",
                offset.len()
            )));
        }
        let p = abs_matrix(&k);
        let (kc, fc) = (k.clone(), offset.clone());
        let eval = move |x: &[f64], out: &mut [f64]| {
            out.copy_from_slice(&fc);
            kc.mul_vec_add(x, out);
        };
        Self::with_spec(
            Arc::new(eval),
            p,
            "K x + f".into(),
            MapSpec::Affine { k, offset },
        )
    }

    pub fn dim(&self) -> usize {
        self.p.n_rows()
    }

    pub fn p(&self) -> &SparseMatrix {
        &self.p
    }

    pub fn description(&self) -> &str {
        &self.description
    }

    pub fn spec(&self) -> &MapSpec {
        &self.spec
    }

    /// `out = G(x)`; fails on the first non-finite component.
    pub fn evaluate_into(&self, x: &[f64], out: &mut [f64]) -> Result<()> {
        let n = self.dim();
        if x.len() != n || out.len() != n {
            return Err(Error::Dimension(format!(
                "G maps R^{n}, got input {} and output {}",
                x.len(),
                out.len()
            )));
        }
        (self.eval)(x, out);
        match out.iter().position(|v| !v.is_finite()) {
            Some(index) => Err(Error::Evaluation { index }),
            None => Ok(()),
        }
    }

    pub fn evaluate(&self, x: &[f64]) -> Result<Vec<f64>> {
        let mut out = vec![0.0; self.dim()];
        self.evaluate_into(x, &mut out)?;
        Ok(out)
    }
}

pub fn evaluate_map(g: &BoundedMap, x: &[f64]) -> Result<Vec<f64>> {
    g.evaluate(x)
}

/// Outcome of [`verify_p_bound`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PBoundReport {
    pub samples: usize,
    pub radius: f64,
    pub seed: u64,
    /// Number of sampled pairs with at least one violated component.
    pub violations: usize,
    /// Largest `|G(x) - G(y)|_i - (P|x - y|)_i` seen, without the slack.
    pub worst_margin: f64,
    pub worst_index: usize,
    pub worst_pair: (Vec<f64>, Vec<f64>),
}

impl PBoundReport {
    pub fn passed(&self) -> bool {
        self.violations == 0
    }
}

/// Samples `samples` pairs uniformly from `[-radius, radius]^n` and checks
/// the bound componentwise, with a slack of [`P_BOUND_SLACK`].
pub fn verify_p_bound(
    g: &BoundedMap,
    samples: usize,
    radius: f64,
    seed: u64,
) -> Result<PBoundReport> {
    if samples == 0 || !(radius > 0.0 && radius.is_finite()) {
        return Err(Error::Parameter(format!(
            "need samples >= 1 and a finite radius > 0, got {samples} and {radius}"
        )));
    }
    let n = g.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut x = vec![0.0; n];
    let mut y = vec![0.0; n];
    let mut gx = vec![0.0; n];
    let mut gy = vec![0.0; n];
    let mut diff = vec![0.0; n];
    let mut bound = vec![0.0; n];
    let mut report = PBoundReport {
        samples,
        radius,
        seed,
        violations: 0,
        worst_margin: f64::NEG_INFINITY,
        worst_index: 0,
        worst_pair: (Vec::new(), Vec::new()),
    };
    for _ in 0..samples {
        for v in x.iter_mut().chain(y.iter_mut()) {
            *v = rng.random_range(-radius..=radius);
        }
        g.evaluate_into(&x, &mut gx)?;
        g.evaluate_into(&y, &mut gy)?;
        for ((d, &a), &b) in diff.iter_mut().zip(&x).zip(&y) {
            *d = (a - b).abs();
        }
        g.p().mul_vec_into(&diff, &mut bound);
        let mut violated = false;
        for i in 0..n {
            let margin = (gx[i] - gy[i]).abs() - bound[i];
            violated |= margin > P_BOUND_SLACK;
            if margin > report.worst_margin {
                report.worst_margin = margin;
                report.worst_index = i;
                report.worst_pair = (x.clone(), y.clone());
            }
        }
        report.violations += usize::from(violated);
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn evaluation_examples() {
        let c = BoundedMap::componentwise(3, Nonlinearity::Constant(2.5), 1.0, None).unwrap();
        assert_eq!(evaluate_map(&c, &[7.0, -1.0, 0.0]).unwrap(), vec![2.5; 3]);
        assert_eq!(c.p().nnz(), 0);

        let s = BoundedMap::componentwise(2, Nonlinearity::Sine, 1.0, None).unwrap();
        assert_eq!(s.evaluate(&[0.0, 0.0]).unwrap(), vec![0.0, 0.0]);

        let half = BoundedMap::componentwise(2, Nonlinearity::Linear(0.5), 1.0, None).unwrap();
        assert_eq!(half.evaluate(&[2.0, -4.0]).unwrap(), vec![1.0, -2.0]);
        assert_eq!(half.p().diagonal(), vec![0.5, 0.5]);
    }

    #[test]
    fn non_finite_output_names_index() {
        let g = BoundedMap::new(SparseMatrix::zeros(3, 3), "log", |x, out| {
            for (o, &t) in out.iter_mut().zip(x) {
                *o = t.ln();
            }
        })
        .unwrap();
        assert!(matches!(
            g.evaluate(&[1.0, 2.0, -1.0]),
            Err(Error::Evaluation { index: 2 })
        ));
        assert!(matches!(g.evaluate(&[1.0]), Err(Error::Dimension(_))));
    }

    #[test]
    fn affine_map() {
        let k = SparseMatrix::from_dense(&[vec![0.0, -0.5], vec![0.25, 0.0]]).unwrap();
        let g = BoundedMap::affine(k, vec![1.0, 2.0]).unwrap();
        assert_eq!(g.evaluate(&[2.0, 4.0]).unwrap(), vec![-1.0, 2.5]);
        assert_eq!(g.p().get(0, 1), 0.5);
    }

    #[test]
    fn negative_p_rejected() {
        let p = SparseMatrix::from_diagonal(&[-1.0]);
        assert!(matches!(
            BoundedMap::new(p, "bad", |_, o| o[0] = 0.0),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn builtins_respect_their_bounds() {
        for g in [
            Nonlinearity::Sine,
            Nonlinearity::Arctan,
            Nonlinearity::ExpDecay,
            Nonlinearity::Constant(3.0),
            Nonlinearity::Linear(-2.0),
        ] {
            let map =
                BoundedMap::componentwise(4, g, 0.7, Some(vec![1.0, 0.0, -2.0, 5.0])).unwrap();
            let r = verify_p_bound(&map, 1000, 100.0, 11).unwrap();
            assert!(r.passed(), "{g}: {r:?}");
        }
        let atan = BoundedMap::componentwise(3, Nonlinearity::Arctan, 1.0, None).unwrap();
        assert!(verify_p_bound(&atan, 1000, 10.0, 0).unwrap().passed());
    }

    #[test]
    fn understated_bound_is_reported() {
        let g = BoundedMap::new(SparseMatrix::identity(1), "2t", |x, out| {
            out[0] = 2.0 * x[0]
        })
        .unwrap();
        let r = verify_p_bound(&g, 50, 1.0, 3).unwrap();
        assert!(!r.passed());
        assert_eq!(r.violations, 50);
        let (x, y) = &r.worst_pair;
        // |2x - 2y| - |x - y| = |x - y|
        assert!((r.worst_margin - (x[0] - y[0]).abs()).abs() <= 1e-12);
    }

    #[test]
    fn sampling_is_reproducible() {
        let g = BoundedMap::componentwise(5, Nonlinearity::Sine, 1.0, None).unwrap();
        let a = verify_p_bound(&g, 100, 3.0, 42).unwrap();
        let b = verify_p_bound(&g, 100, 3.0, 42).unwrap();
        assert_eq!(a, b);
        assert!(verify_p_bound(&g, 0, 3.0, 42).is_err());
        assert!(verify_p_bound(&g, 1, 0.0, 42).is_err());
    }

    #[test]
    fn names_round_trip() {
        for s in ["sin", "arctan", "expdecay", "const:1.5", "linear:-0.25"] {
            assert_eq!(s.parse::<Nonlinearity>().unwrap().to_string(), s);
        }
        assert!("cosh".parse::<Nonlinearity>().is_err());
        assert!("const:x".parse::<Nonlinearity>().is_err());
        let json = serde_json::to_string(&Nonlinearity::Constant(-1.0)).unwrap();
        assert_eq!(json, "\"const:-1\"");
        assert_eq!(
            serde_json::from_str::<Nonlinearity>(&json).unwrap(),
            Nonlinearity::Constant(-1.0)
        );
    }

    #[test]
    fn exp_decay_is_clamped() {
        assert_eq!(Nonlinearity::ExpDecay.eval(-5.0), 1.0);
        assert!((Nonlinearity::ExpDecay.eval(1.0) - (-1.0f64).exp()).abs() <= 1e-16);
    }
}
