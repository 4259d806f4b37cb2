use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use crate::error::{Error, Result};

type ScheduleFn = dyn Fn(usize, usize) -> usize + Send + Sync;

/// Number of inner sweeps `s_l(i)` for splitting `l` at outer step `i`.
#[derive(Clone)]
pub enum InnerSchedule {
    Constant(usize),
    PerSplitting(Vec<usize>),
    /// `f(l, i)`, both 0-based.
    Function(Arc<ScheduleFn>),
}

impl InnerSchedule {
    pub fn function(f: impl Fn(usize, usize) -> usize + Send + Sync + 'static) -> Self {
        InnerSchedule::Function(Arc::new(f))
    }

    pub fn steps(&self, l: usize, i: usize) -> Result<usize> {
        let s = match self {
            InnerSchedule::Constant(s) => *s,
            InnerSchedule::PerSplitting(v) => *v.get(l).ok_or_else(|| {
                Error::Parameter(format!("no inner step count for splitting {}", l + 1))
            })?,
            InnerSchedule::Function(f) => f(l, i),
        };
        if s == 0 {
            return Err(Error::Parameter(format!(
                "inner step count for splitting {} at outer step {i} is 0",
                l + 1
            )));
        }
        Ok(s)
    }

    pub fn validate(&self, p: usize) -> Result<()> {
        match self {
            InnerSchedule::Constant(s) => {
                if *s == 0 {
                    return Err(Error::Parameter(
                        "inner step count must be at least 1".into(),
                    ));
                }
            }
            InnerSchedule::PerSplitting(v) => {
                if v.len() != p {
                    return Err(Error::Parameter(format!(
                        "{} inner step counts given for {p} splittings",
                        v.len()
                    )));
                }
                if let Some(l) = v.iter().position(|&s| s == 0) {
                    return Err(Error::Parameter(format!(
                        "inner step count for splitting {} is 0",
                        l + 1
                    )));
                }
            }
            InnerSchedule::Function(_) => {}
        }
        Ok(())
    }

    /// The H-matrix convergence result is stated for `s_l(i) > 1`; a single
    /// inner sweep is accepted but flagged.
    pub fn warnings(&self, p: usize) -> Vec<String> {
        let single: Vec<usize> = match self {
            InnerSchedule::Constant(1) => (0..p).collect(),
            InnerSchedule::PerSplitting(v) => v
                .iter()
                .enumerate()
                .filter(|(_, &s)| s == 1)
                .map(|(l, _)| l)
                .collect(),
            _ => Vec::new(),
        };
        single
            .into_iter()
            .map(|l| {
                format!(
                    "splitting {} uses a single inner sweep; the H-matrix convergence bound assumes s_l(i) > 1",
                    l + 1
                )
            })
            .collect()
    }

    /// Representative count for reports: the constant, or the maximum.
    pub fn summary(&self) -> Option<usize> {
        match self {
            InnerSchedule::Constant(s) => Some(*s),
            InnerSchedule::PerSplitting(v) => v.iter().copied().max(),
            InnerSchedule::Function(_) => None,
        }
    }
}

impl Default for InnerSchedule {
    fn default() -> Self {
        InnerSchedule::Constant(1)
    }
}

impl fmt::Debug for InnerSchedule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "InnerSchedule({self})")
    }
}

impl fmt::Display for InnerSchedule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InnerSchedule::Constant(s) => write!(f, "{s}"),
            InnerSchedule::PerSplitting(v) => {
                let parts: Vec<String> = v.iter().map(ToString::to_string).collect();
                f.write_str(&parts.join(","))
            }
            InnerSchedule::Function(_) => f.write_str("<function>"),
        }
    }
}

impl FromStr for InnerSchedule {
    type Err = Error;

    /// `"5"` or a comma-separated list `"1,2,3"`.
    fn from_str(s: &str) -> Result<Self> {
        let counts = s
            .split(',')
            .map(|t| {
                t.trim()
                    .parse::<usize>()
                    .map_err(|_| Error::Parameter(format!("'{t}' is not an inner step count")))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(if counts.len() == 1 && !s.contains(',') {
            InnerSchedule::Constant(counts[0])
        } else {
            InnerSchedule::PerSplitting(counts)
        })
    }
}
