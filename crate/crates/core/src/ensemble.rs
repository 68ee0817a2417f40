//! Independent ensemble members on a worker pool, and the statistics that
//! reduce them.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Runs `run(m)` for members `0..count` in parallel and returns the results in
/// member order. The first failing member (lowest index) is reported with its
/// index attached.
pub fn run_members<R, F>(count: usize, run: F) -> Result<Vec<R>>
where
    R: Send,
    F: Fn(usize) -> Result<R> + Sync + Send,
{
    let results: Vec<Result<R>> = (0..count).into_par_iter().map(&run).collect();
    results
        .into_iter()
        .enumerate()
        .map(|(index, r)| {
            r.map_err(|e| match e {
                e @ Error::Member { .. } => e,
                e => Error::Member {
                    index,
                    source: Box::new(e),
                },
            })
        })
        .collect()
}

/// Componentwise sample mean and standard error of the mean.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub mean: Vec<f64>,
    pub stderr: Vec<f64>,
    pub members: usize,
}

/// Summarises equally long sample vectors. With a single member the standard
/// error is reported as zero.
pub fn summarize(samples: &[Vec<f64>]) -> Result<Summary> {
    let m = samples.len();
    let Some(first) = samples.first() else {
        return Err(Error::InvalidArgument("cannot summarise an empty ensemble".into()));
    };
    let n = first.len();
    if samples.iter().any(|s| s.len() != n) {
        return Err(Error::InvalidArgument("ensemble samples differ in length".into()));
    }
    let mut mean = vec![0.0; n];
    for s in samples {
        for (a, v) in mean.iter_mut().zip(s) {
            *a += v;
        }
    }
    for a in &mut mean {
        *a /= m as f64;
    }
    let mut stderr = vec![0.0; n];
    if m > 1 {
        for s in samples {
            for ((e, v), mu) in stderr.iter_mut().zip(s).zip(&mean) {
                *e += (v - mu) * (v - mu);
            }
        }
        for e in &mut stderr {
            *e = (*e / ((m - 1) as f64 * m as f64)).sqrt();
        }
    }
    Ok(Summary {
        mean,
        stderr,
        members: m,
    })
}
