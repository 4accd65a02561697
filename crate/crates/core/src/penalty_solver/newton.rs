//! Damped semismooth Newton on a fixed nine-point sparsity pattern.

use faer::prelude::*;
use faer::sparse::linalg::solvers::{Lu, SymbolicLu};
use faer::sparse::{Argsort, Pair, SparseColMat, SymbolicSparseColMat};

use crate::error::{Error, Result};

use super::scheme::{Neighbor, Row, Scheme};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NewtonOptions {
    pub max_iterations: usize,
    /// Stop once the sup-norm residual is at most this.
    pub residual_tol: f64,
    /// Sufficient-decrease constant of the backtracking search.
    pub armijo: f64,
    /// Smallest step tried by backtracking (the step is halved each time).
    pub min_step: f64,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        Self { max_iterations: 60, residual_tol: 1e-8, armijo: 1e-4, min_step: (0.5f64).powi(20) }
    }
}

/// Sparse Jacobian storage with a cached symbolic LU.
pub(crate) struct Jacobian {
    n: usize,
    symbolic: SymbolicSparseColMat<usize>,
    argsort: Argsort<usize>,
    lu_symbolic: Option<SymbolicLu<usize>>,
}

impl Jacobian {
    pub fn new(scheme: &Scheme) -> Result<Self> {
        let n = scheme.len();
        let mut pairs = Vec::with_capacity(9 * n);
        for (i, s) in scheme.stencils().iter().enumerate() {
            pairs.push(Pair { row: i, col: i });
            for nb in s.neighbors {
                if let Neighbor::Unknown(j) = nb {
                    pairs.push(Pair { row: i, col: j });
                }
            }
        }
        let (symbolic, argsort) = SymbolicSparseColMat::try_new_from_indices(n, n, &pairs)
            .map_err(|e| Error::LinearSolve(format!("{e:?}")))?;
        Ok(Self { n, symbolic, argsort, lu_symbolic: None })
    }

    /// Values in pattern order from one row per unknown.
    pub fn values(scheme: &Scheme, rows: &[Row]) -> Vec<f64> {
        let mut values = Vec::with_capacity(9 * rows.len());
        for (s, row) in scheme.stencils().iter().zip(rows) {
            values.push(row.center);
            for (d, nb) in s.neighbors.iter().enumerate() {
                if let Neighbor::Unknown(_) = nb {
                    values.push(row.coeffs[d]);
                }
            }
        }
        values
    }

    pub fn solve(&mut self, values: &[f64], rhs: &[f64]) -> Result<Vec<f64>> {
        let matrix = SparseColMat::<usize, f64>::new_from_argsort(self.symbolic.clone(), &self.argsort, values)
            .map_err(|e| Error::LinearSolve(format!("{e:?}")))?;
        if self.lu_symbolic.is_none() {
            self.lu_symbolic = Some(
                SymbolicLu::try_new(matrix.symbolic()).map_err(|e| Error::LinearSolve(format!("{e:?}")))?,
            );
        }
        let symbolic = self.lu_symbolic.clone().expect("set above");
        let lu = Lu::try_new_with_symbolic(symbolic, matrix.as_ref())
            .map_err(|e| Error::LinearSolve(format!("{e:?}")))?;
        let b = Mat::<f64>::from_fn(self.n, 1, |i, _| rhs[i]);
        let x = lu.solve(&b);
        let out: Vec<f64> = (0..self.n).map(|i| x[(i, 0)]).collect();
        if out.iter().any(|v| !v.is_finite()) {
            return Err(Error::LinearSolve("singular Jacobian".into()));
        }
        Ok(out)
    }
}

fn sup_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| f64::max(m, x.abs()))
}

fn two_norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub(crate) struct NewtonOutcome {
    pub u: Vec<f64>,
    pub iterations: usize,
    pub residual: f64,
}

/// Solves `G(u) = 0` where `system(u)` returns the residual and its active rows.
///
/// With `damped` the step is halved until the Euclidean residual decreases
/// sufficiently; otherwise full steps are taken (policy iteration).
pub(crate) fn newton(
    scheme: &Scheme,
    jacobian: &mut Jacobian,
    mut u: Vec<f64>,
    system: impl Fn(&[f64]) -> (Vec<f64>, Vec<Row>),
    options: &NewtonOptions,
    damped: bool,
    mut on_iteration: impl FnMut(usize, &[f64], f64),
) -> Result<NewtonOutcome> {
    let mut history = Vec::new();
    let (mut residual, mut rows) = system(&u);
    for iteration in 0..=options.max_iterations {
        let sup = sup_norm(&residual);
        history.push(sup);
        on_iteration(iteration, &u, sup);
        if sup <= options.residual_tol {
            return Ok(NewtonOutcome { u, iterations: iteration, residual: sup });
        }
        if iteration == options.max_iterations {
            break;
        }
        let values = Jacobian::values(scheme, &rows);
        let rhs: Vec<f64> = residual.iter().map(|r| -r).collect();
        let step = jacobian.solve(&values, &rhs)?;
        let merit = two_norm(&residual);
        let mut t = 1.0;
        loop {
            let trial: Vec<f64> = u.iter().zip(&step).map(|(a, b)| a + t * b).collect();
            let (r, rw) = system(&trial);
            let accept = !damped || two_norm(&r) <= (1.0 - options.armijo * t) * merit || t <= options.min_step;
            if accept {
                u = trial;
                residual = r;
                rows = rw;
                break;
            }
            t *= 0.5;
        }
    }
    let residual = sup_norm(&residual);
    Err(Error::NonConvergence { iterations: options.max_iterations, residual, history, last_iterate: u })
}
