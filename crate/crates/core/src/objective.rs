//! Objective oracles.
//!
//! Every optimizer in this crate talks to the objective through an
//! [`Oracle`]: a cheap-to-clone handle around an [`Objective`] that counts
//! value and gradient calls and optionally knows its minimizer.

use std::cell::Cell;
use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::error::{invalid, Result};

/// A dense point in R^n.
pub type Point = DVector<f64>;

/// A dense real matrix.
pub type Matrix = DMatrix<f64>;

/// Something that can be evaluated and differentiated.
///
/// Both calls must be deterministic: the same input returns a bitwise
/// identical output within a process.
pub trait Objective: Send + Sync {
    fn dimension(&self) -> usize;
    fn value(&self, x: &Point) -> Result<f64>;
    fn gradient(&self, x: &Point) -> Result<Point>;
}

/// Counting handle around an [`Objective`].
///
/// Cloning shares the objective and copies the current counter values, so
/// every clone counts its own calls from then on.
pub struct Oracle {
    inner: Arc<dyn Objective>,
    name: String,
    known_minimizer: Option<Point>,
    known_minimum: Option<f64>,
    evals: Cell<u64>,
    grads: Cell<u64>,
}

impl Clone for Oracle {
    fn clone(&self) -> Self {
        Self {
            inner: Arc::clone(&self.inner),
            name: self.name.clone(),
            known_minimizer: self.known_minimizer.clone(),
            known_minimum: self.known_minimum,
            evals: Cell::new(self.evals.get()),
            grads: Cell::new(self.grads.get()),
        }
    }
}

impl fmt::Debug for Oracle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Oracle")
            .field("name", &self.name)
            .field("dimension", &self.dimension())
            .field("known_minimum", &self.known_minimum)
            .field("eval_count", &self.evals.get())
            .field("grad_count", &self.grads.get())
            .finish()
    }
}

impl Oracle {
    pub fn new(name: impl Into<String>, objective: impl Objective + 'static) -> Self {
        Self {
            inner: Arc::new(objective),
            name: name.into(),
            known_minimizer: None,
            known_minimum: None,
            evals: Cell::new(0),
            grads: Cell::new(0),
        }
    }

    /// Build an oracle from a pair of closures. Mostly useful in tests.
    pub fn from_fns<F, G>(name: impl Into<String>, dimension: usize, value: F, gradient: G) -> Self
    where
        F: Fn(&Point) -> f64 + Send + Sync + 'static,
        G: Fn(&Point) -> Point + Send + Sync + 'static,
    {
        Self::new(
            name,
            FnObjective {
                dimension,
                value: Box::new(value),
                gradient: Box::new(gradient),
            },
        )
    }

    pub fn with_minimizer(mut self, x_star: Point, f_star: f64) -> Self {
        self.known_minimizer = Some(x_star);
        self.known_minimum = Some(f_star);
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dimension(&self) -> usize {
        self.inner.dimension()
    }

    pub fn known_minimizer(&self) -> Option<&Point> {
        self.known_minimizer.as_ref()
    }

    pub fn known_minimum(&self) -> Option<f64> {
        self.known_minimum
    }

    pub fn eval_count(&self) -> u64 {
        self.evals.get()
    }

    pub fn grad_count(&self) -> u64 {
        self.grads.get()
    }

    pub fn reset_counters(&self) {
        self.evals.set(0);
        self.grads.set(0);
    }

    fn check_dim(&self, x: &Point) -> Result<()> {
        if x.len() != self.dimension() {
            return invalid(format!(
                "{}: point has length {}, expected {}",
                self.name,
                x.len(),
                self.dimension()
            ));
        }
        Ok(())
    }

    pub fn eval(&self, x: &Point) -> Result<f64> {
        self.check_dim(x)?;
        self.evals.set(self.evals.get() + 1);
        self.inner.value(x)
    }

    pub fn grad(&self, x: &Point) -> Result<Point> {
        self.check_dim(x)?;
        self.grads.set(self.grads.get() + 1);
        self.inner.gradient(x)
    }

    /// Value and gradient at the same point (two counted calls).
    pub fn eval_grad(&self, x: &Point) -> Result<(f64, Point)> {
        Ok((self.eval(x)?, self.grad(x)?))
    }
}

type ValueFn = Box<dyn Fn(&Point) -> f64 + Send + Sync>;
type GradFn = Box<dyn Fn(&Point) -> Point + Send + Sync>;

struct FnObjective {
    dimension: usize,
    value: ValueFn,
    gradient: GradFn,
}

impl Objective for FnObjective {
    fn dimension(&self) -> usize {
        self.dimension
    }

    fn value(&self, x: &Point) -> Result<f64> {
        Ok((self.value)(x))
    }

    fn gradient(&self, x: &Point) -> Result<Point> {
        Ok((self.gradient)(x))
    }
}

/// f(x) = ½ (x − c)ᵀ H (x − c)
#[derive(Debug, Clone)]
pub struct QuadraticObjective {
    hessian: Matrix,
    center: Point,
}

impl QuadraticObjective {
    pub fn hessian(&self) -> &Matrix {
        &self.hessian
    }
}

impl Objective for QuadraticObjective {
    fn dimension(&self) -> usize {
        self.center.len()
    }

    fn value(&self, x: &Point) -> Result<f64> {
        let d = x - &self.center;
        Ok(0.5 * d.dot(&(&self.hessian * &d)))
    }

    fn gradient(&self, x: &Point) -> Result<Point> {
        Ok(&self.hessian * (x - &self.center))
    }
}

/// Symmetric-matrix tolerance used by the input checks.
pub(crate) fn is_symmetric(m: &Matrix, rel_tol: f64) -> bool {
    if !m.is_square() {
        return false;
    }
    let scale = 1.0 + m.amax();
    let n = m.nrows();
    for i in 0..n {
        for j in (i + 1)..n {
            if (m[(i, j)] - m[(j, i)]).abs() > rel_tol * scale {
                return false;
            }
        }
    }
    true
}

/// Oracle for ½ (x − x*)ᵀ H (x − x*) with known minimum 0 at `x_star`.
pub fn make_quadratic_objective(h: Matrix, x_star: Point) -> Result<Oracle> {
    if h.nrows() != x_star.len() || h.ncols() != x_star.len() {
        return invalid(format!(
            "Hessian is {}x{} but x_star has length {}",
            h.nrows(),
            h.ncols(),
            x_star.len()
        ));
    }
    if x_star.is_empty() {
        return invalid("quadratic objective needs dimension >= 1");
    }
    if !is_symmetric(&h, 1e-12) {
        return invalid("Hessian is not symmetric");
    }
    if x_star.iter().any(|v| !v.is_finite()) || h.iter().any(|v| !v.is_finite()) {
        return invalid("non-finite entries in quadratic data");
    }
    let min_eig = h.clone().symmetric_eigenvalues().min();
    if min_eig < -1e-12 * (1.0 + h.amax()) {
        return invalid(format!("Hessian has negative eigenvalue {min_eig}"));
    }
    let dim = x_star.len();
    Ok(Oracle::new(
        format!("quad{dim}"),
        QuadraticObjective {
            hessian: h,
            center: x_star.clone(),
        },
    )
    .with_minimizer(x_star, 0.0))
}

/// f(x) = Σ xᵢ² + 3 sin²(xᵢ), separable and nonconvex.
#[derive(Debug, Clone, Copy)]
pub struct SinSq {
    pub dimension: usize,
}

impl Objective for SinSq {
    fn dimension(&self) -> usize {
        self.dimension
    }

    fn value(&self, x: &Point) -> Result<f64> {
        Ok(x.iter().map(|&t| t * t + 3.0 * t.sin().powi(2)).sum())
    }

    fn gradient(&self, x: &Point) -> Result<Point> {
        // d/dt 3 sin²t = 3 sin 2t
        Ok(x.map(|t| 2.0 * t + 3.0 * (2.0 * t).sin()))
    }
}

/// f(x) = ‖x‖⁴, flat at the origin.
#[derive(Debug, Clone, Copy)]
pub struct FlatQuartic {
    pub dimension: usize,
}

impl Objective for FlatQuartic {
    fn dimension(&self) -> usize {
        self.dimension
    }

    fn value(&self, x: &Point) -> Result<f64> {
        Ok(x.norm_squared().powi(2))
    }

    fn gradient(&self, x: &Point) -> Result<Point> {
        Ok(x * (4.0 * x.norm_squared()))
    }
}

/// Central-difference gradient, one coordinate at a time.
pub fn finite_difference_gradient(oracle: &Oracle, x: &Point, h: f64) -> Result<Point> {
    if !(h > 0.0) || !h.is_finite() {
        return invalid(format!("finite-difference step must be positive, got {h}"));
    }
    let mut g = Point::zeros(x.len());
    let mut probe = x.clone();
    for i in 0..x.len() {
        let xi = x[i];
        probe[i] = xi + h;
        let up = oracle.eval(&probe)?;
        probe[i] = xi - h;
        let down = oracle.eval(&probe)?;
        probe[i] = xi;
        g[i] = (up - down) / (2.0 * h);
    }
    Ok(g)
}
