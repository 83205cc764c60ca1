//! Exact one-dimensional minimization over a segment.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::objective::{Oracle, Point};

/// Tolerance on the segment parameter used by the accelerated methods.
pub const SEGMENT_TOL: f64 = 1e-10;
/// Golden-section iteration cap used by the accelerated methods.
pub const SEGMENT_MAX_ITER: usize = 200;

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Minimum found by [`golden_section_min`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Minimum1d {
    pub t: f64,
    pub value: f64,
    pub evals: usize,
}

/// Golden-section search on `[a, b]`.
///
/// Stops once the bracket is no wider than `tol` or after `max_iter`
/// shrink steps. Only points inside `[a, b]` are evaluated, at most
/// `max_iter + 2` of them.
pub fn golden_section_min<F>(mut f: F, a: f64, b: f64, tol: f64, max_iter: usize) -> Result<Minimum1d>
where
    F: FnMut(f64) -> f64,
{
    if !(a < b) {
        return invalid(format!("golden section needs a < b, got [{a}, {b}]"));
    }
    if !(tol > 0.0) {
        return invalid(format!("golden section tolerance must be positive, got {tol}"));
    }
    if max_iter == 0 {
        return invalid("golden section needs max_iter >= 1");
    }
    let (mut lo, mut hi) = (a, b);
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    let mut evals = 2;
    let mut iter = 0;
    while hi - lo > tol && iter < max_iter {
        if f1 == f2 && iter + 2 <= max_iter {
            // for unimodal f the minimizer lies between two equal values
            lo = x1;
            hi = x2;
            x1 = hi - INV_PHI * (hi - lo);
            x2 = lo + INV_PHI * (hi - lo);
            f1 = f(x1);
            f2 = f(x2);
            evals += 2;
            iter += 2;
            continue;
        }
        if f1 < f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = f(x2);
        }
        evals += 1;
        iter += 1;
    }
    let (t, value) = if f1 <= f2 { (x1, f1) } else { (x2, f2) };
    Ok(Minimum1d { t, value, evals })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SegmentSearchResult {
    /// Position on the segment, `point = p + t (q − p)`.
    pub t: f64,
    pub point: Point,
    pub value: f64,
    pub evals: usize,
}

/// Which β the accelerated methods use for y = v + β (x − v).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SegmentMode {
    /// Try the endpoint q first and keep it if the acceptance test passes;
    /// fall back to exact minimization.
    #[default]
    EndpointFirst,
    /// Always minimize over the whole segment.
    Exact,
}

fn point_on(p: &Point, q: &Point, t: f64) -> Point {
    p + (q - p) * t
}

/// Minimize the oracle over the closed segment from `p` (t = 0) to `q` (t = 1).
///
/// Both endpoints are always candidates, so the returned value never
/// exceeds `min(f(p), f(q))`; ties resolve towards smaller t.
pub fn segment_min(oracle: &Oracle, p: &Point, q: &Point, tol: f64) -> Result<SegmentSearchResult> {
    segment_min_with(oracle, p, q, tol, SegmentMode::Exact, |_, _| Ok(false))
}

/// Segment minimization with an acceptance test for the endpoint `q`.
///
/// In [`SegmentMode::EndpointFirst`] mode `accept(q, f(q))` is consulted
/// first and, if it returns true, `q` is returned without a search.
pub fn segment_min_with<A>(
    oracle: &Oracle,
    p: &Point,
    q: &Point,
    tol: f64,
    mode: SegmentMode,
    mut accept: A,
) -> Result<SegmentSearchResult>
where
    A: FnMut(&Point, f64) -> Result<bool>,
{
    let n = oracle.dimension();
    if p.len() != n || q.len() != n {
        return invalid(format!(
            "segment endpoints have lengths {} and {}, oracle dimension is {n}",
            p.len(),
            q.len()
        ));
    }
    if !(tol > 0.0) {
        return invalid(format!("segment tolerance must be positive, got {tol}"));
    }
    let fq = oracle.eval(q)?;
    let mut evals = 1;
    if mode == SegmentMode::EndpointFirst && accept(q, fq)? {
        return Ok(SegmentSearchResult {
            t: 1.0,
            point: q.clone(),
            value: fq,
            evals,
        });
    }
    if p == q {
        return Ok(SegmentSearchResult {
            t: 0.0,
            point: p.clone(),
            value: fq,
            evals,
        });
    }
    let fp = oracle.eval(p)?;
    evals += 1;

    let mut failure = None;
    let inner = golden_section_min(
        |t| match oracle.eval(&point_on(p, q, t)) {
            Ok(v) => v,
            Err(e) => {
                failure.get_or_insert(e);
                f64::INFINITY
            }
        },
        0.0,
        1.0,
        tol,
        SEGMENT_MAX_ITER,
    )?;
    if let Some(e) = failure {
        // an infinite value stands in for points the oracle refuses; only
        // propagate when nothing finite was found
        if !inner.value.is_finite() && !fp.is_finite() && !fq.is_finite() {
            return Err(e);
        }
    }
    evals += inner.evals;

    let mut best = (0.0, fp);
    if inner.value < best.1 {
        best = (inner.t, inner.value);
    }
    if fq < best.1 {
        best = (1.0, fq);
    }
    let point = match best.0 {
        t if t == 0.0 => p.clone(),
        t if t == 1.0 => q.clone(),
        t => point_on(p, q, t),
    };
    Ok(SegmentSearchResult {
        t: best.0,
        point,
        value: best.1,
        evals,
    })
}

/// Coefficients of the y-selection inequality of the accelerated method.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct YConditionCoeffs {
    pub alpha: f64,
    pub gamma_k: f64,
    pub gamma_next: f64,
    pub gamma: f64,
    pub mu: f64,
}

impl YConditionCoeffs {
    fn validate(&self) -> Result<()> {
        if !(self.gamma_next > 0.0) {
            return invalid(format!("gamma_next must be positive, got {}", self.gamma_next));
        }
        if !(self.gamma > 0.0 && self.gamma <= 1.0) {
            return invalid(format!("gamma must lie in (0, 1], got {}", self.gamma));
        }
        Ok(())
    }

    /// LHS − f(y) of
    /// f(x) + αγₖ/(γₖ₊₁γ)·⟨∇f(y), v − y⟩ + αγₖμ/(2γₖ₊₁)·‖y − v‖² ≥ f(y).
    pub fn slack(&self, fx: f64, fy: f64, grad_y: &Point, v: &Point, y: &Point) -> f64 {
        let d = v - y;
        let w = self.alpha * self.gamma_k / self.gamma_next;
        fx + w / self.gamma * grad_y.dot(&d) + 0.5 * w * self.mu * d.norm_squared() - fy
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct YCheck {
    pub holds: bool,
    pub slack: f64,
}

/// Test the y-selection inequality at `y_k` with absolute tolerance `tol`.
#[allow(clippy::too_many_arguments)]
pub fn check_y_condition(
    oracle: &Oracle,
    x_k: &Point,
    v_k: &Point,
    y_k: &Point,
    alpha_k: f64,
    gamma_k: f64,
    gamma_next: f64,
    gamma: f64,
    mu: f64,
    tol: f64,
) -> Result<YCheck> {
    let coeffs = YConditionCoeffs {
        alpha: alpha_k,
        gamma_k,
        gamma_next,
        gamma,
        mu,
    };
    coeffs.validate()?;
    let fx = oracle.eval(x_k)?;
    let (fy, gy) = oracle.eval_grad(y_k)?;
    let slack = coeffs.slack(fx, fy, &gy, v_k, y_k);
    Ok(YCheck {
        holds: slack >= -tol,
        slack,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::objective::{make_quadratic_objective, Matrix};
    use std::f64::consts::PI;

    #[test]
    fn golden_examples() {
        let m = golden_section_min(|t| (t - 0.3).powi(2), 0.0, 1.0, 1e-10, 200).unwrap();
        assert!((m.t - 0.3).abs() < 1e-9);
        let m = golden_section_min(|t| t, 0.0, 1.0, 1e-10, 200).unwrap();
        assert!(m.t.abs() <= 1e-10);
        let m = golden_section_min(|t| (2.0 * PI * t).cos(), 0.0, 1.0, 1e-10, 200).unwrap();
        assert!((m.t - 0.5).abs() < 1e-9);
    }

    #[test]
    fn golden_rejects_bad_input() {
        assert!(golden_section_min(|t| t, 1.0, 1.0, 1e-6, 10).is_err());
        assert!(golden_section_min(|t| t, 1.0, 0.0, 1e-6, 10).is_err());
        assert!(golden_section_min(|t| t, 0.0, 1.0, 0.0, 10).is_err());
    }

    #[test]
    fn golden_stays_in_bracket_and_budget() {
        let mut seen = Vec::new();
        let m = golden_section_min(
            |t| {
                seen.push(t);
                (t - 0.77).abs()
            },
            -2.0,
            3.0,
            1e-14,
            25,
        )
        .unwrap();
        assert!(seen.iter().all(|&t| (-2.0..=3.0).contains(&t)));
        assert_eq!(seen.len(), m.evals);
        assert!(m.evals <= 27);
    }

    #[test]
    fn segment_examples() {
        let f = make_quadratic_objective(Matrix::identity(2, 2), Point::zeros(2)).unwrap();
        let p = Point::from_vec(vec![-1.0, 0.0]);
        let q = Point::from_vec(vec![1.0, 0.0]);
        let r = segment_min(&f, &p, &q, 1e-10).unwrap();
        assert!((r.t - 0.5).abs() < 1e-9);
        assert!(r.point.norm() < 1e-9);
        assert!(r.value < 1e-18);

        let r = segment_min(&f, &q, &q, 1e-10).unwrap();
        assert_eq!(r.t, 0.0);
        assert_eq!(r.point, q);

        let quartic = Oracle::from_fns("x4", 1, |x| x[0].powi(4), |x| x.map(|t| 4.0 * t.powi(3)));
        let r = segment_min(&quartic, &Point::from_element(1, 2.0), &Point::from_element(1, 1.0), 1e-10).unwrap();
        assert_eq!(r.t, 1.0);
        assert_eq!(r.point[0], 1.0);

        let bad = Point::zeros(3);
        assert!(segment_min(&f, &p, &bad, 1e-10).is_err());
    }

    #[test]
    fn endpoint_first_uses_acceptance() {
        let f = make_quadratic_objective(Matrix::identity(1, 1), Point::zeros(1)).unwrap();
        let p = Point::from_element(1, -1.0);
        let q = Point::from_element(1, 1.0);
        let r = segment_min_with(&f, &p, &q, 1e-10, SegmentMode::EndpointFirst, |_, _| Ok(true)).unwrap();
        assert_eq!((r.t, r.evals), (1.0, 1));
        let r = segment_min_with(&f, &p, &q, 1e-10, SegmentMode::EndpointFirst, |_, _| Ok(false)).unwrap();
        assert!((r.t - 0.5).abs() < 1e-9);
    }

    #[test]
    fn y_condition_examples() {
        let f = make_quadratic_objective(Matrix::identity(1, 1), Point::zeros(1)).unwrap();
        let x = Point::from_element(1, 1.0);
        let v = Point::from_element(1, -1.0);
        let y = Point::zeros(1);
        let c = check_y_condition(&f, &x, &v, &y, 0.5, 1.0, 1.0, 1.0, 0.0, 0.0).unwrap();
        assert!(c.holds);
        assert_eq!(c.slack, 0.5);

        // y = x with ⟨∇f(x), v − x⟩ ≥ 0: here ∇f(x) = 1 and v − x = +1
        let x = Point::from_element(1, 1.0);
        let v = Point::from_element(1, 2.0);
        let c = check_y_condition(&f, &x, &v, &x, 0.3, 2.0, 1.5, 1.0, 0.0, 0.0).unwrap();
        assert!(c.holds && c.slack >= 0.0);

        assert!(check_y_condition(&f, &x, &v, &x, 0.3, 2.0, 0.0, 1.0, 0.0, 0.0).is_err());
    }
}
