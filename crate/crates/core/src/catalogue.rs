//! Built-in test objectives with documented boxes, default starts and
//! certified class constants.
//!
//! | id             | f                         | box                    | L               | default x₀       |
//! |----------------|---------------------------|------------------------|-----------------|------------------|
//! | `quad`         | ½ xᵀHx (H = diag(1, 10))  | [−3, 3]ⁿ               | λ_max(H)        | all threes       |
//! | `sinsq`        | Σ xᵢ² + 3 sin² xᵢ         | [−5, 5]ⁿ               | 8               | all fours        |
//! | `flat_quartic` | ‖x‖⁴                      | [−r/√n, r/√n]ⁿ, r = 1  | 12 r²           | all r/√n         |
//!
//! For `quad` the constants are exact: γ = 1, μ = λ_min(H) for both the
//! WQSC and the distance-growth form. For `sinsq` the joint estimate pins μ
//! to zero (the sample attaining the WQC ratio is tight), so the WQSC pair
//! is certified at the smaller γ = 1/4 instead. For the other two they are the
//! output of [`crate::classcheck`] on the box, frozen below; the tests in
//! this module re-derive them. `sinsq` is separable, so its n-dimensional
//! constants are at least the one-dimensional ones (ratios of sums are
//! bounded below by the smallest coordinate ratio). `flat_quartic`'s box
//! is inscribed in the ball of radius r, where the Hessian
//! 4‖x‖²I + 8xxᵀ has norm at most 12r².

use nalgebra::DVector;

use crate::classcheck;
use crate::error::{invalid, Result};
use crate::objective::{make_quadratic_objective, FlatQuartic, Matrix, Oracle, Point, SinSq};
use crate::params::ClassParams;
use crate::sampling::uniform_grid;

/// Grid size used to certify the nonconvex entries.
pub const CERTIFY_GRID: usize = 10_000;

/// WQC constant of `sinsq` on [−5, 5], certified on the 10⁴-point grid.
pub const SINSQ_GAMMA: f64 = 0.496_090_083_772_736_17;
/// WQSC μ at [`SINSQ_GAMMA`]. The ratio minimizer leaves no room, so this is
/// zero up to rounding.
pub const SINSQ_MU: f64 = 1.873_501_354_054_951_7e-16;
/// Distance-growth constant of `sinsq` on the same grid.
pub const SINSQ_QG_MU: f64 = 2.000_000_029_829_559;
/// γ used for the strongly-convex-like (W) pair of `sinsq`.
pub const SINSQ_W_GAMMA: f64 = 0.25;
/// WQSC μ at [`SINSQ_W_GAMMA`], bisection on the same grid.
pub const SINSQ_W_MU: f64 = 2.808_495_587_213_345_7;

pub const SINSQ_BOX: (f64, f64) = (-5.0, 5.0);
pub const SINSQ_L: f64 = 8.0;

/// One catalogue objective and its documented metadata.
#[derive(Debug, Clone)]
pub struct CatalogueEntry {
    pub id: &'static str,
    pub oracle: Oracle,
    /// Every coordinate of the certification box lies in `[lo, hi]`.
    pub lo: f64,
    pub hi: f64,
    pub default_x0: Point,
    /// (L, γ, μ) for the WQSC class on the box.
    pub params: ClassParams,
    /// Largest WQC γ on the box. May exceed `params.gamma`.
    pub wqc_gamma: f64,
    /// Distance-form growth constant on the box (the μ of the WQ class).
    pub growth_mu: f64,
}

impl CatalogueEntry {
    pub fn dimension(&self) -> usize {
        self.oracle.dimension()
    }

    pub fn x_star(&self) -> &Point {
        self.oracle.known_minimizer().expect("catalogue entries know their minimizer")
    }

    /// Constants of the WQ class: WQC γ with the distance-growth μ.
    pub fn wq_params(&self) -> ClassParams {
        ClassParams {
            gamma: self.wqc_gamma,
            mu: self.growth_mu,
            tau: None,
            zeta: None,
            ..self.params
        }
    }

    /// WQC constants with μ = 0.
    pub fn wqc_params(&self) -> ClassParams {
        ClassParams {
            gamma: self.wqc_gamma,
            mu: 0.0,
            tau: None,
            zeta: None,
            ..self.params
        }
    }

    /// Deterministic samples from the box: a uniform grid in 1D, Halton otherwise.
    pub fn samples(&self, n: usize) -> Vec<Point> {
        crate::sampling::box_samples(self.dimension(), self.lo, self.hi, n)
    }
}

/// `quad` with Hessian diag(`diag`) and minimizer at the origin.
pub fn quad(diag: &[f64]) -> Result<CatalogueEntry> {
    if diag.is_empty() || diag.iter().any(|&d| !(d > 0.0 && d.is_finite())) {
        return invalid("quad needs positive finite diagonal entries");
    }
    let n = diag.len();
    let h = Matrix::from_diagonal(&DVector::from_column_slice(diag));
    let oracle = make_quadratic_objective(h, Point::zeros(n))?;
    let l = diag.iter().copied().fold(f64::MIN, f64::max);
    let mu = diag.iter().copied().fold(f64::MAX, f64::min);
    Ok(CatalogueEntry {
        id: "quad",
        oracle,
        lo: -3.0,
        hi: 3.0,
        default_x0: Point::from_element(n, 3.0),
        params: ClassParams::new(l, 1.0, mu)?,
        wqc_gamma: 1.0,
        growth_mu: mu,
    })
}

pub fn sinsq(dim: usize) -> Result<CatalogueEntry> {
    if dim == 0 {
        return invalid("dimension must be at least 1");
    }
    Ok(CatalogueEntry {
        id: "sinsq",
        oracle: Oracle::new("sinsq", SinSq { dimension: dim }).with_minimizer(Point::zeros(dim), 0.0),
        lo: SINSQ_BOX.0,
        hi: SINSQ_BOX.1,
        default_x0: Point::from_element(dim, 4.0),
        params: ClassParams::new(SINSQ_L, SINSQ_W_GAMMA, SINSQ_W_MU)?,
        wqc_gamma: SINSQ_GAMMA,
        growth_mu: SINSQ_QG_MU,
    })
}

pub fn flat_quartic(dim: usize, radius: f64) -> Result<CatalogueEntry> {
    if dim == 0 {
        return invalid("dimension must be at least 1");
    }
    if !(radius > 0.0 && radius.is_finite()) {
        return invalid("radius must be positive");
    }
    let half = radius / (dim as f64).sqrt();
    Ok(CatalogueEntry {
        id: "flat_quartic",
        oracle: Oracle::new("flat_quartic", FlatQuartic { dimension: dim }).with_minimizer(Point::zeros(dim), 0.0),
        lo: -half,
        hi: half,
        default_x0: Point::from_element(dim, half),
        params: ClassParams::new(12.0 * radius * radius, 1.0, 0.0)?,
        wqc_gamma: 1.0,
        growth_mu: 0.0,
    })
}

/// Look up a nonconvex catalogue entry by id.
pub fn make_nonconvex_test_objective(id: &str, dim: usize) -> Result<CatalogueEntry> {
    match id {
        "sinsq" => sinsq(dim),
        "flat_quartic" => flat_quartic(dim, 1.0),
        other => invalid(format!("unknown nonconvex objective '{other}' (known: sinsq, flat_quartic)")),
    }
}

/// Certified constants of the 1D `sinsq`.
#[derive(Debug, Clone, Copy)]
pub struct SinsqCertificate {
    /// Joint estimate: WQC γ, then μ at that γ.
    pub params: ClassParams,
    pub growth_mu: f64,
    /// μ at [`SINSQ_W_GAMMA`].
    pub w_mu: f64,
}

/// Recompute the certified constants of the 1D `sinsq` on its box.
pub fn certify_sinsq() -> Result<SinsqCertificate> {
    let oracle = Oracle::new("sinsq", SinSq { dimension: 1 });
    let grid = uniform_grid(SINSQ_BOX.0, SINSQ_BOX.1, CERTIFY_GRID);
    let x_star = Point::zeros(1);
    let params = classcheck::estimate_params_with_lipschitz(&oracle, &x_star, &grid, SINSQ_L)?;
    let growth_mu = classcheck::estimate_quadratic_growth(&oracle, &x_star, &grid)?;
    let w_mu = classcheck::estimate_wqsc_mu(&oracle, &x_star, &grid, SINSQ_W_GAMMA, SINSQ_L)?;
    Ok(SinsqCertificate { params, growth_mu, w_mu })
}
