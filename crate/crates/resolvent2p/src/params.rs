//! Physical parameters, admissibility validation, and derived constants.
//!
//! The model couples a compressible capillary fluid occupying the upper
//! half-space `x_N > 0` (density `rho_plus`, viscosities `mu_plus`,
//! `nu_plus`, capillarity `kappa_plus`) with an incompressible fluid in the
//! lower half-space `x_N < 0` (density `rho_minus`, viscosity `mu_minus`),
//! separated by an interface at `x_N = 0` carrying surface tension `sigma`.
//!
//! [`validate_params`] is the single gate through which every other module
//! receives parameters: it rejects non-positive constants, unsupported
//! dimensions, equal densities, a too-small bulk-viscosity excess, and the
//! two algebraic degeneracies (`eta_star = 0`, which collides the two
//! capillary roots with each other, and `rho_plus^2 kappa_plus =
//! mu_plus nu_plus`, which collides them with the Stokes root). Code holding
//! a [`ValidatedParams`] may therefore divide by all the usual root
//! differences without further checks away from the per-point guards in
//! [`crate::symbols`].

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Relative tolerance below which a quantity counts as degenerate during
/// validation (root collisions, equal densities).
pub const DEGENERACY_RTOL: f64 = 1e-10;

/// Raw physical parameters as supplied by a user, a config file, or a
/// random draw. Construct freely; pass through [`validate_params`] before
/// doing mathematics with them.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalParams {
    /// Spatial dimension `N` of the ambient space; 2 or 3.
    pub dim: usize,
    /// Density of the compressible phase on `x_N > 0`; positive.
    pub rho_plus: f64,
    /// Shear viscosity of the compressible phase; positive.
    pub mu_plus: f64,
    /// Second viscosity of the compressible phase; must exceed
    /// `(N-1)/N * mu_plus`.
    pub nu_plus: f64,
    /// Capillarity coefficient of the compressible phase; positive.
    pub kappa_plus: f64,
    /// Density of the incompressible phase on `x_N < 0`; positive and
    /// distinct from `rho_plus`.
    pub rho_minus: f64,
    /// Shear viscosity of the incompressible phase; positive.
    pub mu_minus: f64,
    /// Surface tension coefficient of the interface; non-negative.
    pub sigma: f64,
}

/// Why a parameter set was rejected by [`validate_params`].
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParamError {
    /// A constant that must be positive (densities, viscosities,
    /// capillarity) or non-negative (surface tension) is not.
    #[error("non-positive constant: {name} = {value}")]
    NonPositiveConstant {
        /// Field name of the offending constant.
        name: &'static str,
        /// The rejected value.
        value: f64,
    },
    /// The spatial dimension is not 2 or 3.
    #[error("unsupported dimension N = {0}; only N = 2 and N = 3 are supported")]
    UnsupportedDimension(usize),
    /// `nu_plus <= (N-1)/N * mu_plus`: the combination
    /// `nu_plus - (N-1)/N * mu_plus` (bulk viscosity) must be positive.
    #[error(
        "viscosity ratio violated: nu_plus = {nu_plus} must strictly exceed \
         (N-1)/N * mu_plus = {threshold}"
    )]
    ViscosityRatio {
        /// The rejected second viscosity.
        nu_plus: f64,
        /// The strict lower bound `(N-1)/N * mu_plus`.
        threshold: f64,
    },
    /// `rho_plus = rho_minus` (within [`DEGENERACY_RTOL`] relative): the
    /// weighted surface tensions `sigma_pm = rho_pm sigma / (rho_minus -
    /// rho_plus)` are undefined.
    #[error("equal densities: rho_plus = rho_minus = {0}")]
    EqualDensities(f64),
    /// The discriminant `eta_star = b^2 - 1/kappa_plus` of the capillary
    /// root quadratic vanishes, colliding `s1` with `s2`.
    #[error("eta_star = {0:.3e} is zero within tolerance; s1 and s2 coincide")]
    EtaStarZero(f64),
    /// `rho_plus^2 kappa_plus = mu_plus nu_plus` (or the unscaled
    /// `kappa_plus = mu_plus nu_plus`), which collides a capillary root
    /// `t_i` with the Stokes root `B_plus` for every frequency.
    #[error(
        "kappa degeneracy: kappa_plus = {kappa_plus} too close to \
         mu_plus*nu_plus/rho_plus^2 = {critical}; t_i = B_plus identically"
    )]
    KappaEqualsMuNu {
        /// The rejected capillarity.
        kappa_plus: f64,
        /// The critical value `mu_plus nu_plus / rho_plus^2`.
        critical: f64,
    },
}

/// Constants derived once from a validated parameter set.
///
/// `s1`, `s2` are the roots of the capillary quadratic
/// `z^2 - ((mu_plus + nu_plus)/(rho_plus kappa_plus)) z + 1/kappa_plus = 0`,
/// ordered by `s1 = b + sqrt(eta_star)` (principal square root, so for
/// `eta_star < 0` the pair is complex conjugate with `Im s1 > 0`).
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct DerivedConstants {
    /// Weighted surface tension `rho_plus sigma / (rho_minus - rho_plus)`.
    pub sigma_plus: f64,
    /// Weighted surface tension `rho_minus sigma / (rho_minus - rho_plus)`.
    pub sigma_minus: f64,
    /// Half the root sum: `b = (mu_plus + nu_plus) / (2 rho_plus kappa_plus)`.
    pub b: f64,
    /// Discriminant `eta_star = b^2 - 1/kappa_plus` of the capillary
    /// quadratic.
    pub eta_star: f64,
    /// First capillary root `s1 = b + sqrt(eta_star)`.
    pub s1: Complex64,
    /// Second capillary root `s2 = b - sqrt(eta_star)`.
    pub s2: Complex64,
    /// Vieta sum `s1 + s2 = (mu_plus + nu_plus)/(rho_plus kappa_plus)`.
    pub s_sum: f64,
    /// Vieta product `s1 s2 = 1/kappa_plus`.
    pub s_prod: f64,
    /// Large-frequency regime constant `omega1 = 8 rho_plus (1 +
    /// mu_minus/mu_plus)`: for `|lambda|^(1/2) >= omega1 A` the Stokes-root
    /// terms dominate the Lopatinski determinant.
    pub omega1: f64,
    /// Large-frequency regime constant entering the lower bound of the
    /// reduced determinant in the `A / |lambda|^(1/2) -> 0` regime:
    /// `omega2 = (s1 + sqrt(s1 s2) + s2) * (rho_plus^2 rho_minus /
    /// (mu_plus mu_minus) + (rho_plus rho_minus)^(3/2) / (mu_plus^(3/2)
    /// mu_minus^(1/2)))`.
    pub omega2: f64,
    /// Kinetic-symbol limit constant: `K_H / A -> omega3` as
    /// `|lambda|^(1/2)/A -> 0`, with
    /// `omega3 = (rho_plus/(rho_minus-rho_plus))^2 sigma/(2 mu_plus)
    ///        + (rho_minus/(rho_minus-rho_plus))^2 sigma/(2 mu_minus)`.
    pub omega3: f64,
}

impl DerivedConstants {
    /// Sector-dependent constant `omega4(eps) = min(1/4, omega3/4,
    /// sin(eps/2)/2, omega3 sin(eps/2)/2)`, a valid choice of `lambda_0`
    /// margin for the kinetic symbol on the shifted sector.
    pub fn omega4(&self, eps: f64) -> f64 {
        let s = (0.5 * eps).sin();
        (0.25_f64)
            .min(0.25 * self.omega3)
            .min(0.5 * s)
            .min(0.5 * self.omega3 * s)
    }
}

/// A parameter set that passed [`validate_params`], together with its
/// [`DerivedConstants`]. The only way to obtain one is through validation,
/// so downstream code can rely on the admissibility guarantees.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ValidatedParams {
    raw: PhysicalParams,
    derived: DerivedConstants,
}

impl ValidatedParams {
    /// Spatial dimension `N` (2 or 3).
    pub fn dim(&self) -> usize {
        self.raw.dim
    }
    /// Density of the compressible phase.
    pub fn rho_plus(&self) -> f64 {
        self.raw.rho_plus
    }
    /// Shear viscosity of the compressible phase.
    pub fn mu_plus(&self) -> f64 {
        self.raw.mu_plus
    }
    /// Second viscosity of the compressible phase.
    pub fn nu_plus(&self) -> f64 {
        self.raw.nu_plus
    }
    /// Capillarity coefficient of the compressible phase.
    pub fn kappa_plus(&self) -> f64 {
        self.raw.kappa_plus
    }
    /// Density of the incompressible phase.
    pub fn rho_minus(&self) -> f64 {
        self.raw.rho_minus
    }
    /// Shear viscosity of the incompressible phase.
    pub fn mu_minus(&self) -> f64 {
        self.raw.mu_minus
    }
    /// Surface tension coefficient.
    pub fn sigma(&self) -> f64 {
        self.raw.sigma
    }
    /// Weighted surface tension `rho_plus sigma / (rho_minus - rho_plus)`.
    pub fn sigma_plus(&self) -> f64 {
        self.derived.sigma_plus
    }
    /// Weighted surface tension `rho_minus sigma / (rho_minus - rho_plus)`.
    pub fn sigma_minus(&self) -> f64 {
        self.derived.sigma_minus
    }
    /// The constants derived at validation time.
    pub fn derived(&self) -> &DerivedConstants {
        &self.derived
    }
    /// The raw parameter record this was validated from.
    pub fn raw(&self) -> &PhysicalParams {
        &self.raw
    }
}

/// Computes the derived constants of an already-admissible parameter set.
///
/// Exposed separately so reports can show the derivation; [`validate_params`]
/// calls this internally and stores the result on the [`ValidatedParams`].
pub fn derived_constants(p: &PhysicalParams) -> DerivedConstants {
    let drho = p.rho_minus - p.rho_plus;
    let sigma_plus = p.rho_plus * p.sigma / drho;
    let sigma_minus = p.rho_minus * p.sigma / drho;
    let s_sum = (p.mu_plus + p.nu_plus) / (p.rho_plus * p.kappa_plus);
    let s_prod = 1.0 / p.kappa_plus;
    let b = 0.5 * s_sum;
    let eta_star = b * b - s_prod;
    let sqrt_eta = Complex64::new(eta_star, 0.0).sqrt();
    let s1 = Complex64::new(b, 0.0) + sqrt_eta;
    let s2 = Complex64::new(b, 0.0) - sqrt_eta;
    let omega1 = 8.0 * p.rho_plus * (1.0 + p.mu_minus / p.mu_plus);
    // s1 + sqrt(s1 s2) + s2 is real for every admissible set: the sum is
    // s_sum and the product is 1/kappa_plus > 0.
    let s_factor = s_sum + s_prod.sqrt();
    let omega2 = s_factor
        * (p.rho_plus * p.rho_plus * p.rho_minus / (p.mu_plus * p.mu_minus)
            + (p.rho_plus * p.rho_minus).powf(1.5)
                / (p.mu_plus.powf(1.5) * p.mu_minus.sqrt()));
    let wp = p.rho_plus / drho;
    let wm = p.rho_minus / drho;
    let omega3 =
        wp * wp * p.sigma / (2.0 * p.mu_plus) + wm * wm * p.sigma / (2.0 * p.mu_minus);
    DerivedConstants {
        sigma_plus,
        sigma_minus,
        b,
        eta_star,
        s1,
        s2,
        s_sum,
        s_prod,
        omega1,
        omega2,
        omega3,
    }
}

/// Validates a parameter set and computes its derived constants.
///
/// Checks run in a fixed order so that error reporting is deterministic:
/// positivity, dimension, viscosity ratio, equal densities, `eta_star = 0`,
/// then the `kappa = mu nu` degeneracies.
pub fn validate_params(p: &PhysicalParams) -> Result<ValidatedParams, ParamError> {
    for (name, value) in [
        ("rho_plus", p.rho_plus),
        ("mu_plus", p.mu_plus),
        ("nu_plus", p.nu_plus),
        ("kappa_plus", p.kappa_plus),
        ("rho_minus", p.rho_minus),
        ("mu_minus", p.mu_minus),
    ] {
        if !(value > 0.0) || !value.is_finite() {
            return Err(ParamError::NonPositiveConstant { name, value });
        }
    }
    if !(p.sigma >= 0.0) || !p.sigma.is_finite() {
        return Err(ParamError::NonPositiveConstant {
            name: "sigma",
            value: p.sigma,
        });
    }
    if p.dim != 2 && p.dim != 3 {
        return Err(ParamError::UnsupportedDimension(p.dim));
    }
    let n = p.dim as f64;
    let threshold = (n - 1.0) / n * p.mu_plus;
    if !(p.nu_plus > threshold) {
        return Err(ParamError::ViscosityRatio {
            nu_plus: p.nu_plus,
            threshold,
        });
    }
    if (p.rho_minus - p.rho_plus).abs() < DEGENERACY_RTOL * p.rho_plus.max(p.rho_minus) {
        return Err(ParamError::EqualDensities(p.rho_plus));
    }
    let derived = derived_constants(p);
    // eta_star = 0 first: it is the finer degeneracy (s1 = s2), and the
    // threshold scales like the square of the root sum so that rescaled
    // parameter families are accepted or rejected consistently.
    let eta_scale = (derived.s_sum * derived.s_sum).max(1.0);
    if derived.eta_star.abs() < DEGENERACY_RTOL * eta_scale {
        return Err(ParamError::EtaStarZero(derived.eta_star));
    }
    let munu = p.mu_plus * p.nu_plus;
    let critical = munu / (p.rho_plus * p.rho_plus);
    let scaled = p.rho_plus * p.rho_plus * p.kappa_plus;
    if (p.kappa_plus - munu).abs() < DEGENERACY_RTOL * p.kappa_plus
        || (scaled - munu).abs() < DEGENERACY_RTOL * scaled
    {
        return Err(ParamError::KappaEqualsMuNu {
            kappa_plus: p.kappa_plus,
            critical,
        });
    }
    Ok(ValidatedParams { raw: *p, derived })
}
