//! Spectral points, characteristic roots, and the cancellation-safe
//! difference kernels `M`.
//!
//! Everything downstream works on the partial Fourier side: a
//! [`SpectralPoint`] is a resolvent parameter `lambda` together with a
//! tangential frequency `xi'` (length 1 for `N = 2`, length 2 for `N = 3`),
//! with `A = |xi'|`. [`characteristic_roots`] produces the four decay rates
//! of the problem,
//!
//! * `B_plus  = sqrt(A^2 + rho_plus  lambda / mu_plus)` (Stokes root, upper),
//! * `B_minus = sqrt(A^2 + rho_minus lambda / mu_minus)` (Stokes root, lower),
//! * `t_i     = sqrt(A^2 + s_i lambda)` for the capillary roots `s_1, s_2`,
//!
//! all principal square roots, plus the combination
//! `T = t1^2 + t1 t2 + t2^2 - A^2` that the Lopatinski factorization uses.
//!
//! The solution formulas below are organised around *differences* of decaying
//! exponentials. [`eval_M`] evaluates the three difference kernels
//!
//! * `M_{0+}(x) = (e^{-t2 x} - e^{-t1 x}) / (t2 - t1)` on `x >= 0`,
//! * `M_{i+}(x) = (e^{-t_i x} - e^{-B_plus x}) / (t_i - B_plus)` on `x >= 0`,
//! * `M_{-}(x)  = (e^{B_minus x} - e^{A x}) / (B_minus - A)` on `x <= 0`,
//!
//! switching to a `phi1` power-series form when the exponent gap is small, so
//! the values stay accurate through near-confluent root configurations.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::params::ValidatedParams;

/// Relative root-separation threshold below which [`characteristic_roots`]
/// refuses the point as degenerate.
pub const ROOT_SEPARATION_RTOL: f64 = 1e-12;

/// `|gap * x|` threshold below which [`eval_M`] switches from the explicit
/// exponential difference to the `phi1` series form.
pub const M_SERIES_THRESHOLD: f64 = 1e-3;

/// A point of the resolvent set on the partial Fourier side: the resolvent
/// parameter `lambda` and the tangential frequency `xi'`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralPoint {
    /// Resolvent parameter; normally drawn from a sector
    /// `|arg lambda| <= pi - eps`.
    pub lambda: Complex64,
    xi: [f64; 2],
    n_tangential: usize,
}

impl SpectralPoint {
    /// Creates a spectral point from `lambda` and the tangential frequency
    /// components (`xi'.len()` must be 1 for `N = 2` or 2 for `N = 3`).
    ///
    /// # Panics
    /// If `xi_prime` has a length other than 1 or 2.
    pub fn new(lambda: Complex64, xi_prime: &[f64]) -> Self {
        assert!(
            xi_prime.len() == 1 || xi_prime.len() == 2,
            "xi' must have 1 or 2 components, got {}",
            xi_prime.len()
        );
        let mut xi = [0.0; 2];
        xi[..xi_prime.len()].copy_from_slice(xi_prime);
        Self {
            lambda,
            xi,
            n_tangential: xi_prime.len(),
        }
    }

    /// The tangential frequency components `xi' in R^(N-1)`.
    pub fn xi_prime(&self) -> &[f64] {
        &self.xi[..self.n_tangential]
    }

    /// The tangential modulus `A = |xi'|`.
    pub fn a(&self) -> f64 {
        match self.n_tangential {
            1 => self.xi[0].abs(),
            _ => self.xi[0].hypot(self.xi[1]),
        }
    }

    /// Spatial dimension `N` implied by the tangential frequency length.
    pub fn dim(&self) -> usize {
        self.n_tangential + 1
    }

    /// The inhomogeneous weight `|lambda|^(1/2) + A` that all multiplier
    /// estimates are measured against.
    pub fn weight(&self) -> f64 {
        self.lambda.norm().sqrt() + self.a()
    }

    /// Regime indicators `(delta1, delta2) = (|lambda|^(1/2)/A,
    /// A/|lambda|^(1/2))`; infinite when the respective denominator
    /// vanishes.
    pub fn regime_deltas(&self) -> (f64, f64) {
        let sq = self.lambda.norm().sqrt();
        let a = self.a();
        let d1 = if a > 0.0 { sq / a } else { f64::INFINITY };
        let d2 = if sq > 0.0 { a / sq } else { f64::INFINITY };
        (d1, d2)
    }
}

/// Why a spectral point was rejected by [`characteristic_roots`].
#[derive(Debug, Clone, PartialEq, Error)]
pub enum SymbolError {
    /// Two decay roots coincide to within [`ROOT_SEPARATION_RTOL`] relative
    /// to the weight `|lambda|^(1/2) + A` (or the weight itself vanishes).
    #[error("degenerate roots at lambda = {lambda}, A = {a}: {which}")]
    DegenerateRoots {
        /// The offending resolvent parameter.
        lambda: Complex64,
        /// The tangential modulus.
        a: f64,
        /// Which pair of roots collided.
        which: &'static str,
    },
    /// A root has non-positive real part, so the corresponding mode does not
    /// decay; the point lies outside the certified resolvent region.
    #[error("non-decaying root {name} = {value} at lambda = {lambda}, A = {a}")]
    NonDecayingRoot {
        /// Name of the offending root.
        name: &'static str,
        /// Its value.
        value: Complex64,
        /// The resolvent parameter.
        lambda: Complex64,
        /// The tangential modulus.
        a: f64,
    },
}

/// The characteristic decay roots of a spectral point, plus derived
/// combinations used throughout the solution formulas.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SymbolSet {
    /// Tangential modulus `A = |xi'|`.
    pub a: f64,
    /// Inhomogeneous weight `|lambda|^(1/2) + A`.
    pub weight: f64,
    /// Stokes root of the upper (compressible) phase.
    pub b_plus: Complex64,
    /// Stokes root of the lower (incompressible) phase.
    pub b_minus: Complex64,
    /// First capillary root `t1 = sqrt(A^2 + s1 lambda)`.
    pub t1: Complex64,
    /// Second capillary root `t2 = sqrt(A^2 + s2 lambda)`.
    pub t2: Complex64,
    /// The symmetric combination `T = t1^2 + t1 t2 + t2^2 - A^2`.
    pub cap_t: Complex64,
}

/// Computes the characteristic roots of `pt`, rejecting degenerate or
/// non-decaying configurations.
pub fn characteristic_roots(
    p: &ValidatedParams,
    pt: &SpectralPoint,
) -> Result<SymbolSet, SymbolError> {
    let a = pt.a();
    let a2 = Complex64::new(a * a, 0.0);
    let weight = pt.weight();
    if weight == 0.0 {
        return Err(SymbolError::DegenerateRoots {
            lambda: pt.lambda,
            a,
            which: "lambda = 0 and A = 0: all roots vanish",
        });
    }
    let d = p.derived();
    let b_plus = (a2 + pt.lambda * (p.rho_plus() / p.mu_plus())).sqrt();
    let b_minus = (a2 + pt.lambda * (p.rho_minus() / p.mu_minus())).sqrt();
    let t1 = (a2 + d.s1 * pt.lambda).sqrt();
    let t2 = (a2 + d.s2 * pt.lambda).sqrt();
    for (name, value) in [
        ("B_plus", b_plus),
        ("B_minus", b_minus),
        ("t1", t1),
        ("t2", t2),
    ] {
        if !(value.re > 0.0) {
            return Err(SymbolError::NonDecayingRoot {
                name,
                value,
                lambda: pt.lambda,
                a,
            });
        }
    }
    let sep = ROOT_SEPARATION_RTOL * weight;
    for (which, gap) in [
        ("t1 = t2", t1 - t2),
        ("t1 = B_plus", t1 - b_plus),
        ("t2 = B_plus", t2 - b_plus),
    ] {
        if gap.norm() < sep {
            return Err(SymbolError::DegenerateRoots {
                lambda: pt.lambda,
                a,
                which,
            });
        }
    }
    let cap_t = t1 * t1 + t1 * t2 + t2 * t2 - a2;
    Ok(SymbolSet {
        a,
        weight,
        b_plus,
        b_minus,
        t1,
        t2,
        cap_t,
    })
}

/// Which difference kernel [`eval_M`] evaluates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MKind {
    /// `M_{0+}(x) = (e^{-t2 x} - e^{-t1 x}) / (t2 - t1)`, `x >= 0`.
    MZeroPlus,
    /// `M_{1+}(x) = (e^{-t1 x} - e^{-B_plus x}) / (t1 - B_plus)`, `x >= 0`.
    MOnePlus,
    /// `M_{2+}(x) = (e^{-t2 x} - e^{-B_plus x}) / (t2 - B_plus)`, `x >= 0`.
    MTwoPlus,
    /// `M_{-}(x) = (e^{B_minus x} - e^{A x}) / (B_minus - A)`, `x <= 0`.
    MMinus,
}

/// `phi1(z) = (e^z - 1)/z`, series form for small `|z|` (relative truncation
/// error below 1e-17 at the switch point), explicit otherwise.
fn phi1(z: Complex64) -> Complex64 {
    if z.norm() < M_SERIES_THRESHOLD {
        // 1 + z/2 + z^2/6 + z^3/24 + z^4/120 (Horner form).
        let one = Complex64::new(1.0, 0.0);
        one + z * (Complex64::new(0.5, 0.0)
            + z * (Complex64::new(1.0 / 6.0, 0.0)
                + z * (Complex64::new(1.0 / 24.0, 0.0)
                    + z * Complex64::new(1.0 / 120.0, 0.0))))
    } else {
        (z.exp() - Complex64::new(1.0, 0.0)) / z
    }
}

/// Kernel parameters: base exponent `base`, gap `gap`, and sign pattern such
/// that `M(x) = sign * x * exp(base * x) * phi1(gap * x)`.
fn m_parts(kind: MKind, s: &SymbolSet) -> (Complex64, Complex64, f64) {
    match kind {
        // (e^{-t2 x}-e^{-t1 x})/(t2-t1) = -x e^{-t1 x} phi1((t1-t2) x)
        MKind::MZeroPlus => (-s.t1, s.t1 - s.t2, -1.0),
        // (e^{-t_i x}-e^{-B x})/(t_i-B) = -x e^{-t_i x} phi1((t_i-B) x)
        MKind::MOnePlus => (-s.t1, s.t1 - s.b_plus, -1.0),
        MKind::MTwoPlus => (-s.t2, s.t2 - s.b_plus, -1.0),
        // (e^{B x}-e^{A x})/(B-A) = x e^{B x} phi1(-(B-A) x), x <= 0
        MKind::MMinus => (
            s.b_minus,
            -(s.b_minus - Complex64::new(s.a, 0.0)),
            1.0,
        ),
    }
}

/// Evaluates the difference kernel `kind` at `x` (in the half-line the kind
/// lives on: `x >= 0` for the plus kernels, `x <= 0` for `M_minus`).
///
/// The evaluation is cancellation-safe: when the two exponents are within
/// [`M_SERIES_THRESHOLD`] of each other (scaled by `x`), a `phi1` series is
/// used instead of the explicit difference, and the two branches agree to
/// near machine precision at the switch.
#[allow(non_snake_case)] // the capital M is the kernel's name
pub fn eval_M(kind: MKind, s: &SymbolSet, x: f64) -> Complex64 {
    debug_assert!(
        match kind {
            MKind::MMinus => x <= 0.0,
            _ => x >= 0.0,
        },
        "eval_M({kind:?}) evaluated on the wrong half-line: x = {x}"
    );
    let (base, gap, sign) = m_parts(kind, s);
    let z = gap * x;
    if z.norm() < M_SERIES_THRESHOLD {
        Complex64::new(sign * x, 0.0) * (base * x).exp() * phi1(z)
    } else {
        // Explicit difference; gaps are non-degenerate by construction.
        match kind {
            MKind::MZeroPlus => {
                ((-s.t2 * x).exp() - (-s.t1 * x).exp()) / (s.t2 - s.t1)
            }
            MKind::MOnePlus => {
                ((-s.t1 * x).exp() - (-s.b_plus * x).exp()) / (s.t1 - s.b_plus)
            }
            MKind::MTwoPlus => {
                ((-s.t2 * x).exp() - (-s.b_plus * x).exp()) / (s.t2 - s.b_plus)
            }
            MKind::MMinus => {
                let a = Complex64::new(s.a, 0.0);
                ((s.b_minus * x).exp() - (a * x).exp()) / (s.b_minus - a)
            }
        }
    }
}

/// Evaluates `[M, M', ..., M^(order)]` for the kernel `kind` at `x`, using
/// the analytic first-order recurrences (no finite differences):
///
/// * `M_{0+}' = -t2 M_{0+} - e^{-t1 x}`
/// * `M_{i+}' = -B_plus M_{i+} - e^{-t_i x}`
/// * `M_{-}'  =  A M_{-} + e^{B_minus x}`
///
/// # Panics
/// If `order > 3`.
#[allow(non_snake_case)] // the capital M is the kernel's name
pub fn eval_M_derivatives(
    kind: MKind,
    s: &SymbolSet,
    x: f64,
    order: usize,
) -> Vec<Complex64> {
    assert!(order <= 3, "eval_M_derivatives supports order <= 3, got {order}");
    let m0 = eval_M(kind, s, x);
    let mut out = Vec::with_capacity(order + 1);
    out.push(m0);
    // M' = c M + e_fac * exp(e_rate x); higher derivatives follow by
    // differentiating the same identity.
    let (c, e_rate, e_fac) = match kind {
        MKind::MZeroPlus => (-s.t2, -s.t1, -Complex64::new(1.0, 0.0)),
        MKind::MOnePlus => (-s.b_plus, -s.t1, -Complex64::new(1.0, 0.0)),
        MKind::MTwoPlus => (-s.b_plus, -s.t2, -Complex64::new(1.0, 0.0)),
        MKind::MMinus => (
            Complex64::new(s.a, 0.0),
            s.b_minus,
            Complex64::new(1.0, 0.0),
        ),
    };
    let e0 = (e_rate * x).exp();
    let mut e_term = e_fac * e0; // e_fac * e_rate^k * exp(e_rate x)
    for k in 1..=order {
        let prev = out[k - 1];
        out.push(c * prev + e_term);
        e_term *= e_rate;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::{validate_params, PhysicalParams};
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn assert_cx(actual: Complex64, expected: Complex64, rtol: f64) {
        let scale = expected.norm().max(1e-300);
        assert!(
            (actual - expected).norm() <= rtol * scale,
            "expected {expected}, got {actual} (rtol {rtol})"
        );
    }

    /// Baseline admissible set (real capillary roots).
    fn main_set() -> ValidatedParams {
        validate_params(&PhysicalParams {
            dim: 3,
            rho_plus: 1.4,
            mu_plus: 1.5,
            nu_plus: 2.0,
            kappa_plus: 4.0 / 3.0,
            rho_minus: 2.0,
            mu_minus: 1.25,
            sigma: 0.3,
        })
        .unwrap()
    }

    /// Complex-root set (eta_star < 0).
    fn complex_set() -> ValidatedParams {
        validate_params(&PhysicalParams {
            dim: 3,
            rho_plus: 1.4,
            mu_plus: 0.5,
            nu_plus: 0.5,
            kappa_plus: 2.0,
            rho_minus: 2.0,
            mu_minus: 1.25,
            sigma: 0.3,
        })
        .unwrap()
    }

    /// The reference spectral point: lambda = 2 e^{i 2 pi / 5},
    /// xi' = (0.7, -0.4).
    fn ref_point() -> SpectralPoint {
        SpectralPoint::new(Complex64::from_polar(2.0, 2.0 * PI / 5.0), &[0.7, -0.4])
    }

    const GOLDEN_RTOL: f64 = 1e-13;

    #[test]
    fn golden_roots_main_set() {
        let s = characteristic_roots(&main_set(), &ref_point()).unwrap();
        assert_cx(
            c(s.a, 0.0),
            c(0.80622577482985496523666132303, 0.0),
            GOLDEN_RTOL,
        );
        assert_cx(
            s.b_plus,
            c(1.30092268704924640316690936895, 0.682325519709028839728952762067),
            GOLDEN_RTOL,
        );
        assert_cx(
            s.b_minus,
            c(1.59615848872123095746418747111, 0.95334544584689353647945843647),
            GOLDEN_RTOL,
        );
        assert_cx(
            s.t1,
            c(1.46846981428675991607043310659, 0.839702801971860071785568959861),
            GOLDEN_RTOL,
        );
        assert_cx(
            s.t2,
            c(1.11790112578684167167715776582, 0.492130062037906267564848384954),
            GOLDEN_RTOL,
        );
        assert_cx(
            s.cap_t,
            c(3.03717479545340084817482791886, 5.22784478456326949740996172638),
            GOLDEN_RTOL,
        );
    }

    #[test]
    fn golden_roots_complex_set() {
        let s = characteristic_roots(&complex_set(), &ref_point()).unwrap();
        assert_cx(
            s.b_plus,
            c(2.02659846952568375461133068104, 1.31400387677667761546513925647),
            GOLDEN_RTOL,
        );
        assert_cx(
            s.t1,
            c(0.443802674990714579856332913484, 0.859068774350001875466148952245),
            GOLDEN_RTOL,
        );
        assert_cx(
            s.t2,
            c(1.4361767104669436892326067121, -0.0289616021624654727285656642839),
            GOLDEN_RTOL,
        );
        assert_cx(
            s.cap_t,
            c(1.53298549849105005610497200692, 1.90024741296710262127839046826),
            GOLDEN_RTOL,
        );
    }

    #[test]
    fn root_identity_links_capillary_and_stokes_roots() {
        // (s_j - rho_plus/mu_plus) lambda = t_j^2 - B_plus^2 for j = 1, 2.
        for p in [main_set(), complex_set()] {
            let pt = ref_point();
            let s = characteristic_roots(&p, &pt).unwrap();
            let d = p.derived();
            let ratio = p.rho_plus() / p.mu_plus();
            for (sj, tj) in [(d.s1, s.t1), (d.s2, s.t2)] {
                let lhs = (sj - c(ratio, 0.0)) * pt.lambda;
                let rhs = tj * tj - s.b_plus * s.b_plus;
                assert_cx(lhs, rhs, 1e-13);
            }
        }
    }

    #[test]
    fn rejects_degenerate_and_zero_points() {
        let p = main_set();
        let origin = SpectralPoint::new(c(0.0, 0.0), &[0.0, 0.0]);
        assert!(matches!(
            characteristic_roots(&p, &origin),
            Err(SymbolError::DegenerateRoots { .. })
        ));
        // lambda = 0 at A > 0 collides every root with every other
        // (all equal A), hence must be rejected as degenerate.
        let on_axis = SpectralPoint::new(c(0.0, 0.0), &[0.7, -0.4]);
        assert!(matches!(
            characteristic_roots(&p, &on_axis),
            Err(SymbolError::DegenerateRoots { .. })
        ));
    }

    #[test]
    fn m_kernels_match_explicit_difference_far_from_confluence() {
        let p = main_set();
        let pt = ref_point();
        let s = characteristic_roots(&p, &pt).unwrap();
        let x = 0.8;
        assert_cx(
            eval_M(MKind::MZeroPlus, &s, x),
            ((-s.t2 * x).exp() - (-s.t1 * x).exp()) / (s.t2 - s.t1),
            1e-14,
        );
        assert_cx(
            eval_M(MKind::MOnePlus, &s, x),
            ((-s.t1 * x).exp() - (-s.b_plus * x).exp()) / (s.t1 - s.b_plus),
            1e-14,
        );
        let xm = -0.8;
        let a = c(s.a, 0.0);
        assert_cx(
            eval_M(MKind::MMinus, &s, xm),
            ((s.b_minus * xm).exp() - (a * xm).exp()) / (s.b_minus - a),
            1e-14,
        );
    }

    #[test]
    fn m_kernel_branches_agree_at_the_series_switch() {
        let p = main_set();
        let pt = ref_point();
        let s = characteristic_roots(&p, &pt).unwrap();
        for kind in [MKind::MZeroPlus, MKind::MOnePlus, MKind::MTwoPlus] {
            let (_, gap, _) = super::m_parts(kind, &s);
            // Pick x so |gap * x| straddles the threshold.
            for frac in [0.999, 1.001] {
                let x = frac * M_SERIES_THRESHOLD / gap.norm();
                let direct = match kind {
                    MKind::MZeroPlus => {
                        ((-s.t2 * x).exp() - (-s.t1 * x).exp()) / (s.t2 - s.t1)
                    }
                    MKind::MOnePlus => {
                        ((-s.t1 * x).exp() - (-s.b_plus * x).exp()) / (s.t1 - s.b_plus)
                    }
                    MKind::MTwoPlus => {
                        ((-s.t2 * x).exp() - (-s.b_plus * x).exp()) / (s.t2 - s.b_plus)
                    }
                    MKind::MMinus => unreachable!(),
                };
                assert_cx(eval_M(kind, &s, x), direct, 1e-11);
            }
        }
    }

    #[test]
    fn m_kernel_value_at_zero_is_zero_and_slope_matches() {
        let p = main_set();
        let pt = ref_point();
        let s = characteristic_roots(&p, &pt).unwrap();
        for kind in [MKind::MZeroPlus, MKind::MOnePlus, MKind::MTwoPlus, MKind::MMinus] {
            assert_eq!(eval_M(kind, &s, 0.0), c(0.0, 0.0));
            // M(x) ~ sign * x near 0 (phi1(0) = 1).
            let x = if kind == MKind::MMinus { -1e-9 } else { 1e-9 };
            let v = eval_M(kind, &s, x);
            let sign = if kind == MKind::MMinus { 1.0 } else { -1.0 };
            assert_cx(v, c(sign * x, 0.0), 1e-6);
        }
    }

    #[test]
    fn m_derivatives_match_finite_differences() {
        let p = main_set();
        let pt = ref_point();
        let s = characteristic_roots(&p, &pt).unwrap();
        let h = 1e-5;
        for (kind, x) in [
            (MKind::MZeroPlus, 0.7),
            (MKind::MOnePlus, 0.7),
            (MKind::MTwoPlus, 0.7),
            (MKind::MMinus, -0.7),
        ] {
            let d = eval_M_derivatives(kind, &s, x, 3);
            assert_eq!(d[0], eval_M(kind, &s, x));
            // Central differences of the analytic values.
            let f = |y: f64| eval_M(kind, &s, y);
            let d1 = (f(x + h) - f(x - h)) / (2.0 * h);
            let d2 = (f(x + h) - f(x) * 2.0 + f(x - h)) / (h * h);
            assert_cx(d[1], d1, 1e-8);
            assert_cx(d[2], d2, 1e-5);
            // Third derivative via central difference of second derivatives.
            let d3 = (eval_M_derivatives(kind, &s, x + h, 2)[2]
                - eval_M_derivatives(kind, &s, x - h, 2)[2])
                / (2.0 * h);
            assert_cx(d[3], d3, 1e-8);
        }
    }

    #[test]
    fn weight_and_regime_indicators() {
        let pt = SpectralPoint::new(c(4.0, 0.0), &[3.0, 4.0]);
        assert_eq!(pt.a(), 5.0);
        assert_eq!(pt.weight(), 7.0);
        let (d1, d2) = pt.regime_deltas();
        assert_eq!(d1, 0.4);
        assert_eq!(d2, 2.5);
        assert_eq!(pt.dim(), 3);
        let pt2 = SpectralPoint::new(c(1.0, 0.0), &[-2.0]);
        assert_eq!(pt2.a(), 2.0);
        assert_eq!(pt2.dim(), 2);
    }
}
