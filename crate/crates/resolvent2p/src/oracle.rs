//! Independent spectral-collocation oracle for the interface modes.
//!
//! The closed-form solver in [`crate::mode_solver`] produces mode profiles
//! from explicit amplitude formulas. This module solves the same coupled
//! boundary-value problem a second time with none of that algebra: each
//! half-line is truncated after [`TRUNCATION_DECAY_LENGTHS`] decay lengths,
//! sampled on a Chebyshev grid, and the interior equations, interface
//! conditions, and far-field decay are assembled into one square complex
//! linear system solved by dense LU. The only shared ingredients are the
//! characteristic roots, and they enter solely as a length scale for the
//! truncation; the discretized equations are written directly from the
//! resolvent system.
//!
//! Both sides are posed in first-order companion form. The upper (phase
//! `+`) line carries the velocity components, their vertical derivatives,
//! and the density with two derivative companions (the capillary term is
//! third order in the density); the lower line carries the velocity, its
//! derivative, and the pressure. Equation rows at the interface node are
//! replaced by the interface conditions and rows at the far node by decay
//! conditions, so every equation family stays square.
//!
//! [`compare_with_mode`] measures the worst relative disagreement between
//! the oracle and a closed-form solution over log-spaced vertical stations;
//! [`convergence`] tabulates that disagreement against the collocation
//! order. Because the oracle converges spectrally, a correct closed-form
//! solution agrees to near machine precision at moderate orders, while a
//! planted defect in any amplitude formula surfaces as a plateau far above
//! the convergence floor.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::mode_solver::{
    self, eval_mode, solve_mode, BoundaryData, ModeError, ModeSolution, Side,
};
use crate::params::ValidatedParams;
use crate::symbols::{characteristic_roots, SpectralPoint, SymbolError};

/// Default collocation order (polynomial degree per side).
pub const DEFAULT_COLLOCATION_ORDER: usize = 48;

/// How many slowest-decay lengths each half-line keeps before truncation.
/// The discarded tail is of size `e^-30`, far below every tolerance used
/// by the certificates.
pub const TRUNCATION_DECAY_LENGTHS: f64 = 30.0;

/// Largest acceptable relative residual of the equilibrated linear solve;
/// anything above this means the collocation matrix was effectively
/// singular and the oracle output cannot be trusted.
pub const LINEAR_SOLVE_RTOL: f64 = 1e-9;

/// Relative floor (against the largest component) used as denominator for
/// components whose exact profile is tiny, so empty components do not
/// produce spurious relative errors.
pub const EXACT_SCALE_FLOOR: f64 = 1e-3;

/// Collocation resolution knobs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CollocationConfig {
    /// Chebyshev order per side (`n + 1` nodes).
    pub n: usize,
    /// Domain length in units of the slowest decay rate of the side.
    pub decay_lengths: f64,
}

impl Default for CollocationConfig {
    fn default() -> Self {
        Self {
            n: DEFAULT_COLLOCATION_ORDER,
            decay_lengths: TRUNCATION_DECAY_LENGTHS,
        }
    }
}

/// Everything that can go wrong while running the oracle.
#[derive(Debug, Error)]
pub enum OracleError {
    /// The oracle, like the mode solver, lives strictly at `A > 0`.
    #[error("the collocation oracle requires a nonzero tangential frequency")]
    ZeroFrequency,
    /// Boundary data must carry one jump component per tangential direction.
    #[error("boundary data carries {got} tangential components, expected {expected}")]
    DataDimensionMismatch {
        /// Components required by the spatial dimension.
        expected: usize,
        /// Components supplied.
        got: usize,
    },
    /// The assembled linear system could not be solved reliably.
    #[error("collocation system is ill-conditioned (relative residual {residual:.3e})")]
    IllConditioned {
        /// Relative residual of the equilibrated solve.
        residual: f64,
    },
    /// An evaluation point fell outside the truncated domain.
    #[error("station {x:.6e} lies outside the truncated domain [{lo:.6e}, {hi:.6e}]")]
    OutsideDomain {
        /// Requested vertical position.
        x: f64,
        /// Lower end of the kept domain.
        lo: f64,
        /// Upper end of the kept domain.
        hi: f64,
    },
    /// Root extraction failed.
    #[error(transparent)]
    Symbol(#[from] SymbolError),
    /// The closed-form reference solve failed.
    #[error(transparent)]
    Mode(#[from] ModeError),
}

/// A collocation solution: node values for every companion function on
/// both half-lines, plus the interface height.
#[derive(Debug, Clone)]
pub struct OracleSolution {
    /// Resolvent parameter.
    pub lambda: Complex64,
    /// Tangential frequency.
    pub xi: Vec<f64>,
    /// Collocation order used.
    pub n: usize,
    /// Kept length of the upper half-line.
    pub l_plus: f64,
    /// Kept length of the lower half-line.
    pub l_minus: f64,
    /// Interface height (prescribed, or solved from the kinetic row).
    pub height: Complex64,
    /// Relative residual of the equilibrated linear solve.
    pub solve_residual: f64,
    dim: usize,
    nodes: Vec<f64>,
    plus: Vec<Vec<Complex64>>,
    minus: Vec<Vec<Complex64>>,
}

/// Chebyshev–Gauss–Lobatto nodes (descending from `1` to `-1`) and the
/// differentiation matrix on them, with the diagonal filled by the
/// negative-sum trick for accuracy.
fn cheb(n: usize) -> (Vec<f64>, DMatrix<f64>) {
    let nodes: Vec<f64> = (0..=n)
        .map(|i| (std::f64::consts::PI * i as f64 / n as f64).cos())
        .collect();
    let c = |i: usize| -> f64 {
        if i == 0 || i == n {
            2.0
        } else {
            1.0
        }
    };
    let mut d = DMatrix::<f64>::zeros(n + 1, n + 1);
    for i in 0..=n {
        let mut row_sum = 0.0;
        for j in 0..=n {
            if i != j {
                let sign = if (i + j) % 2 == 0 { 1.0 } else { -1.0 };
                let v = (c(i) / c(j)) * sign / (nodes[i] - nodes[j]);
                d[(i, j)] = v;
                row_sum += v;
            }
        }
        d[(i, i)] = -row_sum;
    }
    (nodes, d)
}

/// Barycentric interpolation on the Chebyshev grid.
fn bary(nodes: &[f64], values: &[Complex64], xhat: f64) -> Complex64 {
    let n = nodes.len() - 1;
    let mut num = Complex64::default();
    let mut den = Complex64::default();
    for i in 0..=n {
        let diff = xhat - nodes[i];
        if diff.abs() < 1e-14 {
            return values[i];
        }
        let mut w = if i % 2 == 0 { 1.0 } else { -1.0 };
        if i == 0 || i == n {
            w *= 0.5;
        }
        let t = Complex64::new(w / diff, 0.0);
        num += t * values[i];
        den += t;
    }
    num / den
}

impl OracleSolution {
    fn xhat_plus(&self, x: f64) -> Result<f64, OracleError> {
        if !(0.0..=self.l_plus).contains(&x) {
            return Err(OracleError::OutsideDomain {
                x,
                lo: 0.0,
                hi: self.l_plus,
            });
        }
        Ok(1.0 - 2.0 * x / self.l_plus)
    }

    fn xhat_minus(&self, x: f64) -> Result<f64, OracleError> {
        if !(-self.l_minus..=0.0).contains(&x) {
            return Err(OracleError::OutsideDomain {
                x,
                lo: -self.l_minus,
                hi: 0.0,
            });
        }
        Ok(1.0 + 2.0 * x / self.l_minus)
    }

    /// Upper velocity component `j` (tangential first, vertical last) at
    /// height `x >= 0`.
    pub fn u_plus(&self, j: usize, x: f64) -> Result<Complex64, OracleError> {
        assert!(j < self.dim, "component index out of range");
        Ok(bary(&self.nodes, &self.plus[j], self.xhat_plus(x)?))
    }

    /// Upper density perturbation at height `x >= 0`.
    pub fn rho(&self, x: f64) -> Result<Complex64, OracleError> {
        Ok(bary(&self.nodes, &self.plus[2 * self.dim], self.xhat_plus(x)?))
    }

    /// Lower velocity component `j` at depth `x <= 0`.
    pub fn u_minus(&self, j: usize, x: f64) -> Result<Complex64, OracleError> {
        assert!(j < self.dim, "component index out of range");
        Ok(bary(&self.nodes, &self.minus[j], self.xhat_minus(x)?))
    }

    /// Lower pressure at depth `x <= 0`.
    pub fn pressure(&self, x: f64) -> Result<Complex64, OracleError> {
        Ok(bary(&self.nodes, &self.minus[2 * self.dim], self.xhat_minus(x)?))
    }
}

/// Solves the coupled two-phase resolvent mode by Chebyshev collocation.
///
/// The assembled system couples, per side, the interior momentum/mass (or
/// divergence) equations in companion form with the interface conditions
/// (tangential stress and velocity jumps, both normal stresses, the density
/// Neumann condition) and far-field decay. In kinetic mode the height is an
/// extra unknown closed by the kinetic equation row.
pub fn solve_oracle(
    p: &ValidatedParams,
    pt: &SpectralPoint,
    data: &BoundaryData,
    cfg: &CollocationConfig,
) -> Result<OracleSolution, OracleError> {
    let dim = p.dim();
    if pt.a() == 0.0 {
        return Err(OracleError::ZeroFrequency);
    }
    if data.h().len() != dim - 1 {
        return Err(OracleError::DataDimensionMismatch {
            expected: dim - 1,
            got: data.h().len(),
        });
    }
    let s = characteristic_roots(p, pt)?;
    let n = cfg.n.max(8);
    let np = n + 1;
    let lambda = pt.lambda;
    let a = s.a;
    let a2 = Complex64::new(a * a, 0.0);
    let one = Complex64::new(1.0, 0.0);
    let ixi: Vec<Complex64> = pt.xi_prime().iter().map(|&x| Complex64::new(0.0, x)).collect();

    let rate_p = s.b_plus.re.min(s.t1.re).min(s.t2.re);
    let rate_m = s.b_minus.re.min(a);
    let l_plus = cfg.decay_lengths / rate_p;
    let l_minus = cfg.decay_lengths / rate_m;

    let (nodes, d0) = cheb(n);
    // x = L+ (1 - xhat)/2 above, x = -L- (1 - xhat)/2 below: node 0 is the
    // interface on both sides, node n the far end, and the chain rule gives
    // the physical derivative matrices.
    let dp = d0.map(|v| Complex64::new(-2.0 / l_plus * v, 0.0));
    let dm = d0.map(|v| Complex64::new(2.0 / l_minus * v, 0.0));

    // Function layout per side: velocities, their derivatives, then the
    // scalar functions (density with two companions above; pressure below).
    let pf = 2 * dim + 3;
    let mf = 2 * dim + 1;
    let minus_base = pf * np;
    let kinetic = matches!(data, BoundaryData::Kinetic { .. });
    let h_col = if kinetic { Some(minus_base + mf * np) } else { None };
    let total = minus_base + mf * np + usize::from(kinetic);

    let pu = |j: usize| j;
    let pv = |j: usize| dim + j;
    let pr = 2 * dim;
    let pr1 = 2 * dim + 1;
    let pr2 = 2 * dim + 2;
    let mu_f = |j: usize| j;
    let mv_f = |j: usize| dim + j;
    let mpi = 2 * dim;

    let cp = |f: usize, i: usize| f * np + i;
    let cm = |f: usize, i: usize| minus_base + f * np + i;

    // Row families mirror the unknown layout so every family owns n + 1
    // rows: momentum per component (interface condition at node 0, decay at
    // node n), mass/divergence, then the companion definitions.
    let rp_mom = |m: usize, i: usize| m * np + i;
    let rp_mass = |i: usize| dim * np + i;
    let rp_comp_u = |j: usize, i: usize| (dim + 1 + j) * np + i;
    let rp_comp_r1 = |i: usize| (2 * dim + 1) * np + i;
    let rp_comp_r2 = |i: usize| (2 * dim + 2) * np + i;
    let rm_mom = |m: usize, i: usize| minus_base + m * np + i;
    let rm_div = |i: usize| minus_base + dim * np + i;
    let rm_comp_u = |j: usize, i: usize| minus_base + (dim + 1 + j) * np + i;

    let rho_p = Complex64::new(p.rho_plus(), 0.0);
    let rho_m = Complex64::new(p.rho_minus(), 0.0);
    let mu_p = Complex64::new(p.mu_plus(), 0.0);
    let mu_m = Complex64::new(p.mu_minus(), 0.0);
    let nu_p = Complex64::new(p.nu_plus(), 0.0);
    let kap_p = Complex64::new(p.kappa_plus(), 0.0);
    let sig_p = Complex64::new(p.sigma_plus(), 0.0);
    let sig_m = Complex64::new(p.sigma_minus(), 0.0);

    let mut mat = DMatrix::<Complex64>::zeros(total, total);
    let mut rhs = DVector::<Complex64>::zeros(total);
    let hdata = data.h();
    let prescribed_height = match data {
        BoundaryData::Prescribed { height, .. } => *height,
        BoundaryData::Kinetic { .. } => Complex64::default(),
    };

    for i in 0..=n {
        // ----- upper phase -----
        for m in 0..dim - 1 {
            let row = rp_mom(m, i);
            if i == 0 {
                // Tangential stress continuity across the interface.
                mat[(row, cp(pv(m), 0))] += mu_p;
                mat[(row, cp(pu(dim - 1), 0))] += mu_p * ixi[m];
                mat[(row, cm(mv_f(m), 0))] -= mu_m;
                mat[(row, cm(mu_f(dim - 1), 0))] -= mu_m * ixi[m];
            } else if i == n {
                mat[(row, cp(pu(m), n))] = one;
            } else {
                mat[(row, cp(pu(m), i))] += rho_p * lambda + mu_p * a2;
                for j in 0..=n {
                    mat[(row, cp(pv(m), j))] -= mu_p * dp[(i, j)];
                }
                for k in 0..dim - 1 {
                    mat[(row, cp(pu(k), i))] -= nu_p * ixi[m] * ixi[k];
                }
                mat[(row, cp(pv(dim - 1), i))] -= nu_p * ixi[m];
                mat[(row, cp(pr2, i))] -= kap_p * ixi[m];
                mat[(row, cp(pr, i))] += kap_p * ixi[m] * a2;
            }
        }
        {
            let row = rp_mom(dim - 1, i);
            if i == 0 {
                // Upper normal stress balance against surface tension.
                mat[(row, cp(pv(dim - 1), 0))] += 2.0 * mu_p + (nu_p - mu_p);
                for k in 0..dim - 1 {
                    mat[(row, cp(pu(k), 0))] += (nu_p - mu_p) * ixi[k];
                }
                mat[(row, cp(pr2, 0))] += kap_p;
                mat[(row, cp(pr, 0))] -= kap_p * a2;
                match h_col {
                    Some(hc) => mat[(row, hc)] -= sig_p * a2,
                    None => rhs[row] = sig_p * a2 * prescribed_height,
                }
            } else if i == n {
                mat[(row, cp(pu(dim - 1), n))] = one;
            } else {
                mat[(row, cp(pu(dim - 1), i))] += rho_p * lambda + mu_p * a2;
                for j in 0..=n {
                    mat[(row, cp(pv(dim - 1), j))] -= (mu_p + nu_p) * dp[(i, j)];
                }
                for k in 0..dim - 1 {
                    mat[(row, cp(pv(k), i))] -= nu_p * ixi[k];
                }
                for j in 0..=n {
                    mat[(row, cp(pr2, j))] -= kap_p * dp[(i, j)];
                }
                mat[(row, cp(pr1, i))] += kap_p * a2;
            }
        }
        {
            let row = rp_mass(i);
            if i == 0 {
                // Density Neumann condition at the interface.
                mat[(row, cp(pr1, 0))] = one;
            } else if i == n {
                mat[(row, cp(pr, n))] = one;
            } else {
                mat[(row, cp(pr, i))] += lambda;
                for k in 0..dim - 1 {
                    mat[(row, cp(pu(k), i))] += rho_p * ixi[k];
                }
                mat[(row, cp(pv(dim - 1), i))] += rho_p;
            }
        }
        for j_fun in 0..dim {
            let row = rp_comp_u(j_fun, i);
            mat[(row, cp(pv(j_fun), i))] = one;
            for j in 0..=n {
                mat[(row, cp(pu(j_fun), j))] -= dp[(i, j)];
            }
        }
        {
            let row = rp_comp_r1(i);
            mat[(row, cp(pr1, i))] = one;
            for j in 0..=n {
                mat[(row, cp(pr, j))] -= dp[(i, j)];
            }
        }
        {
            let row = rp_comp_r2(i);
            mat[(row, cp(pr2, i))] = one;
            for j in 0..=n {
                mat[(row, cp(pr1, j))] -= dp[(i, j)];
            }
        }

        // ----- lower phase -----
        for m in 0..dim - 1 {
            let row = rm_mom(m, i);
            if i == 0 {
                // Prescribed tangential velocity jump.
                mat[(row, cm(mu_f(m), 0))] = one;
                mat[(row, cp(pu(m), 0))] = -one;
                rhs[row] = hdata[m];
            } else if i == n {
                mat[(row, cm(mu_f(m), n))] = one;
            } else {
                mat[(row, cm(mu_f(m), i))] += rho_m * lambda + mu_m * a2;
                for j in 0..=n {
                    mat[(row, cm(mv_f(m), j))] -= mu_m * dm[(i, j)];
                }
                mat[(row, cm(mpi, i))] += ixi[m];
            }
        }
        {
            let row = rm_mom(dim - 1, i);
            if i == 0 {
                // Lower normal stress balance against surface tension.
                mat[(row, cm(mv_f(dim - 1), 0))] += 2.0 * mu_m;
                mat[(row, cm(mpi, 0))] -= one;
                match h_col {
                    Some(hc) => mat[(row, hc)] -= sig_m * a2,
                    None => rhs[row] = sig_m * a2 * prescribed_height,
                }
            } else if i == n {
                mat[(row, cm(mu_f(dim - 1), n))] = one;
            } else {
                mat[(row, cm(mu_f(dim - 1), i))] += rho_m * lambda + mu_m * a2;
                for j in 0..=n {
                    mat[(row, cm(mv_f(dim - 1), j))] -= mu_m * dm[(i, j)];
                }
                for j in 0..=n {
                    mat[(row, cm(mpi, j))] += dm[(i, j)];
                }
            }
        }
        {
            // Incompressibility holds pointwise up to both ends.
            let row = rm_div(i);
            for k in 0..dim - 1 {
                mat[(row, cm(mu_f(k), i))] += ixi[k];
            }
            mat[(row, cm(mv_f(dim - 1), i))] += one;
        }
        for j_fun in 0..dim {
            let row = rm_comp_u(j_fun, i);
            mat[(row, cm(mv_f(j_fun), i))] = one;
            for j in 0..=n {
                mat[(row, cm(mu_f(j_fun), j))] -= dm[(i, j)];
            }
        }
    }

    if let (Some(hc), BoundaryData::Kinetic { d, .. }) = (h_col, data) {
        let denom = p.rho_minus() - p.rho_plus();
        mat[(hc, hc)] = lambda;
        mat[(hc, cm(mu_f(dim - 1), 0))] += Complex64::new(p.rho_minus() / denom, 0.0);
        mat[(hc, cp(pu(dim - 1), 0))] -= Complex64::new(p.rho_plus() / denom, 0.0);
        rhs[hc] = *d;
    }

    // Row equilibration keeps the LU pivoting honest across the widely
    // different row scales (stress rows vs. unit companion rows).
    for r in 0..total {
        let mut m_row = 0.0f64;
        for c in 0..total {
            m_row = m_row.max(mat[(r, c)].norm());
        }
        if m_row == 0.0 {
            return Err(OracleError::IllConditioned {
                residual: f64::INFINITY,
            });
        }
        let inv = Complex64::new(1.0 / m_row, 0.0);
        for c in 0..total {
            mat[(r, c)] *= inv;
        }
        rhs[r] *= inv;
    }

    let lu = mat.clone().lu();
    let sol = lu.solve(&rhs).ok_or(OracleError::IllConditioned {
        residual: f64::INFINITY,
    })?;

    let product = &mat * &sol;
    let mut resid = 0.0f64;
    let mut ynorm = 0.0f64;
    let mut bnorm = 0.0f64;
    for r in 0..total {
        resid = resid.max((product[r] - rhs[r]).norm());
        ynorm = ynorm.max(sol[r].norm());
        bnorm = bnorm.max(rhs[r].norm());
    }
    let solve_residual = resid / ynorm.max(bnorm).max(1e-300);
    if !solve_residual.is_finite() || solve_residual > LINEAR_SOLVE_RTOL {
        return Err(OracleError::IllConditioned {
            residual: solve_residual,
        });
    }

    let take = |base: usize| -> Vec<Complex64> { (0..=n).map(|i| sol[base + i]).collect() };
    let plus: Vec<Vec<Complex64>> = (0..pf).map(|f| take(f * np)).collect();
    let minus: Vec<Vec<Complex64>> = (0..mf).map(|f| take(minus_base + f * np)).collect();
    let height = match h_col {
        Some(hc) => sol[hc],
        None => prescribed_height,
    };

    Ok(OracleSolution {
        lambda,
        xi: pt.xi_prime().to_vec(),
        n,
        l_plus,
        l_minus,
        height,
        solve_residual,
        dim,
        nodes,
        plus,
        minus,
    })
}

/// Disagreement between oracle and closed form for one field component.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ComponentError {
    /// Component label (`u+_j`, `rho+`, `u-_j`, `pi-`).
    pub name: String,
    /// Largest absolute disagreement over the stations.
    pub sup_abs: f64,
    /// Largest exact magnitude over the stations (the error scale).
    pub scale: f64,
    /// `sup_abs` over the floored scale.
    pub rel: f64,
}

/// Oracle-versus-closed-form comparison over the standard station set.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OracleComparison {
    /// Collocation order used.
    pub n: usize,
    /// Per-component disagreement.
    pub components: Vec<ComponentError>,
    /// Relative height disagreement (kinetic mode only).
    pub height_rel: Option<f64>,
    /// Worst relative disagreement over components and height.
    pub max_rel: f64,
}

/// One row of a convergence table.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ConvergenceRow {
    /// Collocation order.
    pub n: usize,
    /// Worst relative disagreement against the closed form at this order.
    pub max_rel: f64,
}

/// Compares the collocation oracle against a given closed-form solution at
/// the standard log-spaced stations on both sides of the interface.
///
/// Passing a solution produced by
/// [`mode_solver::solve_mode_with_overrides`] with a planted fault turns
/// this into a detector: the oracle solves the true equations, so the
/// disagreement reflects the planted defect rather than discretization
/// error.
pub fn compare_with_mode(
    p: &ValidatedParams,
    pt: &SpectralPoint,
    data: &BoundaryData,
    cfg: &CollocationConfig,
    exact: &ModeSolution,
) -> Result<OracleComparison, OracleError> {
    let oracle = solve_oracle(p, pt, data, cfg)?;
    let dim = p.dim();
    let s = &exact.roots;
    let rate_p = s.b_plus.re.min(s.t1.re).min(s.t2.re);
    let rate_m = s.b_minus.re.min(s.a);
    let xs_plus = mode_solver::stations(rate_p);
    let xs_minus: Vec<f64> = mode_solver::stations(rate_m).iter().map(|x| -x).collect();

    // (name, exact values, oracle values) per component.
    let mut names: Vec<String> = Vec::new();
    let mut pairs: Vec<Vec<(Complex64, Complex64)>> = Vec::new();
    for j in 0..dim {
        names.push(format!("u+_{}", j + 1));
        pairs.push(Vec::new());
    }
    names.push("rho+".to_string());
    pairs.push(Vec::new());
    for j in 0..dim {
        names.push(format!("u-_{}", j + 1));
        pairs.push(Vec::new());
    }
    names.push("pi-".to_string());
    pairs.push(Vec::new());

    for &x in &xs_plus {
        let jet = eval_mode(exact, Side::Plus, x, 0);
        for j in 0..dim {
            pairs[j].push((jet.u[j][0], oracle.u_plus(j, x)?));
        }
        pairs[dim].push((jet.rho[0], oracle.rho(x)?));
    }
    for &x in &xs_minus {
        let jet = eval_mode(exact, Side::Minus, x, 0);
        for j in 0..dim {
            pairs[dim + 1 + j].push((jet.u[j][0], oracle.u_minus(j, x)?));
        }
        pairs[2 * dim + 1].push((jet.pi[0], oracle.pressure(x)?));
    }

    let sups: Vec<(f64, f64)> = pairs
        .iter()
        .map(|component| {
            let mut sup_abs = 0.0f64;
            let mut scale = 0.0f64;
            for &(e, o) in component {
                sup_abs = sup_abs.max((e - o).norm());
                scale = scale.max(e.norm());
            }
            (sup_abs, scale)
        })
        .collect();
    let global = sups.iter().map(|&(_, s)| s).fold(0.0f64, f64::max);

    let mut components = Vec::with_capacity(names.len());
    let mut max_rel = 0.0f64;
    for (name, &(sup_abs, scale)) in names.into_iter().zip(&sups) {
        let rel = if global > 0.0 {
            sup_abs / scale.max(EXACT_SCALE_FLOOR * global)
        } else {
            sup_abs
        };
        max_rel = max_rel.max(rel);
        components.push(ComponentError {
            name,
            sup_abs,
            scale,
            rel,
        });
    }

    let height_rel = if exact.d.is_some() {
        let denom = exact.height.norm().max(EXACT_SCALE_FLOOR * global).max(1e-300);
        let rel = (oracle.height - exact.height).norm() / denom;
        max_rel = max_rel.max(rel);
        Some(rel)
    } else {
        None
    };

    Ok(OracleComparison {
        n: oracle.n,
        components,
        height_rel,
        max_rel,
    })
}

/// Solves the closed form and compares the oracle against it.
pub fn compare(
    p: &ValidatedParams,
    pt: &SpectralPoint,
    data: &BoundaryData,
    cfg: &CollocationConfig,
) -> Result<OracleComparison, OracleError> {
    let exact = solve_mode(p, pt, data)?;
    compare_with_mode(p, pt, data, cfg, &exact)
}

/// Tabulates the oracle disagreement against the closed form for a list of
/// collocation orders. Spectral convergence shows as a steep drop between
/// consecutive rows until the closed form's own accuracy floor is reached.
pub fn convergence(
    p: &ValidatedParams,
    pt: &SpectralPoint,
    data: &BoundaryData,
    orders: &[usize],
) -> Result<Vec<ConvergenceRow>, OracleError> {
    let exact = solve_mode(p, pt, data)?;
    orders
        .iter()
        .map(|&n| {
            let cfg = CollocationConfig {
                n,
                ..CollocationConfig::default()
            };
            let cmp = compare_with_mode(p, pt, data, &cfg, &exact)?;
            Ok(ConvergenceRow {
                n,
                max_rel: cmp.max_rel,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mode_solver::{solve_mode_with_overrides, CoefficientOverrides};
    use crate::params::{validate_params, PhysicalParams};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

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

    fn planar_set() -> ValidatedParams {
        validate_params(&PhysicalParams {
            dim: 2,
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

    fn ref_point() -> SpectralPoint {
        SpectralPoint::new(
            Complex64::from_polar(2.0, 2.0 * std::f64::consts::PI / 5.0),
            &[0.7, -0.4],
        )
    }

    #[test]
    fn oracle_matches_the_closed_form_for_prescribed_height() {
        let p = main_set();
        let data = BoundaryData::Prescribed {
            h: vec![c(1.0, 0.0), c(-0.3, 0.2)],
            height: c(0.7, -0.1),
        };
        let cmp = compare(&p, &ref_point(), &data, &CollocationConfig::default()).unwrap();
        assert!(
            cmp.max_rel < 1e-7,
            "oracle disagreement {:.3e}",
            cmp.max_rel
        );
        assert!(cmp.height_rel.is_none());
    }

    #[test]
    fn oracle_matches_the_closed_form_for_the_kinetic_solve() {
        let p = main_set();
        let data = BoundaryData::Kinetic {
            h: vec![c(0.4, -0.2), c(-0.3, 0.1)],
            d: c(0.8, 0.5),
        };
        let cmp = compare(&p, &ref_point(), &data, &CollocationConfig::default()).unwrap();
        assert!(
            cmp.max_rel < 1e-7,
            "oracle disagreement {:.3e}",
            cmp.max_rel
        );
        let height_rel = cmp.height_rel.expect("kinetic comparison carries a height");
        assert!(height_rel < 1e-7, "height disagreement {height_rel:.3e}");
    }

    #[test]
    fn oracle_matches_the_closed_form_in_the_plane() {
        let p = planar_set();
        let pt = SpectralPoint::new(c(1.1, 0.9), &[0.8]);
        let data = BoundaryData::Kinetic {
            h: vec![c(0.6, 0.3)],
            d: c(-0.4, 0.7),
        };
        let cmp = compare(&p, &pt, &data, &CollocationConfig::default()).unwrap();
        assert!(
            cmp.max_rel < 1e-7,
            "oracle disagreement {:.3e}",
            cmp.max_rel
        );
    }

    #[test]
    fn oracle_convergence_is_spectral() {
        let p = main_set();
        let data = BoundaryData::Prescribed {
            h: vec![c(1.0, 0.0), c(-0.3, 0.2)],
            height: c(0.7, -0.1),
        };
        let rows = convergence(&p, &ref_point(), &data, &[16, 32]).unwrap();
        assert_eq!(rows.len(), 2);
        let ratio = rows[0].max_rel / rows[1].max_rel.max(1e-300);
        assert!(
            ratio > 10.0,
            "convergence ratio {ratio:.3e} ({:.3e} -> {:.3e})",
            rows[0].max_rel,
            rows[1].max_rel
        );
    }

    #[test]
    fn oracle_detects_an_injected_fault() {
        let p = main_set();
        let pt = ref_point();
        let data = BoundaryData::Kinetic {
            h: vec![c(0.4, -0.2), c(-0.3, 0.1)],
            d: c(0.8, 0.5),
        };
        let mutated = solve_mode_with_overrides(
            &p,
            &pt,
            &data,
            &CoefficientOverrides {
                e_factor: 1.0 + 1e-3,
                ..CoefficientOverrides::default()
            },
        )
        .unwrap();
        let cmp = compare_with_mode(&p, &pt, &data, &CollocationConfig::default(), &mutated)
            .unwrap();
        assert!(
            cmp.max_rel > 1e-4,
            "planted fault went unnoticed ({:.3e})",
            cmp.max_rel
        );
    }

    #[test]
    fn zero_frequency_and_dimension_mismatch_are_rejected() {
        let p = main_set();
        let data = BoundaryData::Prescribed {
            h: vec![c(1.0, 0.0), c(0.0, 0.0)],
            height: c(0.0, 0.0),
        };
        let pt0 = SpectralPoint::new(c(1.0, 1.0), &[0.0, 0.0]);
        assert!(matches!(
            solve_oracle(&p, &pt0, &data, &CollocationConfig::default()),
            Err(OracleError::ZeroFrequency)
        ));
        let short = BoundaryData::Prescribed {
            h: vec![c(1.0, 0.0)],
            height: c(0.0, 0.0),
        };
        assert!(matches!(
            solve_oracle(&p, &ref_point(), &short, &CollocationConfig::default()),
            Err(OracleError::DataDimensionMismatch {
                expected: 2,
                got: 1
            })
        ));
    }

    #[test]
    fn stations_beyond_the_truncation_are_rejected() {
        let p = main_set();
        let data = BoundaryData::Prescribed {
            h: vec![c(1.0, 0.0), c(-0.3, 0.2)],
            height: c(0.7, -0.1),
        };
        let sol = solve_oracle(&p, &ref_point(), &data, &CollocationConfig::default()).unwrap();
        assert!(matches!(
            sol.u_plus(0, sol.l_plus * 1.5),
            Err(OracleError::OutsideDomain { .. })
        ));
        assert!(matches!(
            sol.pressure(-sol.l_minus * 1.5),
            Err(OracleError::OutsideDomain { .. })
        ));
    }
}
