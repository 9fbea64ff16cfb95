//! The named multiplier table, symbol-class certification, and kernel
//! decay probes.
//!
//! The closed-form solution of a single interface mode is organised as a
//! table of Fourier multipliers: for each boundary datum (the tangential
//! jumps `h_m` and the weighted height `A H`) and each exponential mode of
//! the solution, one table entry gives the amplitude. [`coefficient`]
//! evaluates any entry at a spectral point; the entries are exactly the
//! `Q^+, P^+, R^+, Q^-, P^-, R^-, S^pm` families, with
//!
//! * `Q^+_{.,i}` driving the capillary difference kernels `M_{i+}`,
//! * `P^+_{.,k}` driving the density modes (`M_{0+}` and `e^{-t1 x}`),
//! * `R^pm` driving the pure Stokes-mode traces `e^{-B_plus x}` /
//!   `e^{B_minus x}`,
//! * `Q^-` driving the lower difference kernel `M_-`,
//! * `P^-` the lower pressure mode `e^{A x}`, and
//! * `S^pm` the direct jump contribution to the tangential traces.
//!
//! Every entry belongs to a symbol class `M_{s,1}` or `M_{s,2}`:
//! `|partial^alpha' m| <= C (|lambda|^(1/2) + A)^(s - |alpha'|)` for type 1,
//! `|partial^alpha' m| <= C (|lambda|^(1/2) + A)^s A^(-|alpha'|)` for type 2
//! (and the same bounds for `tau d/dtau m`). [`class_estimate`] certifies a
//! claimed class membership numerically: it measures the normalized
//! derivative constant on a sector grid with fourth-order stencils and
//! requires the supremum to be stable under grid refinement.
//!
//! [`kernel_decay_probe`] goes one step further and probes the physical
//! kernels `F^{-1}[m A^2 M_{0+}(x_N)]` and `F^{-1}[m A e^{-t1 x_N}]` in
//! `N = 2`, checking the `|x|^N` decay that the class bounds predict.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lopatinski::{self, LopatinskiData, LopatinskiError, ScanGrid};
use crate::params::ValidatedParams;
use crate::symbols::{
    characteristic_roots, eval_M, MKind, SpectralPoint, SymbolError, SymbolSet,
};

/// Relative step factor for the class-estimate stencils:
/// `h = 1e-4 * max(A, |lambda|^(1/2))`.
pub const STENCIL_STEP_FACTOR: f64 = 1e-4;

/// Maximum allowed growth of a class-estimate supremum under one grid
/// refinement for the claim to count as certified.
pub const CLASS_STABILITY_TOL: f64 = 0.05;

/// Absolute/relative tolerance of the kernel quadrature.
pub const QUAD_TOL: f64 = 1e-6;

/// Required bound on the neglected quadrature tail.
pub const QUAD_TAIL_TOL: f64 = 1e-10;

/// Errors from the multiplier table and its probes.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum MultiplierError {
    /// The table entry is requested at `A = 0`, where the tangential
    /// direction (and the `1/A` factors) are undefined.
    #[error("zero tangential frequency: {name} is undefined at A = 0")]
    ZeroFrequency {
        /// The requested entry.
        name: String,
    },
    /// A component index in the name exceeds the dimension of the point.
    #[error("index out of range for dimension {dim}: {name}")]
    IndexOutOfRange {
        /// The requested entry.
        name: String,
        /// The ambient dimension.
        dim: usize,
    },
    /// The underlying root computation rejected the point.
    #[error(transparent)]
    Symbol(#[from] SymbolError),
    /// The underlying factorization rejected the point.
    #[error(transparent)]
    Lopatinski(#[from] LopatinskiError),
    /// The adaptive quadrature could not reach the requested accuracy.
    #[error("quadrature failure: {reason}")]
    QuadratureFailure {
        /// What went wrong.
        reason: String,
    },
}

/// Names of the multiplier-table entries. Indices are 1-based to match the
/// usual notation: `i, k in {1, 2}` select capillary modes, `j, m in
/// {1, .., N-1}` select tangential components.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CoefficientName {
    /// `Q^+_{N m, i}`: upper normal velocity, `M_{i+}` mode, datum `h_m`.
    QPlusNm {
        /// Capillary mode index (1 or 2).
        i: u8,
        /// Tangential datum component.
        m: u8,
    },
    /// `Q^+_{N N, i}`: upper normal velocity, `M_{i+}` mode, datum `A H`.
    QPlusNN {
        /// Capillary mode index (1 or 2).
        i: u8,
    },
    /// `Q^+_{j m, i}`: upper tangential velocity `j`, `M_{i+}` mode,
    /// datum `h_m`.
    QPlusJm {
        /// Capillary mode index (1 or 2).
        i: u8,
        /// Tangential velocity component.
        j: u8,
        /// Tangential datum component.
        m: u8,
    },
    /// `Q^+_{j N, i}`: upper tangential velocity `j`, `M_{i+}` mode,
    /// datum `A H`.
    QPlusJN {
        /// Capillary mode index (1 or 2).
        i: u8,
        /// Tangential velocity component.
        j: u8,
    },
    /// `P^+_{m, k}`: upper density, mode `k` (1: `M_{0+}`, 2: `e^{-t1 x}`),
    /// datum `h_m`.
    PPlusM {
        /// Density mode index (1 or 2).
        k: u8,
        /// Tangential datum component.
        m: u8,
    },
    /// `P^+_{N, k}`: upper density, mode `k`, datum `A H`.
    PPlusN {
        /// Density mode index (1 or 2).
        k: u8,
    },
    /// `R^+_{N m}`: upper normal trace (`e^{-B_plus x}` mode), datum `h_m`.
    RPlusNm {
        /// Tangential datum component.
        m: u8,
    },
    /// `R^+_{N N}`: upper normal trace, datum `A H`.
    RPlusNN,
    /// `R^+_{j m}`: upper tangential trace, datum `h_m`.
    RPlusJm {
        /// Tangential velocity component.
        j: u8,
        /// Tangential datum component.
        m: u8,
    },
    /// `R^+_{j N}`: upper tangential trace, datum `A H`.
    RPlusJN {
        /// Tangential velocity component.
        j: u8,
    },
    /// `Q^-_{N m}`: lower normal velocity, `M_-` mode, datum `h_m`.
    QMinusNm {
        /// Tangential datum component.
        m: u8,
    },
    /// `Q^-_{N N}`: lower normal velocity, `M_-` mode, datum `A H`.
    QMinusNN,
    /// `Q^-_{j m}`: lower tangential velocity, `M_-` mode, datum `h_m`.
    QMinusJm {
        /// Tangential velocity component.
        j: u8,
        /// Tangential datum component.
        m: u8,
    },
    /// `Q^-_{j N}`: lower tangential velocity, `M_-` mode, datum `A H`.
    QMinusJN {
        /// Tangential velocity component.
        j: u8,
    },
    /// `P^-_{m}`: lower pressure (`e^{A x}` mode), datum `h_m`.
    PMinusM {
        /// Tangential datum component.
        m: u8,
    },
    /// `P^-_{N}`: lower pressure, datum `A H`.
    PMinusN,
    /// `R^-_{N m}`: lower normal trace (`e^{B_minus x}` mode), datum `h_m`.
    RMinusNm {
        /// Tangential datum component.
        m: u8,
    },
    /// `R^-_{N N}`: lower normal trace, datum `A H`.
    RMinusNN,
    /// `R^-_{j m}`: lower tangential trace, datum `h_m`.
    RMinusJm {
        /// Tangential velocity component.
        j: u8,
        /// Tangential datum component.
        m: u8,
    },
    /// `R^-_{j N}`: lower tangential trace, datum `A H`.
    RMinusJN {
        /// Tangential velocity component.
        j: u8,
    },
    /// `S^+_j`: direct jump contribution to the upper tangential trace.
    SPlus {
        /// Tangential velocity component.
        j: u8,
    },
    /// `S^-_j`: direct jump contribution to the lower tangential trace.
    SMinus {
        /// Tangential velocity component.
        j: u8,
    },
}

impl std::fmt::Display for CoefficientName {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        use CoefficientName::*;
        match self {
            QPlusNm { i, m } => write!(f, "Q+_(N{m},{i})"),
            QPlusNN { i } => write!(f, "Q+_(NN,{i})"),
            QPlusJm { i, j, m } => write!(f, "Q+_({j}{m},{i})"),
            QPlusJN { i, j } => write!(f, "Q+_({j}N,{i})"),
            PPlusM { k, m } => write!(f, "P+_({m},{k})"),
            PPlusN { k } => write!(f, "P+_(N,{k})"),
            RPlusNm { m } => write!(f, "R+_(N{m})"),
            RPlusNN => write!(f, "R+_(NN)"),
            RPlusJm { j, m } => write!(f, "R+_({j}{m})"),
            RPlusJN { j } => write!(f, "R+_({j}N)"),
            QMinusNm { m } => write!(f, "Q-_(N{m})"),
            QMinusNN => write!(f, "Q-_(NN)"),
            QMinusJm { j, m } => write!(f, "Q-_({j}{m})"),
            QMinusJN { j } => write!(f, "Q-_({j}N)"),
            PMinusM { m } => write!(f, "P-_({m})"),
            PMinusN => write!(f, "P-_(N)"),
            RMinusNm { m } => write!(f, "R-_(N{m})"),
            RMinusNN => write!(f, "R-_(NN)"),
            RMinusJm { j, m } => write!(f, "R-_({j}{m})"),
            RMinusJN { j } => write!(f, "R-_({j}N)"),
            SPlus { j } => write!(f, "S+_({j})"),
            SMinus { j } => write!(f, "S-_({j})"),
        }
    }
}

/// Whether a symbol-class bound measures derivatives against the full
/// weight (`type 1`) or against `A` (`type 2`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MType {
    /// `|partial^alpha m| <= C (|lambda|^(1/2)+A)^(s-|alpha|)`.
    Type1,
    /// `|partial^alpha m| <= C (|lambda|^(1/2)+A)^s A^(-|alpha|)`.
    Type2,
}

impl CoefficientName {
    /// The claimed symbol class `(order s, type)` of this entry.
    pub fn class(&self) -> (i32, MType) {
        use CoefficientName::*;
        match self {
            PPlusM { .. } | PPlusN { .. } => (-1, MType::Type2),
            PMinusM { .. } | PMinusN => (1, MType::Type2),
            QPlusNm { .. } | QPlusNN { .. } | QPlusJm { .. } | QPlusJN { .. }
            | QMinusNm { .. } | QMinusNN | QMinusJm { .. } | QMinusJN { .. } => {
                (0, MType::Type2)
            }
            RPlusNm { .. } | RPlusNN | RPlusJm { .. } | RPlusJN { .. }
            | RMinusNm { .. } | RMinusNN | RMinusJm { .. } | RMinusJN { .. } => {
                (-1, MType::Type2)
            }
            SPlus { .. } | SMinus { .. } => (0, MType::Type1),
        }
    }

    /// Every table entry for ambient dimension `dim`.
    pub fn all(dim: usize) -> Vec<Self> {
        use CoefficientName::*;
        let nt = (dim - 1) as u8;
        let mut out = Vec::new();
        for i in 1..=2u8 {
            for m in 1..=nt {
                out.push(QPlusNm { i, m });
                for j in 1..=nt {
                    out.push(QPlusJm { i, j, m });
                }
            }
            out.push(QPlusNN { i });
            for j in 1..=nt {
                out.push(QPlusJN { i, j });
            }
        }
        for k in 1..=2u8 {
            for m in 1..=nt {
                out.push(PPlusM { k, m });
            }
            out.push(PPlusN { k });
        }
        for m in 1..=nt {
            out.push(RPlusNm { m });
            out.push(QMinusNm { m });
            out.push(PMinusM { m });
            out.push(RMinusNm { m });
            for j in 1..=nt {
                out.push(RPlusJm { j, m });
                out.push(QMinusJm { j, m });
                out.push(RMinusJm { j, m });
            }
        }
        out.push(RPlusNN);
        out.push(QMinusNN);
        out.push(PMinusN);
        out.push(RMinusNN);
        for j in 1..=nt {
            out.push(RPlusJN { j });
            out.push(QMinusJN { j });
            out.push(RMinusJN { j });
            out.push(SPlus { j });
            out.push(SMinus { j });
        }
        out
    }

    fn max_component(&self) -> u8 {
        use CoefficientName::*;
        match *self {
            QPlusNm { m, .. }
            | PPlusM { m, .. }
            | RPlusNm { m }
            | QMinusNm { m }
            | PMinusM { m }
            | RMinusNm { m } => m,
            QPlusJm { j, m, .. } | RPlusJm { j, m } | QMinusJm { j, m }
            | RMinusJm { j, m } => j.max(m),
            QPlusJN { j, .. } | RPlusJN { j } | QMinusJN { j } | RMinusJN { j }
            | SPlus { j } | SMinus { j } => j,
            _ => 1,
        }
    }
}

/// Shared evaluation context for the table at one spectral point.
pub(crate) struct TableCtx {
    pub(crate) s: SymbolSet,
    pub(crate) lop: LopatinskiData,
    a: Complex64,
    ixi: [Complex64; 2],
    sigma_plus: f64,
    sigma_minus: f64,
    mu_plus: f64,
    mu_minus: f64,
    rho_plus: f64,
    s_prod: f64,
    s1: Complex64,
    s2: Complex64,
}

impl TableCtx {
    pub(crate) fn new(
        p: &ValidatedParams,
        pt: &SpectralPoint,
    ) -> Result<Self, MultiplierError> {
        let s = characteristic_roots(p, pt)?;
        let lop = lopatinski::lopatinski_data(p, pt, &s)?;
        let xi = pt.xi_prime();
        let mut ixi = [Complex64::new(0.0, 0.0); 2];
        for (k, &x) in xi.iter().enumerate() {
            ixi[k] = Complex64::new(0.0, x);
        }
        let d = p.derived();
        Ok(Self {
            s,
            lop,
            a: Complex64::new(s.a, 0.0),
            ixi,
            sigma_plus: p.sigma_plus(),
            sigma_minus: p.sigma_minus(),
            mu_plus: p.mu_plus(),
            mu_minus: p.mu_minus(),
            rho_plus: p.rho_plus(),
            s_prod: d.s_prod,
            s1: d.s1,
            s2: d.s2,
        })
    }

    fn t(&self, i: u8) -> Complex64 {
        if i == 1 {
            self.s.t1
        } else {
            self.s.t2
        }
    }

    fn co(&self, i: u8) -> Complex64 {
        if i == 1 {
            self.lop.cofactor1
        } else {
            self.lop.cofactor2
        }
    }

    /// `X_i = 2 t_i B_plus - B_plus^2 - A^2`.
    fn x_combo(&self, i: u8) -> Complex64 {
        2.0 * self.t(i) * self.s.b_plus - self.s.b_plus * self.s.b_plus - self.a * self.a
    }

    fn ix(&self, m: u8) -> Complex64 {
        self.ixi[(m - 1) as usize]
    }

    fn q_plus_nm(&self, i: u8, m: u8) -> Complex64 {
        -2.0 * self.ix(m) * self.s.t1 * self.s.t2 * self.lop.coeffs.g * self.co(i)
            * (self.t(i) - self.s.b_plus)
            / (self.a * self.lop.det_l)
    }

    fn q_plus_nn(&self, i: u8) -> Complex64 {
        2.0 * self.s.t1 * self.s.t2 * self.lop.coeffs.f * self.co(i)
            * (self.t(i) - self.s.b_plus)
            / self.lop.det_l
    }

    fn r_plus_nm(&self, m: u8) -> Complex64 {
        let (x1, x2) = (self.x_combo(1), self.x_combo(2));
        self.ix(m) * self.lop.coeffs.g
            * (self.s1 * self.s.t1 * x2 - self.s2 * self.s.t2 * x1)
            / ((self.s.t1 - self.s.t2) * self.a * self.s.b_plus * self.lop.frak_l)
    }

    fn r_plus_nn(&self) -> Complex64 {
        let (x1, x2) = (self.x_combo(1), self.x_combo(2));
        self.lop.coeffs.f * (self.s2 * self.s.t2 * x1 - self.s1 * self.s.t1 * x2)
            / ((self.s.t1 - self.s.t2) * self.s.b_plus * self.lop.frak_l)
            - self.sigma_plus / (2.0 * self.mu_plus * self.s.b_plus)
    }

    /// `Y_m = sum_i (A^2 - B_plus^2) Q^+_{Nm,i} / (2 t_i (t_i - B_plus))`.
    fn y_m(&self, m: u8) -> Complex64 {
        let fac = self.a * self.a - self.s.b_plus * self.s.b_plus;
        (1..=2u8)
            .map(|i| {
                fac * self.q_plus_nm(i, m)
                    / (2.0 * self.t(i) * (self.t(i) - self.s.b_plus))
            })
            .sum()
    }

    fn y_n(&self) -> Complex64 {
        let fac = self.a * self.a - self.s.b_plus * self.s.b_plus;
        (1..=2u8)
            .map(|i| {
                fac * self.q_plus_nn(i)
                    / (2.0 * self.t(i) * (self.t(i) - self.s.b_plus))
            })
            .sum()
    }

    fn r_minus_nm(&self, m: u8) -> Complex64 {
        (self.a - self.s.b_minus) / ((self.a + self.s.b_minus) * self.s.b_minus)
            * (self.y_m(m) + self.ix(m) / self.a)
    }

    fn r_minus_nn(&self) -> Complex64 {
        (self.a - self.s.b_minus) / ((self.a + self.s.b_minus) * self.s.b_minus)
            * (self.y_n() - self.sigma_plus / (2.0 * self.mu_plus))
            + self.sigma_minus * self.a
                / (self.mu_minus * (self.a + self.s.b_minus) * self.s.b_minus)
    }

    fn q_minus_nm(&self, m: u8) -> Complex64 {
        -(2.0 / (self.a + self.s.b_minus)) * (self.a * self.y_m(m) + self.ix(m))
    }

    fn q_minus_nn(&self) -> Complex64 {
        -(2.0 / (self.a + self.s.b_minus))
            * (self.a * self.y_n() - self.sigma_plus * self.a / (2.0 * self.mu_plus))
            - self.sigma_minus * self.a / (self.mu_minus * (self.a + self.s.b_minus))
    }

    fn viscous_sum(&self) -> Complex64 {
        self.mu_plus * self.s.b_plus + self.mu_minus * self.s.b_minus
    }

    fn r_plus_jm(&self, j: u8, m: u8) -> Complex64 {
        let q_sum = -(self.ix(j) / self.s.t1) * self.q_plus_nm(1, m)
            - (self.ix(j) / self.s.t2) * self.q_plus_nm(2, m);
        let q_minus_jm = (self.ix(j) / self.a) * self.q_minus_nm(m);
        -(self.mu_plus * (q_sum - self.ix(j) * self.r_plus_nm(m))
            + self.mu_minus * (q_minus_jm + self.ix(j) * self.r_minus_nm(m)))
            / self.viscous_sum()
    }

    fn r_plus_jn(&self, j: u8) -> Complex64 {
        let q_sum = -(self.ix(j) / self.s.t1) * self.q_plus_nn(1)
            - (self.ix(j) / self.s.t2) * self.q_plus_nn(2);
        let q_minus_jn = (self.ix(j) / self.a) * self.q_minus_nn();
        -(self.mu_plus * (q_sum - self.ix(j) * self.r_plus_nn())
            + self.mu_minus * (q_minus_jn + self.ix(j) * self.r_minus_nn()))
            / self.viscous_sum()
    }

    /// Evaluates a named entry.
    pub(crate) fn entry(&self, name: CoefficientName) -> Complex64 {
        use CoefficientName::*;
        match name {
            QPlusNm { i, m } => self.q_plus_nm(i, m),
            QPlusNN { i } => self.q_plus_nn(i),
            QPlusJm { i, j, m } => -(self.ix(j) / self.t(i)) * self.q_plus_nm(i, m),
            QPlusJN { i, j } => -(self.ix(j) / self.t(i)) * self.q_plus_nn(i),
            PPlusM { k, m } => {
                let base = 2.0 * self.rho_plus * self.s_prod * self.lop.coeffs.g
                    / (self.a * self.lop.frak_l)
                    * self.ix(m);
                if k == 1 {
                    -base * self.s.t1
                } else {
                    base
                }
            }
            PPlusN { k } => {
                let base =
                    2.0 * self.rho_plus * self.s_prod * self.lop.coeffs.f / self.lop.frak_l;
                if k == 1 {
                    base * self.s.t1
                } else {
                    -base
                }
            }
            RPlusNm { m } => self.r_plus_nm(m),
            RPlusNN => self.r_plus_nn(),
            RPlusJm { j, m } => self.r_plus_jm(j, m),
            RPlusJN { j } => self.r_plus_jn(j),
            QMinusNm { m } => self.q_minus_nm(m),
            QMinusNN => self.q_minus_nn(),
            QMinusJm { j, m } => (self.ix(j) / self.a) * self.q_minus_nm(m),
            QMinusJN { j } => (self.ix(j) / self.a) * self.q_minus_nn(),
            PMinusM { m } => {
                self.mu_minus * (self.a + self.s.b_minus) * self.q_minus_nm(m)
            }
            PMinusN => self.mu_minus * (self.a + self.s.b_minus) * self.q_minus_nn(),
            RMinusNm { m } => self.r_minus_nm(m),
            RMinusNN => self.r_minus_nn(),
            RMinusJm { j, m } => self.r_plus_jm(j, m),
            RMinusJN { j } => self.r_plus_jn(j),
            SPlus { .. } => {
                -Complex64::new(self.mu_minus, 0.0) * self.s.b_minus / self.viscous_sum()
            }
            SMinus { .. } => {
                Complex64::new(1.0, 0.0)
                    - Complex64::new(self.mu_minus, 0.0) * self.s.b_minus
                        / self.viscous_sum()
            }
        }
    }
}

/// Evaluates the multiplier-table entry `name` at a spectral point.
///
/// Errors with [`MultiplierError::ZeroFrequency`] at `A = 0` (the table is
/// built around the tangential direction), and propagates root/factorization
/// failures.
pub fn coefficient(
    name: CoefficientName,
    p: &ValidatedParams,
    pt: &SpectralPoint,
) -> Result<Complex64, MultiplierError> {
    if pt.a() == 0.0 {
        return Err(MultiplierError::ZeroFrequency {
            name: name.to_string(),
        });
    }
    let dim = pt.dim();
    if usize::from(name.max_component()) > dim - 1 {
        return Err(MultiplierError::IndexOutOfRange {
            name: name.to_string(),
            dim,
        });
    }
    Ok(TableCtx::new(p, pt)?.entry(name))
}

/// The kinetic symbol `K_H` at a point, composed from the `R^pm_{NN}` table
/// entries. `None` at degenerate points.
pub fn kinetic_symbol_value(p: &ValidatedParams, pt: &SpectralPoint) -> Option<Complex64> {
    let ctx = TableCtx::new(p, pt).ok()?;
    Some(lopatinski::kinetic_symbol(
        p,
        pt,
        &ctx.s,
        ctx.r_plus_nn(),
        ctx.r_minus_nn(),
    ))
}

/// What a class claim is about: a table entry or one of the auxiliary
/// symbols whose classes the estimates compose from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum ClaimTarget {
    /// A named multiplier-table entry.
    Table(CoefficientName),
    /// `i xi_j`.
    IXi {
        /// Tangential component.
        j: u8,
    },
    /// The tangential modulus `A`.
    CapA,
    /// `i xi_j / A`.
    IXiOverA {
        /// Tangential component.
        j: u8,
    },
    /// `B_plus^s`.
    BPlusPow {
        /// Integer exponent.
        s: i32,
    },
    /// `B_minus^s`.
    BMinusPow {
        /// Integer exponent.
        s: i32,
    },
    /// `(mu_plus B_plus + mu_minus B_minus)^s`.
    ViscousSumPow {
        /// Integer exponent.
        s: i32,
    },
    /// `t_i^s`.
    TiPow {
        /// Capillary root index (1 or 2).
        i: u8,
        /// Integer exponent.
        s: i32,
    },
    /// `(t_i + B_plus)^s`.
    TiPlusBPow {
        /// Capillary root index (1 or 2).
        i: u8,
        /// Integer exponent.
        s: i32,
    },
    /// The factorization quantity `frak_n`.
    FrakN,
    /// `t_i B_plus + A^2`.
    TiBPlusA2 {
        /// Capillary root index (1 or 2).
        i: u8,
    },
}

impl std::fmt::Display for ClaimTarget {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ClaimTarget::Table(n) => write!(f, "{n}"),
            ClaimTarget::IXi { j } => write!(f, "i*xi_{j}"),
            ClaimTarget::CapA => write!(f, "A"),
            ClaimTarget::IXiOverA { j } => write!(f, "i*xi_{j}/A"),
            ClaimTarget::BPlusPow { s } => write!(f, "B+^{s}"),
            ClaimTarget::BMinusPow { s } => write!(f, "B-^{s}"),
            ClaimTarget::ViscousSumPow { s } => write!(f, "(mu+ B+ + mu- B-)^{s}"),
            ClaimTarget::TiPow { i, s } => write!(f, "t{i}^{s}"),
            ClaimTarget::TiPlusBPow { i, s } => write!(f, "(t{i}+B+)^{s}"),
            ClaimTarget::FrakN => write!(f, "frak_n"),
            ClaimTarget::TiBPlusA2 { i } => write!(f, "t{i}*B+ + A^2"),
        }
    }
}

/// A claimed symbol-class membership, as checked by [`class_estimate`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassClaim {
    /// The symbol under test.
    pub target: ClaimTarget,
    /// Claimed order `s`.
    pub order: i32,
    /// Claimed class type.
    pub mtype: MType,
}

/// The full standard claim list: every table entry of the dimension with its
/// class from the solution formulas, the elementary tangential symbols, and
/// the root/factorization building blocks at exponents `s = -1, 1`.
pub fn standard_claims(dim: usize) -> Vec<ClassClaim> {
    let mut claims: Vec<ClassClaim> = CoefficientName::all(dim)
        .into_iter()
        .map(|n| {
            let (order, mtype) = n.class();
            ClassClaim {
                target: ClaimTarget::Table(n),
                order,
                mtype,
            }
        })
        .collect();
    let nt = (dim - 1) as u8;
    for j in 1..=nt {
        claims.push(ClassClaim {
            target: ClaimTarget::IXi { j },
            order: 1,
            mtype: MType::Type2,
        });
        claims.push(ClassClaim {
            target: ClaimTarget::IXiOverA { j },
            order: 0,
            mtype: MType::Type2,
        });
    }
    claims.push(ClassClaim {
        target: ClaimTarget::CapA,
        order: 1,
        mtype: MType::Type2,
    });
    for s in [-1i32, 1] {
        claims.push(ClassClaim {
            target: ClaimTarget::BPlusPow { s },
            order: s,
            mtype: MType::Type1,
        });
        claims.push(ClassClaim {
            target: ClaimTarget::BMinusPow { s },
            order: s,
            mtype: MType::Type1,
        });
        claims.push(ClassClaim {
            target: ClaimTarget::ViscousSumPow { s },
            order: s,
            mtype: MType::Type1,
        });
        for i in 1..=2u8 {
            claims.push(ClassClaim {
                target: ClaimTarget::TiPow { i, s },
                order: s,
                mtype: MType::Type1,
            });
            claims.push(ClassClaim {
                target: ClaimTarget::TiPlusBPow { i, s },
                order: s,
                mtype: MType::Type1,
            });
        }
    }
    claims.push(ClassClaim {
        target: ClaimTarget::FrakN,
        order: 4,
        mtype: MType::Type1,
    });
    for i in 1..=2u8 {
        claims.push(ClassClaim {
            target: ClaimTarget::TiBPlusA2 { i },
            order: 2,
            mtype: MType::Type1,
        });
    }
    claims
}

fn eval_target(
    p: &ValidatedParams,
    target: ClaimTarget,
    lambda: Complex64,
    xi: &[f64],
) -> Option<Complex64> {
    let pt = SpectralPoint::new(lambda, xi);
    match target {
        ClaimTarget::Table(name) => coefficient(name, p, &pt).ok(),
        ClaimTarget::IXi { j } => Some(Complex64::new(0.0, xi[(j - 1) as usize])),
        ClaimTarget::CapA => Some(Complex64::new(pt.a(), 0.0)),
        ClaimTarget::IXiOverA { j } => {
            let a = pt.a();
            if a == 0.0 {
                None
            } else {
                Some(Complex64::new(0.0, xi[(j - 1) as usize] / a))
            }
        }
        _ => {
            let s = characteristic_roots(p, &pt).ok()?;
            Some(match target {
                ClaimTarget::BPlusPow { s: e } => s.b_plus.powi(e),
                ClaimTarget::BMinusPow { s: e } => s.b_minus.powi(e),
                ClaimTarget::ViscousSumPow { s: e } => {
                    (p.mu_plus() * s.b_plus + p.mu_minus() * s.b_minus).powi(e)
                }
                ClaimTarget::TiPow { i, s: e } => {
                    if i == 1 { s.t1 } else { s.t2 }.powi(e)
                }
                ClaimTarget::TiPlusBPow { i, s: e } => {
                    ((if i == 1 { s.t1 } else { s.t2 }) + s.b_plus).powi(e)
                }
                ClaimTarget::FrakN => {
                    let a2 = Complex64::new(s.a * s.a, 0.0);
                    let apb2 = a2 + s.b_plus * s.b_plus;
                    (apb2 * apb2 * s.cap_t
                        - 4.0 * a2 * s.b_plus * s.t1 * s.t2 * (s.t1 + s.t2))
                        / lambda
                }
                ClaimTarget::TiBPlusA2 { i } => {
                    (if i == 1 { s.t1 } else { s.t2 }) * s.b_plus
                        + Complex64::new(s.a * s.a, 0.0)
                }
                _ => unreachable!(),
            })
        }
    }
}

/// Fourth-order central first derivative (5-point stencil).
fn stencil_d1(
    f: &dyn Fn(f64) -> Option<Complex64>,
    x: f64,
    h: f64,
) -> Option<Complex64> {
    let fm2 = f(x - 2.0 * h)?;
    let fm1 = f(x - h)?;
    let fp1 = f(x + h)?;
    let fp2 = f(x + 2.0 * h)?;
    Some((fm2 - 8.0 * fm1 + 8.0 * fp1 - fp2) / (12.0 * h))
}

/// Fourth-order central second derivative (5-point stencil).
fn stencil_d2(
    f: &dyn Fn(f64) -> Option<Complex64>,
    x: f64,
    h: f64,
) -> Option<Complex64> {
    let fm2 = f(x - 2.0 * h)?;
    let fm1 = f(x - h)?;
    let f0 = f(x)?;
    let fp1 = f(x + h)?;
    let fp2 = f(x + 2.0 * h)?;
    Some((-fm2 + 16.0 * fm1 - 30.0 * f0 + 16.0 * fp1 - fp2) / (12.0 * h * h))
}

/// Applies the tangential multi-index derivative `alpha` to `g(xi)`.
fn d_alpha(
    g: &dyn Fn(&[f64]) -> Option<Complex64>,
    xi: &[f64],
    alpha: (usize, usize),
    h: f64,
) -> Option<Complex64> {
    let n = xi.len();
    let perturbed = |base: &[f64], axis: usize, v: f64| -> Vec<f64> {
        let mut out = base.to_vec();
        out[axis] = v;
        out
    };
    match alpha {
        (0, 0) => g(xi),
        (1, 0) | (0, 1) => {
            let axis = if alpha.0 == 1 { 0 } else { 1 };
            debug_assert!(axis < n);
            stencil_d1(&|v| g(&perturbed(xi, axis, v)), xi[axis], h)
        }
        (2, 0) | (0, 2) => {
            let axis = if alpha.0 == 2 { 0 } else { 1 };
            debug_assert!(axis < n);
            stencil_d2(&|v| g(&perturbed(xi, axis, v)), xi[axis], h)
        }
        (1, 1) => {
            debug_assert!(n == 2);
            let inner = |xi0: f64| -> Box<dyn Fn(f64) -> Option<Complex64> + '_> {
                Box::new(move |xi1: f64| g(&[xi0, xi1]))
            };
            stencil_d1(&|v0| stencil_d1(inner(v0).as_ref(), xi[1], h), xi[0], h)
        }
        other => panic!("unsupported multi-index {other:?}"),
    }
}

/// Per-(multi-index, tau-order) supremum inside a class-estimate report.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ComboSup {
    /// Tangential multi-index.
    pub alpha: (usize, usize),
    /// Number of `tau d/dtau` applications (0 or 1).
    pub s_tau: usize,
    /// Supremum of the normalized derivative over the grid.
    pub sup: f64,
}

/// Result of [`class_estimate`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ClassEstimateReport {
    /// The claim under test.
    pub claim: ClassClaim,
    /// Supremum of the normalized constant over all derivative combos.
    pub sup_constant: f64,
    /// Per-combo suprema.
    pub per_combo: Vec<ComboSup>,
    /// The same overall supremum on the refined grid.
    pub refined_sup: f64,
    /// Relative growth `(refined - base)/base` (negative growth clamps
    /// to 0).
    pub growth: f64,
    /// `growth < 5%`: the bound is refinement-stable, so the claim counts
    /// as numerically certified.
    pub bounded: bool,
    /// Points evaluated on the base grid.
    pub n_points: usize,
}

fn class_sup_on_grid(
    p: &ValidatedParams,
    claim: &ClassClaim,
    grid: &ScanGrid,
    dim: usize,
) -> (f64, Vec<ComboSup>, usize) {
    let mags = grid.lambda_mags();
    let args = grid.args();
    let amags = grid.a_mags();
    // Generic tangential direction, fixed across the grid.
    let dir: Vec<f64> = if dim == 2 {
        vec![1.0]
    } else {
        vec![0.8, -0.6]
    };
    let combos: Vec<((usize, usize), usize)> = {
        let alphas: Vec<(usize, usize)> = if dim == 2 {
            vec![(0, 0), (1, 0), (2, 0)]
        } else {
            vec![(0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2)]
        };
        alphas
            .iter()
            .flat_map(|&a| [0usize, 1].map(|st| (a, st)))
            .collect()
    };

    let mut points: Vec<(f64, f64, f64)> =
        Vec::with_capacity(mags.len() * args.len() * amags.len());
    for &m in &mags {
        for &th in &args {
            for &a in &amags {
                points.push((m, th, a));
            }
        }
    }

    let per_point: Vec<Vec<f64>> = points
        .par_iter()
        .map(|&(mag, th, a)| {
            let lambda = Complex64::from_polar(mag, th);
            let xi: Vec<f64> = dir.iter().map(|d| d * a).collect();
            let w = lambda.norm().sqrt() + a;
            // The spec step; capped so the stencil never crosses xi = 0,
            // where the type-2 symbols are non-smooth.
            let h_spec = STENCIL_STEP_FACTOR * a.max(lambda.norm().sqrt());
            // Tangential steps are capped so the stencil never crosses
            // xi = 0, where |xi'| (and the type-2 symbols) are non-smooth.
            let h = h_spec.min(a / 8.0);
            let h_tau = h_spec;
            combos
                .iter()
                .map(|&(alpha, s_tau)| {
                    let base = |xi_v: &[f64]| -> Option<Complex64> {
                        if s_tau == 0 {
                            eval_target(p, claim.target, lambda, xi_v)
                        } else {
                            // tau * d/dtau at fixed gamma = Re lambda.
                            let gamma = lambda.re;
                            let tau = lambda.im;
                            let g = |t: f64| -> Option<Complex64> {
                                eval_target(
                                    p,
                                    claim.target,
                                    Complex64::new(gamma, t),
                                    xi_v,
                                )
                            };
                            stencil_d1(&g, tau, h_tau).map(|d| d * tau)
                        }
                    };
                    let value = d_alpha(&base, &xi, alpha, h);
                    match value {
                        None => 0.0,
                        Some(v) => {
                            let total = alpha.0 + alpha.1;
                            let bound = match claim.mtype {
                                MType::Type1 => w.powi(claim.order - total as i32),
                                MType::Type2 => {
                                    w.powi(claim.order) * a.powi(-(total as i32))
                                }
                            };
                            v.norm() / bound
                        }
                    }
                })
                .collect()
        })
        .collect();

    let mut sups = vec![0.0f64; combos.len()];
    for row in &per_point {
        for (k, v) in row.iter().enumerate() {
            sups[k] = sups[k].max(*v);
        }
    }
    let overall = sups.iter().cloned().fold(0.0f64, f64::max);
    let per_combo = combos
        .iter()
        .zip(sups)
        .map(|(&(alpha, s_tau), sup)| ComboSup { alpha, s_tau, sup })
        .collect();
    (overall, per_combo, points.len())
}

/// Numerically certifies a symbol-class claim on a sector grid.
///
/// For every tangential multi-index `|alpha'| <= 2` and `tau`-derivative
/// order `s_tau in {0, 1}`, the normalized constant
/// `|partial^alpha' (tau d_tau)^s_tau m| / bound(alpha', s)` is maximized
/// over the grid with fourth-order stencils of step
/// `1e-4 max(A, |lambda|^(1/2))`; the claim is `bounded` when the supremum
/// grows less than 5% under a 1.5x grid refinement.
pub fn class_estimate(
    p: &ValidatedParams,
    claim: &ClassClaim,
    grid: &ScanGrid,
) -> ClassEstimateReport {
    let dim = p.dim();
    let (sup, per_combo, n_points) = class_sup_on_grid(p, claim, grid, dim);
    let (refined_sup, _, _) = class_sup_on_grid(p, claim, &grid.refined(), dim);
    let growth = ((refined_sup - sup) / sup.max(f64::MIN_POSITIVE)).max(0.0);
    ClassEstimateReport {
        claim: *claim,
        sup_constant: sup,
        per_combo,
        refined_sup,
        growth,
        bounded: growth < CLASS_STABILITY_TOL && sup.is_finite(),
        n_points,
    }
}

/// Default grid for class estimates: 4 decades around 1 on each axis.
pub fn class_grid(eps: f64) -> ScanGrid {
    ScanGrid {
        lambda_decade_min: -2,
        lambda_decade_max: 2,
        lambda_per_decade: 3,
        n_args: 5,
        eps,
        a_decade_min: -2,
        a_decade_max: 2,
        a_per_decade: 3,
    }
}

/// Which physical kernel [`kernel_decay_probe`] reconstructs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum KernelKind {
    /// `k_0(x) = F^{-1}[ m A^2 M_{0+}(x_N) ](x')`.
    K0,
    /// `l_1(x) = F^{-1}[ m A e^{-t1 x_N} ](x')`.
    L1,
}

impl std::str::FromStr for KernelKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "k0" => Ok(Self::K0),
            "l1" => Ok(Self::L1),
            other => Err(format!("unknown kernel kind '{other}' (expected k0 or l1)")),
        }
    }
}

/// The multiplier `m` inserted into a kernel probe.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum KernelSymbol {
    /// `m = 1` (class `M_{0,2}` trivially).
    One,
    /// `m = Q^+_{NN,1}` (class `M_{0,2}`).
    QPlusNn1,
    /// `m = S^+_1` (class `M_{0,1}`).
    SPlus1,
}

impl std::str::FromStr for KernelSymbol {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "one" => Ok(Self::One),
            "q_plus_nn_1" => Ok(Self::QPlusNn1),
            "s_plus_1" => Ok(Self::SPlus1),
            other => Err(format!(
                "unknown kernel symbol '{other}' (expected one, q_plus_nn_1, or s_plus_1)"
            )),
        }
    }
}

impl std::fmt::Display for KernelSymbol {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            KernelSymbol::One => write!(f, "one"),
            KernelSymbol::QPlusNn1 => write!(f, "q_plus_nn_1"),
            KernelSymbol::SPlus1 => write!(f, "s_plus_1"),
        }
    }
}

/// Configuration of a kernel decay probe.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct KernelProbeConfig {
    /// Number of probe radii (log-spaced).
    pub n_radii: usize,
    /// Smallest radius, in units of `1/(|lambda|^(1/2) + 1)`.
    pub r_min_scale: f64,
    /// Number of decades the radii span.
    pub decades: f64,
    /// Polar angles (radians, in `(0, pi/2)`) of the probe rays.
    pub angles: Vec<f64>,
}

impl Default for KernelProbeConfig {
    fn default() -> Self {
        Self {
            n_radii: 13,
            r_min_scale: 0.5,
            decades: 2.0,
            angles: vec![
                30f64.to_radians(),
                45f64.to_radians(),
                60f64.to_radians(),
            ],
        }
    }
}

/// Result of [`kernel_decay_probe`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct KernelDecayReport {
    /// Which kernel was probed.
    pub kind: KernelKind,
    /// The multiplier inserted.
    pub symbol: KernelSymbol,
    /// The resolvent parameter (re, im).
    pub lambda: (f64, f64),
    /// Probe radii.
    pub radii: Vec<f64>,
    /// `max_theta |k(r, theta)| * r^N` at each radius (`N = 2`).
    pub weighted_sup: Vec<f64>,
    /// All weighted values finite.
    pub sup_finite: bool,
    /// `sup(outer decade) / sup(inner decades)`.
    pub outer_decade_ratio: f64,
    /// The weighted sup does not grow into the outer decade (ratio below
    /// 1.05).
    pub non_increasing: bool,
}

/// G7 node positions inside the K15 rule (absolute values).
const GK_NODES: [f64; 8] = [
    0.991455371120813,
    0.949107912342759,
    0.864864423359769,
    0.741531185599394,
    0.586087235467691,
    0.405845151377397,
    0.207784955007898,
    0.0,
];
const K15_WEIGHTS: [f64; 8] = [
    0.022935322010529,
    0.063092092629979,
    0.104790010322250,
    0.140653259715525,
    0.169004726639267,
    0.190350578064785,
    0.204432940075298,
    0.209482141084728,
];
const G7_WEIGHTS: [f64; 4] = [
    0.129484966168870,
    0.279705391489277,
    0.381830050505119,
    0.417959183673469,
];

/// One Gauss-Kronrod 7-15 panel: returns (K15 value, |K15 - G7| error
/// estimate).
fn gk15(f: &dyn Fn(f64) -> Complex64, a: f64, b: f64) -> (Complex64, f64) {
    let c = 0.5 * (a + b);
    let hw = 0.5 * (b - a);
    let mut k15 = Complex64::new(0.0, 0.0);
    let mut g7 = Complex64::new(0.0, 0.0);
    for (idx, &x) in GK_NODES.iter().enumerate() {
        let (fp, fm) = if x == 0.0 {
            let v = f(c);
            (v, Complex64::new(0.0, 0.0))
        } else {
            (f(c + hw * x), f(c - hw * x))
        };
        let pair = if x == 0.0 { fp } else { fp + fm };
        k15 += K15_WEIGHTS[idx] * pair;
        // Odd Kronrod positions (idx 1, 3, 5, 7) are the G7 nodes.
        if idx % 2 == 1 {
            g7 += G7_WEIGHTS[idx / 2] * pair;
        }
    }
    k15 *= hw;
    g7 *= hw;
    (k15, (k15 - g7).norm())
}

/// Adaptive Gauss-Kronrod integration of `f` over `[a, b]`.
fn adaptive_gk(
    f: &dyn Fn(f64) -> Complex64,
    a: f64,
    b: f64,
    tol: f64,
) -> Result<Complex64, MultiplierError> {
    #[derive(Debug)]
    struct Seg {
        a: f64,
        b: f64,
        value: Complex64,
        err: f64,
    }
    let (value, err) = gk15(f, a, b);
    let mut segs = vec![Seg { a, b, value, err }];
    const MAX_SEGS: usize = 20_000;
    loop {
        let total_err: f64 = segs.iter().map(|s| s.err).sum();
        let total_val: Complex64 = segs.iter().map(|s| s.value).sum();
        if total_err <= tol.max(tol * total_val.norm()) {
            return Ok(total_val);
        }
        if segs.len() >= MAX_SEGS {
            return Err(MultiplierError::QuadratureFailure {
                reason: format!(
                    "error {total_err:.3e} above tolerance after {MAX_SEGS} panels"
                ),
            });
        }
        // Split the worst segment.
        let worst = segs
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.err.total_cmp(&y.1.err))
            .map(|(i, _)| i)
            .unwrap();
        let seg = segs.swap_remove(worst);
        let mid = 0.5 * (seg.a + seg.b);
        if !(seg.a < mid && mid < seg.b) {
            return Err(MultiplierError::QuadratureFailure {
                reason: "panel collapsed below floating-point resolution".into(),
            });
        }
        for (lo, hi) in [(seg.a, mid), (mid, seg.b)] {
            let (value, err) = gk15(f, lo, hi);
            segs.push(Seg { a: lo, b: hi, value, err });
        }
    }
}

fn kernel_symbol_value(
    p: &ValidatedParams,
    symbol: KernelSymbol,
    pt: &SpectralPoint,
) -> Option<Complex64> {
    match symbol {
        KernelSymbol::One => Some(Complex64::new(1.0, 0.0)),
        KernelSymbol::QPlusNn1 => {
            coefficient(CoefficientName::QPlusNN { i: 1 }, p, pt).ok()
        }
        KernelSymbol::SPlus1 => coefficient(CoefficientName::SPlus { j: 1 }, p, pt).ok(),
    }
}

/// The Fourier-side integrand `m(lambda, xi) * weight(xi) * vertical(x_N)`.
fn kernel_integrand(
    p: &ValidatedParams,
    kind: KernelKind,
    symbol: KernelSymbol,
    lambda: Complex64,
    xi: f64,
    x_n: f64,
) -> Complex64 {
    if xi == 0.0 {
        // Both kernels carry at least one factor of A.
        return Complex64::new(0.0, 0.0);
    }
    let pt = SpectralPoint::new(lambda, &[xi]);
    let a = pt.a();
    let Some(m) = kernel_symbol_value(p, symbol, &pt) else {
        return Complex64::new(0.0, 0.0);
    };
    let Ok(s) = characteristic_roots(p, &pt) else {
        return Complex64::new(0.0, 0.0);
    };
    match kind {
        KernelKind::K0 => m * a * a * eval_M(MKind::MZeroPlus, &s, x_n),
        KernelKind::L1 => m * a * (-s.t1 * x_n).exp(),
    }
}

/// Probes the spatial decay of a solution kernel in `N = 2`.
///
/// For each probe point `x = r (cos theta, sin theta)` the kernel value is
/// computed by adaptive Gauss-Kronrod quadrature of the inverse Fourier
/// integral (cutoff chosen so the neglected tail is below
/// [`QUAD_TAIL_TOL`]); the report records `max_theta |k| r^N` per radius and
/// whether that weighted value stays bounded (non-increasing into the outer
/// decade), which is the `|x|^(-N)` decay the multiplier classes predict.
pub fn kernel_decay_probe(
    p: &ValidatedParams,
    kind: KernelKind,
    symbol: KernelSymbol,
    lambda: Complex64,
    config: &KernelProbeConfig,
) -> Result<KernelDecayReport, MultiplierError> {
    let w = lambda.norm().sqrt() + 1.0;
    let r_min = config.r_min_scale / w;
    let radii: Vec<f64> = (0..config.n_radii)
        .map(|k| {
            r_min
                * 10f64.powf(
                    config.decades * k as f64 / (config.n_radii - 1).max(1) as f64,
                )
        })
        .collect();

    let mut weighted_sup = Vec::with_capacity(radii.len());
    for &r in &radii {
        let mut worst: f64 = 0.0;
        for &theta in &config.angles {
            let x_prime = r * theta.cos();
            let x_n = r * theta.sin();
            // Cutoff: double until the integrand magnitude at the cutoff
            // implies a tail below QUAD_TAIL_TOL (exponential decay with
            // rate ~ x_N beyond the cutoff).
            let mut cutoff = 8.0 * (1.0 + lambda.norm().sqrt());
            let mut ok = false;
            for _ in 0..60 {
                let edge = kernel_integrand(p, kind, symbol, lambda, cutoff, x_n)
                    .norm()
                    .max(
                        kernel_integrand(p, kind, symbol, lambda, 0.97 * cutoff, x_n)
                            .norm(),
                    );
                // Two-sided integral: tail mass ~ 2 * edge / x_N.
                if 2.0 * edge / x_n.max(1e-300) < QUAD_TAIL_TOL {
                    ok = true;
                    break;
                }
                cutoff *= 2.0;
            }
            if !ok {
                return Err(MultiplierError::QuadratureFailure {
                    reason: format!(
                        "no admissible cutoff for tail < {QUAD_TAIL_TOL:.1e} at \
                         r = {r:.3e}, theta = {theta:.3}"
                    ),
                });
            }
            let f = |xi: f64| -> Complex64 {
                let fwd = kernel_integrand(p, kind, symbol, lambda, xi, x_n)
                    * Complex64::new(0.0, xi * x_prime).exp();
                let bwd = kernel_integrand(p, kind, symbol, lambda, -xi, x_n)
                    * Complex64::new(0.0, -xi * x_prime).exp();
                fwd + bwd
            };
            let integral = adaptive_gk(&f, 0.0, cutoff, QUAD_TOL)?;
            let k_val = integral / (2.0 * std::f64::consts::PI);
            worst = worst.max(k_val.norm() * r * r);
        }
        weighted_sup.push(worst);
    }

    let sup_finite = weighted_sup.iter().all(|v| v.is_finite());
    // Compare the outer decade of radii against everything before it.
    let n = weighted_sup.len();
    let per_decade = (((n - 1) as f64) / config.decades).round() as usize;
    let split = n.saturating_sub(per_decade + 1).max(1).min(n - 1);
    let inner_sup = weighted_sup[..split].iter().cloned().fold(0.0f64, f64::max);
    let outer_sup = weighted_sup[split..].iter().cloned().fold(0.0f64, f64::max);
    let outer_decade_ratio = outer_sup / inner_sup.max(f64::MIN_POSITIVE);
    Ok(KernelDecayReport {
        kind,
        symbol,
        lambda: (lambda.re, lambda.im),
        radii,
        weighted_sup,
        sup_finite,
        outer_decade_ratio,
        non_increasing: sup_finite && outer_decade_ratio <= 1.05,
    })
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

    fn ref_point() -> SpectralPoint {
        SpectralPoint::new(Complex64::from_polar(2.0, 2.0 * PI / 5.0), &[0.7, -0.4])
    }

    #[test]
    fn golden_kinetic_symbol_main() {
        let k_h = kinetic_symbol_value(&main_set(), &ref_point()).unwrap();
        assert_cx(
            k_h,
            c(0.448567654125544862127459120082, -0.358925784029512713275360587839),
            1e-12,
        );
    }

    #[test]
    fn golden_kinetic_symbol_complex_set() {
        let k_h = kinetic_symbol_value(&complex_set(), &ref_point()).unwrap();
        assert_cx(
            k_h,
            c(0.569734058654740119560073050395, -0.419313475996520096299569138887),
            1e-12,
        );
    }

    #[test]
    fn s_coefficients_split_the_jump_by_viscous_impedance() {
        // With rho_plus/mu_plus = rho_minus/mu_minus the decay rates agree,
        // B_plus = B_minus, so S+ = -mu_minus/(mu_plus + mu_minus) = -2/3
        // and S- = S+ + 1 = 1/3.
        let p = validate_params(&PhysicalParams {
            dim: 3,
            rho_plus: 1.0,
            mu_plus: 1.0,
            nu_plus: 2.0,
            kappa_plus: 1.0,
            rho_minus: 2.0,
            mu_minus: 2.0,
            sigma: 1.0,
        })
        .unwrap();
        let pt = ref_point();
        let s_plus = coefficient(CoefficientName::SPlus { j: 1 }, &p, &pt).unwrap();
        let s_minus = coefficient(CoefficientName::SMinus { j: 2 }, &p, &pt).unwrap();
        assert_cx(s_plus, c(-2.0 / 3.0, 0.0), 1e-13);
        assert_cx(s_minus, c(1.0 / 3.0, 0.0), 1e-13);
        assert_cx(s_minus - s_plus, c(1.0, 0.0), 1e-13);
    }

    #[test]
    fn zero_frequency_is_rejected() {
        let p = main_set();
        let pt = SpectralPoint::new(c(1.0, 0.5), &[0.0, 0.0]);
        assert!(matches!(
            coefficient(CoefficientName::RPlusNN, &p, &pt),
            Err(MultiplierError::ZeroFrequency { .. })
        ));
    }

    #[test]
    fn index_out_of_range_is_rejected() {
        let p = validate_params(&PhysicalParams {
            dim: 2,
            ..*main_set().raw()
        })
        .unwrap();
        let pt = SpectralPoint::new(c(1.0, 0.5), &[0.7]);
        assert!(matches!(
            coefficient(CoefficientName::RPlusNm { m: 2 }, &p, &pt),
            Err(MultiplierError::IndexOutOfRange { .. })
        ));
    }

    #[test]
    fn kinetic_symbol_vanishes_without_surface_tension() {
        let mut raw = *main_set().raw();
        raw.sigma = 0.0;
        let p = validate_params(&raw).unwrap();
        let k_h = kinetic_symbol_value(&p, &ref_point()).unwrap();
        assert!(k_h.norm() < 1e-30, "K_H = {k_h} should vanish at sigma = 0");
    }

    #[test]
    fn table_enumerations_have_expected_sizes() {
        // N = 3: j, m range over {1, 2}.
        let all3 = CoefficientName::all(3);
        let all2 = CoefficientName::all(2);
        assert!(all3.len() > all2.len());
        // No duplicates.
        let mut seen = std::collections::HashSet::new();
        for n in &all3 {
            assert!(seen.insert(*n), "duplicate entry {n}");
        }
    }

    #[test]
    fn class_estimate_certifies_s_plus_quickly() {
        let p = main_set();
        let claim = ClassClaim {
            target: ClaimTarget::Table(CoefficientName::SPlus { j: 1 }),
            order: 0,
            mtype: MType::Type1,
        };
        let mut grid = class_grid(PI / 3.0);
        grid.lambda_per_decade = 2;
        grid.a_per_decade = 2;
        grid.n_args = 3;
        let report = class_estimate(&p, &claim, &grid);
        assert!(report.bounded, "S+ should be certified: {report:?}");
        assert!(report.sup_constant > 0.0 && report.sup_constant < 10.0);
    }

    #[test]
    fn gk_quadrature_integrates_smooth_functions() {
        // integral of exp(i x) over [0, pi] = 2i / ... : actually
        // int_0^pi e^{ix} dx = (e^{i pi} - 1)/i = 2i.
        let f = |x: f64| Complex64::new(0.0, x).exp();
        let v = adaptive_gk(&f, 0.0, PI, 1e-12).unwrap();
        assert_cx(v, c(0.0, 2.0), 1e-10);
        // Oscillatory + decaying.
        let g = |x: f64| (Complex64::new(-0.3, 4.0) * x).exp();
        let v2 = adaptive_gk(&g, 0.0, 40.0, 1e-12).unwrap();
        let exact = ((Complex64::new(-0.3, 4.0) * 40.0).exp() - 1.0)
            / Complex64::new(-0.3, 4.0);
        assert_cx(v2, exact, 1e-9);
    }

    #[test]
    fn kernel_probe_observes_quadratic_decay() {
        // Planar (N = 2) parameters; the probe itself asserts nothing about
        // the exact kernel values, only the |x|^(-N) envelope, so feed it a
        // well-conditioned point and check the report is self-consistent.
        let mut raw = *main_set().raw();
        raw.dim = 2;
        let p = validate_params(&raw).unwrap();
        let mut cfg = KernelProbeConfig::default();
        cfg.n_radii = 7;
        let report = kernel_decay_probe(
            &p,
            KernelKind::K0,
            KernelSymbol::QPlusNn1,
            c(1.0, 0.6),
            &cfg,
        )
        .unwrap();
        assert_eq!(report.radii.len(), 7);
        assert_eq!(report.weighted_sup.len(), 7);
        assert!(report.sup_finite, "weighted sup must be finite: {report:?}");
        assert!(
            report.non_increasing,
            "r^2-weighted kernel sup should not grow into the outer decade: \
             {report:?}"
        );
        // The weighted sup must be genuinely positive (the probe is not
        // silently integrating a zero function).
        assert!(report.weighted_sup.iter().all(|&v| v > 0.0), "{report:?}");
    }

    #[test]
    fn kernel_probe_l1_kind_and_identity_symbol() {
        let mut raw = *main_set().raw();
        raw.dim = 2;
        let p = validate_params(&raw).unwrap();
        let mut cfg = KernelProbeConfig::default();
        cfg.n_radii = 5;
        let report = kernel_decay_probe(
            &p,
            KernelKind::L1,
            KernelSymbol::One,
            c(0.5, -0.4),
            &cfg,
        )
        .unwrap();
        assert!(report.sup_finite);
        assert!(report.non_increasing, "{report:?}");
    }
}
