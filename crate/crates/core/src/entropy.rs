//! Umegaki relative entropy for positive operators and states, mutual
//! information, and the scaling identities used in the proof chain.
//!
//! For positive `f`, `g` with `tr f > 0` the relative entropy is normalized by
//! the trace of the first argument:
//!
//! ```text
//! Ent(f || g) = tr[f (log f - log g)] / tr[f]
//! ```
//!
//! and is `+inf` when the support of `f` leaves the support of `g`.

use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::linalg::{BipartiteDims, DensityOperator, HermitianOperator, RANK_TOL};

/// Mass of `f` on the numerical kernel of `g` (relative to `tr f`) above
/// which the support condition is considered violated.
pub const SUPPORT_MASS_TOL: f64 = 1e-10;

/// A finite real or `+inf`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExtendedReal {
    Finite(f64),
    PosInfinity,
}

impl ExtendedReal {
    pub fn is_finite(&self) -> bool {
        matches!(self, ExtendedReal::Finite(_))
    }

    pub fn finite(&self) -> Option<f64> {
        match *self {
            ExtendedReal::Finite(v) => Some(v),
            ExtendedReal::PosInfinity => None,
        }
    }

    /// Finite value or [`Error::InfiniteEntropy`].
    pub fn require_finite(&self) -> Result<f64> {
        self.finite().ok_or(Error::InfiniteEntropy)
    }

    /// As an `f64`, with `+inf` mapped to `f64::INFINITY`.
    pub fn to_f64(&self) -> f64 {
        self.finite().unwrap_or(f64::INFINITY)
    }

    pub fn from_f64(v: f64) -> Self {
        if v == f64::INFINITY {
            ExtendedReal::PosInfinity
        } else {
            ExtendedReal::Finite(v)
        }
    }
}

impl From<f64> for ExtendedReal {
    fn from(v: f64) -> Self {
        ExtendedReal::from_f64(v)
    }
}

impl fmt::Display for ExtendedReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtendedReal::Finite(v) => write!(f, "{v}"),
            ExtendedReal::PosInfinity => f.write_str("+inf"),
        }
    }
}

// JSON has no infinity literal, so +inf travels as the string "+inf".
impl Serialize for ExtendedReal {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match *self {
            ExtendedReal::Finite(v) => s.serialize_f64(v),
            ExtendedReal::PosInfinity => s.serialize_str("+inf"),
        }
    }
}

impl<'de> Deserialize<'de> for ExtendedReal {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Num(f64),
            Text(String),
        }
        match Repr::deserialize(d)? {
            Repr::Num(v) => Ok(ExtendedReal::Finite(v)),
            Repr::Text(t) if t == "+inf" || t == "inf" => Ok(ExtendedReal::PosInfinity),
            Repr::Text(t) => Err(serde::de::Error::custom(format!(
                "expected a number or \"+inf\", got {t:?}"
            ))),
        }
    }
}

fn check_same_dim(f: &HermitianOperator, g: &HermitianOperator) -> Result<()> {
    if f.dim() != g.dim() {
        return Err(Error::DimensionMismatch {
            expected: f.dim(),
            found: g.dim(),
        });
    }
    Ok(())
}

/// `Ent(f || g)` for positive semidefinite `f`, `g`.
///
/// Eigenvalues at or below `RANK_TOL * lambda_max` count as zero. Eigenvalues
/// of `f` in that range contribute nothing (`0 log 0 = 0`); if `f` puts more
/// than [`SUPPORT_MASS_TOL`] of its (relative) mass on the kernel of `g` the
/// result is `+inf`.
pub fn relative_entropy_positive(
    f: &HermitianOperator,
    g: &HermitianOperator,
) -> Result<ExtendedReal> {
    check_same_dim(f, g)?;
    let tr_f = f.trace();
    if tr_f <= RANK_TOL {
        return Err(Error::InvalidInput(format!(
            "relative entropy needs tr f > 0, got {tr_f:e}"
        )));
    }
    let tr_g = g.trace();
    if tr_g <= RANK_TOL {
        return Err(Error::InvalidInput(format!(
            "relative entropy needs tr g > 0, got {tr_g:e}"
        )));
    }

    let ef = f.eig()?;
    let eg = g.eig()?;
    let f_zero = RANK_TOL * ef.max_eigenvalue().max(0.0);
    let g_zero = RANK_TOL * eg.max_eigenvalue().max(0.0);

    // diagonal of f in g's eigenbasis
    let f_in_g = f.congruence(&eg.eigenvectors)?;
    let mut kernel_mass = 0.0;
    let mut cross = 0.0;
    for (j, &q) in eg.eigenvalues.iter().enumerate() {
        let weight = f_in_g.matrix()[(j, j)].re;
        if q <= g_zero {
            kernel_mass += weight;
        } else {
            cross += weight * q.ln();
        }
    }
    if kernel_mass > SUPPORT_MASS_TOL * tr_f {
        return Ok(ExtendedReal::PosInfinity);
    }

    let self_term: f64 = ef
        .eigenvalues
        .iter()
        .filter(|&&p| p > f_zero)
        .map(|&p| p * p.ln())
        .sum();
    Ok(ExtendedReal::Finite((self_term - cross) / tr_f))
}

/// `Ent(rho || sigma)` for states.
pub fn relative_entropy(rho: &DensityOperator, sigma: &DensityOperator) -> Result<ExtendedReal> {
    relative_entropy_positive(rho.op(), sigma.op())
}

/// `Ent(a f || b g) - Ent(f || g)`, which equals `log(a / b)`.
pub fn scaled_entropy_shift(
    f: &HermitianOperator,
    g: &HermitianOperator,
    a: f64,
    b: f64,
) -> Result<f64> {
    if !(a > 0.0 && b > 0.0) {
        return Err(Error::InvalidInput(format!(
            "scale factors must be positive, got a = {a}, b = {b}"
        )));
    }
    let scaled = relative_entropy_positive(&f.scale(a), &g.scale(b))?.require_finite()?;
    let base = relative_entropy_positive(f, g)?.require_finite()?;
    Ok(scaled - base)
}

/// `-log(tr g / tr f)`, a lower bound on `Ent(f || g)`.
pub fn entropy_lower_bound(f: &HermitianOperator, g: &HermitianOperator) -> Result<f64> {
    let (tr_f, tr_g) = (f.trace(), g.trace());
    if !(tr_f > 0.0 && tr_g > 0.0) {
        return Err(Error::InvalidInput(format!(
            "traces must be positive, got tr f = {tr_f:e}, tr g = {tr_g:e}"
        )));
    }
    Ok(-(tr_g / tr_f).ln())
}

/// `I(A:B) = Ent(rho_AB || rho_A (x) rho_B)`.
pub fn mutual_information(rho_ab: &DensityOperator, dims: BipartiteDims) -> Result<ExtendedReal> {
    dims.check(rho_ab.dim())?;
    let (rho_a, rho_b) = rho_ab.marginals(dims)?;
    relative_entropy(rho_ab, &rho_a.tensor(&rho_b))
}

/// von Neumann entropy `-tr[rho log rho]`.
pub fn von_neumann_entropy(rho: &DensityOperator) -> Result<f64> {
    let eig = rho.eig()?;
    let zero = RANK_TOL * eig.max_eigenvalue();
    Ok(-eig
        .eigenvalues
        .iter()
        .filter(|&&p| p > zero)
        .map(|&p| p * p.ln())
        .sum::<f64>())
}
