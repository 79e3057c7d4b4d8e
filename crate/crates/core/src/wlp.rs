//! Non-commutative `rho`-weighted L^p norms.
//!
//! For a full-rank state `rho`:
//!
//! ```text
//! ||f||_{L^p(rho)} = tr[|rho^{1/2p} f rho^{1/2p}|^p]^{1/p}
//! <f, g>_rho       = tr[sqrt(rho) f sqrt(rho) g]
//! ```
//!
//! and `||f||_{L^inf(rho)}` is the plain operator norm. Only the `(1, inf)`
//! duality pair is realized, through the closed-form witness of
//! [`duality_witness_l1`].

use crate::error::{Error, Result};
use crate::linalg::{frobenius, hermitize, DensityOperator, HermitianOperator, SpectralDecomposition};
use crate::superops::{require_positive_definite, LinearMap};
use crate::verify::InequalityReport;

/// Tolerance for the contraction inequality and its fixed-point hypothesis.
pub const CONTRACTION_TOL: f64 = 1e-9;
const INNER_IM_TOL: f64 = 1e-10;

/// `L^p(rho)` with `rho` full rank and `p` in `[1, inf]`.
#[derive(Debug, Clone)]
pub struct WeightedSpace {
    rho: DensityOperator,
    eig: SpectralDecomposition,
    p: f64,
}

impl WeightedSpace {
    pub fn new(rho: DensityOperator, p: f64) -> Result<Self> {
        check_exponent(p)?;
        let eig = require_positive_definite(rho.op(), "rho")?;
        Ok(Self { rho, eig, p })
    }

    /// Same weight, different exponent.
    pub fn with_p(&self, p: f64) -> Result<Self> {
        check_exponent(p)?;
        Ok(Self {
            rho: self.rho.clone(),
            eig: self.eig.clone(),
            p,
        })
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn rho(&self) -> &DensityOperator {
        &self.rho
    }

    fn rho_power(&self, s: f64) -> HermitianOperator {
        self.eig.reconstruct(|l| l.powf(s))
    }

    /// `||f||_{L^p(rho)}`.
    pub fn norm(&self, f: &HermitianOperator) -> Result<f64> {
        self.check_dim(f)?;
        if self.p.is_infinite() {
            return f.operator_norm();
        }
        let weight = self.rho_power(0.5 / self.p);
        let x = f.congruence(weight.matrix())?;
        let abs: Vec<f64> = x.eig()?.eigenvalues.iter().map(|l| l.abs()).collect();
        let scale = abs.iter().copied().fold(0.0, f64::max);
        if scale == 0.0 {
            return Ok(0.0);
        }
        let sum: f64 = abs.iter().map(|a| (a / scale).powf(self.p)).sum();
        Ok(scale * sum.powf(1.0 / self.p))
    }

    /// `<f, g>_rho`.
    pub fn inner(&self, f: &HermitianOperator, g: &HermitianOperator) -> Result<f64> {
        self.check_dim(f)?;
        self.check_dim(g)?;
        let root = self.rho_power(0.5);
        let sandwiched = root.matrix() * f.matrix() * root.matrix();
        let value = g.trace_product(&sandwiched);
        if value.im.abs() > INNER_IM_TOL * value.re.abs().max(1.0) {
            return Err(Error::ImaginaryResidue {
                quantity: "rho_inner",
                residue: value.im,
            });
        }
        Ok(value.re)
    }

    fn check_dim(&self, f: &HermitianOperator) -> Result<()> {
        if f.dim() != self.rho.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.rho.dim(),
                found: f.dim(),
            });
        }
        Ok(())
    }
}

fn check_exponent(p: f64) -> Result<()> {
    // also rejects NaN
    if !(p >= 1.0) {
        return Err(Error::InvalidInput(format!(
            "L^p exponent must be at least 1, got {p}"
        )));
    }
    Ok(())
}

/// `||f||_{L^p(rho)}`.
pub fn lp_norm(f: &HermitianOperator, w: &WeightedSpace) -> Result<f64> {
    w.norm(f)
}

/// `<f, g>_rho = tr[sqrt(rho) f sqrt(rho) g]`.
pub fn rho_inner(f: &HermitianOperator, g: &HermitianOperator, rho: &DensityOperator) -> Result<f64> {
    WeightedSpace::new(rho.clone(), 1.0)?.inner(f, g)
}

/// The maximizer `Y = sign(rho^{1/2} f rho^{1/2})` of `<Y, f>_rho` over
/// `||Y||_inf <= 1`, and the attained value, which equals `||f||_{L^1(rho)}`.
/// Zero eigenvalues map to `+1`.
pub fn duality_witness_l1(
    f: &HermitianOperator,
    rho: &DensityOperator,
) -> Result<(HermitianOperator, f64)> {
    let space = WeightedSpace::new(rho.clone(), 1.0)?;
    space.check_dim(f)?;
    let root = space.rho_power(0.5);
    let x = f.congruence(root.matrix())?;
    let witness = x.eig()?.reconstruct(|l| if l < 0.0 { -1.0 } else { 1.0 });
    let value = space.inner(&witness, f)?;
    Ok((witness, value))
}

/// Checks `||T(x)||_{L^1(rho)} <= ||x||_{L^1(rho)}` for a map with
/// `T^*(rho) = rho`.
///
/// The fixed-point hypothesis is measured, not assumed: if
/// `||T^*(rho) - rho||_F` exceeds [`CONTRACTION_TOL`] the report is marked
/// inapplicable. The defect is recorded either way.
pub fn check_l1_contraction(
    t: &impl LinearMap,
    rho: &DensityOperator,
    x: &HermitianOperator,
) -> Result<InequalityReport> {
    const NAME: &str = "l1_contraction";
    let space = WeightedSpace::new(rho.clone(), 1.0)?;
    let defect = frobenius(&(t.apply_dual(rho.matrix())? - rho.matrix()));
    let image = hermitize(&t.apply(x.matrix())?)?.op;
    let lhs = space.norm(&image)?;
    let rhs = space.norm(x)?;
    let report = if defect > CONTRACTION_TOL {
        InequalityReport::inapplicable(
            NAME,
            crate::verify::Relation::Leq,
            lhs,
            rhs,
            CONTRACTION_TOL,
            "dual map does not fix rho",
        )
    } else {
        InequalityReport::leq(NAME, lhs, rhs, CONTRACTION_TOL)
    };
    Ok(report.with_meta("fixed_point_defect", format!("{defect:e}")))
}
