//! Kraus-form quantum channels used by the L¹(ρ) contraction checks.

use crate::error::{Error, Result};
use crate::linalg::{c, frobenius, identity, CMatrix, DensityOperator};

use super::{beta0, require_positive_definite, QuadratureSpec};

/// Completeness tolerance `||sum K^dagger K - 1||_F` for exact channels.
pub const KRAUS_TOL: f64 = 1e-10;
/// Completeness tolerance for the quadrature-based modular average.
pub const MODULAR_TP_TOL: f64 = 1e-9;
/// Eigenvalues closer than this share a spectral projector in the pinching.
const PINCHING_GAP: f64 = 1e-10;

/// A linear map on square matrices together with its Hilbert–Schmidt dual.
pub trait LinearMap {
    fn dim(&self) -> usize;
    fn apply(&self, x: &CMatrix) -> Result<CMatrix>;
    fn apply_dual(&self, y: &CMatrix) -> Result<CMatrix>;
}

/// A completely positive map `x -> sum_k K_k x K_k^dagger`.
///
/// Built through [`ChannelRep::new`] it is trace preserving within
/// [`KRAUS_TOL`]. [`ChannelRep::dual`] returns the adjoint map, which is
/// unital rather than trace preserving in general.
#[derive(Debug, Clone)]
pub struct ChannelRep {
    kraus: Vec<CMatrix>,
    dim: usize,
}

impl ChannelRep {
    pub fn new(kraus: Vec<CMatrix>) -> Result<Self> {
        Self::with_tolerance(kraus, KRAUS_TOL)
    }

    /// Accepts a Kraus family whose completeness defect is at most `tol`.
    pub fn with_tolerance(kraus: Vec<CMatrix>, tol: f64) -> Result<Self> {
        let map = Self::unchecked(kraus)?;
        let defect = map.completeness_defect();
        if defect > tol {
            return Err(Error::NotTracePreserving { defect });
        }
        Ok(map)
    }

    fn unchecked(kraus: Vec<CMatrix>) -> Result<Self> {
        let first = kraus
            .first()
            .ok_or_else(|| Error::InvalidInput("a channel needs at least one Kraus operator".into()))?;
        let dim = first.nrows();
        for k in &kraus {
            if k.nrows() != k.ncols() {
                return Err(Error::NotSquare {
                    rows: k.nrows(),
                    cols: k.ncols(),
                });
            }
            if k.nrows() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: k.nrows(),
                });
            }
        }
        Ok(Self { kraus, dim })
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            kraus: vec![identity(dim)],
            dim,
        }
    }

    pub fn kraus_ops(&self) -> &[CMatrix] {
        &self.kraus
    }

    /// `||sum K^dagger K - 1||_F`.
    pub fn completeness_defect(&self) -> f64 {
        let mut acc = -identity(self.dim);
        for k in &self.kraus {
            acc += k.adjoint() * k;
        }
        frobenius(&acc)
    }

    /// The Hilbert–Schmidt adjoint, with Kraus family `{K^dagger}`.
    pub fn dual(&self) -> ChannelRep {
        Self {
            kraus: self.kraus.iter().map(|k| k.adjoint()).collect(),
            dim: self.dim,
        }
    }

    fn check_input(&self, x: &CMatrix) -> Result<()> {
        if x.nrows() != self.dim || x.ncols() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: x.nrows().max(x.ncols()),
            });
        }
        Ok(())
    }
}

impl LinearMap for ChannelRep {
    fn dim(&self) -> usize {
        self.dim
    }

    fn apply(&self, x: &CMatrix) -> Result<CMatrix> {
        self.check_input(x)?;
        let mut out = CMatrix::zeros(self.dim, self.dim);
        for k in &self.kraus {
            out += k * x * k.adjoint();
        }
        Ok(out)
    }

    fn apply_dual(&self, y: &CMatrix) -> Result<CMatrix> {
        self.check_input(y)?;
        let mut out = CMatrix::zeros(self.dim, self.dim);
        for k in &self.kraus {
            out += k.adjoint() * y * k;
        }
        Ok(out)
    }
}

pub fn apply_channel(t: &ChannelRep, x: &CMatrix) -> Result<CMatrix> {
    t.apply(x)
}

pub fn channel_dual(t: &ChannelRep) -> ChannelRep {
    t.dual()
}

/// Pinching onto the eigenspaces of `rho`: Kraus operators are the spectral
/// projectors, so the channel is self-dual and fixes `rho`.
pub fn pinching_channel(rho: &DensityOperator) -> Result<ChannelRep> {
    let eig = rho.eig()?;
    let n = eig.dim();
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for i in 0..n {
        match groups.last_mut() {
            Some(g) if eig.eigenvalues[i] - eig.eigenvalues[*g.last().unwrap()] <= PINCHING_GAP => {
                g.push(i)
            }
            _ => groups.push(vec![i]),
        }
    }
    let u = &eig.eigenvectors;
    let projectors = groups
        .iter()
        .map(|g| {
            let mut p = CMatrix::zeros(n, n);
            for &i in g {
                let col = u.column(i);
                p += &col * col.adjoint();
            }
            p
        })
        .collect();
    ChannelRep::new(projectors)
}

/// The beta_0-weighted modular average
/// `x -> int beta_0(t) rho^{it/2} x rho^{-it/2} dt`, discretized as the
/// Kraus family `{sqrt(w_k beta_0(t_k)) rho^{i t_k / 2}}`.
///
/// Quadrature makes the map trace preserving only up to the rule's error in
/// `int beta_0 = 1`; that defect must stay below [`MODULAR_TP_TOL`].
pub fn modular_average_channel(rho: &DensityOperator, q: &QuadratureSpec) -> Result<ChannelRep> {
    let eig = require_positive_definite(rho.op(), "rho")?;
    let mut kraus = Vec::new();
    for (t, w) in q.nodes()? {
        let weight = w * beta0(t);
        if weight == 0.0 {
            continue;
        }
        let unitary = eig.complex_power(c(0.0, 0.5 * t))?;
        kraus.push(unitary * c(weight.sqrt(), 0.0));
    }
    ChannelRep::with_tolerance(kraus, MODULAR_TP_TOL)
}
