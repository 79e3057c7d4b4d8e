//! Dense complex-Hermitian matrix engine.
//!
//! Every matrix function in the crate goes through a full Hermitian
//! eigendecomposition: the operators handled here are small (dimension up to
//! about 100) and the spectral form is reused by the superoperators.
//!
//! Bipartite operators use the A-major Kronecker ordering: the basis vector
//! `|i_a, i_b>` sits at index `i_a * dim_b + i_b`.

use nalgebra::linalg::{SymmetricEigen, SVD};
use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type CMatrix = DMatrix<Complex64>;

/// Per-entry tolerance for accepting a matrix as Hermitian.
pub const HERMITIAN_TOL: f64 = 1e-12;
/// Asymmetry above which [`hermitize`] flags its input.
pub const ADVISORY_ASYMMETRY: f64 = 1e-8;
/// Allowed deviation of a density operator's trace from 1.
pub const TRACE_TOL: f64 = 1e-10;
/// Allowed imaginary part of a density operator's trace.
pub const TRACE_IM_TOL: f64 = 1e-12;
/// Eigenvalues in `[-PSD_FLOOR, 0)` are clamped to zero for states.
pub const PSD_FLOOR: f64 = 1e-10;
/// An eigenvalue is numerically zero when `<= RANK_TOL * lambda_max`.
pub const RANK_TOL: f64 = 1e-12;

const EIGEN_MAX_ITER: usize = 10_000;

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn real(re: f64) -> C64 {
    C64::new(re, 0.0)
}

pub fn identity(dim: usize) -> CMatrix {
    CMatrix::identity(dim, dim)
}

pub fn trace(x: &CMatrix) -> C64 {
    x.diagonal().iter().sum()
}

/// Frobenius norm.
pub fn frobenius(x: &CMatrix) -> f64 {
    x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Largest entrywise `|x_ij - conj(x_ji)|`.
pub fn max_asymmetry(x: &CMatrix) -> f64 {
    let n = x.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((x[(i, j)] - x[(j, i)].conj()).norm());
        }
    }
    worst
}

fn check_square(x: &CMatrix) -> Result<usize> {
    if x.nrows() != x.ncols() {
        return Err(Error::NotSquare {
            rows: x.nrows(),
            cols: x.ncols(),
        });
    }
    if x.nrows() == 0 {
        return Err(Error::EmptyMatrix);
    }
    Ok(x.nrows())
}

/// `(x + x^dagger) / 2`, exactly Hermitian in floating point.
fn symmetrize(x: &CMatrix) -> CMatrix {
    let n = x.nrows();
    CMatrix::from_fn(n, n, |i, j| (x[(i, j)] + x[(j, i)].conj()) * 0.5)
}

/// Result of [`hermitize`]: the repaired operator plus the asymmetry that was
/// removed.
#[derive(Debug, Clone)]
pub struct Hermitized {
    pub op: HermitianOperator,
    pub max_asymmetry: f64,
}

impl Hermitized {
    /// True when the input was visibly non-Hermitian (asymmetry above
    /// [`ADVISORY_ASYMMETRY`]).
    pub fn flagged(&self) -> bool {
        self.max_asymmetry > ADVISORY_ASYMMETRY
    }
}

/// Hermitian part `(x + x^dagger)/2` of a square matrix.
pub fn hermitize(x: &CMatrix) -> Result<Hermitized> {
    check_square(x)?;
    Ok(Hermitized {
        op: HermitianOperator { mat: symmetrize(x) },
        max_asymmetry: max_asymmetry(x),
    })
}

/// Kronecker product `a (x) b`, subsystem A index major.
pub fn tensor(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

/// Dimensions of a bipartite system `H_A (x) H_B`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BipartiteDims {
    pub dim_a: usize,
    pub dim_b: usize,
}

impl BipartiteDims {
    pub fn new(dim_a: usize, dim_b: usize) -> Result<Self> {
        if dim_a == 0 || dim_b == 0 {
            return Err(Error::InvalidInput(format!(
                "subsystem dimensions must be positive, got {dim_a}x{dim_b}"
            )));
        }
        Ok(Self { dim_a, dim_b })
    }

    pub fn total(&self) -> usize {
        self.dim_a * self.dim_b
    }

    pub fn dim_of(&self, which: Subsystem) -> usize {
        match which {
            Subsystem::A => self.dim_a,
            Subsystem::B => self.dim_b,
        }
    }

    pub fn check(&self, dim: usize) -> Result<()> {
        if dim != self.total() {
            return Err(Error::DimensionMismatch {
                expected: self.total(),
                found: dim,
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Subsystem {
    A,
    B,
}

/// Partial trace keeping `keep` and tracing out the other factor.
pub fn partial_trace(x: &CMatrix, dims: BipartiteDims, keep: Subsystem) -> Result<CMatrix> {
    let n = check_square(x)?;
    dims.check(n)?;
    let (da, db) = (dims.dim_a, dims.dim_b);
    let out = match keep {
        Subsystem::A => CMatrix::from_fn(da, da, |i, j| {
            (0..db).map(|k| x[(i * db + k, j * db + k)]).sum()
        }),
        Subsystem::B => CMatrix::from_fn(db, db, |i, j| {
            (0..da).map(|k| x[(k * db + i, k * db + j)]).sum()
        }),
    };
    Ok(out)
}

fn singular_values(x: &CMatrix) -> Result<Vec<f64>> {
    if x.is_empty() {
        return Ok(Vec::new());
    }
    let dim = x.nrows().max(x.ncols());
    let svd = SVD::try_new(x.clone(), false, false, f64::EPSILON, EIGEN_MAX_ITER)
        .ok_or(Error::SvdNonConvergence { dim })?;
    Ok(svd.singular_values.iter().copied().collect())
}

/// Schatten 1-norm: sum of singular values.
pub fn trace_norm(x: &CMatrix) -> Result<f64> {
    Ok(singular_values(x)?.into_iter().sum())
}

/// Largest singular value.
pub fn operator_norm(x: &CMatrix) -> Result<f64> {
    Ok(singular_values(x)?.into_iter().fold(0.0, f64::max))
}

/// Real scalar functions applied through the spectrum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RealFunction {
    Log,
    Exp,
    /// `x^p`; negative `p` needs a positive definite argument, fractional
    /// `p` a positive semidefinite one.
    Pow(f64),
}

impl RealFunction {
    fn name(&self) -> &'static str {
        match self {
            RealFunction::Log => "log",
            RealFunction::Exp => "exp",
            RealFunction::Pow(_) => "pow",
        }
    }

    fn eval(&self, lambda: f64) -> Result<f64> {
        let domain = || Error::Domain {
            function: self.name(),
            eigenvalue: lambda,
        };
        match *self {
            RealFunction::Exp => Ok(lambda.exp()),
            RealFunction::Log => {
                if lambda > 0.0 {
                    Ok(lambda.ln())
                } else {
                    Err(domain())
                }
            }
            RealFunction::Pow(p) => {
                if p.fract() == 0.0 && p >= 0.0 {
                    Ok(lambda.powi(p as i32))
                } else if p < 0.0 {
                    if lambda > 0.0 {
                        Ok(lambda.powf(p))
                    } else {
                        Err(domain())
                    }
                } else if lambda >= -PSD_FLOOR {
                    Ok(lambda.max(0.0).powf(p))
                } else {
                    Err(domain())
                }
            }
        }
    }
}

/// Eigenvalues (ascending) and orthonormal eigenvectors (columns) of a
/// Hermitian operator.
#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: CMatrix,
}

impl SpectralDecomposition {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues[0]
    }

    pub fn max_eigenvalue(&self) -> f64 {
        self.eigenvalues[self.eigenvalues.len() - 1]
    }

    /// `U diag(values) U^dagger`.
    pub fn reconstruct_from_values(&self, values: &[C64]) -> CMatrix {
        let u = &self.eigenvectors;
        let mut scaled = u.clone();
        for (k, &w) in values.iter().enumerate() {
            for z in scaled.column_mut(k).iter_mut() {
                *z *= w;
            }
        }
        &scaled * u.adjoint()
    }

    /// `U diag(f(lambda)) U^dagger` for a complex-valued spectral map.
    pub fn reconstruct_complex(&self, f: impl Fn(f64) -> C64) -> CMatrix {
        let values: Vec<C64> = self.eigenvalues.iter().map(|&l| f(l)).collect();
        self.reconstruct_from_values(&values)
    }

    /// `U diag(f(lambda)) U^dagger` for a real spectral map.
    pub fn reconstruct(&self, f: impl Fn(f64) -> f64) -> HermitianOperator {
        HermitianOperator::from_hermitian_part(&self.reconstruct_complex(|l| real(f(l))))
    }

    /// Same as [`reconstruct`](Self::reconstruct) for a fallible map.
    pub fn try_reconstruct(&self, f: impl Fn(f64) -> Result<f64>) -> Result<HermitianOperator> {
        let values = self
            .eigenvalues
            .iter()
            .map(|&l| f(l).map(real))
            .collect::<Result<Vec<_>>>()?;
        Ok(HermitianOperator::from_hermitian_part(
            &self.reconstruct_from_values(&values),
        ))
    }

    /// `h^z` for complex `z`; requires a positive definite spectrum.
    pub fn complex_power(&self, z: C64) -> Result<CMatrix> {
        if let Some(&bad) = self.eigenvalues.iter().find(|&&l| l <= 0.0) {
            return Err(Error::Domain {
                function: "complex power",
                eigenvalue: bad,
            });
        }
        Ok(self.reconstruct_complex(|l| (z * l.ln()).exp()))
    }
}

/// Hermitian eigendecomposition with ascending eigenvalues.
pub fn eig_hermitian(h: &HermitianOperator) -> Result<SpectralDecomposition> {
    let dim = h.dim();
    let eig = SymmetricEigen::try_new(h.mat.clone(), f64::EPSILON, EIGEN_MAX_ITER)
        .ok_or(Error::EigenNonConvergence { dim })?;
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let eigenvalues = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let eigenvectors = CMatrix::from_fn(dim, dim, |r, k| eig.eigenvectors[(r, order[k])]);
    Ok(SpectralDecomposition {
        eigenvalues,
        eigenvectors,
    })
}

/// `f(h)` through the spectral decomposition.
pub fn matrix_function(h: &HermitianOperator, f: RealFunction) -> Result<HermitianOperator> {
    eig_hermitian(h)?.try_reconstruct(|l| f.eval(l))
}

/// `h^{it}`; unitary for positive definite `h`.
pub fn imaginary_power(h: &HermitianOperator, t: f64) -> Result<CMatrix> {
    eig_hermitian(h)?.complex_power(c(0.0, t))
}

/// A dense Hermitian matrix. Construction enforces exact conjugate symmetry.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianOperator {
    mat: CMatrix,
}

impl HermitianOperator {
    /// Accepts `m` if it is Hermitian within [`HERMITIAN_TOL`] per entry and
    /// removes the residual asymmetry.
    pub fn new(m: CMatrix) -> Result<Self> {
        let n = check_square(&m)?;
        for i in 0..n {
            for j in i..n {
                let deviation = (m[(i, j)] - m[(j, i)].conj()).norm();
                if deviation > HERMITIAN_TOL {
                    return Err(Error::NotHermitian {
                        row: i,
                        col: j,
                        deviation,
                    });
                }
            }
        }
        Ok(Self {
            mat: symmetrize(&m),
        })
    }

    /// Hermitian part of an arbitrary square matrix; panics on non-square
    /// input, so only for internally produced matrices.
    pub(crate) fn from_hermitian_part(m: &CMatrix) -> Self {
        debug_assert_eq!(m.nrows(), m.ncols());
        Self { mat: symmetrize(m) }
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Result<Self> {
        if diag.is_empty() {
            return Err(Error::EmptyMatrix);
        }
        let n = diag.len();
        Ok(Self {
            mat: CMatrix::from_fn(n, n, |i, j| if i == j { real(diag[i]) } else { C64::default() }),
        })
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            mat: identity(dim),
        }
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            mat: CMatrix::zeros(dim, dim),
        }
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.mat
    }

    pub fn into_matrix(self) -> CMatrix {
        self.mat
    }

    pub fn trace(&self) -> f64 {
        trace(&self.mat).re
    }

    pub fn eig(&self) -> Result<SpectralDecomposition> {
        eig_hermitian(self)
    }

    pub fn apply(&self, f: RealFunction) -> Result<HermitianOperator> {
        matrix_function(self, f)
    }

    pub fn scale(&self, alpha: f64) -> HermitianOperator {
        Self {
            mat: &self.mat * real(alpha),
        }
    }

    pub fn add(&self, other: &HermitianOperator) -> Result<HermitianOperator> {
        self.check_same_dim(other)?;
        Ok(Self {
            mat: &self.mat + &other.mat,
        })
    }

    pub fn sub(&self, other: &HermitianOperator) -> Result<HermitianOperator> {
        self.check_same_dim(other)?;
        Ok(Self {
            mat: &self.mat - &other.mat,
        })
    }

    /// Re-symmetrized product-and-conjugation `a^dagger self a`.
    pub fn congruence(&self, a: &CMatrix) -> Result<HermitianOperator> {
        if a.nrows() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: a.nrows(),
            });
        }
        Ok(Self::from_hermitian_part(&(a.adjoint() * &self.mat * a)))
    }

    pub fn tensor(&self, other: &HermitianOperator) -> HermitianOperator {
        Self {
            mat: tensor(&self.mat, &other.mat),
        }
    }

    pub fn partial_trace(&self, dims: BipartiteDims, keep: Subsystem) -> Result<HermitianOperator> {
        Ok(Self::from_hermitian_part(&partial_trace(&self.mat, dims, keep)?))
    }

    /// Real part of `tr[self * other]`; exact for Hermitian pairs up to
    /// rounding.
    pub fn trace_product(&self, other: &CMatrix) -> C64 {
        let n = self.dim();
        let mut acc = C64::default();
        for i in 0..n {
            for k in 0..n {
                acc += self.mat[(i, k)] * other[(k, i)];
            }
        }
        acc
    }

    pub fn trace_norm(&self) -> Result<f64> {
        Ok(self.eig()?.eigenvalues.iter().map(|l| l.abs()).sum())
    }

    pub fn operator_norm(&self) -> Result<f64> {
        let eig = self.eig()?;
        Ok(eig.min_eigenvalue().abs().max(eig.max_eigenvalue().abs()))
    }

    fn check_same_dim(&self, other: &HermitianOperator) -> Result<()> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        Ok(())
    }
}

/// A positive semidefinite Hermitian operator with unit trace.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityOperator {
    op: HermitianOperator,
}

impl DensityOperator {
    /// Validates trace and positivity. Eigenvalues in `[-PSD_FLOOR, 0)` are
    /// clamped to zero; anything more negative is rejected.
    pub fn new(op: HermitianOperator) -> Result<Self> {
        let tr = trace(&op.mat);
        if (tr.re - 1.0).abs() > TRACE_TOL || tr.im.abs() > TRACE_IM_TOL {
            return Err(Error::InvalidTrace { re: tr.re, im: tr.im });
        }
        let eig = op.eig()?;
        let min = eig.min_eigenvalue();
        if min < -PSD_FLOOR {
            return Err(Error::NotPositive { min_eigenvalue: min });
        }
        if min < 0.0 {
            return Ok(Self {
                op: eig.reconstruct(|l| l.max(0.0)),
            });
        }
        Ok(Self { op })
    }

    pub fn from_matrix(m: CMatrix) -> Result<Self> {
        Self::new(HermitianOperator::new(m)?)
    }

    /// Diagonal state from a probability vector.
    pub fn from_probabilities(p: &[f64]) -> Result<Self> {
        Self::new(HermitianOperator::from_real_diagonal(p)?)
    }

    /// The maximally mixed state `I/d`.
    pub fn maximally_mixed(dim: usize) -> Self {
        Self {
            op: HermitianOperator::identity(dim).scale(1.0 / dim as f64),
        }
    }

    /// `|psi><psi|` for a (not necessarily normalized) nonzero vector.
    pub fn pure(psi: &[C64]) -> Result<Self> {
        let norm_sqr: f64 = psi.iter().map(|z| z.norm_sqr()).sum();
        if psi.is_empty() || norm_sqr <= 0.0 {
            return Err(Error::InvalidInput("pure state vector must be nonzero".into()));
        }
        let n = psi.len();
        let m = CMatrix::from_fn(n, n, |i, j| psi[i] * psi[j].conj() / norm_sqr);
        Self::new(HermitianOperator::from_hermitian_part(&m))
    }

    pub fn dim(&self) -> usize {
        self.op.dim()
    }

    pub fn op(&self) -> &HermitianOperator {
        &self.op
    }

    pub fn matrix(&self) -> &CMatrix {
        self.op.matrix()
    }

    pub fn into_op(self) -> HermitianOperator {
        self.op
    }

    pub fn eig(&self) -> Result<SpectralDecomposition> {
        self.op.eig()
    }

    /// Reduced state on `keep`.
    pub fn marginal(&self, dims: BipartiteDims, keep: Subsystem) -> Result<DensityOperator> {
        Ok(Self {
            op: self.op.partial_trace(dims, keep)?,
        })
    }

    /// `(rho_A, rho_B)`.
    pub fn marginals(&self, dims: BipartiteDims) -> Result<(DensityOperator, DensityOperator)> {
        Ok((
            self.marginal(dims, Subsystem::A)?,
            self.marginal(dims, Subsystem::B)?,
        ))
    }

    pub fn tensor(&self, other: &DensityOperator) -> DensityOperator {
        Self {
            op: self.op.tensor(&other.op),
        }
    }

    /// Convex combination `(1 - weight) self + weight other`.
    pub fn mix(&self, other: &DensityOperator, weight: f64) -> Result<DensityOperator> {
        if !(0.0..=1.0).contains(&weight) {
            return Err(Error::InvalidInput(format!(
                "mixing weight {weight} outside [0, 1]"
            )));
        }
        let combined = self.op.scale(1.0 - weight).add(&other.op.scale(weight))?;
        Ok(Self { op: combined })
    }

    /// True when the least eigenvalue exceeds `RANK_TOL * lambda_max`.
    pub fn is_full_rank(&self) -> Result<bool> {
        let eig = self.eig()?;
        Ok(eig.min_eigenvalue() > RANK_TOL * eig.max_eigenvalue())
    }
}
