//! The Lieb superoperator and the correction operators built from it.
//!
//! For positive definite `g` the superoperator
//!
//! ```text
//! T_g(f) = int_0^inf (g + t)^-1 f (g + t)^-1 dt
//! ```
//!
//! is the Fréchet derivative of `log` at `g`. It is evaluated two ways:
//! [`tg_kernel`] uses the closed form in the eigenbasis of `g` (first divided
//! difference of `log`), [`tg_quadrature`] integrates the rotated-power
//! representation against the density [`beta0`]. The two share nothing
//! beyond the input operators, so each serves as the other's oracle.

mod channel;
mod gauss;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{
    c, BipartiteDims, CMatrix, DensityOperator, HermitianOperator, RealFunction,
    SpectralDecomposition, RANK_TOL,
};

pub use channel::{
    apply_channel, channel_dual, modular_average_channel, pinching_channel, ChannelRep, LinearMap,
    KRAUS_TOL, MODULAR_TP_TOL,
};
pub use gauss::gauss_legendre;

/// `beta_0(t) = pi/2 (cosh(pi t) + 1)^-1`, a probability density on the line.
pub fn beta0(t: f64) -> f64 {
    std::f64::consts::FRAC_PI_2 / ((std::f64::consts::PI * t).cosh() + 1.0)
}

/// Composite Gauss–Legendre rule on `[-T, T]` with equal-width panels.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    #[serde(rename = "T")]
    pub truncation: f64,
    /// Total number of panels across `[-T, T]`.
    pub panels: usize,
    #[serde(rename = "nodes")]
    pub nodes_per_panel: usize,
}

impl Default for QuadratureSpec {
    /// `T = 30` with 60 unit-width panels and 16 nodes each. The discarded
    /// tail of `beta_0` is `2 / (e^{30 pi} + 1)`, about `1.6e-41`.
    fn default() -> Self {
        Self {
            truncation: 30.0,
            panels: 60,
            nodes_per_panel: 16,
        }
    }
}

impl QuadratureSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.truncation.is_finite() && self.truncation > 0.0) {
            return Err(Error::InvalidInput(format!(
                "quadrature truncation must be positive, got {}",
                self.truncation
            )));
        }
        if self.panels == 0 || self.nodes_per_panel == 0 {
            return Err(Error::InvalidInput(
                "quadrature needs at least one panel and one node per panel".into(),
            ));
        }
        Ok(())
    }

    /// `2 int_T^inf beta_0 = 2 / (e^{pi T} + 1)`.
    pub fn tail_mass(&self) -> f64 {
        2.0 / ((std::f64::consts::PI * self.truncation).exp() + 1.0)
    }

    /// Absolute nodes and weights of the composite rule, ascending in `t`.
    pub fn nodes(&self) -> Result<Vec<(f64, f64)>> {
        self.validate()?;
        let rule = gauss_legendre(self.nodes_per_panel);
        let width = 2.0 * self.truncation / self.panels as f64;
        let half = 0.5 * width;
        let mut out = Vec::with_capacity(self.panels * rule.len());
        for k in 0..self.panels {
            let mid = -self.truncation + (k as f64 + 0.5) * width;
            out.extend(rule.iter().map(|&(x, w)| (mid + half * x, half * w)));
        }
        Ok(out)
    }

    /// `int beta_0` over `[-T, T]` under this rule.
    pub fn integrate_beta0(&self) -> Result<f64> {
        Ok(self.nodes()?.iter().map(|&(t, w)| w * beta0(t)).sum())
    }
}

/// Eigendecomposition of `g` after checking it is positive definite.
pub(crate) fn require_positive_definite(
    g: &HermitianOperator,
    name: &str,
) -> Result<SpectralDecomposition> {
    let eig = g.eig()?;
    let min = eig.min_eigenvalue();
    if !(min > 0.0 && min > RANK_TOL * eig.max_eigenvalue()) {
        return Err(Error::Singular {
            name: name.to_string(),
            min_eigenvalue: min,
        });
    }
    Ok(eig)
}

fn check_dim(expected: usize, m: &CMatrix) -> Result<()> {
    if m.nrows() != expected || m.ncols() != expected {
        return Err(Error::DimensionMismatch {
            expected,
            found: m.nrows().max(m.ncols()),
        });
    }
    Ok(())
}

/// `int_0^inf (lambda + t)^-1 (mu + t)^-1 dt = (log lambda - log mu) / (lambda - mu)`.
///
/// Switches to the midpoint form `2 / (lambda + mu)` when the eigenvalues are
/// within `1e-12 * max(lambda_max, 1)` of each other; otherwise uses `ln_1p`
/// of the relative gap so nearby eigenvalues keep full precision.
pub fn log_divided_difference(lambda: f64, mu: f64, lambda_max: f64) -> f64 {
    let gap = lambda - mu;
    if gap.abs() <= 1e-12 * lambda_max.max(1.0) {
        return 2.0 / (lambda + mu);
    }
    let (hi, lo) = if lambda > mu { (lambda, mu) } else { (mu, lambda) };
    ((hi - lo) / lo).ln_1p() / (hi - lo)
}

/// `T_g(f)` in closed form: in the eigenbasis of `g`, entry `(i, j)` of `f` is
/// multiplied by [`log_divided_difference`] of the eigenvalues.
pub fn tg_kernel(g: &HermitianOperator, f: &CMatrix) -> Result<CMatrix> {
    check_dim(g.dim(), f)?;
    let eig = require_positive_definite(g, "g")?;
    Ok(tg_kernel_with(&eig, f))
}

pub(crate) fn tg_kernel_with(eig: &SpectralDecomposition, f: &CMatrix) -> CMatrix {
    let u = &eig.eigenvectors;
    let lambda_max = eig.max_eigenvalue();
    let mut rotated = u.adjoint() * f * u;
    let n = eig.dim();
    for j in 0..n {
        for i in 0..n {
            rotated[(i, j)] *=
                log_divided_difference(eig.eigenvalues[i], eig.eigenvalues[j], lambda_max);
        }
    }
    u * rotated * u.adjoint()
}

/// `T_g(f)` for Hermitian `f`, re-symmetrized.
pub fn tg_kernel_hermitian(g: &HermitianOperator, f: &HermitianOperator) -> Result<HermitianOperator> {
    let out = tg_kernel(g, f.matrix())?;
    Ok(HermitianOperator::from_hermitian_part(&out))
}

/// `T_g(f) = int beta_0(t) g^{(-1-it)/2} f g^{(-1+it)/2} dt` by composite
/// quadrature.
pub fn tg_quadrature(g: &HermitianOperator, f: &CMatrix, q: &QuadratureSpec) -> Result<CMatrix> {
    check_dim(g.dim(), f)?;
    let eig = require_positive_definite(g, "g")?;
    let nodes = q.nodes()?;
    let n = g.dim();
    let mut acc = CMatrix::zeros(n, n);
    for (t, w) in nodes {
        let weight = w * beta0(t);
        if weight == 0.0 {
            continue;
        }
        let left = eig.complex_power(c(-0.5, -0.5 * t))?;
        let right = eig.complex_power(c(-0.5, 0.5 * t))?;
        acc += (left * f * right) * c(weight, 0.0);
    }
    Ok(acc)
}

/// `tr[e^h T_{e^f}(e^g)]`, the upper side of Lieb's three-operator
/// inequality `tr[exp(-f + g + h)] <= tr[e^h T_{e^f}(e^g)]`.
pub fn lieb_rhs(f: &HermitianOperator, g: &HermitianOperator, h: &HermitianOperator) -> Result<f64> {
    let n = f.dim();
    for other in [g, h] {
        if other.dim() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: other.dim(),
            });
        }
    }
    let ef = f.apply(RealFunction::Exp)?;
    let eg = g.apply(RealFunction::Exp)?;
    let eh = h.apply(RealFunction::Exp)?;
    let inner = tg_kernel(&ef, eg.matrix())?;
    let value = eh.trace_product(&inner);
    let tol = 1e-10 * value.re.abs().max(1.0);
    if value.im.abs() > tol {
        return Err(Error::ImaginaryResidue {
            quantity: "lieb_rhs",
            residue: value.im,
        });
    }
    Ok(value.re)
}

/// `log rho` after a positive-definiteness check naming the operator.
fn checked_log(op: &HermitianOperator, name: &str) -> Result<HermitianOperator> {
    let eig = require_positive_definite(op, name)?;
    Ok(eig.reconstruct(f64::ln))
}

/// `M = exp[log sigma_AB - log sigma_A (x) sigma_B + log rho_A (x) rho_B]`.
///
/// All of `sigma_AB`, `sigma_A (x) sigma_B`, `rho_A` and `rho_B` must be
/// positive definite.
pub fn step1_m(
    rho_ab: &DensityOperator,
    sigma_ab: &DensityOperator,
    dims: BipartiteDims,
) -> Result<HermitianOperator> {
    dims.check(rho_ab.dim())?;
    dims.check(sigma_ab.dim())?;
    let (rho_a, rho_b) = rho_ab.marginals(dims)?;
    let (sigma_a, sigma_b) = sigma_ab.marginals(dims)?;
    require_positive_definite(rho_a.op(), "rho_A")?;
    require_positive_definite(rho_b.op(), "rho_B")?;

    let log_sigma = checked_log(sigma_ab.op(), "sigma_AB")?;
    let log_sigma_prod = checked_log(sigma_a.tensor(&sigma_b).op(), "sigma_A (x) sigma_B")?;
    let log_rho_prod = checked_log(rho_a.tensor(&rho_b).op(), "rho_A (x) rho_B")?;
    let exponent = log_sigma.sub(&log_sigma_prod)?.add(&log_rho_prod)?;
    exponent.apply(RealFunction::Exp)
}

/// Eigendecomposition of `a (x) b` assembled from those of the factors.
///
/// Diagonalizing the product directly loses about `eps * cond(a) * cond(b)`
/// in the eigenvectors of its small eigenvalues; the factor-wise basis keeps
/// the error near `eps * max(cond(a), cond(b))`.
fn product_eigen(a: &DensityOperator, b: &DensityOperator) -> Result<SpectralDecomposition> {
    let ea = a.eig()?;
    let eb = b.eig()?;
    let mut pairs: Vec<(f64, usize, usize)> = Vec::with_capacity(ea.dim() * eb.dim());
    for (i, &la) in ea.eigenvalues.iter().enumerate() {
        for (j, &lb) in eb.eigenvalues.iter().enumerate() {
            pairs.push((la * lb, i, j));
        }
    }
    pairs.sort_by(|x, y| x.0.total_cmp(&y.0));
    let n = pairs.len();
    let mut vectors = CMatrix::zeros(n, n);
    for (col, &(_, i, j)) in pairs.iter().enumerate() {
        let v = ea.eigenvectors.column(i).kronecker(&eb.eigenvectors.column(j));
        vectors.set_column(col, &v);
    }
    let eig = SpectralDecomposition {
        eigenvalues: pairs.iter().map(|p| p.0).collect(),
        eigenvectors: vectors,
    };
    let (min, max) = (eig.min_eigenvalue(), eig.max_eigenvalue());
    if !(min > 0.0 && min > RANK_TOL * max) {
        return Err(Error::Singular {
            name: "sigma_A (x) sigma_B".into(),
            min_eigenvalue: min,
        });
    }
    Ok(eig)
}

/// `L(sigma_AB) = T_{sigma_A (x) sigma_B}(sigma_AB) - 1`.
pub fn l_operator(sigma_ab: &DensityOperator, dims: BipartiteDims) -> Result<HermitianOperator> {
    dims.check(sigma_ab.dim())?;
    let (sigma_a, sigma_b) = sigma_ab.marginals(dims)?;
    let eig = product_eigen(&sigma_a, &sigma_b)?;
    let t = tg_kernel_with(&eig, sigma_ab.matrix());
    let t = HermitianOperator::from_hermitian_part(&t);
    t.sub(&HermitianOperator::identity(dims.total()))
}

/// `sigma_A^{-1/2} (x) sigma_B^{-1/2}`.
pub fn marginal_inverse_sqrt(
    sigma_ab: &DensityOperator,
    dims: BipartiteDims,
) -> Result<HermitianOperator> {
    dims.check(sigma_ab.dim())?;
    let (sigma_a, sigma_b) = sigma_ab.marginals(dims)?;
    let a = require_positive_definite(sigma_a.op(), "sigma_A")?.reconstruct(|l| l.powf(-0.5));
    let b = require_positive_definite(sigma_b.op(), "sigma_B")?.reconstruct(|l| l.powf(-0.5));
    Ok(a.tensor(&b))
}

/// `H(sigma_AB) = (sigma_A (x) sigma_B)^{-1/2} sigma_AB (sigma_A (x) sigma_B)^{-1/2} - 1`.
///
/// Only the marginals need to be positive definite; `sigma_AB` itself may be
/// rank deficient.
pub fn h_operator(sigma_ab: &DensityOperator, dims: BipartiteDims) -> Result<HermitianOperator> {
    let s = marginal_inverse_sqrt(sigma_ab, dims)?;
    let conj = sigma_ab.op().congruence(s.matrix())?;
    conj.sub(&HermitianOperator::identity(dims.total()))
}

/// `1 + 2 ||H(sigma_AB)||_inf`.
pub fn alpha(sigma_ab: &DensityOperator, dims: BipartiteDims) -> Result<f64> {
    Ok(1.0 + 2.0 * h_operator(sigma_ab, dims)?.operator_norm()?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{frobenius, real, tensor, C64};
    use std::f64::consts::FRAC_PI_4;

    fn diag(p: &[f64]) -> HermitianOperator {
        HermitianOperator::from_real_diagonal(p).unwrap()
    }

    fn state(p: &[f64]) -> DensityOperator {
        DensityOperator::from_probabilities(p).unwrap()
    }

    #[test]
    fn beta0_examples() {
        assert_eq!(beta0(0.0), FRAC_PI_4);
        for t in [0.1, 0.7, 2.5, 11.0] {
            assert_eq!(beta0(t), beta0(-t));
        }
        let q = QuadratureSpec::default();
        assert!((q.integrate_beta0().unwrap() - 1.0).abs() < 1e-10);
        assert!((-std::f64::consts::PI * q.truncation).exp() <= 1e-12);
    }

    #[test]
    fn quadrature_spec_json() {
        let q = QuadratureSpec::default();
        let s = serde_json::to_string(&q).unwrap();
        assert_eq!(s, r#"{"T":30.0,"panels":60,"nodes":16}"#);
        assert_eq!(serde_json::from_str::<QuadratureSpec>(&s).unwrap(), q);
        let bad = QuadratureSpec {
            panels: 0,
            ..q
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn divided_difference_limits() {
        assert_eq!(log_divided_difference(2.0, 2.0, 2.0), 0.5);
        let k = log_divided_difference(2.0, 1.0, 2.0);
        assert!((k - std::f64::consts::LN_2).abs() < 1e-15);
        // near-degenerate pair keeps relative accuracy
        let (l, m) = (1.0 + 1e-9, 1.0);
        let k = log_divided_difference(l, m, 1.0);
        let exact = 1.0 - 0.5e-9;
        assert!(((k - exact) / exact).abs() < 1e-15);
    }

    #[test]
    fn tg_identity_and_commuting() {
        let f = tensor(&diag(&[1.0, -2.0]).into_matrix(), &crate::linalg::identity(1));
        let out = tg_kernel(&HermitianOperator::identity(2), &f).unwrap();
        assert!(frobenius(&(out - &f)) < 1e-15);

        let g = diag(&[0.2, 0.5, 0.3]);
        let f = diag(&[1.0, 4.0, -1.0]);
        let out = tg_kernel(&g, f.matrix()).unwrap();
        let expect = diag(&[5.0, 8.0, -1.0 / 0.3]);
        assert!(frobenius(&(out - expect.matrix())) < 1e-13);

        let q = QuadratureSpec::default();
        let out = tg_quadrature(&g, f.matrix(), &q).unwrap();
        assert!(frobenius(&(out - expect.matrix())) < 1e-8);
    }

    #[test]
    fn tg_rejects_singular() {
        let g = diag(&[1.0, 0.0]);
        let f = crate::linalg::identity(2);
        assert!(matches!(tg_kernel(&g, &f), Err(Error::Singular { .. })));
        assert!(matches!(
            tg_quadrature(&g, &f, &QuadratureSpec::default()),
            Err(Error::Singular { .. })
        ));
        assert!(matches!(
            tg_kernel(&diag(&[1.0, 2.0]), &crate::linalg::identity(3)),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn lieb_rhs_trivial() {
        for d in 1..=4 {
            let z = HermitianOperator::zeros(d);
            assert!((lieb_rhs(&z, &z, &z).unwrap() - d as f64).abs() < 1e-13);
        }
        let f = diag(&[0.3, -0.2]);
        let g = diag(&[1.1, 0.4]);
        let h = diag(&[-0.5, 0.9]);
        let lhs: f64 = [0.3f64, -0.2]
            .iter()
            .zip([1.1, 0.4])
            .zip([-0.5, 0.9])
            .map(|((f, g), h)| (-f + g + h).exp())
            .sum();
        assert!((lieb_rhs(&f, &g, &h).unwrap() - lhs).abs() < 1e-13);
    }

    #[test]
    fn step1_special_cases() {
        let dims = BipartiteDims::new(2, 2).unwrap();
        let rho = state(&[0.1, 0.2, 0.3, 0.4]);
        let m = step1_m(&rho, &rho, dims).unwrap();
        assert!(frobenius(&(m.matrix() - rho.matrix())) < 1e-14);
        assert!((m.trace() - 1.0).abs() < 1e-14);

        let sigma = state(&[0.3, 0.7]).tensor(&state(&[0.6, 0.4]));
        let m = step1_m(&rho, &sigma, dims).unwrap();
        let (ra, rb) = rho.marginals(dims).unwrap();
        assert!(frobenius(&(m.matrix() - ra.tensor(&rb).matrix())) < 1e-14);
        assert!(m.trace().ln().abs() < 1e-14);
    }

    #[test]
    fn step1_names_singular_operator() {
        let dims = BipartiteDims::new(2, 2).unwrap();
        let rho = state(&[0.1, 0.2, 0.3, 0.4]);
        let sigma = state(&[0.5, 0.0, 0.0, 0.5]);
        match step1_m(&rho, &sigma, dims) {
            Err(Error::Singular { name, .. }) => assert_eq!(name, "sigma_AB"),
            other => panic!("unexpected {other:?}"),
        }
        let rho_pure_a = state(&[0.6, 0.4, 0.0, 0.0]);
        match step1_m(&rho_pure_a, &rho, dims) {
            Err(Error::Singular { name, .. }) => assert_eq!(name, "rho_A"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn product_sigma_has_vanishing_corrections() {
        let dims = BipartiteDims::new(2, 3).unwrap();
        let sigma = state(&[0.3, 0.7]).tensor(&state(&[0.2, 0.5, 0.3]));
        assert!(l_operator(&sigma, dims).unwrap().operator_norm().unwrap() < 1e-10);
        assert!(h_operator(&sigma, dims).unwrap().operator_norm().unwrap() < 1e-10);
        let mixed = DensityOperator::maximally_mixed(6);
        assert!(l_operator(&mixed, dims).unwrap().operator_norm().unwrap() < 1e-12);
        assert!((alpha(&mixed, dims).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn bell_h_operator() {
        let dims = BipartiteDims::new(2, 2).unwrap();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let psi = [real(s), C64::default(), C64::default(), real(s)];
        let bell = DensityOperator::pure(&psi).unwrap();
        let h = h_operator(&bell, dims).unwrap();
        let expect = bell.op().scale(4.0).sub(&HermitianOperator::identity(4)).unwrap();
        assert!(frobenius(&(h.matrix() - expect.matrix())) < 1e-14);
        assert!((h.operator_norm().unwrap() - 3.0).abs() < 1e-13);
        assert!((alpha(&bell, dims).unwrap() - 7.0).abs() < 1e-12);
    }
}
