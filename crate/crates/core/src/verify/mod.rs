//! Checkers for the quasi-factorization bound
//!
//! ```text
//! (1 + 2 ||H(sigma_AB)||_inf) Ent(rho_AB || sigma_AB) >= Ent(rho_A || sigma_A) + Ent(rho_B || sigma_B)
//! ```
//!
//! and for each link of the four-step argument behind it:
//!
//! 1. `Ent(rho_AB || sigma_AB) >= Ent(rho_A || sigma_A) + Ent(rho_B || sigma_B) - log tr M`
//! 2. `log tr M <= tr[L(sigma_AB) (rho_A - sigma_A) (x) (rho_B - sigma_B)]`
//! 3. that pairing is at most `2 ||L(sigma_AB)||_inf Ent(rho_AB || sigma_AB)`
//! 4. `||L(sigma_AB)||_inf <= ||H(sigma_AB)||_inf`
//!
//! Each checker evaluates its two sides from the input states separately so
//! an error on one side cannot cancel against the other.

mod report;

use serde::{Deserialize, Serialize};

pub use report::{InequalityReport, Relation, Status};

use crate::entropy::{
    entropy_lower_bound, mutual_information, relative_entropy, relative_entropy_positive,
    scaled_entropy_shift, ExtendedReal,
};
use crate::error::{Error, Result};
use crate::linalg::{tensor, trace_norm, BipartiteDims, DensityOperator, HermitianOperator};
use crate::statesgen::smooth;
use crate::superops::{
    h_operator, l_operator, lieb_rhs, marginal_inverse_sqrt, require_positive_definite, step1_m,
    tg_kernel,
};
use crate::linalg::RealFunction;

/// Weight of `I/d` used when rank-deficient inputs are smoothed on request.
pub const SMOOTHING_EPSILON: f64 = 1e-6;

/// Tolerances for the individual checks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Each inequality of the proof chain and the theorem itself.
    pub inequality: f64,
    /// The composed chain (four accumulated links).
    pub composite: f64,
    /// Sign checks on entropies.
    pub nonnegativity: f64,
    /// `Ent(af || bg) - Ent(f || g) = log(a/b)`.
    pub homogeneity: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            inequality: 1e-9,
            composite: 4e-9,
            nonnegativity: 1e-10,
            homogeneity: 1e-10,
        }
    }
}

impl Tolerances {
    pub const NAMES: [&'static str; 4] = ["inequality", "composite", "nonnegativity", "homogeneity"];

    pub fn validate(&self) -> Result<()> {
        for (name, v) in Self::NAMES.iter().zip(self.values()) {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::InvalidInput(format!(
                    "tolerance {name} must be finite and nonnegative, got {v}"
                )));
            }
        }
        Ok(())
    }

    fn values(&self) -> [f64; 4] {
        [self.inequality, self.composite, self.nonnegativity, self.homogeneity]
    }

    /// Sets a tolerance by name.
    pub fn set(&mut self, name: &str, value: f64) -> Result<()> {
        let slot = match name {
            "inequality" => &mut self.inequality,
            "composite" => &mut self.composite,
            "nonnegativity" => &mut self.nonnegativity,
            "homogeneity" => &mut self.homogeneity,
            other => {
                return Err(Error::InvalidInput(format!(
                    "unknown tolerance {other:?} (expected one of {:?})",
                    Self::NAMES
                )))
            }
        };
        *slot = value;
        self.validate()
    }
}

/// States after optional smoothing, ready for the full-rank pipeline.
#[derive(Debug, Clone)]
pub struct PreparedPair {
    pub rho: DensityOperator,
    pub sigma: DensityOperator,
    pub rho_smoothing: Option<f64>,
    pub sigma_smoothing: Option<f64>,
}

/// Checks the rank hypotheses of the pipeline (`sigma_AB`, `rho_A`, `rho_B`
/// positive definite). A violating input is mixed with
/// [`SMOOTHING_EPSILON`] of `I/d` when `allow_smoothing` is set and rejected
/// otherwise.
pub fn prepare_pair(
    rho: &DensityOperator,
    sigma: &DensityOperator,
    dims: BipartiteDims,
    allow_smoothing: bool,
) -> Result<PreparedPair> {
    dims.check(rho.dim())?;
    dims.check(sigma.dim())?;
    let mut out = PreparedPair {
        rho: rho.clone(),
        sigma: sigma.clone(),
        rho_smoothing: None,
        sigma_smoothing: None,
    };
    if let Err(e) = require_positive_definite(sigma.op(), "sigma_AB") {
        if !allow_smoothing {
            return Err(e);
        }
        out.sigma = smooth(sigma, SMOOTHING_EPSILON)?;
        out.sigma_smoothing = Some(SMOOTHING_EPSILON);
    }
    if let Err(e) = require_full_rank_marginals(rho, dims, "rho") {
        if !allow_smoothing {
            return Err(e);
        }
        out.rho = smooth(rho, SMOOTHING_EPSILON)?;
        out.rho_smoothing = Some(SMOOTHING_EPSILON);
    }
    Ok(out)
}

fn require_full_rank_marginals(state: &DensityOperator, dims: BipartiteDims, label: &str) -> Result<()> {
    let (a, b) = state.marginals(dims)?;
    require_positive_definite(a.op(), &format!("{label}_A"))?;
    require_positive_definite(b.op(), &format!("{label}_B"))?;
    Ok(())
}

fn require_pipeline_rank(rho: &DensityOperator, sigma: &DensityOperator, dims: BipartiteDims) -> Result<()> {
    dims.check(rho.dim())?;
    dims.check(sigma.dim())?;
    require_positive_definite(sigma.op(), "sigma_AB")?;
    require_full_rank_marginals(rho, dims, "rho")
}

fn entropy(rho: &DensityOperator, sigma: &DensityOperator) -> Result<f64> {
    relative_entropy(rho, sigma)?.require_finite()
}

/// `(Ent(rho_A || sigma_A), Ent(rho_B || sigma_B))`.
fn marginal_entropies(
    rho: &DensityOperator,
    sigma: &DensityOperator,
    dims: BipartiteDims,
) -> Result<(f64, f64)> {
    let (ra, rb) = rho.marginals(dims)?;
    let (sa, sb) = sigma.marginals(dims)?;
    Ok((entropy(&ra, &sa)?, entropy(&rb, &sb)?))
}

/// `(rho_A - sigma_A, rho_B - sigma_B)`.
fn marginal_differences(
    rho: &DensityOperator,
    sigma: &DensityOperator,
    dims: BipartiteDims,
) -> Result<(HermitianOperator, HermitianOperator)> {
    let (ra, rb) = rho.marginals(dims)?;
    let (sa, sb) = sigma.marginals(dims)?;
    Ok((ra.op().sub(sa.op())?, rb.op().sub(sb.op())?))
}

fn real_trace_product(a: &HermitianOperator, b: &HermitianOperator) -> f64 {
    a.trace_product(b.matrix()).re
}

/// Every quantity of the argument for one input pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TheoremBreakdown {
    /// `Ent(rho_AB || sigma_AB)`
    pub d_full: f64,
    pub d_a: f64,
    pub d_b: f64,
    pub tr_m: f64,
    pub log_tr_m: f64,
    /// `tr[L(sigma_AB) (rho_A - sigma_A) (x) (rho_B - sigma_B)]`
    pub step2_rhs: f64,
    pub l_norm: f64,
    pub h_norm: f64,
    /// `1 + 2 h_norm`
    pub alpha: f64,
    /// `alpha < 2`: the bound beats the factor-2 consequence of monotonicity.
    pub improvement_regime: bool,
    /// Step 1, Step 2, Step 3, Step 4, theorem.
    pub chain: Vec<InequalityReport>,
    /// Telescoped slack of the chain, which must reproduce the theorem's.
    pub composed: InequalityReport,
    /// False only if every step passed but the theorem did not.
    pub chain_sound: bool,
}

impl TheoremBreakdown {
    pub fn theorem(&self) -> &InequalityReport {
        &self.chain[4]
    }

    pub fn steps(&self) -> &[InequalityReport] {
        &self.chain[..4]
    }

    /// All reports of the breakdown, including links, with qualified names.
    pub fn reports(&self) -> Vec<(String, &InequalityReport)> {
        self.chain
            .iter()
            .chain(std::iter::once(&self.composed))
            .flat_map(|r| r.flatten())
            .collect()
    }
}

/// Runs the checks at a fixed set of tolerances.
#[derive(Debug, Clone, Copy, Default)]
pub struct Checker {
    pub tol: Tolerances,
}

impl Checker {
    pub fn new(tol: Tolerances) -> Self {
        Self { tol }
    }

    /// `alpha * Ent(rho_AB || sigma_AB) >= Ent(rho_A || sigma_A) + Ent(rho_B || sigma_B)`.
    pub fn main_theorem(
        &self,
        rho: &DensityOperator,
        sigma: &DensityOperator,
        dims: BipartiteDims,
    ) -> Result<InequalityReport> {
        require_pipeline_rank(rho, sigma, dims)?;
        let h_norm = h_operator(sigma, dims)?.operator_norm()?;
        let alpha = 1.0 + 2.0 * h_norm;
        let d_full = entropy(rho, sigma)?;
        let (d_a, d_b) = marginal_entropies(rho, sigma, dims)?;
        Ok(
            InequalityReport::geq("theorem", alpha * d_full, d_a + d_b, self.tol.inequality)
                .with_meta("alpha", alpha)
                .with_meta("h_norm", h_norm),
        )
    }

    /// Step 1, with the exact identity `d_full - d_a - d_b = Ent(rho_AB || M)`
    /// and the trace bound `Ent(rho_AB || M) >= -log tr M` as links.
    pub fn step1(
        &self,
        rho: &DensityOperator,
        sigma: &DensityOperator,
        dims: BipartiteDims,
    ) -> Result<InequalityReport> {
        require_pipeline_rank(rho, sigma, dims)?;
        let d_full = entropy(rho, sigma)?;
        let (d_a, d_b) = marginal_entropies(rho, sigma, dims)?;
        let m = step1_m(rho, sigma, dims)?;
        let tr_m = m.trace();
        let log_tr_m = tr_m.ln();
        let ent_rho_m = relative_entropy_positive(rho.op(), &m)?.require_finite()?;
        let tol = self.tol.inequality;
        let links = vec![
            InequalityReport::eq("entropy_gap_identity", d_full - d_a - d_b, ent_rho_m, tol),
            InequalityReport::geq(
                "trace_lower_bound",
                ent_rho_m,
                entropy_lower_bound(rho.op(), &m)?,
                tol,
            ),
        ];
        Ok(
            InequalityReport::geq("step1", d_full, d_a + d_b - log_tr_m, tol)
                .with_meta("log_tr_m", log_tr_m)
                .with_links(links),
        )
    }

    /// Step 2, through Lieb's inequality and `log x <= x - 1`; the identity
    /// `tr[L rho_A (x) rho_B] = tr[L (rho_A - sigma_A) (x) (rho_B - sigma_B)]`
    /// is recorded as a link.
    pub fn step2(
        &self,
        rho: &DensityOperator,
        sigma: &DensityOperator,
        dims: BipartiteDims,
    ) -> Result<InequalityReport> {
        require_pipeline_rank(rho, sigma, dims)?;
        let tr_m = step1_m(rho, sigma, dims)?.trace();
        let log_tr_m = tr_m.ln();

        let l = l_operator(sigma, dims)?;
        let (da, db) = marginal_differences(rho, sigma, dims)?;
        let pairing = real_trace_product(&l, &da.tensor(&db));

        let (ra, rb) = rho.marginals(dims)?;
        let (sa, sb) = sigma.marginals(dims)?;
        let rho_prod = ra.tensor(&rb);
        let lieb_bound = rho_prod
            .op()
            .trace_product(&tg_kernel(sa.tensor(&sb).op(), sigma.matrix())?)
            .re;
        let l_on_product = real_trace_product(&l, rho_prod.op());

        let tol = self.tol.inequality;
        let links = vec![
            InequalityReport::leq("log_le_linear", log_tr_m, tr_m - 1.0, tol),
            InequalityReport::leq("lieb", tr_m, lieb_bound, tol),
            InequalityReport::eq("orthogonality_pairing", l_on_product, pairing, tol),
        ];
        Ok(InequalityReport::leq("step2", log_tr_m, pairing, tol)
            .with_meta("tr_m", tr_m)
            .with_links(links))
    }

    /// Step 3: Hölder with tensor multiplicativity of the trace norm,
    /// Pinsker on each marginal, then monotonicity.
    pub fn step3(
        &self,
        rho: &DensityOperator,
        sigma: &DensityOperator,
        dims: BipartiteDims,
    ) -> Result<InequalityReport> {
        require_pipeline_rank(rho, sigma, dims)?;
        let l = l_operator(sigma, dims)?;
        let l_norm = l.operator_norm()?;
        let (da, db) = marginal_differences(rho, sigma, dims)?;
        let joint = da.tensor(&db);
        let pairing = real_trace_product(&l, &joint);
        let d_full = entropy(rho, sigma)?;
        let (d_a, d_b) = marginal_entropies(rho, sigma, dims)?;

        let joint_norm = trace_norm(&tensor(da.matrix(), db.matrix()))?;
        let (na, nb) = (da.trace_norm()?, db.trace_norm()?);
        let tol = self.tol.inequality;
        let links = vec![
            InequalityReport::leq("holder", pairing, l_norm * joint_norm, tol),
            InequalityReport::eq("trace_norm_multiplicativity", joint_norm, na * nb, tol),
            // squared form: a square root would turn 1e-16 roundoff in an
            // entropy near zero into 1e-8 of slack
            InequalityReport::leq("pinsker_a", na * na, 2.0 * d_a, tol),
            InequalityReport::leq("pinsker_b", nb * nb, 2.0 * d_b, tol),
            InequalityReport::leq(
                "monotonicity_mean",
                2.0 * (d_a.max(0.0) * d_b.max(0.0)).sqrt(),
                2.0 * d_full,
                tol,
            ),
        ];
        Ok(
            InequalityReport::leq("step3", pairing, 2.0 * l_norm * d_full, tol)
                .with_meta("l_norm", l_norm)
                .with_links(links),
        )
    }

    /// Step 4: `||L||_inf <= ||H||_inf`, with the trace-distance bound on
    /// `||H||_inf` as a link.
    pub fn step4(&self, sigma: &DensityOperator, dims: BipartiteDims) -> Result<InequalityReport> {
        dims.check(sigma.dim())?;
        let l_norm = l_operator(sigma, dims)?.operator_norm()?;
        let h_norm = h_operator(sigma, dims)?.operator_norm()?;
        Ok(InequalityReport::leq("step4", l_norm, h_norm, self.tol.inequality)
            .with_links(vec![self.remark_bound(sigma, dims)?]))
    }

    /// `||H||_inf <= ||sigma_A^{-1/2} (x) sigma_B^{-1/2}||_inf^2 ||sigma_AB - sigma_A (x) sigma_B||_1`.
    ///
    /// The prefactor is the inverse of the least eigenvalue of
    /// `sigma_A (x) sigma_B`.
    pub fn remark_bound(&self, sigma: &DensityOperator, dims: BipartiteDims) -> Result<InequalityReport> {
        let h_norm = h_operator(sigma, dims)?.operator_norm()?;
        let prefactor = marginal_inverse_sqrt(sigma, dims)?.operator_norm()?.powi(2);
        let (sa, sb) = sigma.marginals(dims)?;
        let distance = sigma.op().sub(sa.tensor(&sb).op())?.trace_norm()?;
        Ok(
            InequalityReport::leq("trace_distance_bound", h_norm, prefactor * distance, self.tol.inequality)
                .with_meta("inverse_min_eigenvalue", prefactor),
        )
    }

    /// `||rho - sigma||_1^2 <= 2 Ent(rho || sigma)`; passes trivially on
    /// infinite entropy.
    pub fn pinsker(&self, rho: &DensityOperator, sigma: &DensityOperator) -> Result<InequalityReport> {
        let distance = rho.op().sub(sigma.op())?.trace_norm()?;
        let ent = relative_entropy(rho, sigma)?;
        let rhs = match ent {
            ExtendedReal::Finite(v) => ExtendedReal::Finite(2.0 * v),
            ExtendedReal::PosInfinity => ExtendedReal::PosInfinity,
        };
        Ok(InequalityReport::leq("pinsker", distance * distance, rhs, self.tol.inequality))
    }

    /// `tr e^{a+b} <= tr[e^a e^b]`.
    pub fn golden_thompson(&self, a: &HermitianOperator, b: &HermitianOperator) -> Result<InequalityReport> {
        let lhs = a.add(b)?.apply(RealFunction::Exp)?.trace();
        let ea = a.apply(RealFunction::Exp)?;
        let eb = b.apply(RealFunction::Exp)?;
        let rhs = ea.trace_product(eb.matrix()).re;
        Ok(InequalityReport::leq("golden_thompson", lhs, rhs, self.tol.inequality * rhs.abs().max(1.0)))
    }

    /// `tr exp(-f + g + h) <= tr[e^h T_{e^f}(e^g)]`, with equality when the
    /// three operators commute.
    pub fn lieb(
        &self,
        f: &HermitianOperator,
        g: &HermitianOperator,
        h: &HermitianOperator,
    ) -> Result<InequalityReport> {
        let lhs = g.sub(f)?.add(h)?.apply(RealFunction::Exp)?.trace();
        let rhs = lieb_rhs(f, g, h)?;
        Ok(InequalityReport::leq("lieb", lhs, rhs, self.tol.inequality * rhs.abs().max(1.0)))
    }

    /// The classical properties of relative entropy on one pair.
    pub fn classical_suite(
        &self,
        rho: &DensityOperator,
        sigma: &DensityOperator,
        dims: BipartiteDims,
    ) -> Result<Vec<InequalityReport>> {
        require_pipeline_rank(rho, sigma, dims)?;
        let tol = self.tol.inequality;
        let nonneg = self.tol.nonnegativity;
        let d_full = entropy(rho, sigma)?;
        let (d_a, d_b) = marginal_entropies(rho, sigma, dims)?;
        let (ra, rb) = rho.marginals(dims)?;
        let (sa, sb) = sigma.marginals(dims)?;
        let sigma_prod = sa.tensor(&sb);
        let additive = entropy(&ra.tensor(&rb), &sigma_prod)?;
        let mi = mutual_information(rho, dims)?.require_finite()?;
        let against_product = entropy(rho, &sigma_prod)?;

        // a positive operator of trace 2 that is not a multiple of a state
        let g = sigma.op().add(sigma_prod.op())?;
        let cond = relative_entropy_positive(rho.op(), &g)?;
        let cond_bound = entropy_lower_bound(rho.op(), &g)?;

        let (a, b) = (2.0, 3.0);
        let shift = scaled_entropy_shift(rho.op(), sigma.op(), a, b)?;

        Ok(vec![
            InequalityReport::geq("nonnegativity", d_full, 0.0, nonneg),
            InequalityReport::geq("monotonicity_a", d_full, d_a, tol),
            InequalityReport::geq("monotonicity_b", d_full, d_b, tol),
            InequalityReport::eq("additivity", additive, d_a + d_b, tol),
            InequalityReport::geq("mutual_information_nonnegativity", mi, 0.0, nonneg),
            InequalityReport::eq("product_decomposition", against_product, mi + d_a + d_b, tol),
            InequalityReport::geq("factor_two", 2.0 * d_full, d_a + d_b, tol),
            InequalityReport::geq("trace_lower_bound", cond, cond_bound, tol),
            InequalityReport::eq("homogeneity", shift, (a / b).ln(), self.tol.homogeneity),
        ])
    }

    /// Every quantity and relation of the argument for one pair.
    pub fn breakdown(
        &self,
        rho: &DensityOperator,
        sigma: &DensityOperator,
        dims: BipartiteDims,
    ) -> Result<TheoremBreakdown> {
        let step1 = self.step1(rho, sigma, dims)?;
        let step2 = self.step2(rho, sigma, dims)?;
        let step3 = self.step3(rho, sigma, dims)?;
        let step4 = self.step4(sigma, dims)?;
        let theorem = self.main_theorem(rho, sigma, dims)?;

        let d_full = step1.lhs.require_finite()?;
        let (d_a, d_b) = marginal_entropies(rho, sigma, dims)?;
        let log_tr_m = step2.lhs.require_finite()?;
        let step2_rhs = step2.rhs.require_finite()?;
        let l_norm = step4.lhs.require_finite()?;
        let h_norm = step4.rhs.require_finite()?;
        let alpha = 1.0 + 2.0 * h_norm;

        // The theorem's slack telescopes into the step slacks:
        // s_thm = s1 + s2 + s3 + 2 d_full s4.
        let slack = |r: &InequalityReport| r.slack_f64();
        let telescoped =
            slack(&step1) + slack(&step2) + slack(&step3) + 2.0 * d_full * slack(&step4);
        let composite = self.tol.composite;
        let composed = InequalityReport::geq("composed_chain", telescoped, 0.0, composite)
            .with_links(vec![InequalityReport::eq(
                "telescoping_identity",
                telescoped,
                slack(&theorem),
                composite,
            )]);

        let steps_pass = [&step1, &step2, &step3, &step4].iter().all(|r| r.pass);
        let chain_sound = !steps_pass || (composed.pass && theorem.pass);

        Ok(TheoremBreakdown {
            d_full,
            d_a,
            d_b,
            tr_m: log_tr_m.exp(),
            log_tr_m,
            step2_rhs,
            l_norm,
            h_norm,
            alpha,
            improvement_regime: alpha < 2.0,
            chain: vec![step1, step2, step3, step4, theorem],
            composed,
            chain_sound,
        })
    }
}

pub fn check_main_theorem(
    rho: &DensityOperator,
    sigma: &DensityOperator,
    dims: BipartiteDims,
) -> Result<InequalityReport> {
    Checker::default().main_theorem(rho, sigma, dims)
}

pub fn check_step1(
    rho: &DensityOperator,
    sigma: &DensityOperator,
    dims: BipartiteDims,
) -> Result<InequalityReport> {
    Checker::default().step1(rho, sigma, dims)
}

pub fn check_step2(
    rho: &DensityOperator,
    sigma: &DensityOperator,
    dims: BipartiteDims,
) -> Result<InequalityReport> {
    Checker::default().step2(rho, sigma, dims)
}

pub fn check_step3(
    rho: &DensityOperator,
    sigma: &DensityOperator,
    dims: BipartiteDims,
) -> Result<InequalityReport> {
    Checker::default().step3(rho, sigma, dims)
}

pub fn check_step4(sigma: &DensityOperator, dims: BipartiteDims) -> Result<InequalityReport> {
    Checker::default().step4(sigma, dims)
}

pub fn check_pinsker(rho: &DensityOperator, sigma: &DensityOperator) -> Result<InequalityReport> {
    Checker::default().pinsker(rho, sigma)
}

pub fn check_classical_suite(
    rho: &DensityOperator,
    sigma: &DensityOperator,
    dims: BipartiteDims,
) -> Result<Vec<InequalityReport>> {
    Checker::default().classical_suite(rho, sigma, dims)
}

pub fn check_golden_thompson(a: &HermitianOperator, b: &HermitianOperator) -> Result<InequalityReport> {
    Checker::default().golden_thompson(a, b)
}

pub fn check_lieb(
    f: &HermitianOperator,
    g: &HermitianOperator,
    h: &HermitianOperator,
) -> Result<InequalityReport> {
    Checker::default().lieb(f, g, h)
}

pub fn run_breakdown(
    rho: &DensityOperator,
    sigma: &DensityOperator,
    dims: BipartiteDims,
) -> Result<TheoremBreakdown> {
    Checker::default().breakdown(rho, sigma, dims)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{real, C64};
    use crate::statesgen::{ginibre_density, EnsembleKind, EnsembleSpec};

    fn dims22() -> BipartiteDims {
        BipartiteDims::new(2, 2).unwrap()
    }

    fn state(p: &[f64]) -> DensityOperator {
        DensityOperator::from_probabilities(p).unwrap()
    }

    fn bell() -> DensityOperator {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        DensityOperator::pure(&[real(s), C64::default(), C64::default(), real(s)]).unwrap()
    }

    #[test]
    fn equal_states_have_zero_slack() {
        let rho = ginibre_density(4, 3).unwrap().state;
        let b = run_breakdown(&rho, &rho, dims22()).unwrap();
        assert!(b.log_tr_m.abs() < 1e-9);
        for (name, r) in b.reports() {
            assert!(r.pass, "{name}: {r:?}");
            if let Some(ExtendedReal::Finite(s)) = r.slack {
                // step 4 depends on sigma alone
                if !name.starts_with("step4") {
                    assert!(s.abs() <= 1e-9, "{name}: {s}");
                }
            }
        }
        assert!(b.d_full.abs() < 1e-12);
    }

    #[test]
    fn product_sigma_recovers_superadditivity() {
        let rho = ginibre_density(4, 5).unwrap().state;
        let sigma = state(&[0.3, 0.7]).tensor(&state(&[0.6, 0.4]));
        let b = run_breakdown(&rho, &sigma, dims22()).unwrap();
        assert!(b.h_norm <= 1e-10 && b.l_norm <= 1e-10);
        assert!((b.alpha - 1.0).abs() <= 1e-10);
        assert!(b.log_tr_m.abs() <= 1e-10);
        assert!(b.step2_rhs.abs() <= 1e-10);
        assert!(b.theorem().pass && b.chain_sound && b.improvement_regime);
    }

    #[test]
    fn smoothed_bell_breakdown() {
        let sigma = bell()
            .mix(&DensityOperator::maximally_mixed(4), 0.01)
            .unwrap();
        let rho = ginibre_density(4, 8).unwrap().state;
        let b = run_breakdown(&rho, &sigma, dims22()).unwrap();
        // marginals stay I/2, so H = 4 sigma - 1 with top eigenvalue 4 * (0.99 + 0.0025) - 1
        assert!((b.h_norm - 2.97).abs() < 1e-12);
        assert!((b.alpha - 6.94).abs() < 1e-12);
        assert!(b.chain.iter().all(|r| r.pass));
        // sigma_A (x) sigma_B = I/4 is scalar, so L and H coincide
        assert!((b.l_norm - b.h_norm).abs() < 1e-12);
        assert!(!b.improvement_regime);
    }

    #[test]
    fn singular_inputs_are_rejected_or_smoothed() {
        let rho = ginibre_density(4, 1).unwrap().state;
        match check_main_theorem(&rho, &bell(), dims22()) {
            Err(Error::Singular { name, .. }) => assert_eq!(name, "sigma_AB"),
            other => panic!("unexpected {other:?}"),
        }
        let prepared = prepare_pair(&rho, &bell(), dims22(), true).unwrap();
        assert_eq!(prepared.sigma_smoothing, Some(SMOOTHING_EPSILON));
        assert_eq!(prepared.rho_smoothing, None);
        let r = check_main_theorem(&prepared.rho, &prepared.sigma, dims22()).unwrap();
        assert!(r.pass);
        assert!(prepare_pair(&rho, &bell(), dims22(), false).is_err());
    }

    #[test]
    fn pinsker_examples() {
        let rho = state(&[0.2, 0.8]);
        let r = check_pinsker(&rho, &rho).unwrap();
        assert!(r.pass);
        assert_eq!(r.lhs, ExtendedReal::Finite(0.0));
        let r = check_pinsker(&state(&[1.0, 0.0]), &state(&[0.0, 1.0])).unwrap();
        assert!(r.pass);
        assert!((r.lhs.to_f64() - 4.0).abs() < 1e-14);
        assert_eq!(r.rhs, ExtendedReal::PosInfinity);
    }

    #[test]
    fn step3_with_matching_first_marginal() {
        let sa = state(&[0.3, 0.7]);
        let rho = sa.tensor(&state(&[0.5, 0.5]));
        let sigma = ginibre_density(4, 17).unwrap().state;
        let (sigma_a, _) = sigma.marginals(dims22()).unwrap();
        let rho = sigma_a.tensor(&rho.marginal(dims22(), crate::linalg::Subsystem::B).unwrap());
        let r = check_step3(&rho, &sigma, dims22()).unwrap();
        assert!(r.lhs.to_f64().abs() < 1e-12);
        assert!(r.pass && !r.any_failure());
    }

    #[test]
    fn classical_suite_on_products() {
        let rho = state(&[0.1, 0.9]).tensor(&state(&[0.4, 0.6]));
        let sigma = state(&[0.5, 0.5]).tensor(&state(&[0.7, 0.3]));
        let suite = check_classical_suite(&rho, &sigma, dims22()).unwrap();
        assert_eq!(suite.len(), 9);
        for r in &suite {
            assert!(r.pass, "{r:?}");
        }
        let add = suite.iter().find(|r| r.name == "additivity").unwrap();
        assert!(add.slack_f64().abs() < 1e-12);
    }

    #[test]
    fn random_breakdowns_pass() {
        for kind in EnsembleKind::ALL {
            let spec = EnsembleSpec {
                kind,
                dims: BipartiteDims::new(2, 3).unwrap(),
                epsilon: 0.3,
                seed: 99,
            };
            for trial in 0..20 {
                let pair = spec.sample(trial).unwrap();
                let b = run_breakdown(&pair.rho, &pair.sigma, spec.dims).unwrap();
                assert!(b.chain_sound);
                for (name, r) in b.reports() {
                    assert!(r.pass, "{kind:?} trial {trial} {name}: {r:?}");
                }
                assert_eq!(b.alpha, 1.0 + 2.0 * b.h_norm);
            }
        }
    }

    #[test]
    fn trace_inequalities_on_commuting_inputs() {
        let a = HermitianOperator::from_real_diagonal(&[0.3, -1.0, 2.0]).unwrap();
        let b = HermitianOperator::from_real_diagonal(&[1.5, 0.2, -0.7]).unwrap();
        let h = HermitianOperator::from_real_diagonal(&[-0.4, 0.9, 0.1]).unwrap();
        let r = check_golden_thompson(&a, &b).unwrap();
        assert!(r.pass && r.slack_f64().abs() < 1e-12);
        let r = check_lieb(&a, &b, &h).unwrap();
        assert!(r.pass && r.slack_f64().abs() < 1e-9);
    }

    #[test]
    fn tolerance_overrides() {
        let mut t = Tolerances::default();
        t.set("composite", 1e-8).unwrap();
        assert_eq!(t.composite, 1e-8);
        assert!(t.set("inequality", -1.0).is_err());
        assert!(Tolerances::default().set("bogus", 1.0).is_err());
    }
}
