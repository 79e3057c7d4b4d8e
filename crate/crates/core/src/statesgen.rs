//! Seeded, reproducible random states and observables.
//!
//! Every generator is a pure function of its seed. Randomness comes from
//! ChaCha20 (`rand_chacha`), seeded through `seed_from_u64` and split into
//! independent streams with `set_stream`, so one trial seed can feed several
//! operators without correlation. Complex normals use the Box–Muller
//! transform directly, which keeps samples independent of `rand_distr`
//! implementation details.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{c, BipartiteDims, CMatrix, DensityOperator, HermitianOperator, C64, RANK_TOL};

/// Identifies the sampling scheme; embedded in reports.
pub const GENERATOR_ID: &str = "chacha20/box-muller/v1";

/// Weight of `I/d` mixed into pure states before they enter the pipeline.
pub const PURE_SMOOTHING: f64 = 1e-6;

const MAX_REGENERATIONS: u64 = 64;

/// Stream identifiers; each purpose owns a block of `MAX_REGENERATIONS` streams.
#[derive(Debug, Clone, Copy)]
enum Stream {
    Rho = 1,
    Sigma,
    SigmaA,
    SigmaB,
    Tau,
    Pure,
    Observable,
    DiagRho,
    DiagSigma,
}

fn rng_for(seed: u64, stream: Stream, attempt: u64) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(stream as u64 * MAX_REGENERATIONS + attempt);
    rng
}

/// Pair of independent standard normals.
fn normal_pair(rng: &mut ChaCha20Rng) -> (f64, f64) {
    // 1 - U lies in (0, 1], so the log is finite
    let u1: f64 = 1.0 - rng.gen::<f64>();
    let u2: f64 = rng.gen::<f64>();
    let r = (-2.0 * u1.ln()).sqrt();
    let theta = std::f64::consts::TAU * u2;
    (r * theta.cos(), r * theta.sin())
}

fn complex_normal(rng: &mut ChaCha20Rng) -> C64 {
    let (re, im) = normal_pair(rng);
    c(re, im)
}

fn ginibre_matrix(rng: &mut ChaCha20Rng, d: usize) -> CMatrix {
    // row-major fill so the sample order does not depend on storage order
    let mut g = CMatrix::zeros(d, d);
    for i in 0..d {
        for j in 0..d {
            g[(i, j)] = complex_normal(rng);
        }
    }
    g
}

fn check_dim(d: usize) -> Result<()> {
    if d == 0 {
        return Err(Error::InvalidInput("dimension must be at least 1".into()));
    }
    Ok(())
}

/// A sampled state with its smallest eigenvalue and the number of redraws
/// spent on (measure-zero) rank-deficient samples.
#[derive(Debug, Clone)]
pub struct GeneratedState {
    pub state: DensityOperator,
    pub min_eigenvalue: f64,
    pub regenerations: u32,
}

fn ginibre_on_stream(d: usize, seed: u64, stream: Stream) -> Result<GeneratedState> {
    check_dim(d)?;
    for attempt in 0..MAX_REGENERATIONS {
        let mut rng = rng_for(seed, stream, attempt);
        let g = ginibre_matrix(&mut rng, d);
        let gram = &g * g.adjoint();
        let tr = gram.trace().re;
        let op = HermitianOperator::new(&gram / c(tr, 0.0))?;
        let state = DensityOperator::new(op)?;
        let eig = state.eig()?;
        let min = eig.min_eigenvalue();
        if min > RANK_TOL * eig.max_eigenvalue() {
            return Ok(GeneratedState {
                state,
                min_eigenvalue: min,
                regenerations: attempt as u32,
            });
        }
    }
    Err(Error::InvalidInput(format!(
        "no full-rank Ginibre sample after {MAX_REGENERATIONS} draws (d = {d}, seed = {seed})"
    )))
}

/// `G G^dagger / tr[G G^dagger]` with `G` a `d x d` matrix of independent
/// standard complex normals.
pub fn ginibre_density(d: usize, seed: u64) -> Result<GeneratedState> {
    ginibre_on_stream(d, seed, Stream::Rho)
}

/// Normalized Gaussian vector, as a pure state.
pub fn random_pure_state(d: usize, seed: u64) -> Result<DensityOperator> {
    check_dim(d)?;
    let mut rng = rng_for(seed, Stream::Pure, 0);
    let psi: Vec<C64> = (0..d).map(|_| complex_normal(&mut rng)).collect();
    DensityOperator::pure(&psi)
}

/// `(1 - eps) sigma_A (x) sigma_B + eps tau`.
pub fn product_perturbed_sigma(
    sigma_a: &DensityOperator,
    sigma_b: &DensityOperator,
    tau: &DensityOperator,
    epsilon: f64,
) -> Result<DensityOperator> {
    let product = sigma_a.tensor(sigma_b);
    if tau.dim() != product.dim() {
        return Err(Error::DimensionMismatch {
            expected: product.dim(),
            found: tau.dim(),
        });
    }
    if epsilon == 0.0 {
        return Ok(product);
    }
    if epsilon == 1.0 {
        return Ok(tau.clone());
    }
    product.mix(tau, epsilon)
}

/// `(1 - eps) sigma + eps I/d`.
pub fn smooth(sigma: &DensityOperator, epsilon: f64) -> Result<DensityOperator> {
    sigma.mix(&DensityOperator::maximally_mixed(sigma.dim()), epsilon)
}

/// Random Hermitian observable rescaled to operator norm `norm_bound`.
pub fn random_observable(d: usize, seed: u64, norm_bound: f64) -> Result<HermitianOperator> {
    check_dim(d)?;
    if !(norm_bound.is_finite() && norm_bound >= 0.0) {
        return Err(Error::InvalidInput(format!(
            "norm bound must be finite and nonnegative, got {norm_bound}"
        )));
    }
    let mut rng = rng_for(seed, Stream::Observable, 0);
    let g = ginibre_matrix(&mut rng, d);
    let h = crate::linalg::hermitize(&g)?.op;
    let norm = h.operator_norm()?;
    if norm == 0.0 {
        return Ok(h);
    }
    Ok(h.scale(norm_bound / norm))
}

/// Maximally entangled state `sum_{i<m} |ii> / sqrt(m)` with `m = min(d_A, d_B)`.
pub fn maximally_entangled(dims: BipartiteDims) -> Result<DensityOperator> {
    let m = dims.dim_a.min(dims.dim_b);
    let mut psi = vec![C64::default(); dims.total()];
    for i in 0..m {
        psi[i * dims.dim_b + i] = c(1.0, 0.0);
    }
    DensityOperator::pure(&psi)
}

fn random_probabilities(rng: &mut ChaCha20Rng, n: usize) -> Vec<f64> {
    // bounded away from zero so ratios against marginals stay moderate
    let raw: Vec<f64> = (0..n).map(|_| 0.1 + 0.9 * rng.gen::<f64>()).collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|p| p / total).collect()
}

/// Two full-rank states diagonal in the computational product basis.
pub fn classical_diagonal_pair(
    dims: BipartiteDims,
    seed: u64,
) -> Result<(DensityOperator, DensityOperator)> {
    let n = dims.total();
    let p = random_probabilities(&mut rng_for(seed, Stream::DiagRho, 0), n);
    let q = random_probabilities(&mut rng_for(seed, Stream::DiagSigma, 0), n);
    Ok((
        DensityOperator::from_probabilities(&p)?,
        DensityOperator::from_probabilities(&q)?,
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EnsembleKind {
    /// Independent Ginibre states for `rho_AB` and `sigma_AB`.
    GinibreFullRank,
    /// Ginibre `rho_AB`, `sigma_AB = sigma_A (x) sigma_B`.
    Product,
    /// Ginibre `rho_AB`, `sigma_AB = (1 - eps) sigma_A (x) sigma_B + eps tau`.
    ProductPerturbed,
    /// Ginibre `rho_AB`, `sigma_AB` a random pure state mixed with
    /// [`PURE_SMOOTHING`] of `I/d`.
    PureSmoothed,
    /// Both states diagonal in the product basis.
    ClassicalDiagonal,
}

impl EnsembleKind {
    pub const ALL: [EnsembleKind; 5] = [
        EnsembleKind::GinibreFullRank,
        EnsembleKind::Product,
        EnsembleKind::ProductPerturbed,
        EnsembleKind::PureSmoothed,
        EnsembleKind::ClassicalDiagonal,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            EnsembleKind::GinibreFullRank => "ginibre_full_rank",
            EnsembleKind::Product => "product",
            EnsembleKind::ProductPerturbed => "product_perturbed",
            EnsembleKind::PureSmoothed => "pure_smoothed",
            EnsembleKind::ClassicalDiagonal => "classical_diagonal",
        }
    }
}

impl std::str::FromStr for EnsembleKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        EnsembleKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::InvalidInput(format!("unknown ensemble kind {s:?}")))
    }
}

/// Perturbation `tau` used by [`EnsembleKind::ProductPerturbed`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TauKind {
    /// A Ginibre state on the joint system.
    #[default]
    Ginibre,
    /// The maximally entangled state mixed with [`PURE_SMOOTHING`] of `I/d`.
    MaximallyEntangled,
}

impl TauKind {
    pub fn name(&self) -> &'static str {
        match self {
            TauKind::Ginibre => "ginibre",
            TauKind::MaximallyEntangled => "maximally_entangled",
        }
    }
}

impl std::str::FromStr for TauKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        [TauKind::Ginibre, TauKind::MaximallyEntangled]
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::InvalidInput(format!("unknown tau kind {s:?}")))
    }
}

/// Complete description of a random ensemble of `(rho_AB, sigma_AB)` pairs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnsembleSpec {
    pub kind: EnsembleKind,
    pub dims: BipartiteDims,
    pub epsilon: f64,
    pub seed: u64,
}

/// One draw from an [`EnsembleSpec`].
#[derive(Debug, Clone)]
pub struct SampledPair {
    pub rho: DensityOperator,
    pub sigma: DensityOperator,
    pub trial_seed: u64,
    /// Weight of `I/d` mixed into `sigma`, when smoothing was applied.
    pub smoothing: Option<f64>,
    pub regenerations: u32,
}

impl EnsembleSpec {
    pub fn validate(&self) -> Result<()> {
        BipartiteDims::new(self.dims.dim_a, self.dims.dim_b)?;
        if !(0.0..=1.0).contains(&self.epsilon) {
            return Err(Error::InvalidInput(format!(
                "ensemble epsilon {} outside [0, 1]",
                self.epsilon
            )));
        }
        Ok(())
    }

    /// Per-trial seed `seed XOR trial_index`.
    pub fn trial_seed(&self, trial_index: u64) -> u64 {
        self.seed ^ trial_index
    }

    pub fn sample(&self, trial_index: u64) -> Result<SampledPair> {
        self.sample_with_tau(trial_index, TauKind::Ginibre)
    }

    /// Like [`EnsembleSpec::sample`], with a choice of perturbation for
    /// [`EnsembleKind::ProductPerturbed`]; other kinds ignore `tau`.
    pub fn sample_with_tau(&self, trial_index: u64, tau_kind: TauKind) -> Result<SampledPair> {
        self.validate()?;
        let seed = self.trial_seed(trial_index);
        let n = self.dims.total();
        let (da, db) = (self.dims.dim_a, self.dims.dim_b);
        let mut regenerations = 0;
        let mut draw = |d: usize, stream: Stream| -> Result<DensityOperator> {
            let g = ginibre_on_stream(d, seed, stream)?;
            regenerations += g.regenerations;
            Ok(g.state)
        };
        let (rho, sigma, smoothing) = match self.kind {
            EnsembleKind::GinibreFullRank => (draw(n, Stream::Rho)?, draw(n, Stream::Sigma)?, None),
            EnsembleKind::Product => {
                let rho = draw(n, Stream::Rho)?;
                let sigma = draw(da, Stream::SigmaA)?.tensor(&draw(db, Stream::SigmaB)?);
                (rho, sigma, None)
            }
            EnsembleKind::ProductPerturbed => {
                let rho = draw(n, Stream::Rho)?;
                let sa = draw(da, Stream::SigmaA)?;
                let sb = draw(db, Stream::SigmaB)?;
                let (tau, smoothing) = match tau_kind {
                    TauKind::Ginibre => (draw(n, Stream::Tau)?, None),
                    TauKind::MaximallyEntangled => (
                        smooth(&maximally_entangled(self.dims)?, PURE_SMOOTHING)?,
                        Some(PURE_SMOOTHING),
                    ),
                };
                (rho, product_perturbed_sigma(&sa, &sb, &tau, self.epsilon)?, smoothing)
            }
            EnsembleKind::PureSmoothed => {
                let rho = draw(n, Stream::Rho)?;
                let sigma = smooth(&random_pure_state(n, seed)?, PURE_SMOOTHING)?;
                (rho, sigma, Some(PURE_SMOOTHING))
            }
            EnsembleKind::ClassicalDiagonal => {
                let (rho, sigma) = classical_diagonal_pair(self.dims, seed)?;
                (rho, sigma, None)
            }
        };
        Ok(SampledPair {
            rho,
            sigma,
            trial_seed: seed,
            smoothing,
            regenerations,
        })
    }
}
