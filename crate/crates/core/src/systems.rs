//! Ground-truth physics: the three model systems, their exact Lagrangians,
//! reference trajectories and noisy training-sample generation.
//!
//! Systems:
//!   - Kepler: L = m q̇²/2 + α/|q|, q ∈ ℝ³ (bound orbits are ellipses).
//!   - Schwarzschild: L = g_{μν}(q) q̇^μ q̇^ν in Cartesian form with the
//!     identity r²(θ̇² + sin²θ φ̇²) = ẋ² − (x·ẋ)²/x², state (x₁,x₂,x₃,τ).
//!   - Two particles in D dimensions with the double-well interaction
//!     V(r) = μr²/2 − κr⁴/4.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::diffcore::Lagrangian;
use crate::dynamics::{acceleration, PhaseState};
use crate::error::{Error, Result};
use crate::integrator::{integrate, IntegrateError, IntegrateOptions, Trajectory};
use crate::invariants::SymmetrySpec;
use crate::real::{dot, BaseFloat, Real};
use crate::seeds::{split_seed, stream};

/// One of the three ground-truth systems with its physical parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum SystemSpec {
    Kepler {
        mass: f64,
        alpha: f64,
        eccentricity: f64,
        angular_momentum: f64,
    },
    Schwarzschild {
        r_s: f64,
        initial_state: PhaseState<f64>,
    },
    TwoParticle {
        spatial_dim: usize,
        m1: f64,
        m2: f64,
        mu: f64,
        kappa: f64,
    },
}

impl SystemSpec {
    /// m = α = 1, ε = 0.8, L_z = 1.
    pub fn kepler_default() -> Self {
        SystemSpec::Kepler { mass: 1.0, alpha: 1.0, eccentricity: 0.8, angular_momentum: 1.0 }
    }

    /// r_s = 0.1 with x(0)=(1,0,0), ẋ(0)=(0,0.35,0) and τ̇(0) fixed by the
    /// timelike unit normalization L = -1.
    pub fn schwarzschild_default() -> Self {
        let r_s = 0.1;
        let x = [1.0, 0.0, 0.0];
        let xdot = [0.0, 0.35, 0.0];
        let taudot = schwarzschild_unit_taudot(r_s, &x, &xdot);
        SystemSpec::Schwarzschild {
            r_s,
            initial_state: PhaseState::new(
                vec![x[0], x[1], x[2], 0.0],
                vec![xdot[0], xdot[1], xdot[2], taudot],
            ),
        }
    }

    /// D = 4, m₁ = 1, m₂ = 0.8, μ = κ = 1.
    pub fn two_particle_default() -> Self {
        SystemSpec::TwoParticle { spatial_dim: 4, m1: 1.0, m2: 0.8, mu: 1.0, kappa: 1.0 }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |v: f64, name: &str| {
            if v > 0.0 {
                Ok(())
            } else {
                Err(Error::InvalidSpec(format!("{name} must be positive, got {v}")))
            }
        };
        match self {
            SystemSpec::Kepler { mass, alpha, eccentricity, angular_momentum } => {
                positive(*mass, "mass")?;
                positive(*alpha, "alpha")?;
                positive(angular_momentum.abs(), "angular momentum")?;
                if !(0.0..1.0).contains(eccentricity) {
                    return Err(Error::InvalidSpec(format!(
                        "eccentricity must lie in [0, 1), got {eccentricity}"
                    )));
                }
                Ok(())
            }
            SystemSpec::Schwarzschild { r_s, initial_state } => {
                positive(*r_s, "Schwarzschild radius")?;
                if initial_state.dim() != 4 {
                    return Err(Error::InvalidSpec("Schwarzschild state must be 4-dimensional".into()));
                }
                Ok(())
            }
            SystemSpec::TwoParticle { spatial_dim, m1, m2, mu, kappa } => {
                if *spatial_dim < 2 {
                    return Err(Error::InvalidSpec("two-particle system needs D >= 2".into()));
                }
                positive(*m1, "m1")?;
                positive(*m2, "m2")?;
                positive(*mu, "mu")?;
                positive(*kappa, "kappa")
            }
        }
    }

    /// Dimension d of the generalized coordinates.
    pub fn dim(&self) -> usize {
        match self {
            SystemSpec::Kepler { .. } => 3,
            SystemSpec::Schwarzschild { .. } => 4,
            SystemSpec::TwoParticle { spatial_dim, .. } => 2 * spatial_dim,
        }
    }

    /// The layout spec used to evaluate charges for this system (also for
    /// unconstrained models trained on it).
    pub fn charge_spec(&self) -> SymmetrySpec {
        match self {
            SystemSpec::Kepler { .. } => SymmetrySpec::KeplerRotational,
            SystemSpec::Schwarzschild { .. } => SymmetrySpec::SchwarzschildRotational,
            SystemSpec::TwoParticle { spatial_dim, .. } => {
                SymmetrySpec::RotoTranslational { spatial_dim: *spatial_dim }
            }
        }
    }

    /// The symmetry-constrained layer this system's experiments default to.
    pub fn default_symmetry(&self) -> SymmetrySpec {
        self.charge_spec()
    }

    /// Check that a model symmetry is usable with this system's state layout.
    pub fn supports_symmetry(&self, spec: &SymmetrySpec) -> bool {
        match (self, spec) {
            (_, SymmetrySpec::None { dim }) => *dim == self.dim(),
            (SystemSpec::Kepler { .. }, SymmetrySpec::KeplerRotational) => true,
            (SystemSpec::Schwarzschild { .. }, SymmetrySpec::SchwarzschildRotational) => true,
            (
                SystemSpec::TwoParticle { spatial_dim, .. },
                SymmetrySpec::Rotational { spatial_dim: d }
                | SymmetrySpec::Translational { spatial_dim: d }
                | SymmetrySpec::RotoTranslational { spatial_dim: d },
            ) => d == spatial_dim,
            _ => false,
        }
    }
}

/// τ̇ making (x, ẋ, τ̇) a timelike unit start: g_{μν} q̇^μ q̇^ν = −1.
pub fn schwarzschild_unit_taudot(r_s: f64, x: &[f64], xdot: &[f64]) -> f64 {
    let r2: f64 = x.iter().map(|v| v * v).sum();
    let r = r2.sqrt();
    let u: f64 = x.iter().zip(xdot).map(|(a, b)| a * b).sum();
    let v2: f64 = xdot.iter().map(|v| v * v).sum();
    let f = 1.0 - r_s / r;
    ((1.0 + u * u / (f * r2) + v2 - u * u / r2) / f).sqrt()
}

// ---------------------------------------------------------------------------
// True Lagrangians
// ---------------------------------------------------------------------------

/// Closed-form Lagrangian of one system, evaluated on generic scalars so the
/// same expression feeds values, derivative bundles and the acceleration map.
#[derive(Debug, Clone)]
pub enum TrueLagrangian {
    Kepler { mass: f64, alpha: f64 },
    Schwarzschild { r_s: f64 },
    TwoParticle { spatial_dim: usize, m1: f64, m2: f64, mu: f64, kappa: f64 },
}

pub fn true_lagrangian(system: &SystemSpec) -> TrueLagrangian {
    match *system {
        SystemSpec::Kepler { mass, alpha, .. } => TrueLagrangian::Kepler { mass, alpha },
        SystemSpec::Schwarzschild { r_s, .. } => TrueLagrangian::Schwarzschild { r_s },
        SystemSpec::TwoParticle { spatial_dim, m1, m2, mu, kappa } => {
            TrueLagrangian::TwoParticle { spatial_dim, m1, m2, mu, kappa }
        }
    }
}

impl<B: BaseFloat> Lagrangian<B> for TrueLagrangian {
    fn dim(&self) -> usize {
        match self {
            TrueLagrangian::Kepler { .. } => 3,
            TrueLagrangian::Schwarzschild { .. } => 4,
            TrueLagrangian::TwoParticle { spatial_dim, .. } => 2 * spatial_dim,
        }
    }

    fn eval<S: Real<Base = B>>(&self, q: &[S], qdot: &[S]) -> Result<S> {
        match *self {
            TrueLagrangian::Kepler { mass, alpha } => {
                let r2 = dot(q, q);
                if !(r2.primal() > B::ZERO) {
                    return Err(Error::Domain("Kepler Lagrangian at |q| = 0".into()));
                }
                let kinetic = dot(qdot, qdot).scale(B::from_f64(0.5 * mass));
                Ok(kinetic + r2.sqrt().recip().scale(B::from_f64(alpha)))
            }
            TrueLagrangian::Schwarzschild { r_s } => {
                let (x, xdot) = (&q[..3], &qdot[..3]);
                let taudot = qdot[3];
                let r2 = dot(x, x);
                let r = r2.sqrt();
                if !(r.primal() > B::from_f64(r_s)) {
                    return Err(Error::Domain(format!(
                        "Schwarzschild Lagrangian needs r > r_s, got r = {}",
                        r.primal().to_f64()
                    )));
                }
                let f = S::one() - r.recip().scale(B::from_f64(r_s));
                let u = dot(x, xdot);
                let radial2 = u * u / r2; // ṙ² = (x·ẋ)²/x²
                Ok(-f * taudot * taudot + radial2 / f + (dot(xdot, xdot) - radial2))
            }
            TrueLagrangian::TwoParticle { spatial_dim, m1, m2, mu, kappa } => {
                let (x1, x2) = (&q[..spatial_dim], &q[spatial_dim..]);
                let (v1, v2) = (&qdot[..spatial_dim], &qdot[spatial_dim..]);
                let mut s = S::zero(); // ‖x¹ − x²‖²
                for (a, b) in x1.iter().zip(x2.iter()) {
                    let w = *a - *b;
                    s += w * w;
                }
                // V(r) = μr²/2 − κr⁴/4, polynomial in r².
                let v = s.scale(B::from_f64(0.5 * mu)) - (s * s).scale(B::from_f64(0.25 * kappa));
                Ok(dot(v1, v1).scale(B::from_f64(0.5 * m1))
                    + dot(v2, v2).scale(B::from_f64(0.5 * m2))
                    - v)
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Exact Kepler states and default initial conditions
// ---------------------------------------------------------------------------

/// Exact bound-orbit state at azimuthal angle φ: the ellipse
/// r(φ) = p/(1 + ε cos φ) with one focus at the origin, lying in the x–y
/// plane, with semi-latus rectum p = L_z²/(mα). Velocities follow from
/// conservation of L_z; q̈ = −αq/(m|q|³) by construction.
pub fn kepler_exact_state(system: &SystemSpec, phi: f64) -> Result<(Vec<f64>, Vec<f64>, Vec<f64>)> {
    let SystemSpec::Kepler { mass, alpha, eccentricity, angular_momentum } = *system else {
        return Err(Error::InvalidSpec("exact states exist only for the Kepler system".into()));
    };
    let p = angular_momentum * angular_momentum / (mass * alpha);
    let (sin_phi, cos_phi) = phi.sin_cos();
    let r = p / (1.0 + eccentricity * cos_phi);
    let q = vec![r * cos_phi, r * sin_phi, 0.0];
    let v_scale = angular_momentum / (mass * p);
    let qdot = vec![-v_scale * sin_phi, v_scale * (eccentricity + cos_phi), 0.0];
    let a_scale = -alpha / (mass * r * r * r);
    let qddot = q.iter().map(|&c| a_scale * c).collect();
    Ok((q, qdot, qddot))
}

/// Initial state each system's experiments start from. Kepler starts on the
/// exact ellipse at φ = 0; Schwarzschild uses the state stored in the spec.
///
/// The two-particle draw is seed-controlled with zero total momentum and is
/// kept inside the double well: V(r) = μr²/2 − κr⁴/4 is unbounded below past
/// its barrier at r* = √(μ/κ) (height μ²/4κ), so the centroid is uniform in
/// [−1, 1]^D while the separation and relative velocity are scaled so the
/// relative energy stays under ~0.6 of the barrier. That guarantees the
/// separation never crosses r* and the reference trajectory is bound.
pub fn default_initial_state<B: BaseFloat>(system: &SystemSpec, seed: u64) -> Result<PhaseState<B>> {
    match system {
        SystemSpec::Kepler { .. } => {
            let (q, qdot, _) = kepler_exact_state(system, 0.0)?;
            Ok(PhaseState::new(
                q.iter().map(|&v| B::from_f64(v)).collect(),
                qdot.iter().map(|&v| B::from_f64(v)).collect(),
            ))
        }
        SystemSpec::Schwarzschild { initial_state, .. } => Ok(initial_state.cast()),
        SystemSpec::TwoParticle { spatial_dim, m1, m2, mu, kappa } => {
            let d = *spatial_dim;
            let mut rng = ChaCha8Rng::seed_from_u64(split_seed(seed, stream::INITIAL_STATE));
            let mut draw = |n: usize, scale: f64| -> Vec<f64> {
                (0..n).map(|_| rng.gen_range(-scale..scale)).collect()
            };
            let r_star = (mu / kappa).sqrt();
            let barrier = mu * mu / (4.0 * kappa);
            let reduced_mass = m1 * m2 / (m1 + m2);
            let centroid = draw(d, 1.0);
            // ‖w‖ ≤ 0.4 r*  ⇒  V(‖w‖) ≤ 0.30 · barrier.
            let w = draw(d, 0.4 * r_star / (d as f64).sqrt());
            // Kinetic part capped at 0.3 · barrier.
            let v_rel = draw(d, (0.6 * barrier / reduced_mass).sqrt() / (d as f64).sqrt());
            let total = m1 + m2;
            let mut q = Vec::with_capacity(2 * d);
            let mut qdot = Vec::with_capacity(2 * d);
            for i in 0..d {
                q.push(centroid[i] + 0.5 * w[i]);
            }
            for i in 0..d {
                q.push(centroid[i] - 0.5 * w[i]);
            }
            for i in 0..d {
                qdot.push(m2 / total * v_rel[i]);
            }
            for i in 0..d {
                qdot.push(-m1 / total * v_rel[i]);
            }
            Ok(PhaseState::new(
                q.iter().map(|&v| B::from_f64(v)).collect(),
                qdot.iter().map(|&v| B::from_f64(v)).collect(),
            ))
        }
    }
}

/// Initial-condition perturbation: independent N(0, std²) noise on every
/// component of q(0) and q̇(0), seeded through the perturbation stream.
pub fn perturbed_state<B: BaseFloat>(state: &PhaseState<B>, std: f64, seed: u64) -> PhaseState<B> {
    let mut rng = ChaCha8Rng::seed_from_u64(split_seed(seed, stream::PERTURBATION));
    let s = B::from_f64(std);
    let jitter = |v: &[B], rng: &mut ChaCha8Rng| -> Vec<B> {
        v.iter().map(|&c| c + B::standard_normal(rng) * s).collect()
    };
    let q = jitter(&state.q, &mut rng);
    let qdot = jitter(&state.qdot, &mut rng);
    PhaseState::new(q, qdot)
}

/// RK4 trajectory of the true system via the Euler–Lagrange pipeline.
pub fn reference_trajectory<B: BaseFloat>(
    system: &SystemSpec,
    initial: &PhaseState<B>,
    t_final: f64,
    dt: f64,
) -> std::result::Result<Trajectory<B>, IntegrateError<B>> {
    let lagr = true_lagrangian(system);
    integrate(
        &|s: &PhaseState<B>| acceleration(&lagr, s),
        initial,
        t_final,
        dt,
        IntegrateOptions::default(),
    )
}

// ---------------------------------------------------------------------------
// Training samples
// ---------------------------------------------------------------------------

/// Noisy observation: X = (q+ν₁ ⧺ q̇+ν₂), y = q̈+ν₃.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainingSample<B> {
    pub x: Vec<B>,
    pub y: Vec<B>,
}

impl<B: BaseFloat> TrainingSample<B> {
    pub fn dim(&self) -> usize {
        self.y.len()
    }

    pub fn state(&self) -> PhaseState<B> {
        let d = self.dim();
        PhaseState::new(self.x[..d].to_vec(), self.x[d..].to_vec())
    }
}

enum SampleSource<B> {
    /// Kepler: angles φ ~ Uniform(−π, π) on the exact ellipse.
    KeplerExact,
    /// Grid states of a precomputed reference trajectory, drawn uniformly.
    AlongTrajectory(Trajectory<B>),
}

/// Draws training batches for one system. Per-sample randomness comes from an
/// independent counter-based substream (ChaCha stream = sample index), so any
/// parallel evaluation order reproduces the serial batch.
pub struct Sampler<B> {
    system: SystemSpec,
    lagr: TrueLagrangian,
    source: SampleSource<B>,
}

/// Reference-trajectory length used to source samples, per system.
pub fn default_data_span(system: &SystemSpec) -> (f64, f64) {
    match system {
        SystemSpec::Kepler { .. } => (0.0, 0.0),
        SystemSpec::Schwarzschild { .. } => (1000.0, 1e-2),
        SystemSpec::TwoParticle { .. } => (8.0, 1e-2),
    }
}

impl<B: BaseFloat> Sampler<B> {
    /// Build the default sampler: exact states for Kepler, otherwise states
    /// along the system's default reference trajectory.
    pub fn for_system(system: &SystemSpec, seed: u64) -> Result<Self> {
        let (t_final, dt) = default_data_span(system);
        Self::for_system_with(system, seed, t_final, dt)
    }

    pub fn for_system_with(system: &SystemSpec, seed: u64, t_final: f64, dt: f64) -> Result<Self> {
        system.validate()?;
        let source = match system {
            SystemSpec::Kepler { .. } => SampleSource::KeplerExact,
            _ => {
                let initial = default_initial_state::<B>(system, seed)?;
                let traj = reference_trajectory(system, &initial, t_final, dt).map_err(|e| {
                    Error::Domain(format!("reference trajectory for sampling failed: {e}"))
                })?;
                SampleSource::AlongTrajectory(traj)
            }
        };
        Ok(Sampler { system: system.clone(), lagr: true_lagrangian(system), source })
    }

    pub fn system(&self) -> &SystemSpec {
        &self.system
    }

    /// One batch of `n` samples with noise std `sigma`, fully determined by
    /// `seed`.
    pub fn batch(&self, seed: u64, sigma: f64, n: usize) -> Result<Vec<TrainingSample<B>>> {
        let mut out = Vec::with_capacity(n);
        for j in 0..n {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(j as u64);
            out.push(self.draw(&mut rng, sigma)?);
        }
        Ok(out)
    }

    fn draw(&self, rng: &mut ChaCha8Rng, sigma: f64) -> Result<TrainingSample<B>> {
        let (q, qdot, qddot) = match &self.source {
            SampleSource::KeplerExact => {
                let phi = rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI);
                let (q, qd, qdd) = kepler_exact_state(&self.system, phi)?;
                (
                    q.iter().map(|&v| B::from_f64(v)).collect::<Vec<B>>(),
                    qd.iter().map(|&v| B::from_f64(v)).collect::<Vec<B>>(),
                    qdd.iter().map(|&v| B::from_f64(v)).collect::<Vec<B>>(),
                )
            }
            SampleSource::AlongTrajectory(traj) => {
                let idx = rng.gen_range(0..traj.len());
                let state = &traj.states[idx];
                let qdd = acceleration(&self.lagr, state)?;
                (state.q.clone(), state.qdot.clone(), qdd)
            }
        };
        let s = B::from_f64(sigma);
        let noisy = |rng: &mut ChaCha8Rng, v: &[B]| -> Vec<B> {
            v.iter().map(|&c| c + B::standard_normal(rng) * s).collect()
        };
        let mut x = noisy(rng, &q);
        x.extend(noisy(rng, &qdot));
        let y = noisy(rng, &qddot);
        Ok(TrainingSample { x, y })
    }
}

/// Spec-level convenience: one batch straight from a system description.
pub fn sample_batch<B: BaseFloat>(
    system: &SystemSpec,
    seed: u64,
    sigma: f64,
    n: usize,
) -> Result<Vec<TrainingSample<B>>> {
    Sampler::for_system(system, seed)?.batch(seed, sigma, n)
}

// ---------------------------------------------------------------------------
// Dataset file format: CSV `q_0..,qdot_0..,qddot_0..`
// ---------------------------------------------------------------------------

pub fn dataset_csv<B: BaseFloat>(samples: &[TrainingSample<B>]) -> String {
    let d = samples.first().map_or(0, |s| s.dim());
    let mut out = String::new();
    let push_group = |name: &str, out: &mut String| {
        for i in 0..d {
            if !out.is_empty() {
                out.push(',');
            }
            out.push_str(&format!("{name}_{i}"));
        }
    };
    push_group("q", &mut out);
    push_group("qdot", &mut out);
    push_group("qddot", &mut out);
    out.push('\n');
    for s in samples {
        let mut first = true;
        for v in s.x.iter().chain(s.y.iter()) {
            if !first {
                out.push(',');
            }
            out.push_str(&format!("{v}"));
            first = false;
        }
        out.push('\n');
    }
    out
}

pub fn parse_dataset_csv<B: BaseFloat>(text: &str) -> Result<Vec<TrainingSample<B>>> {
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| Error::Format("empty dataset".into()))?;
    let cols = header.split(',').count();
    if cols % 3 != 0 {
        return Err(Error::Format(format!("unexpected dataset header: {header}")));
    }
    let d = cols / 3;
    let mut out = Vec::new();
    for (lineno, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let vals = line
            .split(',')
            .map(|s| s.parse::<B>().map_err(|_| Error::Format(format!("row {}: bad number", lineno + 2))))
            .collect::<Result<Vec<B>>>()?;
        if vals.len() != cols {
            return Err(Error::Format(format!("row {}: wrong column count", lineno + 2)));
        }
        out.push(TrainingSample { x: vals[..2 * d].to_vec(), y: vals[2 * d..].to_vec() });
    }
    Ok(out)
}
