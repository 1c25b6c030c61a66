//! From a Lagrangian to dynamics: the Euler–Lagrange acceleration map
//! `q̈ = J_{q̇,q̇}^{-T} (∂L/∂q − J_{q,q̇}ᵀ q̇)` and the Noether charges of the
//! rotation/translation groups.

use crate::diffcore::Lagrangian;
use crate::error::{Error, Result};
use crate::invariants::SymmetrySpec;
use crate::linalg::LuFactors;
use crate::real::BaseFloat;
use crate::systems::SystemSpec;
use serde::{Deserialize, Serialize};

/// Reciprocal-condition floor below which the velocity Hessian is treated as
/// singular (a degenerate learned Lagrangian).
pub const RCOND_FLOOR: f64 = 1e-12;

/// Generalized coordinates and velocities of dimension d.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseState<B> {
    pub q: Vec<B>,
    pub qdot: Vec<B>,
}

impl<B: BaseFloat> PhaseState<B> {
    pub fn new(q: Vec<B>, qdot: Vec<B>) -> Self {
        assert_eq!(q.len(), qdot.len(), "q and q̇ must have the same dimension");
        PhaseState { q, qdot }
    }

    pub fn dim(&self) -> usize {
        self.q.len()
    }

    pub fn is_finite(&self) -> bool {
        self.q.iter().all(|v| v.is_finite()) && self.qdot.iter().all(|v| v.is_finite())
    }

    pub fn cast<C: BaseFloat>(&self) -> PhaseState<C> {
        PhaseState {
            q: self.q.iter().map(|v| C::from_f64(v.to_f64())).collect(),
            qdot: self.qdot.iter().map(|v| C::from_f64(v.to_f64())).collect(),
        }
    }
}

/// Named conserved quantities evaluated at one state.
#[derive(Debug, Clone)]
pub struct ChargeVector<B> {
    pub labels: Vec<String>,
    pub values: Vec<B>,
}

impl<B: BaseFloat> ChargeVector<B> {
    pub fn norm(&self) -> f64 {
        self.values.iter().map(|v| v.to_f64() * v.to_f64()).sum::<f64>().sqrt()
    }
}

/// Factored transposed velocity Hessian and the resulting acceleration;
/// training reuses the factorization for the adjoint solve.
pub(crate) struct AccelSolve<B> {
    pub lu_ht: LuFactors<B>,
    pub accel: Vec<B>,
}

pub(crate) fn acceleration_solve<B: BaseFloat, F: Lagrangian<B>>(
    f: &F,
    state: &PhaseState<B>,
) -> Result<AccelSolve<B>> {
    let bundle = f.bundle(state)?;
    let d = f.dim();
    // b = ∂L/∂q − J_{q,q̇}ᵀ q̇
    let mut b = bundle.grad_q.clone();
    for i in 0..d {
        for j in 0..d {
            b[i] -= bundle.j_q_qdot.get(j, i) * state.qdot[j];
        }
    }
    let ht = bundle.j_qdot_qdot.transpose();
    let lu_ht = LuFactors::factor(&ht)?;
    let rcond = lu_ht.rcond(ht.norm1());
    if rcond < RCOND_FLOOR {
        return Err(Error::SingularHessian { rcond });
    }
    let accel = lu_ht.solve(&b);
    if accel.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("acceleration solve"));
    }
    Ok(AccelSolve { lu_ht, accel })
}

/// The acceleration map Φ(q, q̇) = q̈, one linear solve against the transposed
/// velocity Hessian (no explicit inverse).
pub fn acceleration<B: BaseFloat, F: Lagrangian<B>>(
    f: &F,
    state: &PhaseState<B>,
) -> Result<Vec<B>> {
    Ok(acceleration_solve(f, state)?.accel)
}

fn cross3<B: BaseFloat>(a: &[B], b: &[B]) -> [B; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

fn rotational3_labels() -> Vec<String> {
    vec!["L_x".into(), "L_y".into(), "L_z".into()]
}

fn two_particle_labels(dim: usize) -> Vec<String> {
    let mut labels: Vec<String> = (1..=dim).map(|a| format!("M_{a}")).collect();
    for r in 1..=dim {
        for s in (r + 1)..=dim {
            labels.push(format!("L_{r}{s}"));
        }
    }
    labels
}

/// Pair momenta with positions into the two-particle conserved set
/// (M⁽α⁾ = p⁽¹⁾_α + p⁽²⁾_α; L⁽ρ,σ⁾ = p⁽¹⁾_ρ x⁽¹⁾_σ − p⁽¹⁾_σ x⁽¹⁾_ρ + ⋯).
fn two_particle_charges<B: BaseFloat>(dim: usize, q: &[B], p: &[B]) -> Vec<B> {
    let (x1, x2) = (&q[..dim], &q[dim..]);
    let (p1, p2) = (&p[..dim], &p[dim..]);
    let mut values: Vec<B> = (0..dim).map(|a| p1[a] + p2[a]).collect();
    for r in 0..dim {
        for s in (r + 1)..dim {
            values.push(p1[r] * x1[s] - p1[s] * x1[r] + p2[r] * x2[s] - p2[s] * x2[r]);
        }
    }
    values
}

/// Noether charges of the model at `state`. The spec names the *state
/// layout*, so an unconstrained model is evaluated by passing the layout of
/// the system it was trained on (e.g. `KeplerRotational`), not its own
/// `None` spec.
pub fn noether_charges<B: BaseFloat, F: Lagrangian<B>>(
    f: &F,
    state: &PhaseState<B>,
    spec: &SymmetrySpec,
) -> Result<ChargeVector<B>> {
    if state.dim() != spec.state_dim() {
        return Err(Error::LayoutMismatch(format!(
            "charges for {spec:?} need d={}, state has d={}",
            spec.state_dim(),
            state.dim()
        )));
    }
    if state.dim() != f.dim() {
        return Err(Error::DimensionMismatch { expected: f.dim(), got: state.dim() });
    }
    let (_, p) = f.gradients(state)?;
    match *spec {
        SymmetrySpec::KeplerRotational => Ok(ChargeVector {
            labels: rotational3_labels(),
            values: cross3(&state.q, &p).to_vec(),
        }),
        SymmetrySpec::SchwarzschildRotational => Ok(ChargeVector {
            labels: rotational3_labels(),
            values: cross3(&state.q[..3], &p[..3]).to_vec(),
        }),
        SymmetrySpec::Rotational { spatial_dim }
        | SymmetrySpec::Translational { spatial_dim }
        | SymmetrySpec::RotoTranslational { spatial_dim } => Ok(ChargeVector {
            labels: two_particle_labels(spatial_dim),
            values: two_particle_charges(spatial_dim, &state.q, &p),
        }),
        SymmetrySpec::None { .. } => Err(Error::InvalidSpec(
            "charge layout is ambiguous for an unconstrained spec; pass the system layout".into(),
        )),
    }
}

/// Closed-form charges of the true system — no differentiation involved.
pub fn true_charges<B: BaseFloat>(
    system: &SystemSpec,
    state: &PhaseState<B>,
) -> Result<ChargeVector<B>> {
    if state.dim() != system.dim() {
        return Err(Error::DimensionMismatch { expected: system.dim(), got: state.dim() });
    }
    match *system {
        SystemSpec::Kepler { mass, .. } => {
            let m = B::from_f64(mass);
            let values = cross3(&state.q, &state.qdot).map(|v| v * m);
            Ok(ChargeVector { labels: rotational3_labels(), values: values.to_vec() })
        }
        SystemSpec::Schwarzschild { .. } => Ok(ChargeVector {
            labels: rotational3_labels(),
            values: cross3(&state.q[..3], &state.qdot[..3]).to_vec(),
        }),
        SystemSpec::TwoParticle { spatial_dim, m1, m2, .. } => {
            let (m1, m2) = (B::from_f64(m1), B::from_f64(m2));
            let p: Vec<B> = state
                .qdot
                .iter()
                .enumerate()
                .map(|(i, &v)| if i < spatial_dim { v * m1 } else { v * m2 })
                .collect();
            Ok(ChargeVector {
                labels: two_particle_labels(spatial_dim),
                values: two_particle_charges(spatial_dim, &state.q, &p),
            })
        }
    }
}

/// The first particle's momentum, used as the normalizer when the total
/// momentum starts at zero: M̃_NN = ∂L/∂ẋ⁽¹⁾, M̃_true = m₁ ẋ⁽¹⁾.
pub fn first_particle_momentum_nn<B: BaseFloat, F: Lagrangian<B>>(
    f: &F,
    state: &PhaseState<B>,
    spatial_dim: usize,
) -> Result<Vec<B>> {
    let (_, p) = f.gradients(state)?;
    Ok(p[..spatial_dim].to_vec())
}

pub fn first_particle_momentum_true<B: BaseFloat>(
    system: &SystemSpec,
    state: &PhaseState<B>,
) -> Result<Vec<B>> {
    match *system {
        SystemSpec::TwoParticle { spatial_dim, m1, .. } => Ok(state.qdot[..spatial_dim]
            .iter()
            .map(|&v| v * B::from_f64(m1))
            .collect()),
        _ => Err(Error::InvalidSpec("first-particle momentum needs a two-particle system".into())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diffcore::test_support::Harmonic;
    use crate::real::Real;

    #[test]
    fn harmonic_acceleration_is_minus_q() {
        let f = Harmonic { dim: 1 };
        let a = acceleration(&f, &PhaseState::new(vec![2.0], vec![0.0])).unwrap();
        assert!((a[0] + 2.0).abs() < 1e-12);
    }

    #[test]
    fn gauge_shift_leaves_acceleration_unchanged() {
        // Adding a constant to L does not change the equations of motion.
        struct Shifted {
            c: f64,
        }
        impl Lagrangian<f64> for Shifted {
            fn dim(&self) -> usize {
                2
            }
            fn eval<S: Real<Base = f64>>(&self, q: &[S], qdot: &[S]) -> crate::error::Result<S> {
                let k = crate::real::dot(qdot, qdot).scale(0.5);
                let v = crate::real::dot(q, q).scale(0.5);
                Ok(k - v + S::constant(self.c))
            }
        }
        let st = PhaseState::new(vec![0.4, -1.1], vec![0.2, 0.9]);
        let a0 = acceleration(&Shifted { c: 0.0 }, &st).unwrap();
        let a1 = acceleration(&Shifted { c: 1234.5 }, &st).unwrap();
        for k in 0..2 {
            assert!((a0[k] - a1[k]).abs() <= 1e-12);
        }
    }

    #[test]
    fn degenerate_lagrangian_reports_singular_hessian() {
        // L = q·q̇ has a vanishing velocity Hessian.
        struct Degenerate;
        impl Lagrangian<f64> for Degenerate {
            fn dim(&self) -> usize {
                2
            }
            fn eval<S: Real<Base = f64>>(&self, q: &[S], qdot: &[S]) -> crate::error::Result<S> {
                Ok(crate::real::dot(q, qdot))
            }
        }
        let st = PhaseState::new(vec![1.0, 2.0], vec![0.5, -0.5]);
        assert!(matches!(
            acceleration(&Degenerate, &st),
            Err(Error::SingularHessian { .. })
        ));
    }

    #[test]
    fn kepler_style_charges_reduce_to_cross_product() {
        // L = m q̇²/2 + α/|q| with m = 1: L_NN = q × ∂L/∂q̇ = q × q̇.
        struct Kepler;
        impl Lagrangian<f64> for Kepler {
            fn dim(&self) -> usize {
                3
            }
            fn eval<S: Real<Base = f64>>(&self, q: &[S], qdot: &[S]) -> crate::error::Result<S> {
                let k = crate::real::dot(qdot, qdot).scale(0.5);
                Ok(k + crate::real::dot(q, q).sqrt().recip())
            }
        }
        let st = PhaseState::new(vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0]);
        let c = noether_charges(&Kepler, &st, &SymmetrySpec::KeplerRotational).unwrap();
        assert_eq!(c.labels, vec!["L_x", "L_y", "L_z"]);
        assert!((c.values[0]).abs() < 1e-14);
        assert!((c.values[1]).abs() < 1e-14);
        assert!((c.values[2] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn parallel_momentum_gives_zero_rotational_charge() {
        // ∂L/∂q̇ ∝ q ⇒ ε-antisymmetry kills the charge.
        struct Aligned;
        impl Lagrangian<f64> for Aligned {
            fn dim(&self) -> usize {
                3
            }
            fn eval<S: Real<Base = f64>>(&self, q: &[S], qdot: &[S]) -> crate::error::Result<S> {
                Ok(crate::real::dot(q, qdot))
            }
        }
        let st = PhaseState::new(vec![0.3, -1.0, 2.0], vec![0.0, 0.0, 0.0]);
        let c = noether_charges(&Aligned, &st, &SymmetrySpec::KeplerRotational).unwrap();
        for v in c.values {
            assert!(v.abs() < 1e-14);
        }
    }

    #[test]
    fn two_particle_true_momentum_cancels() {
        let system = SystemSpec::TwoParticle {
            spatial_dim: 4,
            m1: 1.0,
            m2: 0.8,
            mu: 1.0,
            kappa: 1.0,
        };
        let mut qdot = vec![0.0; 8];
        qdot[0] = 1.0;
        qdot[4] = -1.25;
        let st = PhaseState::new(vec![0.0; 8], qdot);
        let c = true_charges(&system, &st).unwrap();
        assert_eq!(c.labels.len(), 10); // 4 momenta + 6 angular components
        for a in 0..4 {
            assert!(c.values[a].abs() < 1e-15, "M_{a} = {}", c.values[a]);
        }
    }

    #[test]
    fn two_particle_charge_count_is_d_plus_d_choose_2() {
        let labels = two_particle_labels(4);
        assert_eq!(labels.len(), 4 + 6);
        assert_eq!(labels[4], "L_12");
        assert_eq!(labels[9], "L_34");
    }
}
