//! Evaluation metrics: relative charge drift δL, δM along a trajectory and
//! the divergence δq between two trajectories.

use serde_json::json;

use crate::dynamics::{
    first_particle_momentum_nn, first_particle_momentum_true, noether_charges, true_charges,
    PhaseState,
};
use crate::error::{Error, Result};
use crate::integrator::Trajectory;
use crate::network::LagrangianModel;
use crate::real::BaseFloat;
use crate::systems::SystemSpec;

/// Charges with ‖C(0)‖ below this cannot normalize a drift series.
pub const ZERO_NORM_FLOOR: f64 = 1e-14;

/// Default number of report rows after decimation.
pub const REPORT_MAX_POINTS: usize = 4096;

fn norm(values: &[f64]) -> f64 {
    values.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// δ(t) = ‖C(t) − C(0)‖₂ / ‖C(0)‖₂ for any charge function along the grid.
pub fn charge_drift<B, F>(traj: &Trajectory<B>, charge_fn: F) -> Result<Vec<f64>>
where
    B: BaseFloat,
    F: Fn(&PhaseState<B>) -> Result<Vec<B>>,
{
    let series: Vec<Vec<f64>> = traj
        .states
        .iter()
        .map(|s| Ok(charge_fn(s)?.iter().map(|v| v.to_f64()).collect()))
        .collect::<Result<_>>()?;
    let c0 = &series[0];
    let n0 = norm(c0);
    if n0 < ZERO_NORM_FLOOR {
        return Err(Error::ZeroNormalizer);
    }
    Ok(series
        .iter()
        .map(|c| {
            let diff: Vec<f64> = c.iter().zip(c0.iter()).map(|(a, b)| a - b).collect();
            norm(&diff) / n0
        })
        .collect())
}

/// Two-particle momentum drift normalized by the first particle's momentum,
/// for initial conditions with zero total momentum:
/// δM(t) = ‖M(t) − M(0)‖₂ / ‖M̃(0)‖₂. Returns (δM_NN, δM_true).
pub fn momentum_drift_zero_normalized<B: BaseFloat>(
    traj: &Trajectory<B>,
    system: &SystemSpec,
    model: &LagrangianModel<B>,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let SystemSpec::TwoParticle { spatial_dim, .. } = system else {
        return Err(Error::InvalidSpec("momentum drift needs a two-particle system".into()));
    };
    let d = *spatial_dim;
    let layout = system.charge_spec();
    let s0 = &traj.states[0];
    let norm_nn = norm(
        &first_particle_momentum_nn(model, s0, d)?
            .iter()
            .map(|v| v.to_f64())
            .collect::<Vec<_>>(),
    );
    let norm_true = norm(
        &first_particle_momentum_true(system, s0)?
            .iter()
            .map(|v| v.to_f64())
            .collect::<Vec<_>>(),
    );
    if norm_nn < ZERO_NORM_FLOOR || norm_true < ZERO_NORM_FLOOR {
        return Err(Error::ZeroNormalizer);
    }
    let momenta_nn: Vec<Vec<f64>> = traj
        .states
        .iter()
        .map(|s| {
            Ok(noether_charges(model, s, &layout)?.values[..d]
                .iter()
                .map(|v| v.to_f64())
                .collect())
        })
        .collect::<Result<_>>()?;
    let momenta_true: Vec<Vec<f64>> = traj
        .states
        .iter()
        .map(|s| {
            Ok(true_charges(system, s)?.values[..d].iter().map(|v| v.to_f64()).collect())
        })
        .collect::<Result<_>>()?;
    let drift = |series: &[Vec<f64>], n0: f64| -> Vec<f64> {
        let c0 = &series[0];
        series
            .iter()
            .map(|c| {
                let diff: Vec<f64> = c.iter().zip(c0.iter()).map(|(a, b)| a - b).collect();
                norm(&diff) / n0
            })
            .collect()
    };
    Ok((drift(&momenta_nn, norm_nn), drift(&momenta_true, norm_true)))
}

/// δq(t) = ‖q_A(t) − q_B(t)‖₂, positions only.
pub fn trajectory_divergence<B: BaseFloat>(
    a: &Trajectory<B>,
    b: &Trajectory<B>,
) -> Result<Vec<f64>> {
    if !a.same_grid(b) {
        return Err(Error::GridMismatch);
    }
    Ok(a.states
        .iter()
        .zip(b.states.iter())
        .map(|(sa, sb)| {
            let diff: Vec<f64> = sa
                .q
                .iter()
                .zip(sb.q.iter())
                .map(|(x, y)| x.to_f64() - y.to_f64())
                .collect();
            norm(&diff)
        })
        .collect())
}

/// Velocity-space counterpart of [`trajectory_divergence`], reported as an
/// extra column.
pub fn velocity_divergence<B: BaseFloat>(
    a: &Trajectory<B>,
    b: &Trajectory<B>,
) -> Result<Vec<f64>> {
    if !a.same_grid(b) {
        return Err(Error::GridMismatch);
    }
    Ok(a.states
        .iter()
        .zip(b.states.iter())
        .map(|(sa, sb)| {
            let diff: Vec<f64> = sa
                .qdot
                .iter()
                .zip(sb.qdot.iter())
                .map(|(x, y)| x.to_f64() - y.to_f64())
                .collect();
            norm(&diff)
        })
        .collect())
}

/// Time series of relative charge deviations, ready to serialize.
#[derive(Debug, Clone)]
pub struct ConservationReport {
    pub times: Vec<f64>,
    /// (column name, series), all on the `times` grid.
    pub columns: Vec<(String, Vec<f64>)>,
    pub metadata: serde_json::Value,
}

/// δL_NN / δL_true (plus δM pair for the two-particle system) along `traj`.
/// The zero-normalized momentum pair is skipped with a metadata flag when
/// even the first particle's momentum vanishes.
pub fn conservation_report<B: BaseFloat>(
    traj: &Trajectory<B>,
    system: &SystemSpec,
    model: &LagrangianModel<B>,
) -> Result<ConservationReport> {
    let layout = system.charge_spec();
    let is_two_particle = matches!(system, SystemSpec::TwoParticle { .. });
    let mut columns = Vec::new();
    let mut metadata = json!({
        "system": system,
        "symmetry": model.symmetry,
    });

    if is_two_particle {
        let d = match system {
            SystemSpec::TwoParticle { spatial_dim, .. } => *spatial_dim,
            _ => unreachable!(),
        };
        // Angular block L^{(ρ,σ)} only; the momentum block gets its own
        // normalizer below.
        let dl_nn = charge_drift(traj, |s| {
            Ok(noether_charges(model, s, &layout)?.values[d..].to_vec())
        })?;
        let dl_true =
            charge_drift(traj, |s| Ok(true_charges(system, s)?.values[d..].to_vec()))?;
        columns.push(("dL_nn".to_string(), dl_nn));
        columns.push(("dL_true".to_string(), dl_true));
        match momentum_drift_zero_normalized(traj, system, model) {
            Ok((dm_nn, dm_true)) => {
                columns.push(("dM_nn".to_string(), dm_nn));
                columns.push(("dM_true".to_string(), dm_true));
            }
            Err(Error::ZeroNormalizer) => {
                metadata["momentum_drift"] = json!("undefined: first-particle momentum is zero");
            }
            Err(e) => return Err(e),
        }
    } else {
        let dl_nn =
            charge_drift(traj, |s| Ok(noether_charges(model, s, &layout)?.values.clone()))?;
        let dl_true = charge_drift(traj, |s| Ok(true_charges(system, s)?.values.clone()))?;
        columns.push(("dL_nn".to_string(), dl_nn));
        columns.push(("dL_true".to_string(), dl_true));
    }
    metadata["rows"] = json!(traj.times.len());
    Ok(ConservationReport { times: traj.times.clone(), columns, metadata })
}

impl ConservationReport {
    pub fn push_column(&mut self, name: &str, series: Vec<f64>) {
        assert_eq!(series.len(), self.times.len());
        self.columns.push((name.to_string(), series));
    }

    /// CSV `t, <columns...>`, decimated to at most `max_points` rows
    /// (`None` = full resolution). The final row is always kept.
    pub fn csv(&self, max_points: Option<usize>) -> String {
        let n = self.times.len();
        let stride = match max_points {
            Some(m) if m > 1 && n > m => n.div_ceil(m),
            _ => 1,
        };
        let mut out = String::from("t");
        for (name, _) in &self.columns {
            out.push(',');
            out.push_str(name);
        }
        out.push('\n');
        let mut rows: Vec<usize> = (0..n).step_by(stride).collect();
        if *rows.last().unwrap() != n - 1 {
            rows.push(n - 1);
        }
        for k in rows {
            out.push_str(&format!("{}", self.times[k]));
            for (_, series) in &self.columns {
                out.push_str(&format!(",{}", series[k]));
            }
            out.push('\n');
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::integrator::Trajectory;

    fn toy_trajectory(charges: &[[f64; 3]]) -> (Trajectory<f64>, Vec<Vec<f64>>) {
        let states: Vec<PhaseState<f64>> =
            charges.iter().map(|c| PhaseState::new(c.to_vec(), vec![0.0; 3])).collect();
        let times: Vec<f64> = (0..charges.len()).map(|k| k as f64).collect();
        (
            Trajectory { times, states, dt: 1.0 },
            charges.iter().map(|c| c.to_vec()).collect(),
        )
    }

    #[test]
    fn constant_charge_series_has_zero_drift() {
        let (traj, _) = toy_trajectory(&[[0.0, 0.0, 1.0]; 5]);
        let drift = charge_drift(&traj, |s| Ok(s.q.clone())).unwrap();
        assert!(drift.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn unit_charge_step_gives_direct_formula() {
        let (traj, _) = toy_trajectory(&[[0.0, 0.0, 1.0], [0.0, 0.0, 1.001]]);
        let drift = charge_drift(&traj, |s| Ok(s.q.clone())).unwrap();
        assert!((drift[1] - 1e-3).abs() < 1e-12);
    }

    #[test]
    fn zero_initial_charge_is_rejected() {
        let (traj, _) = toy_trajectory(&[[0.0, 0.0, 0.0], [0.0, 0.0, 1.0]]);
        assert!(matches!(
            charge_drift(&traj, |s| Ok(s.q.clone())),
            Err(Error::ZeroNormalizer)
        ));
    }

    #[test]
    fn divergence_of_identical_trajectories_is_zero() {
        let (a, _) = toy_trajectory(&[[1.0, 2.0, 3.0], [4.0, 5.0, 6.0]]);
        let dq = trajectory_divergence(&a, &a.clone()).unwrap();
        assert_eq!(dq, vec![0.0, 0.0]);
    }

    #[test]
    fn divergence_requires_matching_grids() {
        let (a, _) = toy_trajectory(&[[0.0; 3], [1.0; 3]]);
        let (b, _) = toy_trajectory(&[[0.0; 3], [1.0; 3], [2.0; 3]]);
        assert!(matches!(trajectory_divergence(&a, &b), Err(Error::GridMismatch)));
    }

    #[test]
    fn perturbation_scale_shows_in_initial_divergence() {
        // A std-σ perturbation in d dimensions has norm ≈ σ√d in expectation.
        use rand::SeedableRng;
        use rand_chacha::ChaCha8Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let sigma = 1e-3;
        let n = 20_000;
        let mut mean_sq = 0.0;
        for _ in 0..n {
            let noise: Vec<f64> =
                (0..3).map(|_| f64::standard_normal(&mut rng) * sigma).collect();
            mean_sq += noise.iter().map(|v| v * v).sum::<f64>();
        }
        let rms = (mean_sq / n as f64).sqrt();
        assert!((rms - sigma * 3.0_f64.sqrt()).abs() < 0.05 * sigma * 3.0_f64.sqrt());
    }

    #[test]
    fn report_csv_decimates_but_keeps_last_row() {
        let n = 10_000;
        let times: Vec<f64> = (0..n).map(|k| k as f64 * 0.01).collect();
        let series: Vec<f64> = (0..n).map(|k| k as f64).collect();
        let report = ConservationReport {
            times,
            columns: vec![("dL_nn".into(), series)],
            metadata: serde_json::json!({}),
        };
        let text = report.csv(Some(4096));
        let rows = text.lines().count() - 1;
        assert!(rows <= 4097, "rows = {rows}");
        assert!(text.lines().last().unwrap().starts_with("99.99"));
        let full = report.csv(None);
        assert_eq!(full.lines().count() - 1, n);
    }
}
