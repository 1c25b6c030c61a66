//! Classical fixed-step RK4 for second-order dynamics q̈ = Φ(q, q̇),
//! integrating the first-order system (q, q̇)' = (q̇, Φ(q, q̇)).

use crate::dynamics::PhaseState;
use crate::error::{Error, Result};
use crate::real::BaseFloat;

/// Default abort threshold on any state component.
pub const DIVERGENCE_GUARD: f64 = 1e6;

/// Time-stamped states on a uniform grid. `times[k] = k · dt · record_every`
/// is computed multiplicatively, not by repeated addition.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory<B> {
    pub times: Vec<f64>,
    pub states: Vec<PhaseState<B>>,
    /// Grid spacing between recorded states.
    pub dt: f64,
}

impl<B: BaseFloat> Trajectory<B> {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn final_state(&self) -> &PhaseState<B> {
        self.states.last().expect("trajectory has at least the initial state")
    }

    pub fn same_grid(&self, other: &Self) -> bool {
        self.times.len() == other.times.len()
            && self.times.iter().zip(other.times.iter()).all(|(a, b)| a == b)
    }
}

#[derive(Debug)]
pub struct DivergenceAbort<B> {
    /// Everything recorded before the guard tripped.
    pub partial: Trajectory<B>,
    pub time: f64,
    pub max_component: f64,
}

#[derive(Debug)]
pub enum IntegrateError<B> {
    Diverged(DivergenceAbort<B>),
    Eval(Error),
}

impl<B> From<Error> for IntegrateError<B> {
    fn from(e: Error) -> Self {
        IntegrateError::Eval(e)
    }
}

impl<B: BaseFloat> std::fmt::Display for IntegrateError<B> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            IntegrateError::Diverged(d) => write!(
                f,
                "trajectory diverged at t = {:.6}: component magnitude {:.3e} exceeds guard",
                d.time, d.max_component
            ),
            IntegrateError::Eval(e) => write!(f, "{e}"),
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct IntegrateOptions {
    /// Record every k-th step (1 = every step).
    pub record_every: usize,
    pub divergence_guard: f64,
}

impl Default for IntegrateOptions {
    fn default() -> Self {
        IntegrateOptions { record_every: 1, divergence_guard: DIVERGENCE_GUARD }
    }
}

fn axpy<B: BaseFloat>(y: &[B], a: B, x: &[B]) -> Vec<B> {
    y.iter().zip(x.iter()).map(|(&yi, &xi)| yi + a * xi).collect()
}

/// One classical RK4 step of size dt.
pub fn rk4_step<B, A>(accel: &A, state: &PhaseState<B>, dt: f64) -> Result<PhaseState<B>>
where
    B: BaseFloat,
    A: Fn(&PhaseState<B>) -> Result<Vec<B>>,
{
    let h = B::from_f64(dt);
    let half = B::from_f64(dt / 2.0);
    let sixth = B::from_f64(dt / 6.0);
    let two = B::from_f64(2.0);

    let k1v = state.qdot.clone();
    let k1a = accel(state)?;
    let s2 = PhaseState::new(axpy(&state.q, half, &k1v), axpy(&state.qdot, half, &k1a));
    let k2v = s2.qdot.clone();
    let k2a = accel(&s2)?;
    let s3 = PhaseState::new(axpy(&state.q, half, &k2v), axpy(&state.qdot, half, &k2a));
    let k3v = s3.qdot.clone();
    let k3a = accel(&s3)?;
    let s4 = PhaseState::new(axpy(&state.q, h, &k3v), axpy(&state.qdot, h, &k3a));
    let k4v = s4.qdot.clone();
    let k4a = accel(&s4)?;

    let combine = |x0: &[B], k1: &[B], k2: &[B], k3: &[B], k4: &[B]| -> Vec<B> {
        x0.iter()
            .zip(k1.iter().zip(k2.iter().zip(k3.iter().zip(k4.iter()))))
            .map(|(&x, (&a, (&b, (&c, &d))))| x + sixth * (a + two * b + two * c + d))
            .collect()
    };
    Ok(PhaseState::new(
        combine(&state.q, &k1v, &k2v, &k3v, &k4v),
        combine(&state.qdot, &k1a, &k2a, &k3a, &k4a),
    ))
}

fn step_count(t_final: f64, dt: f64) -> usize {
    let ratio = t_final / dt;
    let rounded = ratio.round();
    if (ratio - rounded).abs() < 1e-9 {
        rounded as usize
    } else {
        ratio.ceil() as usize
    }
}

/// Integrate up to `t_final` in ⌈T/dt⌉ steps, recording per `opts`.
pub fn integrate<B, A>(
    accel: &A,
    state0: &PhaseState<B>,
    t_final: f64,
    dt: f64,
    opts: IntegrateOptions,
) -> std::result::Result<Trajectory<B>, IntegrateError<B>>
where
    B: BaseFloat,
    A: Fn(&PhaseState<B>) -> Result<Vec<B>>,
{
    assert!(t_final > 0.0 && dt > 0.0, "integration needs positive T and dt");
    let every = opts.record_every.max(1);
    let n_steps = step_count(t_final, dt);
    // Keep the grid uniform: drop a non-aligned tail rather than record it.
    let n_recorded = n_steps / every;
    let mut times = Vec::with_capacity(n_recorded + 1);
    let mut states = Vec::with_capacity(n_recorded + 1);
    times.push(0.0);
    states.push(state0.clone());

    let mut current = state0.clone();
    for k in 1..=(n_recorded * every) {
        current = rk4_step(accel, &current, dt)?;
        let t = k as f64 * dt;
        let max_component = current
            .q
            .iter()
            .chain(current.qdot.iter())
            .fold(0.0_f64, |m, v| m.max(v.to_f64().abs()));
        if !max_component.is_finite() || max_component > opts.divergence_guard {
            return Err(IntegrateError::Diverged(DivergenceAbort {
                partial: Trajectory { times, states, dt: dt * every as f64 },
                time: t,
                max_component,
            }));
        }
        if k % every == 0 {
            times.push(t);
            states.push(current.clone());
        }
    }
    Ok(Trajectory { times, states, dt: dt * every as f64 })
}

// ---------------------------------------------------------------------------
// Trajectory file format: CSV `t, q_0.., qdot_0..`
// ---------------------------------------------------------------------------

pub fn trajectory_csv<B: BaseFloat>(traj: &Trajectory<B>) -> String {
    let d = traj.states.first().map_or(0, |s| s.dim());
    let mut out = String::from("t");
    for i in 0..d {
        out.push_str(&format!(",q_{i}"));
    }
    for i in 0..d {
        out.push_str(&format!(",qdot_{i}"));
    }
    out.push('\n');
    for (t, s) in traj.times.iter().zip(traj.states.iter()) {
        out.push_str(&format!("{t}"));
        for v in s.q.iter().chain(s.qdot.iter()) {
            out.push_str(&format!(",{v}"));
        }
        out.push('\n');
    }
    out
}

pub fn parse_trajectory_csv<B: BaseFloat>(text: &str) -> Result<Trajectory<B>> {
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| Error::Format("empty trajectory file".into()))?;
    let cols = header.split(',').count();
    if cols < 3 || (cols - 1) % 2 != 0 {
        return Err(Error::Format(format!("unexpected trajectory header: {header}")));
    }
    let d = (cols - 1) / 2;
    let mut times = Vec::new();
    let mut states = Vec::new();
    for (lineno, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != cols {
            return Err(Error::Format(format!("row {}: wrong column count", lineno + 2)));
        }
        let t: f64 = fields[0]
            .parse()
            .map_err(|_| Error::Format(format!("row {}: bad time stamp", lineno + 2)))?;
        let parse = |s: &str| -> Result<B> {
            s.parse::<B>().map_err(|_| Error::Format(format!("row {}: bad number", lineno + 2)))
        };
        let q = fields[1..=d].iter().map(|s| parse(s)).collect::<Result<Vec<B>>>()?;
        let qdot = fields[d + 1..].iter().map(|s| parse(s)).collect::<Result<Vec<B>>>()?;
        times.push(t);
        states.push(PhaseState::new(q, qdot));
    }
    if states.is_empty() {
        return Err(Error::Format("trajectory file has no rows".into()));
    }
    let dt = if times.len() > 1 { times[1] - times[0] } else { 0.0 };
    Ok(Trajectory { times, states, dt })
}
