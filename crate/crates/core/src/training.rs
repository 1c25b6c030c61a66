//! Fit the network weights to noisy acceleration samples: MSE loss through
//! the Euler–Lagrange solve, Adam updates, cosine learning-rate decay.
//!
//! The weight gradient is exact. For one sample with prediction a solving
//! Aᵀa = b (A = J_{q̇,q̇}, b = ∂L/∂q − J_{q,q̇}ᵀ q̇) and residual r = 2(a−y),
//! the adjoint λ = A⁻¹r turns the derivative of the solve into two
//! directional contractions of L,
//!
//!   dℓ/dθ = ∂/∂θ [ D_{(λ,0)} L − D_{(q̇,a)} D_{(0,λ)} L ],
//!
//! each of which is one reverse sweep over the network run on (two-tangent)
//! dual scalars. No finite differences and no explicit inverse anywhere.

use std::time::Instant;

use crate::dual::{dual2_seed, Dual, Dual2};
use crate::dynamics::{acceleration, acceleration_solve};
use crate::error::{Error, Result};
use crate::network::{ForwardPass, LagrangianModel};
use crate::real::{BaseFloat, Real};
use crate::seeds::{split_seed, stream};
use crate::systems::{Sampler, SystemSpec, TrainingSample};

use crate::diffcore::Lagrangian;

#[derive(Debug, Clone)]
pub struct TrainConfig {
    pub epochs: usize,
    pub steps_per_epoch: usize,
    pub batch_size: usize,
    pub lr_start: f64,
    pub lr_end: f64,
    pub noise_std: f64,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epochs: 2500,
            steps_per_epoch: 100,
            batch_size: 128,
            lr_start: 1e-3,
            lr_end: 1e-5,
            noise_std: 1e-3,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.steps_per_epoch == 0 || self.batch_size == 0 {
            return Err(Error::Training("steps per epoch and batch size must be positive".into()));
        }
        if !(self.lr_start > 0.0) || !(self.lr_end > 0.0) || self.lr_end > self.lr_start {
            return Err(Error::Training("need 0 < lr_end <= lr_start".into()));
        }
        if self.noise_std < 0.0 {
            return Err(Error::Training("noise std must be non-negative".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Default)]
pub struct LossHistory {
    pub epoch_mse: Vec<f64>,
    /// Cumulative wall-clock seconds at the end of each epoch. Kept out of
    /// the loss CSV so re-runs stay byte-identical; written to the metadata
    /// sidecar instead.
    pub wall_seconds: Vec<f64>,
}

impl LossHistory {
    pub fn csv(&self) -> String {
        let mut out = String::from("epoch,mse\n");
        for (e, mse) in self.epoch_mse.iter().enumerate() {
            out.push_str(&format!("{},{}\n", e + 1, mse));
        }
        out
    }
}

/// Cosine decay from `lr_start` at step 0 to `lr_end` at `total_steps`.
pub fn cosine_lr(step: usize, total_steps: usize, lr_start: f64, lr_end: f64) -> f64 {
    debug_assert!(step <= total_steps);
    let progress = if total_steps == 0 { 1.0 } else { step as f64 / total_steps as f64 };
    lr_end + (lr_start - lr_end) * (1.0 + (std::f64::consts::PI * progress).cos()) / 2.0
}

/// Mean squared error (1/N) Σ ‖Φ(X⁽ʲ⁾) − ŷ⁽ʲ⁾‖² of the acceleration map.
pub fn mse_loss<B: BaseFloat, F: Lagrangian<B>>(f: &F, batch: &[TrainingSample<B>]) -> Result<B> {
    if batch.is_empty() {
        return Err(Error::Training("loss of an empty batch".into()));
    }
    let mut total = B::ZERO;
    for sample in batch {
        let a = acceleration(f, &sample.state())?;
        for (ai, yi) in a.iter().zip(sample.y.iter()) {
            let e = *ai - *yi;
            total += e * e;
        }
    }
    Ok(total * B::from_f64(1.0 / batch.len() as f64))
}

/// Accumulate per-weight gradients of one selected component of the network
/// output. `select_prod(δ_i, h_j)` extracts that component from the product
/// δ_i·h_j; `select_one` from δ_i alone (bias entries).
fn accumulate_weight_grads<B, S, FP, FS>(
    model: &LagrangianModel<B>,
    pass: &ForwardPass<S>,
    deltas: &[Vec<S>],
    sign: B,
    select_prod: FP,
    select_one: FS,
    grad: &mut [B],
) where
    B: BaseFloat,
    S: Real<Base = B>,
    FP: Fn(S, S) -> B,
    FS: Fn(S) -> B,
{
    let mut k = 0;
    for (l, layer) in model.layers.iter().enumerate() {
        let input: &[S] = if l == 0 { &pass.feats } else { &pass.post[l - 1] };
        for i in 0..layer.rows {
            let di = deltas[l][i];
            let row = &mut grad[k + i * layer.cols..k + (i + 1) * layer.cols];
            for (g, h) in row.iter_mut().zip(input.iter()) {
                *g += sign * select_prod(di, *h);
            }
        }
        k += layer.weights.len();
        if layer.biases.is_some() {
            for i in 0..layer.rows {
                grad[k + i] += sign * select_one(deltas[l][i]);
            }
            k += layer.rows;
        }
    }
    debug_assert_eq!(k, grad.len());
}

/// Exact d‖Φ(X)−y‖²/dθ for one sample, accumulated into `grad`. Returns the
/// sample's squared-error contribution.
pub(crate) fn sample_loss_gradient<B: BaseFloat>(
    model: &LagrangianModel<B>,
    sample: &TrainingSample<B>,
    grad: &mut [B],
) -> Result<f64> {
    let state = sample.state();
    let solve = acceleration_solve(model, &state)?;
    let d = model.input_dim;

    let mut loss = 0.0;
    let two = B::from_f64(2.0);
    let mut residual = Vec::with_capacity(d);
    for i in 0..d {
        let e = solve.accel[i] - sample.y[i];
        loss += e.to_f64() * e.to_f64();
        residual.push(two * e);
    }
    // lu_ht factors Aᵀ, so its transpose-solve inverts A itself.
    let lambda = solve.lu_ht.solve_transpose(&residual);

    // Pass A: mixed contraction D_{(q̇,a)} D_{(0,λ)} L, weight sign −1.
    let q_a: Vec<Dual2<B>> =
        (0..d).map(|i| dual2_seed(state.q[i], state.qdot[i], B::ZERO)).collect();
    let qd_a: Vec<Dual2<B>> =
        (0..d).map(|i| dual2_seed(state.qdot[i], solve.accel[i], lambda[i])).collect();
    let feats = model.symmetry.apply(&q_a, &qd_a)?;
    let pass = model.forward_cached(feats);
    let deltas = model.backward_deltas(&pass);
    accumulate_weight_grads(
        model,
        &pass,
        &deltas,
        -B::ONE,
        |a, b| {
            a.re.re * b.du.du + a.re.du * b.du.re + a.du.re * b.re.du + a.du.du * b.re.re
        },
        |a| a.du.du,
        grad,
    );

    // Pass B: first-order contraction D_{(λ,0)} L, weight sign +1.
    let q_b: Vec<Dual<B>> = (0..d).map(|i| Dual::new(state.q[i], lambda[i])).collect();
    let qd_b: Vec<Dual<B>> = (0..d).map(|i| Dual::new(state.qdot[i], B::ZERO)).collect();
    let feats = model.symmetry.apply(&q_b, &qd_b)?;
    let pass = model.forward_cached(feats);
    let deltas = model.backward_deltas(&pass);
    accumulate_weight_grads(
        model,
        &pass,
        &deltas,
        B::ONE,
        |a, b| a.re * b.du + a.du * b.re,
        |a| a.du,
        grad,
    );

    Ok(loss)
}

/// Batch loss and exact gradient, averaged over samples. Accumulation order
/// is the fixed sample order, so results are reproducible.
pub(crate) fn batch_gradient<B: BaseFloat>(
    model: &LagrangianModel<B>,
    batch: &[TrainingSample<B>],
) -> Result<(f64, Vec<B>)> {
    let mut grad = vec![B::ZERO; model.param_count()];
    let mut loss = 0.0;
    for sample in batch {
        loss += sample_loss_gradient(model, sample, &mut grad)?;
    }
    let inv_n = B::from_f64(1.0 / batch.len() as f64);
    for g in &mut grad {
        *g = *g * inv_n;
    }
    Ok((loss / batch.len() as f64, grad))
}

struct Adam<B> {
    m: Vec<B>,
    v: Vec<B>,
    t: i32,
}

impl<B: BaseFloat> Adam<B> {
    const BETA1: f64 = 0.9;
    const BETA2: f64 = 0.999;
    const EPS: f64 = 1e-8;

    fn new(n: usize) -> Self {
        Adam { m: vec![B::ZERO; n], v: vec![B::ZERO; n], t: 0 }
    }

    fn step(&mut self, params: &mut [B], grad: &[B], lr: f64) {
        self.t += 1;
        let b1 = B::from_f64(Self::BETA1);
        let b2 = B::from_f64(Self::BETA2);
        let one_m_b1 = B::from_f64(1.0 - Self::BETA1);
        let one_m_b2 = B::from_f64(1.0 - Self::BETA2);
        let bc1 = B::from_f64(1.0 - Self::BETA1.powi(self.t));
        let bc2 = B::from_f64(1.0 - Self::BETA2.powi(self.t));
        let lr = B::from_f64(lr);
        let eps = B::from_f64(Self::EPS);
        for k in 0..params.len() {
            let g = grad[k];
            self.m[k] = b1 * self.m[k] + one_m_b1 * g;
            self.v[k] = b2 * self.v[k] + one_m_b2 * g * g;
            let m_hat = self.m[k] / bc1;
            let v_hat = self.v[k] / bc2;
            params[k] -= lr * m_hat / (v_hat.sqrt() + eps);
        }
    }
}

/// Train on freshly sampled batches. Returns the trained model and the
/// per-epoch loss history. Deterministic for a fixed seed.
pub fn train<B: BaseFloat>(
    model: &LagrangianModel<B>,
    system: &SystemSpec,
    config: &TrainConfig,
) -> Result<(LagrangianModel<B>, LossHistory)> {
    train_with_callback(model, system, config, |_, _, _| {})
}

/// `on_epoch(epoch_index, epoch_mse, model)` fires after each epoch, for
/// checkpointing.
pub fn train_with_callback<B, C>(
    model: &LagrangianModel<B>,
    system: &SystemSpec,
    config: &TrainConfig,
    mut on_epoch: C,
) -> Result<(LagrangianModel<B>, LossHistory)>
where
    B: BaseFloat,
    C: FnMut(usize, f64, &LagrangianModel<B>),
{
    config.validate()?;
    system.validate()?;
    if model.input_dim != system.dim() {
        return Err(Error::DimensionMismatch { expected: system.dim(), got: model.input_dim });
    }
    if !system.supports_symmetry(&model.symmetry) {
        return Err(Error::LayoutMismatch(format!(
            "symmetry {:?} does not act on the {:?} state layout",
            model.symmetry, system
        )));
    }

    let data_seed = split_seed(config.seed, stream::DATA);
    let sampler = Sampler::<B>::for_system(system, data_seed)?;

    let mut trained = model.clone();
    let mut params = trained.flatten_params();
    let mut adam = Adam::new(params.len());
    let mut history = LossHistory::default();
    let total_steps = config.epochs * config.steps_per_epoch;
    let started = Instant::now();

    for epoch in 0..config.epochs {
        let mut epoch_loss = 0.0;
        let mut completed = 0usize;
        let mut skipped = 0usize;
        for step in 0..config.steps_per_epoch {
            let global = epoch * config.steps_per_epoch + step;
            let batch_seed = split_seed(data_seed, 0x1000 + global as u64);
            let batch = sampler.batch(batch_seed, config.noise_std, config.batch_size)?;
            match batch_gradient(&trained, &batch) {
                Ok((loss, grad)) => {
                    if !loss.is_finite() {
                        return Err(Error::Training(format!(
                            "non-finite loss at epoch {epoch}, step {step}"
                        )));
                    }
                    let lr = cosine_lr(global, total_steps, config.lr_start, config.lr_end);
                    adam.step(&mut params, &grad, lr);
                    trained.set_params(&params);
                    epoch_loss += loss;
                    completed += 1;
                }
                // A singular acceleration solve poisons the whole batch:
                // skip it, give up if that keeps happening.
                Err(Error::SingularHessian { .. }) => skipped += 1,
                Err(e) => return Err(e),
            }
        }
        if skipped * 100 > config.steps_per_epoch {
            return Err(Error::Training(format!(
                "epoch {epoch}: {skipped}/{} batches skipped (>1%)",
                config.steps_per_epoch
            )));
        }
        let mse = if completed > 0 { epoch_loss / completed as f64 } else { f64::NAN };
        if !mse.is_finite() {
            return Err(Error::Training(format!("epoch {epoch}: no usable batches")));
        }
        history.epoch_mse.push(mse);
        history.wall_seconds.push(started.elapsed().as_secs_f64());
        on_epoch(epoch, mse, &trained);
    }
    Ok((trained, history))
}
