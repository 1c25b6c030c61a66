//! The Lagrangian network: symmetry-enforcing layer, two hidden softplus
//! layers and one bias-free linear output unit.
//!
//! Derivatives come from running the hand-written forward/backward passes on
//! generic scalars. A reverse sweep on plain floats gives ∂L/∂(q,q̇); the same
//! sweep on dual scalars gives Hessian columns (forward-over-reverse); on
//! two-tangent duals it gives the third-order contractions the trainer needs.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::diffcore::{DerivativeBundle, Lagrangian};
use crate::dual::Dual;
use crate::dynamics::PhaseState;
use crate::error::{Error, Result};
use crate::invariants::SymmetrySpec;
use crate::linalg::SquareMatrix;
use crate::real::{BaseFloat, Real};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Softplus,
    Identity,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DenseLayer<B> {
    pub rows: usize,
    pub cols: usize,
    /// Row-major `rows × cols`.
    pub weights: Vec<B>,
    /// Absent on the output layer.
    pub biases: Option<Vec<B>>,
    pub activation: Activation,
}

impl<B: BaseFloat> DenseLayer<B> {
    fn affine<S: Real<Base = B>>(&self, input: &[S]) -> Vec<S> {
        debug_assert_eq!(input.len(), self.cols);
        let mut out = Vec::with_capacity(self.rows);
        for i in 0..self.rows {
            let row = &self.weights[i * self.cols..(i + 1) * self.cols];
            let mut acc = match &self.biases {
                Some(b) => S::constant(b[i]),
                None => S::zero(),
            };
            for (x, &w) in input.iter().zip(row) {
                acc += x.scale(w);
            }
            out.push(acc);
        }
        out
    }

    /// Wᵀ δ, the pullback through the affine map.
    fn pullback<S: Real<Base = B>>(&self, delta: &[S]) -> Vec<S> {
        let mut out = vec![S::zero(); self.cols];
        for i in 0..self.rows {
            let row = &self.weights[i * self.cols..(i + 1) * self.cols];
            let di = delta[i];
            for (o, &w) in out.iter_mut().zip(row) {
                *o += di.scale(w);
            }
        }
        out
    }
}

/// Dense Lagrangian network `L_NN = D_L ∘ … ∘ D_1 ∘ S`.
#[derive(Debug, Clone, PartialEq)]
pub struct LagrangianModel<B> {
    pub symmetry: SymmetrySpec,
    pub input_dim: usize,
    pub n_hidden: usize,
    pub layers: Vec<DenseLayer<B>>,
}

/// Activations cached by one forward sweep: `post[l]` is the output of layer
/// `l`, `sig[l]` is sigmoid(z_l) for softplus layers (softplus' = sigmoid).
pub(crate) struct ForwardPass<S> {
    pub feats: Vec<S>,
    pub post: Vec<Vec<S>>,
    pub sig: Vec<Option<Vec<S>>>,
}

impl<S: Real> ForwardPass<S> {
    pub fn output(&self) -> S {
        self.post.last().unwrap()[0]
    }
}

fn softplus_and_sigmoid<S: Real>(z: S) -> (S, S) {
    if z.primal() > S::Base::ZERO {
        let e = (-z).exp();
        (z + e.ln_1p(), (e + S::one()).recip())
    } else {
        let e = z.exp();
        (e.ln_1p(), e * (e + S::one()).recip())
    }
}

impl<B: BaseFloat> LagrangianModel<B> {
    /// Fresh model with the paper's initialization: zero-mean normal weights
    /// with std 2/√n_h (first hidden), 1/√n_h (later hidden), √n_h (output);
    /// all biases zero. Deterministic in the seed.
    pub fn init(seed: u64, symmetry: SymmetrySpec, input_dim: usize, n_hidden: usize) -> Result<Self> {
        Self::init_with_depth(seed, symmetry, input_dim, n_hidden, 2)
    }

    /// Same, with a configurable number of hidden layers (default is 2).
    pub fn init_with_depth(
        seed: u64,
        symmetry: SymmetrySpec,
        input_dim: usize,
        n_hidden: usize,
        hidden_layers: usize,
    ) -> Result<Self> {
        symmetry.validate()?;
        if input_dim != symmetry.state_dim() {
            return Err(Error::InvalidSpec(format!(
                "symmetry {symmetry:?} acts on d={}, requested d={input_dim}",
                symmetry.state_dim()
            )));
        }
        if n_hidden < 1 || hidden_layers < 1 {
            return Err(Error::InvalidSpec("need at least one hidden unit and layer".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n_features = symmetry.feature_count();
        let sqrt_nh = (n_hidden as f64).sqrt();
        let mut layers = Vec::with_capacity(hidden_layers + 1);
        let mut in_width = n_features;
        for l in 0..hidden_layers {
            let std = if l == 0 { 2.0 / sqrt_nh } else { 1.0 / sqrt_nh };
            layers.push(random_layer(&mut rng, n_hidden, in_width, std, true, Activation::Softplus));
            in_width = n_hidden;
        }
        layers.push(random_layer(&mut rng, 1, in_width, sqrt_nh, false, Activation::Identity));
        Ok(LagrangianModel { symmetry, input_dim, n_hidden, layers })
    }

    pub fn forward<S: Real<Base = B>>(&self, q: &[S], qdot: &[S]) -> Result<S> {
        let feats = self.symmetry.apply(q, qdot)?;
        Ok(self.forward_cached(feats).output())
    }

    pub(crate) fn forward_cached<S: Real<Base = B>>(&self, feats: Vec<S>) -> ForwardPass<S> {
        let mut post = Vec::with_capacity(self.layers.len());
        let mut sig = Vec::with_capacity(self.layers.len());
        let mut current = feats.clone();
        for layer in &self.layers {
            let z = layer.affine(&current);
            match layer.activation {
                Activation::Softplus => {
                    let mut h = Vec::with_capacity(z.len());
                    let mut s = Vec::with_capacity(z.len());
                    for zi in z {
                        let (hi, si) = softplus_and_sigmoid(zi);
                        h.push(hi);
                        s.push(si);
                    }
                    current = h.clone();
                    post.push(h);
                    sig.push(Some(s));
                }
                Activation::Identity => {
                    current = z.clone();
                    post.push(z);
                    sig.push(None);
                }
            }
        }
        ForwardPass { feats, post, sig }
    }

    /// d(output)/d(z_l) for every layer, top down.
    pub(crate) fn backward_deltas<S: Real<Base = B>>(&self, pass: &ForwardPass<S>) -> Vec<Vec<S>> {
        let n_layers = self.layers.len();
        let mut deltas = vec![Vec::new(); n_layers];
        let top = match &pass.sig[n_layers - 1] {
            None => vec![S::one(); self.layers[n_layers - 1].rows],
            Some(s) => s.clone(),
        };
        deltas[n_layers - 1] = top;
        for l in (0..n_layers - 1).rev() {
            let upstream = self.layers[l + 1].pullback(&deltas[l + 1]);
            deltas[l] = match &pass.sig[l] {
                Some(s) => upstream.iter().zip(s.iter()).map(|(u, si)| *u * *si).collect(),
                None => upstream,
            };
        }
        deltas
    }

    /// d(output)/d(features) via one reverse sweep.
    pub(crate) fn feature_gradient<S: Real<Base = B>>(&self, deltas: &[Vec<S>]) -> Vec<S> {
        self.layers[0].pullback(&deltas[0])
    }

    pub fn param_count(&self) -> usize {
        self.layers
            .iter()
            .map(|l| l.weights.len() + l.biases.as_ref().map_or(0, |b| b.len()))
            .sum()
    }

    pub(crate) fn flatten_params(&self) -> Vec<B> {
        let mut out = Vec::with_capacity(self.param_count());
        for l in &self.layers {
            out.extend_from_slice(&l.weights);
            if let Some(b) = &l.biases {
                out.extend_from_slice(b);
            }
        }
        out
    }

    pub(crate) fn set_params(&mut self, flat: &[B]) {
        let mut k = 0;
        for l in &mut self.layers {
            let nw = l.weights.len();
            l.weights.copy_from_slice(&flat[k..k + nw]);
            k += nw;
            if let Some(b) = &mut l.biases {
                let nb = b.len();
                b.copy_from_slice(&flat[k..k + nb]);
                k += nb;
            }
        }
        debug_assert_eq!(k, flat.len());
    }
}

fn random_layer<B: BaseFloat>(
    rng: &mut ChaCha8Rng,
    rows: usize,
    cols: usize,
    std: f64,
    with_bias: bool,
    activation: Activation,
) -> DenseLayer<B> {
    let std = B::from_f64(std);
    let weights = (0..rows * cols).map(|_| B::standard_normal(rng) * std).collect();
    let biases = with_bias.then(|| vec![B::ZERO; rows]);
    DenseLayer { rows, cols, weights, biases, activation }
}

impl<B: BaseFloat> Lagrangian<B> for LagrangianModel<B> {
    fn dim(&self) -> usize {
        self.input_dim
    }

    fn eval<S: Real<Base = B>>(&self, q: &[S], qdot: &[S]) -> Result<S> {
        self.forward(q, qdot)
    }

    /// Forward-over-reverse bundle: one dual-seeded reverse sweep per
    /// velocity component fills the j-th column of both J blocks exactly.
    fn bundle(&self, state: &PhaseState<B>) -> Result<DerivativeBundle<B>> {
        let d = self.input_dim;
        if state.dim() != d {
            return Err(Error::DimensionMismatch { expected: d, got: state.dim() });
        }
        let mut value = B::ZERO;
        let mut grad_q = vec![B::ZERO; d];
        let mut grad_qdot = vec![B::ZERO; d];
        let mut j_q_qdot = SquareMatrix::zeros(d);
        let mut j_qdot_qdot = SquareMatrix::zeros(d);
        for j in 0..d {
            let q: Vec<Dual<B>> = state.q.iter().map(|&v| Dual::new(v, B::ZERO)).collect();
            let qdot: Vec<Dual<B>> = state
                .qdot
                .iter()
                .enumerate()
                .map(|(i, &v)| Dual::new(v, if i == j { B::ONE } else { B::ZERO }))
                .collect();
            let feats = self.symmetry.apply(&q, &qdot)?;
            let pass = self.forward_cached(feats);
            let deltas = self.backward_deltas(&pass);
            let fgrad = self.feature_gradient(&deltas);
            let (gq, gqd) = self.symmetry.backward(&q, &qdot, &fgrad);
            if j == 0 {
                value = pass.output().re;
                for i in 0..d {
                    grad_q[i] = gq[i].re;
                    grad_qdot[i] = gqd[i].re;
                }
            }
            for i in 0..d {
                j_q_qdot.set(i, j, gq[i].du);
                j_qdot_qdot.set(i, j, gqd[i].du);
            }
        }
        let bundle = DerivativeBundle { value, grad_q, grad_qdot, j_q_qdot, j_qdot_qdot };
        if !bundle.is_finite() {
            return Err(Error::NonFinite("network derivative bundle"));
        }
        Ok(bundle)
    }

    /// First derivatives via a single reverse sweep.
    fn gradients(&self, state: &PhaseState<B>) -> Result<(Vec<B>, Vec<B>)> {
        if state.dim() != self.input_dim {
            return Err(Error::DimensionMismatch { expected: self.input_dim, got: state.dim() });
        }
        let feats = self.symmetry.apply(&state.q, &state.qdot)?;
        let pass = self.forward_cached(feats);
        let deltas = self.backward_deltas(&pass);
        let fgrad = self.feature_gradient(&deltas);
        Ok(self.symmetry.backward(&state.q, &state.qdot, &fgrad))
    }
}

// ---------------------------------------------------------------------------
// Serialization: {symmetry, d, n_h, layers: [{rows, cols, weights, biases}]}
// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct LayerJson<B> {
    rows: usize,
    cols: usize,
    weights: Vec<B>,
    #[serde(skip_serializing_if = "Option::is_none")]
    biases: Option<Vec<B>>,
}

#[derive(Serialize, Deserialize)]
struct ModelJson<B> {
    symmetry: SymmetrySpec,
    d: usize,
    n_h: usize,
    layers: Vec<LayerJson<B>>,
}

impl<B: BaseFloat> LagrangianModel<B> {
    pub fn to_json(&self) -> String {
        let doc = ModelJson {
            symmetry: self.symmetry,
            d: self.input_dim,
            n_h: self.n_hidden,
            layers: self
                .layers
                .iter()
                .map(|l| LayerJson {
                    rows: l.rows,
                    cols: l.cols,
                    weights: l.weights.clone(),
                    biases: l.biases.clone(),
                })
                .collect(),
        };
        serde_json::to_string_pretty(&doc).expect("model serialization cannot fail")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: ModelJson<B> = serde_json::from_str(text)?;
        doc.symmetry.validate()?;
        if doc.d != doc.symmetry.state_dim() {
            return Err(Error::Format(format!(
                "model d={} does not match symmetry (d={})",
                doc.d,
                doc.symmetry.state_dim()
            )));
        }
        let n_layers = doc.layers.len();
        if n_layers < 2 {
            return Err(Error::Format("model needs at least one hidden and one output layer".into()));
        }
        let mut layers = Vec::with_capacity(n_layers);
        let mut expect_cols = doc.symmetry.feature_count();
        for (k, l) in doc.layers.into_iter().enumerate() {
            let last = k == n_layers - 1;
            if l.cols != expect_cols {
                return Err(Error::Format(format!(
                    "layer {k}: expected {expect_cols} inputs, found {}",
                    l.cols
                )));
            }
            if l.weights.len() != l.rows * l.cols {
                return Err(Error::Format(format!("layer {k}: weight count mismatch")));
            }
            if !l.weights.iter().all(|w| w.is_finite()) {
                return Err(Error::Format(format!("layer {k}: non-finite weight")));
            }
            if last {
                if l.rows != 1 {
                    return Err(Error::Format("output layer must have exactly 1 unit".into()));
                }
                if l.biases.is_some() {
                    return Err(Error::Format("output layer must not carry a bias".into()));
                }
            } else {
                match &l.biases {
                    Some(b) if b.len() == l.rows => {}
                    _ => return Err(Error::Format(format!("layer {k}: bias vector mismatch"))),
                }
            }
            expect_cols = l.rows;
            layers.push(DenseLayer {
                rows: l.rows,
                cols: l.cols,
                weights: l.weights,
                biases: l.biases,
                activation: if last { Activation::Identity } else { Activation::Softplus },
            });
        }
        Ok(LagrangianModel {
            symmetry: doc.symmetry,
            input_dim: doc.d,
            n_hidden: doc.n_h,
            layers,
        })
    }

    pub fn save(&self, path: &std::path::Path) -> Result<()> {
        std::fs::write(path, self.to_json())?;
        Ok(())
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

/// FNV-1a over the serialized model, used to stamp trajectory metadata.
pub fn fnv1a_hex(bytes: &[u8]) -> String {
    let mut hash: u64 = 0xcbf29ce484222325;
    for &b in bytes {
        hash ^= b as u64;
        hash = hash.wrapping_mul(0x100000001b3);
    }
    format!("{hash:016x}")
}
