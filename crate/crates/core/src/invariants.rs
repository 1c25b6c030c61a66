//! Symmetry-enforcing first layer: maps `(q, q̇)` to scalars that are
//! invariant under the chosen continuous group, so every network stacked on
//! top inherits the invariance and, with it, exact conservation of the
//! corresponding charges.
//!
//! For a set of n vectors in ℝ^D the complete invariant set consists of the
//! n(n+1)/2 dot products and the C(n, D) full contractions with the
//! Levi-Civita symbol, each evaluated as the determinant of the D×D matrix
//! whose rows are the chosen vectors.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{det_rows, det_rows_gradient, SquareMatrix};
use crate::real::{BaseFloat, Real};

/// Which invariance the first layer enforces, together with the geometry it
/// acts on. The two-particle kinds take the spatial dimension D and a state
/// layout `q = (x⁽¹⁾ ⧺ x⁽²⁾)`, `q̇ = (ẋ⁽¹⁾ ⧺ ẋ⁽²⁾)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum SymmetrySpec {
    /// No constraint: raw passthrough of the 2·dim state components.
    None { dim: usize },
    /// Single particle in 3D, features (q², q̇², q·q̇).
    KeplerRotational,
    /// Massive particle in the Schwarzschild metric, state (x₁,x₂,x₃,τ);
    /// features (τ̇, x², ẋ², x·ẋ) — the position τ itself is dropped.
    SchwarzschildRotational,
    /// Two particles, SO(D): full invariant set of {x⁽¹⁾,x⁽²⁾,ẋ⁽¹⁾,ẋ⁽²⁾}.
    Rotational { spatial_dim: usize },
    /// Two particles, translations: raw components of (x⁽¹⁾−x⁽²⁾, ẋ⁽¹⁾, ẋ⁽²⁾).
    Translational { spatial_dim: usize },
    /// Two particles, SO(D) and translations: invariant set of
    /// {x⁽¹⁾−x⁽²⁾, ẋ⁽¹⁾, ẋ⁽²⁾}.
    RotoTranslational { spatial_dim: usize },
}

/// One entry of the deterministic feature layout.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FeatureDescriptor {
    Dot(String, String),
    Epsilon(Vec<String>),
    Raw(String),
}

impl std::fmt::Display for FeatureDescriptor {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            FeatureDescriptor::Dot(a, b) => write!(f, "dot({a},{b})"),
            FeatureDescriptor::Epsilon(v) => write!(f, "eps({})", v.join(",")),
            FeatureDescriptor::Raw(c) => write!(f, "raw({c})"),
        }
    }
}

fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc = 1usize;
    for i in 0..k {
        acc = acc * (n - i) / (i + 1);
    }
    acc
}

/// Lexicographically ordered k-subsets of 0..n.
fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if k > n {
        return out;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        out.push(idx.clone());
        // Advance to the next combination.
        let mut i = k;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if idx[i] != i + n - k {
                break;
            }
            if i == 0 {
                return out;
            }
        }
        idx[i] += 1;
        for j in (i + 1)..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// All rotation invariants of `vectors`: dot products a⁽α⁾·a⁽β⁾ for α ≤ β in
/// lexicographic order, then every C(n, D) Levi-Civita contraction in
/// lexicographic index order.
pub fn invariant_set<S: Real>(vectors: &[&[S]]) -> Result<Vec<S>> {
    let n = vectors.len();
    if n == 0 {
        return Err(Error::InvalidSpec("invariant set of zero vectors".into()));
    }
    let dim = vectors[0].len();
    for v in vectors {
        if v.len() != dim {
            return Err(Error::DimensionMismatch { expected: dim, got: v.len() });
        }
    }
    let mut feats = Vec::with_capacity(n * (n + 1) / 2 + binomial(n, dim));
    for a in 0..n {
        for b in a..n {
            feats.push(crate::real::dot(vectors[a], vectors[b]));
        }
    }
    for subset in subsets(n, dim) {
        let rows: Vec<&[S]> = subset.iter().map(|&i| vectors[i]).collect();
        feats.push(det_rows(&rows));
    }
    Ok(feats)
}

/// Pullback of `invariant_set`: given d(out)/d(feature), accumulate
/// d(out)/d(vector entries).
fn invariant_set_backward<S: Real>(vectors: &[&[S]], upstream: &[S]) -> Vec<Vec<S>> {
    let n = vectors.len();
    let dim = vectors[0].len();
    let mut grads = vec![vec![S::zero(); dim]; n];
    let mut idx = 0;
    for a in 0..n {
        for b in a..n {
            let g = upstream[idx];
            idx += 1;
            if a == b {
                for i in 0..dim {
                    grads[a][i] += vectors[a][i].scale(S::Base::from_f64(2.0)) * g;
                }
            } else {
                for i in 0..dim {
                    grads[a][i] += vectors[b][i] * g;
                    grads[b][i] += vectors[a][i] * g;
                }
            }
        }
    }
    for subset in subsets(n, dim) {
        let g = upstream[idx];
        idx += 1;
        let rows: Vec<&[S]> = subset.iter().map(|&i| vectors[i]).collect();
        let cof = det_rows_gradient(&rows);
        for (k, &vec_idx) in subset.iter().enumerate() {
            for i in 0..dim {
                grads[vec_idx][i] += cof[k][i] * g;
            }
        }
    }
    debug_assert_eq!(idx, upstream.len());
    grads
}

impl SymmetrySpec {
    pub fn validate(&self) -> Result<()> {
        match *self {
            SymmetrySpec::None { dim } if dim == 0 => {
                Err(Error::InvalidSpec("state dimension must be positive".into()))
            }
            SymmetrySpec::Rotational { spatial_dim }
            | SymmetrySpec::Translational { spatial_dim }
            | SymmetrySpec::RotoTranslational { spatial_dim }
                if spatial_dim < 2 =>
            {
                Err(Error::InvalidSpec("two-particle layers need D >= 2".into()))
            }
            _ => Ok(()),
        }
    }

    /// Dimension d of the generalized coordinates this layer expects.
    pub fn state_dim(&self) -> usize {
        match *self {
            SymmetrySpec::None { dim } => dim,
            SymmetrySpec::KeplerRotational => 3,
            SymmetrySpec::SchwarzschildRotational => 4,
            SymmetrySpec::Rotational { spatial_dim }
            | SymmetrySpec::Translational { spatial_dim }
            | SymmetrySpec::RotoTranslational { spatial_dim } => 2 * spatial_dim,
        }
    }

    /// Width of the feature vector, i.e. the input width of the first dense
    /// layer.
    pub fn feature_count(&self) -> usize {
        match *self {
            SymmetrySpec::None { dim } => 2 * dim,
            SymmetrySpec::KeplerRotational => 3,
            SymmetrySpec::SchwarzschildRotational => 4,
            SymmetrySpec::Rotational { spatial_dim } => 10 + binomial(4, spatial_dim),
            SymmetrySpec::Translational { spatial_dim } => 3 * spatial_dim,
            SymmetrySpec::RotoTranslational { spatial_dim } => 6 + binomial(3, spatial_dim),
        }
    }

    /// The deterministic feature layout, one descriptor per feature.
    pub fn feature_layout(&self) -> Vec<FeatureDescriptor> {
        use FeatureDescriptor::{Dot, Raw};
        match *self {
            SymmetrySpec::None { dim } => {
                let mut out: Vec<_> = (0..dim).map(|i| Raw(format!("q[{i}]"))).collect();
                out.extend((0..dim).map(|i| Raw(format!("qdot[{i}]"))));
                out
            }
            SymmetrySpec::KeplerRotational => vec![
                Dot("q".into(), "q".into()),
                Dot("qdot".into(), "qdot".into()),
                Dot("q".into(), "qdot".into()),
            ],
            SymmetrySpec::SchwarzschildRotational => vec![
                Raw("taudot".into()),
                Dot("x".into(), "x".into()),
                Dot("xdot".into(), "xdot".into()),
                Dot("x".into(), "xdot".into()),
            ],
            SymmetrySpec::Rotational { spatial_dim } => {
                Self::set_layout(&["x1", "x2", "v1", "v2"], spatial_dim)
            }
            SymmetrySpec::Translational { spatial_dim } => {
                let mut out = Vec::new();
                for name in ["x1-x2", "v1", "v2"] {
                    out.extend((0..spatial_dim).map(|i| Raw(format!("{name}[{i}]"))));
                }
                out
            }
            SymmetrySpec::RotoTranslational { spatial_dim } => {
                Self::set_layout(&["x1-x2", "v1", "v2"], spatial_dim)
            }
        }
    }

    fn set_layout(names: &[&str], dim: usize) -> Vec<FeatureDescriptor> {
        let n = names.len();
        let mut out = Vec::new();
        for a in 0..n {
            for b in a..n {
                out.push(FeatureDescriptor::Dot(names[a].into(), names[b].into()));
            }
        }
        for subset in subsets(n, dim) {
            out.push(FeatureDescriptor::Epsilon(
                subset.iter().map(|&i| names[i].to_string()).collect(),
            ));
        }
        out
    }

    fn check_state_dim(&self, q_len: usize, qdot_len: usize) -> Result<()> {
        let d = self.state_dim();
        if q_len != d || qdot_len != d {
            return Err(Error::LayoutMismatch(format!(
                "{self:?} expects d={d}, got q:{q_len}, qdot:{qdot_len}"
            )));
        }
        Ok(())
    }

    /// Apply the layer: `(q, q̇) -> feature vector`, in any scalar type.
    pub fn apply<S: Real>(&self, q: &[S], qdot: &[S]) -> Result<Vec<S>> {
        self.check_state_dim(q.len(), qdot.len())?;
        match *self {
            SymmetrySpec::None { .. } => {
                let mut out = q.to_vec();
                out.extend_from_slice(qdot);
                Ok(out)
            }
            SymmetrySpec::KeplerRotational => Ok(vec![
                crate::real::dot(q, q),
                crate::real::dot(qdot, qdot),
                crate::real::dot(q, qdot),
            ]),
            SymmetrySpec::SchwarzschildRotational => {
                let (x, xdot) = (&q[..3], &qdot[..3]);
                Ok(vec![
                    qdot[3],
                    crate::real::dot(x, x),
                    crate::real::dot(xdot, xdot),
                    crate::real::dot(x, xdot),
                ])
            }
            SymmetrySpec::Rotational { spatial_dim: sd } => {
                invariant_set(&[&q[..sd], &q[sd..], &qdot[..sd], &qdot[sd..]])
            }
            SymmetrySpec::Translational { spatial_dim: sd } => {
                let mut out: Vec<S> = (0..sd).map(|i| q[i] - q[sd + i]).collect();
                out.extend_from_slice(qdot);
                Ok(out)
            }
            SymmetrySpec::RotoTranslational { spatial_dim: sd } => {
                let w: Vec<S> = (0..sd).map(|i| q[i] - q[sd + i]).collect();
                invariant_set(&[&w, &qdot[..sd], &qdot[sd..]])
            }
        }
    }

    /// Pullback of `apply`: maps d(out)/d(features) to
    /// (d(out)/dq, d(out)/dq̇).
    pub fn backward<S: Real>(&self, q: &[S], qdot: &[S], upstream: &[S]) -> (Vec<S>, Vec<S>) {
        let d = self.state_dim();
        debug_assert_eq!(upstream.len(), self.feature_count());
        let two = S::Base::from_f64(2.0);
        let mut gq = vec![S::zero(); d];
        let mut gqd = vec![S::zero(); d];
        match *self {
            SymmetrySpec::None { .. } => {
                gq.copy_from_slice(&upstream[..d]);
                gqd.copy_from_slice(&upstream[d..]);
            }
            SymmetrySpec::KeplerRotational => {
                for i in 0..3 {
                    gq[i] = q[i].scale(two) * upstream[0] + qdot[i] * upstream[2];
                    gqd[i] = qdot[i].scale(two) * upstream[1] + q[i] * upstream[2];
                }
            }
            SymmetrySpec::SchwarzschildRotational => {
                for i in 0..3 {
                    gq[i] = q[i].scale(two) * upstream[1] + qdot[i] * upstream[3];
                    gqd[i] = qdot[i].scale(two) * upstream[2] + q[i] * upstream[3];
                }
                gqd[3] = upstream[0];
            }
            SymmetrySpec::Rotational { spatial_dim: sd } => {
                let vectors = [&q[..sd], &q[sd..], &qdot[..sd], &qdot[sd..]];
                let grads = invariant_set_backward(&vectors, upstream);
                gq[..sd].copy_from_slice(&grads[0]);
                gq[sd..].copy_from_slice(&grads[1]);
                gqd[..sd].copy_from_slice(&grads[2]);
                gqd[sd..].copy_from_slice(&grads[3]);
            }
            SymmetrySpec::Translational { spatial_dim: sd } => {
                for i in 0..sd {
                    gq[i] = upstream[i];
                    gq[sd + i] = -upstream[i];
                }
                gqd.copy_from_slice(&upstream[sd..]);
            }
            SymmetrySpec::RotoTranslational { spatial_dim: sd } => {
                let w: Vec<S> = (0..sd).map(|i| q[i] - q[sd + i]).collect();
                let vectors = [w.as_slice(), &qdot[..sd], &qdot[sd..]];
                let grads = invariant_set_backward(&vectors, upstream);
                for i in 0..sd {
                    gq[i] = grads[0][i];
                    gq[sd + i] = -grads[0][i];
                }
                gqd[..sd].copy_from_slice(&grads[1]);
                gqd[sd..].copy_from_slice(&grads[2]);
            }
        }
        (gq, gqd)
    }

    /// Spatial dimension the group acts on (D), where meaningful.
    pub fn spatial_dim(&self) -> usize {
        match *self {
            SymmetrySpec::None { dim } => dim,
            SymmetrySpec::KeplerRotational | SymmetrySpec::SchwarzschildRotational => 3,
            SymmetrySpec::Rotational { spatial_dim }
            | SymmetrySpec::Translational { spatial_dim }
            | SymmetrySpec::RotoTranslational { spatial_dim } => spatial_dim,
        }
    }
}

/// exp(Γ) for a D×D generator, by scaling-and-squaring with a Taylor series.
/// For antisymmetric Γ the result is a rotation matrix to machine accuracy.
pub fn so_exponential<B: BaseFloat>(gamma: &SquareMatrix<B>) -> SquareMatrix<B> {
    let n = gamma.n();
    let norm = gamma.max_abs().to_f64().max(1e-300);
    let squarings = norm.log2().ceil().max(0.0) as u32 + 1;
    let scale = B::from_f64(0.5_f64.powi(squarings as i32));

    let mut scaled = SquareMatrix::zeros(n);
    for i in 0..n {
        for j in 0..n {
            scaled.set(i, j, gamma.get(i, j) * scale);
        }
    }
    // exp(X) = Σ Xᵏ/k! ; ‖X‖ ≤ 1/2 so 24 terms reach double precision.
    let mut result = SquareMatrix::zeros(n);
    let mut term = SquareMatrix::zeros(n);
    for i in 0..n {
        result.set(i, i, B::ONE);
        term.set(i, i, B::ONE);
    }
    for k in 1..24 {
        let mut next = SquareMatrix::zeros(n);
        for i in 0..n {
            for j in 0..n {
                let mut acc = B::ZERO;
                for l in 0..n {
                    acc += term.get(i, l) * scaled.get(l, j);
                }
                next.set(i, j, acc * B::from_f64(1.0 / k as f64));
            }
        }
        for i in 0..n {
            for j in 0..n {
                result.set(i, j, result.get(i, j) + next.get(i, j));
            }
        }
        term = next;
    }
    for _ in 0..squarings {
        let mut sq = SquareMatrix::zeros(n);
        for i in 0..n {
            for j in 0..n {
                let mut acc = B::ZERO;
                for l in 0..n {
                    acc += result.get(i, l) * result.get(l, j);
                }
                sq.set(i, j, acc);
            }
        }
        result = sq;
    }
    result
}

/// Random element of so(D): antisymmetric with N(0,1) upper triangle.
pub fn random_antisymmetric<B: BaseFloat, R: Rng + ?Sized>(
    dim: usize,
    rng: &mut R,
) -> SquareMatrix<B> {
    let mut g = SquareMatrix::zeros(dim);
    for i in 0..dim {
        for j in (i + 1)..dim {
            let v = B::standard_normal(rng);
            g.set(i, j, v);
            g.set(j, i, -v);
        }
    }
    g
}

/// Random rotation exp(Γ) with Γ a random so(D) element.
pub fn random_rotation<B: BaseFloat, R: Rng + ?Sized>(dim: usize, rng: &mut R) -> SquareMatrix<B> {
    so_exponential(&random_antisymmetric(dim, rng))
}
