//! Exact differentiation of scalar functions of `(q, q̇)`.
//!
//! [`Lagrangian`] is anything that can evaluate itself on generic scalars;
//! instantiating the evaluation with nested dual numbers yields the exact
//! gradient and the two second-derivative blocks
//! `(J_{q,q̇})_{ij} = ∂²L/∂q_i∂q̇_j` and `(J_{q̇,q̇})_{ij} = ∂²L/∂q̇_i∂q̇_j`
//! that enter the Euler–Lagrange acceleration formula. No finite differences,
//! no tape: everything is a handful of forward passes, which is cheap for
//! d ≤ 8.

use crate::dual::{dual2_mixed, dual2_seed, Dual, Dual2};
use crate::dynamics::PhaseState;
use crate::error::{Error, Result};
use crate::linalg::SquareMatrix;
use crate::real::{BaseFloat, Real};

/// Value, gradient and second-derivative blocks of a Lagrangian at one state.
#[derive(Debug, Clone)]
pub struct DerivativeBundle<B> {
    pub value: B,
    pub grad_q: Vec<B>,
    pub grad_qdot: Vec<B>,
    /// (i, j) entry is ∂²L/∂q_i ∂q̇_j.
    pub j_q_qdot: SquareMatrix<B>,
    /// (i, j) entry is ∂²L/∂q̇_i ∂q̇_j; symmetric up to roundoff.
    pub j_qdot_qdot: SquareMatrix<B>,
}

impl<B: BaseFloat> DerivativeBundle<B> {
    pub fn is_finite(&self) -> bool {
        self.value.is_finite()
            && self.grad_q.iter().all(|v| v.is_finite())
            && self.grad_qdot.iter().all(|v| v.is_finite())
            && self.j_q_qdot.is_finite()
            && self.j_qdot_qdot.is_finite()
    }
}

/// A twice-differentiable scalar function of `(q, q̇)`, evaluated on any
/// scalar type so derivatives come from dual-number instantiation.
pub trait Lagrangian<B: BaseFloat> {
    fn dim(&self) -> usize;

    fn eval<S: Real<Base = B>>(&self, q: &[S], qdot: &[S]) -> Result<S>;

    /// Value plus exact first and second derivative blocks.
    ///
    /// Default: one `Dual²` pass per (input, velocity) pair — robust for any
    /// closed-form Lagrangian. Implementations with structure (the dense
    /// network) override this with a cheaper reverse-mode route.
    fn bundle(&self, state: &PhaseState<B>) -> Result<DerivativeBundle<B>>
    where
        Self: Sized,
    {
        generic_bundle(self, state)
    }

    /// Exact (∂L/∂q, ∂L/∂q̇) only, one `Dual` pass per input by default.
    fn gradients(&self, state: &PhaseState<B>) -> Result<(Vec<B>, Vec<B>)>
    where
        Self: Sized,
    {
        generic_gradients(self, state)
    }
}

fn check_dim<B: BaseFloat, F: Lagrangian<B> + ?Sized>(f: &F, state: &PhaseState<B>) -> Result<()> {
    if state.q.len() != f.dim() || state.qdot.len() != f.dim() {
        return Err(Error::DimensionMismatch { expected: f.dim(), got: state.q.len() });
    }
    Ok(())
}

/// Evaluate the scalar value L(q, q̇).
pub fn evaluate<B: BaseFloat, F: Lagrangian<B>>(f: &F, state: &PhaseState<B>) -> Result<B> {
    check_dim(f, state)?;
    let v = f.eval::<B>(&state.q, &state.qdot)?;
    if !v.is_finite() {
        return Err(Error::NonFinite("Lagrangian evaluation"));
    }
    Ok(v)
}

/// Exact derivative bundle via `d·2d` nested-dual passes.
pub fn generic_bundle<B: BaseFloat, F: Lagrangian<B>>(
    f: &F,
    state: &PhaseState<B>,
) -> Result<DerivativeBundle<B>> {
    check_dim(f, state)?;
    let d = f.dim();
    let mut value = B::ZERO;
    let mut grad_q = vec![B::ZERO; d];
    let mut grad_qdot = vec![B::ZERO; d];
    let mut j_q_qdot = SquareMatrix::zeros(d);
    let mut j_qdot_qdot = SquareMatrix::zeros(d);

    let seed_inputs = |t1_slot: usize, t2_slot: usize| -> (Vec<Dual2<B>>, Vec<Dual2<B>>) {
        let seed = |slot: usize, v: B| {
            let t1 = if slot == t1_slot { B::ONE } else { B::ZERO };
            let t2 = if slot == t2_slot { B::ONE } else { B::ZERO };
            dual2_seed(v, t1, t2)
        };
        let q = state.q.iter().enumerate().map(|(i, &v)| seed(i, v)).collect();
        let qdot = state.qdot.iter().enumerate().map(|(i, &v)| seed(d + i, v)).collect();
        (q, qdot)
    };

    for j in 0..d {
        for i in 0..(2 * d) {
            let (q, qdot) = seed_inputs(i, d + j);
            let out = f.eval(&q, &qdot)?;
            if i == 0 && j == 0 {
                value = out.re.re;
            }
            if j == 0 {
                let g = out.du.re;
                if i < d {
                    grad_q[i] = g;
                } else {
                    grad_qdot[i - d] = g;
                }
            }
            let mixed = dual2_mixed(out);
            if i < d {
                j_q_qdot.set(i, j, mixed);
            } else {
                j_qdot_qdot.set(i - d, j, mixed);
            }
        }
    }

    let bundle = DerivativeBundle { value, grad_q, grad_qdot, j_q_qdot, j_qdot_qdot };
    if !bundle.is_finite() {
        return Err(Error::NonFinite("derivative bundle"));
    }
    Ok(bundle)
}

/// Exact first derivatives via `2d` dual passes.
pub fn generic_gradients<B: BaseFloat, F: Lagrangian<B>>(
    f: &F,
    state: &PhaseState<B>,
) -> Result<(Vec<B>, Vec<B>)> {
    check_dim(f, state)?;
    let d = f.dim();
    let mut grad_q = vec![B::ZERO; d];
    let mut grad_qdot = vec![B::ZERO; d];
    for slot in 0..(2 * d) {
        let q: Vec<Dual<B>> = state
            .q
            .iter()
            .enumerate()
            .map(|(i, &v)| Dual::new(v, if slot == i { B::ONE } else { B::ZERO }))
            .collect();
        let qdot: Vec<Dual<B>> = state
            .qdot
            .iter()
            .enumerate()
            .map(|(i, &v)| Dual::new(v, if slot == d + i { B::ONE } else { B::ZERO }))
            .collect();
        let out = f.eval(&q, &qdot)?;
        if !out.is_finite() {
            return Err(Error::NonFinite("Lagrangian gradient"));
        }
        if slot < d {
            grad_q[slot] = out.du;
        } else {
            grad_qdot[slot - d] = out.du;
        }
    }
    Ok((grad_q, grad_qdot))
}

/// `derivatives` in the public API is the bundle computation.
pub fn derivatives<B: BaseFloat, F: Lagrangian<B>>(
    f: &F,
    state: &PhaseState<B>,
) -> Result<DerivativeBundle<B>> {
    f.bundle(state)
}
