//! Local-geometry analysis of secrecy trade-offs in discrete memoryless
//! wiretap channels.
//!
//! The crate works in a quadratic chart around a reference input law: encoder
//! conditionals are small perturbations `P_X + eps*sqrt(P_X) ∘ L_u`, mutual
//! informations collapse to quadratic forms in the direction vectors, and the
//! rate/leakage trade-off becomes a two-variable multiplier program over the
//! generalized spectrum of the receiver/eavesdropper pair. Layers, bottom up:
//!
//! * [`probability`]: pmf/channel types and exact information measures.
//! * [`channels`]: binary symmetric and quantized-AWGN wiretap constructors.
//! * [`linalg`]: dense symmetric eigensolver and small-matrix helpers.
//! * [`eit`]: decomposition matrices, perturbation strategies, quadratic
//!   approximations of the information quantities.
//! * [`spectral`]: the restricted matrix pencil and the local contraction
//!   coefficient.
//! * [`capacity`]: the multiplier program, regime analysis, closed forms.
//! * [`primal`]: direct ascent on the quadratic coupling problem.
//! * [`baselines`]: exact-information references and Monte-Carlo probes.
//!
//! Everything internal is in nats; conversion to bits happens only at output
//! boundaries.

pub mod baselines;
pub mod capacity;
pub mod channels;
pub mod eit;
pub mod error;
pub mod linalg;
pub mod primal;
pub mod probability;
pub mod spectral;
