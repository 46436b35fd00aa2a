//! A minimal network kernel: dense layers, softsign/SELU/tanh/softmax
//! activations, token attention, reverse-mode gradients and an
//! adaptive-moment optimizer.
//!
//! Everything is built on one [`Tape`] abstraction; the actor and critic in
//! [`models`] are ordinary functions that record their forward pass, so
//! composite objectives (an actor feeding a critic, say) need no special
//! machinery: record both, differentiate the scalar at the end, and step
//! whichever parameter set the phase updates.

mod adam;
mod matrix;
mod models;
mod params;
mod tape;

pub use adam::Adam;
pub use matrix::Matrix;
pub use models::{
    actor_forward, actor_init, attention, critic_forward, critic_init, ActionBounds, ActorOut,
    ACTION_PARAMS,
};
pub use params::{dense_init, proj_init, Binder, GradStore, Params};
pub use tape::{Gradients, Tape, Var, SELU_ALPHA, SELU_LAMBDA};
