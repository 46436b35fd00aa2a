//! Reinforcement-learning optimizer: the shape-deformation environment, a
//! twin-delayed deterministic-policy-gradient agent, replay memory, the
//! exploration noise process, reward shaping, and the training loop.

pub mod agent;
pub mod env;
pub mod noise;
pub mod replay;
pub mod reward;
pub mod train;

pub use agent::{Losses, Td3Agent};
pub use env::{state_vector, token_dim, Env, EnvState, Rejection, StepInfo};
pub use noise::{ou_step, OuNoise};
pub use replay::{ReplayBuffer, Transition};
pub use reward::{compute_reward, exploration_bound, lambda_eps};
pub use train::{random_action, select_action, train, TraceRow, TrainOutcome};
