//! Core library for coverage-guided test case generation.
//!
//! The pipeline has two stages. Stage I shrinks the program under test with an
//! LLM-driven fragment minifier that keeps only behavior-preserving rewrites.
//! Stage II runs episodes in which a small policy network picks one of eight
//! prompting strategies, the LLM proposes a batch of test inputs, a coverage
//! harness measures line/branch gains, and PPO updates the policy from the
//! resulting rewards.

pub mod coverage;
pub mod engine;
pub mod llm;
pub mod mdp;
pub mod metrics;
pub mod policy;
pub mod ppo;
pub mod prompts;
pub mod stage1;
