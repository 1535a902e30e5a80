//! Membership inference against synthetic data: target choice, summary
//! features, the classifier and the shadow-model game.

pub mod auc;
pub mod features;
pub mod forest;
pub mod game;
pub mod target;

pub use auc::auc;
pub use features::naive_features;
pub use forest::{ForestConfig, RandomForest};
pub use game::{run_shadow_game, GameConfig, GameResult, RunAudit, Synthesizer};
pub use target::{select_target, TargetMode, TargetSelection};
