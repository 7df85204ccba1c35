//! Clustering agreement, topic reconstruction, held-out likelihood and
//! topic divergence.

pub mod hungarian;
pub mod metrics;
pub mod predictive;
pub mod report;

pub use hungarian::{hungarian_align, solve_assignment, symmetric_kl_topics, topic_l1_error, Alignment};
pub use metrics::{adjusted_rand, nmi};
pub use predictive::{fold_in_theta, hard_predictive_ll, soft_predictive_ll, FoldInConfig, SoftLl};
pub use report::{reports_to_csv, EvalReport};
