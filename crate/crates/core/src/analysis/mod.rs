//! Planning analyses behind question generation: relaxed reachability,
//! pairwise mutexes, landmarks, plan justification, and the brute-force
//! oracle the test suite verifies everything against.

pub mod justify;
pub mod landmarks;
pub mod mutex;
pub mod oracle;
pub mod relaxed;

pub use justify::{justification_check, truncate_after_goal, Removal};
pub use landmarks::{landmark_negatives, landmarks_rhw, GoalUnreachable, LandmarkSet};
pub use mutex::{compute_mutexes, MutexSet};
pub use oracle::{oracle_bfs, OracleIndex};
pub use relaxed::{relaxed_reachable, RelaxedReachability};
