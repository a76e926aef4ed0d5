//! Text formats: models, specifications, controllers and statistics.

pub mod controller_file;
pub mod model_file;
pub mod spec;
pub mod spec_file;
pub mod stats;

pub use controller_file::{parse_controller, resolve_controllers, write_controller};
pub use model_file::{parse_model, write_model};
pub use spec::HyperSpec;
pub use spec_file::{parse_spec, write_spec};
pub use stats::{write_stats, STATS_SCHEMA};
