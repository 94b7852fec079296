mod fixtures;
mod report;
mod run;
mod scenario;

pub use fixtures::{list_fixtures, FixtureListing};
pub use report::{CheckRecord, Report, ARTIFACT_VERSION, REPORT_SCHEMA};
pub use run::*;
pub use scenario::*;
