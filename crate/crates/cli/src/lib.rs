//! System files, wall clock and the query pipeline behind the `counterctl`
//! command.

pub mod clock;
pub mod run;
pub mod sysfile;

pub use clock::StdClock;
pub use run::{run, OutputFormat, PropertySource, Report, RunConfig, RunError};
pub use sysfile::{parse_system, print_system, SysFileError};
