//! Seeded trials and experiments, the exact small-case oracle, and the
//! plain-text certificate format.

mod certificate;
mod experiment;
mod oracle;
mod trial;

pub use certificate::*;
pub use experiment::*;
pub use oracle::*;
pub use trial::*;
