pub mod bodies;
pub mod certificates;
pub mod corpus;
pub mod ellipsoids;
pub mod error;
pub mod numerics;
pub mod oracle;
pub mod par;
pub mod report;
pub mod solver;

pub use error::{Error, Result};
