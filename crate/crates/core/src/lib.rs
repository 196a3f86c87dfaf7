pub mod algebras;
pub mod chains;
pub mod cli;
pub mod error;
pub mod freealg;
pub mod geometry;
pub mod model;
pub mod options;
pub mod par;
pub mod products;
pub mod terms;
pub mod topology;
