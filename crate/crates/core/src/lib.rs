//! Partition-based generalization certificates.
//!
//! Given per-sample losses of a fixed model and a partition of the input
//! space into `K` cells, [`bound::certify`] returns an upper bound on the
//! expected loss together with its confidence level. Partitions come from
//! seeded k-means ([`partition`]); [`augment`] handles certificates built
//! from transformed samples, [`optimize`] searches over `K` and `alpha`,
//! [`conclab`] checks the underlying inequalities numerically and [`synth`]
//! runs coverage experiments on mixtures with known error.
//!
//! Work is spread over rayon when the `parallel` feature is on (the
//! default). Results never depend on the number of threads.

pub mod augment;
pub mod bound;
pub mod conclab;
pub mod error;
pub mod exec;
pub mod io;
pub mod optimize;
pub mod partition;
pub mod seed;
pub mod synth;
pub mod table;

pub use bound::{certify, certify_general, BoundParams, BoundReport, CellCounts, GeneralParams};
pub use error::{Error, Result};
pub use partition::{Assignment, Centroids, FeatureTable};
pub use table::SampleTable;
