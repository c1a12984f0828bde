//! gtdb: an embedded, disk-backed labelled-property-graph database with a
//! Cypher-subset query engine, used as the retrieval layer for training a
//! mean-aggregate GraphSAGE model.
//!
//! The crate is organised around the data path of a training run:
//!
//! - [`store`]: record files, page cache, id index, access counters.
//! - [`ingest`]: CSV bulk load and a seeded stochastic-block-model generator.
//! - [`query`]: tokenizer, parser, binder, planner, pull-based executor and
//!   the `PROFILE` machinery.
//! - [`sampler`]: metadata retrieval and the one-/two-hop sampling templates,
//!   decoding query rows into training-ready subgraphs.
//! - [`gnn`]: the GraphSAGE model with a hand-written backward pass.
//! - [`dist`]: multi-worker training with synchronous gradient averaging and
//!   a length-prefixed sampling protocol.
//! - [`bench`]: memory/worker sweeps and sampling-distribution histograms.

pub mod bench;
pub mod dist;
pub mod gnn;
pub mod ingest;
pub mod memtrack;
pub mod query;
pub mod rng;
pub mod sampler;
pub mod store;
