//! Pattern-based compression of source-face distances in unweighted,
//! undirected planar graphs.
//!
//! Given an embedded planar graph with the vertices of one face marked as
//! sources S and a terminal set T, the distances from any vertex to the
//! sources are determined by one base distance plus a vector of +-1/0
//! consecutive differences (its *pattern*). Few patterns are distinct, and
//! adjacent vertices differ in at most two positions after subdividing
//! every edge, so the whole S x T metric compresses into a deduplicated
//! pattern tree driving a persistent prefix-sum index. This crate builds
//! that encoding, answers exact queries against it, and ships the cut,
//! bisector and crossing machinery needed to validate the structural
//! properties it rests on.
//!
//! Module map:
//! - [`planar`]: rotation-system embeddings, faces, duals
//! - [`instance`]: problem instances, subdivision, `.osg` files
//! - [`distance`] / [`pattern`]: BFS fields and pattern extraction
//! - [`cut`] / [`bisector`] / [`crossing`]: dual-cycle structure
//! - [`fingerprint`] / [`pattern_tree`] / [`prefix_index`] / [`encoding`]:
//!   the compression artifact
//! - [`generate`]: seeded instance families
//! - [`verify`]: property suites, oracle, baselines, growth probe

pub mod bisector;
pub mod bits;
pub mod crossing;
pub mod cut;
pub mod distance;
pub mod encoding;
pub mod error;
pub mod fingerprint;
pub mod generate;
pub mod instance;
pub mod pattern;
pub mod pattern_tree;
pub mod planar;
pub mod prefix_index;
pub mod verify;

pub use bisector::Bisector;
pub use crossing::{CrossingPart, CrossingReport, PartKind};
pub use cut::Cut;
pub use distance::DistanceField;
pub use encoding::{Encoding, EncodingMode, ModeRequest, SizeReport};
pub use error::{Error, Result};
pub use fingerprint::{Fingerprint, FingerprintTree};
pub use instance::{OSInstance, SubdividedInstance};
pub use pattern::{Pattern, PatternMode, PatternSet};
pub use pattern_tree::PatternTree;
pub use planar::{DualGraph, PlanarGraph};
pub use prefix_index::VersionedPrefixIndex;
pub use verify::{VerificationReport, VerifyOptions};
