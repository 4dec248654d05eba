//! GUI-augmented text-retrieval bug localization for Android (Java) repositories.
//!
//! The pipeline mirrors a bug-localization bot: a repository is snapshotted
//! ([`ingest`]), every Java file is cleaned and split into token segments
//! ([`preprocess`]), segments are embedded by a pluggable provider
//! ([`embedding`]) and persisted under the repository's commit identifier
//! ([`index_store`]). A bug report, optionally accompanied by a reproduction
//! trace ([`trace`]), is then turned into a ranked list of files
//! ([`localize`]). The [`eval`] module runs the same pipeline over a benchmark
//! manifest and reports Hits@K, MRR, MAP and Effectiveness.
//!
//! ```no_run
//! use ladybug::embedding::LexicalProvider;
//! use ladybug::localize::{localize, LocalizeConfig};
//! use ladybug::{index_store, trace};
//!
//! # fn main() -> Result<(), ladybug::Error> {
//! let mut provider = LexicalProvider::new();
//! let fresh = index_store::ensure_fresh("app/".as_ref(), "app.lbi".as_ref(), &mut provider)?;
//! let trace = trace::parse_trace(&std::fs::read_to_string("execution.json")?)?;
//! let ranking = localize(
//!     "Crash when saving a note",
//!     Some(&trace),
//!     &fresh.index,
//!     &LocalizeConfig::gui(),
//!     &mut provider,
//! )?;
//! println!("{}", ranking.to_markdown(10));
//! # Ok(())
//! # }
//! ```

pub mod cli;
pub mod embedding;
pub mod eval;
pub mod index_store;
pub mod ingest;
pub mod localize;
pub mod preprocess;
pub mod synthetic;
pub mod trace;

mod error;

pub use error::Error;
