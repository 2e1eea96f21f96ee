//! Knowledge mining over categorical, binary-class data.
//!
//! The pipeline reads a clausal dataset ([`dataset`]), induces an ID3
//! decision tree ([`id3`]) or frequent patterns and association rules
//! ([`apriori`]), turns tree paths into a weighted knowledge base
//! ([`knowledge_base`]) and deploys it either through an interactive
//! consultation ([`inference`]) or as integrity triggers over records
//! ([`guard`]).
//!
//! ```
//! use ruleforge::{dataset, id3};
//!
//! let d = dataset::parse_dataset(
//!     "attribute(fever, [yes, no]).
//!      attribute(class, [yes, no]).
//!      instance(1, class=no, [fever=yes]).
//!      instance(2, class=yes, [fever=no]).",
//! )?;
//! let tree = id3::build_tree(&d)?;
//! assert_eq!(tree.nodes().len(), 3);
//! # Ok::<(), Box<dyn std::error::Error>>(())
//! ```

pub mod apriori;
pub mod dataset;
pub mod entropy;
pub mod error;
pub mod guard;
pub mod id3;
pub mod inference;
pub mod knowledge_base;
mod lexer;

pub use error::{Error, ParseError, ParseErrorKind, Result};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/datasets.md")]
    mod datasets {}
    #[doc = include_str!("../../../book/src/id3.md")]
    mod id3 {}
    #[doc = include_str!("../../../book/src/apriori.md")]
    mod apriori {}
    #[doc = include_str!("../../../book/src/consultation.md")]
    mod consultation {}
    #[doc = include_str!("../../../book/src/guards.md")]
    mod guards {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
    #[doc = include_str!("../../../book/src/service.md")]
    mod service {}
}
