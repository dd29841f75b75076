//! Exact computation with hereditary properties of finite relational structures.

pub mod arrays;
pub mod components;
pub mod corpus;
pub mod error;
pub mod oscillate;
pub mod property;
pub mod simclass;
pub mod structures;
pub mod template;

pub use error::{Error, Result};
pub use structures::{Language, Structure};
