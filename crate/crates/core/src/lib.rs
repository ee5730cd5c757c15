#![allow(clippy::needless_range_loop)]

pub mod catalog;
pub mod config;
pub mod context;
pub mod error;
pub mod geometry;
pub mod hejhal;
pub mod laplace;
pub mod periods;
pub mod quadrature;
pub mod suite;
pub mod szego;

pub use context::{Problem, SzegoPair};
pub use error::{Error, Result};
