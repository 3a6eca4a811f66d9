mod csc;
pub mod ldl;
pub mod vecops;

pub use csc::CscMatrix;
pub use ldl::{LdlFactor, LdlSymbolic};
