//! Sequences over `{0, 1, *}` and the relations defining the dendrite model.

mod relations;
mod seq;
mod space;
mod symbol;

pub use relations::*;
pub use seq::*;
pub use space::*;
pub use symbol::*;
