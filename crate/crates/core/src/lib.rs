//! Material calibration, residual-stress identification and shape prediction
//! for 4D-printed bi-layer grid structures.

// Range checks are written as negated comparisons so that NaN fails them.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod accuracy;
pub mod dma;
pub mod doc;
pub mod grid;
pub mod material;
pub mod numeric;
pub mod reference;
pub mod shooter;
pub mod sim;
pub mod unit;
