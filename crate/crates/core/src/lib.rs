// NaN must fail range checks, so `!(x > 0.0)` style guards are intended.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod criteria;
pub mod entire;
pub mod numerics;
pub mod report;
pub mod smoothing;
pub mod weights;
