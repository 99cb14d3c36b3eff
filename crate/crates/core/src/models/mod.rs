//! Built-in model families and their statistic pools.

pub mod coalescent;
pub mod gaussian;
pub mod popgen;
pub mod randomwalk;
