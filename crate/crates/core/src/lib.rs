pub mod certify;
pub mod cli;
pub mod cu_analysis;
pub mod field2m;
pub mod lwbound;
pub mod mpoly;
mod upoly;
