pub mod chart;
pub mod cli;
pub mod error;
pub mod experiments;
pub mod flow;
pub mod gradient;
pub mod holonomy;
pub mod mat2;
pub mod mcg;
pub mod systole;
pub mod word;
