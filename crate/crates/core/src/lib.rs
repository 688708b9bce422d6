pub mod cli;
pub mod domain;
pub mod oracle;

mod linalg;
pub mod metamodel;
pub mod mlp;
pub mod polyfit;
pub mod optimize;
pub mod prbm;
pub mod shapematch;
