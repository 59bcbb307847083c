pub mod elliptic;
pub mod harness;
pub mod identities;
pub mod qexact;
pub mod telescope;
pub mod theta;
