pub mod bounds;
pub mod cli;
pub mod error;
pub mod fock;
pub mod kernels;
pub mod mc;
pub mod quadrature;
pub mod resummation;
