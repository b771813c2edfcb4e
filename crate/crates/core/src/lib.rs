//! Symbolic CTL model checking for Presburger counter systems.
//!
//! The crate is `no_std` and only needs an allocator. Wall-clock budgets are
//! supplied by the caller through [`reach::Clock`].

#![no_std]

extern crate alloc;

pub mod int;
pub mod presburger;
pub mod ctl;
pub mod syntax;
pub mod system;
pub mod reach;
pub mod flatten;
pub mod eg_under;
pub mod eg_over;
pub mod oracle;
