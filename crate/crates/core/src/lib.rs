//! Chip-firing on the infinite binary tree whose root carries a self-loop:
//! unlabeled and labeled dynamics, exhaustive enumeration of labeled stable
//! configurations, and exact bounds on how many there are.

pub mod bounds;
pub mod enumeration;
pub mod labeled;
pub mod tree;
pub mod unlabeled;
