pub mod automaton;
pub mod oracle;
pub mod rng;
pub mod semigroup;
pub mod tree;
pub mod wsts;
pub mod xpath;
