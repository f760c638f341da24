pub mod analysis;
pub mod cli;
pub mod eval;
pub mod parser;
pub mod printer;
pub mod scope;
pub mod subst;
pub mod syntax;
pub mod typing;
pub mod value;
