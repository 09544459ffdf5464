pub mod arith;
pub mod debugger;
pub mod expand;
pub mod packages;
pub mod program;
pub mod protocol;
pub mod solver;
pub mod syntax;
pub mod term;

pub use expand::{Registry, SymbolTable};
pub use program::{load_program, run_query, Program};
pub use solver::{Database, Solver};
pub use term::{Substitution, Term, Var, VarGen};
