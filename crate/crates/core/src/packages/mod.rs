pub mod dcg;
pub mod fsyntax;
