//! Boolean fault tree logic.
//!
//! Parses static fault trees (AND/OR/VOT gates over shared basic events) and a
//! two-layer query language over them, compiles both to reduced ordered binary
//! decision diagrams, and answers model-checking queries: evaluate a status
//! vector, enumerate all satisfying vectors, and produce minimal-revision
//! counterexamples.

pub mod analysis;
pub mod bdd;
pub mod compile;
pub mod ft;
mod lex;
pub mod logic;

pub use analysis::{
    oracle_evaluate, AnalysisError, Analyzer, CexOutcome, Counterexample, OracleResult,
    ResultCube, ResultSet, Verdict, ORACLE_MAX_EVENTS,
};
pub use bdd::{BddManager, BddRef, BinOp, Cube, VarId};
pub use compile::{CacheStats, CompileError, CompileResult, Compiler, ScopeMode};
pub use ft::{
    parse_fault_tree, parse_unvalidated, ElementDef, FaultTree, FtError, GateType, ParseError,
    StatusVector, ValidationReport, Violation,
};
pub use logic::{desugar, parse_formula, CmpOp, CoreFormula, Formula, FormulaError, Layer};
