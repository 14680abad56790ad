//! Metamath database parsing, verification and KB extraction.

mod extract;
mod parser;
mod proof;
mod syntax;

pub use extract::{extract_kb, ExtractCfg, ExtractOutcome, ExtractReport};
pub use parser::{mm_parse, Database, Frame, Proof, Statement, StmtId, StmtKind, Tok};
pub use proof::{
    decode_compressed_proof, replay_proof, verify_database, CStep, ReplayOutcome, TreeBuilder,
    VerifyReport,
};
pub use syntax::{frame_var_env, unparse, FormulaParser, SyntaxGrammar, SySym, SyntaxProd, VarEnv};
