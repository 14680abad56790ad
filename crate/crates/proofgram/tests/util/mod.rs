//! Shared helpers for integration tests.

use proofgram::metamath::{self, Database};
use std::path::PathBuf;

/// The 17 Theorem-Sampler entries that expand and compress quickly.
pub const THEOREM_SAMPLER_17: [&str; 17] = [
    "idALT", "peirce", "anim12", "exmid", "pm5.18", "consensus", "meredith", "19.12", "19.35",
    "equid", "2eu5", "uncom", "abeq2", "isset", "ru", "peano3", "ac2",
];

pub fn set_mm_path() -> Option<PathBuf> {
    if let Ok(p) = std::env::var("SET_MM") {
        let p = PathBuf::from(p);
        if p.exists() {
            return Some(p);
        }
    }
    let ws = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data/set.mm");
    if ws.exists() {
        return Some(ws);
    }
    None
}

/// Parse set.mm if available; print a skip notice otherwise.
pub fn load_set_mm() -> Option<Database> {
    let Some(path) = set_mm_path() else {
        println!("SKIP: set.mm not found (set SET_MM or place it at data/set.mm)");
        return None;
    };
    let text = std::fs::read_to_string(&path).expect("read set.mm");
    Some(metamath::mm_parse(&text).expect("parse set.mm"))
}
