//! Unimodular rows over finite commutative rings: excision rings, relative
//! elementary groups, orbit spaces and their group structure.

pub mod cache;
pub mod calculus;
pub mod error;
pub mod excision;
pub mod group;
pub mod matrix;
pub mod report;
pub mod ring;
pub mod rows;
pub mod srange;
pub mod suite;

pub use error::{Error, Result};

/// Caps applied to every enumeration a checker performs.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
pub struct Budgets {
    /// Ring sizes and candidate rows.
    pub elements: u64,
    /// Elements of a single matrix group closure.
    pub group: usize,
}

impl Default for Budgets {
    fn default() -> Self {
        Budgets {
            elements: rows::DEFAULT_ROW_BUDGET,
            group: group::DEFAULT_GROUP_BUDGET,
        }
    }
}

impl Budgets {
    pub fn ring(&self) -> usize {
        self.elements.min(ring::DEFAULT_RING_BUDGET as u64) as usize
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({"elements": self.elements, "group": self.group})
    }
}
