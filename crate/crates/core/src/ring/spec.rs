use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

/// Constructor tree for a finite commutative ring.
///
/// Element literals inside a spec (`poly`, `ideal`) are interpreted in the
/// ring named by `base`, using that ring's element syntax.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum RingSpec {
    Zmod {
        n: u64,
    },
    Product {
        factors: Vec<RingSpec>,
    },
    /// `base[x] / (poly)`, coefficients listed from the constant term up;
    /// the last one must be 1.
    PolyQuotient {
        base: Box<RingSpec>,
        poly: Vec<ElemLit>,
    },
    Quotient {
        base: Box<RingSpec>,
        ideal: Vec<ElemLit>,
    },
    /// Pairs `(r, i)` with `i` in the ideal; `(r,i)(s,j) = (rs, rj+si+ij)`.
    Excision {
        base: Box<RingSpec>,
        ideal: Vec<ElemLit>,
    },
    /// Pairs `(a, b)` of base elements with `a - b` in the ideal.
    Double {
        base: Box<RingSpec>,
        ideal: Vec<ElemLit>,
    },
    /// `(Z/k) ⊕ I`: pairs `(m, i)` with `m` an integer mod `k`.
    ZmodExcision {
        k: u64,
        base: Box<RingSpec>,
        ideal: Vec<ElemLit>,
    },
}

/// An element literal: a bare integer means that multiple of one.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ElemLit {
    Int(i64),
    Str(String),
}

impl From<&str> for ElemLit {
    fn from(s: &str) -> Self {
        ElemLit::Str(s.to_string())
    }
}

impl From<i64> for ElemLit {
    fn from(k: i64) -> Self {
        ElemLit::Int(k)
    }
}

impl RingSpec {
    pub fn zmod(n: u64) -> Self {
        RingSpec::Zmod { n }
    }

    pub fn canonical_json(&self) -> String {
        serde_json::to_string(self).expect("ring spec serializes")
    }

    pub fn hash(&self) -> [u8; 32] {
        Sha256::digest(self.canonical_json().as_bytes()).into()
    }

    pub fn hash_hex(&self) -> String {
        hex::encode(self.hash())
    }

    pub fn from_json(text: &str) -> crate::Result<Self> {
        serde_json::from_str(text).map_err(|e| crate::Error::Spec(e.to_string()))
    }
}

/// Split `s` on commas that are not nested inside brackets.
pub(crate) fn split_top_level(s: &str) -> Option<Vec<&str>> {
    let mut depth = 0i32;
    let mut parts = Vec::new();
    let mut start = 0;
    for (i, ch) in s.char_indices() {
        match ch {
            '(' | '[' => depth += 1,
            ')' | ']' => {
                depth -= 1;
                if depth < 0 {
                    return None;
                }
            }
            ',' if depth == 0 => {
                parts.push(s[start..i].trim());
                start = i + 1;
            }
            _ => {}
        }
    }
    if depth != 0 {
        return None;
    }
    let last = s[start..].trim();
    if !(parts.is_empty() && last.is_empty()) {
        parts.push(last);
    }
    Some(parts)
}

/// Strip one layer of the given delimiters, if present.
pub(crate) fn strip_delims(s: &str, open: char, close: char) -> Option<&str> {
    let s = s.trim();
    s.strip_prefix(open)?.strip_suffix(close)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_round_trip() {
        let text = r#"{"type":"excision","base":{"type":"zmod","n":4},"ideal":["2"]}"#;
        let spec = RingSpec::from_json(text).unwrap();
        assert_eq!(
            spec,
            RingSpec::Excision {
                base: Box::new(RingSpec::zmod(4)),
                ideal: vec!["2".into()]
            }
        );
        assert_eq!(spec.canonical_json(), text);
    }

    #[test]
    fn integer_literals_accepted() {
        let spec = RingSpec::from_json(
            r#"{"type":"poly_quotient","base":{"type":"zmod","n":2},"poly":[1,1,1]}"#,
        )
        .unwrap();
        match spec {
            RingSpec::PolyQuotient { poly, .. } => assert_eq!(poly.len(), 3),
            _ => panic!(),
        }
    }

    #[test]
    fn malformed_reports_position() {
        let err = RingSpec::from_json("{\"type\":\"zmod\",\n \"n\": }").unwrap_err();
        assert!(err.to_string().contains("line 2 column"), "{err}");
        let err = RingSpec::from_json("{\"type\":\"zmod\",\n \"m\": 3}").unwrap_err();
        assert!(err.to_string().contains("`m`"), "{err}");
    }

    #[test]
    fn split_respects_nesting() {
        assert_eq!(
            split_top_level("(1, 2), [3, 4], 5").unwrap(),
            vec!["(1, 2)", "[3, 4]", "5"]
        );
        assert!(split_top_level("(1, 2").is_none());
        assert!(split_top_level("").unwrap().is_empty());
    }
}
