//! Budgets for exhaustive computations.
//!
//! Defaults can be overridden with the `ORDLAB_BOUNDS` environment variable,
//! a comma separated list of `key=value` pairs, e.g. `enum=24,seq=10`.

use std::sync::OnceLock;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Bounds {
    /// Largest N accepted by set enumeration.
    pub enum_n: u32,
    /// Largest support index accepted by the norm and embedding code.
    pub support: u32,
    /// Longest sequence accepted by `seqcheck::analyze`.
    pub seq_len: usize,
    /// Longest sequence accepted by `small_sup_combination`.
    pub small_sup_len: usize,
    /// Largest number of nodes a materialized tree may have.
    pub tree_nodes: usize,
}

impl Default for Bounds {
    fn default() -> Self {
        Bounds {
            enum_n: 20,
            support: 24,
            seq_len: 12,
            small_sup_len: 16,
            tree_nodes: 200_000,
        }
    }
}

impl Bounds {
    /// Parse an override string on top of the defaults. Unknown keys and
    /// malformed values are ignored.
    pub fn parse(spec: &str) -> Bounds {
        let mut b = Bounds::default();
        for item in spec.split(',') {
            let Some((k, v)) = item.split_once('=') else {
                continue;
            };
            let Ok(v) = v.trim().parse::<usize>() else {
                continue;
            };
            match k.trim() {
                "enum" => b.enum_n = v as u32,
                "support" => b.support = v as u32,
                "seq" => b.seq_len = v,
                "smallsup" => b.small_sup_len = v,
                "nodes" => b.tree_nodes = v,
                _ => {}
            }
        }
        b
    }
}

/// Process-wide bounds, read once from the environment.
pub fn bounds() -> Bounds {
    static B: OnceLock<Bounds> = OnceLock::new();
    *B.get_or_init(|| match std::env::var("ORDLAB_BOUNDS") {
        Ok(s) => Bounds::parse(&s),
        Err(_) => Bounds::default(),
    })
}
