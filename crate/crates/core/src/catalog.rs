//! Built-in spec documents.

use crate::error::{Error, Result};
use crate::spec::SpecDocument;

pub struct Entry {
    pub name: &'static str,
    pub summary: &'static str,
    pub text: &'static str,
}

pub const ENTRIES: &[Entry] = &[
    Entry {
        name: "dihedral",
        summary: "bare dihedral ambient T ⋊ C2 at p = 2, inner fusion",
        text: include_str!("../specs/dihedral.json"),
    },
    Entry {
        name: "dihedral-so3",
        summary: "SO(3) at p = 2: Σ3 on the Klein class of V, Aut_L(V) = Σ4, stage families",
        text: include_str!("../specs/dihedral-so3.json"),
    },
    Entry {
        name: "trivial-torus",
        summary: "the 3-adic circle with trivial fusion",
        text: include_str!("../specs/trivial-torus.json"),
    },
    Entry {
        name: "s4-d8",
        summary: "S4 at p = 2 (Sylow D8)",
        text: include_str!("../specs/s4-d8.json"),
    },
    Entry {
        name: "d16-inner",
        summary: "inner fusion of D16 as a truncated dihedral ambient",
        text: include_str!("../specs/d16-inner.json"),
    },
    Entry {
        name: "a4-v4",
        summary: "A4 at p = 2 (Sylow V4)",
        text: include_str!("../specs/a4-v4.json"),
    },
];

pub fn find(name: &str) -> Option<&'static Entry> {
    ENTRIES.iter().find(|e| e.name == name)
}

pub fn load(name: &str) -> Result<SpecDocument> {
    let e = find(name).ok_or_else(|| Error::spec(format!("no built-in example `{name}`")))?;
    SpecDocument::parse(e.text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_entry_parses() {
        assert!(ENTRIES.len() >= 5);
        for e in ENTRIES {
            let d = load(e.name).unwrap();
            assert_eq!(d.name.as_deref(), Some(e.name));
        }
        let so3 = load("dihedral-so3").unwrap();
        assert_eq!((so3.rank, so3.pi.as_ref().unwrap().table.len()), (1, 2));
        assert_eq!(load("trivial-torus").unwrap().pi.unwrap().table.len(), 1);
    }
}
