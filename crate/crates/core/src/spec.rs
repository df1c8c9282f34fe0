//! JSON spec documents and element literals `[[a,k],...,w]`.

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::group::FinGroup;
use crate::ptoral::{AmbientGroup, GroupElement, TorusElement, DEFAULT_TRUNCATION};

/// Element literal: one `[a, k]` pair per torus coordinate, then the π-index.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Literal {
    pub coords: Vec<(i64, u32)>,
    pub w: u32,
}

impl Literal {
    pub fn of(x: &GroupElement) -> Literal {
        Literal { coords: x.t.coords().iter().map(|c| (c.a as i64, c.k)).collect(), w: x.w }
    }

    pub fn element(&self, amb: &AmbientGroup) -> Result<GroupElement> {
        if self.coords.len() != amb.rank() {
            return Err(Error::spec(format!("literal has {} coordinates, rank is {}", self.coords.len(), amb.rank())));
        }
        if self.w as usize >= amb.pi_order() {
            return Err(Error::spec(format!("π-index {} out of range", self.w)));
        }
        let pairs: Vec<(i128, u32)> = self.coords.iter().map(|&(a, k)| (a as i128, k)).collect();
        let x = GroupElement { t: TorusElement::from_pairs(amb.p(), &pairs), w: self.w };
        if !amb.contains(&x) {
            return Err(Error::Truncation(format!("{x} lies above truncation {}", amb.truncation())));
        }
        Ok(x)
    }
}

impl Serialize for Literal {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut v: Vec<serde_json::Value> =
            self.coords.iter().map(|&(a, k)| serde_json::json!([a, k])).collect();
        v.push(serde_json::json!(self.w));
        v.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Literal {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v: Vec<serde_json::Value> = Vec::deserialize(d)?;
        let (last, rest) = v.split_last().ok_or_else(|| D::Error::custom("empty element literal"))?;
        let w = last.as_u64().ok_or_else(|| D::Error::custom("π-index must be a non-negative integer"))? as u32;
        let coords = rest
            .iter()
            .map(|c| {
                let pair = c.as_array().filter(|a| a.len() == 2).ok_or_else(|| D::Error::custom("coordinate must be [a, k]"))?;
                let a = pair[0].as_i64().ok_or_else(|| D::Error::custom("numerator must be an integer"))?;
                let k = pair[1].as_u64().ok_or_else(|| D::Error::custom("exponent must be a non-negative integer"))?;
                Ok((a, k as u32))
            })
            .collect::<std::result::Result<_, D::Error>>()?;
        Ok(Literal { coords, w })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PiSpec {
    pub table: Vec<Vec<u32>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GeneratorSpec {
    pub domain: Vec<Literal>,
    pub images: Vec<Literal>,
}

/// A finite group by permutation generators; its fusion system lives on a Sylow p-subgroup.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupSpec {
    pub permutations: Vec<Vec<u32>>,
}

/// Hand-specified automorphism group of a class representative.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AutGroupSpec {
    pub rep: Vec<Literal>,
    pub table: Vec<Vec<u32>>,
    /// `(g, index)` for every `g ∈ N_S(rep)`.
    pub eps: Vec<(Literal, u32)>,
    /// Images of the `rep` generators under `ρ(a)`, one list per index `a`.
    pub rho: Vec<Vec<Literal>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ObjectsSpec {
    /// `"centric"`: all F-centric subgroups.
    Keyword(String),
    /// Generators of subgroups; their F-conjugates and overgroups are added.
    List(Vec<Vec<Literal>>),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TransporterSpec {
    pub objects: ObjectsSpec,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub autgroups: Vec<AutGroupSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub full_tables: Option<serde_json::Value>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AdamsSpec {
    pub zeta: i64,
}

/// One stage of a hand-specified approximation: `S_i = T[level] ⋊ π`, with the full
/// automorphism groups of the listed subgroups (ε-images of `S_i` are always included).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageSpec {
    pub level: u32,
    #[serde(default)]
    pub full_aut: Vec<Vec<Literal>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageFamilySpec {
    pub name: String,
    pub stages: Vec<StageSpec>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpecDocument {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub p: u64,
    #[serde(default)]
    pub rank: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub truncation: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pi: Option<PiSpec>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub action: Vec<Vec<Vec<i64>>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub weyl: Vec<Vec<Vec<i64>>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub generators: Vec<GeneratorSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub group: Option<GroupSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub transporter: Option<TransporterSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub adams: Option<AdamsSpec>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub families: Vec<StageFamilySpec>,
}

impl SpecDocument {
    pub fn parse(text: &str) -> Result<Self> {
        let doc: SpecDocument = serde_json::from_str(text)?;
        doc.validate()?;
        Ok(doc)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("spec serializes")
    }

    pub fn is_finite_group(&self) -> bool {
        self.group.is_some()
    }

    fn validate(&self) -> Result<()> {
        if !crate::ptoral::is_prime(self.p) {
            return Err(Error::spec(format!("p = {} is not prime", self.p)));
        }
        if self.group.is_some() {
            if self.pi.is_some() || !self.generators.is_empty() {
                return Err(Error::spec("a finite-group spec carries no ambient or generators"));
            }
            self.finite_group()?;
            return Ok(());
        }
        self.ambient(None)?;
        Ok(())
    }

    /// The ambient group at the requested truncation (or the document's, or the default).
    pub fn ambient(&self, truncation: Option<u32>) -> Result<AmbientGroup> {
        let pi = self.pi.as_ref().ok_or_else(|| Error::spec("missing `pi`"))?;
        let n = truncation.or(self.truncation).unwrap_or(DEFAULT_TRUNCATION);
        AmbientGroup::new(self.p, self.rank, pi.table.clone(), self.action.clone(), n)
    }

    pub fn finite_group(&self) -> Result<FinGroup> {
        let g = self.group.as_ref().ok_or_else(|| Error::spec("missing `group`"))?;
        let d = g.permutations.first().map_or(0, |p| p.len());
        for p in &g.permutations {
            let mut s = p.clone();
            s.sort_unstable();
            if s != (0..d as u32).collect::<Vec<_>>() {
                return Err(Error::spec("entry of `permutations` is not a permutation"));
            }
        }
        Ok(FinGroup::from_perms(&g.permutations)?.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn literal_round_trip() {
        let l: Literal = serde_json::from_str("[[3,2],1]").unwrap();
        assert_eq!(l, Literal { coords: vec![(3, 2)], w: 1 });
        assert_eq!(serde_json::to_string(&l).unwrap(), "[[3,2],1]");
        let amb = AmbientGroup::dihedral(4).unwrap();
        let x = l.element(&amb).unwrap();
        assert_eq!(Literal::of(&x), l);
        let high: Literal = serde_json::from_str("[[1,5],0]").unwrap();
        assert!(high.element(&amb).is_err());
    }

    #[test]
    fn rejects_bad_documents() {
        assert!(SpecDocument::parse(r#"{"p":4,"rank":1,"pi":{"table":[[0]]},"action":[[[1]]]}"#).is_err());
        assert!(SpecDocument::parse(r#"{"p":2,"rank":1,"pi":{"table":[[0,1],[1,0]]},"action":[[[1]],[[2]]]}"#).is_err());
        assert!(SpecDocument::parse(r#"{"p":2,"rank":1}"#).is_err());
    }
}
