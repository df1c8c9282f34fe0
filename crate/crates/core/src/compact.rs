//! A p-local compact group seen at truncation `N`: the finite model `S[N]`, its subgroup
//! lattice, the level-`N` fusion system, and the bullet construction.
//!
//! The level-`N` fusion system is generated by `Inn(S[N])` and the spec generators. Queries
//! about subgroups that live strictly below the top level agree with the compact system.

use std::collections::HashMap;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::finfusion::{FusionSystem, Morph};
use crate::group::{Lattice, SubId};
use crate::ptoral::{ipow, AmbientGroup, GroupElement, Truncated};
use crate::spec::{Literal, SpecDocument};

pub type Matrix = Vec<Vec<i64>>;

#[derive(Debug, Clone)]
pub struct Level {
    pub ambient: AmbientGroup,
    pub model: Arc<Truncated>,
    pub lat: Arc<Lattice>,
    pub fusion: Arc<FusionSystem>,
    /// Torus automorphisms in `Aut_F(T)` beyond those induced by π.
    pub weyl: Vec<Matrix>,
}

impl Level {
    pub fn new(amb: &AmbientGroup, gens: &[(Vec<GroupElement>, Vec<GroupElement>)], weyl: Vec<Matrix>, cap: usize) -> Result<Self> {
        let model = Arc::new(Truncated::new(amb)?);
        let lat = Arc::new(Lattice::new(Arc::new(model.group.clone()), amb.p())?);
        let mut maps = Vec::new();
        for (dom, img) in gens {
            let d = model.indices(dom)?;
            let i = model.indices(img)?;
            maps.push(Morph::from_generators(&lat, &d, &i)?);
        }
        let fusion = Arc::new(FusionSystem::new(lat.clone(), maps, cap)?);
        for m in &weyl {
            if m.len() != amb.rank() || m.iter().any(|r| r.len() != amb.rank()) {
                return Err(Error::spec("weyl matrices must be rank × rank"));
            }
        }
        Ok(Level { ambient: amb.clone(), model, lat, fusion, weyl })
    }

    pub fn from_doc(doc: &SpecDocument, truncation: Option<u32>, cap: usize) -> Result<Self> {
        let amb = doc.ambient(truncation)?;
        let mut gens = Vec::new();
        for g in &doc.generators {
            let d = g.domain.iter().map(|l| l.element(&amb)).collect::<Result<Vec<_>>>()?;
            let i = g.images.iter().map(|l| l.element(&amb)).collect::<Result<Vec<_>>>()?;
            gens.push((d, i));
        }
        Self::new(&amb, &gens, doc.weyl.clone(), cap)
    }

    /// Same ambient and torus data with a different fusion system.
    pub fn with_fusion(&self, fusion: FusionSystem) -> Level {
        Level { fusion: Arc::new(fusion), ..self.clone() }
    }

    pub fn n(&self) -> u32 {
        self.ambient.truncation()
    }

    pub fn index(&self, x: &GroupElement) -> Result<u32> {
        self.model.indices(std::slice::from_ref(x)).map(|v| v[0])
    }

    pub fn sub(&self, gens: &[GroupElement]) -> Result<SubId> {
        let idx = self.model.indices(gens)?;
        Ok(self.lat.generated(&idx))
    }

    pub fn sub_from_literals(&self, lits: &[Literal]) -> Result<SubId> {
        let els = lits.iter().map(|l| l.element(&self.ambient)).collect::<Result<Vec<_>>>()?;
        self.sub(&els)
    }

    pub fn element(&self, i: u32) -> &GroupElement {
        self.model.element(i)
    }

    pub fn label(&self, i: u32) -> String {
        self.model.element(i).to_string()
    }

    /// Subgroup written by its generators.
    pub fn sub_label(&self, id: SubId) -> String {
        let g: Vec<String> = self.lat.gens(id).iter().map(|&x| self.label(x)).collect();
        format!("<{}>", g.join(","))
    }

    /// `T[v] ⋊ π`.
    pub fn level_sub(&self, v: u32) -> SubId {
        self.lat.id_of(&self.model.level_subgroup(v)).expect("level subgroup")
    }

    pub fn torus(&self) -> SubId {
        self.lat.id_of(&self.model.torus()).expect("torus")
    }

    /// Torus part `P ∩ T`.
    pub fn torus_part(&self, id: SubId) -> SubId {
        self.lat.meet(id, self.torus())
    }

    /// Largest torus level reached by elements of the subgroup.
    pub fn torus_level(&self, id: SubId) -> u32 {
        self.lat.elems(id).iter().map(|&x| self.element(x).t.level()).max().unwrap_or(0)
    }

    /// Torus residues of an element of `T[N]` at denominator `p^N`.
    fn residues(&self, i: u32) -> Vec<i128> {
        self.element(i).t.residues(self.ambient.p(), self.n()).into_iter().map(|x| x as i128).collect()
    }

    /// The Weyl group `W` generated by the π-action and the extra torus automorphisms, mod `p^l`.
    pub fn weyl_group(&self, l: u32) -> Vec<Matrix> {
        let q = ipow(self.ambient.p(), l) as i128;
        let red = |m: &Matrix| -> Matrix { m.iter().map(|r| r.iter().map(|&x| (x as i128).rem_euclid(q) as i64).collect()).collect() };
        let mut gens: Vec<Matrix> = self.ambient.action().iter().map(red).collect();
        gens.extend(self.weyl.iter().map(red));
        let r = self.ambient.rank();
        let id: Matrix = (0..r).map(|i| (0..r).map(|j| (i == j) as i64).collect()).collect();
        let mut all = vec![red(&id)];
        let mut i = 0;
        while i < all.len() {
            for g in &gens {
                let prod: Matrix = (0..r)
                    .map(|a| {
                        (0..r)
                            .map(|b| ((0..r).map(|k| all[i][a][k] as i128 * g[k][b] as i128).sum::<i128>()).rem_euclid(q) as i64)
                            .collect()
                    })
                    .collect();
                if !all.contains(&prod) {
                    all.push(prod);
                }
            }
            i += 1;
        }
        all.sort();
        all
    }

    pub fn bullet(&self) -> Result<Bullet> {
        let mut margin = 2;
        let mut cur = self.bullet_at(margin)?;
        loop {
            let next = self.bullet_at(margin + 1)?;
            if next == cur || margin >= self.n() + 2 {
                break;
            }
            margin += 1;
            cur = next;
        }
        let e = self.ambient.exponent_over_torus();
        let w = self.weyl_group(self.n());
        let t = self.torus();
        let mut w_maps: Vec<Vec<u32>> = w.iter().map(|m| self.torus_map(m, t)).collect();
        w_maps.sort();
        w_maps.dedup();
        let mut aut_t = self.fusion.aut(t)?.maps;
        aut_t.sort();
        Ok(Bullet { star: cur, e, margin, weyl_order: w.len(), weyl_consistent: w_maps == aut_t })
    }

    fn torus_map(&self, m: &Matrix, t: SubId) -> Vec<u32> {
        let p = self.ambient.p();
        let n = self.n();
        let q = ipow(p, n) as i128;
        self.lat
            .elems(t)
            .iter()
            .map(|&x| {
                let v = self.residues(x);
                let img: Vec<i128> = m.iter().map(|row| row.iter().zip(&v).map(|(a, b)| *a as i128 * b).sum::<i128>().rem_euclid(q)).collect();
                let el = GroupElement { t: crate::ptoral::TorusElement::from_residues(p, n, &img), w: 0 };
                self.index(&el).expect("torus image")
            })
            .collect()
    }

    fn bullet_at(&self, margin: u32) -> Result<Vec<SubId>> {
        let p = self.ambient.p();
        let n = self.n();
        let r = self.ambient.rank();
        let l = n + margin;
        let big = ipow(p, l);
        let count = (big as u128).pow(r as u32);
        if count > 1 << 22 {
            return Err(Error::cap("torus enumeration for the bullet construction", 1 << 22));
        }
        let w = self.weyl_group(l);
        let e = self.ambient.exponent_over_torus();
        let pe = ipow(p, e);
        let g = self.lat.group();
        let qn = ipow(p, n) as i128;
        let mut memo: HashMap<Vec<u32>, SubId> = HashMap::new();
        let mut star = Vec::with_capacity(self.lat.len());
        for id in 0..self.lat.len() {
            let mut powers: Vec<u32> = self.lat.elems(id).iter().map(|&x| g.pow(x, pe)).collect();
            powers.sort_unstable();
            powers.dedup();
            let i0 = match memo.get(&powers) {
                Some(&s) => s,
                None => {
                    let vs: Vec<Vec<i128>> = powers.iter().map(|&x| self.residues(x)).collect();
                    let active: Vec<&Matrix> = w
                        .iter()
                        .filter(|m| {
                            vs.iter().all(|v| {
                                (0..r).all(|a| {
                                    let s: i128 = (0..r).map(|b| m[a][b] as i128 * v[b]).sum();
                                    (s - v[a]).rem_euclid(qn) == 0
                                })
                            })
                        })
                        .collect();
                    let mut els = Vec::new();
                    let mut u = vec![0i128; r];
                    for code in 0..count {
                        let mut c = code;
                        for slot in u.iter_mut() {
                            *slot = (c % big as u128) as i128;
                            c /= big as u128;
                        }
                        let fixed = active.iter().all(|m| {
                            (0..r).all(|a| {
                                let s: i128 = (0..r).map(|b| m[a][b] as i128 * u[b]).sum();
                                (s - u[a]).rem_euclid(big as i128) == 0
                            })
                        });
                        if fixed {
                            let red: Vec<i128> = u.iter().map(|x| x.rem_euclid(qn)).collect();
                            let el = GroupElement { t: crate::ptoral::TorusElement::from_residues(p, n, &red), w: 0 };
                            els.push(self.index(&el)?);
                        }
                    }
                    els.sort_unstable();
                    els.dedup();
                    let s = self.lat.generated(&els);
                    memo.insert(powers, s);
                    s
                }
            };
            let j = self.lat.join(id, i0);
            let meet = self.lat.meet(id, i0);
            if self.lat.size(j) * self.lat.size(meet) != self.lat.size(id) * self.lat.size(i0) {
                return Err(Error::Failed(format!("P·I(P)₀ is not a subgroup for subgroup {id}")));
            }
            star.push(j);
        }
        Ok(star)
    }
}

/// `P ↦ P^•` on every subgroup of `S[N]`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Bullet {
    pub star: Vec<SubId>,
    /// `exp(S/T) = p^e`.
    pub e: u32,
    /// Extra torus levels used to detect divisibility.
    pub margin: u32,
    pub weyl_order: usize,
    /// Whether `W` restricted to `T[N]` equals `Aut_F(T[N])`.
    pub weyl_consistent: bool,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ptoral::DEFAULT_CAP;

    fn so3(n: u32) -> Level {
        let amb = AmbientGroup::dihedral(n).unwrap();
        let t1 = amb.torus_basis(0, 1);
        let x = amb.pi_element(1);
        let t1x = amb.mul(&t1, &x);
        // order-3 automorphism of V: t1 -> x -> t1x
        Level::new(&amb, &[(vec![t1.clone(), x.clone()], vec![x, t1x])], vec![], DEFAULT_CAP).unwrap()
    }

    #[test]
    fn dihedral_bullets() {
        let lv = so3(6);
        let b = lv.bullet().unwrap();
        assert_eq!(b.e, 1);
        assert_eq!(b.weyl_order, 2);
        assert!(b.weyl_consistent);
        let amb = &lv.ambient;
        let v = lv.sub(&[amb.torus_basis(0, 1), amb.pi_element(1)]).unwrap();
        assert_eq!(b.star[v], v);
        let t = lv.torus();
        for k in 3..=6 {
            let tk = lv.sub(&[amb.torus_basis(0, k)]).unwrap();
            assert_eq!(b.star[tk], t, "T_{k}");
        }
        let t2 = lv.sub(&[amb.torus_basis(0, 2)]).unwrap();
        assert_eq!(b.star[t2], t2);
        let d = lv.sub(&[amb.torus_basis(0, 3), amb.pi_element(1)]).unwrap();
        assert_eq!(b.star[d], lv.lat.whole());
    }

    #[test]
    fn trivial_torus_bullets_are_the_torus() {
        let amb = AmbientGroup::torus(2, 1, 5).unwrap();
        let lv = Level::new(&amb, &[], vec![], DEFAULT_CAP).unwrap();
        let b = lv.bullet().unwrap();
        assert!(b.star.iter().all(|&s| s == lv.lat.whole()));
    }
}
