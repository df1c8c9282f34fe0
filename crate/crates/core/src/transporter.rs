//! Finite transporter systems.
//!
//! A system is a lattice of subgroups of `S`, a fusion system over `S`, an object set and a
//! [`Model`] that enumerates morphism sets and composes them. Morphisms are opaque keys; derived
//! systems (telescopic extensions, fixed subcategories, quotients) wrap a base model and keep
//! the base keys.

use std::collections::{HashMap, HashSet};
use std::fmt::Debug;
use std::sync::{Arc, Mutex};

use serde::Serialize;

use crate::compact::{Bullet, Level};
use crate::error::{Error, Result};
use crate::finfusion::{FusionSystem, Morph};
use crate::group::{FinGroup, Lattice, SubId};
use crate::spec::{AutGroupSpec, ObjectsSpec, TransporterSpec};

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Mor {
    pub src: SubId,
    pub dst: SubId,
    pub key: Vec<u32>,
}

pub trait Model: Send + Sync + Debug {
    /// All morphisms `P → Q`, sorted.
    fn mor(&self, p: SubId, q: SubId) -> Result<Vec<Mor>>;
    /// `g ∘ f`.
    fn compose(&self, g: &Mor, f: &Mor) -> Result<Mor>;
    /// `ε_{P,Q}(g)` for `g ∈ N_S(P,Q)`.
    fn eps(&self, p: SubId, q: SubId, g: u32) -> Result<Mor>;
    fn rho(&self, f: &Mor) -> Result<Morph>;
    fn kind(&self) -> &'static str;
    /// Action of an automorphism of `S` through the `ε(g) ∘ m` decomposition labels.
    fn adams(&self, _f: &Mor, _psi: &ElementAuto) -> Result<Mor> {
        Err(Error::pre("morphism lacks a decomposition label"))
    }
    /// Whether [`Model::adams`] is well defined for `psi`.
    fn adams_check(&self, _psi: &ElementAuto) -> Result<()> {
        Ok(())
    }
}

/// An automorphism of `S`, as permutations of its elements and of its subgroups.
#[derive(Clone, Debug)]
pub struct ElementAuto {
    pub elems: Vec<u32>,
    pub subs: Vec<SubId>,
}

impl ElementAuto {
    pub fn from_elements(lat: &Lattice, elems: Vec<u32>) -> Result<Self> {
        let subs = (0..lat.len())
            .map(|i| {
                let mut v: Vec<u32> = lat.elems(i).iter().map(|&x| elems[x as usize]).collect();
                v.sort_unstable();
                lat.id_of(&v).ok_or_else(|| Error::Failed("element map is not an automorphism".into()))
            })
            .collect::<Result<_>>()?;
        Ok(ElementAuto { elems, subs })
    }
}

#[derive(Debug)]
pub struct TransporterSystem {
    lat: Arc<Lattice>,
    fusion: Arc<FusionSystem>,
    objects: Vec<SubId>,
    is_obj: Vec<bool>,
    model: Arc<dyn Model>,
    cache: Mutex<HashMap<(SubId, SubId), Arc<Vec<Mor>>>>,
}

impl TransporterSystem {
    pub fn from_model(fusion: Arc<FusionSystem>, objects: Vec<SubId>, model: Arc<dyn Model>) -> Self {
        let lat = fusion.lattice().clone();
        let mut objects = objects;
        objects.sort_unstable();
        objects.dedup();
        let mut is_obj = vec![false; lat.len()];
        for &o in &objects {
            is_obj[o] = true;
        }
        TransporterSystem { lat, fusion, objects, is_obj, model, cache: Mutex::new(HashMap::new()) }
    }

    pub fn lattice(&self) -> &Arc<Lattice> {
        &self.lat
    }
    pub fn fusion(&self) -> &Arc<FusionSystem> {
        &self.fusion
    }
    pub fn objects(&self) -> &[SubId] {
        &self.objects
    }
    pub fn is_object(&self, p: SubId) -> bool {
        self.is_obj[p]
    }
    pub fn model(&self) -> &Arc<dyn Model> {
        &self.model
    }
    pub fn kind(&self) -> &'static str {
        self.model.kind()
    }

    fn check_obj(&self, p: SubId) -> Result<()> {
        if self.is_obj.get(p).copied().unwrap_or(false) {
            Ok(())
        } else {
            Err(Error::pre(format!("subgroup {p} is not an object")))
        }
    }

    pub fn mor(&self, p: SubId, q: SubId) -> Result<Arc<Vec<Mor>>> {
        self.check_obj(p)?;
        self.check_obj(q)?;
        if let Some(v) = self.cache.lock().unwrap().get(&(p, q)) {
            return Ok(v.clone());
        }
        let v = Arc::new(self.model.mor(p, q)?);
        self.cache.lock().unwrap().insert((p, q), v.clone());
        Ok(v)
    }

    pub fn compose(&self, g: &Mor, f: &Mor) -> Result<Mor> {
        if f.dst != g.src {
            return Err(Error::pre("morphisms are not composable"));
        }
        self.model.compose(g, f)
    }

    pub fn eps(&self, p: SubId, q: SubId, g: u32) -> Result<Mor> {
        let c = self.lat.conj(g, p);
        if !self.lat.is_sub(c, q) {
            return Err(Error::pre(format!("element {g} does not conjugate {p} into {q}")));
        }
        self.model.eps(p, q, g)
    }

    pub fn rho(&self, f: &Mor) -> Result<Morph> {
        self.model.rho(f)
    }

    pub fn adams(&self, f: &Mor, psi: &ElementAuto) -> Result<Mor> {
        self.model.adams(f, psi)
    }

    pub fn adams_check(&self, psi: &ElementAuto) -> Result<()> {
        self.model.adams_check(psi)
    }

    pub fn identity(&self, p: SubId) -> Result<Mor> {
        self.eps(p, p, 0)
    }

    pub fn inclusion(&self, p: SubId, q: SubId) -> Result<Mor> {
        self.eps(p, q, 0)
    }

    /// `E(P) = ker(Aut_T(P) → Aut_F(P))`.
    pub fn e_kernel(&self, p: SubId) -> Result<Vec<Mor>> {
        let id = self.lat.elems(p).to_vec();
        let mut out = Vec::new();
        for f in self.mor(p, p)?.iter() {
            if self.rho(f)?.map == id {
                out.push(f.clone());
            }
        }
        Ok(out)
    }

    /// The unique `φ' : P' → Q'` with `ε_{Q,Q'}(1) ∘ φ = φ' ∘ ε_{P,P'}(1)`, if any.
    pub fn extend_through(&self, f: &Mor, p2: SubId, q2: SubId) -> Result<Vec<Mor>> {
        let lhs = self.compose(&self.inclusion(f.dst, q2)?, f)?;
        let inc = self.inclusion(f.src, p2)?;
        let mut out = Vec::new();
        for g in self.mor(p2, q2)?.iter() {
            if self.compose(g, &inc)? == lhs {
                out.push(g.clone());
            }
        }
        Ok(out)
    }

    /// Objects up to S-conjugacy.
    pub fn object_reps(&self) -> Vec<SubId> {
        let mut seen = HashSet::new();
        let mut out = Vec::new();
        for &o in &self.objects {
            let c = self.lat.class(o)[0];
            if seen.insert(c) {
                out.push(c);
            }
        }
        out
    }

    /// Total morphism count over all object pairs.
    pub fn total_morphisms(&self) -> Result<usize> {
        let mut n = 0;
        for &p in &self.objects {
            for &q in &self.objects {
                n += self.mor(p, q)?.len();
            }
        }
        Ok(n)
    }
}

fn require_closed(fusion: &FusionSystem, objects: &[SubId]) -> Result<()> {
    let lat = fusion.lattice();
    let set: HashSet<SubId> = objects.iter().copied().collect();
    for &o in objects {
        if let Some(&bad) = lat.overgroups(o).iter().find(|q| !set.contains(q)) {
            return Err(Error::pre(format!("object family is not closed under overgroups: {o} ≤ {bad}")));
        }
        if let Some(bad) = fusion.fclass(o)?.members.into_iter().find(|q| !set.contains(q)) {
            return Err(Error::pre(format!("object family is not closed under F-conjugacy: {o} ~ {bad}")));
        }
    }
    Ok(())
}

/// Closure of a family under F-conjugacy and overgroups.
pub fn close_objects(fusion: &FusionSystem, seeds: &[SubId]) -> Result<Vec<SubId>> {
    let lat = fusion.lattice();
    let mut set = HashSet::new();
    for &s in seeds {
        for m in fusion.fclass(s)?.members {
            for q in lat.overgroups(m) {
                set.insert(q);
            }
        }
    }
    // overgroups of conjugates are conjugates of overgroups only up to F; close again
    loop {
        let mut grew = false;
        for o in set.clone() {
            for m in fusion.fclass(o)?.members {
                if set.insert(m) {
                    grew = true;
                }
            }
        }
        if !grew {
            break;
        }
        for o in set.clone() {
            for q in lat.overgroups(o) {
                set.insert(q);
            }
        }
    }
    let mut v: Vec<SubId> = set.into_iter().collect();
    v.sort_unstable();
    Ok(v)
}

// ---------------------------------------------------------------- group model

#[derive(Debug)]
struct GroupModel {
    g: Arc<FinGroup>,
    lat: Arc<Lattice>,
    emb: Vec<u32>,
    pos: HashMap<u32, u32>,
    kernels: Option<HashMap<SubId, Vec<u32>>>,
}

impl GroupModel {
    fn canon(&self, x: u32, p: SubId) -> u32 {
        match self.kernels.as_ref().and_then(|k| k.get(&p)) {
            Some(k) => k.iter().map(|&c| self.g.mul(x, c)).min().unwrap(),
            None => x,
        }
    }
}

impl Model for GroupModel {
    fn mor(&self, p: SubId, q: SubId) -> Result<Vec<Mor>> {
        let pg: Vec<u32> = self.lat.gens(p).iter().map(|&s| self.emb[s as usize]).collect();
        let mut keys: Vec<u32> = (0..self.g.size() as u32)
            .filter(|&x| pg.iter().all(|&s| self.pos.get(&self.g.conj(x, s)).is_some_and(|&t| self.lat.contains(q, t))))
            .map(|x| self.canon(x, p))
            .collect();
        keys.sort_unstable();
        keys.dedup();
        Ok(keys.into_iter().map(|k| Mor { src: p, dst: q, key: vec![k] }).collect())
    }
    fn compose(&self, g: &Mor, f: &Mor) -> Result<Mor> {
        Ok(Mor { src: f.src, dst: g.dst, key: vec![self.canon(self.g.mul(g.key[0], f.key[0]), f.src)] })
    }
    fn eps(&self, p: SubId, q: SubId, g: u32) -> Result<Mor> {
        Ok(Mor { src: p, dst: q, key: vec![self.canon(self.emb[g as usize], p)] })
    }
    fn rho(&self, f: &Mor) -> Result<Morph> {
        let x = f.key[0];
        let map = self.lat.elems(f.src).iter().map(|&s| self.pos[&self.g.conj(x, self.emb[s as usize])]).collect();
        Ok(Morph { dom: f.src, cod: f.dst, map })
    }
    fn kind(&self) -> &'static str {
        if self.kernels.is_some() {
            "group-linking"
        } else {
            "group"
        }
    }
}

/// The transporter category `T_H(G)` over a Sylow subgroup, `Mor(P,Q) = N_G(P,Q)`.
/// `objects = None` takes all subgroups of the Sylow.
pub fn from_group(g: &FinGroup, p: u64, objects: Option<Vec<SubId>>) -> Result<TransporterSystem> {
    group_system(g, p, objects, false)
}

/// Centric linking system of a finite group: `Mor(P,Q) = N_G(P,Q)/O^p(C_G(P))` on F-centrics.
pub fn linking_of_group(g: &FinGroup, p: u64) -> Result<TransporterSystem> {
    group_system(g, p, None, true)
}

fn group_system(g: &FinGroup, p: u64, objects: Option<Vec<SubId>>, linking: bool) -> Result<TransporterSystem> {
    let (fusion, syl) = FusionSystem::from_group(g, p)?;
    let fusion = Arc::new(fusion);
    let lat = fusion.lattice().clone();
    let objects = match objects {
        Some(o) => o,
        None if linking => fusion.centrics()?,
        None => (0..lat.len()).collect(),
    };
    require_closed(&fusion, &objects)?;
    let pos: HashMap<u32, u32> = syl.iter().enumerate().map(|(i, &x)| (x, i as u32)).collect();
    let kernels = if linking {
        let mut k = HashMap::new();
        for &o in &objects {
            let pg: Vec<u32> = lat.gens(o).iter().map(|&s| syl[s as usize]).collect();
            let c = g.centralizer(&pg);
            // O^p(C): generated by the elements of order prime to p
            let pprime: Vec<u32> = c.iter().copied().filter(|&x| g.element_order(x) as u64 % p != 0).collect();
            k.insert(o, g.generate(&pprime));
        }
        Some(k)
    } else {
        None
    };
    let model = GroupModel { g: Arc::new(g.clone()), lat, emb: syl, pos, kernels };
    Ok(TransporterSystem::from_model(fusion, objects, Arc::new(model)))
}

// ---------------------------------------------------------------- amalgam model

/// Automorphism data of a class representative: `A = Aut_T(P0)`, `ε : N_S(P0) → A`, `ρ : A → Aut(P0)`.
#[derive(Clone, Debug)]
pub struct AutData {
    pub rep: SubId,
    pub group: FinGroup,
    pub eps: HashMap<u32, u32>,
    /// `ρ(a)` as image vectors over the elements of `rep`.
    pub rho: Vec<Vec<u32>>,
}

#[derive(Debug)]
struct RepData {
    p0: SubId,
    a: FinGroup,
    eps: HashMap<u32, u32>,
    eps_inv: HashMap<u32, u32>,
    rho: Vec<Vec<u32>>,
    /// `a = ε(g) ∘ m` with `m` least in its coset `ε(N_S(P0))·a`.
    labels: Vec<(u32, u32)>,
}

#[derive(Debug)]
pub struct AmalgamModel {
    lat: Arc<Lattice>,
    reps: Vec<RepData>,
    /// For each object `X`: representative index and `h_X` with `h_X X h_X⁻¹ = P0`.
    rep_of: Vec<Option<(usize, u32)>>,
}

impl AmalgamModel {
    fn conj_map(lat: &Lattice, x: u32, p: SubId) -> Vec<u32> {
        let g = lat.group();
        lat.elems(p).iter().map(|&e| g.conj(x, e)).collect()
    }

    /// Decomposition label `(g, m)` of a morphism key: `a = ε(g) ∘ m`.
    pub fn label(&self, src: SubId, key: &[u32]) -> Option<(u32, u32)> {
        let (r, _) = self.rep_of[src]?;
        self.reps[r].labels.get(key[1] as usize).copied()
    }

    pub fn rep_info(&self, x: SubId) -> Option<(SubId, u32)> {
        self.rep_of[x].map(|(r, h)| (self.reps[r].p0, h))
    }

    /// Elements `m` of `M_{P0}` for a representative.
    pub fn m_set(&self, p0: SubId) -> Vec<u32> {
        let Some(r) = self.reps.iter().find(|r| r.p0 == p0) else { return vec![] };
        let mut m: Vec<u32> = r.labels.iter().map(|l| l.1).collect();
        m.sort_unstable();
        m.dedup();
        m
    }

    pub fn aut_group(&self, p0: SubId) -> Option<&FinGroup> {
        self.reps.iter().find(|r| r.p0 == p0).map(|r| &r.a)
    }

    /// `a ↦ (g, m)` for every `a` in `A_{P0}`.
    pub fn labels(&self, p0: SubId) -> Option<&[(u32, u32)]> {
        self.reps.iter().find(|r| r.p0 == p0).map(|r| r.labels.as_slice())
    }

    pub fn eps_index(&self, p0: SubId, g: u32) -> Option<u32> {
        self.reps.iter().find(|r| r.p0 == p0).and_then(|r| r.eps.get(&g).copied())
    }

    /// Morphism from its normal form data.
    pub fn make(&self, p: SubId, q: SubId, r: SubId, a: u32) -> Mor {
        Mor { src: p, dst: q, key: vec![r as u32, a] }
    }
}

impl Model for AmalgamModel {
    fn mor(&self, p: SubId, q: SubId) -> Result<Vec<Mor>> {
        let (r, _) = self.rep_of[p].ok_or_else(|| Error::pre("not an object"))?;
        let rep = &self.reps[r];
        let mut out = Vec::new();
        for c in self.lat.class(rep.p0) {
            if self.lat.is_sub(c, q) {
                for a in 0..rep.a.size() as u32 {
                    out.push(Mor { src: p, dst: q, key: vec![c as u32, a] });
                }
            }
        }
        out.sort();
        Ok(out)
    }

    fn compose(&self, g2: &Mor, f1: &Mor) -> Result<Mor> {
        let grp = self.lat.group();
        let (r, hp) = self.rep_of[f1.src].unwrap();
        let (rq, hq) = self.rep_of[f1.dst].unwrap();
        let (r1, a1) = (f1.key[0] as SubId, f1.key[1]);
        let (r2, a2) = (g2.key[0] as SubId, g2.key[1]);
        let _ = hp;
        let h_r1 = self.rep_of[r1].unwrap().1;
        let rep = &self.reps[r];
        let x = self.lat.conj(hq, r1);
        if x == self.reps[rq].p0 {
            debug_assert_eq!(r, rq);
            let n = grp.mul(hq, grp.inv(h_r1));
            let a = rep.a.mul(rep.a.mul(a2, rep.eps[&n]), a1);
            return Ok(Mor { src: f1.src, dst: g2.dst, key: vec![r2 as u32, a] });
        }
        let Some(&g2e) = self.reps[rq].eps_inv.get(&a2) else {
            return Err(Error::Failed("restriction data missing for a non-ε automorphism".into()));
        };
        let h_r2 = self.rep_of[r2].unwrap().1;
        let y = grp.mul(grp.mul(grp.inv(h_r2), g2e), hq);
        let rp = self.lat.conj(y, r1);
        let h_rp = self.rep_of[rp].unwrap().1;
        let n = grp.mul(grp.mul(h_rp, y), grp.inv(h_r1));
        let a = rep.a.mul(rep.eps[&n], a1);
        Ok(Mor { src: f1.src, dst: g2.dst, key: vec![rp as u32, a] })
    }

    fn eps(&self, p: SubId, q: SubId, g: u32) -> Result<Mor> {
        let grp = self.lat.group();
        let (r, hp) = self.rep_of[p].unwrap();
        let rr = self.lat.conj(g, p);
        let h_r = self.rep_of[rr].unwrap().1;
        let n = grp.mul(grp.mul(h_r, g), grp.inv(hp));
        Ok(Mor { src: p, dst: q, key: vec![rr as u32, self.reps[r].eps[&n]] })
    }

    fn rho(&self, f: &Mor) -> Result<Morph> {
        let grp = self.lat.group();
        let (r, hp) = self.rep_of[f.src].unwrap();
        let rep = &self.reps[r];
        let h_r = self.rep_of[f.key[0] as SubId].unwrap().1;
        let p0_els = self.lat.elems(rep.p0);
        let pa = &rep.rho[f.key[1] as usize];
        let map = self
            .lat
            .elems(f.src)
            .iter()
            .map(|&x| {
                let y = grp.conj(hp, x);
                let z = pa[p0_els.binary_search(&y).unwrap()];
                grp.conj(grp.inv(h_r), z)
            })
            .collect();
        Ok(Morph { dom: f.src, cod: f.dst, map })
    }

    fn kind(&self) -> &'static str {
        "amalgam"
    }

    fn adams(&self, f: &Mor, psi: &ElementAuto) -> Result<Mor> {
        let grp = self.lat.group();
        let (r, hp) = self.rep_of[f.src].ok_or_else(|| Error::pre("not an object"))?;
        let rep = &self.reps[r];
        let (rr, a) = (f.key[0] as SubId, f.key[1]);
        let h_r = self.rep_of[rr].unwrap().1;
        let (ps, qs) = (psi.subs[f.src], psi.subs[f.dst]);
        if let Some(&g) = rep.eps_inv.get(&a) {
            let y = grp.mul(grp.mul(grp.inv(h_r), g), hp);
            return self.eps(ps, qs, psi.elems[y as usize]);
        }
        let p0 = rep.p0;
        if psi.subs[p0] != p0 {
            return Err(Error::Failed(format!("automorphism moves the representative {p0}")));
        }
        let (g, m) = rep.labels[a as usize];
        let a2 = rep.a.mul(rep.eps[&psi.elems[g as usize]], m);
        let rs = psi.subs[rr];
        let first = self.eps(ps, p0, psi.elems[hp as usize])?;
        let mid = Mor { src: p0, dst: p0, key: vec![p0 as u32, a2] };
        let last = self.eps(p0, rs, psi.elems[grp.inv(h_r) as usize])?;
        let c = self.compose(&mid, &first)?;
        let c = self.compose(&last, &c)?;
        self.compose(&self.eps(rs, qs, 0)?, &c)
    }

    fn adams_check(&self, psi: &ElementAuto) -> Result<()> {
        for rep in &self.reps {
            if rep.eps_inv.len() == rep.a.size() {
                continue;
            }
            if psi.subs[rep.p0] != rep.p0 {
                return Err(Error::Failed(format!("automorphism moves the representative {}", rep.p0)));
            }
            let img: Vec<u32> = rep.labels.iter().map(|&(g, m)| rep.a.mul(rep.eps[&psi.elems[g as usize]], m)).collect();
            let mut sorted = img.clone();
            sorted.sort_unstable();
            sorted.dedup();
            let hom = (0..rep.a.size() as u32)
                .all(|x| (0..rep.a.size() as u32).all(|y| img[rep.a.mul(x, y) as usize] == rep.a.mul(img[x as usize], img[y as usize])));
            if sorted.len() != img.len() || !hom {
                return Err(Error::Failed(format!(
                    "degree is not fine enough: the induced map on Aut_T({}) is not an automorphism",
                    rep.p0
                )));
            }
        }
        Ok(())
    }
}

/// Transporter system from hand-specified automorphism groups of class representatives.
/// Classes without data get `Aut_T(P0) = N_S(P0)`, which requires `Aut_F(P0) = Aut_S(P0)`.
pub fn from_autgroups(fusion: Arc<FusionSystem>, objects: Vec<SubId>, data: Vec<AutData>) -> Result<TransporterSystem> {
    let lat = fusion.lattice().clone();
    let grp = lat.group().clone();
    require_closed(&fusion, &objects)?;
    let obj: HashSet<SubId> = objects.iter().copied().collect();
    let mut reps: Vec<RepData> = Vec::new();
    let mut rep_of: Vec<Option<(usize, u32)>> = vec![None; lat.len()];
    let mut given: HashMap<SubId, AutData> = HashMap::new();
    for d in data {
        if !obj.contains(&d.rep) {
            return Err(Error::spec(format!("autgroup representative {} is not an object", d.rep)));
        }
        let c = lat.class(d.rep)[0];
        if given.values().any(|e| lat.class(e.rep)[0] == c) {
            return Err(Error::spec("two autgroups for one conjugacy class"));
        }
        given.insert(c, d);
    }
    for &o in &objects {
        let s_class = lat.class(o);
        if rep_of[o].is_some() {
            continue;
        }
        let f_class = fusion.fclass(o)?.members;
        if f_class != s_class {
            return Err(Error::spec(format!("objects F-conjugate to {o} form more than one S-class")));
        }
        let d = match given.remove(&s_class[0]) {
            Some(d) => {
                validate_aut_data(&fusion, &d)?;
                d
            }
            None => {
                let p0 = s_class[0];
                let aut_f = fusion.aut(p0)?;
                if aut_f.maps.len() != aut_f.from_s.len() {
                    return Err(Error::spec(format!("class of subgroup {p0} needs automorphism data (Aut_F ≠ Aut_S)")));
                }
                let n = lat.normalizer(p0);
                let group = grp.subgroup_group(&n);
                let eps = n.iter().enumerate().map(|(i, &x)| (x, i as u32)).collect();
                let rho = n.iter().map(|&x| AmalgamModel::conj_map(&lat, x, p0)).collect();
                AutData { rep: p0, group, eps, rho }
            }
        };
        let p0 = d.rep;
        let eps_inv: HashMap<u32, u32> = d.eps.iter().map(|(&g, &a)| (a, g)).collect();
        let eps_img: Vec<u32> = {
            let mut v: Vec<u32> = d.eps.values().copied().collect();
            v.sort_unstable();
            v
        };
        let labels: Vec<(u32, u32)> = (0..d.group.size() as u32)
            .map(|a| {
                let m = eps_img.iter().map(|&e| d.group.mul(e, a)).min().unwrap();
                let g = eps_inv[&d.group.mul(a, d.group.inv(m))];
                (g, m)
            })
            .collect();
        if labels.iter().any(|l| l.1 != 0) {
            if let Some(&sub) = objects.iter().find(|&&q| q != p0 && lat.is_sub(q, p0)) {
                return Err(Error::spec(format!(
                    "representative {p0} has automorphisms outside ε(N_S) but contains the object {sub}"
                )));
            }
        }
        let idx = reps.len();
        for &x in &s_class {
            let h = (0..grp.size() as u32).find(|&h| lat.conj(h, x) == p0).unwrap();
            rep_of[x] = Some((idx, h));
        }
        reps.push(RepData { p0, a: d.group, eps: d.eps, eps_inv, rho: d.rho, labels });
    }
    if let Some(d) = given.values().next() {
        return Err(Error::spec(format!("autgroup representative {} unused", d.rep)));
    }
    let model = AmalgamModel { lat, reps, rep_of };
    Ok(TransporterSystem::from_model(fusion, objects, Arc::new(model)))
}

fn validate_aut_data(fusion: &FusionSystem, d: &AutData) -> Result<()> {
    let lat = fusion.lattice();
    let grp = lat.group();
    let p0 = d.rep;
    let a = &d.group;
    let n = lat.normalizer(p0);
    let mut keys: Vec<u32> = d.eps.keys().copied().collect();
    keys.sort_unstable();
    if keys != n {
        return Err(Error::spec("ε must be given on exactly N_S(P0)"));
    }
    let n_gens = crate::group::small_gens(grp, &n);
    for &x in &n {
        for &y in &n_gens {
            if d.eps[&grp.mul(x, y)] != a.mul(d.eps[&x], d.eps[&y]) {
                return Err(Error::spec("ε is not a homomorphism"));
            }
        }
        if d.rho[d.eps[&x] as usize] != AmalgamModel::conj_map(lat, x, p0) {
            return Err(Error::spec("ρ ∘ ε is not conjugation"));
        }
    }
    let mut imgs: Vec<u32> = d.eps.values().copied().collect();
    imgs.sort_unstable();
    imgs.dedup();
    if imgs.len() != n.len() {
        return Err(Error::spec("ε is not injective"));
    }
    if d.rho.len() != a.size() {
        return Err(Error::spec("ρ must be given on every element"));
    }
    let els = lat.elems(p0);
    let pos = |x: u32| els.binary_search(&x).unwrap();
    let a_gens = crate::group::small_gens(a, &a.all());
    for i in 0..a.size() as u32 {
        for &j in &a_gens {
            let lhs = &d.rho[a.mul(i, j) as usize];
            let rhs: Vec<u32> = d.rho[j as usize].iter().map(|&y| d.rho[i as usize][pos(y)]).collect();
            if *lhs != rhs {
                return Err(Error::spec("ρ is not a homomorphism"));
            }
        }
    }
    let mut rho_img: Vec<Vec<u32>> = d.rho.clone();
    rho_img.sort();
    rho_img.dedup();
    let mut aut_f = fusion.aut(p0)?.maps;
    aut_f.sort();
    if rho_img != aut_f {
        return Err(Error::spec("ρ(A) differs from Aut_F(P0)"));
    }
    Ok(())
}

/// Automorphism data from a JSON spec at a given level.
pub fn aut_data_from_spec(level: &Level, spec: &AutGroupSpec) -> Result<AutData> {
    let rep = level.sub_from_literals(&spec.rep)?;
    let group = FinGroup::from_table(&spec.table)?;
    let mut eps = HashMap::new();
    for (lit, a) in &spec.eps {
        let x = level.index(&lit.element(&level.ambient)?)?;
        if *a as usize >= group.size() {
            return Err(Error::spec("ε index out of range"));
        }
        eps.insert(x, *a);
    }
    let gens: Vec<u32> = spec.rep.iter().map(|l| level.index(&l.element(&level.ambient)?)).collect::<Result<_>>()?;
    let mut rho = Vec::new();
    for imgs in &spec.rho {
        let im: Vec<u32> = imgs.iter().map(|l| level.index(&l.element(&level.ambient)?)).collect::<Result<_>>()?;
        rho.push(Morph::from_generators(&level.lat, &gens, &im)?.map);
    }
    Ok(AutData { rep, group, eps, rho })
}

/// Builds the transporter system described by a spec section.
pub fn from_spec(level: &Level, spec: &TransporterSpec) -> Result<TransporterSystem> {
    let fusion = level.fusion.clone();
    let objects = match &spec.objects {
        ObjectsSpec::Keyword(k) if k == "centric" => fusion.centrics()?,
        ObjectsSpec::Keyword(k) if k == "all" => (0..level.lat.len()).collect(),
        ObjectsSpec::Keyword(k) => return Err(Error::spec(format!("unknown object keyword `{k}`"))),
        ObjectsSpec::List(l) => {
            let seeds = l.iter().map(|g| level.sub_from_literals(g)).collect::<Result<Vec<_>>>()?;
            close_objects(&fusion, &seeds)?
        }
    };
    let data = spec.autgroups.iter().map(|a| aut_data_from_spec(level, a)).collect::<Result<Vec<_>>>()?;
    from_autgroups(fusion, objects, data)
}

// ---------------------------------------------------------------- telescopic model

#[derive(Debug)]
struct TelescopicModel {
    base: Arc<TransporterSystem>,
    star: Arc<Vec<SubId>>,
}

impl TelescopicModel {
    fn lift(&self, f: &Mor) -> Mor {
        Mor { src: self.star[f.src], dst: self.star[f.dst], key: f.key.clone() }
    }
}

impl Model for TelescopicModel {
    fn mor(&self, p: SubId, q: SubId) -> Result<Vec<Mor>> {
        let lat = self.base.lattice();
        let gens = lat.gens(p);
        let mut out = Vec::new();
        for f in self.base.mor(self.star[p], self.star[q])?.iter() {
            let r = self.base.rho(f)?;
            if gens.iter().all(|&x| lat.contains(q, r.apply(lat, x))) {
                out.push(Mor { src: p, dst: q, key: f.key.clone() });
            }
        }
        Ok(out)
    }
    fn compose(&self, g: &Mor, f: &Mor) -> Result<Mor> {
        let c = self.base.compose(&self.lift(g), &self.lift(f))?;
        Ok(Mor { src: f.src, dst: g.dst, key: c.key })
    }
    fn eps(&self, p: SubId, q: SubId, g: u32) -> Result<Mor> {
        let e = self.base.eps(self.star[p], self.star[q], g)?;
        Ok(Mor { src: p, dst: q, key: e.key })
    }
    fn rho(&self, f: &Mor) -> Result<Morph> {
        let lat = self.base.lattice();
        Ok(self.base.rho(&self.lift(f))?.restrict(lat, f.src).with_cod(f.dst))
    }
    fn kind(&self) -> &'static str {
        "telescopic"
    }
    fn adams(&self, f: &Mor, psi: &ElementAuto) -> Result<Mor> {
        let b = self.base.adams(&self.lift(f), psi)?;
        Ok(Mor { src: psi.subs[f.src], dst: psi.subs[f.dst], key: b.key })
    }
    fn adams_check(&self, psi: &ElementAuto) -> Result<()> {
        self.base.adams_check(psi)
    }
}

/// `P ↦ P★` on all subgroups.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RetractionPair {
    pub star: Vec<SubId>,
}

impl RetractionPair {
    pub fn from_bullet(b: &Bullet) -> Self {
        RetractionPair { star: b.star.clone() }
    }
}

pub fn bullet_data(level: &Level) -> Result<RetractionPair> {
    Ok(RetractionPair::from_bullet(&level.bullet()?))
}

pub fn bullet_subgroup(level: &Level, p: SubId) -> Result<SubId> {
    Ok(level.bullet()?.star[p])
}

/// `f ↦ f★`: the unique extension in `Hom_F(P★, Q★)`.
pub fn star_fusion_morphism(fusion: &FusionSystem, pair: &RetractionPair, f: &Morph) -> Result<Morph> {
    let lat = fusion.lattice();
    let (p2, q2) = (pair.star[f.dom], pair.star[f.cod]);
    let els = lat.elems(p2);
    let pos: Vec<usize> = lat.elems(f.dom).iter().map(|x| els.binary_search(x).unwrap()).collect();
    let ext: Vec<Morph> = fusion
        .hom_set(p2, q2)?
        .into_iter()
        .filter(|g| pos.iter().zip(&f.map).all(|(&i, &y)| g.map[i] == y))
        .collect();
    match ext.len() {
        1 => Ok(ext.into_iter().next().unwrap()),
        0 => Err(Error::Failed("morphism has no extension to the star subgroups".into())),
        _ => Err(Error::Failed("extension is not unique; Weyl data is inconsistent".into())),
    }
}

/// Telescopic extension: objects `{P : P★ ∈ Ob(T)}`, morphisms the base morphisms
/// `φ : P★ → Q★` with `ρ(φ)(P) ≤ Q`.
pub fn telescopic_extend(base: Arc<TransporterSystem>, pair: &RetractionPair) -> Result<TransporterSystem> {
    let lat = base.lattice().clone();
    if pair.star.len() != lat.len() {
        return Err(Error::pre("retraction pair and system live on different lattices"));
    }
    let objects: Vec<SubId> = (0..lat.len()).filter(|&p| base.is_object(pair.star[p])).collect();
    let model = TelescopicModel { base: base.clone(), star: Arc::new(pair.star.clone()) };
    Ok(TransporterSystem::from_model(base.fusion().clone(), objects, Arc::new(model)))
}

// ---------------------------------------------------------------- restricted model

pub type MorFilter = Arc<dyn Fn(&Mor) -> Result<bool> + Send + Sync>;

/// Subcategory of a base system over a subgroup `S' ≤ S`, re-indexed on `S'`.
#[derive(Clone)]
pub struct RestrictedModel {
    base: Arc<TransporterSystem>,
    emb: Vec<u32>,
    pos: HashMap<u32, u32>,
    up: Vec<SubId>,
    filter: Option<MorFilter>,
}

impl Debug for RestrictedModel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("RestrictedModel").field("order", &self.emb.len()).finish()
    }
}

impl RestrictedModel {
    /// Base morphism of a local one.
    pub fn lift(&self, f: &Mor) -> Mor {
        Mor { src: self.up[f.src], dst: self.up[f.dst], key: f.key.clone() }
    }
    pub fn up(&self, p: SubId) -> SubId {
        self.up[p]
    }
    pub fn emb(&self) -> &[u32] {
        &self.emb
    }
    pub fn base(&self) -> &Arc<TransporterSystem> {
        &self.base
    }
}

impl Model for RestrictedModel {
    fn mor(&self, p: SubId, q: SubId) -> Result<Vec<Mor>> {
        let mut out = Vec::new();
        for f in self.base.mor(self.up[p], self.up[q])?.iter() {
            if self.filter.as_ref().map_or(Ok(true), |flt| flt(f))? {
                out.push(Mor { src: p, dst: q, key: f.key.clone() });
            }
        }
        Ok(out)
    }
    fn compose(&self, g: &Mor, f: &Mor) -> Result<Mor> {
        let c = self.base.compose(&self.lift(g), &self.lift(f))?;
        Ok(Mor { src: f.src, dst: g.dst, key: c.key })
    }
    fn eps(&self, p: SubId, q: SubId, g: u32) -> Result<Mor> {
        let e = self.base.eps(self.up[p], self.up[q], self.emb[g as usize])?;
        Ok(Mor { src: p, dst: q, key: e.key })
    }
    fn rho(&self, f: &Mor) -> Result<Morph> {
        let r = self.base.rho(&self.lift(f))?;
        Ok(Morph { dom: f.src, cod: f.dst, map: r.map.iter().map(|x| self.pos[x]).collect() })
    }
    fn kind(&self) -> &'static str {
        "restricted"
    }
}

/// Data for a subgroup `S' ≤ S` viewed as its own group.
#[derive(Clone)]
pub struct SubAmbient {
    pub lat: Arc<Lattice>,
    pub emb: Vec<u32>,
    pub pos: HashMap<u32, u32>,
    /// Local subgroup id to base subgroup id.
    pub up: Vec<SubId>,
}

impl SubAmbient {
    pub fn new(base_lat: &Lattice, sub: SubId) -> Result<Self> {
        let emb = base_lat.elems(sub).to_vec();
        let g = Arc::new(base_lat.group().subgroup_group(&emb));
        let lat = Arc::new(Lattice::new(g, base_lat.p())?);
        let pos: HashMap<u32, u32> = emb.iter().enumerate().map(|(i, &x)| (x, i as u32)).collect();
        let up = (0..lat.len())
            .map(|i| base_lat.id_of(&lat.elems(i).iter().map(|&x| emb[x as usize]).collect::<Vec<_>>()).unwrap())
            .collect();
        Ok(SubAmbient { lat, emb, pos, up })
    }

    /// Local id of a base subgroup contained in `S'`.
    pub fn down(&self, base_lat: &Lattice, p: SubId) -> Option<SubId> {
        let els: Option<Vec<u32>> = base_lat.elems(p).iter().map(|x| self.pos.get(x).copied()).collect();
        els.and_then(|mut e| {
            e.sort_unstable();
            self.lat.id_of(&e)
        })
    }
}

/// Subcategory over `S'` with the given base objects (all inside `S'`) and a morphism filter.
/// The fusion system is the one generated by the `ρ`-images of its morphisms into `S'`.
pub fn restricted(
    base: Arc<TransporterSystem>,
    amb: &SubAmbient,
    base_objects: &[SubId],
    filter: Option<MorFilter>,
) -> Result<(TransporterSystem, Arc<RestrictedModel>)> {
    let blat = base.lattice().clone();
    let objects: Vec<SubId> = base_objects
        .iter()
        .map(|&o| amb.down(&blat, o).ok_or_else(|| Error::pre("object outside the subgroup")))
        .collect::<Result<_>>()?;
    let model = Arc::new(RestrictedModel {
        base: base.clone(),
        emb: amb.emb.clone(),
        pos: amb.pos.clone(),
        up: amb.up.clone(),
        filter,
    });
    let top = amb.lat.whole();
    let mut gens = Vec::new();
    let mut seen = HashSet::new();
    let mut done = HashSet::new();
    for &o in &objects {
        let c = amb.lat.class(o)[0];
        if !done.insert(c) {
            continue;
        }
        if !objects.contains(&top) {
            return Err(Error::pre("the whole subgroup must be an object"));
        }
        for f in model.mor(c, top)? {
            let r = model.rho(&f)?;
            if seen.insert((r.dom, r.map.clone())) {
                let img = r.image(&amb.lat);
                gens.push(Morph { dom: r.dom, cod: img, map: r.map });
            }
        }
    }
    let fusion = Arc::new(FusionSystem::generated(amb.lat.clone(), gens)?);
    Ok((TransporterSystem::from_model(fusion, objects, model.clone()), model))
}

// ---------------------------------------------------------------- quotient model

#[derive(Debug)]
struct QuotientModel {
    base: Arc<TransporterSystem>,
    lat: Arc<Lattice>,
    a_elems: Vec<u32>,
    proj: Vec<u32>,
    lift_elem: Vec<u32>,
    up: Vec<SubId>,
}

impl QuotientModel {
    fn lift(&self, f: &Mor) -> Mor {
        Mor { src: self.up[f.src], dst: self.up[f.dst], key: f.key.clone() }
    }
    fn canon(&self, f: &Mor) -> Result<Mor> {
        let mut best: Option<Vec<u32>> = None;
        for &a in &self.a_elems {
            let e = self.base.eps(f.src, f.src, a)?;
            let c = self.base.compose(f, &e)?;
            if best.as_ref().is_none_or(|b| c.key < *b) {
                best = Some(c.key);
            }
        }
        Ok(Mor { src: f.src, dst: f.dst, key: best.unwrap() })
    }
    fn down(&self, f: &Mor, src: SubId, dst: SubId) -> Result<Mor> {
        let c = self.canon(f)?;
        Ok(Mor { src, dst, key: c.key })
    }
}

impl Model for QuotientModel {
    fn mor(&self, p: SubId, q: SubId) -> Result<Vec<Mor>> {
        let mut out = Vec::new();
        let mut seen = HashSet::new();
        for f in self.base.mor(self.up[p], self.up[q])?.iter() {
            let c = self.down(f, p, q)?;
            if seen.insert(c.key.clone()) {
                out.push(c);
            }
        }
        out.sort();
        Ok(out)
    }
    fn compose(&self, g: &Mor, f: &Mor) -> Result<Mor> {
        let c = self.base.compose(&self.lift(g), &self.lift(f))?;
        self.down(&c, f.src, g.dst)
    }
    fn eps(&self, p: SubId, q: SubId, g: u32) -> Result<Mor> {
        let e = self.base.eps(self.up[p], self.up[q], self.lift_elem[g as usize])?;
        self.down(&e, p, q)
    }
    fn rho(&self, f: &Mor) -> Result<Morph> {
        let blat = self.base.lattice();
        let r = self.base.rho(&self.lift(f))?;
        let map = self.lat.elems(f.src).iter().map(|&x| self.proj[r.apply(blat, self.lift_elem[x as usize]) as usize]).collect();
        Ok(Morph { dom: f.src, cod: f.dst, map })
    }
    fn kind(&self) -> &'static str {
        "quotient"
    }
}

/// `T/A` for `A` normal in the fusion system: objects `P/A` with `A ≤ P`, morphisms the orbits
/// of right composition with `ε_P(A)`.
pub fn quotient_by(base: Arc<TransporterSystem>, a: SubId) -> Result<TransporterSystem> {
    if !crate::localops::is_normal(base.fusion(), a)? {
        return Err(Error::pre(format!("subgroup {a} is not normal in the fusion system")));
    }
    let blat = base.lattice().clone();
    let grp = blat.group();
    let a_elems = blat.elems(a).to_vec();
    let (qg, proj) = grp.quotient(&a_elems)?;
    let mut lift_elem = vec![u32::MAX; qg.size()];
    for x in 0..grp.size() as u32 {
        let c = proj[x as usize] as usize;
        if lift_elem[c] == u32::MAX {
            lift_elem[c] = x;
        }
    }
    let lat = Arc::new(Lattice::new(Arc::new(qg), blat.p())?);
    let up: Vec<SubId> = (0..lat.len())
        .map(|i| {
            let els: Vec<u32> = (0..grp.size() as u32).filter(|&x| lat.contains(i, proj[x as usize])).collect();
            blat.id_of(&els).unwrap()
        })
        .collect();
    let objects: Vec<SubId> = (0..lat.len()).filter(|&i| base.is_object(up[i])).collect();
    let model = Arc::new(QuotientModel { base: base.clone(), lat: lat.clone(), a_elems, proj, lift_elem, up });
    let top = lat.whole();
    let mut gens = Vec::new();
    let mut seen = HashSet::new();
    for &o in &objects {
        for f in model.mor(o, top)? {
            let r = model.rho(&f)?;
            if seen.insert((r.dom, r.map.clone())) {
                let img = r.image(&lat);
                gens.push(Morph { dom: r.dom, cod: img, map: r.map });
            }
        }
    }
    let fusion = Arc::new(FusionSystem::generated(lat, gens)?);
    Ok(TransporterSystem::from_model(fusion, objects, model))
}

// ---------------------------------------------------------------- axioms

#[derive(Clone, Debug, Serialize)]
pub struct AxiomVerdict {
    pub axiom: String,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct AxiomReport {
    pub pass: bool,
    pub objects: usize,
    pub morphisms: usize,
    pub axioms: Vec<AxiomVerdict>,
}

impl AxiomReport {
    pub fn get(&self, name: &str) -> Option<&AxiomVerdict> {
        self.axioms.iter().find(|a| a.axiom == name)
    }
}

struct Checker {
    out: Vec<AxiomVerdict>,
}

impl Checker {
    fn record(&mut self, axiom: &str, witness: Option<String>) {
        self.out.push(AxiomVerdict { axiom: axiom.into(), pass: witness.is_none(), witness });
    }
}

fn fmt_mor(f: &Mor) -> String {
    format!("{}→{} {:?}", f.src, f.dst, f.key)
}

/// Per-axiom verification: (A1), (A2), (B), (C), (I), (II), cancellation and the
/// orbit formula `|Mor(P,Q)| = |E(P)|·|Hom_F(P,Q)|`. Axiom (III) is vacuous for finite `S`.
pub fn check_axioms(t: &TransporterSystem) -> Result<AxiomReport> {
    let mut c = Checker { out: Vec::new() };
    let lat = t.lattice().clone();
    let grp = lat.group().clone();
    let f = t.fusion().clone();
    let objs = t.objects().to_vec();

    // (A1)
    let w = match require_closed(&f, &objs) {
        Ok(()) => None,
        Err(e) => Some(e.to_string()),
    };
    c.record("A1", w);

    // E(P) for every object
    let mut kernels: HashMap<SubId, Vec<Mor>> = HashMap::new();
    for &p in &objs {
        kernels.insert(p, t.e_kernel(p)?);
    }

    // (A2) and the orbit formula
    let mut a2 = None;
    let mut formula = None;
    let mut morphisms = 0;
    for &p in &objs {
        let e = &kernels[&p];
        for &q in &objs {
            let mors = t.mor(p, q)?;
            morphisms += mors.len();
            let homs = f.hom_set(p, q)?;
            if formula.is_none() && mors.len() != e.len() * homs.len() {
                formula = Some(format!("|Mor({p},{q})| = {} but |E|·|Hom| = {}·{}", mors.len(), e.len(), homs.len()));
            }
            if a2.is_some() {
                continue;
            }
            let mut fibers: HashMap<Vec<u32>, usize> = HashMap::new();
            for m in mors.iter() {
                *fibers.entry(t.rho(m)?.map).or_default() += 1;
            }
            let hom_maps: HashSet<Vec<u32>> = homs.iter().map(|h| h.map.clone()).collect();
            let fiber_keys: HashSet<Vec<u32>> = fibers.keys().cloned().collect();
            if fiber_keys != hom_maps {
                a2 = Some(format!("ρ(Mor({p},{q})) differs from Hom_F({p},{q})"));
                continue;
            }
            if let Some((_, n)) = fibers.iter().find(|(_, &n)| n != e.len()) {
                a2 = Some(format!("fiber of size {n} ≠ |E({p})| = {} over ({p},{q})", e.len()));
                continue;
            }
            for m in mors.iter().take(8) {
                let orbit: HashSet<Mor> = e.iter().map(|k| t.compose(m, k)).collect::<Result<_>>()?;
                if orbit.len() != e.len() {
                    a2 = Some(format!("E({p}) does not act freely on {}", fmt_mor(m)));
                    break;
                }
            }
        }
    }
    c.record("A2", a2);
    c.record("orbit-formula", formula);

    // (B)
    let mut b = None;
    'b: for &p in &objs {
        for &q in &objs {
            for g in lat.transporter(p, q) {
                let r = t.rho(&t.eps(p, q, g)?)?;
                let want: Vec<u32> = lat.elems(p).iter().map(|&x| grp.conj(g, x)).collect();
                if r.map != want {
                    b = Some(format!("ρ(ε({g})) ≠ c_{g} on ({p},{q})"));
                    break 'b;
                }
            }
        }
    }
    c.record("B", b);

    // (C)
    let mut cc = None;
    'c: for &p in &objs {
        for &q in &objs {
            for m in t.mor(p, q)?.iter() {
                let r = t.rho(m)?;
                for &g in lat.gens(p) {
                    let lhs = t.compose(m, &t.eps(p, p, g)?)?;
                    let rhs = t.compose(&t.eps(q, q, r.apply(&lat, g))?, m)?;
                    if lhs != rhs {
                        cc = Some(format!("φ∘ε({g}) ≠ ε(ρφ({g}))∘φ for {}", fmt_mor(m)));
                        break 'c;
                    }
                }
            }
        }
    }
    c.record("C", cc);

    // (I)
    let mut ax1 = None;
    for &p in &t.object_reps() {
        let p = f.fully_normalized_rep(p)?;
        let aut = t.mor(p, p)?.len();
        let n = lat.normalizer(p);
        let eps: HashSet<Mor> = n.iter().map(|&g| t.eps(p, p, g)).collect::<Result<_>>()?;
        if eps.len() != n.len() {
            ax1 = Some(format!("ε is not injective on N_S({p})"));
            break;
        }
        if (aut / n.len()) % f.p() as usize == 0 || aut % n.len() != 0 {
            ax1 = Some(format!("ε(N_S({p})) is not Sylow in Aut_T({p}) (|Aut| = {aut}, |N| = {})", n.len()));
            break;
        }
    }
    c.record("I", ax1);

    // (II), on the largest admissible pair P̄ = N_φ, Q̄ = N_S(Q)
    let mut ax2 = None;
    'ii: for &p in &t.object_reps() {
        for q_cls in f.fclass(p)?.members {
            for phi in t.mor(p, q_cls)?.iter() {
                let r = t.rho(phi)?;
                let q = r.image(&lat);
                if q != q_cls {
                    continue;
                }
                let inv = t
                    .mor(q, p)?
                    .iter()
                    .find(|psi| t.compose(psi, phi).ok() == t.identity(p).ok())
                    .cloned()
                    .ok_or_else(|| Error::Failed("isomorphism without inverse".into()))?;
                let nq = lat.normalizer(q);
                let eps_q: HashSet<Mor> = nq.iter().map(|&h| t.eps(q, q, h)).collect::<Result<_>>()?;
                let nphi: Vec<u32> = lat
                    .normalizer(p)
                    .into_iter()
                    .filter(|&g| {
                        let c = t.compose(&t.compose(phi, &t.eps(p, p, g).unwrap()).unwrap(), &inv).unwrap();
                        eps_q.contains(&c)
                    })
                    .collect();
                let pbar = lat.id_of(&nphi).unwrap();
                if pbar == p {
                    continue;
                }
                let qbar = lat.id_of(&nq).unwrap();
                if t.extend_through(phi, pbar, qbar)?.is_empty() {
                    ax2 = Some(format!("{} has no extension to ({pbar},{qbar})", fmt_mor(phi)));
                    break 'ii;
                }
            }
        }
    }
    c.record("II", ax2);

    // cancellation: exhaustive on small systems, sampled otherwise
    let exhaustive = morphisms <= 4000;
    let mut canc = None;
    // Mor(gPg⁻¹, Q) = Mor(P, Q)∘ε(g) and Mor(P, gQg⁻¹) = ε(g)∘Mor(P, Q)
    let is_rep = |x: SubId| exhaustive || lat.class(x)[0] == x;
    'm: for &p in &objs {
        for &q in &objs {
            let (mono, epi) = (is_rep(p), is_rep(q));
            if !mono && !epi {
                continue;
            }
            let mpq = t.mor(p, q)?;
            if mpq.len() < 2 {
                continue;
            }
            for &r in &objs {
                let mqr = t.mor(q, r)?;
                let take = if !mono { 0 } else if exhaustive { mqr.len() } else { mqr.len().min(2) };
                for psi in mqr.iter().take(take) {
                    let imgs: HashSet<Mor> = mpq.iter().map(|phi| t.compose(psi, phi)).collect::<Result<_>>()?;
                    if imgs.len() != mpq.len() {
                        canc = Some(format!("{} is not a monomorphism", fmt_mor(psi)));
                        break 'm;
                    }
                }
                let mrp = t.mor(r, p)?;
                let take = if !epi { 0 } else if exhaustive { mrp.len() } else { mrp.len().min(2) };
                for psi in mrp.iter().take(take) {
                    let imgs: HashSet<Mor> = mpq.iter().map(|phi| t.compose(phi, psi)).collect::<Result<_>>()?;
                    if imgs.len() != mpq.len() {
                        canc = Some(format!("{} is not an epimorphism", fmt_mor(psi)));
                        break 'm;
                    }
                }
            }
        }
    }
    c.record("cancellation", canc);

    let pass = c.out.iter().all(|a| a.pass);
    Ok(AxiomReport { pass, objects: objs.len(), morphisms, axioms: c.out })
}

#[derive(Clone, Debug, Serialize)]
pub struct KernelCheck {
    pub object: SubId,
    pub kernel: usize,
    pub expected: usize,
    pub equal: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct LinkingTag {
    pub centric_linking: bool,
    pub objects_are_centrics: bool,
    pub per_object: Vec<KernelCheck>,
}

fn eps_set(t: &TransporterSystem, p: SubId, elems: &[u32]) -> Result<HashSet<Mor>> {
    elems.iter().map(|&g| t.eps(p, p, g)).collect()
}

/// `E(P) = ε(Z(P))` per object, and whether the objects are exactly the F-centrics.
pub fn is_linking(t: &TransporterSystem) -> Result<LinkingTag> {
    let lat = t.lattice();
    let grp = lat.group();
    let mut per = Vec::new();
    for &p in t.objects() {
        let z: Vec<u32> = lat.elems(p).iter().copied().filter(|&x| lat.gens(p).iter().all(|&y| grp.mul(x, y) == grp.mul(y, x))).collect();
        let e: HashSet<Mor> = t.e_kernel(p)?.into_iter().collect();
        let want = eps_set(t, p, &z)?;
        per.push(KernelCheck { object: p, kernel: e.len(), expected: want.len(), equal: e == want });
    }
    let centrics = t.fusion().centrics()?;
    let objects_are_centrics = centrics == t.objects();
    let centric_linking = objects_are_centrics && per.iter().all(|k| k.equal);
    Ok(LinkingTag { centric_linking, objects_are_centrics, per_object: per })
}

#[derive(Clone, Debug, Serialize)]
pub struct QuasicentricEntry {
    pub object: SubId,
    pub kernel: usize,
    /// `E(P) = ε_P(C_S(P))`.
    pub centralizer: bool,
    /// `E(P) = ε_P(Z(P★))`.
    pub star_center: bool,
}

pub fn quasicentric_report(t: &TransporterSystem, pair: &RetractionPair) -> Result<Vec<QuasicentricEntry>> {
    let lat = t.lattice();
    let grp = lat.group();
    let mut out = Vec::new();
    for &p in t.objects() {
        let e: HashSet<Mor> = t.e_kernel(p)?.into_iter().collect();
        let c = lat.centralizer(p);
        let ps = pair.star[p];
        let z: Vec<u32> = lat.elems(ps).iter().copied().filter(|&x| lat.gens(ps).iter().all(|&y| grp.mul(x, y) == grp.mul(y, x))).collect();
        out.push(QuasicentricEntry {
            object: p,
            kernel: e.len(),
            centralizer: e == eps_set(t, p, &c)?,
            star_center: e == eps_set(t, p, &z)?,
        });
    }
    Ok(out)
}

// ---------------------------------------------------------------- retraction properties

#[derive(Clone, Debug, Serialize)]
pub struct ClauseResult {
    pub clause: String,
    pub checked: usize,
    pub failures: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct RetractionReport {
    pub pass: bool,
    pub classes: usize,
    pub clauses: Vec<ClauseResult>,
}

struct Tally {
    clause: &'static str,
    checked: usize,
    failures: usize,
    witness: Option<String>,
}

impl Tally {
    fn new(clause: &'static str) -> Self {
        Tally { clause, checked: 0, failures: 0, witness: None }
    }
    fn check(&mut self, ok: bool, w: impl FnOnce() -> String) {
        self.checked += 1;
        if !ok {
            self.failures += 1;
            if self.witness.is_none() {
                self.witness = Some(w());
            }
        }
    }
    fn done(self) -> ClauseResult {
        ClauseResult { clause: self.clause.into(), checked: self.checked, failures: self.failures, witness: self.witness }
    }
}

/// Verifies the retraction-pair clauses for every subgroup class of `S`; with a transporter
/// system, also the morphism-level clauses on its objects.
pub fn retraction_properties(f: &FusionSystem, pair: &RetractionPair, t: Option<&TransporterSystem>) -> Result<RetractionReport> {
    let lat = f.lattice();
    let grp = lat.group();
    let star = &pair.star;
    let classes = lat.classes();
    let mut contains = Tally::new("contains");
    let mut idem = Tally::new("idempotent");
    let mut mono = Tally::new("monotone");
    let mut trans = Tally::new("transporter");
    let mut cent = Tally::new("centralizer");
    let mut ext = Tally::new("unique-extension");
    let mut image = Tally::new("image");
    let mut cr = Tally::new("centric-radical");
    let mut invariant = Tally::new("conjugation");
    let s = f.s();
    for cl in &classes {
        let p = cl[0];
        let ps = star[p];
        contains.check(lat.is_sub(p, ps), || format!("{p} ⊄ {ps}"));
        idem.check(star[ps] == ps, || format!("({p}★)★ ≠ {p}★"));
        cent.check(lat.centralizer(p) == lat.centralizer(ps), || format!("C_S({p}) ≠ C_S({ps})"));
        for g in 0..grp.size() as u32 {
            let gp = lat.conj(g, p);
            invariant.check(star[gp] == lat.conj(g, ps), || format!("(g{p}g⁻¹)★ ≠ g{p}★g⁻¹ for g = {g}"));
        }
        for q in lat.overgroups(p) {
            mono.check(lat.is_sub(ps, star[q]), || format!("{p} ≤ {q} but {ps} ⊄ {}", star[q]));
        }
        for q in 0..lat.len() {
            let n1: HashSet<u32> = lat.transporter(p, q).into_iter().collect();
            if n1.is_empty() {
                continue;
            }
            let n2: HashSet<u32> = lat.transporter(ps, star[q]).into_iter().collect();
            trans.check(n1.is_subset(&n2), || format!("N_S({p},{q}) ⊄ N_S({ps},{})", star[q]));
        }
        // restriction Hom_F(P★, S) → Hom_F(P, S) is a bijection
        let big = f.hom_set(ps, s)?;
        let small: HashSet<Vec<u32>> = f.hom_set(p, s)?.into_iter().map(|m| m.map).collect();
        let els = lat.elems(ps);
        let pos: Vec<usize> = lat.elems(p).iter().map(|x| els.binary_search(x).unwrap()).collect();
        let restricted: Vec<Vec<u32>> = big.iter().map(|m| pos.iter().map(|&i| m.map[i]).collect()).collect();
        let rset: HashSet<Vec<u32>> = restricted.iter().cloned().collect();
        ext.check(rset.len() == restricted.len() && rset == small, || format!("restriction Hom_F({ps},S) → Hom_F({p},S) is not bijective"));
        for (m, r) in big.iter().zip(&restricted) {
            let img_small = {
                let mut v = r.clone();
                v.sort_unstable();
                lat.id_of(&v).unwrap()
            };
            let img_big = m.image(lat);
            image.check(star[img_small] == img_big, || format!("f★({ps}) ≠ f({p})★"));
        }
        if f.is_centric(p)? && f.is_radical(p)? {
            cr.check(ps == p, || format!("centric radical {p} has {p}★ = {ps}"));
        }
    }
    let mut clauses = vec![
        contains.done(),
        idem.done(),
        mono.done(),
        trans.done(),
        cent.done(),
        ext.done(),
        image.done(),
        cr.done(),
        invariant.done(),
    ];
    if let Some(t) = t {
        let mut a = Tally::new("transporter-star");
        // one source per S-class: the other morphisms are φ∘ε(g), extended by φ★∘ε(g)
        for &p in t.objects().iter().filter(|&&p| lat.class(p)[0] == p) {
            for &q in t.objects() {
                for phi in t.mor(p, q)?.iter() {
                    let (p2, q2) = (star[p], star[q]);
                    if !t.is_object(p2) || !t.is_object(q2) {
                        continue;
                    }
                    let e = t.extend_through(phi, p2, q2)?;
                    let ok = e.len() == 1 && {
                        let want = star_fusion_morphism(f, pair, &t.rho(phi)?)?;
                        t.rho(&e[0])?.map == want.map
                    };
                    a.check(ok, || format!("{} has {} star extensions", fmt_mor(phi), e.len()));
                }
            }
        }
        clauses.push(a.done());
    }
    let pass = clauses.iter().all(|c| c.failures == 0);
    Ok(RetractionReport { pass, classes: classes.len(), clauses })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn transporter_category_of_s4() {
        let t = from_group(&FinGroup::symmetric(4), 2, None).unwrap();
        let r = check_axioms(&t).unwrap();
        assert!(r.pass, "{r:?}");
        let lat = t.lattice();
        let v = (0..lat.len()).find(|&i| lat.size(i) == 4 && t.fusion().aut(i).unwrap().maps.len() == 6).unwrap();
        assert_eq!(t.mor(v, v).unwrap().len(), 24);
    }

    #[test]
    fn linking_system_of_s4() {
        let t = linking_of_group(&FinGroup::symmetric(4), 2).unwrap();
        assert!(check_axioms(&t).unwrap().pass);
        assert!(is_linking(&t).unwrap().centric_linking);
    }

    #[test]
    fn object_family_must_be_overgroup_closed() {
        let g = FinGroup::symmetric(4);
        let (f, _) = FusionSystem::from_group(&g, 2).unwrap();
        let lat = f.lattice();
        let v = (0..lat.len()).find(|&i| lat.size(i) == 4).unwrap();
        assert!(from_group(&g, 2, Some(vec![v])).is_err());
    }
}

#[cfg(test)]
mod so3_tests {
    use super::*;
    use crate::catalog;
    use crate::ptoral::DEFAULT_CAP;

    fn so3(n: u32) -> (Level, Arc<TransporterSystem>) {
        let doc = catalog::load("dihedral-so3").unwrap();
        let lv = Level::from_doc(&doc, Some(n), DEFAULT_CAP).unwrap();
        let t = from_spec(&lv, doc.transporter.as_ref().unwrap()).unwrap();
        (lv, Arc::new(t))
    }

    #[test]
    fn so3_linking_data_passes() {
        let (lv, l) = so3(4);
        let r = check_axioms(&l).unwrap();
        assert!(r.pass, "{r:?}");
        assert!(is_linking(&l).unwrap().centric_linking);
        let amb = &lv.ambient;
        let v = lv.sub(&[amb.torus_basis(0, 1), amb.pi_element(1)]).unwrap();
        assert_eq!(l.mor(v, v).unwrap().len(), 24);
    }

    #[test]
    fn so3_telescopic_passes() {
        let (lv, l) = so3(4);
        let pair = bullet_data(&lv).unwrap();
        let lt = telescopic_extend(l.clone(), &pair).unwrap();
        let r = check_axioms(&lt).unwrap();
        assert!(r.pass, "{r:?}");
        // old objects keep their morphism sets, up to the restriction bijection
        for &p in l.objects() {
            for &q in l.objects() {
                let a = l.mor(p, q).unwrap();
                let b = lt.mor(p, q).unwrap();
                assert_eq!(a.len(), b.len());
                let ra: HashSet<Vec<u32>> = a.iter().map(|f| l.rho(f).unwrap().map).collect();
                let rb: HashSet<Vec<u32>> = b.iter().map(|f| lt.rho(f).unwrap().map).collect();
                assert_eq!(ra, rb);
            }
        }
        let t3 = lv.sub(&[lv.ambient.torus_basis(0, 3)]).unwrap();
        assert!(lt.is_object(t3) && !l.is_object(t3));
        let q = quasicentric_report(&lt, &pair).unwrap();
        assert!(q.iter().all(|e| e.centralizer && e.star_center), "{q:?}");
        let rp = retraction_properties(lt.fusion(), &pair, Some(&lt)).unwrap();
        assert!(rp.pass, "{rp:?}");
    }
}
