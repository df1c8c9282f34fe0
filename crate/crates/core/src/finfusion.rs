//! Fusion systems over finite p-groups.
//!
//! Morphisms are stored as image vectors over the sorted element list of the
//! domain. Hom-sets come from a breadth-first closure of the isomorphism orbit
//! of each subgroup, memoized per subgroup in a grow-only cache.

use std::collections::{HashMap, HashSet, VecDeque};
use std::sync::{Arc, OnceLock};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::group::{FinGroup, Lattice, SubId};

pub const DEFAULT_HOM_CAP: usize = 100_000;

/// An injective homomorphism `dom → cod`; `map[i]` is the image of `elems(dom)[i]`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Morph {
    pub dom: SubId,
    pub cod: SubId,
    pub map: Vec<u32>,
}

impl Morph {
    pub fn identity(lat: &Lattice, p: SubId) -> Morph {
        Morph { dom: p, cod: p, map: lat.elems(p).to_vec() }
    }

    pub fn inclusion(lat: &Lattice, p: SubId, q: SubId) -> Morph {
        Morph { dom: p, cod: q, map: lat.elems(p).to_vec() }
    }

    /// Conjugation `c_g : P → gPg⁻¹`.
    pub fn conjugation(lat: &Lattice, g: u32, p: SubId) -> Morph {
        let grp = lat.group();
        Morph { dom: p, cod: lat.conj(g, p), map: lat.elems(p).iter().map(|&x| grp.conj(g, x)).collect() }
    }

    /// Extends generator images to a homomorphism, checking well-definedness and injectivity.
    pub fn from_generators(lat: &Lattice, gens: &[u32], images: &[u32]) -> Result<Morph> {
        if gens.len() != images.len() {
            return Err(Error::spec("domain and image lists differ in length"));
        }
        let g = lat.group();
        let mut f: HashMap<u32, u32> = HashMap::from([(0, 0)]);
        let mut queue = VecDeque::from([0u32]);
        while let Some(x) = queue.pop_front() {
            let fx = f[&x];
            for (&s, &t) in gens.iter().zip(images) {
                let y = g.mul(x, s);
                let fy = g.mul(fx, t);
                match f.get(&y) {
                    Some(&old) if old != fy => return Err(Error::spec("generator images do not define a homomorphism")),
                    Some(_) => {}
                    None => {
                        f.insert(y, fy);
                        queue.push_back(y);
                    }
                }
            }
        }
        let dom = lat.generated(gens);
        let map: Vec<u32> = lat.elems(dom).iter().map(|x| f[x]).collect();
        let mut img = map.clone();
        img.sort_unstable();
        img.dedup();
        if img.len() != map.len() {
            return Err(Error::spec("map is not injective"));
        }
        let cod = lat.id_of(&img).expect("image of a homomorphism is a subgroup");
        Ok(Morph { dom, cod, map })
    }

    pub fn apply(&self, lat: &Lattice, x: u32) -> u32 {
        let i = lat.elems(self.dom).binary_search(&x).expect("element outside domain");
        self.map[i]
    }

    pub fn image(&self, lat: &Lattice) -> SubId {
        let mut img = self.map.clone();
        img.sort_unstable();
        lat.id_of(&img).expect("image is a subgroup")
    }

    pub fn is_inclusion(&self, lat: &Lattice) -> bool {
        self.map == lat.elems(self.dom)
    }

    pub fn restrict(&self, lat: &Lattice, p: SubId) -> Morph {
        debug_assert!(lat.is_sub(p, self.dom));
        let map: Vec<u32> = lat.elems(p).iter().map(|&x| self.apply(lat, x)).collect();
        let mut m = Morph { dom: p, cod: self.cod, map };
        m.cod = self.cod;
        m
    }

    /// `g ∘ f`, requires `image(f) ≤ dom(g)`.
    pub fn then(&self, lat: &Lattice, g: &Morph) -> Morph {
        Morph { dom: self.dom, cod: g.cod, map: self.map.iter().map(|&x| g.apply(lat, x)).collect() }
    }

    /// Inverse isomorphism `image → dom`.
    pub fn inverse(&self, lat: &Lattice) -> Morph {
        let img = self.image(lat);
        let mut pairs: Vec<(u32, u32)> = self.map.iter().copied().zip(lat.elems(self.dom).iter().copied()).collect();
        pairs.sort_unstable();
        Morph { dom: img, cod: self.dom, map: pairs.into_iter().map(|(_, x)| x).collect() }
    }

    /// Same map with a different codomain.
    pub fn with_cod(mut self, cod: SubId) -> Morph {
        self.cod = cod;
        self
    }
}

#[derive(Clone, Debug)]
struct Dense {
    dom: SubId,
    table: Vec<u32>,
}

impl Dense {
    fn new(lat: &Lattice, m: &Morph) -> Dense {
        let mut table = vec![u32::MAX; lat.group().size()];
        for (&x, &y) in lat.elems(m.dom).iter().zip(&m.map) {
            table[x as usize] = y;
        }
        Dense { dom: m.dom, table }
    }
}

/// Isomorphisms out of one subgroup, as `(image, map)` pairs.
#[derive(Debug)]
pub struct Orbit {
    pub entries: Vec<(SubId, Vec<u32>)>,
    index: HashMap<Vec<u32>, usize>,
}

impl Orbit {
    pub fn contains(&self, map: &[u32]) -> bool {
        self.index.contains_key(map)
    }
    pub fn images(&self) -> Vec<SubId> {
        let mut v: Vec<SubId> = self.entries.iter().map(|e| e.0).collect();
        v.sort_unstable();
        v.dedup();
        v
    }
}

fn orbit_bfs(lat: &Lattice, gens: &[Dense], inner: bool, p: SubId, cap: usize) -> Option<Orbit> {
    let g = lat.group();
    let start = lat.elems(p).to_vec();
    let mut entries = vec![(p, start.clone())];
    let mut index = HashMap::from([(start, 0usize)]);
    let mut conj_by: Vec<u32> = Vec::new();
    if inner {
        for &s in lat.gens(lat.whole()) {
            conj_by.push(s);
            if g.inv(s) != s {
                conj_by.push(g.inv(s));
            }
        }
    }
    let mut i = 0;
    while i < entries.len() {
        let (r, map) = entries[i].clone();
        let mut push = |img: SubId, m: Vec<u32>, entries: &mut Vec<(SubId, Vec<u32>)>| -> bool {
            if index.contains_key(&m) {
                return true;
            }
            if entries.len() >= cap {
                return false;
            }
            index.insert(m.clone(), entries.len());
            entries.push((img, m));
            true
        };
        for &s in &conj_by {
            let m: Vec<u32> = map.iter().map(|&x| g.conj(s, x)).collect();
            if !push(lat.conj(s, r), m, &mut entries) {
                return None;
            }
        }
        for d in gens {
            if !lat.is_sub(r, d.dom) {
                continue;
            }
            let m: Vec<u32> = map.iter().map(|&x| d.table[x as usize]).collect();
            let img = {
                let mut e: Vec<u32> = lat.elems(r).iter().map(|&x| d.table[x as usize]).collect();
                e.sort_unstable();
                lat.id_of(&e).expect("image is a subgroup")
            };
            if !push(img, m, &mut entries) {
                return None;
            }
        }
        i += 1;
    }
    Some(Orbit { entries, index })
}

/// Automorphism group `Aut_F(P)` with its multiplication table; index 0 is the identity.
#[derive(Clone, Debug)]
pub struct AutGroup {
    pub sub: SubId,
    pub maps: Vec<Vec<u32>>,
    pub group: FinGroup,
    /// Indices of `Aut_S(P)`.
    pub from_s: Vec<u32>,
    /// Indices of `Inn(P)`.
    pub inner: Vec<u32>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ConjClass {
    pub representative: SubId,
    pub members: Vec<SubId>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "axiom")]
pub enum SatWitness {
    #[serde(rename = "I")]
    AxiomI { subgroup: SubId, reason: String },
    #[serde(rename = "II")]
    AxiomII { map: MorphView, n_f: SubId },
}

/// Serializable view of a morphism.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MorphView {
    pub domain: SubId,
    pub image: SubId,
    pub map: Vec<u32>,
}

impl From<&Morph> for MorphView {
    fn from(m: &Morph) -> Self {
        MorphView { domain: m.dom, image: m.cod, map: m.map.clone() }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Saturation {
    pub saturated: bool,
    pub witness: Option<SatWitness>,
}

#[derive(Clone, Debug, Serialize)]
pub struct Clause {
    pub pass: bool,
    pub witness: Option<String>,
}

impl Clause {
    fn ok() -> Self {
        Clause { pass: true, witness: None }
    }
    fn fail(w: String) -> Self {
        Clause { pass: false, witness: Some(w) }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct HGeneration {
    pub pass: bool,
    pub generated: Clause,
    pub h_saturated: Clause,
    pub centric_outside: Clause,
}

/// Fusion system over a finite p-group: inner maps plus generators and their inverses.
#[derive(Debug)]
pub struct FusionSystem {
    lat: Arc<Lattice>,
    user: Vec<Morph>,
    dense: Vec<Dense>,
    orbits: Vec<OnceLock<Option<Arc<Orbit>>>>,
    cap: usize,
}

impl FusionSystem {
    pub fn new(lat: Arc<Lattice>, gens: Vec<Morph>, cap: usize) -> Result<Self> {
        let grp = lat.group().clone();
        for m in &gens {
            let els = lat.elems(m.dom);
            if m.map.len() != els.len() {
                return Err(Error::spec("generator map has the wrong length"));
            }
            let mut img = m.map.clone();
            img.sort_unstable();
            img.dedup();
            if img.len() != els.len() {
                return Err(Error::spec("generator is not injective"));
            }
            let Some(img_id) = lat.id_of(&img) else {
                return Err(Error::spec("generator image is not a subgroup"));
            };
            if !lat.is_sub(img_id, m.cod) {
                return Err(Error::spec("generator image leaves its codomain"));
            }
            for (i, &a) in els.iter().enumerate() {
                for (j, &b) in els.iter().enumerate() {
                    let k = els.binary_search(&grp.mul(a, b)).unwrap();
                    if m.map[k] != grp.mul(m.map[i], m.map[j]) {
                        return Err(Error::spec("generator is not a homomorphism"));
                    }
                }
            }
        }
        let mut dense = Vec::new();
        let mut seen = HashSet::new();
        for m in &gens {
            for d in [m.clone(), m.inverse(&lat)] {
                if seen.insert((d.dom, d.map.clone())) {
                    dense.push(Dense::new(&lat, &d));
                }
            }
        }
        let orbits = (0..lat.len()).map(|_| OnceLock::new()).collect();
        Ok(FusionSystem { lat, user: gens, dense, orbits, cap })
    }

    pub fn inner(lat: Arc<Lattice>) -> Self {
        Self::new(lat, Vec::new(), DEFAULT_HOM_CAP).expect("inner fusion")
    }

    /// `F_S(G)` over a Sylow p-subgroup. Returns the system and the Sylow elements as indices of `G`.
    pub fn from_group(g: &FinGroup, p: u64) -> Result<(Self, Vec<u32>)> {
        let syl = g.sylow(p);
        let sg = Arc::new(g.subgroup_group(&syl));
        let lat = Arc::new(Lattice::new(sg, p)?);
        let pos: HashMap<u32, u32> = syl.iter().enumerate().map(|(i, &x)| (x, i as u32)).collect();
        let mut gens: Vec<Morph> = Vec::new();
        let mut seen = HashSet::new();
        for x in 0..g.size() as u32 {
            if pos.contains_key(&x) {
                continue;
            }
            let dom_elems: Vec<u32> = (0..syl.len() as u32).filter(|&i| pos.contains_key(&g.conj(x, syl[i as usize]))).collect();
            let dom = lat.id_of(&dom_elems).expect("S ∩ x⁻¹Sx is a subgroup");
            if dom == lat.trivial() {
                continue;
            }
            let map: Vec<u32> = dom_elems.iter().map(|&i| pos[&g.conj(x, syl[i as usize])]).collect();
            if seen.insert((dom, map.clone())) {
                let mut img = map.clone();
                img.sort_unstable();
                let cod = lat.id_of(&img).unwrap();
                gens.push(Morph { dom, cod, map });
            }
        }
        Ok((Self::new(lat, gens, DEFAULT_HOM_CAP)?, syl))
    }

    /// Fusion system generated by arbitrary maps (inner maps always included).
    pub fn generated(lat: Arc<Lattice>, gens: Vec<Morph>) -> Result<Self> {
        Self::new(lat, gens, DEFAULT_HOM_CAP)
    }

    pub fn with_cap(mut self, cap: usize) -> Self {
        self.cap = cap;
        self
    }

    pub fn lattice(&self) -> &Arc<Lattice> {
        &self.lat
    }
    pub fn group(&self) -> &Arc<FinGroup> {
        self.lat.group()
    }
    pub fn p(&self) -> u64 {
        self.lat.p()
    }
    pub fn s(&self) -> SubId {
        self.lat.whole()
    }
    pub fn generators(&self) -> &[Morph] {
        &self.user
    }
    pub fn cap(&self) -> usize {
        self.cap
    }

    /// Generators including the conjugations by generators of `S`.
    pub fn all_generators(&self) -> Vec<Morph> {
        let mut out: Vec<Morph> =
            self.lat.gens(self.s()).iter().map(|&g| Morph::conjugation(&self.lat, g, self.s())).collect();
        out.extend(self.user.iter().cloned());
        out
    }

    pub fn orbit(&self, p: SubId) -> Result<Arc<Orbit>> {
        self.orbits[p]
            .get_or_init(|| orbit_bfs(&self.lat, &self.dense, true, p, self.cap).map(Arc::new))
            .clone()
            .ok_or_else(|| Error::cap(format!("hom-set closure from subgroup {p}"), self.cap))
    }

    pub fn hom_set(&self, p: SubId, q: SubId) -> Result<Vec<Morph>> {
        let o = self.orbit(p)?;
        let mut v: Vec<Morph> = o
            .entries
            .iter()
            .filter(|(img, _)| self.lat.is_sub(*img, q))
            .map(|(_, m)| Morph { dom: p, cod: q, map: m.clone() })
            .collect();
        v.sort();
        Ok(v)
    }

    /// Isomorphisms `P → P'` for all `P'`.
    pub fn isos(&self, p: SubId) -> Result<Vec<Morph>> {
        let o = self.orbit(p)?;
        Ok(o.entries.iter().map(|(img, m)| Morph { dom: p, cod: *img, map: m.clone() }).collect())
    }

    pub fn contains(&self, f: &Morph) -> Result<bool> {
        let o = self.orbit(f.dom)?;
        Ok(o.contains(&f.map) && self.lat.is_sub(f.image(&self.lat), f.cod))
    }

    pub fn fclass(&self, p: SubId) -> Result<ConjClass> {
        let members = self.orbit(p)?.images();
        let representative = *members
            .iter()
            .min_by(|&&a, &&b| self.lat.elems(a).cmp(self.lat.elems(b)))
            .expect("class is nonempty");
        Ok(ConjClass { representative, members })
    }

    /// All F-conjugacy classes of subgroups of `S`.
    pub fn classes(&self) -> Result<Vec<ConjClass>> {
        let mut seen = vec![false; self.lat.len()];
        let mut out = Vec::new();
        for c in self.lat.classes() {
            let p = c[0];
            if seen[p] {
                continue;
            }
            let cl = self.fclass(p)?;
            for &m in &cl.members {
                seen[m] = true;
            }
            out.push(cl);
        }
        Ok(out)
    }

    pub fn is_fully_normalized(&self, p: SubId) -> Result<bool> {
        let n = self.lat.normalizer(p).len();
        Ok(self.fclass(p)?.members.iter().all(|&q| self.lat.normalizer(q).len() <= n))
    }

    pub fn is_fully_centralized(&self, p: SubId) -> Result<bool> {
        let n = self.lat.centralizer(p).len();
        Ok(self.fclass(p)?.members.iter().all(|&q| self.lat.centralizer(q).len() <= n))
    }

    /// A fully normalized member of the class of `p` (least id among those of maximal normalizer).
    pub fn fully_normalized_rep(&self, p: SubId) -> Result<SubId> {
        let members = self.fclass(p)?.members;
        let best = members.iter().map(|&q| self.lat.normalizer(q).len()).max().unwrap();
        Ok(*members.iter().find(|&&q| self.lat.normalizer(q).len() == best).unwrap())
    }

    pub fn aut(&self, p: SubId) -> Result<AutGroup> {
        let lat = &*self.lat;
        let g = lat.group();
        let o = self.orbit(p)?;
        let mut maps: Vec<Vec<u32>> = o.entries.iter().filter(|(img, _)| *img == p).map(|(_, m)| m.clone()).collect();
        maps.sort();
        let els = lat.elems(p);
        let pos: HashMap<u32, usize> = els.iter().enumerate().map(|(i, &x)| (x, i)).collect();
        let idx: HashMap<&Vec<u32>, u32> = maps.iter().enumerate().map(|(i, m)| (m, i as u32)).collect();
        let n = maps.len();
        let mut table = vec![0u32; n * n];
        for (i, a) in maps.iter().enumerate() {
            for (j, b) in maps.iter().enumerate() {
                let c: Vec<u32> = b.iter().map(|&x| a[pos[&x]]).collect();
                table[i * n + j] = idx[&c];
            }
        }
        let group = FinGroup::from_flat_table(n, table)?;
        let conj_idx = |x: u32| -> u32 {
            let m: Vec<u32> = els.iter().map(|&e| g.conj(x, e)).collect();
            idx[&m]
        };
        let mut from_s: Vec<u32> = lat.normalizer(p).into_iter().map(conj_idx).collect();
        from_s.sort_unstable();
        from_s.dedup();
        let mut inner: Vec<u32> = els.iter().map(|&x| conj_idx(x)).collect();
        inner.sort_unstable();
        inner.dedup();
        Ok(AutGroup { sub: p, maps, group, from_s, inner })
    }

    /// `Out_F(P)`, with the image of `Out_S(P)`.
    pub fn out(&self, p: SubId) -> Result<(FinGroup, Vec<u32>)> {
        let a = self.aut(p)?;
        let (q, proj) = a.group.quotient(&a.inner)?;
        let mut out_s: Vec<u32> = a.from_s.iter().map(|&i| proj[i as usize]).collect();
        out_s.sort_unstable();
        out_s.dedup();
        Ok((q, out_s))
    }

    pub fn is_centric(&self, p: SubId) -> Result<bool> {
        Ok(self.fclass(p)?.members.iter().all(|&q| {
            let c = self.lat.centralizer(q);
            c.iter().all(|&x| self.lat.contains(q, x))
        }))
    }

    pub fn is_radical(&self, p: SubId) -> Result<bool> {
        let (out, _) = self.out(p)?;
        Ok(out.o_p(self.p()).len() == 1)
    }

    /// F-centric F-radical subgroups.
    pub fn centric_radicals(&self) -> Result<Vec<SubId>> {
        let mut out = Vec::new();
        for cl in self.classes()? {
            let r = cl.representative;
            if self.is_centric(r)? && self.is_radical(r)? {
                out.extend(cl.members);
            }
        }
        out.sort_unstable();
        Ok(out)
    }

    pub fn centrics(&self) -> Result<Vec<SubId>> {
        let mut out = Vec::new();
        for cl in self.classes()? {
            if self.is_centric(cl.representative)? {
                out.extend(cl.members);
            }
        }
        out.sort_unstable();
        Ok(out)
    }

    /// Kernel of `Aut_F(P) → Aut(P0) × Aut(P/P0)` as indices into `aut(P)`, and whether it
    /// lies in `O_p(Aut_F(P))`.
    pub fn kernel_k_p(&self, p: SubId, p0: SubId) -> Result<(Vec<u32>, bool)> {
        let lat = &*self.lat;
        let g = lat.group();
        if !lat.is_normal_in(p0, p) {
            return Err(Error::pre("P0 is not normal in P"));
        }
        let a = self.aut(p)?;
        let els = lat.elems(p);
        let pos: HashMap<u32, usize> = els.iter().enumerate().map(|(i, &x)| (x, i)).collect();
        for m in &a.maps {
            if lat.elems(p0).iter().any(|x| !lat.contains(p0, m[pos[x]])) {
                return Err(Error::pre("P0 is not Aut_F(P)-invariant"));
            }
        }
        let kernel: Vec<u32> = (0..a.maps.len() as u32)
            .filter(|&i| {
                let m = &a.maps[i as usize];
                lat.elems(p0).iter().all(|x| m[pos[x]] == *x)
                    && els.iter().enumerate().all(|(k, &x)| lat.contains(p0, g.mul(m[k], g.inv(x))))
            })
            .collect();
        let op = a.group.o_p(self.p());
        let inside = kernel.iter().all(|k| op.binary_search(k).is_ok());
        Ok((kernel, inside))
    }

    pub fn is_strongly_closed(&self, r: SubId) -> Result<bool> {
        let lat = &*self.lat;
        for &x in lat.elems(r) {
            let c = lat.generated(&[x]);
            let i = lat.elems(c).binary_search(&x).unwrap();
            for (_, m) in &self.orbit(c)?.entries {
                if !lat.contains(r, m[i]) {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }

    /// `Hom_F(P,Q)` modulo post-composition with `Inn(Q)`; each class is represented by its least map.
    pub fn rep_set(&self, p: SubId, q: SubId) -> Result<Vec<Morph>> {
        let g = self.group();
        let mut reps: Vec<Morph> = self
            .hom_set(p, q)?
            .into_iter()
            .map(|f| {
                let map = self
                    .lat
                    .elems(q)
                    .iter()
                    .map(|&y| f.map.iter().map(|&x| g.conj(y, x)).collect::<Vec<u32>>())
                    .min()
                    .unwrap();
                Morph { dom: p, cod: q, map }
            })
            .collect();
        reps.sort();
        reps.dedup();
        Ok(reps)
    }

    fn axiom_one(&self, p: SubId) -> Result<Option<String>> {
        let members = self.fclass(p)?.members;
        let cmax = members.iter().map(|&q| self.lat.centralizer(q).len()).max().unwrap();
        let c = self.lat.centralizer(p).len();
        if c < cmax {
            return Ok(Some(format!("fully normalized but not fully centralized (|C_S| = {c} < {cmax})")));
        }
        let aut_f = self.orbit(p)?.entries.iter().filter(|(img, _)| *img == p).count();
        let aut_s = self.lat.normalizer(p).len() / c;
        if (aut_f / aut_s) % self.p() as usize == 0 {
            return Ok(Some(format!("Out_S(P) is not Sylow in Out_F(P) (|Aut_F| = {aut_f}, |Aut_S| = {aut_s})")));
        }
        Ok(None)
    }

    /// `N_f` for an isomorphism `f : P → Q`.
    pub fn n_f(&self, f: &Morph) -> SubId {
        let lat = &*self.lat;
        let g = lat.group();
        let q = f.image(lat);
        let q_els = lat.elems(q);
        let aut_s: HashSet<Vec<u32>> =
            lat.normalizer(q).iter().map(|&h| q_els.iter().map(|&y| g.conj(h, y)).collect()).collect();
        let inv = f.inverse(lat);
        let nf: Vec<u32> = lat
            .normalizer(f.dom)
            .into_iter()
            .filter(|&x| {
                let m: Vec<u32> = q_els.iter().map(|&y| f.apply(lat, g.conj(x, inv.apply(lat, y)))).collect();
                aut_s.contains(&m)
            })
            .collect();
        lat.id_of(&nf).expect("N_f is a subgroup")
    }

    /// Some `f̃ ∈ Hom_F(N, S)` with `f̃|_P = f`.
    pub fn extension(&self, f: &Morph, n: SubId) -> Result<Option<Morph>> {
        let lat = &*self.lat;
        let n_els = lat.elems(n);
        let positions: Vec<usize> = lat.elems(f.dom).iter().map(|x| n_els.binary_search(x).unwrap()).collect();
        for (img, m) in &self.orbit(n)?.entries {
            if positions.iter().zip(&f.map).all(|(&i, &y)| m[i] == y) {
                return Ok(Some(Morph { dom: n, cod: *img, map: m.clone() }));
            }
        }
        Ok(None)
    }

    fn axiom_two(&self, p: SubId, fully_centralized: &dyn Fn(SubId) -> Result<bool>) -> Result<Option<SatWitness>> {
        for f in self.isos(p)? {
            if !fully_centralized(f.cod)? {
                continue;
            }
            let n = self.n_f(&f);
            if n == p {
                continue;
            }
            if self.extension(&f, n)?.is_none() {
                return Ok(Some(SatWitness::AxiomII { map: MorphView::from(&f), n_f: n }));
            }
        }
        Ok(None)
    }

    fn fully_centralized_memo(&self) -> impl Fn(SubId) -> Result<bool> + '_ {
        let memo: std::cell::RefCell<HashMap<SubId, bool>> = Default::default();
        move |q| {
            if let Some(&b) = memo.borrow().get(&q) {
                return Ok(b);
            }
            let b = self.is_fully_centralized(q)?;
            memo.borrow_mut().insert(q, b);
            Ok(b)
        }
    }

    /// Axioms (I) and (II) over the given subgroups. Axiom (III) only concerns
    /// infinite increasing unions and holds vacuously over a finite group.
    fn saturation_on(&self, subs: &[SubId]) -> Result<Saturation> {
        let mut reps = Vec::new();
        for &p in subs {
            let r = self.fully_normalized_rep(p)?;
            if !reps.contains(&r) {
                reps.push(r);
            }
        }
        reps.sort_unstable();
        for &r in &reps {
            if let Some(reason) = self.axiom_one(r)? {
                return Ok(Saturation { saturated: false, witness: Some(SatWitness::AxiomI { subgroup: r, reason }) });
            }
        }
        let fc = self.fully_centralized_memo();
        let mut done = HashSet::new();
        for &p in subs {
            let rep = self.lat.class(p)[0];
            if !done.insert(rep) {
                continue;
            }
            if let Some(w) = self.axiom_two(rep, &fc)? {
                return Ok(Saturation { saturated: false, witness: Some(w) });
            }
        }
        Ok(Saturation { saturated: true, witness: None })
    }

    pub fn is_saturated(&self) -> Result<Saturation> {
        let all: Vec<SubId> = (0..self.lat.len()).collect();
        self.saturation_on(&all)
    }

    /// Whether `f` lies in the category generated by the given isomorphisms, without inner maps.
    fn generated_contains(&self, gens: &[Dense], f: &Morph) -> Result<bool> {
        let o = orbit_bfs(&self.lat, gens, false, f.dom, self.cap).ok_or_else(|| Error::cap("H-generation closure", self.cap))?;
        Ok(o.contains(&f.map))
    }

    pub fn check_h_generation(&self, h: &[SubId]) -> Result<HGeneration> {
        let lat = &*self.lat;
        let mut hset: Vec<SubId> = h.to_vec();
        hset.sort_unstable();
        hset.dedup();
        let in_h = |q: SubId| hset.binary_search(&q).is_ok();
        for &q in &hset {
            if let Some(bad) = self.fclass(q)?.members.into_iter().find(|&m| !in_h(m)) {
                return Err(Error::pre(format!("H is not closed under F-conjugacy: {q} ~ {bad}")));
            }
        }
        let mut gens = Vec::new();
        let mut done = HashSet::new();
        for &q in &hset {
            let rep = self.fclass(q)?.representative;
            if !done.insert(rep) {
                continue;
            }
            for f in self.isos(rep)? {
                gens.push(Dense::new(lat, &f));
                gens.push(Dense::new(lat, &f.inverse(lat)));
            }
        }
        let mut generated = Clause::ok();
        for f in self.all_generators() {
            if !self.generated_contains(&gens, &f)? {
                generated = Clause::fail(format!("generator on subgroup {} with images {:?}", f.dom, f.map));
                break;
            }
        }
        let sat = self.saturation_on(&hset)?;
        let h_saturated = match sat.witness {
            None => Clause::ok(),
            Some(w) => Clause::fail(serde_json::to_string(&w)?),
        };
        let mut centric_outside = Clause::ok();
        for cl in self.classes()? {
            if in_h(cl.representative) || !self.is_centric(cl.representative)? {
                continue;
            }
            let mut found = false;
            for &q in &cl.members {
                let (out, out_s) = self.out(q)?;
                let op = out.o_p(self.p());
                if out_s.iter().any(|&x| x != 0 && op.binary_search(&x).is_ok()) {
                    found = true;
                    break;
                }
            }
            if !found {
                centric_outside = Clause::fail(format!("centric subgroup {} outside H", cl.representative));
                break;
            }
        }
        let pass = generated.pass && h_saturated.pass && centric_outside.pass;
        Ok(HGeneration { pass, generated, h_saturated, centric_outside })
    }

    /// Writes `f : P → S` as a composite of restrictions of automorphisms of centric
    /// radical subgroups (or of `S`). An inclusion gives the empty list.
    pub fn alperin_factorize(&self, f: &Morph) -> Result<Vec<(SubId, Morph)>> {
        let lat = &*self.lat;
        if f.is_inclusion(lat) {
            return Ok(Vec::new());
        }
        let mut us = self.centric_radicals()?;
        if !us.contains(&self.s()) {
            us.push(self.s());
        }
        let mut moves: Vec<(SubId, Morph, Dense)> = Vec::new();
        for &u in &us {
            let a = self.aut(u)?;
            for m in a.maps.iter().skip(1) {
                let mm = Morph { dom: u, cod: u, map: m.clone() };
                let d = Dense::new(lat, &mm);
                moves.push((u, mm, d));
            }
        }
        let start = lat.elems(f.dom).to_vec();
        let mut parent: HashMap<Vec<u32>, Option<(Vec<u32>, usize)>> = HashMap::from([(start.clone(), None)]);
        let mut queue = VecDeque::from([(start, f.dom)]);
        let mut found = false;
        while let Some((map, w)) = queue.pop_front() {
            if map == f.map {
                found = true;
                break;
            }
            for (k, (u, _, d)) in moves.iter().enumerate() {
                if !lat.is_sub(w, *u) {
                    continue;
                }
                let next: Vec<u32> = map.iter().map(|&x| d.table[x as usize]).collect();
                if parent.contains_key(&next) {
                    continue;
                }
                if parent.len() >= self.cap {
                    return Err(Error::cap("Alperin factorization search", self.cap));
                }
                let mut img = lat.elems(w).iter().map(|&x| d.table[x as usize]).collect::<Vec<u32>>();
                img.sort_unstable();
                parent.insert(next.clone(), Some((map.clone(), k)));
                queue.push_back((next, lat.id_of(&img).unwrap()));
            }
        }
        if !found {
            return Err(Error::Failed("no Alperin factorization found; is the fusion system saturated?".into()));
        }
        let mut steps = Vec::new();
        let mut cur = f.map.clone();
        while let Some(Some((prev, k))) = parent.get(&cur) {
            steps.push((moves[*k].0, moves[*k].1.clone()));
            cur = prev.clone();
        }
        steps.reverse();
        Ok(steps)
    }

    /// Hom-set equality on every subgroup class representative.
    pub fn same_as(&self, other: &FusionSystem) -> Result<bool> {
        if self.group().size() != other.group().size() || self.lat.len() != other.lat.len() {
            return Ok(false);
        }
        for c in self.lat.classes() {
            let p = c[0];
            let a: HashSet<Vec<u32>> = self.orbit(p)?.entries.iter().map(|e| e.1.clone()).collect();
            let b: HashSet<Vec<u32>> = other.orbit(p)?.entries.iter().map(|e| e.1.clone()).collect();
            if a != b {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Restriction to the subgroups of `sub`, as a fusion system over `sub` itself. Returns the
    /// system and the elements of `sub` (index `i` of the new group is `elems[i]`).
    pub fn restrict_to(&self, sub: SubId) -> Result<(FusionSystem, Vec<u32>)> {
        let lat = &*self.lat;
        let els = lat.elems(sub).to_vec();
        let g2 = Arc::new(lat.group().subgroup_group(&els));
        let lat2 = Arc::new(Lattice::new(g2, self.p())?);
        let pos: HashMap<u32, u32> = els.iter().enumerate().map(|(i, &x)| (x, i as u32)).collect();
        let mut gens = Vec::new();
        let mut seen = HashSet::new();
        for c in lat2.classes() {
            let p2 = c[0];
            let p: Vec<u32> = lat2.elems(p2).iter().map(|&i| els[i as usize]).collect();
            let p_id = lat.id_of(&p).unwrap();
            for f in self.hom_set(p_id, sub)? {
                let map: Vec<u32> = f.map.iter().map(|x| pos[x]).collect();
                if seen.insert(map.clone()) {
                    let mut img = map.clone();
                    img.sort_unstable();
                    let cod = lat2.id_of(&img).unwrap();
                    gens.push(Morph { dom: p2, cod, map });
                }
            }
        }
        Ok((FusionSystem::new(lat2, gens, self.cap)?, els))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s4() -> FusionSystem {
        FusionSystem::from_group(&FinGroup::symmetric(4), 2).unwrap().0
    }

    #[test]
    fn inner_fusion_is_saturated() {
        let lat = Arc::new(Lattice::new(Arc::new(FinGroup::dihedral(8)), 2).unwrap());
        let f = FusionSystem::inner(lat);
        assert!(f.is_saturated().unwrap().saturated);
    }

    #[test]
    fn s4_fusion_on_d8() {
        let f = s4();
        let lat = f.lattice().clone();
        assert_eq!(f.group().size(), 8);
        assert!(f.is_saturated().unwrap().saturated);
        let kleins: Vec<SubId> = (0..lat.len())
            .filter(|&i| lat.size(i) == 4 && lat.elems(i).iter().all(|&x| f.group().element_order(x) <= 2))
            .collect();
        assert_eq!(kleins.len(), 2);
        let auts: Vec<usize> = kleins.iter().map(|&v| f.aut(v).unwrap().maps.len()).collect();
        assert!(auts.contains(&6) && auts.contains(&2));
        let v = kleins[auts.iter().position(|&a| a == 6).unwrap()];
        assert!(f.is_centric(v).unwrap() && f.is_radical(v).unwrap());
        assert!(f.is_fully_centralized(v).unwrap());
        assert_eq!(f.out(v).unwrap().0.signature().name.as_deref(), Some("S3"));
    }

    #[test]
    fn z4_axiom_one_breaker() {
        let lat = Arc::new(Lattice::new(Arc::new(FinGroup::cyclic(4)), 2).unwrap());
        let s = lat.whole();
        let inv = Morph { dom: s, cod: s, map: lat.elems(s).iter().map(|&x| lat.group().inv(x)).collect() };
        let f = FusionSystem::new(lat, vec![inv], DEFAULT_HOM_CAP).unwrap();
        let sat = f.is_saturated().unwrap();
        assert!(!sat.saturated);
        assert!(matches!(sat.witness, Some(SatWitness::AxiomI { subgroup, .. }) if subgroup == s));
    }

    #[test]
    fn non_homomorphism_rejected() {
        let lat = Arc::new(Lattice::new(Arc::new(FinGroup::cyclic(4)), 2).unwrap());
        let s = lat.whole();
        let bad = Morph { dom: s, cod: s, map: vec![0, 2, 1, 3] };
        assert!(FusionSystem::new(lat, vec![bad], DEFAULT_HOM_CAP).is_err());
    }

    #[test]
    fn o_p_examples() {
        assert_eq!(FinGroup::symmetric(4).o_p(2).len(), 4);
        assert_eq!(FinGroup::symmetric(3).o_p(2).len(), 1);
        assert_eq!(FinGroup::dihedral(4).o_p(2).len(), 8);
    }
}
