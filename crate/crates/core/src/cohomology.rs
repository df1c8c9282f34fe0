//! Cohomology of finite groups with finite `p`-torsion coefficients.
//!
//! Cochains live on the normalized bar complex: maps `(G∖{1})^n → M`. A module
//! `M = ⊕ Z/p^{k_j}` is handled as `R^r` over `R = Z/p^K`, `K = max k_j`, with
//! coordinate `j` read mod `p^{k_j}`. Stable elements are cut out by the
//! conditions `res_P = φ^*` over the user generators of the fusion system and
//! their restrictions to subgroups; since every morphism is a composite of
//! such restrictions and inner maps, and the conditions are closed under
//! composition and restriction, this set suffices. The same set of conditions
//! is used for the E₂ functor.

use std::collections::{HashMap, HashSet};
use std::sync::Arc;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::finfusion::{FusionSystem, Morph};
use crate::group::{FinGroup, Lattice, SubId};
use crate::linalg::{Kernel, Mat, Ring, SparseRow, Subquotient};

pub const MAX_GROUP_ORDER: usize = 64;
pub const MAX_DEGREE: u32 = 3;
/// Bound on `rows × columns` of a coboundary matrix over F₂; other rings get a sixteenth.
pub const MAX_ENTRIES: u64 = 60_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Caps {
    pub max_order: usize,
    pub max_degree: u32,
    pub max_entries: u64,
}

impl Default for Caps {
    fn default() -> Self {
        Caps { max_order: MAX_GROUP_ORDER, max_degree: MAX_DEGREE, max_entries: MAX_ENTRIES }
    }
}

// ---------------------------------------------------------------- modules

#[derive(Clone, Debug)]
pub struct CoefficientModule {
    p: u64,
    exps: Vec<u32>,
    /// One `r × r` matrix per group element; `None` is the trivial action.
    action: Option<Arc<Vec<Mat>>>,
    /// Lower bound for the exponent of the working ring.
    top: u32,
}

impl CoefficientModule {
    pub fn trivial(p: u64, exps: Vec<u32>) -> Result<Self> {
        if p < 2 || !(2..p).all(|d| p % d != 0) {
            return Err(Error::spec(format!("{p} is not a prime")));
        }
        if exps.contains(&0) {
            return Err(Error::spec("summand Z/1"));
        }
        let m = CoefficientModule { p, exps, action: None, top: 1 };
        m.ring()?;
        Ok(m)
    }

    /// `"Z/2"`, `"Z/4+Z/2"`, `"(Z/2)^3"`, `"F_3"` or `"0"` (the zero module needs a prime: `"0/p"`).
    pub fn parse(text: &str) -> Result<Self> {
        let t: String = text.chars().filter(|c| !c.is_whitespace()).collect();
        if let Some(p) = t.strip_prefix("0/") {
            let p = p.parse().map_err(|_| Error::spec(format!("bad module `{text}`")))?;
            return Self::trivial(p, Vec::new());
        }
        let mut p = None;
        let mut exps = Vec::new();
        for part in t.split(['+', '⊕']) {
            let (base, count) = match part.strip_prefix('(').and_then(|s| s.split_once(")^")) {
                Some((b, c)) => (b, c.parse::<usize>().map_err(|_| Error::spec(format!("bad multiplicity in `{part}`")))?),
                None => (part, 1),
            };
            let n: u64 = base
                .strip_prefix("Z/")
                .or_else(|| base.strip_prefix("F_"))
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| Error::spec(format!("bad module summand `{part}`")))?;
            let q = (2..=n).find(|d| n % d == 0).ok_or_else(|| Error::spec(format!("bad module summand `{part}`")))?;
            let mut k = 0;
            let mut x = n;
            while x % q == 0 {
                x /= q;
                k += 1;
            }
            if x != 1 || p.is_some_and(|p0| p0 != q) {
                return Err(Error::spec(format!("`{text}` is not a finite p-group")));
            }
            p = Some(q);
            exps.extend(std::iter::repeat_n(k, count));
        }
        Self::trivial(p.ok_or_else(|| Error::spec("empty module"))?, exps)
    }

    /// Extends generator matrices to an action of `g`, checking every relation of the table.
    pub fn with_action(self, g: &FinGroup, gens: &[u32], mats: &[Mat]) -> Result<Self> {
        if gens.len() != mats.len() {
            return Err(Error::spec("one matrix per generator"));
        }
        let ring = self.ring()?;
        let r = self.rank();
        let mut per: Vec<Option<Mat>> = vec![None; g.size()];
        per[0] = Some(identity(r));
        let mut queue = vec![0u32];
        while let Some(x) = queue.pop() {
            for (&s, m) in gens.iter().zip(mats) {
                let m: Mat = m.iter().map(|row| row.iter().map(|&v| v % ring.modulus()).collect()).collect();
                let y = g.mul(x, s);
                let my = self.reduce(&ring, &mat_mul(&ring, per[x as usize].as_ref().unwrap(), &m));
                match &per[y as usize] {
                    Some(old) if *old != my => return Err(Error::spec("matrices do not define an action")),
                    Some(_) => {}
                    None => {
                        per[y as usize] = Some(my);
                        queue.push(y);
                    }
                }
            }
        }
        let per: Vec<Mat> = per.into_iter().collect::<Option<_>>().ok_or_else(|| Error::spec("generators do not generate the group"))?;
        self.with_element_action(g, per)
    }

    /// One matrix per element of `g`; checks well-definedness and the homomorphism law.
    pub fn with_element_action(mut self, g: &FinGroup, per: Vec<Mat>) -> Result<Self> {
        let ring = self.ring()?;
        let r = self.rank();
        if per.len() != g.size() || per.iter().any(|m| m.len() != r || m.iter().any(|row| row.len() != r)) {
            return Err(Error::spec("action matrices have the wrong shape"));
        }
        let per: Vec<Mat> = per.iter().map(|m| self.reduce(&ring, m)).collect();
        for m in &per {
            for i in 0..r {
                for j in 0..r {
                    if self.exps[j] < self.exps[i] && ring.mul(m[i][j], ring.pp(self.exps[j])) % ring.p().pow(self.exps[i]) != 0 {
                        return Err(Error::spec("action matrix is not well defined on the module"));
                    }
                }
            }
        }
        if per[0] != self.reduce(&ring, &identity(r)) {
            return Err(Error::spec("identity acts nontrivially"));
        }
        for a in 0..g.size() {
            for b in 0..g.size() {
                if self.reduce(&ring, &mat_mul(&ring, &per[a], &per[b])) != per[g.mul(a as u32, b as u32) as usize] {
                    return Err(Error::spec("matrices do not define an action"));
                }
            }
        }
        if per.iter().all(|m| *m == per[0]) {
            self.action = None;
        } else {
            self.action = Some(Arc::new(per));
        }
        Ok(self)
    }

    /// The same module with the action pulled back along `hom: H → G`.
    pub fn pullback(&self, hom: &[u32]) -> CoefficientModule {
        CoefficientModule {
            p: self.p,
            exps: self.exps.clone(),
            action: self.action.as_ref().map(|a| Arc::new(hom.iter().map(|&x| a[x as usize].clone()).collect())),
            top: self.top,
        }
    }

    pub fn p(&self) -> u64 {
        self.p
    }
    pub fn exps(&self) -> &[u32] {
        &self.exps
    }
    pub fn rank(&self) -> usize {
        self.exps.len()
    }
    pub fn is_trivial(&self) -> bool {
        self.action.is_none()
    }
    pub fn order(&self) -> u64 {
        self.exps.iter().map(|&k| self.p.pow(k)).product()
    }
    pub fn ring(&self) -> Result<Ring> {
        Ring::new(self.p, self.exps.iter().copied().max().unwrap_or(1).max(self.top))
    }

    pub fn label(&self) -> String {
        if self.exps.is_empty() {
            return "0".into();
        }
        self.exps.iter().map(|&k| format!("Z/{}", self.p.pow(k))).collect::<Vec<_>>().join("+")
    }

    fn act(&self, g: u32) -> Option<&Mat> {
        self.action.as_ref().map(|a| &a[g as usize])
    }

    /// Entries of row `i` reduced mod `p^{k_i}`.
    fn reduce(&self, ring: &Ring, m: &Mat) -> Mat {
        m.iter().enumerate().map(|(i, row)| row.iter().map(|&x| ring.reduce_to(x, self.exps[i])).collect()).collect()
    }

    fn same_shape(&self, other: &CoefficientModule) -> bool {
        self.p == other.p && self.exps == other.exps
    }
}

fn identity(r: usize) -> Mat {
    (0..r).map(|i| (0..r).map(|j| u64::from(i == j)).collect()).collect()
}

fn mat_mul(ring: &Ring, a: &Mat, b: &Mat) -> Mat {
    let inner = b.len();
    let cols = b.first().map_or(0, |r| r.len());
    a.iter()
        .map(|row| (0..cols).map(|j| (0..inner).fold(0, |acc, l| ring.add(acc, ring.mul(row[l], b[l][j])))).collect())
        .collect()
}

fn mat_vec(ring: &Ring, a: &Mat, v: &[u64]) -> Vec<u64> {
    a.iter().map(|row| row.iter().zip(v).fold(0, |acc, (&x, &y)| ring.add(acc, ring.mul(x, y)))).collect()
}

// ---------------------------------------------------------------- bar complex

struct Bar<'a> {
    g: &'a FinGroup,
    m: &'a CoefficientModule,
    ring: Ring,
    e: usize,
    r: usize,
}

impl<'a> Bar<'a> {
    fn tuples(&self, n: u32) -> usize {
        self.e.pow(n)
    }

    fn index(&self, t: &[u32]) -> usize {
        t.iter().fold(0, |acc, &x| acc * self.e + (x as usize - 1))
    }

    fn decode(&self, mut idx: usize, n: u32, out: &mut Vec<u32>) {
        out.clear();
        out.resize(n as usize, 0);
        for slot in out.iter_mut().rev() {
            *slot = (idx % self.e) as u32 + 1;
            idx /= self.e;
        }
    }

    /// Rows of `d_n : C^n → C^{n+1}`, one per `(tuple, coordinate)`.
    fn rows(&self, n: u32) -> Vec<SparseRow> {
        let ring = self.ring;
        let r = self.r;
        let mut out = Vec::with_capacity(self.tuples(n + 1) * r);
        let mut gs = Vec::new();
        let mut tau = Vec::new();
        let sign = |i: usize| if i % 2 == 0 { 1 } else { ring.neg(1) };
        for t in 0..self.tuples(n + 1) {
            self.decode(t, n + 1, &mut gs);
            let first = self.index(&gs[1..]);
            let last = self.index(&gs[..n as usize]);
            let mut faces = Vec::new();
            for i in 1..=n as usize {
                let h = self.g.mul(gs[i - 1], gs[i]);
                if h != 0 {
                    tau.clear();
                    tau.extend_from_slice(&gs[..i - 1]);
                    tau.push(h);
                    tau.extend_from_slice(&gs[i + 1..]);
                    faces.push((self.index(&tau), sign(i)));
                }
            }
            for i in 0..r {
                let mut row: SparseRow = Vec::with_capacity(faces.len() + r + 1);
                match self.m.act(gs[0]) {
                    Some(a) => row.extend((0..r).filter(|&j| a[i][j] != 0).map(|j| (first * r + j, a[i][j]))),
                    None => row.push((first * r + i, 1)),
                }
                row.extend(faces.iter().map(|&(c, s)| (c * r + i, s)));
                row.push((last * r + i, sign(n as usize + 1)));
                row.sort_unstable_by_key(|&(c, _)| c);
                let mut merged: SparseRow = Vec::with_capacity(row.len());
                for (c, v) in row {
                    match merged.last_mut() {
                        Some((c0, v0)) if *c0 == c => *v0 = ring.add(*v0, v),
                        _ => merged.push((c, v)),
                    }
                }
                merged.retain(|&(_, v)| ring.reduce_to(v, self.m.exps[i]) != 0);
                out.push(merged);
            }
        }
        out
    }
}

/// `H^n(G; M)` with explicit cocycle representatives.
pub struct Cohomology {
    pub degree: u32,
    group_order: usize,
    module: CoefficientModule,
    ring: Ring,
    sq: Subquotient,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CohomologyGroup {
    pub degree: u32,
    pub group_order: usize,
    pub coefficients: String,
    /// Orders of the cyclic summands.
    pub invariants: Vec<u64>,
    pub dimension: usize,
    pub fingerprints: Vec<String>,
}

pub fn bar_cohomology(g: &FinGroup, m: &CoefficientModule, n: u32) -> Result<Cohomology> {
    bar_cohomology_with(g, m, n, &Caps::default())
}

pub fn bar_cohomology_with(g: &FinGroup, m: &CoefficientModule, n: u32, caps: &Caps) -> Result<Cohomology> {
    if g.size() > caps.max_order {
        return Err(Error::cap("bar complex (group order)", caps.max_order));
    }
    if n > caps.max_degree {
        return Err(Error::cap("bar complex (degree)", caps.max_degree as usize));
    }
    if m.action.as_ref().is_some_and(|a| a.len() != g.size()) {
        return Err(Error::spec("module action belongs to another group"));
    }
    let ring = m.ring()?;
    let bar = Bar { g, m, ring, e: g.size() - 1, r: m.rank() };
    let cols = bar.tuples(n) * bar.r;
    let rows_n = bar.tuples(n + 1) * bar.r;
    let limit = if ring.p() == 2 && ring.is_field() { caps.max_entries } else { caps.max_entries / 16 };
    if (rows_n as u64).saturating_mul(cols as u64) > limit {
        return Err(Error::cap("bar complex (coboundary entries)", limit as usize));
    }
    let scaled: Vec<SparseRow> = bar
        .rows(n)
        .into_iter()
        .enumerate()
        .map(|(i, row)| {
            let sc = ring.pp(ring.k() - m.exps[i % bar.r]);
            row.into_iter().map(|(c, v)| (c, ring.mul(v, sc))).filter(|&(_, v)| v != 0).collect()
        })
        .collect();
    let kernel = Kernel::of_rows(ring, cols, scaled.iter().cloned());
    let mut sub: Vec<Vec<u64>> = Vec::new();
    if n > 0 {
        let prev = bar.rows(n - 1);
        let ncols_prev = bar.tuples(n - 1) * bar.r;
        let mut gens: Vec<Vec<u64>> = vec![vec![0u64; cols]; ncols_prev];
        for (i, row) in prev.iter().enumerate() {
            for &(c, v) in row {
                gens[c][i] = ring.add(gens[c][i], v);
            }
        }
        sub.extend(gens.into_iter().filter(|v| v.iter().any(|&x| x != 0)));
    }
    for idx in 0..cols {
        let k = m.exps[idx % bar.r];
        if k < ring.k() {
            let mut x = vec![0u64; cols];
            x[idx] = ring.pp(k);
            sub.push(x);
        }
    }
    for b in &sub {
        for row in &scaled {
            let v = row.iter().fold(0, |acc, &(c, x)| ring.add(acc, ring.mul(x, b[c])));
            if v != 0 {
                return Err(Error::Failed("coboundary does not square to zero".into()));
            }
        }
    }
    let sq = Subquotient::new(kernel, &sub);
    Ok(Cohomology { degree: n, group_order: g.size(), module: m.clone(), ring, sq })
}

impl Cohomology {
    pub fn module(&self) -> &CoefficientModule {
        &self.module
    }
    pub fn ring(&self) -> Ring {
        self.ring
    }
    pub fn exps(&self) -> &[u32] {
        &self.sq.exps
    }
    pub fn invariants(&self) -> Vec<u64> {
        self.sq.invariants()
    }
    /// Number of cyclic summands; the dimension over `F_p` when `M` is elementary abelian.
    pub fn dimension(&self) -> usize {
        self.sq.len()
    }
    pub fn order(&self) -> u64 {
        self.invariants().iter().product()
    }
    pub fn reps(&self) -> &[Vec<u64>] {
        &self.sq.reps
    }
    pub fn coords(&self, cocycle: &[u64]) -> Vec<u64> {
        if cocycle.is_empty() {
            return vec![0; self.dimension()];
        }
        self.sq.coords(cocycle)
    }

    /// Cocycle of a class given by coordinates.
    pub fn cocycle(&self, coords: &[u64]) -> Vec<u64> {
        let len = self.sq.reps.first().map_or(0, |r| r.len());
        let mut x = vec![0u64; len];
        for (c, rep) in coords.iter().zip(&self.sq.reps) {
            for (xi, &ri) in x.iter_mut().zip(rep) {
                *xi = self.ring.add(*xi, self.ring.mul(*c, ri));
            }
        }
        x
    }

    pub fn fingerprints(&self) -> Vec<String> {
        self.sq.reps.iter().map(|r| fingerprint(self.degree, r)).collect()
    }

    pub fn summary(&self) -> CohomologyGroup {
        CohomologyGroup {
            degree: self.degree,
            group_order: self.group_order,
            coefficients: self.module.label(),
            invariants: self.invariants(),
            dimension: self.dimension(),
            fingerprints: self.fingerprints(),
        }
    }
}

pub fn fingerprint(degree: u32, cocycle: &[u64]) -> String {
    let mut h = Sha256::new();
    h.update(degree.to_le_bytes());
    for x in cocycle {
        h.update(x.to_le_bytes());
    }
    h.finalize().iter().take(8).map(|b| format!("{b:02x}")).collect()
}

fn check_hom(p: &FinGroup, q: &FinGroup, hom: &[u32]) -> Result<()> {
    if hom.len() != p.size() || hom.iter().any(|&x| x as usize >= q.size()) {
        return Err(Error::spec("map has the wrong shape"));
    }
    for a in 0..p.size() as u32 {
        for b in 0..p.size() as u32 {
            if hom[p.mul(a, b) as usize] != q.mul(hom[a as usize], hom[b as usize]) {
                return Err(Error::spec("map is not a homomorphism"));
            }
        }
    }
    Ok(())
}

/// Matrix (target coordinates × source coordinates) of `H^n(Q; M_Q) → H^n(P; M_P)` induced by
/// `hom: P → Q` and a module map `phi: M_Q → M_P` (identity when `None`).
pub fn induced_map(hq: &Cohomology, hp: &Cohomology, hom: &[u32], phi: Option<&Mat>) -> Result<Mat> {
    if hq.degree != hp.degree {
        return Err(Error::pre("degrees differ"));
    }
    let ring = hp.ring;
    if hq.ring != ring {
        return Err(Error::pre("coefficient rings differ"));
    }
    let (mq, mp) = (&hq.module, &hp.module);
    let rq = mq.rank();
    let rp = mp.rank();
    let id = identity(rq);
    let phi = match phi {
        Some(f) => {
            if f.len() != rp || f.iter().any(|r| r.len() != rq) {
                return Err(Error::spec("module map has the wrong shape"));
            }
            f
        }
        None => {
            if !mq.same_shape(mp) {
                return Err(Error::pre("incompatible module action"));
            }
            &id
        }
    };
    for (x, &y) in hom.iter().enumerate() {
        let aq = mq.act(y).cloned().unwrap_or_else(|| identity(rq));
        let ap = mp.act(x as u32).cloned().unwrap_or_else(|| identity(rp));
        if mp.reduce(&ring, &mat_mul(&ring, phi, &aq)) != mp.reduce(&ring, &mat_mul(&ring, &ap, phi)) {
            return Err(Error::pre("incompatible module action"));
        }
    }
    let n = hp.degree;
    let ep = hp.group_order - 1;
    let eq = hq.group_order - 1;
    let tuples = ep.pow(n);
    let mut cols = Vec::with_capacity(hq.dimension());
    let mut t = vec![0u32; n as usize];
    for rep in hq.reps() {
        let mut out = vec![0u64; tuples * rp];
        for idx in 0..tuples {
            let mut x = idx;
            for slot in t.iter_mut().rev() {
                *slot = (x % ep) as u32 + 1;
                x /= ep;
            }
            if t.iter().any(|&g| hom[g as usize] == 0) {
                continue;
            }
            let qi = t.iter().fold(0, |acc, &g| acc * eq + (hom[g as usize] as usize - 1));
            let w = mat_vec(&ring, phi, &rep[qi * rq..(qi + 1) * rq]);
            out[idx * rp..(idx + 1) * rp].copy_from_slice(&w);
        }
        cols.push(hp.coords(&out));
    }
    Ok((0..hp.dimension()).map(|i| cols.iter().map(|c| c[i]).collect()).collect())
}

#[derive(Clone, Debug, Serialize)]
pub struct Restriction {
    pub degree: u32,
    pub source: Vec<u64>,
    pub target: Vec<u64>,
    /// Target coordinates × source coordinates.
    pub matrix: Mat,
}

/// `f^* : H^n(Q; M) → H^n(P; f^*M)` for a homomorphism `f: P → Q` given on indices.
pub fn restriction(p: &FinGroup, q: &FinGroup, hom: &[u32], m: &CoefficientModule, n: u32) -> Result<Restriction> {
    check_hom(p, q, hom)?;
    let hq = bar_cohomology(q, m, n)?;
    let hp = bar_cohomology(p, &m.pullback(hom), n)?;
    let matrix = induced_map(&hq, &hp, hom, None)?;
    Ok(Restriction { degree: n, source: hq.invariants(), target: hp.invariants(), matrix })
}

/// Rank over a field.
pub fn rank(ring: Ring, m: &Mat) -> usize {
    let cols = m.first().map_or(0, |r| r.len());
    let rows = m.iter().map(|r| r.iter().enumerate().filter(|(_, &x)| x != 0).map(|(i, &x)| (i, x)).collect());
    cols - Kernel::of_rows(ring, cols, rows).len()
}

// ---------------------------------------------------------------- subgroups of S

fn sub_group(lat: &Lattice, p: SubId) -> FinGroup {
    lat.group().subgroup_group(lat.elems(p))
}

fn local(lat: &Lattice, p: SubId, x: u32) -> u32 {
    lat.elems(p).binary_search(&x).expect("element of the subgroup") as u32
}

/// Conditions `(P', φ: P' → S)` for the stable-element and E₂ functors.
fn conditions(f: &FusionSystem) -> Vec<Morph> {
    let lat = &**f.lattice();
    let g = lat.group();
    let s = f.s();
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for gen in f.generators() {
        for p in lat.subgroups_of(gen.dom) {
            if p == lat.trivial() {
                continue;
            }
            let phi = gen.restrict(lat, p).with_cod(s);
            if !seen.insert((p, phi.map.clone())) {
                continue;
            }
            let pg = lat.gens(p);
            let inner = lat.elems(s).iter().any(|&x| pg.iter().all(|&y| g.conj(x, y) == phi.apply(lat, y)));
            if !inner {
                out.push(phi);
            }
        }
    }
    out
}

fn ensure_trivial(m: &CoefficientModule) -> Result<()> {
    if !m.is_trivial() {
        return Err(Error::pre("stable elements need a trivial action"));
    }
    Ok(())
}

#[derive(Clone, Debug, Serialize)]
pub struct StableElements {
    pub degree: u32,
    pub coefficients: String,
    /// `H^n(S; M)`.
    pub ambient: Vec<u64>,
    pub invariants: Vec<u64>,
    pub dimension: usize,
    pub conditions: usize,
    pub fingerprints: Vec<String>,
}

pub struct Stable {
    pub report: StableElements,
    pub ambient: Cohomology,
    /// The stable submodule in coordinates of `H^n(S; M)`.
    pub sub: Subquotient,
}

impl Stable {
    /// Whether a class of `H^n(S; M)` (coordinates) is stable.
    pub fn contains(&self, f: &FusionSystem, x: &[u64]) -> Result<bool> {
        let rows = stable_rows(f, &self.ambient, &Caps::default())?;
        let ring = self.ambient.ring;
        Ok(rows.iter().all(|(r, e)| ring.reduce_to(r.iter().zip(x).fold(0, |acc, (&a, &b)| ring.add(acc, ring.mul(a, b))), *e) == 0))
    }
}

fn stable_rows(f: &FusionSystem, hs: &Cohomology, caps: &Caps) -> Result<Vec<(Vec<u64>, u32)>> {
    let lat = &**f.lattice();
    let s = f.s();
    let ring = hs.ring;
    let mut cache: HashMap<SubId, (FinGroup, Cohomology)> = HashMap::new();
    let mut rows = Vec::new();
    for phi in conditions(f) {
        let p = phi.dom;
        if let std::collections::hash_map::Entry::Vacant(v) = cache.entry(p) {
            let g = sub_group(lat, p);
            let h = bar_cohomology_with(&g, &hs.module, hs.degree, caps)?;
            v.insert((g, h));
        }
        let (_, hp) = &cache[&p];
        let incl: Vec<u32> = lat.elems(p).iter().map(|&x| local(lat, s, x)).collect();
        let via: Vec<u32> = phi.map.iter().map(|&x| local(lat, s, x)).collect();
        let a = induced_map(hs, hp, &incl, None)?;
        let b = induced_map(hs, hp, &via, None)?;
        for (i, (ra, rb)) in a.iter().zip(&b).enumerate() {
            let d: Vec<u64> = ra.iter().zip(rb).map(|(&x, &y)| ring.sub(x, y)).collect();
            if d.iter().any(|&x| x != 0) {
                rows.push((d, hp.exps()[i]));
            }
        }
    }
    Ok(rows)
}

/// `H^n(F; M) ⊆ H^n(S; M)` for a trivial module `M`.
pub fn stable_elements(f: &FusionSystem, m: &CoefficientModule, n: u32) -> Result<Stable> {
    stable_elements_with(f, m, n, &Caps::default())
}

pub fn stable_elements_with(f: &FusionSystem, m: &CoefficientModule, n: u32, caps: &Caps) -> Result<Stable> {
    ensure_trivial(m)?;
    let lat = &**f.lattice();
    let hs = bar_cohomology_with(&sub_group(lat, f.s()), m, n, caps)?;
    let rows = stable_rows(f, &hs, caps)?;
    let sub = Subquotient::kernel_of_map(hs.ring, hs.exps(), &rows);
    let fingerprints = sub.reps.iter().map(|c| fingerprint(n, &hs.cocycle(c))).collect();
    let report = StableElements {
        degree: n,
        coefficients: m.label(),
        ambient: hs.invariants(),
        invariants: sub.invariants(),
        dimension: sub.len(),
        conditions: rows.len(),
        fingerprints,
    };
    Ok(Stable { report, ambient: hs, sub })
}

// ---------------------------------------------------------------- stage limits

/// One stage of an approximation: a fusion system over `S_i` and the embedding of `S_i`
/// (its local indices) into a common ambient group.
#[derive(Clone, Copy)]
pub struct StageView<'a> {
    pub fusion: &'a FusionSystem,
    pub emb: &'a [u32],
}

#[derive(Clone, Debug, Serialize)]
pub struct StageStable {
    pub index: usize,
    pub order: usize,
    pub invariants: Vec<u64>,
    pub dimension: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct StableLimit {
    pub degree: u32,
    pub coefficients: String,
    pub stages: Vec<StageStable>,
    /// Whether restriction `S_i ≤ S_{i+1}` carries stable classes to stable classes.
    pub compatible: Vec<bool>,
    /// Order of the image of `lim → H^n(F_i)` per stage.
    pub image_orders: Vec<u64>,
    pub limit: Vec<u64>,
    /// Stable elements of the truncation-level system, when given.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub truncation: Option<Vec<u64>>,
    /// Whether restriction to the last stage is an isomorphism onto the limit.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub agrees: Option<bool>,
    pub pass: bool,
}

fn compose_mod(ring: Ring, a: &Mat, b: &Mat, exps: &[u32]) -> Mat {
    mat_mul(&ring, a, b).into_iter().zip(exps).map(|(row, &e)| row.into_iter().map(|x| ring.reduce_to(x, e)).collect()).collect()
}

/// Map of stable submodules induced by a matrix between ambient coordinates.
fn stable_map(ring: Ring, from: &Stable, to: &Stable, m: &Mat) -> Result<(Mat, bool)> {
    let mut cols = Vec::new();
    let mut ok = true;
    let to_exps = to.ambient.exps();
    for rep in &from.sub.reps {
        let img: Vec<u64> = mat_vec(&ring, m, rep).into_iter().zip(to_exps).map(|(x, &e)| ring.reduce_to(x, e)).collect();
        let stable = to.sub_contains(&img);
        ok &= stable;
        cols.push(if stable { to.sub.coords(&img) } else { vec![0; to.sub.len()] });
    }
    Ok(((0..to.sub.len()).map(|i| cols.iter().map(|c| c[i]).collect()).collect(), ok))
}

impl Stable {
    fn sub_contains(&self, x: &[u64]) -> bool {
        let ring = self.ambient.ring;
        let c = self.sub.coords(x);
        let back = self.sub.reps.iter().zip(&c).fold(vec![0u64; x.len()], |mut acc, (rep, &k)| {
            for (a, &r) in acc.iter_mut().zip(rep) {
                *a = ring.add(*a, ring.mul(k, r));
            }
            acc
        });
        back.iter().zip(x).zip(self.ambient.exps()).all(|((&a, &b), &e)| ring.reduce_to(ring.sub(a, b), e) == 0)
    }
}

fn image_order(ring: Ring, m: &Mat, src: &[u32], dst: &[u32]) -> u64 {
    let src_order: u64 = src.iter().map(|&e| ring.p().pow(e)).product();
    let rows: Vec<(Vec<u64>, u32)> = m.iter().cloned().zip(dst.iter().copied()).collect();
    let ker = Subquotient::kernel_of_map(ring, src, &rows);
    src_order / ker.invariants().iter().product::<u64>()
}

/// Stable elements per stage, the inverse limit along restrictions, and the comparison with a
/// truncation-level system; `truncation.1` maps the local indices of the last stage into its group.
pub fn stable_elements_limit(
    stages: &[StageView],
    m: &CoefficientModule,
    n: u32,
    truncation: Option<(&FusionSystem, &[u32])>,
) -> Result<StableLimit> {
    if stages.is_empty() {
        return Err(Error::pre("no stages"));
    }
    let ring = m.ring()?;
    let st: Vec<Stable> = stages.iter().map(|s| stable_elements(s.fusion, m, n)).collect::<Result<_>>()?;
    let mut compatible = Vec::new();
    let mut maps: Vec<Mat> = Vec::new();
    for i in 0..stages.len() - 1 {
        let (a, b) = (&stages[i], &stages[i + 1]);
        let pos: HashMap<u32, u32> = b.emb.iter().enumerate().map(|(j, &x)| (x, j as u32)).collect();
        let hom: Vec<u32> = a.emb.iter().map(|x| pos.get(x).copied().ok_or_else(|| Error::pre("stages are not nested"))).collect::<Result<_>>()?;
        let res = induced_map(&st[i + 1].ambient, &st[i].ambient, &hom, None)?;
        let (sm, ok) = stable_map(ring, &st[i + 1], &st[i], &res)?;
        compatible.push(ok);
        maps.push(sm);
    }
    let k = stages.len() - 1;
    let mut image_orders = vec![0u64; stages.len()];
    let mut acc: Mat = identity(st[k].sub.len());
    image_orders[k] = st[k].sub.invariants().iter().product();
    for i in (0..k).rev() {
        acc = compose_mod(ring, &maps[i], &acc, &st[i].sub.exps);
        image_orders[i] = image_order(ring, &acc, &st[k].sub.exps, &st[i].sub.exps);
    }
    let limit = st[k].sub.invariants();
    let (trunc, agrees) = match truncation {
        Some((tf, emb)) => {
            let t = stable_elements(tf, m, n)?;
            let tlat = tf.lattice();
            if emb.len() != stages[k].emb.len() {
                return Err(Error::pre("truncation embedding has the wrong length"));
            }
            let hom: Vec<u32> = emb.iter().map(|&x| local(tlat, tf.s(), x)).collect();
            let res = induced_map(&t.ambient, &st[k].ambient, &hom, None)?;
            let (sm, ok) = stable_map(ring, &t, &st[k], &res)?;
            let t_order: u64 = t.sub.invariants().iter().product();
            let l_order: u64 = limit.iter().product();
            let img = image_order(ring, &sm, &t.sub.exps, &st[k].sub.exps);
            (Some(t.sub.invariants()), Some(ok && t_order == l_order && img == l_order))
        }
        None => (None, None),
    };
    let pass = compatible.iter().all(|&b| b) && agrees != Some(false);
    Ok(StableLimit {
        degree: n,
        coefficients: m.label(),
        stages: st
            .iter()
            .enumerate()
            .map(|(i, s)| StageStable {
                index: i,
                order: stages[i].fusion.group().size(),
                invariants: s.sub.invariants(),
                dimension: s.sub.len(),
            })
            .collect(),
        compatible,
        image_orders,
        limit,
        truncation: trunc,
        agrees,
        pass,
    })
}

// ---------------------------------------------------------------- E₂ page

/// `X(P) = H^n(P/(P∩R); H^m(P∩R; M))` with the data needed to map into it.
pub struct E2Value {
    pub subgroup: SubId,
    pub meet: SubId,
    inner: Cohomology,
    proj: Vec<u32>,
    reps: Vec<u32>,
    pub value: Cohomology,
}

/// The functor `P ↦ X^{n,m}(P)` on subgroups of `S` for a strongly closed `R`.
pub struct E2Functor<'a> {
    fusion: &'a FusionSystem,
    r: SubId,
    module: CoefficientModule,
    n: u32,
    m: u32,
    caps: Caps,
    cache: HashMap<SubId, Arc<E2Value>>,
}

#[derive(Clone, Debug, Serialize)]
pub struct E2Term {
    pub n: u32,
    pub m: u32,
    pub coefficients: String,
    pub r_order: usize,
    pub quotient_order: usize,
    /// `H^m(R; M)`.
    pub inner: Vec<u64>,
    /// `H^n(S/R; H^m(R; M))`.
    pub unstable: Vec<u64>,
    pub invariants: Vec<u64>,
    pub dimension: usize,
    pub conditions: usize,
    pub fingerprints: Vec<String>,
}

impl<'a> E2Functor<'a> {
    pub fn new(fusion: &'a FusionSystem, r: SubId, module: &CoefficientModule, n: u32, m: u32) -> Result<Self> {
        Self::with_caps(fusion, r, module, n, m, Caps::default())
    }

    pub fn with_caps(fusion: &'a FusionSystem, r: SubId, module: &CoefficientModule, n: u32, m: u32, caps: Caps) -> Result<Self> {
        ensure_trivial(module)?;
        if n + m > caps.max_degree {
            return Err(Error::cap("E₂ page (total degree)", caps.max_degree as usize));
        }
        if !fusion.lattice().is_sub(r, fusion.s()) {
            return Err(Error::pre("R is not a subgroup of S"));
        }
        if !fusion.is_strongly_closed(r)? {
            return Err(Error::pre("R is not strongly closed"));
        }
        Ok(E2Functor { fusion, r, module: module.clone(), n, m, caps, cache: HashMap::new() })
    }

    pub fn value(&mut self, p: SubId) -> Result<Arc<E2Value>> {
        if let Some(v) = self.cache.get(&p) {
            return Ok(v.clone());
        }
        let lat = &**self.fusion.lattice();
        let ring = self.module.ring()?;
        let pg = sub_group(lat, p);
        let meet = lat.meet(p, self.r);
        let rg = sub_group(lat, meet);
        let inner = bar_cohomology_with(&rg, &self.module, self.m, &self.caps)?;
        let meet_local: Vec<u32> = lat.elems(meet).iter().map(|&x| local(lat, p, x)).collect();
        let (qg, proj) = pg.quotient(&meet_local)?;
        let mut reps = vec![u32::MAX; qg.size()];
        for (x, &c) in proj.iter().enumerate() {
            if reps[c as usize] == u32::MAX {
                reps[c as usize] = x as u32;
            }
        }
        let g = lat.group();
        let mut per = Vec::with_capacity(qg.size());
        for &x in &reps {
            let s = lat.elems(p)[x as usize];
            let si = g.inv(s);
            let hom: Vec<u32> = lat.elems(meet).iter().map(|&y| local(lat, meet, g.mul(g.mul(si, y), s))).collect();
            per.push(induced_map(&inner, &inner, &hom, None)?);
        }
        let nm = CoefficientModule { p: ring.p(), exps: inner.exps().to_vec(), action: None, top: ring.k() }.with_element_action(&qg, per)?;
        let value = bar_cohomology_with(&qg, &nm, self.n, &self.caps)?;
        let v = Arc::new(E2Value { subgroup: p, meet, inner, proj, reps, value });
        self.cache.insert(p, v.clone());
        Ok(v)
    }

    /// `γ(f) = f̄^* ∘ f₀^* : X(Q) → X(P)` for `f: P → Q` in `F`.
    pub fn gamma(&mut self, f: &Morph) -> Result<Mat> {
        let lat = self.fusion.lattice().clone();
        let xp = self.value(f.dom)?;
        let xq = self.value(f.cod)?;
        let f0: Vec<u32> = lat
            .elems(xp.meet)
            .iter()
            .map(|&y| {
                let z = f.apply(&lat, y);
                lat.elems(xq.meet).binary_search(&z).map(|i| i as u32).map_err(|_| Error::pre("morphism does not preserve R"))
            })
            .collect::<Result<_>>()?;
        let phi = induced_map(&xq.inner, &xp.inner, &f0, None)?;
        let fbar: Vec<u32> = xp
            .reps
            .iter()
            .map(|&x| {
                let z = f.apply(&lat, lat.elems(f.dom)[x as usize]);
                xq.proj[local(&lat, f.cod, z) as usize]
            })
            .collect();
        induced_map(&xq.value, &xp.value, &fbar, Some(&phi))
    }

    /// `E₂^{n,m} = X(S)^F`.
    pub fn stable(&mut self) -> Result<E2Term> {
        let lat = self.fusion.lattice().clone();
        let s = self.fusion.s();
        let xs = self.value(s)?;
        let ring = xs.value.ring();
        let mut rows = Vec::new();
        for phi in conditions(self.fusion) {
            let p = phi.dom;
            let a = self.gamma(&Morph::inclusion(&lat, p, s))?;
            let b = self.gamma(&phi)?;
            let xp = self.value(p)?;
            for (i, (ra, rb)) in a.iter().zip(&b).enumerate() {
                let d: Vec<u64> = ra.iter().zip(rb).map(|(&x, &y)| ring.sub(x, y)).collect();
                if d.iter().any(|&x| x != 0) {
                    rows.push((d, xp.value.exps()[i]));
                }
            }
        }
        let sub = Subquotient::kernel_of_map(ring, xs.value.exps(), &rows);
        Ok(E2Term {
            n: self.n,
            m: self.m,
            coefficients: self.module.label(),
            r_order: lat.size(self.r),
            quotient_order: lat.size(s) / lat.size(self.r),
            inner: xs.inner.invariants(),
            unstable: xs.value.invariants(),
            invariants: sub.invariants(),
            dimension: sub.len(),
            conditions: rows.len(),
            fingerprints: sub.reps.iter().map(|c| fingerprint(self.n, &xs.value.cocycle(c))).collect(),
        })
    }
}

pub fn e2_page(f: &FusionSystem, r: SubId, m: &CoefficientModule, n: u32, mm: u32) -> Result<E2Term> {
    E2Functor::new(f, r, m, n, mm)?.stable()
}

/// Strongly closed subgroups of `S`, smallest first.
pub fn strongly_closed(f: &FusionSystem) -> Result<Vec<SubId>> {
    let lat = f.lattice();
    let mut out = Vec::new();
    for p in 0..lat.len() {
        if lat.is_normal_in(p, f.s()) && f.is_strongly_closed(p)? {
            out.push(p);
        }
    }
    out.sort_by_key(|&p| (lat.size(p), p));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f2() -> CoefficientModule {
        CoefficientModule::parse("Z/2").unwrap()
    }

    fn dims(g: &FinGroup, m: &CoefficientModule, top: u32) -> Vec<Vec<u64>> {
        (0..=top).map(|n| bar_cohomology(g, m, n).unwrap().invariants()).collect()
    }

    #[test]
    fn parses_modules() {
        assert_eq!(CoefficientModule::parse("Z/4+Z/2").unwrap().exps(), &[2, 1]);
        assert_eq!(CoefficientModule::parse("(Z/3)^2").unwrap().order(), 9);
        assert!(CoefficientModule::parse("Z/6").is_err());
        assert!(CoefficientModule::parse("Z/2+Z/3").is_err());
        assert_eq!(CoefficientModule::parse("0/2").unwrap().rank(), 0);
    }

    #[test]
    fn dihedral_mod_two() {
        let d8 = FinGroup::dihedral(4);
        let h = dims(&d8, &f2(), 2);
        assert_eq!(h, vec![vec![2], vec![2, 2], vec![2, 2, 2]]);
        let homs = (0u32..256)
            .filter(|bits| {
                let f = |x: u32| bits >> x & 1;
                (0..8).all(|a| (0..8).all(|b| f(d8.mul(a, b)) == f(a) ^ f(b)))
            })
            .count();
        assert_eq!(1 << h[1].len(), homs);
    }

    #[test]
    fn cyclic_integral_coefficients() {
        let c2 = FinGroup::cyclic(2);
        let z4 = CoefficientModule::parse("Z/4").unwrap();
        assert_eq!(dims(&c2, &z4, 3), vec![vec![4], vec![2], vec![2], vec![2]]);
        let c4 = FinGroup::cyclic(4);
        assert_eq!(dims(&c4, &z4, 2), vec![vec![4], vec![4], vec![4]]);
        let mixed = CoefficientModule::parse("Z/4+Z/2").unwrap();
        assert_eq!(bar_cohomology(&c2, &mixed, 1).unwrap().order(), 4);
    }

    #[test]
    fn sign_action() {
        let c2 = FinGroup::cyclic(2);
        let m = CoefficientModule::parse("Z/4").unwrap().with_action(&c2, &[1], &[vec![vec![3]]]).unwrap();
        assert!(!m.is_trivial());
        assert_eq!(bar_cohomology(&c2, &m, 0).unwrap().invariants(), vec![2]);
        assert_eq!(bar_cohomology(&c2, &m, 1).unwrap().invariants(), vec![2]);
        assert!(CoefficientModule::parse("Z/4").unwrap().with_action(&c2, &[1], &[vec![vec![2]]]).is_err());
    }

    #[test]
    fn caps_are_enforced() {
        let big = FinGroup::cyclic(128);
        assert!(matches!(bar_cohomology(&big, &f2(), 1), Err(Error::Cap { .. })));
        assert!(matches!(bar_cohomology(&FinGroup::cyclic(2), &f2(), 4), Err(Error::Cap { .. })));
    }

    #[test]
    fn restriction_identity_and_inner() {
        let d8 = FinGroup::dihedral(4);
        let id: Vec<u32> = (0..8).collect();
        let r = restriction(&d8, &d8, &id, &f2(), 2).unwrap();
        for (i, row) in r.matrix.iter().enumerate() {
            for (j, &x) in row.iter().enumerate() {
                assert_eq!(x, u64::from(i == j));
            }
        }
        for g in 0..8 {
            let c: Vec<u32> = (0..8).map(|x| d8.conj(g, x)).collect();
            let r = restriction(&d8, &d8, &c, &f2(), 2).unwrap();
            for (i, row) in r.matrix.iter().enumerate() {
                for (j, &x) in row.iter().enumerate() {
                    assert_eq!(x, u64::from(i == j), "conjugation by {g}");
                }
            }
        }
    }

    #[test]
    fn restriction_to_klein_four() {
        let d8 = FinGroup::dihedral(4);
        let lat = Lattice::new(Arc::new(d8.clone()), 2).unwrap();
        let v = (0..lat.len()).find(|&i| lat.size(i) == 4 && !d8.subgroup_group(lat.elems(i)).all().iter().any(|&x| d8.subgroup_group(lat.elems(i)).element_order(x) == 4)).unwrap();
        let vg = d8.subgroup_group(lat.elems(v));
        let r = restriction(&vg, &d8, lat.elems(v), &f2(), 1).unwrap();
        let mut restricted = HashSet::new();
        for bits in 0u32..256 {
            let f = |x: u32| bits >> x & 1;
            if (0..8).all(|a| (0..8).all(|b| f(d8.mul(a, b)) == f(a) ^ f(b))) {
                restricted.insert(lat.elems(v).iter().map(|&x| f(x)).collect::<Vec<_>>());
            }
        }
        assert_eq!(1 << rank(Ring::new(2, 1).unwrap(), &r.matrix), restricted.len());
        assert_eq!(restricted.len(), 2);
    }

    #[test]
    fn stable_elements_of_s4() {
        let s4 = FinGroup::symmetric(4);
        let (f, _) = FusionSystem::from_group(&s4, 2).unwrap();
        for n in 0..=2 {
            let st = stable_elements(&f, &f2(), n).unwrap();
            let full = bar_cohomology(&s4, &f2(), n).unwrap();
            assert_eq!(st.report.dimension, full.dimension(), "degree {n}");
        }
    }

    #[test]
    fn inner_fusion_is_unconstrained() {
        let d8 = Arc::new(FinGroup::dihedral(4));
        let f = FusionSystem::inner(Arc::new(Lattice::new(d8.clone(), 2).unwrap()));
        for n in 0..=2 {
            let st = stable_elements(&f, &f2(), n).unwrap();
            assert_eq!(st.report.invariants, st.report.ambient);
        }
        let s4 = FinGroup::symmetric(4);
        let (g, _) = FusionSystem::from_group(&s4, 2).unwrap();
        let inner = FusionSystem::inner(g.lattice().clone());
        for n in 0..=2 {
            assert!(stable_elements(&g, &f2(), n).unwrap().report.dimension <= stable_elements(&inner, &f2(), n).unwrap().report.dimension);
        }
    }

    #[test]
    fn e2_with_r_equal_to_s() {
        let s4 = FinGroup::symmetric(4);
        let (f, _) = FusionSystem::from_group(&s4, 2).unwrap();
        let s = f.s();
        for m in 0..=2 {
            let t = e2_page(&f, s, &f2(), 0, m).unwrap();
            assert_eq!(t.dimension, stable_elements(&f, &f2(), m).unwrap().report.dimension);
        }
        assert_eq!(e2_page(&f, s, &f2(), 1, 0).unwrap().dimension, 0);
        let zero = CoefficientModule::parse("0/2").unwrap();
        assert_eq!(e2_page(&f, s, &zero, 1, 1).unwrap().dimension, 0);
    }

    #[test]
    fn e2_edge_inequalities_for_s4() {
        let s4 = FinGroup::symmetric(4);
        let (f, _) = FusionSystem::from_group(&s4, 2).unwrap();
        let closed = strongly_closed(&f).unwrap();
        let lat = f.lattice();
        let r = *closed.iter().find(|&&r| lat.size(r) == 4).unwrap();
        let e = |n, m| e2_page(&f, r, &f2(), n, m).unwrap().dimension;
        let h1 = stable_elements(&f, &f2(), 1).unwrap().report.dimension;
        assert_eq!(e(0, 0), 1);
        assert!(e(1, 0) <= h1 && h1 <= e(1, 0) + e(0, 1));
        let not_closed = (0..lat.len()).find(|&p| lat.size(p) == 2 && !closed.contains(&p)).unwrap();
        assert!(e2_page(&f, not_closed, &f2(), 0, 0).is_err());
    }

    #[test]
    fn gamma_respects_composition() {
        let s4 = FinGroup::symmetric(4);
        let (f, _) = FusionSystem::from_group(&s4, 2).unwrap();
        let lat = f.lattice().clone();
        let r = *strongly_closed(&f).unwrap().iter().find(|&&r| lat.size(r) == 4).unwrap();
        let mut x = E2Functor::new(&f, r, &f2(), 1, 1).unwrap();
        let ring = Ring::new(2, 1).unwrap();
        let s = f.s();
        for g in f.generators() {
            let gs = g.clone().with_cod(s);
            for p in lat.subgroups_of(g.dom) {
                let incl = Morph::inclusion(&lat, p, g.dom);
                let comp = incl.then(&lat, &gs);
                let lhs = x.gamma(&comp).unwrap();
                let a = x.gamma(&incl).unwrap();
                let b = x.gamma(&g.clone().with_cod(s)).unwrap();
                assert_eq!(lhs, mat_mul(&ring, &a, &b));
            }
        }
    }
}
