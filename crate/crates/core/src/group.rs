//! Finite groups by multiplication table, and subgroup lattices of finite p-groups.

use std::collections::{HashMap, VecDeque};
use std::sync::{Arc, OnceLock};

use fixedbitset::FixedBitSet;
use serde::Serialize;

use crate::error::{Error, Result};

/// Finite group on `0..n`, identity `0`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FinGroup {
    n: usize,
    table: Vec<u32>,
    inv: Vec<u32>,
    ord: Vec<u32>,
}

impl FinGroup {
    /// Latin-square table with identity 0; associativity is the caller's responsibility.
    pub fn from_flat_table(n: usize, table: Vec<u32>) -> Result<Self> {
        if table.len() != n * n || n == 0 {
            return Err(Error::spec("table size mismatch"));
        }
        for i in 0..n {
            if table[i] != i as u32 || table[i * n] != i as u32 {
                return Err(Error::spec("index 0 is not the identity"));
            }
        }
        let mut inv = vec![u32::MAX; n];
        for a in 0..n {
            for b in 0..n {
                if table[a * n + b] == 0 {
                    inv[a] = b as u32;
                    break;
                }
            }
            if inv[a] == u32::MAX {
                return Err(Error::spec("element without inverse"));
            }
        }
        let mut g = FinGroup { n, table, inv, ord: vec![0; n] };
        for a in 0..n as u32 {
            let mut x = a;
            let mut k = 1;
            while x != 0 {
                x = g.mul(x, a);
                k += 1;
                if k > n as u32 + 1 {
                    return Err(Error::spec("table is not a group"));
                }
            }
            g.ord[a as usize] = k;
        }
        g.ord[0] = 1;
        Ok(g)
    }

    /// Row-major table, fully validated including associativity.
    pub fn from_table(rows: &[Vec<u32>]) -> Result<Self> {
        crate::ptoral::validate_table(rows)?;
        Self::from_flat_table(rows.len(), rows.concat())
    }

    /// Closure of permutations of `0..d`, elements sorted lexicographically; `(ab)(i) = a(b(i))`.
    pub fn from_perms(gens: &[Vec<u32>]) -> Result<(Self, Vec<Vec<u32>>)> {
        let d = gens.first().map_or(0, |g| g.len());
        let id: Vec<u32> = (0..d as u32).collect();
        let mut seen: HashMap<Vec<u32>, ()> = HashMap::from([(id.clone(), ())]);
        let mut queue = VecDeque::from([id]);
        while let Some(x) = queue.pop_front() {
            for g in gens {
                if g.len() != d {
                    return Err(Error::spec("permutations of different degrees"));
                }
                let y: Vec<u32> = (0..d).map(|i| x[g[i] as usize]).collect();
                if seen.insert(y.clone(), ()).is_none() {
                    if seen.len() > 1 << 16 {
                        return Err(Error::cap("permutation group closure", 1 << 16));
                    }
                    queue.push_back(y);
                }
            }
        }
        let mut perms: Vec<Vec<u32>> = seen.into_keys().collect();
        perms.sort();
        let pos: HashMap<&Vec<u32>, u32> = perms.iter().enumerate().map(|(i, p)| (p, i as u32)).collect();
        let n = perms.len();
        let mut table = vec![0u32; n * n];
        for (i, a) in perms.iter().enumerate() {
            for (j, b) in perms.iter().enumerate() {
                let c: Vec<u32> = (0..d).map(|k| a[b[k] as usize]).collect();
                table[i * n + j] = pos[&c];
            }
        }
        let g = Self::from_flat_table(n, table)?;
        Ok((g, perms))
    }

    pub fn cyclic(n: usize) -> Self {
        let table = (0..n).flat_map(|a| (0..n).map(move |b| ((a + b) % n) as u32)).collect();
        Self::from_flat_table(n, table).expect("cyclic table")
    }

    /// Dihedral group of order `2m` as permutations of the `m`-gon.
    pub fn dihedral(m: usize) -> Self {
        if m <= 2 {
            return if m == 1 { Self::cyclic(2) } else { Self::direct_product(&Self::cyclic(2), &Self::cyclic(2)) };
        }
        let rot: Vec<u32> = (0..m).map(|i| ((i + 1) % m) as u32).collect();
        let refl: Vec<u32> = (0..m).map(|i| ((m - i) % m) as u32).collect();
        Self::from_perms(&[rot, refl]).expect("dihedral").0
    }

    pub fn symmetric(d: usize) -> Self {
        let mut cyc: Vec<u32> = (1..d as u32).collect();
        cyc.push(0);
        let mut sw: Vec<u32> = (0..d as u32).collect();
        sw.swap(0, 1);
        Self::from_perms(&[cyc, sw]).expect("symmetric").0
    }

    pub fn alternating(d: usize) -> Self {
        let gens: Vec<Vec<u32>> = (2..d)
            .map(|k| {
                let mut p: Vec<u32> = (0..d as u32).collect();
                p[0] = 1;
                p[1] = k as u32;
                p[k] = 0;
                p
            })
            .collect();
        Self::from_perms(&gens).expect("alternating").0
    }

    /// Pairs `(a, b)` encoded as `a·|B| + b`.
    pub fn direct_product(a: &FinGroup, b: &FinGroup) -> Self {
        let (na, nb) = (a.n, b.n);
        let n = na * nb;
        let mut table = vec![0u32; n * n];
        for x in 0..n {
            for y in 0..n {
                let (xa, xb) = (x / nb, x % nb);
                let (ya, yb) = (y / nb, y % nb);
                table[x * n + y] = a.mul(xa as u32, ya as u32) * nb as u32 + b.mul(xb as u32, yb as u32);
            }
        }
        Self::from_flat_table(n, table).expect("product table")
    }

    #[inline]
    pub fn mul(&self, a: u32, b: u32) -> u32 {
        self.table[a as usize * self.n + b as usize]
    }
    #[inline]
    pub fn inv(&self, a: u32) -> u32 {
        self.inv[a as usize]
    }
    #[inline]
    pub fn conj(&self, g: u32, x: u32) -> u32 {
        self.mul(self.mul(g, x), self.inv(g))
    }
    pub fn size(&self) -> usize {
        self.n
    }
    pub fn element_order(&self, a: u32) -> u32 {
        self.ord[a as usize]
    }
    pub fn pow(&self, a: u32, e: u64) -> u32 {
        let mut x = 0;
        for _ in 0..(e % self.ord[a as usize] as u64) {
            x = self.mul(x, a);
        }
        x
    }
    pub fn all(&self) -> Vec<u32> {
        (0..self.n as u32).collect()
    }
    pub fn table_rows(&self) -> Vec<Vec<u32>> {
        self.table.chunks(self.n).map(|r| r.to_vec()).collect()
    }

    pub fn is_p_group(&self, p: u64) -> bool {
        let mut m = self.n as u64;
        while m % p == 0 {
            m /= p;
        }
        m == 1
    }

    pub fn is_abelian(&self) -> bool {
        (0..self.n as u32).all(|a| (0..self.n as u32).all(|b| self.mul(a, b) == self.mul(b, a)))
    }

    pub fn exponent(&self) -> u64 {
        self.ord.iter().fold(1u64, |acc, &o| lcm(acc, o as u64))
    }

    /// Subgroup generated by `gens`, sorted.
    pub fn generate(&self, gens: &[u32]) -> Vec<u32> {
        let mut seen = FixedBitSet::with_capacity(self.n);
        seen.insert(0);
        let mut queue = VecDeque::from([0u32]);
        while let Some(x) = queue.pop_front() {
            for &g in gens {
                let y = self.mul(x, g);
                if !seen.contains(y as usize) {
                    seen.insert(y as usize);
                    queue.push_back(y);
                }
            }
        }
        seen.ones().map(|i| i as u32).collect()
    }

    pub fn bits(&self, elems: &[u32]) -> FixedBitSet {
        let mut b = FixedBitSet::with_capacity(self.n);
        for &x in elems {
            b.insert(x as usize);
        }
        b
    }

    pub fn centralizer(&self, set: &[u32]) -> Vec<u32> {
        (0..self.n as u32).filter(|&g| set.iter().all(|&x| self.mul(g, x) == self.mul(x, g))).collect()
    }

    /// `{g : g·A·g⁻¹ ⊆ B}` where `A` is given by generators.
    pub fn transporter(&self, a_gens: &[u32], b: &FixedBitSet) -> Vec<u32> {
        (0..self.n as u32).filter(|&g| a_gens.iter().all(|&x| b.contains(self.conj(g, x) as usize))).collect()
    }

    pub fn normalizer(&self, elems: &[u32]) -> Vec<u32> {
        let b = self.bits(elems);
        self.transporter(&small_gens(self, elems), &b)
    }

    pub fn is_normal(&self, elems: &[u32]) -> bool {
        self.normalizer(elems).len() == self.n
    }

    pub fn center(&self) -> Vec<u32> {
        self.centralizer(&self.all())
    }

    pub fn derived(&self) -> Vec<u32> {
        let mut comms = Vec::new();
        for a in 0..self.n as u32 {
            for b in 0..self.n as u32 {
                comms.push(self.mul(self.mul(a, b), self.mul(self.inv(a), self.inv(b))));
            }
        }
        comms.sort_unstable();
        comms.dedup();
        self.generate(&comms)
    }

    /// One Sylow p-subgroup, grown through normalizers.
    pub fn sylow(&self, p: u64) -> Vec<u32> {
        let mut target = 1usize;
        while (self.n / target) % p as usize == 0 {
            target *= p as usize;
        }
        let mut cur = vec![0u32];
        while cur.len() < target {
            let bits = self.bits(&cur);
            let norm = self.normalizer(&cur);
            let mut next = None;
            for &g in &norm {
                if bits.contains(g as usize) {
                    continue;
                }
                let mut k = 1u64;
                let mut x = g;
                while !bits.contains(x as usize) {
                    x = self.mul(x, g);
                    k += 1;
                }
                if k % p == 0 {
                    let h = self.pow(g, k / p);
                    let mut gens = small_gens(self, &cur);
                    gens.push(h);
                    next = Some(self.generate(&gens));
                    break;
                }
            }
            cur = next.expect("Sylow growth stalled");
        }
        cur
    }

    pub fn sylows(&self, p: u64) -> Vec<Vec<u32>> {
        let s = self.sylow(p);
        let mut out: Vec<Vec<u32>> = Vec::new();
        let mut seen = std::collections::HashSet::new();
        for g in 0..self.n as u32 {
            let mut c: Vec<u32> = s.iter().map(|&x| self.conj(g, x)).collect();
            c.sort_unstable();
            if seen.insert(c.clone()) {
                out.push(c);
            }
        }
        out.sort();
        out
    }

    /// Largest normal p-subgroup: the intersection of all Sylow p-subgroups.
    pub fn o_p(&self, p: u64) -> Vec<u32> {
        let syl = self.sylows(p);
        let mut acc = self.bits(&syl[0]);
        for s in &syl[1..] {
            acc.intersect_with(&self.bits(s));
        }
        acc.ones().map(|i| i as u32).collect()
    }

    /// Quotient by a normal subgroup. Cosets are ordered by their least element; returns the
    /// group and the projection.
    pub fn quotient(&self, normal: &[u32]) -> Result<(FinGroup, Vec<u32>)> {
        if !self.is_normal(normal) {
            return Err(Error::pre("quotient by a non-normal subgroup"));
        }
        let mut proj = vec![u32::MAX; self.n];
        let mut reps = Vec::new();
        for g in 0..self.n as u32 {
            if proj[g as usize] == u32::MAX {
                let c = reps.len() as u32;
                for &k in normal {
                    proj[self.mul(g, k) as usize] = c;
                }
                reps.push(g);
            }
        }
        let m = reps.len();
        let mut table = vec![0u32; m * m];
        for (i, &a) in reps.iter().enumerate() {
            for (j, &b) in reps.iter().enumerate() {
                table[i * m + j] = proj[self.mul(a, b) as usize];
            }
        }
        Ok((FinGroup::from_flat_table(m, table)?, proj))
    }

    /// A subgroup re-indexed as its own group; index `i` is `elems[i]`.
    pub fn subgroup_group(&self, elems: &[u32]) -> FinGroup {
        let pos: HashMap<u32, u32> = elems.iter().enumerate().map(|(i, &x)| (x, i as u32)).collect();
        let m = elems.len();
        let mut table = vec![0u32; m * m];
        for (i, &a) in elems.iter().enumerate() {
            for (j, &b) in elems.iter().enumerate() {
                table[i * m + j] = pos[&self.mul(a, b)];
            }
        }
        FinGroup::from_flat_table(m, table).expect("subgroup table")
    }

    /// Invariant factors of `G/[G,G]`, as prime powers sorted ascending.
    pub fn abelianization(&self) -> Vec<u64> {
        let d = self.derived();
        let (q, _) = self.quotient(&d).expect("derived subgroup is normal");
        abelian_invariants(&q)
    }

    /// `D_n` when the group is dihedral of order `n ≥ 8`.
    pub fn dihedral_name(&self) -> Option<String> {
        let n = self.n;
        if n < 8 || n % 2 == 1 {
            return None;
        }
        let a = (0..n as u32).find(|&x| self.ord[x as usize] as usize == n / 2)?;
        let rot = self.generate(&[a]);
        let outside_involutions = (0..n as u32).filter(|x| !rot.contains(x)).all(|x| self.ord[x as usize] == 2);
        outside_involutions.then(|| format!("D_{n}"))
    }

    /// Name from a small catalog, or a signature string.
    pub fn signature(&self) -> GroupSignature {
        let order = self.n as u64;
        let abelianization = self.abelianization();
        let exponent = self.exponent();
        let name = match (order, abelianization.as_slice(), exponent) {
            (1, _, _) => Some("1"),
            (2, _, _) => Some("C2"),
            (4, [2, 2], 2) => Some("C2^2"),
            (4, [4], 4) => Some("C4"),
            (6, [2], 6) => Some("S3"),
            (8, [2, 2], 4) => {
                let involutions = self.ord.iter().filter(|&&o| o == 2).count();
                Some(if involutions == 5 { "D8" } else { "Q8" })
            }
            (24, [2], 12) => Some("S4"),
            _ => None,
        };
        GroupSignature { order, abelianization, exponent, name: name.map(str::to_string) }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GroupSignature {
    pub order: u64,
    pub abelianization: Vec<u64>,
    pub exponent: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn lcm(a: u64, b: u64) -> u64 {
    a / gcd(a, b) * b
}

fn abelian_invariants(g: &FinGroup) -> Vec<u64> {
    let mut n = g.size() as u64;
    let mut out = Vec::new();
    let mut q = 2;
    while n > 1 {
        if n % q == 0 {
            while n % q == 0 {
                n /= q;
            }
            // |A[q^k]| = q^{Σ min(e_i, k)}
            let mut counts = Vec::new();
            let mut k = 1u32;
            loop {
                let qk = q.pow(k);
                let c = (0..g.size() as u32).filter(|&x| qk % g.element_order(x) as u64 == 0).count() as u64;
                let e = c.ilog(q);
                if counts.last() == Some(&e) {
                    break;
                }
                counts.push(e);
                k += 1;
            }
            // number of factors with exponent ≥ k is counts[k-1] − counts[k-2]
            let mut ge: Vec<u32> = Vec::new();
            for k in 0..counts.len() {
                let prev = if k == 0 { 0 } else { counts[k - 1] };
                ge.push(counts[k] - prev);
            }
            for k in 0..ge.len() {
                let next = ge.get(k + 1).copied().unwrap_or(0);
                for _ in 0..(ge[k] - next) {
                    out.push(q.pow(k as u32 + 1));
                }
            }
        }
        q += 1;
    }
    out.sort_unstable();
    out
}

/// Greedy small generating set of a subgroup given by its elements.
pub fn small_gens(g: &FinGroup, elems: &[u32]) -> Vec<u32> {
    let mut gens = Vec::new();
    let mut have = g.bits(&[0]);
    for &x in elems {
        if !have.contains(x as usize) {
            gens.push(x);
            have = g.bits(&g.generate(&gens));
        }
    }
    gens
}

pub type SubId = usize;

#[derive(Clone, Debug)]
pub struct SubData {
    pub elems: Vec<u32>,
    pub bits: FixedBitSet,
    pub gens: Vec<u32>,
}

/// All subgroups of a finite p-group, ordered by (order, element list).
#[derive(Debug)]
pub struct Lattice {
    group: Arc<FinGroup>,
    p: u64,
    subs: Vec<SubData>,
    index: HashMap<FixedBitSet, SubId>,
    conj_cache: Vec<OnceLock<Vec<SubId>>>,
}

impl Lattice {
    pub fn new(group: Arc<FinGroup>, p: u64) -> Result<Self> {
        if !group.is_p_group(p) {
            return Err(Error::pre(format!("group of order {} is not a {p}-group", group.size())));
        }
        let g = &*group;
        let mut found: Vec<SubData> = vec![SubData { elems: vec![0], bits: g.bits(&[0]), gens: vec![] }];
        let mut index: HashMap<FixedBitSet, SubId> = HashMap::from([(found[0].bits.clone(), 0)]);
        let mut i = 0;
        while i < found.len() {
            let h = found[i].clone();
            let norm = g.transporter(&h.gens, &h.bits);
            let mut covered = h.bits.clone();
            for &x in &norm {
                if covered.contains(x as usize) {
                    continue;
                }
                if !h.bits.contains(g.pow(x, p) as usize) {
                    continue;
                }
                let mut gens = h.gens.clone();
                gens.push(x);
                let elems = g.generate(&gens);
                let bits = g.bits(&elems);
                covered.union_with(&bits);
                if !index.contains_key(&bits) {
                    index.insert(bits.clone(), found.len());
                    found.push(SubData { elems, bits, gens });
                }
            }
            i += 1;
        }
        found.sort_by(|a, b| a.elems.len().cmp(&b.elems.len()).then_with(|| a.elems.cmp(&b.elems)));
        let index = found.iter().enumerate().map(|(i, s)| (s.bits.clone(), i)).collect();
        let conj_cache = (0..found.len()).map(|_| OnceLock::new()).collect();
        Ok(Lattice { group, p, subs: found, index, conj_cache })
    }

    pub fn group(&self) -> &Arc<FinGroup> {
        &self.group
    }
    pub fn p(&self) -> u64 {
        self.p
    }
    pub fn len(&self) -> usize {
        self.subs.len()
    }
    pub fn is_empty(&self) -> bool {
        self.subs.is_empty()
    }
    pub fn trivial(&self) -> SubId {
        0
    }
    pub fn whole(&self) -> SubId {
        self.subs.len() - 1
    }
    pub fn sub(&self, id: SubId) -> &SubData {
        &self.subs[id]
    }
    pub fn elems(&self, id: SubId) -> &[u32] {
        &self.subs[id].elems
    }
    pub fn gens(&self, id: SubId) -> &[u32] {
        &self.subs[id].gens
    }
    pub fn size(&self, id: SubId) -> usize {
        self.subs[id].elems.len()
    }
    pub fn contains(&self, id: SubId, x: u32) -> bool {
        self.subs[id].bits.contains(x as usize)
    }
    pub fn is_sub(&self, a: SubId, b: SubId) -> bool {
        self.subs[a].bits.is_subset(&self.subs[b].bits)
    }
    pub fn id_of_bits(&self, bits: &FixedBitSet) -> Option<SubId> {
        self.index.get(bits).copied()
    }
    pub fn id_of(&self, elems: &[u32]) -> Option<SubId> {
        self.id_of_bits(&self.group.bits(elems))
    }
    /// Subgroup generated by arbitrary elements.
    pub fn generated(&self, gens: &[u32]) -> SubId {
        self.id_of(&self.group.generate(gens)).expect("lattice is complete")
    }
    pub fn join(&self, a: SubId, b: SubId) -> SubId {
        let mut gens = self.subs[a].gens.clone();
        gens.extend_from_slice(&self.subs[b].gens);
        self.generated(&gens)
    }
    pub fn meet(&self, a: SubId, b: SubId) -> SubId {
        let mut bits = self.subs[a].bits.clone();
        bits.intersect_with(&self.subs[b].bits);
        self.id_of_bits(&bits).expect("intersection is a subgroup")
    }

    fn conj_row(&self, id: SubId) -> &Vec<SubId> {
        self.conj_cache[id].get_or_init(|| {
            let g = &*self.group;
            let n = g.size();
            let mut row = vec![usize::MAX; n];
            let norm = self.normalizer(id);
            for x in 0..n as u32 {
                if row[x as usize] != usize::MAX {
                    continue;
                }
                let img: Vec<u32> = self.subs[id].elems.iter().map(|&e| g.conj(x, e)).collect();
                let j = self.id_of(&img).expect("conjugate is a subgroup");
                // the whole coset x·N(P) gives the same image
                for &k in &norm {
                    row[g.mul(x, k) as usize] = j;
                }
            }
            row
        })
    }

    /// `g·P·g⁻¹`.
    pub fn conj(&self, g: u32, id: SubId) -> SubId {
        self.conj_row(id)[g as usize]
    }

    pub fn normalizer(&self, id: SubId) -> Vec<u32> {
        self.group.transporter(&self.subs[id].gens, &self.subs[id].bits)
    }
    pub fn centralizer(&self, id: SubId) -> Vec<u32> {
        self.group.centralizer(&self.subs[id].gens)
    }
    pub fn normalizer_id(&self, id: SubId) -> SubId {
        self.id_of(&self.normalizer(id)).unwrap()
    }
    pub fn centralizer_id(&self, id: SubId) -> SubId {
        self.id_of(&self.centralizer(id)).unwrap()
    }
    /// `N_S(P,Q)`.
    pub fn transporter(&self, a: SubId, b: SubId) -> Vec<u32> {
        self.group.transporter(&self.subs[a].gens, &self.subs[b].bits)
    }
    pub fn is_normal_in(&self, a: SubId, b: SubId) -> bool {
        self.is_sub(a, b) && self.subs[b].gens.iter().all(|&g| self.conj(g, a) == a)
    }

    /// S-conjugacy class of a subgroup, sorted.
    pub fn class(&self, id: SubId) -> Vec<SubId> {
        let mut c: Vec<SubId> = self.conj_row(id).clone();
        c.sort_unstable();
        c.dedup();
        c
    }

    /// Classes of subgroups under S-conjugacy, each represented by its least member.
    pub fn classes(&self) -> Vec<Vec<SubId>> {
        let mut seen = vec![false; self.len()];
        let mut out = Vec::new();
        for id in 0..self.len() {
            if !seen[id] {
                let c = self.class(id);
                for &m in &c {
                    seen[m] = true;
                }
                out.push(c);
            }
        }
        out
    }

    /// Subgroups containing `id`.
    pub fn overgroups(&self, id: SubId) -> Vec<SubId> {
        (0..self.len()).filter(|&j| self.is_sub(id, j)).collect()
    }
    /// Subgroups of `id`.
    pub fn subgroups_of(&self, id: SubId) -> Vec<SubId> {
        (0..self.len()).filter(|&j| self.is_sub(j, id)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn basic_groups() {
        let s4 = FinGroup::symmetric(4);
        assert_eq!(s4.size(), 24);
        assert_eq!(s4.sylow(2).len(), 8);
        assert_eq!(s4.sylows(2).len(), 3);
        assert_eq!(s4.o_p(2).len(), 4);
        assert_eq!(FinGroup::symmetric(3).o_p(2).len(), 1);
        assert_eq!(FinGroup::alternating(4).size(), 12);
        assert_eq!(s4.signature().name.as_deref(), Some("S4"));
        assert_eq!(FinGroup::dihedral(4).signature().name.as_deref(), Some("D8"));
        assert_eq!(FinGroup::symmetric(3).signature().name.as_deref(), Some("S3"));
        assert_eq!(FinGroup::cyclic(4).signature().name.as_deref(), Some("C4"));
    }

    #[test]
    fn quaternion_signature() {
        // Q8 as permutations of its regular representation
        let i = vec![2, 3, 1, 0, 6, 7, 5, 4];
        let j = vec![4, 5, 7, 6, 1, 0, 2, 3];
        let (q, _) = FinGroup::from_perms(&[i, j]).unwrap();
        assert_eq!(q.size(), 8);
        assert_eq!(q.signature().name.as_deref(), Some("Q8"));
        assert_eq!(q.dihedral_name(), None);
    }

    #[test]
    fn dihedral_names() {
        assert_eq!(FinGroup::dihedral(4).dihedral_name().as_deref(), Some("D_8"));
        assert_eq!(FinGroup::dihedral(16).dihedral_name().as_deref(), Some("D_32"));
        assert_eq!(FinGroup::symmetric(3).dihedral_name(), None);
        assert_eq!(FinGroup::cyclic(8).dihedral_name(), None);
        let c2 = FinGroup::cyclic(2);
        assert_eq!(FinGroup::direct_product(&FinGroup::cyclic(4), &c2).dihedral_name(), None);
    }

    #[test]
    fn abelian_invariants_of_products() {
        let g = FinGroup::direct_product(&FinGroup::cyclic(4), &FinGroup::cyclic(2));
        assert_eq!(g.abelianization(), vec![2, 4]);
        assert_eq!(FinGroup::cyclic(12).abelianization(), vec![3, 4]);
    }

    #[test]
    fn dihedral_lattice_counts() {
        // D_{2m} has τ(m) + σ(m) subgroups
        let d16 = Arc::new(FinGroup::dihedral(8));
        let lat = Lattice::new(d16, 2).unwrap();
        assert_eq!(lat.len(), 4 + 15);
        let d8 = Arc::new(FinGroup::dihedral(4));
        let lat = Lattice::new(d8, 2).unwrap();
        assert_eq!(lat.len(), 10);
        assert_eq!(lat.classes().len(), 8);
    }

    #[test]
    fn quotient_of_dihedral_by_center() {
        let d16 = FinGroup::dihedral(8);
        let z = d16.center();
        assert_eq!(z.len(), 2);
        let (q, _) = d16.quotient(&z).unwrap();
        assert_eq!(q.signature().name.as_deref(), Some("D8"));
    }
}
