//! Split discrete p-toral groups `T ⋊ π` and their finite truncations.
//!
//! A torus element is a vector of residues `a/p^k mod 1`. Elements never
//! depend on the truncation level, so raising `N` embeds `S[N]` into `S[N+1]`
//! by the identity on representations.

use std::collections::{HashMap, HashSet, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::group::FinGroup;

pub const DEFAULT_TRUNCATION: u32 = 8;
pub const DEFAULT_CAP: usize = 1 << 16;
/// Largest truncation turned into an explicit multiplication table.
pub const TABLE_CAP: usize = 1 << 12;
/// Torus orders above this are outside desk scale.
const TORUS_CAP: u64 = 1 << 20;

pub fn ipow(p: u64, k: u32) -> u64 {
    p.checked_pow(k).expect("p-power overflow")
}

/// Largest `k` with `p^k | n`.
pub fn padic_valuation(n: i128, p: u64) -> Result<u32> {
    if n == 0 {
        return Err(Error::pre("valuation of 0 is undefined"));
    }
    if p < 2 {
        return Err(Error::pre("p must be a prime"));
    }
    let mut n = n.unsigned_abs();
    let p = p as u128;
    let mut k = 0;
    while n % p == 0 {
        n /= p;
        k += 1;
    }
    Ok(k)
}

pub fn is_prime(p: u64) -> bool {
    p >= 2 && (2..).take_while(|d| d * d <= p).all(|d| p % d != 0)
}

/// One coordinate `a/p^k`, canonical: `0 ≤ a < p^k`, `p ∤ a` unless `a = 0`, and `k = 0` for zero.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Coord {
    pub k: u32,
    pub a: u64,
}

impl Coord {
    pub fn canonical(p: u64, a: i128, k: u32) -> Coord {
        let m = ipow(p, k) as i128;
        let mut a = a.rem_euclid(m) as u64;
        let mut k = k;
        if a == 0 {
            return Coord { k: 0, a: 0 };
        }
        while k > 0 && a % p == 0 {
            a /= p;
            k -= 1;
        }
        Coord { k, a }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TorusElement {
    coords: Vec<Coord>,
}

impl TorusElement {
    pub fn zero(r: usize) -> Self {
        TorusElement { coords: vec![Coord { k: 0, a: 0 }; r] }
    }

    pub fn from_pairs(p: u64, pairs: &[(i128, u32)]) -> Self {
        TorusElement { coords: pairs.iter().map(|&(a, k)| Coord::canonical(p, a, k)).collect() }
    }

    /// The element `1/p^n` in coordinate `j`.
    pub fn basis(p: u64, r: usize, j: usize, n: u32) -> Self {
        let mut t = Self::zero(r);
        t.coords[j] = Coord::canonical(p, 1, n);
        t
    }

    pub fn coords(&self) -> &[Coord] {
        &self.coords
    }

    pub fn rank(&self) -> usize {
        self.coords.len()
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(|c| c.k == 0)
    }

    /// Order is `p^level`.
    pub fn level(&self) -> u32 {
        self.coords.iter().map(|c| c.k).max().unwrap_or(0)
    }

    /// Numerators over the common denominator `p^big`; requires `big ≥ level`.
    pub fn residues(&self, p: u64, big: u32) -> Vec<u64> {
        self.coords.iter().map(|c| c.a * ipow(p, big - c.k)).collect()
    }

    pub fn from_residues(p: u64, big: u32, v: &[i128]) -> Self {
        TorusElement { coords: v.iter().map(|&a| Coord::canonical(p, a, big)).collect() }
    }

    pub fn add(&self, other: &Self, p: u64) -> Self {
        let big = self.level().max(other.level());
        let a = self.residues(p, big);
        let b = other.residues(p, big);
        let v: Vec<i128> = a.iter().zip(&b).map(|(x, y)| *x as i128 + *y as i128).collect();
        Self::from_residues(p, big, &v)
    }

    pub fn neg(&self, p: u64) -> Self {
        self.scale(-1, p)
    }

    pub fn scale(&self, c: i128, p: u64) -> Self {
        let big = self.level();
        let v: Vec<i128> = self.residues(p, big).iter().map(|&x| (x as i128) * c).collect();
        Self::from_residues(p, big, &v)
    }

    pub fn act(&self, m: &[Vec<i64>], p: u64) -> Self {
        let big = self.level();
        let a = self.residues(p, big);
        let modulus = ipow(p, big) as i128;
        let v: Vec<i128> = m
            .iter()
            .map(|row| row.iter().zip(&a).map(|(x, y)| (*x as i128 * *y as i128) % modulus.max(1)).sum())
            .collect();
        Self::from_residues(p, big, &v)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct GroupElement {
    pub t: TorusElement,
    pub w: u32,
}

impl fmt::Display for GroupElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for c in self.t.coords() {
            write!(f, "[{},{}],", c.a, c.k)?;
        }
        write!(f, "{}]", self.w)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AmbientGroup {
    p: u64,
    r: usize,
    pi: Vec<Vec<u32>>,
    pi_inv: Vec<u32>,
    action: Vec<Vec<Vec<i64>>>,
    truncation: u32,
}

fn matmul(a: &[Vec<i64>], b: &[Vec<i64>]) -> Vec<Vec<i64>> {
    let n = a.len();
    (0..n).map(|i| (0..n).map(|j| (0..n).map(|k| a[i][k] * b[k][j]).sum()).collect()).collect()
}

pub(crate) fn validate_table(table: &[Vec<u32>]) -> Result<()> {
    let n = table.len();
    if n == 0 {
        return Err(Error::spec("empty multiplication table"));
    }
    for (i, row) in table.iter().enumerate() {
        if row.len() != n {
            return Err(Error::spec("multiplication table is not square"));
        }
        let mut seen = vec![false; n];
        for &x in row {
            if x as usize >= n || seen[x as usize] {
                return Err(Error::spec(format!("row {i} of the table is not a permutation")));
            }
            seen[x as usize] = true;
        }
        if row[0] != i as u32 || table[0][i] != i as u32 {
            return Err(Error::spec("index 0 is not the identity"));
        }
    }
    for a in 0..n {
        for b in 0..n {
            let ab = table[a][b] as usize;
            for c in 0..n {
                if table[ab][c] != table[a][table[b][c] as usize] {
                    return Err(Error::spec(format!("table is not associative at ({a},{b},{c})")));
                }
            }
        }
    }
    Ok(())
}

impl AmbientGroup {
    pub fn new(p: u64, r: usize, pi: Vec<Vec<u32>>, action: Vec<Vec<Vec<i64>>>, truncation: u32) -> Result<Self> {
        if !is_prime(p) {
            return Err(Error::spec(format!("{p} is not a prime")));
        }
        validate_table(&pi)?;
        let n = pi.len();
        let mut m = n as u64;
        while m % p == 0 {
            m /= p;
        }
        if m != 1 {
            return Err(Error::spec(format!("|π| = {n} is not a power of {p}")));
        }
        if action.len() != n {
            return Err(Error::spec("need one action matrix per π-element"));
        }
        for a in &action {
            if a.len() != r || a.iter().any(|row| row.len() != r) {
                return Err(Error::spec(format!("action matrices must be {r}×{r}")));
            }
        }
        let id: Vec<Vec<i64>> = (0..r).map(|i| (0..r).map(|j| (i == j) as i64).collect()).collect();
        if action[0] != id {
            return Err(Error::spec("identity of π must act trivially"));
        }
        for a in 0..n {
            for b in 0..n {
                if matmul(&action[a], &action[b]) != action[pi[a][b] as usize] {
                    return Err(Error::spec(format!("action is not a homomorphism at ({a},{b})")));
                }
            }
        }
        if truncation == 0 {
            return Err(Error::spec("truncation must be at least 1"));
        }
        let torus = (p as u128).checked_pow(r as u32 * truncation).unwrap_or(u128::MAX);
        if torus > TORUS_CAP as u128 {
            return Err(Error::cap("torus order p^(rN)", TORUS_CAP as usize));
        }
        let pi_inv = (0..n).map(|a| (0..n).find(|&b| pi[a][b] == 0).unwrap() as u32).collect();
        Ok(AmbientGroup { p, r, pi, pi_inv, action, truncation })
    }

    /// `D_{2^∞}`: rank 1 at p = 2, π = C₂ acting by inversion.
    pub fn dihedral(truncation: u32) -> Result<Self> {
        Self::new(2, 1, vec![vec![0, 1], vec![1, 0]], vec![vec![vec![1]], vec![vec![-1]]], truncation)
    }

    /// The bare torus `(Z/p^∞)^r`.
    pub fn torus(p: u64, r: usize, truncation: u32) -> Result<Self> {
        let id: Vec<Vec<i64>> = (0..r).map(|i| (0..r).map(|j| (i == j) as i64).collect()).collect();
        Self::new(p, r, vec![vec![0]], vec![id], truncation)
    }

    pub fn with_truncation(&self, n: u32) -> Result<Self> {
        Self::new(self.p, self.r, self.pi.clone(), self.action.clone(), n)
    }

    pub fn p(&self) -> u64 {
        self.p
    }
    pub fn rank(&self) -> usize {
        self.r
    }
    pub fn truncation(&self) -> u32 {
        self.truncation
    }
    pub fn pi_order(&self) -> usize {
        self.pi.len()
    }
    pub fn pi_table(&self) -> &[Vec<u32>] {
        &self.pi
    }
    pub fn action(&self) -> &[Vec<Vec<i64>>] {
        &self.action
    }

    /// `p^(rN)·|π|`.
    pub fn order(&self) -> u64 {
        ipow(self.p, self.r as u32 * self.truncation) * self.pi.len() as u64
    }

    pub fn identity(&self) -> GroupElement {
        GroupElement { t: TorusElement::zero(self.r), w: 0 }
    }

    pub fn torus_basis(&self, j: usize, n: u32) -> GroupElement {
        GroupElement { t: TorusElement::basis(self.p, self.r, j, n), w: 0 }
    }

    pub fn pi_element(&self, w: u32) -> GroupElement {
        GroupElement { t: TorusElement::zero(self.r), w }
    }

    pub fn belongs(&self, a: &GroupElement) -> bool {
        a.t.rank() == self.r && (a.w as usize) < self.pi.len()
    }

    /// Inside the truncation `S[N]`.
    pub fn contains(&self, a: &GroupElement) -> bool {
        self.belongs(a) && a.t.level() <= self.truncation
    }

    fn check(&self, a: &GroupElement) -> Result<()> {
        if self.belongs(a) {
            Ok(())
        } else {
            Err(Error::AmbientMismatch)
        }
    }

    pub fn multiply(&self, a: &GroupElement, b: &GroupElement) -> Result<GroupElement> {
        self.check(a)?;
        self.check(b)?;
        Ok(self.mul(a, b))
    }

    pub(crate) fn mul(&self, a: &GroupElement, b: &GroupElement) -> GroupElement {
        let t = a.t.add(&b.t.act(&self.action[a.w as usize], self.p), self.p);
        GroupElement { t, w: self.pi[a.w as usize][b.w as usize] }
    }

    pub fn inverse(&self, a: &GroupElement) -> GroupElement {
        let wi = self.pi_inv[a.w as usize];
        GroupElement { t: a.t.act(&self.action[wi as usize], self.p).neg(self.p), w: wi }
    }

    pub fn conjugate(&self, g: &GroupElement, x: &GroupElement) -> GroupElement {
        self.mul(&self.mul(g, x), &self.inverse(g))
    }

    pub fn pow(&self, a: &GroupElement, mut e: u64) -> GroupElement {
        let mut base = a.clone();
        let mut acc = self.identity();
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(&acc, &base);
            }
            base = self.mul(&base, &base);
            e >>= 1;
        }
        acc
    }

    /// The ζ-power map on the torus, identity on π.
    pub fn torus_power(&self, a: &GroupElement, zeta: i128) -> GroupElement {
        GroupElement { t: a.t.scale(zeta, self.p), w: a.w }
    }

    /// All elements of `S[N]`, sorted.
    pub fn elements(&self) -> Vec<GroupElement> {
        let q = ipow(self.p, self.truncation);
        let nt = ipow(q, self.r as u32);
        let mut out = Vec::with_capacity((nt as usize) * self.pi.len());
        for code in 0..nt {
            let t = self.decode(code, q);
            for w in 0..self.pi.len() as u32 {
                out.push(GroupElement { t: t.clone(), w });
            }
        }
        out.sort();
        out
    }

    fn decode(&self, mut code: u64, q: u64) -> TorusElement {
        let mut v = Vec::with_capacity(self.r);
        for _ in 0..self.r {
            v.push((code % q) as i128);
            code /= q;
        }
        TorusElement::from_residues(self.p, self.truncation, &v)
    }

    /// Largest `k` with every `x^{p^k}` in `T`, i.e. `log_p exp(π)`.
    pub fn exponent_over_torus(&self) -> u32 {
        let n = self.pi.len();
        let mut e = 0;
        for w in 0..n {
            let mut x = w as u32;
            let mut k = 0;
            while x != 0 {
                let mut y = 0u32;
                for _ in 0..self.p {
                    y = self.pi[y as usize][x as usize];
                }
                x = y;
                k += 1;
            }
            e = e.max(k);
        }
        e
    }
}

/// Certified torus data for a subgroup: rank of its maximal torus and the order of the π-part.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StableRank {
    pub rank: usize,
    pub pi_order: u64,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Subgroup {
    elements: Vec<GroupElement>,
    pub meta: Option<StableRank>,
}

impl Subgroup {
    pub fn from_sorted(elements: Vec<GroupElement>) -> Self {
        debug_assert!(elements.windows(2).all(|w| w[0] < w[1]));
        Subgroup { elements, meta: None }
    }

    pub fn elements(&self) -> &[GroupElement] {
        &self.elements
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn contains(&self, x: &GroupElement) -> bool {
        self.elements.binary_search(x).is_ok()
    }

    pub fn is_subgroup_of(&self, other: &Subgroup) -> bool {
        self.elements.iter().all(|x| other.contains(x))
    }

    /// A small generating set, chosen greedily in element order.
    pub fn generators(&self, amb: &AmbientGroup) -> Vec<GroupElement> {
        let mut gens = Vec::new();
        let mut h: HashSet<GroupElement> = HashSet::from([amb.identity()]);
        for x in &self.elements {
            if !h.contains(x) {
                gens.push(x.clone());
                h = closure(amb, &gens, usize::MAX).expect("uncapped").into_iter().collect();
            }
        }
        gens
    }
}

fn closure(amb: &AmbientGroup, gens: &[GroupElement], cap: usize) -> Result<Vec<GroupElement>> {
    let id = amb.identity();
    let mut seen: HashSet<GroupElement> = HashSet::from([id.clone()]);
    let mut queue = VecDeque::from([id]);
    while let Some(x) = queue.pop_front() {
        for g in gens {
            let y = amb.mul(&x, g);
            if !seen.contains(&y) {
                if seen.len() >= cap {
                    return Err(Error::cap("subgroup closure", cap));
                }
                seen.insert(y.clone());
                queue.push_back(y);
            }
        }
    }
    let mut v: Vec<GroupElement> = seen.into_iter().collect();
    v.sort();
    Ok(v)
}

pub fn generate(amb: &AmbientGroup, gens: &[GroupElement], cap: usize) -> Result<Subgroup> {
    for g in gens {
        amb.check(g)?;
        if !amb.contains(g) {
            return Err(Error::Truncation(format!("generator {g} lies above truncation {}", amb.truncation())));
        }
    }
    Ok(Subgroup::from_sorted(closure(amb, gens, cap)?))
}

pub fn whole(amb: &AmbientGroup) -> Subgroup {
    Subgroup::from_sorted(amb.elements())
}

pub fn centralizer(amb: &AmbientGroup, p: &Subgroup) -> Subgroup {
    let gens = p.generators(amb);
    let els = amb
        .elements()
        .into_iter()
        .filter(|g| gens.iter().all(|x| amb.mul(g, x) == amb.mul(x, g)))
        .collect();
    Subgroup::from_sorted(els)
}

/// `N_S(P,Q) = {g : gPg⁻¹ ≤ Q}` within the truncation.
pub fn transporter_set(amb: &AmbientGroup, p: &Subgroup, q: &Subgroup) -> Vec<GroupElement> {
    let gens = p.generators(amb);
    amb.elements()
        .into_iter()
        .filter(|g| gens.iter().all(|x| q.contains(&amb.conjugate(g, x))))
        .collect()
}

pub fn normalizer(amb: &AmbientGroup, p: &Subgroup) -> Subgroup {
    Subgroup::from_sorted(transporter_set(amb, p, p))
}

/// `{t ∈ T : c·t = t} = T[v_p(c−1)]`.
pub fn torus_fixed_kernel(amb: &AmbientGroup, c: i128) -> Result<Subgroup> {
    if c == 1 {
        return Err(Error::DegreeOne);
    }
    let v = padic_valuation(c - 1, amb.p())?;
    if v >= amb.truncation() {
        return Err(Error::Truncation(format!("v_p(c−1) = {v} needs truncation above {v}")));
    }
    let gens: Vec<GroupElement> = (0..amb.rank()).map(|j| amb.torus_basis(j, v)).collect();
    generate(amb, &gens, DEFAULT_CAP)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Certificate {
    Stable,
    Unstable,
}

#[derive(Clone, Debug)]
pub struct Stabilized<R> {
    pub value: R,
    pub next: R,
    pub certificate: Certificate,
}

/// Runs `query` at truncations `n` and `n+1`. Elements are level independent,
/// so comparing results by equality compares them under the canonical embedding.
pub fn stabilize<R: PartialEq>(
    amb: &AmbientGroup,
    n: u32,
    query: impl Fn(&AmbientGroup) -> Result<R>,
) -> Result<Stabilized<R>> {
    let value = query(&amb.with_truncation(n)?)?;
    let next = query(&amb.with_truncation(n + 1)?)?;
    let certificate = if value == next { Certificate::Stable } else { Certificate::Unstable };
    Ok(Stabilized { value, next, certificate })
}

/// `S[N]` as an explicit finite group, indices in sorted element order.
#[derive(Clone, Debug)]
pub struct Truncated {
    pub ambient: AmbientGroup,
    pub elements: Vec<GroupElement>,
    pub group: FinGroup,
    index: HashMap<GroupElement, u32>,
}

impl Truncated {
    pub fn new(amb: &AmbientGroup) -> Result<Self> {
        let n = amb.order() as usize;
        if n > TABLE_CAP {
            return Err(Error::cap("finite model of the truncation", TABLE_CAP));
        }
        let p = amb.p;
        let q = ipow(p, amb.truncation);
        let r = amb.r;
        let nt = ipow(q, r as u32) as usize;
        let m = amb.pi.len();
        let digits: Vec<Vec<u64>> = (0..nt as u64)
            .map(|mut c| {
                (0..r)
                    .map(|_| {
                        let d = c % q;
                        c /= q;
                        d
                    })
                    .collect()
            })
            .collect();
        let encode = |v: &[u64]| v.iter().rev().fold(0u64, |acc, &d| acc * q + d) as usize;
        // act[w][code] = code of A(w)·v
        let act: Vec<Vec<usize>> = (0..m)
            .map(|w| {
                (0..nt)
                    .map(|c| {
                        let v = &digits[c];
                        let img: Vec<u64> = amb.action[w]
                            .iter()
                            .map(|row| {
                                let s: i128 = row.iter().zip(v).map(|(a, b)| *a as i128 * *b as i128).sum();
                                s.rem_euclid(q as i128) as u64
                            })
                            .collect();
                        encode(&img)
                    })
                    .collect()
            })
            .collect();
        let raw: Vec<GroupElement> = (0..n)
            .map(|code| {
                let v: Vec<i128> = digits[code / m].iter().map(|&d| d as i128).collect();
                GroupElement { t: TorusElement::from_residues(p, amb.truncation, &v), w: (code % m) as u32 }
            })
            .collect();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| raw[a].cmp(&raw[b]));
        let mut rank_of = vec![0u32; n];
        for (i, &c) in order.iter().enumerate() {
            rank_of[c] = i as u32;
        }
        let mut table = vec![0u32; n * n];
        for (i, &ca) in order.iter().enumerate() {
            let (ta, wa) = (ca / m, ca % m);
            for (j, &cb) in order.iter().enumerate() {
                let (tb, wb) = (cb / m, cb % m);
                let tb2 = &digits[act[wa][tb]];
                let sum: Vec<u64> = digits[ta].iter().zip(tb2).map(|(x, y)| (x + y) % q).collect();
                let code = encode(&sum) * m + amb.pi[wa][wb] as usize;
                table[i * n + j] = rank_of[code];
            }
        }
        let elements: Vec<GroupElement> = order.iter().map(|&c| raw[c].clone()).collect();
        let index = elements.iter().enumerate().map(|(i, e)| (e.clone(), i as u32)).collect();
        let group = FinGroup::from_flat_table(n, table)?;
        Ok(Truncated { ambient: amb.clone(), elements, group, index })
    }

    pub fn index_of(&self, x: &GroupElement) -> Option<u32> {
        self.index.get(x).copied()
    }

    pub fn element(&self, i: u32) -> &GroupElement {
        &self.elements[i as usize]
    }

    pub fn indices(&self, xs: &[GroupElement]) -> Result<Vec<u32>> {
        xs.iter()
            .map(|x| self.index_of(x).ok_or_else(|| Error::Truncation(format!("{x} is outside S[{}]", self.ambient.truncation()))))
            .collect()
    }

    pub fn to_subgroup(&self, idx: &[u32]) -> Subgroup {
        let mut els: Vec<GroupElement> = idx.iter().map(|&i| self.elements[i as usize].clone()).collect();
        els.sort();
        Subgroup::from_sorted(els)
    }

    /// Indices of the torus `T[N]`.
    pub fn torus(&self) -> Vec<u32> {
        (0..self.elements.len() as u32).filter(|&i| self.elements[i as usize].w == 0).collect()
    }

    /// Indices of `T[v] ⋊ π`.
    pub fn level_subgroup(&self, v: u32) -> Vec<u32> {
        (0..self.elements.len() as u32).filter(|&i| self.elements[i as usize].t.level() <= v).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn valuations() {
        assert_eq!(padic_valuation(24, 2).unwrap(), 3);
        assert_eq!(padic_valuation(5, 5).unwrap(), 1);
        assert_eq!(padic_valuation(7, 2).unwrap(), 0);
        assert!(padic_valuation(0, 2).is_err());
    }

    #[test]
    fn dihedral_relations() {
        let d = AmbientGroup::dihedral(8).unwrap();
        let x = d.pi_element(1);
        let t2 = d.torus_basis(0, 2);
        assert_eq!(d.mul(&x, &x), d.identity());
        assert_eq!(d.mul(&t2, &t2), d.torus_basis(0, 1));
        let tx = d.mul(&t2, &x);
        assert_eq!(d.mul(&tx, &tx), d.identity());
        assert_eq!(d.conjugate(&x, &t2), d.inverse(&t2));
    }

    #[test]
    fn generation_orders() {
        let d = AmbientGroup::dihedral(6).unwrap();
        let v = generate(&d, &[d.torus_basis(0, 1), d.pi_element(1)], DEFAULT_CAP).unwrap();
        assert_eq!(v.order(), 4);
        let s = generate(&d, &[d.torus_basis(0, 6), d.pi_element(1)], DEFAULT_CAP).unwrap();
        assert_eq!(s.order(), 128);
        assert_eq!(generate(&d, &[], DEFAULT_CAP).unwrap().order(), 1);
        assert!(generate(&d, &[d.torus_basis(0, 7)], DEFAULT_CAP).is_err());
    }

    #[test]
    fn centralizer_and_normalizer_of_klein() {
        let d = AmbientGroup::dihedral(2).unwrap();
        let v = generate(&d, &[d.torus_basis(0, 1), d.pi_element(1)], DEFAULT_CAP).unwrap();
        assert_eq!(centralizer(&d, &v), v);
        let d = AmbientGroup::dihedral(6).unwrap();
        let v = generate(&d, &[d.torus_basis(0, 1), d.pi_element(1)], DEFAULT_CAP).unwrap();
        assert_eq!(normalizer(&d, &v).order(), 8);
        assert_eq!(centralizer(&d, &generate(&d, &[], 4).unwrap()).order(), 128);
    }

    #[test]
    fn fixed_kernels() {
        let d = AmbientGroup::dihedral(8).unwrap();
        assert_eq!(torus_fixed_kernel(&d, 5).unwrap().order(), 4);
        assert_eq!(torus_fixed_kernel(&d, 25).unwrap().order(), 8);
        assert!(matches!(torus_fixed_kernel(&d, 1), Err(Error::DegreeOne)));
        assert!(torus_fixed_kernel(&d, 257).is_err());
    }

    #[test]
    fn stabilization() {
        let d = AmbientGroup::dihedral(5).unwrap();
        let klein = |a: &AmbientGroup| {
            let v = generate(a, &[a.torus_basis(0, 1), a.pi_element(1)], DEFAULT_CAP)?;
            Ok(centralizer(a, &v))
        };
        let s = stabilize(&d, 5, klein).unwrap();
        assert_eq!(s.certificate, Certificate::Stable);
        assert_eq!(s.value.order(), 4);
        let top = stabilize(&d, 5, |a| generate(a, &[a.torus_basis(0, a.truncation())], DEFAULT_CAP)).unwrap();
        assert_eq!(top.certificate, Certificate::Unstable);
    }

    #[test]
    fn truncated_table_matches_direct_product() {
        let d = AmbientGroup::dihedral(4).unwrap();
        let m = Truncated::new(&d).unwrap();
        assert_eq!(m.elements[0], d.identity());
        for a in 0..m.elements.len() as u32 {
            for b in 0..m.elements.len() as u32 {
                let direct = d.mul(m.element(a), m.element(b));
                assert_eq!(m.element(m.group.mul(a, b)), &direct);
            }
        }
    }
}
