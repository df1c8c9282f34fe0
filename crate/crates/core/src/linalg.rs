//! Exact linear algebra over `Z/p^k`.
//!
//! Row modules are reduced by echelon insertion (bit-packed over F₂), kernels
//! are read off a reduced echelon form over fields and off a Smith normal form
//! otherwise, and subquotients `Z/B` are presented by a second, small Smith form.

use serde::Serialize;

use crate::error::{Error, Result};

pub type Mat = Vec<Vec<u64>>;
pub type SparseRow = Vec<(usize, u64)>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Ring {
    p: u64,
    k: u32,
    q: u64,
}

impl Ring {
    pub fn new(p: u64, k: u32) -> Result<Ring> {
        if k == 0 {
            return Err(Error::spec("coefficient exponent must be positive"));
        }
        let q = p.checked_pow(k).filter(|&q| q < (1 << 31)).ok_or_else(|| Error::spec("coefficient ring too large"))?;
        Ok(Ring { p, k, q })
    }

    pub fn p(&self) -> u64 {
        self.p
    }
    pub fn k(&self) -> u32 {
        self.k
    }
    pub fn modulus(&self) -> u64 {
        self.q
    }
    pub fn is_field(&self) -> bool {
        self.k == 1
    }

    #[inline]
    pub fn add(&self, a: u64, b: u64) -> u64 {
        let s = a + b;
        if s >= self.q {
            s - self.q
        } else {
            s
        }
    }
    #[inline]
    pub fn sub(&self, a: u64, b: u64) -> u64 {
        if a >= b {
            a - b
        } else {
            a + self.q - b
        }
    }
    #[inline]
    pub fn mul(&self, a: u64, b: u64) -> u64 {
        a * b % self.q
    }
    #[inline]
    pub fn neg(&self, a: u64) -> u64 {
        if a == 0 {
            0
        } else {
            self.q - a
        }
    }

    pub fn from_i64(&self, x: i64) -> u64 {
        x.rem_euclid(self.q as i64) as u64
    }

    /// `p`-adic valuation of a residue; `k` for zero.
    pub fn val(&self, mut a: u64) -> u32 {
        if a == 0 {
            return self.k;
        }
        let mut v = 0;
        while a % self.p == 0 {
            a /= self.p;
            v += 1;
        }
        v
    }

    /// `p^e` as a residue (zero once `e ≥ k`).
    pub fn pp(&self, e: u32) -> u64 {
        if e >= self.k {
            0
        } else {
            self.p.pow(e)
        }
    }

    pub fn inv_unit(&self, a: u64) -> u64 {
        let (mut r0, mut r1) = (self.q as i64, (a % self.q) as i64);
        let (mut s0, mut s1) = (0i64, 1i64);
        while r1 != 0 {
            let t = r0 / r1;
            (r0, r1) = (r1, r0 - t * r1);
            (s0, s1) = (s1, s0 - t * s1);
        }
        debug_assert_eq!(r0, 1, "not a unit");
        self.from_i64(s0)
    }

    /// Splits a nonzero residue as `unit · p^v`.
    fn split(&self, a: u64) -> (u64, u32) {
        let v = self.val(a);
        (a / self.p.pow(v), v)
    }

    /// Order of the residue mod `p^e` of `x`.
    pub fn reduce_to(&self, x: u64, e: u32) -> u64 {
        x % self.p.pow(e.min(self.k))
    }

    fn axpy(&self, y: &mut [u64], c: u64, x: &[u64], from: usize) {
        if c == 0 {
            return;
        }
        for i in from..y.len() {
            if x[i] != 0 {
                y[i] = self.sub(y[i], self.mul(c, x[i]));
            }
        }
    }
}

// ---------------------------------------------------------------- echelon

/// Row-module reduction; at most one stored row per leading column.
trait Echelon {
    fn insert(&mut self, row: &SparseRow);
    fn rank(&self) -> usize;
}

struct Gf2Echelon {
    words: usize,
    pivots: Vec<Option<Vec<u64>>>,
    rank: usize,
}

impl Gf2Echelon {
    fn new(ncols: usize) -> Self {
        Gf2Echelon { words: ncols.div_ceil(64), pivots: vec![None; ncols], rank: 0 }
    }

    /// Reduced echelon form; returns `(pivot column, row)` pairs.
    fn rref(mut self) -> Vec<(usize, Vec<u64>)> {
        let cols: Vec<usize> = (0..self.pivots.len()).filter(|&c| self.pivots[c].is_some()).collect();
        for (n, &c) in cols.iter().enumerate().rev() {
            let pr = self.pivots[c].clone().unwrap();
            for &c2 in &cols[..n] {
                let r = self.pivots[c2].as_mut().unwrap();
                if r[c / 64] >> (c % 64) & 1 == 1 {
                    for w in c / 64..self.words {
                        r[w] ^= pr[w];
                    }
                }
            }
        }
        cols.into_iter().map(|c| (c, self.pivots[c].take().unwrap())).collect()
    }
}

impl Echelon for Gf2Echelon {
    fn insert(&mut self, row: &SparseRow) {
        let mut v = vec![0u64; self.words];
        for &(c, x) in row {
            if x & 1 == 1 {
                v[c / 64] ^= 1 << (c % 64);
            }
        }
        let mut w = 0;
        loop {
            while w < self.words && v[w] == 0 {
                w += 1;
            }
            if w == self.words {
                return;
            }
            let c = w * 64 + v[w].trailing_zeros() as usize;
            match &self.pivots[c] {
                None => {
                    self.pivots[c] = Some(v);
                    self.rank += 1;
                    return;
                }
                Some(p) => {
                    for i in w..self.words {
                        v[i] ^= p[i];
                    }
                }
            }
        }
    }
    fn rank(&self) -> usize {
        self.rank
    }
}

/// Echelon insertion over `Z/p^k`: the stored row at column `c` has leading entry `p^e`
/// with `e` minimal among rows reaching `c`.
struct RingEchelon {
    ring: Ring,
    ncols: usize,
    pivots: Vec<Option<Vec<u64>>>,
    rank: usize,
}

impl RingEchelon {
    fn new(ring: Ring, ncols: usize) -> Self {
        RingEchelon { ring, ncols, pivots: vec![None; ncols], rank: 0 }
    }

    fn insert_dense(&mut self, mut v: Vec<u64>) {
        let r = self.ring;
        let mut c = 0;
        loop {
            while c < self.ncols && v[c] == 0 {
                c += 1;
            }
            if c == self.ncols {
                return;
            }
            let (u, f) = r.split(v[c]);
            if u != 1 {
                let ui = r.inv_unit(u);
                for x in v[c..].iter_mut() {
                    *x = r.mul(*x, ui);
                }
            }
            match self.pivots[c].take() {
                None => {
                    self.pivots[c] = Some(v);
                    self.rank += 1;
                    return;
                }
                Some(p) => {
                    let e = r.val(p[c]);
                    let (top, mut low) = if f >= e { (p, v) } else { (v, p) };
                    let lo = r.val(low[c]);
                    let hi = r.val(top[c]);
                    r.axpy(&mut low, r.pp(lo - hi), &top, c);
                    self.pivots[c] = Some(top);
                    v = low;
                }
            }
        }
    }

    fn rows(self) -> Vec<(usize, Vec<u64>)> {
        self.pivots.into_iter().enumerate().filter_map(|(c, r)| r.map(|r| (c, r))).collect()
    }

    /// Reduced echelon form over a field (leading entries 1).
    fn rref(self) -> Vec<(usize, Vec<u64>)> {
        let r = self.ring;
        let mut rows = self.rows();
        for n in (0..rows.len()).rev() {
            let (c, pr) = rows[n].clone();
            for (_, row) in rows[..n].iter_mut() {
                let x = row[c];
                r.axpy(row, x, &pr, c);
            }
        }
        rows
    }
}

impl Echelon for RingEchelon {
    fn insert(&mut self, row: &SparseRow) {
        let mut v = vec![0u64; self.ncols];
        for &(c, x) in row {
            v[c] = self.ring.add(v[c], x % self.ring.q);
        }
        self.insert_dense(v);
    }
    fn rank(&self) -> usize {
        self.rank
    }
}

// ---------------------------------------------------------------- Smith normal form

pub struct Snf {
    /// Valuations of the nonzero diagonal entries.
    pub exps: Vec<u32>,
    pub u: Option<Mat>,
    pub uinv: Option<Mat>,
    pub v: Option<Mat>,
    pub w: Option<Mat>,
}

fn identity(n: usize) -> Mat {
    (0..n).map(|i| (0..n).map(|j| u64::from(i == j)).collect()).collect()
}

/// `U·A·V = diag(p^{e_t})`; `uinv = U⁻¹`, `w = V⁻¹`.
pub fn snf(ring: Ring, mut a: Mat, ncols: usize, track_rows: bool, track_cols: bool) -> Snf {
    let r = ring;
    let nrows = a.len();
    let mut u = track_rows.then(|| identity(nrows));
    let mut uinv = track_rows.then(|| identity(nrows));
    let mut v = track_cols.then(|| identity(ncols));
    let mut w = track_cols.then(|| identity(ncols));
    let mut exps = Vec::new();
    for t in 0..nrows.min(ncols) {
        let mut best: Option<(u32, usize, usize)> = None;
        'search: for (i, row) in a.iter().enumerate().skip(t) {
            for (j, &x) in row.iter().enumerate().skip(t) {
                if x != 0 {
                    let e = r.val(x);
                    if best.is_none_or(|b| e < b.0) {
                        best = Some((e, i, j));
                        if e == 0 {
                            break 'search;
                        }
                    }
                }
            }
        }
        let Some((e, i, j)) = best else { break };
        if i != t {
            a.swap(i, t);
            if let (Some(u), Some(ui)) = (u.as_mut(), uinv.as_mut()) {
                u.swap(i, t);
                for row in ui.iter_mut() {
                    row.swap(i, t);
                }
            }
        }
        if j != t {
            for row in a.iter_mut() {
                row.swap(j, t);
            }
            if let (Some(v), Some(w)) = (v.as_mut(), w.as_mut()) {
                for row in v.iter_mut() {
                    row.swap(j, t);
                }
                w.swap(j, t);
            }
        }
        let (unit, _) = r.split(a[t][t]);
        if unit != 1 {
            let ui = r.inv_unit(unit);
            for x in a[t].iter_mut() {
                *x = r.mul(*x, ui);
            }
            if let (Some(u), Some(uv)) = (u.as_mut(), uinv.as_mut()) {
                for x in u[t].iter_mut() {
                    *x = r.mul(*x, ui);
                }
                for row in uv.iter_mut() {
                    row[t] = r.mul(row[t], unit);
                }
            }
        }
        let pe = r.p.pow(e);
        let pivot = a[t].clone();
        for i in t + 1..nrows {
            if a[i][t] != 0 {
                let c = a[i][t] / pe;
                r.axpy(&mut a[i], c, &pivot, t);
                if let (Some(u), Some(uv)) = (u.as_mut(), uinv.as_mut()) {
                    let ut = u[t].clone();
                    r.axpy(&mut u[i], c, &ut, 0);
                    for row in uv.iter_mut() {
                        row[t] = r.add(row[t], r.mul(c, row[i]));
                    }
                }
            }
        }
        for j in t + 1..ncols {
            if a[t][j] != 0 {
                let c = a[t][j] / pe;
                a[t][j] = 0;
                if let (Some(v), Some(w)) = (v.as_mut(), w.as_mut()) {
                    for row in v.iter_mut() {
                        row[j] = r.sub(row[j], r.mul(c, row[t]));
                    }
                    let wj = w[j].clone();
                    for (x, &y) in w[t].iter_mut().zip(&wj) {
                        *x = r.add(*x, r.mul(c, y));
                    }
                }
            }
        }
        exps.push(e);
    }
    Snf { exps, u, uinv, v, w }
}

// ---------------------------------------------------------------- kernels

enum Coords {
    /// Field case: coordinates are the free columns.
    Free(Vec<usize>),
    /// Local ring case: rows of `V⁻¹` and the shift `k − e`.
    Snf(Vec<(Vec<u64>, u32)>),
}

/// A submodule `Z ⊆ R^m` presented as `⊕ Z/p^{e_i}` on explicit generators.
pub struct Kernel {
    ring: Ring,
    pub gens: Vec<Vec<u64>>,
    pub exps: Vec<u32>,
    coords: Coords,
}

impl Kernel {
    /// Kernel of the matrix with the given rows; `limit` bounds `rows × ncols`.
    pub fn of_rows<I: IntoIterator<Item = SparseRow>>(ring: Ring, ncols: usize, rows: I) -> Kernel {
        if ring.p == 2 && ring.k == 1 {
            let mut ech = Gf2Echelon::new(ncols);
            for row in rows {
                ech.insert(&row);
                if ech.rank() == ncols {
                    break;
                }
            }
            let rows = ech.rref();
            let bit = |r: &Vec<u64>, f: usize| r[f / 64] >> (f % 64) & 1;
            let pivots: Vec<usize> = rows.iter().map(|&(c, _)| c).collect();
            let free: Vec<usize> = (0..ncols).filter(|c| pivots.binary_search(c).is_err()).collect();
            let gens = free
                .iter()
                .map(|&f| {
                    let mut x = vec![0u64; ncols];
                    x[f] = 1;
                    for (c, r) in &rows {
                        x[*c] = bit(r, f);
                    }
                    x
                })
                .collect();
            return Kernel { ring, exps: vec![1; free.len()], gens, coords: Coords::Free(free) };
        }
        let mut ech = RingEchelon::new(ring, ncols);
        for row in rows {
            ech.insert(&row);
        }
        if ring.is_field() {
            let rows = ech.rref();
            let pivots: Vec<usize> = rows.iter().map(|&(c, _)| c).collect();
            let free: Vec<usize> = (0..ncols).filter(|c| pivots.binary_search(c).is_err()).collect();
            let gens = free
                .iter()
                .map(|&f| {
                    let mut x = vec![0u64; ncols];
                    x[f] = 1;
                    for (c, r) in &rows {
                        x[*c] = ring.neg(r[f]);
                    }
                    x
                })
                .collect();
            return Kernel { ring, exps: vec![1; free.len()], gens, coords: Coords::Free(free) };
        }
        let a: Mat = ech.rows().into_iter().map(|(_, r)| r).collect();
        let s = snf(ring, a, ncols, false, true);
        let v = s.v.unwrap();
        let w = s.w.unwrap();
        let mut gens = Vec::new();
        let mut exps = Vec::new();
        let mut coords = Vec::new();
        for t in 0..ncols {
            let e = s.exps.get(t).copied().unwrap_or(ring.k);
            if e == 0 {
                continue;
            }
            let sc = ring.pp(ring.k - e);
            gens.push(v.iter().map(|row| ring.mul(row[t], sc)).collect());
            exps.push(e);
            coords.push((w[t].clone(), ring.k - e));
        }
        Kernel { ring, gens, exps, coords: Coords::Snf(coords) }
    }

    pub fn len(&self) -> usize {
        self.gens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gens.is_empty()
    }

    /// Coordinates of an element of the kernel on the generators.
    pub fn coords(&self, x: &[u64]) -> Vec<u64> {
        match &self.coords {
            Coords::Free(free) => free.iter().map(|&f| x[f]).collect(),
            Coords::Snf(rows) => rows
                .iter()
                .map(|(w, shift)| {
                    let y = w.iter().zip(x).fold(0, |acc, (&a, &b)| self.ring.add(acc, self.ring.mul(a, b)));
                    y / self.ring.p.pow(*shift)
                })
                .collect(),
        }
    }
}

/// `Z/B` for `B ⊆ Z ⊆ R^m`, presented as `⊕ Z/p^{f_j}` with `f_j ≥ 1`.
pub struct Subquotient {
    ring: Ring,
    kernel: Kernel,
    u: Mat,
    keep: Vec<usize>,
    pub exps: Vec<u32>,
    /// Representatives in `R^m` of the generators.
    pub reps: Vec<Vec<u64>>,
}

impl Subquotient {
    pub fn new(kernel: Kernel, sub: &[Vec<u64>]) -> Subquotient {
        let ring = kernel.ring;
        let s = kernel.len();
        let mut cols: Vec<Vec<u64>> = Vec::new();
        for (i, &e) in kernel.exps.iter().enumerate() {
            if e < ring.k {
                let mut c = vec![0u64; s];
                c[i] = ring.pp(e);
                cols.push(c);
            }
        }
        for b in sub {
            let c = kernel.coords(b);
            if c.iter().any(|&x| x != 0) {
                cols.push(c);
            }
        }
        let a: Mat = (0..s).map(|i| cols.iter().map(|c| c[i]).collect()).collect();
        let f = snf(ring, a, cols.len(), true, false);
        let u = f.u.unwrap();
        let uinv = f.uinv.unwrap();
        let mut keep = Vec::new();
        let mut exps = Vec::new();
        for t in 0..s {
            let e = f.exps.get(t).copied().unwrap_or(ring.k);
            if e >= 1 {
                keep.push(t);
                exps.push(e);
            }
        }
        let m = kernel.gens.first().map_or(0, |g| g.len());
        let reps = keep
            .iter()
            .map(|&t| {
                let mut x = vec![0u64; m];
                for (i, g) in kernel.gens.iter().enumerate() {
                    let c = uinv[i][t];
                    if c != 0 {
                        for (xi, &gi) in x.iter_mut().zip(g) {
                            *xi = ring.add(*xi, ring.mul(c, gi));
                        }
                    }
                }
                x
            })
            .collect();
        Subquotient { ring, kernel, u, keep, exps, reps }
    }

    /// Kernel of a module map out of `⊕ Z/p^{src}`; `rows` carry the exponent of their target summand.
    pub fn kernel_of_map(ring: Ring, src: &[u32], rows: &[(Vec<u64>, u32)]) -> Subquotient {
        let sparse = rows.iter().map(|(r, g)| {
            let sc = ring.pp(ring.k - g);
            r.iter().enumerate().filter(|(_, &x)| x != 0).map(|(i, &x)| (i, ring.mul(x, sc))).filter(|&(_, x)| x != 0).collect()
        });
        let ker = Kernel::of_rows(ring, src.len(), sparse);
        let rel: Vec<Vec<u64>> = src
            .iter()
            .enumerate()
            .filter(|(_, &e)| e < ring.k)
            .map(|(i, &e)| {
                let mut x = vec![0u64; src.len()];
                x[i] = ring.pp(e);
                x
            })
            .collect();
        Subquotient::new(ker, &rel)
    }

    pub fn ring(&self) -> Ring {
        self.ring
    }

    pub fn len(&self) -> usize {
        self.exps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.exps.is_empty()
    }

    /// Class coordinates of an element of `Z`, each reduced mod `p^{f_j}`.
    pub fn coords(&self, x: &[u64]) -> Vec<u64> {
        let c = self.kernel.coords(x);
        self.keep
            .iter()
            .zip(&self.exps)
            .map(|(&t, &f)| {
                let h = self.u[t].iter().zip(&c).fold(0, |acc, (&a, &b)| self.ring.add(acc, self.ring.mul(a, b)));
                self.ring.reduce_to(h, f)
            })
            .collect()
    }

    /// Orders `p^{f_j}` of the cyclic summands.
    pub fn invariants(&self) -> Vec<u64> {
        self.exps.iter().map(|&f| self.ring.p.pow(f)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dense_to_sparse(m: &Mat) -> Vec<SparseRow> {
        m.iter().map(|r| r.iter().enumerate().filter(|(_, &x)| x != 0).map(|(i, &x)| (i, x)).collect()).collect()
    }

    #[test]
    fn ring_arithmetic() {
        let r = Ring::new(2, 3).unwrap();
        assert_eq!(r.val(4), 2);
        assert_eq!(r.val(0), 3);
        assert_eq!(r.mul(r.inv_unit(3), 3), 1);
        assert_eq!(r.from_i64(-1), 7);
        assert!(Ring::new(2, 40).is_err());
    }

    #[test]
    fn snf_of_integer_matrix() {
        let r = Ring::new(2, 3).unwrap();
        let a = vec![vec![2, 4], vec![6, 0]];
        let s = snf(r, a.clone(), 2, true, true);
        let mut exps = s.exps.clone();
        exps.sort();
        assert_eq!(exps, vec![1, 2]);
        let u = s.u.unwrap();
        let v = s.v.unwrap();
        let prod = |x: &Mat, y: &Mat| -> Mat {
            (0..x.len()).map(|i| (0..y[0].len()).map(|j| (0..y.len()).fold(0, |acc, l| r.add(acc, r.mul(x[i][l], y[l][j])))).collect()).collect()
        };
        let d = prod(&prod(&u, &a), &v);
        for i in 0..2 {
            for j in 0..2 {
                if i != j {
                    assert_eq!(d[i][j], 0);
                }
            }
        }
        assert_eq!(prod(&u, &s.uinv.unwrap()), identity(2));
        assert_eq!(prod(&v, &s.w.unwrap()), identity(2));
    }

    #[test]
    fn gf2_kernel_matches_generic() {
        let m: Mat = vec![vec![1, 1, 0, 1], vec![0, 1, 1, 1], vec![1, 0, 1, 0]];
        let r = Ring::new(2, 1).unwrap();
        let k = Kernel::of_rows(r, 4, dense_to_sparse(&m));
        assert_eq!(k.len(), 2);
        for g in &k.gens {
            for row in &m {
                assert_eq!(row.iter().zip(g).map(|(a, b)| a * b).sum::<u64>() % 2, 0);
            }
        }
        let r3 = Ring::new(3, 1).unwrap();
        let k3 = Kernel::of_rows(r3, 4, dense_to_sparse(&m));
        assert_eq!(k3.len(), 1);
    }

    #[test]
    fn kernel_over_z4() {
        let r = Ring::new(2, 2).unwrap();
        let k = Kernel::of_rows(r, 1, vec![vec![(0, 2)]]);
        assert_eq!(k.exps, vec![1]);
        assert_eq!(k.gens, vec![vec![2]]);
        let sq = Subquotient::kernel_of_map(r, &[2, 1], &[(vec![1, 2], 2)]);
        assert_eq!(sq.invariants().iter().product::<u64>(), 2);
    }
}
