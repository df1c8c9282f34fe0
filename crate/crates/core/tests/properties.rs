use proptest::prelude::*;

use plocal::adams::AdamsOperation;
use plocal::cohomology::{bar_cohomology, CoefficientModule};
use plocal::group::{FinGroup, Lattice};
use plocal::linalg::{snf, Kernel, Ring};
use plocal::ptoral::{AmbientGroup, Coord};
use plocal::spec::Literal;

fn ring() -> impl Strategy<Value = Ring> {
    prop_oneof![Just((2, 1)), Just((2, 2)), Just((2, 3)), Just((3, 1)), Just((3, 2)), Just((5, 1))]
        .prop_map(|(p, k)| Ring::new(p, k).unwrap())
}

fn matrix(q: u64, rows: usize, cols: usize) -> impl Strategy<Value = Vec<Vec<u64>>> {
    prop::collection::vec(prop::collection::vec(0..q, cols), rows)
}

fn apply(ring: Ring, a: &[Vec<u64>], x: &[u64]) -> Vec<u64> {
    a.iter().map(|r| r.iter().zip(x).fold(0, |s, (&c, &v)| ring.add(s, ring.mul(c, v)))).collect()
}

fn matmul(ring: Ring, a: &[Vec<u64>], b: &[Vec<u64>]) -> Vec<Vec<u64>> {
    let m = b.first().map_or(0, |r| r.len());
    a.iter()
        .map(|r| (0..m).map(|j| r.iter().enumerate().fold(0, |s, (k, &c)| ring.add(s, ring.mul(c, b[k][j])))).collect())
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn ring_matches_integers(r in ring(), a in -1000i64..1000, b in -1000i64..1000) {
        let q = r.modulus() as i64;
        let (x, y) = (r.from_i64(a), r.from_i64(b));
        prop_assert_eq!(r.add(x, y) as i64, (a + b).rem_euclid(q));
        prop_assert_eq!(r.sub(x, y) as i64, (a - b).rem_euclid(q));
        prop_assert_eq!(r.mul(x, y) as i64, (a * b).rem_euclid(q));
        if a.rem_euclid(r.p() as i64) != 0 {
            prop_assert_eq!(r.mul(x, r.inv_unit(x)), 1);
        }
    }

    #[test]
    fn kernel_size_matches_enumeration(
        (r, a) in ring().prop_flat_map(|r| (Just(r), matrix(r.modulus(), 3, 3)))
    ) {
        let q = r.modulus();
        let rows = a.iter().map(|row| row.iter().enumerate().filter(|(_, &c)| c != 0).map(|(j, &c)| (j, c)).collect());
        let k = Kernel::of_rows(r, 3, rows);
        for g in &k.gens {
            prop_assert!(apply(r, &a, g).iter().all(|&v| v == 0));
        }
        let mut brute = 0u64;
        for x in 0..q.pow(3) {
            let v = [x % q, x / q % q, x / q / q];
            if apply(r, &a, &v).iter().all(|&c| c == 0) {
                brute += 1;
            }
        }
        let order: u64 = k.exps.iter().map(|&e| r.p().pow(e)).product();
        prop_assert_eq!(order, brute);
    }

    #[test]
    fn smith_form_diagonalizes(
        (r, a) in ring().prop_flat_map(|r| (Just(r), matrix(r.modulus(), 3, 4)))
    ) {
        let s = snf(r, a.clone(), 4, true, true);
        let (u, v) = (s.u.unwrap(), s.v.unwrap());
        let d = matmul(r, &matmul(r, &u, &a), &v);
        for (i, row) in d.iter().enumerate() {
            for (j, &x) in row.iter().enumerate() {
                let want = if i == j && i < s.exps.len() { r.pp(s.exps[i]) } else { 0 };
                prop_assert_eq!(x, want, "entry ({}, {})", i, j);
            }
        }
        let id = matmul(r, &u, &s.uinv.unwrap());
        prop_assert!(id.iter().enumerate().all(|(i, row)| row.iter().enumerate().all(|(j, &x)| x == u64::from(i == j))));
    }

    #[test]
    fn coordinates_are_canonical(p in prop_oneof![Just(2u64), Just(3), Just(5)], a in -500i128..500, k in 0u32..6) {
        let c = Coord::canonical(p, a, k);
        prop_assert!(c.k <= k);
        prop_assert!(c.k == 0 || c.a % p != 0);
        // same point of Z/p^∞ as a / p^k
        let big = 6;
        let lhs = (c.a as i128) * (p as i128).pow(big - c.k);
        let rhs = a * (p as i128).pow(big - k);
        prop_assert_eq!(lhs.rem_euclid((p as i128).pow(big)), rhs.rem_euclid((p as i128).pow(big)));
        prop_assert_eq!(Coord::canonical(p, c.a as i128, c.k), c);
    }

    #[test]
    fn literals_round_trip(coords in prop::collection::vec((-50i64..50, 0u32..8), 0..3), w in 0u32..4) {
        let l = Literal { coords, w };
        let back: Literal = serde_json::from_str(&serde_json::to_string(&l).unwrap()).unwrap();
        prop_assert_eq!(back, l);
    }

    #[test]
    fn adams_valuation(k in 1i64..200, i in 0u32..3, p in prop_oneof![Just(2u64), Just(3)]) {
        let zeta = 1 + p as i64 * k;
        let mut op = AdamsOperation::new(p, zeta).unwrap();
        for _ in 0..i {
            op = op.power();
        }
        // v_p(ζ^{p^i} − 1) = v_p(ζ − 1) + i, except v_2(ζ² − 1) for ζ ≡ 3 mod 4
        let mut x = zeta - 1;
        let mut v = 0;
        while x % p as i64 == 0 {
            x /= p as i64;
            v += 1;
        }
        let want = if p == 2 && zeta % 4 == 3 && i > 0 {
            let mut y = zeta as i128 * zeta as i128 - 1;
            let mut w = 0;
            while y % 2 == 0 {
                y /= 2;
                w += 1;
            }
            w + i - 1
        } else {
            v + i
        };
        prop_assert_eq!(op.degree_valuation(), want);
    }

    #[test]
    fn ambient_group_laws(n in 2u32..5, a in 0usize..1000, b in 0usize..1000, c in 0usize..1000) {
        let amb = AmbientGroup::dihedral(n).unwrap();
        let els = amb.elements();
        let (x, y, z) = (&els[a % els.len()], &els[b % els.len()], &els[c % els.len()]);
        let xy_z = amb.multiply(&amb.multiply(x, y).unwrap(), z).unwrap();
        let x_yz = amb.multiply(x, &amb.multiply(y, z).unwrap()).unwrap();
        prop_assert_eq!(xy_z, x_yz);
        prop_assert_eq!(amb.multiply(x, &amb.inverse(x)).unwrap(), amb.identity());
    }

    #[test]
    fn lattice_meet_and_join(m in 2usize..9, a in 0usize..64, b in 0usize..64) {
        let lat = Lattice::new(std::sync::Arc::new(FinGroup::dihedral(m.next_power_of_two())), 2).unwrap();
        let (x, y) = (a % lat.len(), b % lat.len());
        let meet = lat.meet(x, y);
        let join = lat.join(x, y);
        prop_assert!(lat.is_sub(meet, x) && lat.is_sub(meet, y));
        prop_assert!(lat.is_sub(x, join) && lat.is_sub(y, join));
        let both: Vec<u32> = lat.elems(x).iter().copied().filter(|&g| lat.contains(y, g)).collect();
        prop_assert_eq!(lat.elems(meet), both.as_slice());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    /// `|H^n(Z/m; Z/p^k)| = gcd(m, p^k)` for `n ≥ 1`.
    #[test]
    fn cyclic_cohomology(e in 1u32..4, p in prop_oneof![Just(2u64), Just(3)], n in 0u32..4, k in 1u32..3) {
        let m = (p as usize).pow(e);
        prop_assume!(m <= 9);
        let g = FinGroup::cyclic(m);
        let coeff = CoefficientModule::parse(&format!("Z/{}", p.pow(k))).unwrap();
        let h = bar_cohomology(&g, &coeff, n).unwrap();
        let want = if n == 0 { p.pow(k) } else { p.pow(e.min(k)) };
        prop_assert_eq!(h.order(), want);
    }
}
