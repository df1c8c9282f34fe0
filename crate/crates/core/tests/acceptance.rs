//! Acceptance suite: one line per criterion, nonzero exit if any fails.

use std::collections::HashSet;
use std::sync::Arc;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use plocal::adams::{approximate, invariance_twist, verify_approximation, AdamsOperation};
use plocal::catalog;
use plocal::cohomology::{bar_cohomology, e2_page, stable_elements, strongly_closed, CoefficientModule};
use plocal::compact::Level;
use plocal::finfusion::{FusionSystem, Morph, SatWitness};
use plocal::group::{FinGroup, Lattice, SubId};
use plocal::ptoral::{AmbientGroup, DEFAULT_CAP};
use plocal::spec::SpecDocument;
use plocal::transporter::{self, check_axioms, TransporterSystem};

type Outcome = Result<String, String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(t0: Instant, limit: u64) -> Result<Duration, String> {
    let dt = t0.elapsed();
    ensure(dt < Duration::from_secs(limit), || format!("took {dt:.1?}, limit {limit} s"))?;
    Ok(dt)
}

fn e<T, E: std::fmt::Display>(r: Result<T, E>) -> Result<T, String> {
    r.map_err(|x| x.to_string())
}

fn so3(n: u32) -> Result<(Level, Arc<TransporterSystem>, SpecDocument), String> {
    let doc = e(catalog::load("dihedral-so3"))?;
    let lv = e(Level::from_doc(&doc, Some(n), DEFAULT_CAP))?;
    let t = e(transporter::from_spec(&lv, doc.transporter.as_ref().unwrap()))?;
    Ok((lv, Arc::new(t), doc))
}

fn is_klein(lat: &Lattice, p: SubId) -> bool {
    lat.size(p) == 4 && lat.elems(p).iter().all(|&x| lat.group().mul(x, x) == 0)
}

fn criterion_1() -> Outcome {
    let t0 = Instant::now();
    let (lv, l, _) = so3(8)?;
    let a = e(approximate(&lv, l, 5, 3))?;
    let mut orders = Vec::new();
    for st in &a.stages {
        let f = st.fusion();
        let lat = f.lattice();
        orders.push(lat.size(f.s()));
        let mut kleins = Vec::new();
        for c in e(f.classes())? {
            let r = c.representative;
            if is_klein(lat, r) {
                // |Aut_S(W)| = |N_S(W)| / |C_S(W)|
                let aut_s = lat.normalizer(r).len() / lat.centralizer(r).len();
                kleins.push((e(f.aut(r))?.maps.len(), aut_s));
            }
        }
        kleins.sort_unstable();
        ensure(kleins == vec![(2, 2), (6, 2)], || format!("stage {}: Klein automizers {kleins:?}", st.index))?;
        let sat = e(f.is_saturated())?;
        ensure(sat.saturated, || format!("stage {} not saturated: {:?}", st.index, sat.witness))?;
        let t5 = e(f.check_h_generation(st.system.objects()))?;
        ensure(t5.pass, || format!("stage {} H-generation: {t5:?}", st.index))?;
        let v = (0..lat.len()).find(|&p| is_klein(lat, p) && e(f.aut(p)).map(|a| a.maps.len() == 6).unwrap_or(false)).unwrap();
        let (out, _) = e(f.aut(v).map(|a| (a.group.signature(), ())))?;
        ensure(out.name.as_deref() == Some("S3"), || format!("Aut(V) is {out:?}"))?;
    }
    ensure(orders == [8, 16, 32], || format!("|S_i| = {orders:?}"))?;
    ensure(a.report.pass, || "approximation report does not pass".into())?;
    let dt = within(t0, 10)?;
    Ok(format!("|S_i| = {orders:?}, Aut(V) = S3, no order-3 fusion on W, {dt:.1?}"))
}

fn criterion_2() -> Outcome {
    let t0 = Instant::now();
    let (lv, l, doc) = so3(8)?;
    let fam = doc.families.iter().find(|f| f.name == "psl2").ok_or("no psl2 family")?;
    let r = e(verify_approximation(&lv, l, fam))?;
    ensure(r.pass, || format!("psl2 family rejected: {}", serde_json::to_string(&r).unwrap()))?;
    for s in &r.stages {
        let auts: Vec<usize> = s.klein.iter().map(|k| k.aut_order).collect();
        ensure(auts == [6, 6], || format!("stage {}: Klein automizers {auts:?}", s.index))?;
    }
    let dt = within(t0, 5)?;
    Ok(format!("psl2 family accepted, S4-type on both Klein classes, {dt:.1?}"))
}

fn criterion_3() -> Outcome {
    let t0 = Instant::now();
    let s4 = FinGroup::symmetric(4);
    let (f, _) = e(FusionSystem::from_group(&s4, 2))?;
    let m = e(CoefficientModule::parse("Z/2"))?;
    let mut dims = Vec::new();
    for n in 0..=2 {
        let st = e(stable_elements(&f, &m, n))?.report.dimension;
        let h = e(bar_cohomology(&s4, &m, n))?.dimension();
        ensure(st == h, || format!("degree {n}: stable {st}, bar complex {h}"))?;
        dims.push(st);
    }
    // Poincaré series of H*(S4; F2) starts 1 + t + 2t²
    ensure(dims == [1, 1, 2], || format!("dimensions {dims:?}"))?;
    let dt = within(t0, 60)?;
    Ok(format!("dims {dims:?} for n = 0, 1, 2 (degree 3 exceeds the bar-complex cap), {dt:.1?}"))
}

/// The S4 fusion system on D8 with the reflection class fused to the centre only.
fn axiom_two_breaker() -> Result<FusionSystem, String> {
    let d8 = FinGroup::dihedral(4);
    let lat = Arc::new(e(Lattice::new(Arc::new(d8), 2))?);
    let g = lat.group().clone();
    let z = lat.centralizer_id(lat.whole());
    let zc = lat.elems(z)[1];
    let x = (0..g.size() as u32).find(|&x| g.element_order(x) == 2 && x != zc).unwrap();
    let f = e(Morph::from_generators(&lat, &[x], &[zc]))?;
    e(FusionSystem::new(lat, vec![f], DEFAULT_CAP))
}

fn criterion_4() -> Outcome {
    let t0 = Instant::now();
    let corpus = [
        ("S4", FinGroup::symmetric(4)),
        ("A4", FinGroup::alternating(4)),
        ("D16", FinGroup::dihedral(8)),
        ("S3xC2", FinGroup::direct_product(&FinGroup::symmetric(3), &FinGroup::cyclic(2))),
    ];
    for (name, g) in &corpus {
        let (f, _) = e(FusionSystem::from_group(g, 2))?;
        let s = e(f.is_saturated())?;
        ensure(s.saturated && s.witness.is_none(), || format!("{name}: {:?}", s.witness))?;
    }
    let lat = Arc::new(e(Lattice::new(Arc::new(FinGroup::cyclic(4)), 2))?);
    let s = lat.whole();
    let inv = Morph { dom: s, cod: s, map: lat.elems(s).iter().map(|&x| lat.group().inv(x)).collect() };
    let z4 = e(FusionSystem::new(lat, vec![inv], DEFAULT_CAP))?;
    let w1 = e(z4.is_saturated())?;
    ensure(!w1.saturated && matches!(w1.witness, Some(SatWitness::AxiomI { subgroup, .. }) if subgroup == s), || {
        format!("Z/4 breaker: {w1:?}")
    })?;
    let w2 = e(axiom_two_breaker()?.is_saturated())?;
    ensure(!w2.saturated && matches!(w2.witness, Some(SatWitness::AxiomII { .. })), || format!("axiom-II breaker: {w2:?}"))?;
    let dt = within(t0, 30)?;
    Ok(format!("saturated on S4, A4, D16, S3xC2; witnesses for axiom I (Z/4) and axiom II, {dt:.1?}"))
}

fn criterion_5() -> Outcome {
    let mut checked = 0;
    for spec in ["dihedral", "dihedral-so3"] {
        let doc = e(catalog::load(spec))?;
        for n in [6, 8] {
            let lv = e(Level::from_doc(&doc, Some(n), DEFAULT_CAP))?;
            let pair = e(transporter::bullet_data(&lv))?;
            let r = e(transporter::retraction_properties(&lv.fusion, &pair, None))?;
            for c in &r.clauses {
                ensure(c.failures == 0, || format!("{spec} N={n}: {} fails ({:?})", c.clause, c.witness))?;
                checked += c.checked;
            }
            let names: HashSet<&str> = r.clauses.iter().map(|c| c.clause.as_str()).collect();
            for want in ["idempotent", "monotone", "transporter", "centralizer", "unique-extension", "centric-radical"] {
                ensure(names.contains(want), || format!("clause {want} missing"))?;
            }
        }
    }
    Ok(format!("{checked} checks over dihedral and dihedral-so3 at N = 6, 8, zero failures"))
}

/// `|Mor(P,Q)| = |E(P)|·|Hom_F(P,Q)|` counted directly, plus the axiom report.
fn transporter_ok(name: &str, t: &TransporterSystem) -> Result<usize, String> {
    let ax = e(check_axioms(t))?;
    ensure(ax.pass, || format!("{name}: {:?}", ax.axioms.iter().find(|a| !a.pass)))?;
    let f = t.fusion();
    let mut pairs = 0;
    for &p in t.objects() {
        let ep = e(t.e_kernel(p))?.len();
        for &q in t.objects() {
            let mors = e(t.mor(p, q))?.len();
            let homs = e(f.hom_set(p, q))?.len();
            ensure(mors == ep * homs, || format!("{name}: |Mor({p},{q})| = {mors}, |E|·|Hom| = {ep}·{homs}"))?;
            pairs += 1;
        }
    }
    Ok(pairs)
}

fn criterion_6() -> Outcome {
    let mut pairs = 0;
    let corpus = [
        ("S4", FinGroup::symmetric(4)),
        ("A4", FinGroup::alternating(4)),
        ("D16", FinGroup::dihedral(8)),
        ("S3xC2", FinGroup::direct_product(&FinGroup::symmetric(3), &FinGroup::cyclic(2))),
    ];
    for (name, g) in &corpus {
        pairs += transporter_ok(name, &e(transporter::from_group(g, 2, None))?)?;
        pairs += transporter_ok(name, &e(transporter::linking_of_group(g, 2))?)?;
    }
    // telescopic extensions of the dihedral linking data
    let mut inner_tele = None;
    for spec in ["d16-inner", "dihedral-so3"] {
        let doc = e(catalog::load(spec))?;
        let lv = e(Level::from_doc(&doc, Some(6), DEFAULT_CAP))?;
        let l = Arc::new(e(transporter::from_spec(&lv, doc.transporter.as_ref().unwrap()))?);
        let pair = e(transporter::bullet_data(&lv))?;
        let t = Arc::new(e(transporter::telescopic_extend(l, &pair))?);
        pairs += transporter_ok(spec, &t)?;
        if spec == "d16-inner" {
            inner_tele = Some((lv, t));
        }
    }
    // quotient by the central Z/2
    let (lv, t) = inner_tele.unwrap();
    let lat = &lv.lat;
    let z = lat.centralizer_id(lat.whole());
    ensure(lat.size(z) == 2, || format!("|Z(S)| = {}", lat.size(z)))?;
    ensure(e(plocal::localops::is_central(&lv.fusion, z))?, || "Z(S) not central".into())?;
    let q = e(transporter::quotient_by(t, z))?;
    pairs += transporter_ok("quotient", &q)?;
    Ok(format!("axioms and |Mor| = |E|·|Hom| on {pairs} object pairs (group corpus, telescopic N=6, quotient)"))
}

fn criterion_7() -> Outcome {
    let (lv, l, _) = so3(6)?;
    let a = e(approximate(&lv, l, 5, 1))?;
    let f = a.stages[0].fusion();
    let lat = f.lattice();
    let m = e(CoefficientModule::parse("Z/2"))?;
    let closed = e(strongly_closed(f))?;
    let r = *closed.iter().find(|&&r| r != lat.trivial() && r != f.s()).ok_or("no proper strongly closed subgroup")?;
    let mut dims = [[0usize; 3]; 3];
    for n in 0..=2u32 {
        for mm in 0..=(2 - n) {
            dims[n as usize][mm as usize] = e(e2_page(f, r, &m, n, mm))?.dimension;
        }
    }
    let e00 = e(e2_page(f, r, &m, 0, 0))?;
    ensure(e00.invariants == [2], || format!("E2^(0,0) invariants {:?}", e00.invariants))?;
    let h1 = e(stable_elements(f, &m, 1))?.report.dimension;
    let (e10, e01) = (dims[1][0], dims[0][1]);
    ensure(e10 <= h1 && h1 <= e10 + e01, || format!("E2^(1,0) = {e10}, H1 = {h1}, E2^(0,1) = {e01}"))?;
    Ok(format!("|R| = {}, E2^(1,0) = {e10} <= H1 = {h1} <= {}, E2^(0,0) = Z/2", lat.size(r), e10 + e01))
}

/// `v_p(ζ^{p^i} − 1)` by exact arithmetic mod `p^k`.
fn valuation_oracle(p: u64, zeta: i64, i: u32, k: u32) -> u32 {
    let m = (p as i128).pow(k);
    let mut d = (zeta as i128).rem_euclid(m);
    for _ in 0..p.pow(i) - 1 {
        d = d * (zeta as i128).rem_euclid(m) % m;
    }
    let mut x = (d - 1).rem_euclid(m);
    if x == 0 {
        return k;
    }
    let mut v = 0;
    while x % p as i128 == 0 {
        x /= p as i128;
        v += 1;
    }
    v
}

fn criterion_8() -> Outcome {
    let t0 = Instant::now();
    let ambients: Vec<(Level, usize)> = vec![
        (e(Level::new(&e(AmbientGroup::dihedral(7))?, &[], vec![], DEFAULT_CAP))?, 2),
        (e(Level::new(&e(AmbientGroup::torus(3, 1, 5))?, &[], vec![], DEFAULT_CAP))?, 1),
        (e(Level::new(&e(AmbientGroup::torus(5, 2, 2))?, &[], vec![], DEFAULT_CAP))?, 1),
    ];
    let zetas: [(u64, &[i64]); 3] = [(2, &[3, 5, -3, 7, 9, 17, -1]), (3, &[4, 7, -2, 10, 28]), (5, &[6, 11, -4, 26])];
    let mut checked = 0;
    for (lv, pi) in &ambients {
        let p = lv.ambient.p();
        let r = lv.ambient.rank() as u32;
        let zs = zetas.iter().find(|(q, _)| *q == p).unwrap().1;
        for &zeta in zs {
            for i in 0..3 {
                let v = valuation_oracle(p, zeta, i, lv.n() + 2);
                if v >= lv.n() || checked >= 20 {
                    continue;
                }
                let mut op = e(AdamsOperation::new(p, zeta))?;
                for _ in 0..i {
                    op = op.power();
                }
                let fixed = e(op.fixed_subgroup(lv))?;
                let want = (p as usize).pow(r * v) * pi;
                ensure(lv.lat.size(fixed) == want, || format!("p={p} ζ={zeta} i={i}: |C_S(Ψ)| = {}, want {want}", lv.lat.size(fixed)))?;
                checked += 1;
            }
        }
    }
    ensure(checked == 20, || format!("only {checked} fixed-point combinations"))?;
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut samples = 0;
    for _ in 0..1000 {
        let (lv, _) = &ambients[rng.gen_range(0..ambients.len())];
        let p = lv.ambient.p();
        let zs = zetas.iter().find(|(q, _)| *q == p).unwrap().1;
        let zeta = zs[rng.gen_range(0..zs.len())];
        let op = e(AdamsOperation::new(p, zeta))?;
        let size = lv.lat.group().size() as u32;
        let x = rng.gen_range(0..size);
        let tw = e(invariance_twist(lv, &op, lv.lat.trivial(), x))?;
        let amb = &lv.ambient;
        let xe = lv.element(x);
        let direct = e(amb.multiply(&amb.inverse(xe), &op.apply(amb, xe)))?;
        ensure(tw.in_torus && direct.w == 0 && tw.twist == direct.to_string(), || format!("twist of {} is {}", tw.element, tw.twist))?;
        samples += 1;
    }
    let dt = within(t0, 5)?;
    Ok(format!("{checked} fixed subgroups, {samples} twists in T, {dt:.1?}"))
}

fn main() {
    let criteria: [(u32, fn() -> Outcome); 8] = [
        (1, criterion_1),
        (2, criterion_2),
        (3, criterion_3),
        (4, criterion_4),
        (5, criterion_5),
        (6, criterion_6),
        (7, criterion_7),
        (8, criterion_8),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (i, f) in criteria {
        if !filter.is_empty() && !filter.iter().any(|a| a == &i.to_string()) {
            continue;
        }
        match f() {
            Ok(msg) => println!("criterion {i}: PASS  {msg}"),
            Err(msg) => {
                failed += 1;
                println!("criterion {i}: FAIL  {msg}");
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
