use std::sync::Arc;

use plocal::adams::approximate;
use plocal::catalog;
use plocal::cohomology::{bar_cohomology, e2_page, stable_elements, stable_elements_limit, strongly_closed, CoefficientModule};
use plocal::compact::Level;
use plocal::finfusion::FusionSystem;
use plocal::group::FinGroup;
use plocal::ptoral::DEFAULT_CAP;
use plocal::transporter::from_spec;

fn f2() -> CoefficientModule {
    CoefficientModule::parse("Z/2").unwrap()
}

#[test]
fn dihedral_stage_limits() {
    let doc = catalog::load("dihedral-so3").unwrap();
    let lv = Level::from_doc(&doc, Some(8), DEFAULT_CAP).unwrap();
    let l = Arc::new(from_spec(&lv, doc.transporter.as_ref().unwrap()).unwrap());
    let a = approximate(&lv, l, 5, 3).unwrap();
    let views: Vec<_> = a.stages.iter().map(|s| s.view()).collect();
    let (top, emb) = a.stages.last().unwrap().truncation(&lv, &doc, DEFAULT_CAP).unwrap();
    for n in 0..=2 {
        let lim = stable_elements_limit(&views, &f2(), n, Some((&top.fusion, &emb))).unwrap();
        eprintln!("{}", serde_json::to_string(&lim).unwrap());
        assert!(lim.pass, "degree {n}: {lim:?}");
        let d: Vec<usize> = lim.stages.iter().map(|s| s.dimension).collect();
        assert!(d.iter().all(|&x| x == d[0]), "degree {n}: {d:?}");
    }
    let one = stable_elements_limit(&views[..1], &f2(), 1, None).unwrap();
    assert_eq!(one.limit, one.stages[0].invariants);
}

#[test]
fn trivial_torus_stages_are_unconstrained() {
    let doc = catalog::load("trivial-torus").unwrap();
    let lv = Level::from_doc(&doc, None, DEFAULT_CAP).unwrap();
    let l = Arc::new(from_spec(&lv, doc.transporter.as_ref().unwrap()).unwrap());
    let a = approximate(&lv, l, doc.adams.as_ref().unwrap().zeta, 2).unwrap();
    let m = CoefficientModule::parse("Z/3").unwrap();
    for st in &a.stages {
        for n in 0..=1 {
            let s = stable_elements(st.fusion(), &m, n).unwrap();
            assert_eq!(s.report.invariants, s.report.ambient);
        }
    }
}

#[test]
fn stage_zero_e2_edges() {
    let doc = catalog::load("dihedral-so3").unwrap();
    let lv = Level::from_doc(&doc, Some(6), DEFAULT_CAP).unwrap();
    let l = Arc::new(from_spec(&lv, doc.transporter.as_ref().unwrap()).unwrap());
    let a = approximate(&lv, l, 5, 1).unwrap();
    let f = a.stages[0].fusion();
    let lat = f.lattice();
    let closed = strongly_closed(f).unwrap();
    let r = *closed.iter().find(|&&r| r != lat.trivial() && r != f.s()).expect("proper strongly closed subgroup");
    let e = |n, m| e2_page(f, r, &f2(), n, m).unwrap();
    assert_eq!(e(0, 0).invariants, vec![2]);
    let h1 = stable_elements(f, &f2(), 1).unwrap().report.dimension;
    assert!(e(1, 0).dimension <= h1);
    assert!(h1 <= e(1, 0).dimension + e(0, 1).dimension);
}

#[test]
fn s4_z4_coefficients() {
    let s4 = FinGroup::symmetric(4);
    let (f, _) = FusionSystem::from_group(&s4, 2).unwrap();
    let z4 = CoefficientModule::parse("Z/4").unwrap();
    for n in 0..=1 {
        let st = stable_elements(&f, &z4, n).unwrap();
        assert_eq!(st.report.invariants, bar_cohomology(&s4, &z4, n).unwrap().invariants(), "degree {n}");
    }
}
