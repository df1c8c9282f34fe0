use std::sync::Arc;
use std::time::Instant;

use plocal::adams::{approximate, verify_approximation};
use plocal::catalog;
use plocal::compact::Level;
use plocal::ptoral::DEFAULT_CAP;
use plocal::transporter::{from_spec, TransporterSystem};

fn so3(n: u32) -> (Level, Arc<TransporterSystem>, plocal::spec::SpecDocument) {
    let doc = catalog::load("dihedral-so3").unwrap();
    let lv = Level::from_doc(&doc, Some(n), DEFAULT_CAP).unwrap();
    let t = from_spec(&lv, doc.transporter.as_ref().unwrap()).unwrap();
    (lv, Arc::new(t), doc)
}

#[test]
fn so3_pipeline_at_eight() {
    let t0 = Instant::now();
    let (lv, l, _) = so3(8);
    let a = approximate(&lv, l, 5, 3).unwrap();
    eprintln!("approximate N=8: {:?}", t0.elapsed());
    eprintln!("{}", serde_json::to_string_pretty(&a.report).unwrap());
    assert!(a.report.pass);
}

#[test]
fn so3_families_at_eight() {
    let (lv, l, doc) = so3(8);
    for fam in &doc.families {
        let t0 = Instant::now();
        let r = verify_approximation(&lv, l.clone(), fam).unwrap();
        eprintln!("{}: pass={} {:?}", fam.name, r.pass, t0.elapsed());
        assert_eq!(r.pass, fam.name != "negative", "{}", fam.name);
    }
}
