//! Unstable Adams operations, their fixed subcategories, and approximations of a telescopic
//! system by finite stages.

use std::collections::{HashMap, HashSet};
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::cohomology::StageView;
use crate::compact::Level;
use crate::error::{Error, Result};
use crate::finfusion::{FusionSystem, Morph};
use crate::group::{GroupSignature, SubId};
use crate::ptoral::{padic_valuation, AmbientGroup, GroupElement};
use crate::spec::{SpecDocument, StageFamilySpec, StageSpec};
use crate::transporter::{
    bullet_data, check_axioms, restricted, telescopic_extend, ElementAuto, Mor, MorFilter, RestrictedModel, SubAmbient,
    TransporterSystem,
};

/// Seed for the sampled composites of condition (iii).
pub const SAMPLE_SEED: u64 = 0x5eed;
pub const SAMPLE_COMPOSITES: usize = 100;
pub const MAX_ESCALATIONS: u32 = 3;

/// `Ψ_i` of degree `ζ^{p^i}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AdamsOperation {
    pub p: u64,
    pub zeta: i64,
    pub level: u32,
}

fn big_exponent(p: u64) -> u32 {
    let mut k = 0;
    let mut acc: u128 = 1;
    while acc * (p as u128) < 1u128 << 62 {
        acc *= p as u128;
        k += 1;
    }
    k
}

impl AdamsOperation {
    pub fn new(p: u64, zeta: i64) -> Result<Self> {
        if zeta == 1 {
            return Err(Error::DegreeOne);
        }
        if (zeta - 1).rem_euclid(p as i64) != 0 {
            return Err(Error::pre(format!("degree {zeta} is not congruent to 1 mod {p}")));
        }
        Ok(AdamsOperation { p, zeta, level: 0 })
    }

    /// `Ψ^p`.
    pub fn power(&self) -> Self {
        AdamsOperation { level: self.level + 1, ..self.clone() }
    }

    /// `ζ^{p^i}` mod `p^k`.
    pub fn degree_mod(&self, k: u32) -> i128 {
        let m = (self.p as i128).pow(k);
        let mut d = (self.zeta as i128).rem_euclid(m);
        for _ in 0..self.level {
            let base = d;
            let mut acc: i128 = 1;
            for _ in 0..self.p {
                acc = acc * base % m;
            }
            d = acc;
        }
        d
    }

    /// `v_p(ζ^{p^i} − 1)`, saturating at the working precision.
    pub fn degree_valuation(&self) -> u32 {
        let k = big_exponent(self.p);
        let d = self.degree_mod(k) - 1;
        if d == 0 {
            k
        } else {
            padic_valuation(d, self.p).expect("nonzero")
        }
    }

    pub fn apply(&self, amb: &AmbientGroup, x: &GroupElement) -> GroupElement {
        let k = amb.truncation().max(x.t.level());
        GroupElement { t: x.t.scale(self.degree_mod(k), self.p), w: x.w }
    }

    pub fn element_auto(&self, level: &Level) -> Result<ElementAuto> {
        let n = level.lat.group().size() as u32;
        let elems = (0..n).map(|i| level.index(&self.apply(&level.ambient, level.element(i)))).collect::<Result<Vec<_>>>()?;
        ElementAuto::from_elements(&level.lat, elems)
    }

    /// `C_S(Ψ) = T[v] ⋊ π` with `v = v_p(ζ^{p^i} − 1)`.
    pub fn fixed_subgroup(&self, level: &Level) -> Result<SubId> {
        let v = self.degree_valuation();
        if v >= level.n() {
            return Err(Error::Truncation(format!(
                "fixed subgroup needs truncation above {v}, have {}",
                level.n()
            )));
        }
        let n = level.lat.group().size() as u32;
        let fixed: Vec<u32> =
            (0..n).filter(|&i| self.apply(&level.ambient, level.element(i)) == *level.element(i)).collect();
        let id = level.lat.id_of(&fixed).ok_or_else(|| Error::Failed("fixed points do not form a subgroup".into()))?;
        debug_assert_eq!(id, level.level_sub(v));
        Ok(id)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Twist {
    pub element: String,
    pub twist: String,
    pub in_torus: bool,
    /// `x⁻¹Ψ(x) ∈ C_S(Q)`.
    pub centralizes: bool,
}

/// `x⁻¹ · Ψ(x)` for `x ∈ N_S(Q, P)`.
pub fn invariance_twist(level: &Level, op: &AdamsOperation, q: SubId, x: u32) -> Result<Twist> {
    let g = level.lat.group();
    let px = level.index(&op.apply(&level.ambient, level.element(x)))?;
    let t = g.mul(g.inv(x), px);
    Ok(Twist {
        element: level.label(x),
        twist: level.label(t),
        in_torus: level.element(t).w == 0,
        centralizes: level.lat.centralizer(q).binary_search(&t).is_ok(),
    })
}

/// One finite stage `(S_i, F_i, L_i)`.
pub struct Stage {
    pub index: usize,
    pub torus_level: u32,
    /// `S_i` in the lattice of `S[N]`.
    pub base: SubId,
    pub ambient: SubAmbient,
    pub system: Arc<TransporterSystem>,
    pub model: Arc<RestrictedModel>,
}

impl Stage {
    pub fn fusion(&self) -> &FusionSystem {
        self.system.fusion()
    }

    pub fn view(&self) -> StageView<'_> {
        StageView { fusion: self.fusion(), emb: &self.ambient.emb }
    }

    /// The truncation at this stage's torus level and the embedding of `S_i` into it.
    pub fn truncation(&self, level: &Level, doc: &SpecDocument, cap: usize) -> Result<(Level, Vec<u32>)> {
        let lv = Level::from_doc(doc, Some(self.torus_level), cap)?;
        let emb = self.ambient.emb.iter().map(|&x| lv.index(level.element(x))).collect::<Result<_>>()?;
        Ok((lv, emb))
    }
    fn local(&self, level: &Level, p: SubId) -> Option<SubId> {
        self.ambient.down(&level.lat, p)
    }
}

/// The `Ψ`-fixed subcategory of the telescopic system over `C_S(Ψ)`.
pub fn fixed_category(level: &Level, lt: &Arc<TransporterSystem>, op: &AdamsOperation, index: usize) -> Result<Stage> {
    let s_i = op.fixed_subgroup(level)?;
    let psi = Arc::new(op.element_auto(level)?);
    lt.adams_check(&psi)?;
    let amb = SubAmbient::new(&level.lat, s_i)?;
    let objs: Vec<SubId> = lt.objects().iter().copied().filter(|&o| level.lat.is_sub(o, s_i)).collect();
    let base = lt.clone();
    let filter: MorFilter = Arc::new(move |f: &Mor| Ok(base.adams(f, &psi)? == *f));
    let (sys, model) = restricted(lt.clone(), &amb, &objs, Some(filter))?;
    Ok(Stage { index, torus_level: op.degree_valuation(), base: s_i, ambient: amb, system: Arc::new(sys), model })
}

/// Subcategory of the telescopic system over `T[level] ⋊ π` generated by `ε(S_i)` and the full
/// automorphism groups of the listed subgroups.
pub fn generated_stage(level: &Level, lt: &Arc<TransporterSystem>, spec: &StageSpec, index: usize) -> Result<Stage> {
    if spec.level >= level.n() {
        return Err(Error::Truncation(format!("stage level {} needs a larger truncation than {}", spec.level, level.n())));
    }
    let lat = level.lat.clone();
    let grp = lat.group().clone();
    let s_i = level.level_sub(spec.level);
    let s_els = lat.elems(s_i).to_vec();
    let objs: Vec<SubId> = lt.objects().iter().copied().filter(|&o| lat.is_sub(o, s_i)).collect();
    // S_i-classes: c ↦ (representative, h) with h c h⁻¹ = representative
    let mut class_of: HashMap<SubId, (SubId, u32)> = HashMap::new();
    for &o in &objs {
        if class_of.contains_key(&o) {
            continue;
        }
        for &g in &s_els {
            class_of.entry(lat.conj(g, o)).or_insert((o, grp.inv(g)));
        }
    }
    let mut listed = Vec::new();
    for lits in &spec.full_aut {
        let r = level.sub_from_literals(lits)?;
        if !class_of.contains_key(&r) {
            return Err(Error::spec(format!("full_aut subgroup {} is not an object inside the stage", level.sub_label(r))));
        }
        listed.push(class_of[&r].0);
    }
    let mut allowed: HashMap<SubId, HashSet<Mor>> = HashMap::new();
    for &(r, _) in class_of.values() {
        if allowed.contains_key(&r) {
            continue;
        }
        let set: HashSet<Mor> = if listed.contains(&r) {
            lt.mor(r, r)?.iter().cloned().collect()
        } else {
            lat.normalizer(r).into_iter().filter(|g| s_els.binary_search(g).is_ok()).map(|g| lt.eps(r, r, g)).collect::<Result<_>>()?
        };
        allowed.insert(r, set);
    }
    let base = lt.clone();
    let filter: MorFilter = Arc::new(move |f: &Mor| {
        let blat = base.lattice();
        let img = base.rho(f)?.image(blat);
        let (Some(&(r, h)), Some(&(r2, k))) = (class_of.get(&f.src), class_of.get(&img)) else { return Ok(false) };
        if r != r2 {
            return Ok(false);
        }
        let incl = base.inclusion(img, f.dst)?;
        let mut psi = None;
        for m in base.mor(f.src, img)?.iter() {
            if base.compose(&incl, m)? == *f {
                psi = Some(m.clone());
                break;
            }
        }
        let Some(psi) = psi else { return Ok(false) };
        let g = blat.group();
        let a = base.compose(&base.eps(img, r, k)?, &base.compose(&psi, &base.eps(r, f.src, g.inv(h))?)?)?;
        Ok(allowed[&r].contains(&a))
    });
    let amb = SubAmbient::new(&lat, s_i)?;
    let (sys, model) = restricted(lt.clone(), &amb, &objs, Some(filter))?;
    Ok(Stage { index, torus_level: spec.level, base: s_i, ambient: amb, system: Arc::new(sys), model })
}

#[derive(Clone, Debug, Serialize)]
pub struct KleinClass {
    pub subgroup: String,
    pub aut_order: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct AutIdent {
    pub subgroup: String,
    pub aut: GroupSignature,
}

#[derive(Clone, Debug, Serialize)]
pub struct StageReport {
    pub index: usize,
    pub order: usize,
    pub torus_level: u32,
    pub objects: usize,
    pub morphisms: usize,
    pub classes: usize,
    pub klein: Vec<KleinClass>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub signature: Option<String>,
    pub automorphisms: Vec<AutIdent>,
    pub axioms: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub axiom_witness: Option<String>,
    pub saturated: bool,
    pub h_generation: bool,
    pub centric_radicals_in_objects: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub included_next: Option<bool>,
    pub pass: bool,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct ConditionCheck {
    pub checked: usize,
    pub failures: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<String>,
}

impl ConditionCheck {
    fn record(&mut self, ok: bool, w: impl FnOnce() -> String) {
        self.checked += 1;
        if !ok {
            self.failures += 1;
            if self.witness.is_none() {
                self.witness = Some(w());
            }
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ApproxReport {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub zeta: Option<i64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub family: Option<String>,
    pub escalations: u32,
    pub truncation: u32,
    pub stages: Vec<StageReport>,
    /// Condition (i): `S_i ≤ S_{i+1}` with strictly growing torus part.
    pub nested: bool,
    pub exhausts: bool,
    /// Condition (iii) on the generating sample and composites.
    pub condition_iii: ConditionCheck,
    /// `Hom_F(P,S) = Inn(S) ∘ Hom_{F_{i+1}}(P,S_{i+1})` for `P ≤ S_i`.
    pub finite_morphisms: ConditionCheck,
    /// `F_last` and `Inn(S)` generate the level fusion system.
    pub generates: bool,
    pub pass: bool,
}

fn stage_report(level: &Level, stages: &[Stage], i: usize) -> Result<StageReport> {
    let st = &stages[i];
    let f = st.fusion();
    let lat = &st.ambient.lat;
    let up = |p: SubId| level.sub_label(st.ambient.up[p]);
    let ax = check_axioms(&st.system)?;
    let sat = f.is_saturated()?;
    let hgen = f.check_h_generation(st.system.objects())?;
    let objs: HashSet<SubId> = st.system.objects().iter().copied().collect();
    let cr = f.centric_radicals()?;
    let cr_in = cr.iter().all(|c| objs.contains(c));
    let classes = f.classes()?;
    let mut klein = Vec::new();
    for c in &classes {
        let r = c.representative;
        if lat.size(r) == 4 && lat.elems(r).iter().all(|&x| lat.group().mul(x, x) == 0) {
            klein.push(KleinClass { subgroup: up(r), aut_order: f.aut(r)?.maps.len() });
        }
    }
    let signature = if klein.is_empty() {
        None
    } else {
        let k3 = klein.iter().filter(|k| k.aut_order % 3 == 0).count();
        Some(match k3 {
            0 => "nilpotent-type".to_string(),
            1 => "PGL2-type".to_string(),
            2 => "PSL2-type".to_string(),
            _ => format!("{k3} Klein classes with Σ3"),
        })
    };
    let mut automorphisms = Vec::new();
    let mut seen = HashSet::new();
    for r in std::iter::once(lat.whole()).chain(cr.iter().copied()) {
        let rep = f.fclass(r)?.representative;
        if seen.insert(rep) {
            automorphisms.push(AutIdent { subgroup: up(rep), aut: f.aut(rep)?.group.signature() });
        }
    }
    let included_next = match stages.get(i + 1) {
        None => None,
        Some(next) => Some(included(st, next)?),
    };
    let pass = ax.pass && sat.saturated && hgen.pass && cr_in && included_next.unwrap_or(true);
    let axiom_witness = ax.axioms.iter().find(|a| !a.pass).map(|a| format!("{}: {}", a.axiom, a.witness.clone().unwrap_or_default()));
    Ok(StageReport {
        index: st.index,
        order: lat.group().size(),
        torus_level: st.torus_level,
        objects: ax.objects,
        morphisms: ax.morphisms,
        classes: classes.len(),
        klein,
        signature,
        automorphisms,
        axioms: ax.pass,
        axiom_witness,
        saturated: sat.saturated,
        h_generation: hgen.pass,
        centric_radicals_in_objects: cr_in,
        included_next,
        pass,
    })
}

/// `L_i ⊆ L_{i+1}` on objects and morphisms.
fn included(a: &Stage, b: &Stage) -> Result<bool> {
    let ua: Vec<SubId> = a.system.objects().iter().map(|&o| a.model.up(o)).collect();
    let mut down_b: HashMap<SubId, SubId> = HashMap::new();
    for &o in b.system.objects() {
        down_b.insert(b.model.up(o), o);
    }
    if ua.iter().any(|o| !down_b.contains_key(o)) {
        return Ok(false);
    }
    for &p in a.system.objects() {
        for &q in a.system.objects() {
            let (bp, bq) = (down_b[&a.model.up(p)], down_b[&a.model.up(q)]);
            let mb: HashSet<Mor> = b.system.mor(bp, bq)?.iter().map(|f| b.model.lift(f)).collect();
            if a.system.mor(p, q)?.iter().any(|f| !mb.contains(&a.model.lift(f))) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Does some stage carry a restriction of `φ` (condition (iii))?
fn restricts(level: &Level, lt: &TransporterSystem, stages: &[Stage], phi: &Mor) -> Result<bool> {
    let lat = &level.lat;
    for st in stages {
        let (pi, qi) = (lat.meet(phi.src, st.base), lat.meet(phi.dst, st.base));
        if !lt.is_object(pi) || !lt.is_object(qi) {
            continue;
        }
        let (Some(lp), Some(lq)) = (st.local(level, pi), st.local(level, qi)) else { continue };
        let target = lt.compose(phi, &lt.inclusion(pi, phi.src)?)?;
        let incl = lt.inclusion(qi, phi.dst)?;
        for m in st.system.mor(lp, lq)?.iter() {
            if lt.compose(&incl, &st.model.lift(m))? == target {
                return Ok(true);
            }
        }
    }
    Ok(false)
}

fn condition_iii(level: &Level, lt: &TransporterSystem, stages: &[Stage]) -> Result<ConditionCheck> {
    let lat = &level.lat;
    let last = stages.last().unwrap().base;
    let visible = |p: SubId| lt.is_object(lat.meet(p, last));
    let gens = lat.gens(last).to_vec();
    let top = lat.whole();
    let mut pool: Vec<Mor> = Vec::new();
    let reps: Vec<SubId> = lt.object_reps().into_iter().filter(|&p| visible(p)).collect();
    for &p in &reps {
        for &g in &gens {
            let q = lat.conj(g, p);
            pool.push(lt.eps(p, q, g)?);
        }
        pool.push(lt.inclusion(p, top)?);
        if lat.is_sub(p, last) && lat.is_sub(lat.normalizer_id(p), last) {
            pool.extend(lt.mor(p, p)?.iter().cloned());
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(SAMPLE_SEED);
    let s_last = lat.elems(last).to_vec();
    let mut composites = Vec::new();
    let mut tries = 0;
    while composites.len() < SAMPLE_COMPOSITES && tries < 20 * SAMPLE_COMPOSITES && !pool.is_empty() {
        tries += 1;
        let mut f = pool[rng.gen_range(0..pool.len())].clone();
        for _ in 0..2 {
            let next: Vec<&Mor> = pool.iter().filter(|m| m.src == f.dst).collect();
            let g = if !next.is_empty() && rng.gen_bool(0.5) {
                next[rng.gen_range(0..next.len())].clone()
            } else {
                let x = s_last[rng.gen_range(0..s_last.len())];
                let q = lat.conj(x, f.dst);
                lt.eps(f.dst, q, x)?
            };
            f = lt.compose(&g, &f)?;
        }
        if visible(f.src) && visible(f.dst) {
            composites.push(f);
        }
    }
    let mut out = ConditionCheck::default();
    for phi in pool.iter().chain(&composites) {
        let ok = restricts(level, lt, stages, phi)?;
        out.record(ok, || format!("{} → {} {:?} has no restriction to a stage", level.sub_label(phi.src), level.sub_label(phi.dst), phi.key));
    }
    Ok(out)
}

fn finite_morphisms(level: &Level, stages: &[Stage]) -> Result<ConditionCheck> {
    let lat = &level.lat;
    let f = &level.fusion;
    let mut out = ConditionCheck::default();
    for w in stages.windows(2) {
        let (a, b) = (&w[0], &w[1]);
        for cl in a.ambient.lat.classes() {
            let p = a.model.up(cl[0]);
            let lp = b.local(level, p).unwrap();
            let gammas: Vec<Morph> = b
                .fusion()
                .hom_set(lp, b.ambient.lat.whole())?
                .into_iter()
                .map(|g| {
                    let map: Vec<u32> = g.map.iter().map(|&x| b.ambient.emb[x as usize]).collect();
                    let mut im = map.clone();
                    im.sort_unstable();
                    Morph { dom: p, cod: lat.id_of(&im).unwrap(), map }
                })
                .collect();
            for h in f.hom_set(p, lat.whole())? {
                let img = h.image(lat);
                let ok = gammas.iter().any(|gm| {
                    lat.transporter(gm.cod, img)
                        .into_iter()
                        .any(|g| gm.map.iter().zip(&h.map).all(|(&x, &y)| lat.group().conj(g, x) == y))
                });
                out.record(ok, || format!("a morphism on {} does not factor through stage {}", level.sub_label(p), b.index));
            }
        }
    }
    Ok(out)
}

fn generates(level: &Level, last: &Stage) -> Result<bool> {
    let lat = &level.lat;
    let f = last.fusion();
    let llat = &last.ambient.lat;
    let mut gens = Vec::new();
    for cl in llat.classes() {
        for g in f.hom_set(cl[0], llat.whole())? {
            let map: Vec<u32> = g.map.iter().map(|&x| last.ambient.emb[x as usize]).collect();
            let mut im = map.clone();
            im.sort_unstable();
            gens.push(Morph { dom: last.model.up(cl[0]), cod: lat.id_of(&im).unwrap(), map });
        }
    }
    FusionSystem::new(lat.clone(), gens, level.fusion.cap())?.same_as(&level.fusion)
}

/// Certificates for a stage family: per-stage axioms, saturation, centric-radical containment and
/// inclusion, then conditions (i) and (iii) and the generation checks.
pub fn certify(level: &Level, lt: &TransporterSystem, stages: &[Stage]) -> Result<ApproxReport> {
    if stages.is_empty() {
        return Err(Error::pre("no stages"));
    }
    let reports = (0..stages.len()).map(|i| stage_report(level, stages, i)).collect::<Result<Vec<_>>>()?;
    let lat = &level.lat;
    let nested = stages.windows(2).all(|w| {
        lat.is_sub(w[0].base, w[1].base) && lat.size(level.torus_part(w[0].base)) < lat.size(level.torus_part(w[1].base))
    });
    let exhausts = stages.last().unwrap().base == lat.whole();
    let condition_iii = condition_iii(level, lt, stages)?;
    let finite_morphisms = finite_morphisms(level, stages)?;
    let generates = generates(level, stages.last().unwrap())?;
    let pass = reports.iter().all(|r| r.pass)
        && nested
        && condition_iii.failures == 0
        && finite_morphisms.failures == 0
        && generates;
    Ok(ApproxReport {
        zeta: None,
        family: None,
        escalations: 0,
        truncation: level.n(),
        stages: reports,
        nested,
        exhausts,
        condition_iii,
        finite_morphisms,
        generates,
        pass,
    })
}

pub struct Approximation {
    pub operation: AdamsOperation,
    pub telescopic: Arc<TransporterSystem>,
    pub stages: Vec<Stage>,
    pub report: ApproxReport,
}

/// Stages `i = 0..steps` from the fixed points of `Ψ^{p^i}` on the telescopic extension of `l`.
/// A failing certificate re-runs with `Ψ^p`, at most [`MAX_ESCALATIONS`] times.
pub fn approximate(level: &Level, l: Arc<TransporterSystem>, zeta: i64, steps: usize) -> Result<Approximation> {
    if steps == 0 {
        return Err(Error::pre("at least one stage is required"));
    }
    let pair = bullet_data(level)?;
    let lt = Arc::new(telescopic_extend(l, &pair)?);
    let mut op = AdamsOperation::new(level.ambient.p(), zeta)?;
    let mut escalations = 0;
    loop {
        let attempt = (|| -> Result<(Vec<Stage>, ApproxReport)> {
            let mut stages = Vec::new();
            let mut o = op.clone();
            for i in 0..steps {
                stages.push(fixed_category(level, &lt, &o, i)?);
                o = o.power();
            }
            let rep = certify(level, &lt, &stages)?;
            Ok((stages, rep))
        })();
        match attempt {
            Ok((stages, mut report)) if report.pass || escalations >= MAX_ESCALATIONS => {
                report.zeta = Some(zeta);
                report.escalations = escalations;
                return Ok(Approximation { operation: op, telescopic: lt, stages, report });
            }
            Err(e) if escalations >= MAX_ESCALATIONS || !matches!(e, Error::Failed(_)) => return Err(e),
            _ => {
                op = op.power();
                escalations += 1;
            }
        }
    }
}

/// Checks a hand-specified stage family against the telescopic extension of `l`.
pub fn verify_approximation(level: &Level, l: Arc<TransporterSystem>, family: &StageFamilySpec) -> Result<ApproxReport> {
    let pair = bullet_data(level)?;
    let lt = Arc::new(telescopic_extend(l, &pair)?);
    let stages = family
        .stages
        .iter()
        .enumerate()
        .map(|(i, s)| generated_stage(level, &lt, s, i))
        .collect::<Result<Vec<_>>>()?;
    let mut report = certify(level, &lt, &stages)?;
    report.family = Some(family.name.clone());
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ptoral::DEFAULT_CAP;

    #[test]
    fn degrees_and_valuations() {
        let op = AdamsOperation::new(2, 5).unwrap();
        assert_eq!(op.degree_valuation(), 2);
        assert_eq!(op.power().degree_mod(10), 25);
        assert_eq!(op.power().degree_valuation(), 3);
        assert_eq!(op.power().power().degree_valuation(), 4);
        assert!(matches!(AdamsOperation::new(2, 1), Err(Error::DegreeOne)));
        assert!(AdamsOperation::new(2, 4).is_err());
        assert_eq!(AdamsOperation::new(3, 4).unwrap().degree_valuation(), 1);
    }

    #[test]
    fn fixed_subgroups_of_the_dihedral_ambient() {
        let amb = AmbientGroup::dihedral(6).unwrap();
        let lv = Level::new(&amb, &[], vec![], DEFAULT_CAP).unwrap();
        let op = AdamsOperation::new(2, 5).unwrap();
        assert_eq!(lv.lat.size(op.fixed_subgroup(&lv).unwrap()), 8);
        assert_eq!(lv.lat.size(op.power().fixed_subgroup(&lv).unwrap()), 16);
        let deep = op.power().power().power().power();
        assert!(matches!(deep.fixed_subgroup(&lv), Err(Error::Truncation(_))));
        let t2 = amb.torus_basis(0, 2);
        assert_eq!(op.apply(&amb, &t2), t2);
        let t3 = amb.torus_basis(0, 3);
        assert_ne!(op.apply(&amb, &t3), t3);
    }
}

#[cfg(test)]
mod so3_tests {
    use super::*;
    use crate::catalog;
    use crate::ptoral::DEFAULT_CAP;
    use crate::transporter::from_spec;

    fn so3(n: u32) -> (Level, Arc<TransporterSystem>, crate::spec::SpecDocument) {
        let doc = catalog::load("dihedral-so3").unwrap();
        let lv = Level::from_doc(&doc, Some(n), DEFAULT_CAP).unwrap();
        let t = from_spec(&lv, doc.transporter.as_ref().unwrap()).unwrap();
        (lv, Arc::new(t), doc)
    }

    #[test]
    fn so3_approximation_at_six() {
        let (lv, l, _) = so3(6);
        let a = approximate(&lv, l, 5, 3).unwrap();
        let r = &a.report;
        assert!(r.pass, "{}", serde_json::to_string_pretty(r).unwrap());
        let orders: Vec<usize> = r.stages.iter().map(|s| s.order).collect();
        assert_eq!(orders, vec![8, 16, 32]);
        for s in &r.stages {
            assert_eq!(s.signature.as_deref(), Some("PGL2-type"));
        }
    }

    #[test]
    fn so3_families_at_six() {
        let (lv, l, doc) = so3(6);
        for fam in &doc.families {
            let r = verify_approximation(&lv, l.clone(), fam).unwrap();
            let expect = fam.name != "negative";
            assert_eq!(r.pass, expect, "{}: {}", fam.name, serde_json::to_string_pretty(&r).unwrap());
        }
    }
}
