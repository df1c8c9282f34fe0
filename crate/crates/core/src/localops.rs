//! Normalizer, centralizer and quotient fusion systems; component data for maps out of
//! finite p-groups.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::sync::Arc;

use serde::Serialize;

use crate::compact::Level;
use crate::error::{Error, Result};
use crate::finfusion::{FusionSystem, Morph};
use crate::group::{small_gens, FinGroup, Lattice, SubId};
use crate::transporter::SubAmbient;

/// A subgroup `K ≤ Aut(A)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum AutK {
    Identity,
    Full,
    /// Image vectors over the elements of `A`.
    Maps(Vec<Vec<u32>>),
}

impl AutK {
    fn contains(&self, map: &[u32], els: &[u32]) -> bool {
        match self {
            AutK::Identity => map == els,
            AutK::Full => true,
            AutK::Maps(m) => m.iter().any(|k| k == map),
        }
    }

    /// `f K f⁻¹` for an isomorphism `f : A → B`.
    fn transport(&self, lat: &Lattice, f: &Morph) -> AutK {
        match self {
            AutK::Maps(ms) => {
                let a = lat.elems(f.dom);
                let b = lat.elems(f.cod);
                let inv = f.inverse(lat);
                let out = ms
                    .iter()
                    .map(|k| {
                        b.iter()
                            .map(|&y| {
                                let x = inv.apply(lat, y);
                                f.map[a.binary_search(&k[a.binary_search(&x).unwrap()]).unwrap()]
                            })
                            .collect()
                    })
                    .collect();
                AutK::Maps(out)
            }
            k => k.clone(),
        }
    }
}

/// `N_S^K(A) = {g ∈ N_S(A) : c_g|_A ∈ K}`.
pub fn k_normalizer(lat: &Lattice, a: SubId, k: &AutK) -> SubId {
    let els = lat.elems(a);
    let g = lat.group();
    let n: Vec<u32> = match k {
        AutK::Identity => lat.centralizer(a),
        AutK::Full => lat.normalizer(a),
        AutK::Maps(_) => lat
            .normalizer(a)
            .into_iter()
            .filter(|&x| {
                let m: Vec<u32> = els.iter().map(|&y| g.conj(x, y)).collect();
                k.contains(&m, els)
            })
            .collect(),
    };
    lat.id_of(&n).expect("K-normalizer is a subgroup")
}

pub fn is_fully_k_normalized(f: &FusionSystem, a: SubId, k: &AutK) -> Result<bool> {
    let lat = f.lattice();
    let own = lat.size(k_normalizer(lat, a, k));
    for iso in f.isos(a)? {
        let kb = k.transport(lat, &iso);
        if lat.size(k_normalizer(lat, iso.cod, &kb)) > own {
            return Ok(false);
        }
    }
    Ok(true)
}

/// A fusion system over a subgroup `S' ≤ S`, with the embedding data back into `S`.
pub struct LocalFusion {
    pub fusion: FusionSystem,
    pub ambient: SubAmbient,
    /// `S'` as a subgroup of `S`.
    pub base: SubId,
}

impl LocalFusion {
    /// Translates a local subgroup to the base lattice.
    pub fn up(&self, p: SubId) -> SubId {
        self.ambient.up[p]
    }
}

fn whole_ambient(lat: &Arc<Lattice>) -> SubAmbient {
    let n = lat.group().size() as u32;
    SubAmbient {
        lat: lat.clone(),
        emb: (0..n).collect(),
        pos: (0..n).map(|i| (i, i)).collect(),
        up: (0..lat.len()).collect(),
    }
}

fn ambient_for(lat: &Arc<Lattice>, sub: SubId) -> Result<SubAmbient> {
    if sub == lat.whole() {
        Ok(whole_ambient(lat))
    } else {
        SubAmbient::new(lat, sub)
    }
}

/// `N_F^K(A)`: restrictions of F-morphisms `PA → S` that normalize `A` acting on it through `K`.
pub fn normalizer_fusion(f: &FusionSystem, a: SubId, k: &AutK) -> Result<LocalFusion> {
    if !is_fully_k_normalized(f, a, k)? {
        return Err(Error::pre(format!("subgroup {a} is not fully K-normalized")));
    }
    let lat = f.lattice().clone();
    let n = k_normalizer(&lat, a, k);
    let amb = ambient_for(&lat, n)?;
    let a_els = lat.elems(a);
    let mut gens = Vec::new();
    let mut seen = HashSet::new();
    let mut done = HashSet::new();
    for x in lat.subgroups_of(n) {
        if !lat.is_sub(a, x) {
            continue;
        }
        let local = amb.down(&lat, x).unwrap();
        if !done.insert(amb.lat.class(local)[0]) {
            continue;
        }
        let x_els = lat.elems(x);
        let pos: Vec<usize> = a_els.iter().map(|y| x_els.binary_search(y).unwrap()).collect();
        for phi in f.hom_set(x, n)? {
            let on_a: Vec<u32> = pos.iter().map(|&i| phi.map[i]).collect();
            let mut img = on_a.clone();
            img.sort_unstable();
            if img != a_els || !k.contains(&on_a, a_els) {
                continue;
            }
            let map: Vec<u32> = phi.map.iter().map(|y| amb.pos[y]).collect();
            if seen.insert((local, map.clone())) {
                let mut im = map.clone();
                im.sort_unstable();
                let cod = amb.lat.id_of(&im).unwrap();
                gens.push(Morph { dom: local, cod, map });
            }
        }
    }
    let fusion = FusionSystem::new(amb.lat.clone(), gens, f.cap())?;
    Ok(LocalFusion { fusion, ambient: amb, base: n })
}

/// `C_F(A)`, the case `K = {Id}`.
pub fn centralizer_fusion(f: &FusionSystem, a: SubId) -> Result<LocalFusion> {
    normalizer_fusion(f, a, &AutK::Identity)
}

fn reproduces(f: &FusionSystem, a: SubId, k: &AutK) -> Result<bool> {
    let lat = f.lattice();
    if k_normalizer(lat, a, k) != lat.whole() {
        return Ok(false);
    }
    let local = normalizer_fusion(f, a, k)?;
    local.fusion.same_as(f)
}

/// `C_F(A) = F`.
pub fn is_central(f: &FusionSystem, a: SubId) -> Result<bool> {
    reproduces(f, a, &AutK::Identity)
}

/// `N_F(A) = F`.
pub fn is_normal(f: &FusionSystem, a: SubId) -> Result<bool> {
    reproduces(f, a, &AutK::Full)
}

/// `F/A` over `S/A`, with the projection `S → S/A`.
pub fn quotient_fusion(f: &FusionSystem, a: SubId) -> Result<(FusionSystem, Vec<u32>)> {
    if !is_normal(f, a)? {
        return Err(Error::pre(format!("subgroup {a} is not normal in the fusion system")));
    }
    let lat = f.lattice();
    let (qg, proj) = lat.group().quotient(lat.elems(a))?;
    let qlat = Arc::new(Lattice::new(Arc::new(qg), lat.p())?);
    let down = |p: SubId| -> SubId {
        let mut v: Vec<u32> = lat.elems(p).iter().map(|&x| proj[x as usize]).collect();
        v.sort_unstable();
        v.dedup();
        qlat.id_of(&v).unwrap()
    };
    let mut gens = Vec::new();
    let mut seen = HashSet::new();
    for cl in lat.classes() {
        let p = cl[0];
        if !lat.is_sub(a, p) {
            continue;
        }
        let pb = down(p);
        let p_els = lat.elems(p);
        for phi in f.hom_set(p, lat.whole())? {
            let map: Vec<u32> = qlat
                .elems(pb)
                .iter()
                .map(|&xb| {
                    let x = p_els.iter().copied().find(|&x| proj[x as usize] == xb).unwrap();
                    proj[phi.apply(lat, x) as usize]
                })
                .collect();
            if seen.insert((pb, map.clone())) {
                gens.push(Morph { dom: pb, cod: down(phi.image(lat)), map });
            }
        }
    }
    Ok((FusionSystem::new(qlat, gens, f.cap())?, proj))
}

#[derive(Clone, Debug, Serialize)]
pub struct FiltrationStep {
    pub level: u32,
    pub subgroup: String,
    pub same_centralizer: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct CentralizerInvariance {
    pub subgroup: String,
    pub star: String,
    pub fully_centralized_iff: bool,
    pub same_centralizer_subgroup: bool,
    pub same_centralizer_fusion: bool,
    pub filtration: Vec<FiltrationStep>,
}

/// `C_S(P) = C_S(P★)` and `C_F(P) = C_F(P★)`, plus the filtration `P_n = (P ∩ T[n])·(P ∩ …)`
/// by torus levels with its centralizers.
pub fn bullet_centralizer_invariance(level: &Level, p: SubId) -> Result<CentralizerInvariance> {
    let f = &level.fusion;
    let lat = &level.lat;
    if !f.is_fully_centralized(p)? {
        return Err(Error::pre("subgroup is not fully centralized"));
    }
    let star = level.bullet()?.star;
    let ps = star[p];
    let fc_star = f.is_fully_centralized(ps)?;
    let same_sub = lat.centralizer(p) == lat.centralizer(ps);
    let same_fusion = if same_sub && fc_star {
        centralizer_fusion(f, p)?.fusion.same_as(&centralizer_fusion(f, ps)?.fusion)?
    } else {
        false
    };
    // P_n = ⟨P, T[n] ∩ P★⟩ grows from P towards P★
    let mut filtration = Vec::new();
    let c_p = centralizer_fusion(f, p)?;
    for n in 0..=level.n() {
        let t_n = lat.meet(level.level_sub(n), ps);
        let pn = lat.join(p, t_n);
        let same = lat.centralizer(pn) == lat.centralizer(p)
            && f.is_fully_centralized(pn)?
            && centralizer_fusion(f, pn)?.fusion.same_as(&c_p.fusion)?;
        filtration.push(FiltrationStep { level: n, subgroup: level.sub_label(pn), same_centralizer: same });
    }
    Ok(CentralizerInvariance {
        subgroup: level.sub_label(p),
        star: level.sub_label(ps),
        fully_centralized_iff: fc_star,
        same_centralizer_subgroup: same_sub,
        same_centralizer_fusion: same_fusion,
        filtration,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct Component {
    /// Images of the generators of `E`.
    pub images: Vec<u32>,
    pub image: SubId,
    pub image_order: usize,
    pub centralizer_order: usize,
    pub centralizer_classes: usize,
    pub centralizer_saturated: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct Components {
    pub source_order: usize,
    pub homomorphisms: usize,
    pub count: usize,
    pub components: Vec<Component>,
}

/// All homomorphisms `E → S` given by generator images.
pub fn homomorphisms(e: &FinGroup, gens: &[u32], s: &FinGroup) -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    let k = gens.len();
    let n = s.size() as u32;
    let mut imgs = vec![0u32; k];
    loop {
        if let Some(m) = extend_hom(e, gens, &imgs, s) {
            out.push(m);
        }
        let mut i = 0;
        while i < k {
            imgs[i] += 1;
            if imgs[i] < n {
                break;
            }
            imgs[i] = 0;
            i += 1;
        }
        if i == k {
            break;
        }
    }
    out
}

fn extend_hom(e: &FinGroup, gens: &[u32], imgs: &[u32], s: &FinGroup) -> Option<Vec<u32>> {
    let mut map = vec![u32::MAX; e.size()];
    map[0] = 0;
    let mut queue = vec![0u32];
    while let Some(x) = queue.pop() {
        for (g, &ig) in gens.iter().zip(imgs) {
            let y = e.mul(x, *g);
            let v = s.mul(map[x as usize], ig);
            if map[y as usize] == u32::MAX {
                map[y as usize] = v;
                queue.push(y);
            } else if map[y as usize] != v {
                return None;
            }
        }
    }
    Some(map)
}

/// Homomorphisms `E → S` up to post-composition with F, with centralizer data per class taken
/// at a fully centralized representative.
pub fn mapping_components(f: &FusionSystem, e: &FinGroup) -> Result<Components> {
    let lat = f.lattice();
    let s = lat.group();
    let gens = small_gens(e, &e.all());
    let homs = homomorphisms(e, &gens, s);
    let mut classes: BTreeMap<Vec<u32>, Vec<u32>> = BTreeMap::new();
    let mut image_cache: HashMap<SubId, Vec<Morph>> = HashMap::new();
    for h in &homs {
        let mut im: Vec<u32> = h.clone();
        im.sort_unstable();
        im.dedup();
        let img = lat.id_of(&im).unwrap();
        let isos = match image_cache.get(&img) {
            Some(v) => v.clone(),
            None => {
                let v = f.isos(img)?;
                image_cache.insert(img, v.clone());
                v
            }
        };
        let gi: Vec<u32> = gens.iter().map(|&g| h[g as usize]).collect();
        let canon = isos.iter().map(|m| gi.iter().map(|&x| m.apply(lat, x)).collect::<Vec<u32>>()).min().unwrap();
        classes.entry(canon).or_default();
    }
    let mut components = Vec::new();
    for canon in classes.keys() {
        let img = lat.generated(canon);
        // move to a fully centralized image inside the class
        let mut rep_img = img;
        let mut rep_gens = canon.clone();
        for iso in f.isos(img)? {
            if f.is_fully_centralized(iso.cod)? {
                rep_img = iso.cod;
                rep_gens = canon.iter().map(|&x| iso.apply(lat, x)).collect();
                break;
            }
        }
        let c = centralizer_fusion(f, rep_img)?;
        components.push(Component {
            images: rep_gens,
            image: rep_img,
            image_order: lat.size(rep_img),
            centralizer_order: lat.size(c.base),
            centralizer_classes: c.fusion.classes()?.len(),
            centralizer_saturated: c.fusion.is_saturated()?.saturated,
        });
    }
    Ok(Components { source_order: e.size(), homomorphisms: homs.len(), count: components.len(), components })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s4() -> FusionSystem {
        FusionSystem::from_group(&FinGroup::symmetric(4), 2).unwrap().0
    }

    #[test]
    fn s4_normal_subgroups() {
        let f = s4();
        let lat = f.lattice();
        let o2 = lat.id_of(&lat.group().generate(&[])).unwrap();
        assert!(is_central(&f, o2).unwrap());
        let v = (0..lat.len()).find(|&i| lat.size(i) == 4 && lat.is_normal_in(i, lat.whole()) && f.aut(i).unwrap().maps.len() == 6).unwrap();
        assert!(is_normal(&f, v).unwrap());
        assert!(!is_central(&f, v).unwrap());
        let (q, _) = quotient_fusion(&f, v).unwrap();
        assert_eq!(q.group().size(), 2);
        assert!(q.is_saturated().unwrap().saturated);
    }

    #[test]
    fn normalizer_of_s_is_f() {
        let f = s4();
        let s = f.s();
        let n = normalizer_fusion(&f, s, &AutK::Full).unwrap();
        assert!(n.fusion.same_as(&FusionSystem::inner(f.lattice().clone())).unwrap());
        assert!(!is_normal(&f, s).unwrap());
    }

    #[test]
    fn components_of_z2_in_s4() {
        // S4 has two classes of involutions, both meeting D8
        let f = s4();
        let c = mapping_components(&f, &FinGroup::cyclic(2)).unwrap();
        assert_eq!(c.count, 3);
        let triv = mapping_components(&f, &FinGroup::cyclic(1)).unwrap();
        assert_eq!(triv.count, 1);
    }
}
