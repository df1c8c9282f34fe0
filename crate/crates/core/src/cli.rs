//! Command-line front end: spec loading, command dispatch and reports.
//!
//! [`run`] takes the argument vector and returns the exit code with the rendered output, so
//! the binary is a thin wrapper and every command can be exercised in-process.

use std::ffi::OsString;
use std::path::Path;
use std::sync::Arc;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::adams;
use crate::catalog;
use crate::cohomology::{self, CoefficientModule};
use crate::compact::Level;
use crate::error::{Error, Result};
use crate::finfusion::{FusionSystem, SatWitness};
use crate::group::{FinGroup, SubId};
use crate::localops::{self, AutK};
use crate::ptoral::DEFAULT_CAP;
use crate::spec::{Literal, SpecDocument, TransporterSpec};
use crate::transporter::{self, RetractionPair, TransporterSystem};

#[derive(Parser, Debug)]
#[command(name = "plocal", version, about = "Fusion, transporter and cohomology computations for discrete p-toral groups")]
pub struct Cli {
    /// Torus truncation level N (p-toral specs only).
    #[arg(long, global = true)]
    pub truncation: Option<u32>,
    /// Bound on enumerations such as orbits and hom sets.
    #[arg(long, global = true, default_value_t = DEFAULT_CAP)]
    pub cap: usize,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    pub output: Format,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Text,
}

/// Spec file path, or the name of a built-in example.
#[derive(Args, Debug, Clone)]
pub struct SpecArg {
    #[arg(value_name = "SPEC", required_unless_present = "spec_file")]
    spec: Option<String>,
    #[arg(long = "spec", value_name = "SPEC", conflicts_with = "spec")]
    spec_file: Option<String>,
}

impl SpecArg {
    fn name(&self) -> &str {
        self.spec.as_deref().or(self.spec_file.as_deref()).unwrap_or_default()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum KArg {
    Identity,
    Full,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Run the saturation checker on the fusion system of the spec.
    CheckSaturation {
        #[command(flatten)]
        spec: SpecArg,
    },
    /// Check the transporter-system axioms.
    CheckTransporter {
        #[command(flatten)]
        spec: SpecArg,
        /// For finite groups: the centric linking system instead of the full transporter category.
        #[arg(long)]
        linking: bool,
    },
    /// The bullet construction and its retraction properties.
    Bullet {
        #[command(flatten)]
        spec: SpecArg,
    },
    /// Telescopic extension of the spec's transporter data.
    Telescope {
        #[command(flatten)]
        spec: SpecArg,
    },
    /// Finite approximation by fixed points of an unstable Adams operation.
    Approximate {
        #[command(flatten)]
        spec: SpecArg,
        #[arg(long, allow_hyphen_values = true)]
        zeta: Option<i64>,
        #[arg(long, default_value_t = 3)]
        steps: usize,
    },
    /// Check hand-specified stage families against the approximation conditions.
    VerifyApproximation {
        #[command(flatten)]
        spec: SpecArg,
        #[arg(long)]
        family: Option<String>,
    },
    /// Quotient by a normal subgroup.
    Quotient {
        #[command(flatten)]
        spec: SpecArg,
        #[arg(long)]
        subgroup: String,
    },
    /// Centralizer fusion system C_F(A).
    Centralizer {
        #[command(flatten)]
        spec: SpecArg,
        #[arg(long)]
        subgroup: String,
    },
    /// Normalizer fusion system N_F^K(A).
    Normalizer {
        #[command(flatten)]
        spec: SpecArg,
        #[arg(long)]
        subgroup: String,
        #[arg(long, value_enum, default_value_t = KArg::Full)]
        k: KArg,
    },
    /// Components of Rep_F(E, S) for a finite abelian E.
    Components {
        #[command(flatten)]
        spec: SpecArg,
        /// `Z/n` factors joined by `x`, e.g. `Z/2xZ/2`.
        #[arg(long, default_value = "Z/2")]
        source: String,
    },
    /// Stable elements H^n(F; M).
    Stable {
        #[command(flatten)]
        spec: SpecArg,
        #[arg(long)]
        degree: u32,
        #[arg(long, default_value = "Z/2")]
        coeff: String,
    },
    /// E2^{n,m} for a strongly closed R.
    E2page {
        #[command(flatten)]
        spec: SpecArg,
        #[arg(long = "R")]
        r: Option<String>,
        #[arg(long)]
        n: u32,
        #[arg(long)]
        m: u32,
        #[arg(long, default_value = "Z/2")]
        coeff: String,
    },
    /// Built-in example specs.
    Examples {
        #[arg(long)]
        list: bool,
        #[arg(long, value_name = "NAME")]
        show: Option<String>,
    },
}

/// Exit code and rendered streams of one invocation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

/// A command result: exit code, headline lines for text output, and the full JSON body.
#[derive(Debug, Clone)]
pub struct Report {
    pub code: i32,
    pub lines: Vec<String>,
    pub body: Value,
}

impl Report {
    fn new(code: i32, lines: Vec<String>, body: Value) -> Self {
        Report { code, lines, body }
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Json => serde_json::to_string_pretty(&self.body).expect("report serializes") + "\n",
            Format::Text => {
                let mut out = String::new();
                for l in &self.lines {
                    out.push_str(l);
                    out.push('\n');
                }
                if let Value::Object(m) = &self.body {
                    for (k, v) in m {
                        if let Some(s) = scalar_text(v) {
                            out.push_str(&format!("{k}: {s}\n"));
                        }
                    }
                }
                out
            }
        }
    }
}

fn scalar_text(v: &Value) -> Option<String> {
    match v {
        Value::Null => None,
        Value::String(s) => Some(s.clone()),
        Value::Bool(_) | Value::Number(_) => Some(v.to_string()),
        Value::Array(a) if a.iter().all(|x| matches!(x, Value::Bool(_) | Value::Number(_) | Value::String(_))) => {
            Some(serde_json::to_string(a).expect("array serializes"))
        }
        _ => None,
    }
}

pub fn run<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    run_with(args, None)
}

/// [`run`] against an already parsed document; the spec argument is then only a label.
pub fn run_with<I, T>(args: I, pre: Option<&SpecDocument>) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => Outcome { code: 0, stdout: text, stderr: String::new() },
                _ => Outcome { code: 2, stdout: String::new(), stderr: text },
            };
        }
    };
    match execute_with(&cli, pre) {
        Ok(r) => Outcome { code: r.code, stdout: r.render(cli.output), stderr: String::new() },
        Err(e) => {
            let code = e.exit_code();
            let stderr = match cli.output {
                Format::Json => serde_json::to_string_pretty(&json!({ "error": e.to_string(), "exit_code": code })).unwrap() + "\n",
                Format::Text => format!("error: {e}\n"),
            };
            Outcome { code, stdout: String::new(), stderr }
        }
    }
}

/// Reads a spec file, falling back to a built-in example named by the argument or its file stem.
pub fn load_spec(arg: &str) -> Result<SpecDocument> {
    let path = Path::new(arg);
    if path.is_file() {
        return SpecDocument::parse(&std::fs::read_to_string(path)?);
    }
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or(arg);
    if catalog::find(stem).is_some() {
        return catalog::load(stem);
    }
    Err(Error::spec(format!("`{arg}` is neither a readable file nor a built-in example")))
}

enum Ctx {
    Finite { doc: SpecDocument, g: FinGroup, perms: Vec<Vec<u32>>, syl: Vec<u32>, fusion: Arc<FusionSystem> },
    Compact { doc: SpecDocument, level: Level },
}

impl Ctx {
    fn load(cli: &Cli, pre: Option<&SpecDocument>, spec: &SpecArg) -> Result<Ctx> {
        let doc = match pre {
            Some(d) => d.clone(),
            None => load_spec(spec.name())?,
        };
        if let Some(gs) = &doc.group {
            let (g, perms) = FinGroup::from_perms(&gs.permutations)?;
            let (f, syl) = FusionSystem::from_group(&g, doc.p)?;
            let fusion = Arc::new(f.with_cap(cli.cap));
            Ok(Ctx::Finite { doc, g, perms, syl, fusion })
        } else {
            let level = Level::from_doc(&doc, cli.truncation, cli.cap)?;
            Ok(Ctx::Compact { doc, level })
        }
    }

    fn doc(&self) -> &SpecDocument {
        match self {
            Ctx::Finite { doc, .. } | Ctx::Compact { doc, .. } => doc,
        }
    }

    fn fusion(&self) -> &FusionSystem {
        match self {
            Ctx::Finite { fusion, .. } => fusion,
            Ctx::Compact { level, .. } => &level.fusion,
        }
    }

    fn level(&self, what: &str) -> Result<&Level> {
        match self {
            Ctx::Compact { level, .. } => Ok(level),
            Ctx::Finite { .. } => Err(Error::spec(format!("{what} needs a p-toral ambient, not a finite group"))),
        }
    }

    fn transporter_spec(&self) -> Result<&TransporterSpec> {
        self.doc().transporter.as_ref().ok_or_else(|| Error::spec("the spec has no `transporter` section"))
    }

    fn truncation(&self) -> Option<u32> {
        match self {
            Ctx::Compact { level, .. } => Some(level.n()),
            Ctx::Finite { .. } => None,
        }
    }

    /// `S`, `1`, `Z` (centre of S), `T` (torus), or a JSON list of generators: element
    /// literals for p-toral specs, permutations for finite groups.
    fn subgroup(&self, text: &str) -> Result<SubId> {
        let lat = self.fusion().lattice();
        match text.trim() {
            "S" => return Ok(lat.whole()),
            "1" => return Ok(lat.trivial()),
            "Z" => return Ok(lat.centralizer_id(lat.whole())),
            "T" => return Ok(self.level("the torus")?.torus()),
            _ => {}
        }
        match self {
            Ctx::Finite { perms, syl, .. } => {
                let gens: Vec<Vec<u32>> = serde_json::from_str(text)
                    .map_err(|e| Error::spec(format!("subgroup must be a JSON list of permutations: {e}")))?;
                let mut local = Vec::new();
                for gen in &gens {
                    let i = syl
                        .iter()
                        .position(|&x| &perms[x as usize] == gen)
                        .ok_or_else(|| Error::spec(format!("{gen:?} is not in the Sylow subgroup")))?;
                    local.push(i as u32);
                }
                Ok(lat.generated(&local))
            }
            Ctx::Compact { level, .. } => {
                let lits: Vec<Literal> = serde_json::from_str(text)
                    .map_err(|e| Error::spec(format!("subgroup must be a JSON list of element literals: {e}")))?;
                level.sub_from_literals(&lits)
            }
        }
    }

    fn label(&self, id: SubId) -> String {
        match self {
            Ctx::Finite { perms, syl, fusion, .. } => {
                let g: Vec<String> = fusion
                    .lattice()
                    .gens(id)
                    .iter()
                    .map(|&x| serde_json::to_string(&perms[syl[x as usize] as usize]).unwrap())
                    .collect();
                format!("<{}>", g.join(","))
            }
            Ctx::Compact { level, .. } => level.sub_label(id),
        }
    }

    fn base_system(&self) -> Result<TransporterSystem> {
        match self {
            Ctx::Finite { g, doc, .. } => transporter::from_group(g, doc.p, None),
            Ctx::Compact { level, .. } => transporter::from_spec(level, self.transporter_spec()?),
        }
    }
}

fn header(cmd: &str, spec: &SpecArg, ctx: &Ctx) -> Map<String, Value> {
    let doc = ctx.doc();
    let mut m = Map::new();
    m.insert("command".into(), json!(cmd));
    m.insert("spec".into(), json!(doc.name.clone().unwrap_or_else(|| spec.name().to_string())));
    m.insert("p".into(), json!(doc.p));
    if let Some(n) = ctx.truncation() {
        m.insert("truncation".into(), json!(n));
    }
    m.insert("sylow_order".into(), json!(ctx.fusion().lattice().size(ctx.fusion().s())));
    m
}

fn to_value<T: Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("report serializes")
}

fn verdict(pass: bool) -> &'static str {
    if pass {
        "pass"
    } else {
        "FAIL"
    }
}

fn code(pass: bool) -> i32 {
    if pass {
        0
    } else {
        1
    }
}

pub fn execute(cli: &Cli) -> Result<Report> {
    execute_with(cli, None)
}

/// Runs a parsed command; a preloaded document replaces the spec argument.
pub fn execute_with(cli: &Cli, pre: Option<&SpecDocument>) -> Result<Report> {
    match &cli.command {
        Command::CheckSaturation { spec } => check_saturation(cli, pre, spec),
        Command::CheckTransporter { spec, linking } => check_transporter(cli, pre, spec, *linking),
        Command::Bullet { spec } => bullet(cli, pre, spec),
        Command::Telescope { spec } => telescope(cli, pre, spec),
        Command::Approximate { spec, zeta, steps } => approximate(cli, pre, spec, *zeta, *steps),
        Command::VerifyApproximation { spec, family } => verify(cli, pre, spec, family.as_deref()),
        Command::Quotient { spec, subgroup } => quotient(cli, pre, spec, subgroup),
        Command::Centralizer { spec, subgroup } => centralizer(cli, pre, spec, subgroup),
        Command::Normalizer { spec, subgroup, k } => normalizer(cli, pre, spec, subgroup, *k),
        Command::Components { spec, source } => components(cli, pre, spec, source),
        Command::Stable { spec, degree, coeff } => stable(cli, pre, spec, *degree, coeff),
        Command::E2page { spec, r, n, m, coeff } => e2page(cli, pre, spec, r.as_deref(), *n, *m, coeff),
        Command::Examples { list: _, show } => examples(show.as_deref()),
    }
}

fn witness_json(ctx: &Ctx, w: &SatWitness) -> (String, Value) {
    match w {
        SatWitness::AxiomI { subgroup, reason } => (
            format!("axiom I fails at {}: {reason}", ctx.label(*subgroup)),
            json!({ "axiom": "I", "subgroup": ctx.label(*subgroup), "reason": reason }),
        ),
        SatWitness::AxiomII { map, n_f } => (
            format!("axiom II fails for {} -> {} (N_f = {})", ctx.label(map.domain), ctx.label(map.image), ctx.label(*n_f)),
            json!({ "axiom": "II", "domain": ctx.label(map.domain), "image": ctx.label(map.image), "map": map.map, "n_f": ctx.label(*n_f) }),
        ),
    }
}

fn check_saturation(cli: &Cli, pre: Option<&SpecDocument>, spec: &SpecArg) -> Result<Report> {
    let ctx = Ctx::load(cli, pre, spec)?;
    let f = ctx.fusion();
    let sat = f.is_saturated()?;
    let mut m = header("check-saturation", spec, &ctx);
    m.insert("classes".into(), json!(f.classes()?.len()));
    m.insert("saturated".into(), json!(sat.saturated));
    let mut lines = Vec::new();
    if let Some(w) = &sat.witness {
        let (line, v) = witness_json(&ctx, w);
        lines.push(format!("witness: {line}"));
        m.insert("witness".into(), v);
    }
    Ok(Report::new(code(sat.saturated), lines, Value::Object(m)))
}

fn axiom_lines(rep: &transporter::AxiomReport) -> Vec<String> {
    rep.axioms
        .iter()
        .map(|a| match &a.witness {
            Some(w) => format!("axiom {}: {} ({w})", a.axiom, verdict(a.pass)),
            None => format!("axiom {}: {}", a.axiom, verdict(a.pass)),
        })
        .collect()
}

fn check_transporter(cli: &Cli, pre: Option<&SpecDocument>, spec: &SpecArg, linking: bool) -> Result<Report> {
    let ctx = Ctx::load(cli, pre, spec)?;
    let t = match (&ctx, linking) {
        (Ctx::Finite { g, doc, .. }, true) => transporter::linking_of_group(g, doc.p)?,
        _ => ctx.base_system()?,
    };
    let ax = transporter::check_axioms(&t)?;
    let tag = transporter::is_linking(&t)?;
    let mut m = header("check-transporter", spec, &ctx);
    m.insert("kind".into(), json!(t.kind()));
    m.insert("objects".into(), json!(ax.objects));
    m.insert("morphisms".into(), json!(ax.morphisms));
    m.insert("axioms".into(), to_value(&ax.axioms));
    m.insert("centric_linking".into(), json!(tag.centric_linking));
    m.insert("objects_are_centrics".into(), json!(tag.objects_are_centrics));
    m.insert("pass".into(), json!(ax.pass));
    Ok(Report::new(code(ax.pass), axiom_lines(&ax), Value::Object(m)))
}

fn bullet(cli: &Cli, pre: Option<&SpecDocument>, spec: &SpecArg) -> Result<Report> {
    let ctx = Ctx::load(cli, pre, spec)?;
    let level = ctx.level("bullet")?;
    let b = level.bullet()?;
    let pair = RetractionPair::from_bullet(&b);
    let rr = transporter::retraction_properties(&level.fusion, &pair, None)?;
    let lat = &level.lat;
    let mut classes = Vec::new();
    let mut images = std::collections::BTreeSet::new();
    for c in lat.classes() {
        let p = c[0];
        let s = b.star[p];
        images.insert(*lat.class(s).iter().min().unwrap());
        classes.push(json!({ "subgroup": ctx.label(p), "order": lat.size(p), "star": ctx.label(s), "star_order": lat.size(s) }));
    }
    let mut m = header("bullet", spec, &ctx);
    m.insert("e".into(), json!(b.e));
    m.insert("margin".into(), json!(b.margin));
    m.insert("weyl_order".into(), json!(b.weyl_order));
    m.insert("weyl_consistent".into(), json!(b.weyl_consistent));
    m.insert("subgroup_classes".into(), json!(classes.len()));
    m.insert("image_classes".into(), json!(images.len()));
    m.insert("classes".into(), Value::Array(classes));
    m.insert("retraction".into(), to_value(&rr));
    m.insert("pass".into(), json!(rr.pass));
    let lines = rr.clauses.iter().map(|c| clause_line(c)).collect();
    Ok(Report::new(code(rr.pass), lines, Value::Object(m)))
}

fn clause_line(c: &transporter::ClauseResult) -> String {
    format!("{}: {} ({} checked, {} failures)", c.clause, verdict(c.failures == 0), c.checked, c.failures)
}

fn telescope(cli: &Cli, pre: Option<&SpecDocument>, spec: &SpecArg) -> Result<Report> {
    let ctx = Ctx::load(cli, pre, spec)?;
    let level = ctx.level("telescope")?;
    let l = Arc::new(transporter::from_spec(level, ctx.transporter_spec()?)?);
    let pair = transporter::bullet_data(level)?;
    let t = transporter::telescopic_extend(l.clone(), &pair)?;
    let ax = transporter::check_axioms(&t)?;
    let rr = transporter::retraction_properties(&level.fusion, &pair, Some(&t))?;
    let q = transporter::quasicentric_report(&t, &pair)?;
    let pass = ax.pass && rr.pass;
    let mut m = header("telescope", spec, &ctx);
    m.insert("base_objects".into(), json!(l.objects().len()));
    m.insert("objects".into(), json!(ax.objects));
    m.insert("morphisms".into(), json!(ax.morphisms));
    m.insert("axioms".into(), to_value(&ax.axioms));
    m.insert("retraction".into(), to_value(&rr));
    m.insert("quasicentric_centralizer".into(), json!(q.iter().filter(|e| e.centralizer).count()));
    m.insert("quasicentric_star_center".into(), json!(q.iter().filter(|e| e.star_center).count()));
    m.insert("pass".into(), json!(pass));
    let mut lines = axiom_lines(&ax);
    lines.extend(rr.clauses.iter().map(|c| clause_line(c)));
    Ok(Report::new(code(pass), lines, Value::Object(m)))
}

fn stage_name(st: &adams::Stage) -> String {
    let g = st.fusion().group();
    if let Some(n) = g.dihedral_name() {
        return n;
    }
    let sig = g.signature();
    match sig.name {
        Some(n) => n,
        None if sig.abelianization == [sig.order] => format!("C_{}", sig.order),
        None => format!("order {}, abelianization {:?}, exponent {}", sig.order, sig.abelianization, sig.exponent),
    }
}

fn approximate(cli: &Cli, pre: Option<&SpecDocument>, spec: &SpecArg, zeta: Option<i64>, steps: usize) -> Result<Report> {
    let ctx = Ctx::load(cli, pre, spec)?;
    let level = ctx.level("approximate")?;
    let zeta = zeta
        .or(ctx.doc().adams.as_ref().map(|a| a.zeta))
        .ok_or_else(|| Error::spec("no --zeta given and the spec has no `adams.zeta`"))?;
    let l = Arc::new(transporter::from_spec(level, ctx.transporter_spec()?)?);
    let a = adams::approximate(level, l, zeta, steps)?;
    let names: Vec<String> = a.stages.iter().map(stage_name).collect();
    let mut rep = to_value(&a.report);
    if let Some(Value::Array(st)) = rep.get_mut("stages") {
        for (s, n) in st.iter_mut().zip(&names) {
            s.as_object_mut().expect("stage object").insert("name".into(), json!(n));
        }
    }
    let mut lines = Vec::new();
    for (s, n) in a.report.stages.iter().zip(&names) {
        lines.push(format!(
            "stage {}: {n}, order {}, torus level {}, {}, {}",
            s.index,
            s.order,
            s.torus_level,
            s.signature.as_deref().unwrap_or("-"),
            verdict(s.pass)
        ));
    }
    let mut m = header("approximate", spec, &ctx);
    m.insert("zeta".into(), json!(zeta));
    m.insert("steps".into(), json!(steps));
    m.insert("stages".into(), json!(names));
    m.insert("report".into(), rep);
    m.insert("pass".into(), json!(a.report.pass));
    Ok(Report::new(code(a.report.pass), lines, Value::Object(m)))
}

fn verify(cli: &Cli, pre: Option<&SpecDocument>, spec: &SpecArg, family: Option<&str>) -> Result<Report> {
    let ctx = Ctx::load(cli, pre, spec)?;
    let level = ctx.level("verify-approximation")?;
    let fams: Vec<_> = ctx.doc().families.iter().filter(|f| family.map_or(true, |n| f.name == n)).collect();
    if fams.is_empty() {
        return Err(Error::spec(match family {
            Some(n) => format!("no stage family named `{n}`"),
            None => "the spec has no stage families".into(),
        }));
    }
    let l = Arc::new(transporter::from_spec(level, ctx.transporter_spec()?)?);
    let mut reports = Vec::new();
    let mut lines = Vec::new();
    let mut pass = true;
    for fam in fams {
        let r = adams::verify_approximation(level, l.clone(), fam)?;
        let orders: Vec<String> = r.stages.iter().map(|s| s.order.to_string()).collect();
        lines.push(format!("family {}: {} (orders {})", fam.name, verdict(r.pass), orders.join(", ")));
        pass &= r.pass;
        reports.push(to_value(&r));
    }
    let mut m = header("verify-approximation", spec, &ctx);
    m.insert("families".into(), Value::Array(reports));
    m.insert("pass".into(), json!(pass));
    Ok(Report::new(code(pass), lines, Value::Object(m)))
}

fn quotient(cli: &Cli, pre: Option<&SpecDocument>, spec: &SpecArg, subgroup: &str) -> Result<Report> {
    let ctx = Ctx::load(cli, pre, spec)?;
    let f = ctx.fusion();
    let a = ctx.subgroup(subgroup)?;
    let mut m = header("quotient", spec, &ctx);
    m.insert("subgroup".into(), json!(ctx.label(a)));
    m.insert("order".into(), json!(f.lattice().size(a)));
    let normal = localops::is_normal(f, a)?;
    m.insert("normal".into(), json!(normal));
    if !normal {
        m.insert("pass".into(), json!(false));
        return Ok(Report::new(1, vec![format!("{} is not normal in F", ctx.label(a))], Value::Object(m)));
    }
    m.insert("central".into(), json!(localops::is_central(f, a)?));
    let (qf, _) = localops::quotient_fusion(f, a)?;
    let sat = qf.is_saturated()?;
    m.insert("quotient_order".into(), json!(qf.lattice().size(qf.s())));
    m.insert("quotient_classes".into(), json!(qf.classes()?.len()));
    m.insert("saturated".into(), json!(sat.saturated));
    let mut pass = sat.saturated;
    let mut lines = Vec::new();
    let has_transporter = matches!(ctx, Ctx::Finite { .. }) || ctx.doc().transporter.is_some();
    if has_transporter {
        let t = Arc::new(ctx.base_system()?);
        let tq = transporter::quotient_by(t, a)?;
        let ax = transporter::check_axioms(&tq)?;
        lines = axiom_lines(&ax);
        pass &= ax.pass;
        m.insert("transporter".into(), to_value(&ax));
    }
    m.insert("pass".into(), json!(pass));
    Ok(Report::new(code(pass), lines, Value::Object(m)))
}

fn local_report(ctx: &Ctx, m: &mut Map<String, Value>, lf: &localops::LocalFusion) -> Result<bool> {
    let lat = lf.fusion.lattice();
    let sat = lf.fusion.is_saturated()?;
    m.insert("local_sylow".into(), json!(ctx.label(lf.base)));
    m.insert("local_order".into(), json!(lat.size(lf.fusion.s())));
    m.insert("local_classes".into(), json!(lf.fusion.classes()?.len()));
    m.insert("saturated".into(), json!(sat.saturated));
    Ok(sat.saturated)
}

fn centralizer(cli: &Cli, pre: Option<&SpecDocument>, spec: &SpecArg, subgroup: &str) -> Result<Report> {
    let ctx = Ctx::load(cli, pre, spec)?;
    let f = ctx.fusion();
    let a = ctx.subgroup(subgroup)?;
    let full = f.is_fully_centralized(a)?;
    let lf = localops::centralizer_fusion(f, a)?;
    let mut m = header("centralizer", spec, &ctx);
    m.insert("subgroup".into(), json!(ctx.label(a)));
    m.insert("fully_centralized".into(), json!(full));
    let sat = local_report(&ctx, &mut m, &lf)?;
    Ok(Report::new(code(sat || !full), Vec::new(), Value::Object(m)))
}

fn normalizer(cli: &Cli, pre: Option<&SpecDocument>, spec: &SpecArg, subgroup: &str, k: KArg) -> Result<Report> {
    let ctx = Ctx::load(cli, pre, spec)?;
    let f = ctx.fusion();
    let a = ctx.subgroup(subgroup)?;
    let k = match k {
        KArg::Identity => AutK::Identity,
        KArg::Full => AutK::Full,
    };
    let full = localops::is_fully_k_normalized(f, a, &k)?;
    let lf = localops::normalizer_fusion(f, a, &k)?;
    let mut m = header("normalizer", spec, &ctx);
    m.insert("subgroup".into(), json!(ctx.label(a)));
    m.insert("fully_normalized".into(), json!(full));
    let sat = local_report(&ctx, &mut m, &lf)?;
    Ok(Report::new(code(sat || !full), Vec::new(), Value::Object(m)))
}

/// `Z/a x Z/b x ...` as a finite abelian group.
pub fn parse_source(text: &str) -> Result<FinGroup> {
    let mut g: Option<FinGroup> = None;
    for part in text.split(['x', '×']) {
        let n: usize = part
            .trim()
            .strip_prefix("Z/")
            .and_then(|s| s.parse().ok())
            .filter(|&n| n >= 1)
            .ok_or_else(|| Error::spec(format!("bad factor `{part}` in `{text}`; expected Z/n")))?;
        let c = FinGroup::cyclic(n);
        g = Some(match g {
            None => c,
            Some(h) => FinGroup::direct_product(&h, &c),
        });
    }
    g.ok_or_else(|| Error::spec("empty source group"))
}

fn components(cli: &Cli, pre: Option<&SpecDocument>, spec: &SpecArg, source: &str) -> Result<Report> {
    let ctx = Ctx::load(cli, pre, spec)?;
    let e = parse_source(source)?;
    let c = localops::mapping_components(ctx.fusion(), &e)?;
    let comps: Vec<Value> = c
        .components
        .iter()
        .map(|x| {
            json!({
                "image": ctx.label(x.image),
                "image_order": x.image_order,
                "centralizer_order": x.centralizer_order,
                "centralizer_classes": x.centralizer_classes,
                "centralizer_saturated": x.centralizer_saturated,
            })
        })
        .collect();
    let lines = c
        .components
        .iter()
        .map(|x| format!("component: image {} (order {}), centralizer order {}", ctx.label(x.image), x.image_order, x.centralizer_order))
        .collect();
    let mut m = header("components", spec, &ctx);
    m.insert("source".into(), json!(source));
    m.insert("source_order".into(), json!(c.source_order));
    m.insert("homomorphisms".into(), json!(c.homomorphisms));
    m.insert("count".into(), json!(c.count));
    m.insert("components".into(), Value::Array(comps));
    Ok(Report::new(0, lines, Value::Object(m)))
}

fn module_for(ctx: &Ctx, coeff: &str) -> Result<CoefficientModule> {
    let m = CoefficientModule::parse(coeff)?;
    if m.p() != ctx.doc().p {
        return Err(Error::spec(format!("coefficients {coeff} are not a {}-group", ctx.doc().p)));
    }
    Ok(m)
}

fn stable(cli: &Cli, pre: Option<&SpecDocument>, spec: &SpecArg, degree: u32, coeff: &str) -> Result<Report> {
    let ctx = Ctx::load(cli, pre, spec)?;
    let module = module_for(&ctx, coeff)?;
    let st = cohomology::stable_elements(ctx.fusion(), &module, degree)?;
    let mut m = header("stable", spec, &ctx);
    m.insert("degree".into(), json!(degree));
    m.insert("coefficients".into(), json!(module.label()));
    m.insert("dimension".into(), json!(st.report.dimension));
    m.insert("invariants".into(), json!(st.report.invariants));
    m.insert("stable".into(), to_value(&st.report));
    let mut lines = Vec::new();
    let mut pass = true;
    if let Ctx::Finite { g, .. } = &ctx {
        if g.size() <= cohomology::MAX_GROUP_ORDER {
            match cohomology::bar_cohomology(g, &module, degree) {
                Ok(h) => {
                    let ok = h.invariants() == st.report.invariants;
                    lines.push(format!("group cohomology: dimension {}, {}", h.dimension(), if ok { "matches" } else { "MISMATCH" }));
                    m.insert("group_cohomology".into(), to_value(&h.summary()));
                    m.insert("matches_group".into(), json!(ok));
                    pass = ok;
                }
                Err(e @ Error::Cap { .. }) => {
                    m.insert("group_cohomology".into(), json!(format!("skipped: {e}")));
                }
                Err(e) => return Err(e),
            }
        }
    }
    Ok(Report::new(code(pass), lines, Value::Object(m)))
}

fn e2page(cli: &Cli, pre: Option<&SpecDocument>, spec: &SpecArg, r: Option<&str>, n: u32, mm: u32, coeff: &str) -> Result<Report> {
    let ctx = Ctx::load(cli, pre, spec)?;
    let f = ctx.fusion();
    let module = module_for(&ctx, coeff)?;
    let closed = cohomology::strongly_closed(f)?;
    let lat = f.lattice();
    let r = match r {
        Some(t) => ctx.subgroup(t)?,
        None => closed.iter().copied().find(|&x| x != lat.trivial() && x != f.s()).unwrap_or(f.s()),
    };
    let term = cohomology::e2_page(f, r, &module, n, mm)?;
    let mut m = header("e2page", spec, &ctx);
    m.insert("R".into(), json!(ctx.label(r)));
    m.insert("strongly_closed".into(), json!(closed.iter().map(|&x| ctx.label(x)).collect::<Vec<_>>()));
    m.insert("n".into(), json!(n));
    m.insert("m".into(), json!(mm));
    m.insert("coefficients".into(), json!(module.label()));
    m.insert("dimension".into(), json!(term.dimension));
    m.insert("invariants".into(), json!(term.invariants));
    m.insert("term".into(), to_value(&term));
    Ok(Report::new(0, Vec::new(), Value::Object(m)))
}

fn examples(show: Option<&str>) -> Result<Report> {
    if let Some(name) = show {
        let doc = catalog::load(name)?;
        let lines = vec![doc.to_json()];
        return Ok(Report::new(0, lines, to_value(&doc)));
    }
    let lines = catalog::ENTRIES.iter().map(|e| format!("{:<14} {}", e.name, e.summary)).collect();
    let body = Value::Array(catalog::ENTRIES.iter().map(|e| json!({ "name": e.name, "summary": e.summary })).collect());
    Ok(Report::new(0, lines, body))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sources_parse() {
        assert_eq!(parse_source("Z/2").unwrap().size(), 2);
        assert_eq!(parse_source("Z/2xZ/4").unwrap().size(), 8);
        assert!(parse_source("Z/0").is_err());
        assert!(parse_source("C2").is_err());
    }

    #[test]
    fn specs_resolve_by_stem() {
        assert_eq!(load_spec("examples/s4-d8.json").unwrap().name.as_deref(), Some("s4-d8"));
        assert!(load_spec("no-such-spec").is_err());
    }

    #[test]
    fn text_rendering_skips_nested_values() {
        let r = Report::new(0, vec!["head".into()], json!({ "a": 1, "b": [1, 2], "c": { "d": 1 }, "e": "x" }));
        assert_eq!(r.render(Format::Text), "head\na: 1\nb: [1,2]\ne: x\n");
    }
}
