//! The `strata` document format and the five commands run on it.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::aim::{self, PairwiseWitness, SubspaceReport, SymplecticData, SymplecticRecord};
use crate::deformation::{check_preserved, CylinderClass, PeriodAssignment, PeriodRecord, PreservationReport, ShearStretch};
use crate::equations::{Classification, ConsistencyCertificate, EquationSystem, Flags, Ratio, Verdict};
use crate::error::{Error, Violation};
use crate::gaussian::Gq;
use crate::homology::{render_lambda_form, AdaptedBasis, BasisElement, Cycle, CycleRecord, LambdaRelationSet, Provenance};
use crate::level_graph::EnhancedLevelGraph;
use crate::plumbing::{self, HurwitzCertificate, LocalModel, PlumbingRow};

pub const SCHEMA: &str = "sbv-1";

pub const EXIT_OK: i32 = 0;
pub const EXIT_VIOLATION: i32 = 1;
pub const EXIT_INCONSISTENT: i32 = 2;
pub const EXIT_CONVERSION: i32 = 3;
pub const EXIT_HYPOTHESIS: i32 = 4;
pub const EXIT_PARSE: i32 = 64;

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SystemRecord {
    #[serde(default)]
    pub equations: Vec<CycleRecord>,
    #[serde(default)]
    pub ratios: Vec<Ratio>,
    /// Linear relations among λ-periods, keyed by edge id.
    #[serde(default)]
    pub relations: Vec<BTreeMap<String, Gq>>,
    #[serde(default)]
    pub flags: Flags,
    #[serde(default)]
    pub nonvanishing: Vec<String>,
}

/// A class given by its position in the class list or by one of its edges.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ClassRef {
    Index(usize),
    Edge(String),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DeformationSpec {
    pub class: ClassRef,
    pub r: Gq,
    pub s: Gq,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Document {
    pub schema: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
    pub graph: EnhancedLevelGraph,
    pub basis: Vec<BasisElement>,
    #[serde(default)]
    pub system: SystemRecord,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub symplectic: Option<SymplecticRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub periods: Option<PeriodRecord>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub deformations: Vec<DeformationSpec>,
}

impl Document {
    pub fn parse(text: &str) -> Result<Document, String> {
        let doc: Document = serde_json::from_str(text)
            .map_err(|e| format!("parse error at line {} column {}: {e}", e.line(), e.column()))?;
        if doc.schema != SCHEMA {
            return Err(format!("parse error: unsupported schema {:?}, expected {SCHEMA:?}", doc.schema));
        }
        Ok(doc)
    }
}

/// A document resolved against its own graph and basis.
#[derive(Clone, Debug)]
pub struct Loaded {
    pub system: EquationSystem,
    pub symplectic: Option<SymplecticData>,
    pub periods: Option<PeriodAssignment>,
    pub deformations: Vec<DeformationSpec>,
}

/// Resolves every reference and runs all validators. Returns the
/// violations if there are any.
pub fn load(doc: &Document) -> Result<Loaded, Vec<Violation>> {
    let mut bad = doc.graph.validate();
    let basis = match AdaptedBasis::new(doc.basis.clone(), &doc.graph) {
        Ok(b) => b,
        Err(v) => {
            bad.extend(v);
            return Err(bad);
        }
    };
    bad.extend(basis.validate_adapted(&doc.graph));
    let mut equations = Vec::new();
    for rec in &doc.system.equations {
        match rec.resolve(&basis) {
            Ok(c) => equations.push(c),
            Err(v) => bad.push(v),
        }
    }
    let mut relations = Vec::new();
    for rel in &doc.system.relations {
        let rec = CycleRecord { coeffs: BTreeMap::new(), lambda: rel.clone() };
        match rec.resolve(&basis) {
            Ok(c) => relations.push((c.lambda, Provenance::Declared)),
            Err(v) => bad.push(v),
        }
    }
    if !bad.is_empty() {
        return Err(bad);
    }
    let system = EquationSystem::new(doc.graph.clone(), basis, equations)
        .with_flags(doc.system.flags.clone())
        .with_relations(LambdaRelationSet::new(relations))
        .with_ratios(doc.system.ratios.clone())
        .with_nonvanishing(doc.system.nonvanishing.iter().cloned());
    bad.extend(system.validate_system());
    let symplectic = match &doc.symplectic {
        None => None,
        Some(rec) => match SymplecticData::from_record(rec, &system) {
            Ok(d) => {
                bad.extend(d.validate(&system));
                Some(d)
            }
            Err(v) => {
                bad.extend(v);
                None
            }
        },
    };
    let periods = match &doc.periods {
        None => None,
        Some(rec) => match PeriodAssignment::from_record(rec, &system.basis) {
            Ok(p) => Some(p),
            Err(v) => {
                bad.push(v);
                None
            }
        },
    };
    if !bad.is_empty() {
        return Err(bad);
    }
    Ok(Loaded { system, symplectic, periods, deformations: doc.deformations.clone() })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    Validate,
    Analyze,
    Plumb,
    Deform,
    Aim,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Options {
    pub json: bool,
    pub assume_theorems: bool,
    /// Cap on enumerated undegenerations and primitive-set searches.
    pub limit: usize,
    pub pairwise_cross: Option<(String, String)>,
    /// 1-based equation index to split into pieces crossing at most two
    /// horizontal nodes.
    pub decompose: Option<usize>,
    /// 1-based equation index to write as a sum of two-term λ-equations.
    pub circum: Option<usize>,
    pub force_minimal: bool,
}

impl Default for Options {
    fn default() -> Self {
        Options {
            json: false,
            assume_theorems: false,
            limit: 1024,
            pairwise_cross: None,
            decompose: None,
            circum: None,
            force_minimal: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Summary {
    pub vertices: usize,
    pub edges: usize,
    pub horizontal_edges: usize,
    pub levels: usize,
    pub basis: usize,
    pub equations: usize,
    pub rank: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidateReport {
    pub ok: bool,
    pub summary: Option<Summary>,
    pub violations: Vec<Violation>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Proportionality {
    pub edge: String,
    pub reference: String,
    /// `∫λ_edge = ratio ∫λ_reference`, when the data determine it.
    pub ratio: Option<Gq>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResidueLine {
    pub row: usize,
    pub passage: i32,
    pub relation: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnalyzeReport {
    pub classes: Vec<Vec<String>>,
    pub proportionalities: Vec<Proportionality>,
    pub residues: Vec<ResidueLine>,
    pub undegenerations: Vec<Classification>,
    pub undegenerations_total: usize,
    pub hurwitz: Option<HurwitzCertificate>,
    pub certificate: ConsistencyCertificate,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlumbReport {
    pub rows: Vec<PlumbingRow>,
    pub local_model: Option<LocalModel>,
    pub obstruction: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DeformEntry {
    pub spec: DeformationSpec,
    pub report: Option<PreservationReport>,
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DeformReport {
    pub entries: Vec<DeformEntry>,
    pub preserved: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LemmaLine {
    pub class: Vec<String>,
    pub dim: Option<usize>,
    pub satisfied: Option<bool>,
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CrossLine {
    pub edges: [String; 2],
    pub witness: PairwiseWitness,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecompositionLine {
    pub input: String,
    pub terms: Vec<CycleRecord>,
    pub rendered: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AimReport {
    pub tangent: SubspaceReport,
    pub lemma: Vec<LemmaLine>,
    pub pairwise_cross: Vec<CrossLine>,
    pub decomposition: Option<DecompositionLine>,
    pub circum: Option<DecompositionLine>,
    pub error: Option<String>,
}

fn render<T: Serialize>(json: bool, report: &T, text: impl FnOnce() -> String) -> String {
    if json {
        let mut s = serde_json::to_string_pretty(report).expect("reports serialize");
        s.push('\n');
        s
    } else {
        text()
    }
}

fn violation_text(v: &[Violation]) -> String {
    let mut out = format!("invalid document: {} violation(s)\n", v.len());
    for x in v {
        let _ = writeln!(out, "  {x}");
    }
    out
}

fn error_code(e: &Error) -> i32 {
    match e {
        Error::Conversion(_) => EXIT_CONVERSION,
        Error::Hypothesis(_) => EXIT_HYPOTHESIS,
        Error::Infeasible(_) => EXIT_INCONSISTENT,
        Error::Precondition(m) if m.contains("minimal stratum required") => EXIT_HYPOTHESIS,
        _ => EXIT_VIOLATION,
    }
}

/// Runs one command on the text of a document.
pub fn execute(cmd: Command, text: &str, opts: &Options) -> Outcome {
    let doc = match Document::parse(text) {
        Ok(d) => d,
        Err(msg) => return Outcome { code: EXIT_PARSE, stdout: format!("{msg}\n") },
    };
    let loaded = load(&doc);
    if cmd == Command::Validate {
        return validate(&doc, loaded, opts);
    }
    let loaded = match loaded {
        Ok(l) => l,
        Err(v) => {
            let report = ValidateReport { ok: false, summary: None, violations: v };
            let stdout = render(opts.json, &report, || violation_text(&report.violations));
            return Outcome { code: EXIT_VIOLATION, stdout };
        }
    };
    match cmd {
        Command::Validate => unreachable!(),
        Command::Analyze => analyze(&loaded, opts),
        Command::Plumb => plumb(&loaded, opts),
        Command::Deform => deform(&loaded, opts),
        Command::Aim => aim_cmd(&loaded, opts),
    }
}

fn validate(doc: &Document, loaded: Result<Loaded, Vec<Violation>>, opts: &Options) -> Outcome {
    let report = match loaded {
        Ok(l) => {
            let s = &l.system;
            ValidateReport {
                ok: true,
                summary: Some(Summary {
                    vertices: doc.graph.vertices.len(),
                    edges: doc.graph.edges.len(),
                    horizontal_edges: s.horizontal().len(),
                    levels: doc.graph.depth() + 1,
                    basis: s.basis.len(),
                    equations: s.equations.len(),
                    rank: s.rank(),
                }),
                violations: Vec::new(),
            }
        }
        Err(v) => ValidateReport { ok: false, summary: None, violations: v },
    };
    let stdout = render(opts.json, &report, || match &report.summary {
        Some(s) => format!(
            "valid: {} vertices, {} edges ({} horizontal), {} levels, {} basis elements, {} equations of rank {}\n",
            s.vertices, s.edges, s.horizontal_edges, s.levels, s.basis, s.equations, s.rank
        ),
        None => violation_text(&report.violations),
    });
    Outcome { code: if report.ok { EXIT_OK } else { EXIT_VIOLATION }, stdout }
}

pub fn analyze_report(sys: &EquationSystem, opts: &Options) -> AnalyzeReport {
    let classes = sys.cross_equivalence_classes();
    let mut proportionalities = Vec::new();
    for c in &classes {
        for &e in &c[1..] {
            proportionalities.push(Proportionality {
                edge: sys.basis.edges[e].clone(),
                reference: sys.basis.edges[c[0]].clone(),
                ratio: sys.lambda_ratio(e, c[0]),
            });
        }
    }
    let mut residues = Vec::new();
    for (k, f) in sys.rows().iter().enumerate() {
        for p in sys.graph.passages() {
            if let Ok(r) = sys.residue_relation(f, p) {
                if !crate::linalg::is_zero(&r) {
                    residues.push(ResidueLine {
                        row: k + 1,
                        passage: p,
                        relation: format!("{} = 0", render_lambda_form(&r, &sys.basis.edges)),
                    });
                }
            }
        }
    }
    let all = sys.graph.undegenerations();
    let undegenerations: Vec<Classification> =
        all.par_iter().take(opts.limit).map(|u| sys.classify_undegeneration(u)).collect();
    AnalyzeReport {
        classes: classes.iter().map(|c| sys.edge_names(c)).collect(),
        proportionalities,
        residues,
        undegenerations_total: all.len(),
        undegenerations,
        hurwitz: plumbing::hurwitz_rule(sys),
        certificate: sys.consistency_report(opts.assume_theorems),
    }
}

fn analyze(l: &Loaded, opts: &Options) -> Outcome {
    let sys = &l.system;
    let report = analyze_report(sys, opts);
    let code = if report.certificate.verdict == Verdict::Inconsistent { EXIT_INCONSISTENT } else { EXIT_OK };
    let stdout = render(opts.json, &report, || analyze_text(sys, &report));
    Outcome { code, stdout }
}

fn analyze_text(sys: &EquationSystem, r: &AnalyzeReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "equations: {} (rank {})", sys.equations.len(), sys.rank());
    for (k, row) in sys.rows().iter().enumerate() {
        let _ = writeln!(out, "  R{}: {} = 0", k + 1, row.render(&sys.basis));
    }
    out.push_str("cross-equivalence classes:\n");
    if r.classes.is_empty() {
        out.push_str("  none\n");
    }
    for c in &r.classes {
        let _ = writeln!(out, "  {{{}}}", c.join(", "));
    }
    if !r.proportionalities.is_empty() {
        out.push_str("proportionalities:\n");
        for p in &r.proportionalities {
            match &p.ratio {
                Some(q) => {
                    let _ = writeln!(out, "  ∫λ_{} = {} ∫λ_{}", p.edge, q, p.reference);
                }
                None => {
                    let _ = writeln!(out, "  ∫λ_{} ∝ ∫λ_{} (constant not determined)", p.edge, p.reference);
                }
            }
        }
    }
    if !r.residues.is_empty() {
        out.push_str("residue relations:\n");
        for x in &r.residues {
            let _ = writeln!(out, "  R{} at passage {}: {}", x.row, x.passage, x.relation);
        }
    }
    let _ = writeln!(
        out,
        "undegenerations: {} of {}",
        r.undegenerations.len(),
        r.undegenerations_total
    );
    out.push_str("  passages     horizontal       codim  rank  lost  divisorial  branch\n");
    for c in &r.undegenerations {
        let passages = format!("[{}]", c.kept_passages.iter().map(i32::to_string).collect::<Vec<_>>().join(","));
        let hor = format!("[{}]", c.kept_horizontal.join(","));
        let branch = match c.branch {
            None => "-".to_string(),
            Some(b) => serde_json::to_value(b).ok().and_then(|v| v.as_str().map(str::to_string)).unwrap_or_default(),
        };
        let _ = writeln!(
            out,
            "  {passages:<12} {hor:<16} {:>5}  {:>4}  {:>4}  {:<10}  {branch}",
            c.codim,
            c.rank,
            c.lost,
            if c.divisorial { "yes" } else { "no" }
        );
    }
    if let Some(h) = &r.hurwitz {
        match h {
            HurwitzCertificate::ImpossibleHorizontalNode { edges } => {
                let _ = writeln!(out, "hurwitz rule: horizontal nodes {{{}}} cannot occur", edges.join(", "));
            }
            HurwitzCertificate::SmoothNormalCrossing => {
                out.push_str("hurwitz rule: smooth with normal crossing boundary\n");
            }
        }
    }
    let c = &r.certificate;
    let verdict = serde_json::to_value(c.verdict).ok().and_then(|v| v.as_str().map(str::to_string)).unwrap_or_default();
    let _ = writeln!(out, "certificate: {verdict}");
    if let Some(rule) = &c.rule {
        let _ = writeln!(out, "  rule: {rule}");
    }
    if let Some(f) = &c.forced_relation {
        let _ = writeln!(out, "  forced: {f}");
    }
    for o in &c.obligations {
        let chain = o.iter().map(|e| format!("∫λ_{e}")).collect::<Vec<_>>().join(" ∝ ");
        let _ = writeln!(out, "  obligation: {chain}");
    }
    for t in &c.trace {
        let _ = writeln!(out, "  {t}");
    }
    out
}

fn plumb(l: &Loaded, opts: &Options) -> Outcome {
    let sys = &l.system;
    let (report, code) = match plumbing::convert(sys) {
        Ok(conv) => {
            let model = plumbing::local_model(&conv, sys);
            (PlumbReport { rows: conv.rows, local_model: Some(model), obstruction: None }, EXIT_OK)
        }
        Err(e) => {
            let code = error_code(&e);
            let code = if code == EXIT_VIOLATION { EXIT_INCONSISTENT } else { code };
            (PlumbReport { rows: Vec::new(), local_model: None, obstruction: Some(e.to_string()) }, code)
        }
    };
    let stdout = render(opts.json, &report, || {
        let mut out = String::new();
        if let Some(o) = &report.obstruction {
            let _ = writeln!(out, "{o}");
            return out;
        }
        out.push_str(&plumbing::ConvertedSystem { rows: report.rows.clone() }.table());
        if let Some(m) = &report.local_model {
            let _ = writeln!(out, "local model: {}", m.rendered);
            for c in &m.coordinate_changes {
                let _ = writeln!(out, "  {c}");
            }
            for f in &m.factors {
                let kind = serde_json::to_value(f.lattice.kind)
                    .ok()
                    .and_then(|v| v.as_str().map(str::to_string))
                    .unwrap_or_default();
                let normal = match f.lattice.normal {
                    Some(true) => "normal",
                    Some(false) => "not normal",
                    None => "normality undecided",
                };
                let _ = writeln!(
                    out,
                    "  class {{{}}}: {kind}, {normal}, invariant factors [{}]",
                    f.edges.join(", "),
                    f.lattice.invariant_factors.join(", ")
                );
            }
        }
        out
    });
    Outcome { code, stdout }
}

fn resolve_class(sys: &EquationSystem, r: &ClassRef) -> Result<CylinderClass, Error> {
    match r {
        ClassRef::Index(k) => CylinderClass::by_index(sys, *k),
        ClassRef::Edge(e) => CylinderClass::containing(sys, e),
    }
}

fn deform(l: &Loaded, opts: &Options) -> Outcome {
    let sys = &l.system;
    let Some(p) = &l.periods else {
        let v = vec![Violation::new("periods", "deform needs a periods block")];
        let report = ValidateReport { ok: false, summary: None, violations: v };
        return Outcome { code: EXIT_VIOLATION, stdout: render(opts.json, &report, || violation_text(&report.violations)) };
    };
    let mut code = EXIT_OK;
    let mut entries = Vec::new();
    for spec in &l.deformations {
        let m = ShearStretch { r: spec.r.clone(), s: spec.s.clone() };
        let res = resolve_class(sys, &spec.class).and_then(|c| check_preserved(sys, p, &c, &m));
        match res {
            Ok(rep) => {
                if !rep.preserved {
                    code = code.max(EXIT_HYPOTHESIS);
                }
                entries.push(DeformEntry { spec: spec.clone(), report: Some(rep), error: None });
            }
            Err(e) => {
                code = code.max(error_code(&e));
                entries.push(DeformEntry { spec: spec.clone(), report: None, error: Some(e.to_string()) });
            }
        }
    }
    let report = DeformReport { preserved: code == EXIT_OK, entries };
    let stdout = render(opts.json, &report, || {
        let mut out = String::new();
        if report.entries.is_empty() {
            out.push_str("no deformations given\n");
        }
        for e in &report.entries {
            let _ = writeln!(out, "deformation r = {}, s = {}", e.spec.r, e.spec.s);
            if let Some(err) = &e.error {
                let _ = writeln!(out, "  {err}");
            }
            if let Some(rep) = &e.report {
                let _ = writeln!(out, "  class {{{}}}", rep.class.join(", "));
                for row in &rep.rows {
                    let note = match &row.reason {
                        None => String::new(),
                        Some(r) => format!("  not covered by the hypotheses: {r}"),
                    };
                    let _ = writeln!(out, "  R{}: residual {}{note}", row.row, row.residual);
                }
                let _ = writeln!(out, "  {}", if rep.preserved { "preserved" } else { "not preserved" });
            }
        }
        out
    });
    Outcome { code, stdout }
}

fn decomposition_line(sys: &EquationSystem, f: &Cycle, terms: &[Cycle]) -> DecompositionLine {
    DecompositionLine {
        input: f.render(&sys.basis),
        terms: terms.iter().map(|t| t.to_record(&sys.basis)).collect(),
        rendered: terms.iter().map(|t| t.render(&sys.basis)).collect(),
    }
}

fn equation(sys: &EquationSystem, k: usize) -> Result<&Cycle, Error> {
    k.checked_sub(1)
        .and_then(|i| sys.equations.get(i))
        .ok_or_else(|| Error::Precondition(format!("no equation {k}")))
}

fn aim_cmd(l: &Loaded, opts: &Options) -> Outcome {
    let sys = &l.system;
    let Some(data) = &l.symplectic else {
        let v = vec![Violation::new("symplectic", "aim needs a symplectic block")];
        let report = ValidateReport { ok: false, summary: None, violations: v };
        return Outcome { code: EXIT_VIOLATION, stdout: render(opts.json, &report, || violation_text(&report.violations)) };
    };
    let tangent = aim::tangent_absolute(sys, data);
    let lemma = sys
        .cross_equivalence_classes()
        .iter()
        .map(|c| {
            let class = sys.edge_names(c);
            match aim::lemma_bound(sys, data, c) {
                Ok(d) => LemmaLine { class, dim: Some(d), satisfied: Some(d <= 1), error: None },
                Err(e) => LemmaLine { class, dim: None, satisfied: None, error: Some(e.to_string()) },
            }
        })
        .collect();
    let mut report = AimReport { tangent, lemma, pairwise_cross: Vec::new(), decomposition: None, circum: None, error: None };
    let mut code = EXIT_OK;
    let mut run = || -> Result<(), Error> {
        let force = opts.force_minimal;
        let mut pairs = Vec::new();
        if let Some((a, b)) = &opts.pairwise_cross {
            let idx = |e: &str| sys.basis.edge_index(e).ok_or_else(|| Error::Precondition(format!("no edge {e}")));
            pairs.push((idx(a)?, idx(b)?));
        } else if sys.flags.minimal_stratum {
            for c in sys.cross_equivalence_classes() {
                for (i, &a) in c.iter().enumerate() {
                    pairs.extend(c[i + 1..].iter().map(|&b| (a, b)));
                }
            }
        }
        for (a, b) in pairs {
            let w = aim::pairwise_cross_witness(sys, a, b, force)?;
            if matches!(w, PairwiseWitness::Absent { .. }) {
                code = EXIT_INCONSISTENT;
            }
            report.pairwise_cross.push(CrossLine { edges: [sys.basis.edges[a].clone(), sys.basis.edges[b].clone()], witness: w });
        }
        if let Some(k) = opts.decompose {
            let f = equation(sys, k)?;
            let terms = aim::at_most_two_decompose(sys, f, force)?;
            report.decomposition = Some(decomposition_line(sys, f, &terms));
        }
        if let Some(k) = opts.circum {
            let f = equation(sys, k)?;
            let terms = aim::pairwise_circum_decompose(sys, f, force)?;
            report.circum = Some(decomposition_line(sys, f, &terms));
        }
        Ok(())
    };
    if let Err(e) = run() {
        code = error_code(&e);
        report.error = Some(e.to_string());
    }
    if report.lemma.iter().any(|x| x.satisfied == Some(false)) {
        code = code.max(EXIT_INCONSISTENT);
    }
    let stdout = render(opts.json, &report, || aim_text(&report));
    Outcome { code, stdout }
}

fn aim_text(r: &AimReport) -> String {
    let mut out = String::new();
    let t = &r.tangent;
    let _ = writeln!(
        out,
        "absolute tangent space: dimension {}, form rank {}, {}",
        t.dim,
        t.form_rank,
        if t.symplectic { "symplectic" } else { "not symplectic" }
    );
    for x in &r.lemma {
        match (&x.dim, &x.error) {
            (Some(d), _) => {
                let _ = writeln!(
                    out,
                    "class {{{}}}: bound dimension {d}{}",
                    x.class.join(", "),
                    if *d <= 1 { "" } else { ", exceeds 1" }
                );
            }
            (None, Some(e)) => {
                let _ = writeln!(out, "class {{{}}}: {e}", x.class.join(", "));
            }
            _ => {}
        }
    }
    for c in &r.pairwise_cross {
        match &c.witness {
            PairwiseWitness::Found { rendered, .. } => {
                let _ = writeln!(out, "pair {{{}, {}}}: {rendered} = 0", c.edges[0], c.edges[1]);
            }
            PairwiseWitness::Absent { diagnostic } => {
                let _ = writeln!(out, "pair {{{}, {}}}: {diagnostic}", c.edges[0], c.edges[1]);
            }
        }
    }
    for (label, d) in [("at most two nodes", &r.decomposition), ("pairwise", &r.circum)] {
        if let Some(d) = d {
            let _ = writeln!(out, "{label}: {} = 0 splits as", d.input);
            for t in &d.rendered {
                let _ = writeln!(out, "  {t} = 0");
            }
        }
    }
    if let Some(e) = &r.error {
        let _ = writeln!(out, "{e}");
    }
    out
}
