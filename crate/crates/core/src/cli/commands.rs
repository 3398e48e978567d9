use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::examples::{example_text, EXAMPLES};
use super::serial::{
    check_schema, coefficient_from_tag, dm_body, dm_from_body, field_from_header, header, parse,
    serialize, to_value, DmWire, FieldClassification, FieldReport, Serial,
};
use super::text;
use super::{
    CartierArgs, CartierOp, CheckOp, Cli, CohomOp, Command, DmOp, ExamplesOp, FieldArgs, FormalOp,
    GsOp, ModuleArgs, PacketArgs,
};
use crate::cartier::{cm_connected_dm, cm_tc_n, cm_trunc, cm_v_torsion, CartierModule};
use crate::cohomology::{
    h_alpha_p, h_mu_p, h_omega_nu, h_z_p, les_check, packet_validate, parallelogram_check,
    phi_fl_report, phi_obstruction, projective_bundle_mu, psi_report, Coefficient, GeometricPacket,
    OmegaNu,
};
use crate::dieudonne::{
    dm_dual, dm_fourway, dm_word_cokernel, dm_word_kernel, Cell, DieudonneModule, Word,
};
use crate::error::{Error, Result};
use crate::field::FieldSpec;
use crate::group_scheme::{
    gs_atom, gs_classify, gs_dual, gs_frobenius_kernel, gs_height_one, gs_verschiebung_kernel,
    Atom, GroupScheme, HeightOneData,
};
use crate::iso::{module_iso_test, IsoOutcome};

/// Output of one invocation: a text block, a JSON block and an exit code.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Report {
    pub human: String,
    pub machine: String,
    pub exit_code: i32,
    pub json: bool,
}

impl Report {
    /// The block selected by `--json`.
    pub fn text(&self) -> &str {
        if self.json {
            &self.machine
        } else {
            &self.human
        }
    }

    fn ok<T: Serial>(obj: &T, human: String, exit_code: i32) -> Self {
        Report {
            human,
            machine: serialize(obj),
            exit_code,
            json: false,
        }
    }

    fn error(e: &Error, json: bool) -> Self {
        let doc = ErrorDoc {
            schema: ErrorDoc::SCHEMA.into(),
            kind: error_kind(e).into(),
            message: e.to_string(),
            exit_code: e.exit_code(),
        };
        Report {
            human: format!("error: {e}\n"),
            machine: serialize(&doc),
            exit_code: e.exit_code(),
            json,
        }
    }

    pub(super) fn usage(e: clap::Error, json: bool) -> Self {
        use clap::error::ErrorKind;
        let shown = e.render().to_string();
        if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
            return Report {
                human: shown.clone(),
                machine: shown,
                exit_code: 0,
                json: false,
            };
        }
        let mut r = Report::error(&Error::BadParameter(shown.trim_end().to_string()), json);
        r.human = shown;
        r
    }

    pub(super) fn internal(json: bool) -> Self {
        Report::error(&Error::BadParameter("internal error".into()), json)
    }
}

fn error_kind(e: &Error) -> &'static str {
    match e {
        Error::Schema { .. } => "schema",
        Error::Shape(_) => "shape",
        Error::PrecisionExceeded(_) => "precision_exceeded",
        Error::UnstableTruncation(_) => "unstable_truncation",
        Error::BudgetExceeded => "budget_exceeded",
        Error::MissingDegree(_) | Error::MissingDeRhamData(_) => "missing_data",
        _ => "validation",
    }
}

macro_rules! self_doc {
    ($t:ty, $s:literal) => {
        impl Serial for $t {
            const SCHEMA: &'static str = $s;
            type Wire = $t;

            fn to_wire(&self) -> $t {
                self.clone()
            }

            fn from_wire(w: $t) -> Result<$t> {
                check_schema(&w.schema, $s)?;
                Ok(w)
            }
        }
    };
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ErrorDoc {
    pub schema: String,
    pub kind: String,
    pub message: String,
    pub exit_code: i32,
}
self_doc!(ErrorDoc, "ffgs_error_v1");

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IsoDoc {
    pub schema: String,
    pub outcome: String,
}
self_doc!(IsoDoc, "ffgs_iso_v1");

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ValidationDoc {
    pub schema: String,
    pub valid: bool,
    pub warnings: Vec<String>,
}
self_doc!(ValidationDoc, "ffgs_validation_v1");

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExampleListDoc {
    pub schema: String,
    pub examples: Vec<String>,
}
self_doc!(ExampleListDoc, "ffgs_example_list_v1");

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConnectedDoc {
    pub schema: String,
    pub labels: Vec<String>,
    pub unipotent_dim: usize,
    pub mult_corank: usize,
    pub formal: Vec<(u32, usize)>,
    pub finite_leftover: u32,
    pub torsion_flag: bool,
}
self_doc!(ConnectedDoc, "ffgs_connected_v1");

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BatchDoc {
    pub schema: String,
    pub items: Vec<Value>,
}
self_doc!(BatchDoc, "ffgs_batch_v1");

/// The four cells of a module, in the order of [`Cell::ALL`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FourWayParts {
    pub field: FieldSpec,
    pub parts: Vec<DieudonneModule>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FourWayWire {
    pub schema: String,
    pub p: u32,
    #[serde(default)]
    pub n: Option<usize>,
    #[serde(default)]
    pub modulus: Option<Vec<u32>>,
    pub parts: BTreeMap<String, DmWire>,
}

impl Serial for FourWayParts {
    const SCHEMA: &'static str = "ffgs_fourway_v1";
    type Wire = FourWayWire;

    fn to_wire(&self) -> FourWayWire {
        let (p, n, modulus) = header(self.field);
        FourWayWire {
            schema: Self::SCHEMA.into(),
            p,
            n,
            modulus,
            parts: Cell::ALL
                .iter()
                .zip(&self.parts)
                .map(|(c, m)| (c.name().to_string(), dm_body(m)))
                .collect(),
        }
    }

    fn from_wire(w: FourWayWire) -> Result<Self> {
        check_schema(&w.schema, Self::SCHEMA)?;
        let field = field_from_header(w.p, w.n, w.modulus.as_deref())?;
        let parts = Cell::ALL
            .iter()
            .map(|c| {
                let body = w
                    .parts
                    .get(c.name())
                    .ok_or_else(|| Error::schema(format!("parts.{}", c.name()), "missing cell"))?;
                dm_from_body(field, body, &format!("parts.{}", c.name()))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(FourWayParts { field, parts })
    }
}

// ---- inputs ----

fn read_file(path: &Path) -> Result<String> {
    std::fs::read_to_string(path)
        .map_err(|e| Error::BadParameter(format!("cannot read {}: {e}", path.display())))
}

fn field(args: &FieldArgs) -> Result<FieldSpec> {
    let p = args
        .p
        .ok_or_else(|| Error::BadParameter("--p is required".into()))?;
    let modulus = match &args.modulus {
        Some(s) => Some(
            s.split(',')
                .map(|c| c.trim().parse::<u32>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|_| Error::BadParameter(format!("bad modulus \"{s}\"")))?,
        ),
        None => None,
    };
    FieldSpec::new(p, args.n, modulus.as_deref())
}

pub fn parse_atom(name: &str) -> Result<Atom> {
    let bad = || Error::BadParameter(format!("unknown atom \"{name}\""));
    let power = |rest: &str| -> Result<u32> {
        match rest {
            "" => Ok(1),
            r => r
                .strip_prefix('^')
                .and_then(|e| e.parse::<u32>().ok())
                .filter(|&a| a >= 1)
                .ok_or_else(bad),
        }
    };
    let lower = name.to_ascii_lowercase();
    if lower == "m11" || lower == "ss_kernel" {
        return Ok(Atom::SsKernel);
    }
    if let Some(r) = lower.strip_prefix("mu_p") {
        return Ok(Atom::Mu(power(r)?));
    }
    if let Some(r) = lower.strip_prefix("alpha_p") {
        return Ok(Atom::Alpha(power(r)?));
    }
    if let Some(r) = lower
        .strip_prefix("z/p")
        .or_else(|| lower.strip_prefix("zmod_p"))
    {
        return Ok(Atom::Zmod(power(r)?));
    }
    if let Some(d) = lower.strip_prefix("z/") {
        return d.parse::<u64>().map(Atom::ZmodCoprime).map_err(|_| bad());
    }
    Err(bad())
}

fn parse_word(s: &str) -> Result<Word> {
    let bad = || Error::BadParameter(format!("bad word \"{s}\" (expected F<a> or V<a>)"));
    let mut chars = s.chars();
    let head = chars.next();
    let a: u32 = chars.as_str().parse().map_err(|_| bad())?;
    match head {
        Some('F' | 'f') => Ok(Word::F(a)),
        Some('V' | 'v') => Ok(Word::V(a)),
        _ => Err(bad()),
    }
}

fn load_gs(args: &ModuleArgs) -> Result<GroupScheme> {
    match (&args.file, &args.atom) {
        (Some(_), Some(_)) => Err(Error::BadParameter("give either --file or --atom".into())),
        (None, Some(a)) => gs_atom(field(&args.field)?, parse_atom(a)?),
        (Some(path), None) => load_gs_file(path),
        (None, None) => Err(Error::BadParameter(
            "an input module is required (--file or --atom)".into(),
        )),
    }
}

fn load_gs_file(path: &Path) -> Result<GroupScheme> {
    let text = read_file(path)?;
    let schema = serde_json::from_str::<Value>(&text)
        .ok()
        .and_then(|v| v.get("schema").and_then(|s| s.as_str()).map(String::from));
    if schema.as_deref() == Some(GroupScheme::SCHEMA) {
        parse(&text)
    } else {
        Ok(GroupScheme {
            p_part: parse(&text)?,
            etale_coprime: vec![],
            label: None,
        })
    }
}

fn load_packet(cli: &Cli, spec: &str) -> Result<GeometricPacket> {
    let path = Path::new(spec);
    let packet: GeometricPacket = if path.is_file() {
        parse(&read_file(path)?)?
    } else {
        match example_text(spec) {
            Some(t) => parse(t)?,
            None => {
                return Err(Error::BadParameter(format!(
                    "no packet file or bundled example \"{spec}\""
                )))
            }
        }
    };
    match cli.precision {
        Some((m, n)) => packet.with_precision(m, n),
        None => Ok(packet),
    }
}

fn load_cartier(cli: &Cli, args: &CartierArgs) -> Result<CartierModule> {
    let module = match (&args.file, &args.packet) {
        (Some(path), None) => parse::<CartierModule>(&read_file(path)?)?,
        (None, Some(spec)) => {
            let deg = args
                .deg
                .ok_or_else(|| Error::BadParameter("--deg is required with --packet".into()))?;
            let p = load_packet(cli, spec)?;
            match p.degree(deg)? {
                Some(d) => d.wo.clone(),
                None => CartierModule::zero(p.field, p.witt_precision, p.v_precision),
            }
        }
        _ => {
            return Err(Error::BadParameter(
                "give exactly one of --file or --packet".into(),
            ))
        }
    };
    match cli.precision {
        Some((m, n)) => module.with_precision(m, n),
        None => Ok(module),
    }
}

fn degrees(p: &GeometricPacket, args: &PacketArgs) -> Result<Vec<i64>> {
    match (args.deg, args.all_degrees) {
        (Some(_), true) => Err(Error::BadParameter(
            "--deg and --all-degrees are exclusive".into(),
        )),
        (Some(d), false) => Ok(vec![d]),
        (None, true) => Ok(p.degrees.keys().copied().collect()),
        (None, false) => Err(Error::BadParameter("--deg is required".into())),
    }
}

// ---- dispatch ----

pub(super) fn dispatch(cli: &Cli) -> Report {
    let result = match &cli.command {
        Command::Atom { name, field: f } => atom(name, f),
        Command::Dm {
            op,
            input,
            other,
            word,
        } => dm(*op, input, other.as_deref(), word.as_deref()),
        Command::Gs { op, input, rho, a } => gs(*op, input, rho.as_deref(), *a),
        Command::Cartier { op, source, level } => cartier(cli, *op, source, *level),
        Command::Cohom { op, packet, coeff } => cohom(cli, *op, packet, coeff),
        Command::Formal { op, packet } => formal(cli, *op, packet),
        Command::Check { op, packet } => check(cli, *op, packet),
        Command::Examples { op, name } => examples(*op, name.as_deref()),
    };
    let mut r = result.unwrap_or_else(|e| Report::error(&e, cli.json));
    r.json = cli.json;
    r
}

fn atom(name: &str, f: &FieldArgs) -> Result<Report> {
    let g = gs_atom(field(f)?, parse_atom(name)?)?;
    let human = if g.p_part.is_zero() {
        text::gs(&g)
    } else {
        text::dm_doc(&g.p_part)
    };
    Ok(Report::ok(&g, human, 0))
}

fn dm(op: DmOp, input: &ModuleArgs, other: Option<&Path>, word: Option<&str>) -> Result<Report> {
    let m = load_gs(input)?.p_part;
    let need_word = || {
        word.ok_or_else(|| Error::BadParameter("--word is required".into()))
            .and_then(parse_word)
    };
    match op {
        DmOp::Show => Ok(Report::ok(&m, text::dm_doc(&m), 0)),
        DmOp::Dual => {
            let d = dm_dual(&m);
            Ok(Report::ok(&d, text::dm_doc(&d), 0))
        }
        DmOp::Fourway => {
            let s = dm_fourway(&m)?;
            let doc = FourWayParts {
                field: m.field(),
                parts: s.parts.to_vec(),
            };
            Ok(Report::ok(&doc, text::fourway(&m), 0))
        }
        DmOp::Iso => {
            let path =
                other.ok_or_else(|| Error::BadParameter("--other is required for iso".into()))?;
            let n = load_gs_file(path)?.p_part;
            let outcome = module_iso_test(&m, &n)?;
            let code = if outcome == IsoOutcome::Indeterminate {
                3
            } else {
                0
            };
            let doc = IsoDoc {
                schema: IsoDoc::SCHEMA.into(),
                outcome: outcome.as_str().into(),
            };
            Ok(Report::ok(&doc, format!("{}\n", outcome.as_str()), code))
        }
        DmOp::Kernel => {
            let k = dm_word_kernel(&m, need_word()?)?;
            Ok(Report::ok(&k, text::dm_doc(&k), 0))
        }
        DmOp::Cokernel => {
            let k = dm_word_cokernel(&m, need_word()?)?;
            Ok(Report::ok(&k, text::dm_doc(&k), 0))
        }
    }
}

fn parse_rho(k: FieldSpec, s: &str) -> Result<Vec<Vec<crate::field::Fq>>> {
    let bad = || Error::BadParameter(format!("bad rho \"{s}\""));
    let rows: Vec<Vec<crate::field::Fq>> = s
        .split(';')
        .map(|row| {
            row.split(',')
                .map(|e| {
                    let coeffs = e
                        .split(':')
                        .map(|c| c.trim().parse::<i64>())
                        .collect::<std::result::Result<Vec<_>, _>>()
                        .map_err(|_| bad())?;
                    k.from_coeffs(&coeffs)
                })
                .collect()
        })
        .collect::<Result<_>>()?;
    if rows.iter().any(|r| r.len() != rows.len()) {
        return Err(Error::Shape(format!("rho must be square, got \"{s}\"")));
    }
    Ok(rows)
}

fn gs(op: GsOp, input: &ModuleArgs, rho: Option<&str>, a: u32) -> Result<Report> {
    let show = |g: GroupScheme| {
        let h = text::gs(&g);
        Report::ok(&g, h, 0)
    };
    match op {
        GsOp::HeightOne => {
            let k = field(&input.field)?;
            let rho = rho.ok_or_else(|| Error::BadParameter("--rho is required".into()))?;
            let data = HeightOneData {
                field: k,
                rho: parse_rho(k, rho)?,
            };
            Ok(show(gs_height_one(&data)?))
        }
        GsOp::Classify => {
            let g = load_gs(input)?;
            let c = FieldClassification {
                field: g.field(),
                classification: gs_classify(&g)?,
            };
            Ok(Report::ok(
                &c,
                text::classification(c.field, &c.classification),
                0,
            ))
        }
        GsOp::Dual => Ok(show(gs_dual(&load_gs(input)?))),
        GsOp::FrobeniusKernel => Ok(show(gs_frobenius_kernel(&load_gs(input)?, a)?)),
        GsOp::VerschiebungKernel => Ok(show(gs_verschiebung_kernel(&load_gs(input)?, a)?)),
    }
}

fn cartier(cli: &Cli, op: CartierOp, source: &CartierArgs, level: u32) -> Result<Report> {
    let c = load_cartier(cli, source)?;
    let module = |m: DieudonneModule| Report::ok(&m, text::dm_doc(&m), 0);
    match op {
        CartierOp::Show => Ok(Report::ok(&c, text::cartier(&c), 0)),
        CartierOp::Trunc => Ok(module(cm_trunc(&c, level)?)),
        CartierOp::Tc => Ok(module(cm_tc_n(&c, level)?)),
        CartierOp::Torsion => Ok(module(cm_v_torsion(&c)?)),
        CartierOp::Connected => {
            let d = cm_connected_dm(&c)?;
            let mut human = String::from("colim_V M/V^n:\n");
            for l in &d.labels {
                human.push_str(&format!("  {l}\n"));
            }
            if d.torsion_flag {
                human.push_str("  (finite V-torsion dies in the colimit)\n");
            }
            let doc = ConnectedDoc {
                schema: ConnectedDoc::SCHEMA.into(),
                labels: d.labels,
                unipotent_dim: d.unipotent_dim,
                mult_corank: d.mult_corank,
                formal: d.formal,
                finite_leftover: d.finite_leftover,
                torsion_flag: d.torsion_flag,
            };
            Ok(Report::ok(&doc, human, 0))
        }
    }
}

/// One report per degree; several degrees are wrapped in a batch document.
fn per_degree(
    cli: &Cli,
    args: &PacketArgs,
    f: impl Fn(&GeometricPacket, i64) -> Result<(Value, String, i32)>,
) -> Result<Report> {
    let p = load_packet(cli, &args.packet)?;
    let degs = degrees(&p, args)?;
    let mut items = Vec::new();
    let mut human = String::new();
    let mut code = 0;
    for i in &degs {
        let (v, h, c) = f(&p, *i)?;
        items.push(v);
        human.push_str(&h);
        code = code.max(c);
    }
    if args.all_degrees {
        let doc = BatchDoc {
            schema: BatchDoc::SCHEMA.into(),
            items,
        };
        return Ok(Report::ok(&doc, human, code));
    }
    let mut out = String::new();
    super::serial::write_value(&items[0], 0, &mut out);
    out.push('\n');
    Ok(Report {
        human,
        machine: out,
        exit_code: code,
        json: false,
    })
}

fn cohom(cli: &Cli, op: CohomOp, args: &PacketArgs, coeff: &str) -> Result<Report> {
    let CohomOp::Report = op;
    let c = coefficient_from_tag(coeff)
        .ok_or_else(|| Error::BadParameter(format!("unknown coefficient \"{coeff}\"")))?;
    per_degree(cli, args, |p, i| {
        let r = match c {
            Coefficient::AlphaP => h_alpha_p(p, i)?,
            Coefficient::ZP => h_z_p(p, i)?,
            Coefficient::MuP(n) => h_mu_p(p, i, n)?,
            Coefficient::Omega(n) => h_omega_nu(p, i, n, OmegaNu::Omega)?,
            Coefficient::Nu(n) => h_omega_nu(p, i, n, OmegaNu::Nu)?,
            Coefficient::MuPBundle => projective_bundle_mu(p, i)?,
        };
        let human = text::cohom(p.field, &r);
        let doc = FieldReport {
            field: p.field,
            report: r,
        };
        Ok((to_value(&doc), human, 0))
    })
}

fn formal(cli: &Cli, op: FormalOp, args: &PacketArgs) -> Result<Report> {
    per_degree(cli, args, |p, i| match op {
        FormalOp::PhiFl | FormalOp::Psi => {
            let r = if op == FormalOp::PhiFl {
                phi_fl_report(p, i)?
            } else {
                psi_report(p, i)?
            };
            let human = text::formal(&r);
            Ok((
                to_value(&FieldReport {
                    field: p.field,
                    report: r,
                }),
                human,
                0,
            ))
        }
        FormalOp::Obstruction => {
            let m = phi_obstruction(p, i)?;
            let human = format!("obstruction in degree {i}\n{}", text::dm(&m, "  "));
            Ok((to_value(&m), human, 0))
        }
    })
}

fn check(cli: &Cli, op: CheckOp, args: &PacketArgs) -> Result<Report> {
    if op == CheckOp::Validate {
        let p = load_packet(cli, &args.packet)?;
        let v = packet_validate(&p)?;
        let mut human = format!("packet is valid ({} degrees)\n", p.degrees.len());
        for w in &v.warnings {
            human.push_str(&format!("  warning: {w}\n"));
        }
        let doc = ValidationDoc {
            schema: ValidationDoc::SCHEMA.into(),
            valid: true,
            warnings: v.warnings,
        };
        return Ok(Report::ok(&doc, human, 0));
    }
    per_degree(cli, args, |p, i| {
        if op == CheckOp::Les {
            let r = les_check(p, i)?;
            Ok((to_value(&r), text::les(&r), if r.exact { 0 } else { 1 }))
        } else {
            let r = parallelogram_check(p, i)?;
            Ok((
                to_value(&r),
                text::parallelogram(&r),
                if r.commutes { 0 } else { 1 },
            ))
        }
    })
}

fn examples(op: ExamplesOp, name: Option<&str>) -> Result<Report> {
    match op {
        ExamplesOp::List => {
            let names: Vec<String> = EXAMPLES
                .iter()
                .map(|(n, _)| format!("examples/{n}.json"))
                .collect();
            let human = names.iter().map(|n| format!("{n}\n")).collect();
            let doc = ExampleListDoc {
                schema: ExampleListDoc::SCHEMA.into(),
                examples: names,
            };
            Ok(Report::ok(&doc, human, 0))
        }
        ExamplesOp::Show => {
            let name = name.ok_or_else(|| Error::BadParameter("example name required".into()))?;
            let t = example_text(name)
                .ok_or_else(|| Error::BadParameter(format!("no bundled example \"{name}\"")))?;
            let p: GeometricPacket = parse(t)?;
            Ok(Report::ok(&p, t.to_string(), 0))
        }
    }
}
