//! JSON documents for the domain types.
//!
//! Every top-level document carries a `"schema"` tag and the field header
//! `"p"`, `"n"`, `"modulus"`. Matrices are row-major. An `F_q` element is an
//! array of polynomial coefficients (constant term first); a bare integer is
//! accepted on input. A Witt vector is an array of such components; a bare
//! integer `a` is read as the image of `a` in `W(k)`.

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::field::{FieldSpec, Fq};
use crate::galois::WittRing;
use crate::matrix::Matrix;
use crate::witt::WittVector;

pub trait Serial: Sized {
    const SCHEMA: &'static str;
    type Wire: Serialize + DeserializeOwned;

    fn to_wire(&self) -> Self::Wire;
    fn from_wire(w: Self::Wire) -> Result<Self>;
}

/// Canonical text: objects indented, arrays without objects kept on one line.
pub fn serialize<T: Serial>(x: &T) -> String {
    let v = serde_json::to_value(x.to_wire()).expect("wire types serialize");
    let mut out = String::new();
    write_value(&v, 0, &mut out);
    out.push('\n');
    out
}

pub fn parse<T: Serial>(text: &str) -> Result<T> {
    let w = parse_wire::<T::Wire>(text)?;
    T::from_wire(w)
}

pub fn to_value<T: Serial>(x: &T) -> Value {
    serde_json::to_value(x.to_wire()).expect("wire types serialize")
}

fn parse_wire<W: DeserializeOwned>(text: &str) -> Result<W> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let w: W = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        Error::schema(
            if path.is_empty() { ".".into() } else { path },
            e.inner().to_string(),
        )
    })?;
    Ok(w)
}

fn has_object(v: &Value) -> bool {
    match v {
        Value::Object(_) => true,
        Value::Array(a) => a.iter().any(has_object),
        _ => false,
    }
}

pub fn write_value(v: &Value, indent: usize, out: &mut String) {
    let pad = |k: usize| "  ".repeat(k);
    match v {
        Value::Object(map) if !map.is_empty() => {
            out.push_str("{\n");
            let n = map.len();
            for (i, (k, x)) in map.iter().enumerate() {
                out.push_str(&pad(indent + 1));
                out.push_str(&serde_json::to_string(k).expect("string key"));
                out.push_str(": ");
                write_value(x, indent + 1, out);
                if i + 1 < n {
                    out.push(',');
                }
                out.push('\n');
            }
            out.push_str(&pad(indent));
            out.push('}');
        }
        Value::Array(a) if has_object(v) => {
            out.push_str("[\n");
            for (i, x) in a.iter().enumerate() {
                out.push_str(&pad(indent + 1));
                write_value(x, indent + 1, out);
                if i + 1 < a.len() {
                    out.push(',');
                }
                out.push('\n');
            }
            out.push_str(&pad(indent));
            out.push(']');
        }
        _ => out.push_str(&serde_json::to_string(v).expect("json value")),
    }
}

pub(crate) fn check_schema(found: &str, want: &str) -> Result<()> {
    if found != want {
        return Err(Error::schema(
            "schema",
            format!("expected schema version \"{want}\", found \"{found}\""),
        ));
    }
    Ok(())
}

// ---- field elements, Witt vectors, matrices ----

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
#[serde(untagged)]
pub enum FqWire {
    Int(i64),
    Coeffs(Vec<i64>),
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
#[serde(untagged)]
pub enum WittWire {
    Int(i64),
    Comps(Vec<FqWire>),
}

pub type FqMatrixWire = Vec<Vec<FqWire>>;
pub type WittMatrixWire = Vec<Vec<WittWire>>;

pub fn field_from_header(p: u32, n: Option<usize>, modulus: Option<&[u32]>) -> Result<FieldSpec> {
    FieldSpec::new(p, n.unwrap_or(1), modulus)
}

pub fn fq_to_wire(k: FieldSpec, x: &Fq) -> FqWire {
    FqWire::Coeffs(k.coeffs(x).iter().map(|&c| c as i64).collect())
}

pub fn fq_from_wire(k: FieldSpec, w: &FqWire, path: &str) -> Result<Fq> {
    match w {
        FqWire::Int(a) => Ok(k.from_int(*a)),
        FqWire::Coeffs(c) => k
            .from_coeffs(c)
            .map_err(|e| Error::schema(path, e.to_string())),
    }
}

fn witt_entry_to_wire(ring: &WittRing, a: &crate::galois::W, len: u32) -> WittWire {
    let k = ring.field();
    let comps = ring.to_components(a);
    WittWire::Comps(
        comps
            .iter()
            .take(len as usize)
            .map(|c| fq_to_wire(k, c))
            .collect(),
    )
}

fn witt_entry_from_wire(ring: &WittRing, w: &WittWire, path: &str) -> Result<crate::galois::W> {
    let k = ring.field();
    match w {
        WittWire::Int(a) => Ok(ring.from_int(*a)),
        WittWire::Comps(cs) => {
            let comps = cs
                .iter()
                .enumerate()
                .map(|(i, c)| fq_from_wire(k, c, &format!("{path}[{i}]")))
                .collect::<Result<Vec<_>>>()?;
            Ok(ring.from_components(&comps))
        }
    }
}

fn check_shape(
    rows: usize,
    row_lens: impl Iterator<Item = usize>,
    want: (usize, usize),
    path: &str,
) -> Result<()> {
    if rows != want.0 {
        return Err(Error::Shape(format!(
            "{path}: {rows} rows, expected {}",
            want.0
        )));
    }
    for (i, l) in row_lens.enumerate() {
        if l != want.1 {
            return Err(Error::Shape(format!(
                "{path}[{i}]: {l} entries, expected {}",
                want.1
            )));
        }
    }
    Ok(())
}

/// Row `i` is written with `row_len[i]` Witt components.
pub fn witt_matrix_to_wire(m: &Matrix, row_len: &[u32]) -> WittMatrixWire {
    let r = m.ring();
    (0..m.rows())
        .map(|i| {
            (0..m.cols())
                .map(|j| witt_entry_to_wire(r, &m.get(i, j), row_len[i]))
                .collect()
        })
        .collect()
}

pub fn witt_matrix_from_wire(
    ring: &std::sync::Arc<WittRing>,
    w: &WittMatrixWire,
    shape: (usize, usize),
    path: &str,
) -> Result<Matrix> {
    check_shape(w.len(), w.iter().map(|r| r.len()), shape, path)?;
    let mut m = Matrix::zeros(ring, shape.0, shape.1);
    for (i, row) in w.iter().enumerate() {
        for (j, e) in row.iter().enumerate() {
            m.set(
                i,
                j,
                witt_entry_from_wire(ring, e, &format!("{path}[{i}][{j}]"))?,
            );
        }
    }
    Ok(m)
}

/// Matrix over `k` (entries stored as residues in `W_1`).
pub fn fq_matrix_to_wire(m: &Matrix) -> FqMatrixWire {
    let r = m.ring();
    let k = r.field();
    (0..m.rows())
        .map(|i| {
            (0..m.cols())
                .map(|j| fq_to_wire(k, &r.residue(&m.get(i, j))))
                .collect()
        })
        .collect()
}

pub fn fq_matrix_from_wire(
    k: FieldSpec,
    w: &FqMatrixWire,
    shape: (usize, usize),
    path: &str,
) -> Result<Matrix> {
    check_shape(w.len(), w.iter().map(|r| r.len()), shape, path)?;
    let ring = WittRing::get(k, 1)?;
    let mut m = Matrix::zeros(&ring, shape.0, shape.1);
    for (i, row) in w.iter().enumerate() {
        for (j, e) in row.iter().enumerate() {
            m.set(
                i,
                j,
                ring.lift(&fq_from_wire(k, e, &format!("{path}[{i}][{j}]"))?),
            );
        }
    }
    Ok(m)
}

pub fn fq_rows_to_wire(k: FieldSpec, rows: &[Vec<Fq>]) -> FqMatrixWire {
    rows.iter()
        .map(|r| r.iter().map(|x| fq_to_wire(k, x)).collect())
        .collect()
}

pub fn fq_rows_from_wire(k: FieldSpec, w: &FqMatrixWire, path: &str) -> Result<Vec<Vec<Fq>>> {
    w.iter()
        .enumerate()
        .map(|(i, r)| {
            r.iter()
                .enumerate()
                .map(|(j, x)| fq_from_wire(k, x, &format!("{path}[{i}][{j}]")))
                .collect()
        })
        .collect()
}

// ---- Witt vectors ----

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WittVectorWire {
    pub schema: String,
    pub p: u32,
    #[serde(default)]
    pub n: Option<usize>,
    #[serde(default)]
    pub modulus: Option<Vec<u32>>,
    pub components: Vec<FqWire>,
}

impl Serial for WittVector {
    const SCHEMA: &'static str = "ffgs_witt_v1";
    type Wire = WittVectorWire;

    fn to_wire(&self) -> WittVectorWire {
        let k = self.field();
        WittVectorWire {
            schema: Self::SCHEMA.into(),
            p: k.p(),
            n: Some(k.n()),
            modulus: Some(k.modulus().to_vec()),
            components: self.components().iter().map(|c| fq_to_wire(k, c)).collect(),
        }
    }

    fn from_wire(w: WittVectorWire) -> Result<Self> {
        check_schema(&w.schema, Self::SCHEMA)?;
        let k = field_from_header(w.p, w.n, w.modulus.as_deref())?;
        let comps = w
            .components
            .iter()
            .enumerate()
            .map(|(i, c)| fq_from_wire(k, c, &format!("components[{i}]")))
            .collect::<Result<Vec<_>>>()?;
        WittVector::new(k, comps)
    }
}

// ---- Dieudonne modules ----

use crate::dieudonne::DieudonneModule;

/// A module document. Inside larger documents only `profile`, `F`, `V` are
/// written and the field comes from the enclosing header.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DmWire {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schema: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub modulus: Option<Vec<u32>>,
    pub profile: Vec<u32>,
    #[serde(rename = "F")]
    pub f: WittMatrixWire,
    #[serde(rename = "V")]
    pub v: WittMatrixWire,
}

pub fn dm_body(m: &DieudonneModule) -> DmWire {
    DmWire {
        schema: None,
        p: None,
        n: None,
        modulus: None,
        profile: m.profile().to_vec(),
        f: witt_matrix_to_wire(m.f_matrix(), m.profile()),
        v: witt_matrix_to_wire(m.v_matrix(), m.profile()),
    }
}

pub fn dm_from_body(k: FieldSpec, w: &DmWire, path: &str) -> Result<DieudonneModule> {
    let r = w.profile.len();
    if let Some(i) = w.profile.iter().position(|&e| e == 0) {
        return Err(Error::schema(
            format!("{path}.profile[{i}]"),
            "exponents must be >= 1",
        ));
    }
    let m = w.profile.iter().copied().max().unwrap_or(1);
    let ring = WittRing::get(k, m)?;
    let f = witt_matrix_from_wire(&ring, &w.f, (r, r), &format!("{path}.F"))?;
    let v = witt_matrix_from_wire(&ring, &w.v, (r, r), &format!("{path}.V"))?;
    DieudonneModule::new(k, w.profile.clone(), &f, &v)
}

pub(crate) fn header(k: FieldSpec) -> (u32, Option<usize>, Option<Vec<u32>>) {
    (k.p(), Some(k.n()), Some(k.modulus().to_vec()))
}

impl Serial for DieudonneModule {
    const SCHEMA: &'static str = "ffgs_dm_v1";
    type Wire = DmWire;

    fn to_wire(&self) -> DmWire {
        let (p, n, modulus) = header(self.field());
        DmWire {
            schema: Some(Self::SCHEMA.into()),
            p: Some(p),
            n,
            modulus,
            ..dm_body(self)
        }
    }

    fn from_wire(w: DmWire) -> Result<Self> {
        check_schema(w.schema.as_deref().unwrap_or(""), Self::SCHEMA)?;
        let p = w.p.ok_or_else(|| Error::schema("p", "missing field `p`"))?;
        let k = field_from_header(p, w.n, w.modulus.as_deref())?;
        dm_from_body(k, &w, "")
    }
}

// ---- group schemes and classifications ----

use crate::dieudonne::Cell;
use crate::group_scheme::{Classification, GroupScheme, HeightOneData};

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GsWire {
    pub schema: String,
    pub p: u32,
    #[serde(default)]
    pub n: Option<usize>,
    #[serde(default)]
    pub modulus: Option<Vec<u32>>,
    pub p_part: DmWire,
    #[serde(default)]
    pub etale_coprime: Vec<u64>,
    #[serde(default)]
    pub label: Option<String>,
}

impl Serial for GroupScheme {
    const SCHEMA: &'static str = "ffgs_gs_v1";
    type Wire = GsWire;

    fn to_wire(&self) -> GsWire {
        let (p, n, modulus) = header(self.field());
        GsWire {
            schema: Self::SCHEMA.into(),
            p,
            n,
            modulus,
            p_part: dm_body(&self.p_part),
            etale_coprime: self.etale_coprime.clone(),
            label: self.label.clone(),
        }
    }

    fn from_wire(w: GsWire) -> Result<Self> {
        check_schema(&w.schema, Self::SCHEMA)?;
        let k = field_from_header(w.p, w.n, w.modulus.as_deref())?;
        let p_part = dm_from_body(k, &w.p_part, "p_part")?;
        for (i, &d) in w.etale_coprime.iter().enumerate() {
            if d <= 1 || d % k.p() as u64 == 0 {
                return Err(Error::schema(
                    format!("etale_coprime[{i}]"),
                    format!("{d} is not a nontrivial order prime to p"),
                ));
            }
        }
        Ok(GroupScheme {
            p_part,
            etale_coprime: w.etale_coprime,
            label: w.label,
        })
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassificationWire {
    pub schema: String,
    pub p: u32,
    #[serde(default)]
    pub n: Option<usize>,
    #[serde(default)]
    pub modulus: Option<Vec<u32>>,
    pub order_p_exponent: u32,
    pub order_coprime: u64,
    pub height: Option<u32>,
    /// Cell lengths keyed by cell name.
    pub cells: std::collections::BTreeMap<String, u32>,
    pub atoms: Option<Vec<String>>,
    pub height_one_rho: Option<FqMatrixWire>,
}

/// Classifications do not record their field, so the document carries it
/// alongside.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FieldClassification {
    pub field: FieldSpec,
    pub classification: Classification,
}

impl Serial for FieldClassification {
    const SCHEMA: &'static str = "ffgs_classification_v1";
    type Wire = ClassificationWire;

    fn to_wire(&self) -> ClassificationWire {
        let c = &self.classification;
        let (p, n, modulus) = header(self.field);
        ClassificationWire {
            schema: Self::SCHEMA.into(),
            p,
            n,
            modulus,
            order_p_exponent: c.order_p_exponent,
            order_coprime: c.order_coprime,
            height: c.height,
            cells: Cell::ALL
                .iter()
                .map(|x| (x.name().to_string(), c.cells[*x as usize]))
                .collect(),
            atoms: c.atoms.clone(),
            height_one_rho: c
                .height_one
                .as_ref()
                .map(|h| fq_rows_to_wire(self.field, &h.rho)),
        }
    }

    fn from_wire(w: ClassificationWire) -> Result<Self> {
        check_schema(&w.schema, Self::SCHEMA)?;
        let field = field_from_header(w.p, w.n, w.modulus.as_deref())?;
        let mut cells = [0u32; 4];
        for (name, &len) in &w.cells {
            let c = Cell::ALL
                .iter()
                .find(|c| c.name() == name)
                .ok_or_else(|| Error::schema(format!("cells.{name}"), "unknown cell"))?;
            cells[*c as usize] = len;
        }
        let height_one = match &w.height_one_rho {
            Some(rows) => Some(HeightOneData {
                field,
                rho: fq_rows_from_wire(field, rows, "height_one_rho")?,
            }),
            None => None,
        };
        Ok(FieldClassification {
            field,
            classification: Classification {
                order_p_exponent: w.order_p_exponent,
                order_coprime: w.order_coprime,
                height: w.height,
                cells,
                atoms: w.atoms,
                height_one,
            },
        })
    }
}

// ---- Cartier modules ----

use crate::cartier::{CartierModule, CartierSummand, ExtensionPolicy, ExtensionStatus};

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
pub enum SummandWire {
    /// `F_unit` defaults to the identity.
    Unit {
        rank: usize,
        #[serde(rename = "F_unit", default, skip_serializing_if = "Option::is_none")]
        f_unit: Option<WittMatrixWire>,
    },
    Additive {
        rank: usize,
    },
    Formal {
        h: u32,
        #[serde(default = "one")]
        mult: usize,
    },
    Finite {
        module: DmWire,
    },
}

fn one() -> usize {
    1
}

pub fn summand_to_wire(s: &CartierSummand) -> SummandWire {
    match s {
        CartierSummand::Unit { f_unit } => SummandWire::Unit {
            rank: f_unit.rows(),
            f_unit: Some(witt_matrix_to_wire(
                f_unit,
                &vec![f_unit.ring().len(); f_unit.rows()],
            )),
        },
        CartierSummand::Additive { rank } => SummandWire::Additive { rank: *rank },
        CartierSummand::Formal { h, mult } => SummandWire::Formal { h: *h, mult: *mult },
        CartierSummand::Finite(m) => SummandWire::Finite { module: dm_body(m) },
    }
}

pub fn summand_from_wire(
    k: FieldSpec,
    witt_precision: u32,
    w: &SummandWire,
    path: &str,
) -> Result<CartierSummand> {
    let wrap = |e: Error| match e {
        Error::Schema { .. } | Error::Shape(_) => e,
        other => Error::schema(path, other.to_string()),
    };
    match w {
        SummandWire::Unit { rank, f_unit } => match f_unit {
            None => CartierSummand::trivial_unit(k, witt_precision, *rank).map_err(wrap),
            Some(rows) => {
                let ring = WittRing::get(k, witt_precision)?;
                let f =
                    witt_matrix_from_wire(&ring, rows, (*rank, *rank), &format!("{path}.F_unit"))?;
                CartierSummand::unit(f).map_err(wrap)
            }
        },
        SummandWire::Additive { rank } => Ok(CartierSummand::Additive { rank: *rank }),
        SummandWire::Formal { h, mult } => CartierSummand::formal(*h, *mult).map_err(wrap),
        SummandWire::Finite { module } => Ok(CartierSummand::Finite(dm_from_body(
            k,
            module,
            &format!("{path}.module"),
        )?)),
    }
}

fn summands_from_wire(
    k: FieldSpec,
    witt_precision: u32,
    ws: &[SummandWire],
    path: &str,
) -> Result<Vec<CartierSummand>> {
    ws.iter()
        .enumerate()
        .map(|(i, s)| summand_from_wire(k, witt_precision, s, &format!("{path}[{i}]")))
        .collect()
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CartierWire {
    pub schema: String,
    pub p: u32,
    #[serde(default)]
    pub n: Option<usize>,
    #[serde(default)]
    pub modulus: Option<Vec<u32>>,
    pub witt_precision: u32,
    pub v_precision: u32,
    pub summands: Vec<SummandWire>,
}

impl Serial for CartierModule {
    const SCHEMA: &'static str = "ffgs_cartier_v1";
    type Wire = CartierWire;

    fn to_wire(&self) -> CartierWire {
        let (p, n, modulus) = header(self.field);
        CartierWire {
            schema: Self::SCHEMA.into(),
            p,
            n,
            modulus,
            witt_precision: self.witt_precision,
            v_precision: self.v_precision,
            summands: self.summands.iter().map(summand_to_wire).collect(),
        }
    }

    fn from_wire(w: CartierWire) -> Result<Self> {
        check_schema(&w.schema, Self::SCHEMA)?;
        let k = field_from_header(w.p, w.n, w.modulus.as_deref())?;
        let summands = summands_from_wire(k, w.witt_precision, &w.summands, "summands")?;
        CartierModule::new(k, summands, w.witt_precision, w.v_precision)
    }
}

fn policy_str(p: ExtensionPolicy) -> &'static str {
    match p {
        ExtensionPolicy::Split => "split",
        ExtensionPolicy::Undetermined => "undetermined",
    }
}

fn policy_from_str(s: &str) -> Result<ExtensionPolicy> {
    match s {
        "split" => Ok(ExtensionPolicy::Split),
        "undetermined" => Ok(ExtensionPolicy::Undetermined),
        _ => Err(Error::schema(
            "extension_policy",
            format!("unknown policy \"{s}\""),
        )),
    }
}

pub fn status_from_str(s: &str, path: &str) -> Result<ExtensionStatus> {
    [
        ExtensionStatus::Canonical,
        ExtensionStatus::SplitAssumed,
        ExtensionStatus::Undetermined,
    ]
    .into_iter()
    .find(|x| x.as_str() == s)
    .ok_or_else(|| Error::schema(path, format!("unknown extension status \"{s}\"")))
}

// ---- geometric packets ----

use std::collections::BTreeMap;

use crate::cohomology::{packet_validate, BData, DegreeData, GeometricPacket, OData};

fn plus_one() -> i32 {
    1
}

fn minus_one() -> i32 {
    -1
}

fn yes() -> bool {
    true
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OWire {
    pub dim: usize,
    #[serde(rename = "F")]
    pub f: FqMatrixWire,
    /// Frobenius twist of `F`; must be `1`.
    #[serde(default = "plus_one")]
    pub twist: i32,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BWire {
    pub dim: usize,
    #[serde(rename = "C")]
    pub c: FqMatrixWire,
    /// Frobenius twist of `C`; must be `-1`.
    #[serde(default = "minus_one")]
    pub twist: i32,
    #[serde(default = "yes")]
    pub stabilized: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DegreeWire {
    #[serde(default)]
    pub wo: Vec<SummandWire>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub o: Option<OWire>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b: Option<BWire>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d: Option<FqMatrixWire>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub etale_corank: Option<u32>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PacketWire {
    pub schema: String,
    pub p: u32,
    #[serde(default)]
    pub n: Option<usize>,
    #[serde(default)]
    pub modulus: Option<Vec<u32>>,
    pub witt_precision: u32,
    pub v_precision: u32,
    pub extension_policy: String,
    pub degrees: BTreeMap<String, DegreeWire>,
}

fn degree_to_wire(d: &DegreeData) -> DegreeWire {
    DegreeWire {
        wo: d.wo.summands.iter().map(summand_to_wire).collect(),
        o: d.o.as_ref().map(|o| OWire {
            dim: o.dim(),
            f: fq_matrix_to_wire(&o.f),
            twist: 1,
        }),
        b: d.b.as_ref().map(|b| BWire {
            dim: b.dim(),
            c: fq_matrix_to_wire(&b.c),
            twist: -1,
            stabilized: b.stabilized,
        }),
        d: d.d.as_ref().map(fq_matrix_to_wire),
        etale_corank: d.etale_corank,
    }
}

fn degree_from_wire(
    k: FieldSpec,
    wp: u32,
    vp: u32,
    w: &DegreeWire,
    path: &str,
) -> Result<DegreeData> {
    let summands = summands_from_wire(k, wp, &w.wo, &format!("{path}.wo"))?;
    let wo = CartierModule::new(k, summands, wp, vp)?;
    let o = match &w.o {
        Some(o) => {
            if o.twist != 1 {
                return Err(Error::schema(
                    format!("{path}.o.twist"),
                    format!("F on H^i(O) is p-linear (twist 1), found twist {}", o.twist),
                ));
            }
            Some(OData {
                f: fq_matrix_from_wire(k, &o.f, (o.dim, o.dim), &format!("{path}.o.F"))?,
            })
        }
        None => None,
    };
    let b = match &w.b {
        Some(b) => {
            if b.twist != -1 {
                return Err(Error::schema(
                    format!("{path}.b.twist"),
                    format!(
                        "the Cartier operator is p^-1-linear (twist -1), found twist {}",
                        b.twist
                    ),
                ));
            }
            Some(BData {
                c: fq_matrix_from_wire(k, &b.c, (b.dim, b.dim), &format!("{path}.b.C"))?,
                stabilized: b.stabilized,
            })
        }
        None => None,
    };
    let shape = (
        b.as_ref().map_or(0, |x| x.dim()),
        o.as_ref().map_or(0, |x| x.dim()),
    );
    let d = match &w.d {
        Some(d) => Some(fq_matrix_from_wire(k, d, shape, &format!("{path}.d"))?),
        None => None,
    };
    Ok(DegreeData {
        wo,
        o,
        b,
        d,
        etale_corank: w.etale_corank,
    })
}

impl Serial for GeometricPacket {
    const SCHEMA: &'static str = "ffgs_packet_v1";
    type Wire = PacketWire;

    fn to_wire(&self) -> PacketWire {
        let (p, n, modulus) = header(self.field);
        PacketWire {
            schema: Self::SCHEMA.into(),
            p,
            n,
            modulus,
            witt_precision: self.witt_precision,
            v_precision: self.v_precision,
            extension_policy: policy_str(self.extension_policy).into(),
            degrees: self
                .degrees
                .iter()
                .map(|(i, d)| (i.to_string(), degree_to_wire(d)))
                .collect(),
        }
    }

    fn from_wire(w: PacketWire) -> Result<Self> {
        check_schema(&w.schema, Self::SCHEMA)?;
        let k = field_from_header(w.p, w.n, w.modulus.as_deref())?;
        let extension_policy = policy_from_str(&w.extension_policy)?;
        let mut degrees = BTreeMap::new();
        for (key, dw) in &w.degrees {
            let path = format!("degrees.{key}");
            let i: i64 = key
                .parse()
                .ok()
                .filter(|&i: &i64| i >= 0)
                .ok_or_else(|| Error::schema(&path, "degree keys are nonnegative integers"))?;
            degrees.insert(
                i,
                degree_from_wire(k, w.witt_precision, w.v_precision, dw, &path)?,
            );
        }
        let packet = GeometricPacket {
            field: k,
            witt_precision: w.witt_precision,
            v_precision: w.v_precision,
            degrees,
            extension_policy,
        };
        packet_validate(&packet)?;
        Ok(packet)
    }
}

// ---- reports ----

use crate::cohomology::{
    Coefficient, CohomReport, FormalGroupReport, FormalKind, LesReport, ParallelogramReport,
};

/// Inverse of [`Coefficient::tag`]; also accepts `mu_p_bundle`.
pub fn coefficient_from_tag(s: &str) -> Option<Coefficient> {
    let power = |rest: &str| rest.parse::<u32>().ok().filter(|&n| n >= 1);
    match s {
        "alpha_p" => Some(Coefficient::AlphaP),
        "z_p" => Some(Coefficient::ZP),
        "mu_p" => Some(Coefficient::MuP(1)),
        "mu_p(bundle)" | "mu_p_bundle" => Some(Coefficient::MuPBundle),
        _ => {
            if let Some(r) = s.strip_prefix("mu_p^") {
                power(r).map(Coefficient::MuP)
            } else if let Some(r) = s.strip_prefix("omega_") {
                power(r).map(Coefficient::Omega)
            } else if let Some(r) = s.strip_prefix("nu_") {
                power(r).map(Coefficient::Nu)
            } else {
                None
            }
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CohomReportWire {
    pub schema: String,
    pub p: u32,
    #[serde(default)]
    pub n: Option<usize>,
    #[serde(default)]
    pub modulus: Option<Vec<u32>>,
    pub coeff: String,
    pub degree: i64,
    pub finite_part: Option<DmWire>,
    pub pieces: Vec<DmWire>,
    pub vector_dim: usize,
    pub etale_rank: Option<u32>,
    pub extension_status: String,
}

/// A cohomology report together with its field.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FieldReport<T> {
    pub field: FieldSpec,
    pub report: T,
}

impl Serial for FieldReport<CohomReport> {
    const SCHEMA: &'static str = "ffgs_cohom_report_v1";
    type Wire = CohomReportWire;

    fn to_wire(&self) -> CohomReportWire {
        let r = &self.report;
        let (p, n, modulus) = header(self.field);
        CohomReportWire {
            schema: Self::SCHEMA.into(),
            p,
            n,
            modulus,
            coeff: r.coeff.tag(),
            degree: r.degree,
            finite_part: r.finite_part.as_ref().map(dm_body),
            pieces: r.pieces.iter().map(dm_body).collect(),
            vector_dim: r.vector_dim,
            etale_rank: r.etale_rank,
            extension_status: r.extension_status.as_str().into(),
        }
    }

    fn from_wire(w: CohomReportWire) -> Result<Self> {
        check_schema(&w.schema, Self::SCHEMA)?;
        let k = field_from_header(w.p, w.n, w.modulus.as_deref())?;
        let coeff = coefficient_from_tag(&w.coeff).ok_or_else(|| {
            Error::schema("coeff", format!("unknown coefficient \"{}\"", w.coeff))
        })?;
        let finite_part = match &w.finite_part {
            Some(m) => Some(dm_from_body(k, m, "finite_part")?),
            None => None,
        };
        let pieces = w
            .pieces
            .iter()
            .enumerate()
            .map(|(i, m)| dm_from_body(k, m, &format!("pieces[{i}]")))
            .collect::<Result<Vec<_>>>()?;
        Ok(FieldReport {
            field: k,
            report: CohomReport {
                coeff,
                degree: w.degree,
                finite_part,
                pieces,
                vector_dim: w.vector_dim,
                etale_rank: w.etale_rank,
                extension_status: status_from_str(&w.extension_status, "extension_status")?,
            },
        })
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FormalReportWire {
    pub schema: String,
    pub p: u32,
    #[serde(default)]
    pub n: Option<usize>,
    #[serde(default)]
    pub modulus: Option<Vec<u32>>,
    pub kind: String,
    pub degree: i64,
    pub labels: Vec<String>,
    pub mult_corank: usize,
    pub unipotent_dim: usize,
    /// `[height, multiplicity]` pairs.
    pub formal: Vec<(u32, usize)>,
    pub inf_obstruction: DmWire,
    pub etale_corank: Option<u32>,
    pub extension_status: String,
}

impl Serial for FieldReport<FormalGroupReport> {
    const SCHEMA: &'static str = "ffgs_formal_report_v1";
    type Wire = FormalReportWire;

    fn to_wire(&self) -> FormalReportWire {
        let r = &self.report;
        let (p, n, modulus) = header(self.field);
        FormalReportWire {
            schema: Self::SCHEMA.into(),
            p,
            n,
            modulus,
            kind: match r.kind {
                FormalKind::PhiFl => "phi_fl".into(),
                FormalKind::Psi => "psi".into(),
            },
            degree: r.degree,
            labels: r.labels.clone(),
            mult_corank: r.mult_corank,
            unipotent_dim: r.unipotent_dim,
            formal: r.formal.clone(),
            inf_obstruction: dm_body(&r.inf_obstruction),
            etale_corank: r.etale_corank,
            extension_status: r.extension_status.as_str().into(),
        }
    }

    fn from_wire(w: FormalReportWire) -> Result<Self> {
        check_schema(&w.schema, Self::SCHEMA)?;
        let k = field_from_header(w.p, w.n, w.modulus.as_deref())?;
        let kind = match w.kind.as_str() {
            "phi_fl" => FormalKind::PhiFl,
            "psi" => FormalKind::Psi,
            other => {
                return Err(Error::schema(
                    "kind",
                    format!("unknown report kind \"{other}\""),
                ))
            }
        };
        Ok(FieldReport {
            field: k,
            report: FormalGroupReport {
                kind,
                degree: w.degree,
                labels: w.labels,
                mult_corank: w.mult_corank,
                unipotent_dim: w.unipotent_dim,
                formal: w.formal,
                inf_obstruction: dm_from_body(k, &w.inf_obstruction, "inf_obstruction")?,
                etale_corank: w.etale_corank,
                extension_status: status_from_str(&w.extension_status, "extension_status")?,
            },
        })
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LesReportWire {
    pub schema: String,
    pub degree: i64,
    pub exact: bool,
    /// `[position, defect]` pairs.
    pub defects: Vec<(usize, i64)>,
    pub failures: Vec<String>,
}

impl Serial for LesReport {
    const SCHEMA: &'static str = "ffgs_les_report_v1";
    type Wire = LesReportWire;

    fn to_wire(&self) -> LesReportWire {
        LesReportWire {
            schema: Self::SCHEMA.into(),
            degree: self.degree,
            exact: self.exact,
            defects: self.defects.clone(),
            failures: self.failures.clone(),
        }
    }

    fn from_wire(w: LesReportWire) -> Result<Self> {
        check_schema(&w.schema, Self::SCHEMA)?;
        Ok(LesReport {
            degree: w.degree,
            exact: w.exact,
            defects: w.defects,
            failures: w.failures,
        })
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
#[serde(deny_unknown_fields)]
pub struct CheckWire {
    pub name: String,
    pub ok: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParallelogramWire {
    pub schema: String,
    pub degree: i64,
    pub commutes: bool,
    pub checks: Vec<CheckWire>,
}

impl Serial for ParallelogramReport {
    const SCHEMA: &'static str = "ffgs_parallelogram_report_v1";
    type Wire = ParallelogramWire;

    fn to_wire(&self) -> ParallelogramWire {
        ParallelogramWire {
            schema: Self::SCHEMA.into(),
            degree: self.degree,
            commutes: self.commutes,
            checks: self
                .checks
                .iter()
                .map(|(name, ok)| CheckWire {
                    name: name.clone(),
                    ok: *ok,
                })
                .collect(),
        }
    }

    fn from_wire(w: ParallelogramWire) -> Result<Self> {
        check_schema(&w.schema, Self::SCHEMA)?;
        Ok(ParallelogramReport {
            degree: w.degree,
            commutes: w.commutes,
            checks: w.checks.into_iter().map(|c| (c.name, c.ok)).collect(),
        })
    }
}
