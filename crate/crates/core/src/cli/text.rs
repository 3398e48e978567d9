//! Plain-text rendering.

use std::fmt::Write;

use crate::cartier::{CartierModule, CartierSummand};
use crate::cohomology::{
    CohomReport, FormalGroupReport, FormalKind, LesReport, ParallelogramReport,
};
use crate::dieudonne::{dm_fourway, Cell, DieudonneModule};
use crate::field::{FieldSpec, Fq};
use crate::galois::{WittRing, W};
use crate::group_scheme::{Classification, GroupScheme};
use crate::matrix::Matrix;

pub fn fq(k: FieldSpec, x: &Fq) -> String {
    let c = k.coeffs(x);
    if k.n() == 1 {
        return c[0].to_string();
    }
    let terms: Vec<String> = c
        .iter()
        .enumerate()
        .filter(|(_, &d)| d != 0)
        .map(|(i, &d)| match (i, d) {
            (0, _) => d.to_string(),
            (1, 1) => "x".into(),
            (1, _) => format!("{d}x"),
            (_, 1) => format!("x^{i}"),
            _ => format!("{d}x^{i}"),
        })
        .collect();
    if terms.is_empty() {
        "0".into()
    } else {
        terms.join("+")
    }
}

fn witt(r: &WittRing, a: &W, len: u32) -> String {
    let k = r.field();
    let comps: Vec<String> = r
        .to_components(a)
        .iter()
        .take(len as usize)
        .map(|c| fq(k, c))
        .collect();
    if len == 1 {
        comps[0].clone()
    } else {
        format!("({})", comps.join(", "))
    }
}

/// One line per row; row `i` shows `row_len[i]` Witt components.
pub fn matrix(m: &Matrix, row_len: &[u32], indent: &str) -> String {
    if m.rows() == 0 || m.cols() == 0 {
        return format!("{indent}[] ({}x{})\n", m.rows(), m.cols());
    }
    let r = m.ring();
    let cells: Vec<Vec<String>> = (0..m.rows())
        .map(|i| {
            (0..m.cols())
                .map(|j| witt(r, &m.get(i, j), row_len[i]))
                .collect()
        })
        .collect();
    let width = cells
        .iter()
        .flatten()
        .map(|s| s.chars().count())
        .max()
        .unwrap_or(1);
    let mut out = String::new();
    for row in cells {
        let padded: Vec<String> = row.iter().map(|s| format!("{s:>width$}")).collect();
        let _ = writeln!(out, "{indent}[ {} ]", padded.join("  "));
    }
    out
}

pub fn field_line(k: FieldSpec) -> String {
    if k.n() == 1 {
        format!("{k}")
    } else {
        format!("{k} (modulus {:?}, constant term first)", k.modulus())
    }
}

pub fn dm(m: &DieudonneModule, indent: &str) -> String {
    let mut out = String::new();
    let (_, pe) = m.order();
    let _ = writeln!(
        out,
        "{indent}length {} (order p^{pe}), profile {:?}",
        m.length(),
        m.profile()
    );
    if m.rank() == 0 {
        return out;
    }
    let _ = writeln!(out, "{indent}F =");
    out.push_str(&matrix(m.f_matrix(), m.profile(), &format!("{indent}  ")));
    let _ = writeln!(out, "{indent}V =");
    out.push_str(&matrix(m.v_matrix(), m.profile(), &format!("{indent}  ")));
    out
}

pub fn dm_doc(m: &DieudonneModule) -> String {
    format!(
        "Dieudonne module over {}\n{}",
        field_line(m.field()),
        dm(m, "  ")
    )
}

pub fn gs(g: &GroupScheme) -> String {
    let mut out = String::new();
    let (pe, c) = g.order();
    let _ = writeln!(
        out,
        "group scheme {}over {}, order p^{pe} * {c}",
        g.label
            .as_ref()
            .map(|l| format!("{l} "))
            .unwrap_or_default(),
        field_line(g.field())
    );
    if !g.etale_coprime.is_empty() {
        let _ = writeln!(
            out,
            "  constant prime-to-p part: invariant factors {:?}",
            g.etale_coprime
        );
    }
    out.push_str(&dm(&g.p_part, "  "));
    out
}

pub fn classification(k: FieldSpec, c: &Classification) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "classification over {}", field_line(k));
    let _ = writeln!(
        out,
        "  order: p^{} * {}",
        c.order_p_exponent, c.order_coprime
    );
    let h = c
        .height
        .map(|h| h.to_string())
        .unwrap_or_else(|| "none (V not nilpotent)".into());
    let _ = writeln!(out, "  height: {h}");
    for cell in Cell::ALL {
        let _ = writeln!(
            out,
            "  {:<26} length {}",
            cell.name(),
            c.cells[cell as usize]
        );
    }
    match &c.atoms {
        Some(a) if a.is_empty() => out.push_str("  atoms: (trivial)\n"),
        Some(a) => {
            let _ = writeln!(out, "  atoms: {}", a.join(" + "));
        }
        None => out.push_str("  atoms: not resolved\n"),
    }
    if let Some(h1) = &c.height_one {
        let rows: Vec<String> = h1
            .rho
            .iter()
            .map(|r| r.iter().map(|x| fq(k, x)).collect::<Vec<_>>().join(" "))
            .collect();
        let _ = writeln!(out, "  height one, rho = [{}]", rows.join("; "));
    }
    out
}

pub fn fourway(m: &DieudonneModule) -> String {
    let mut out = format!("four-way split over {}\n", field_line(m.field()));
    match dm_fourway(m) {
        Ok(s) => {
            for cell in Cell::ALL {
                let _ = writeln!(out, "  {}:", cell.name());
                out.push_str(&dm(s.part(cell), "    "));
            }
        }
        Err(e) => {
            let _ = writeln!(out, "  error: {e}");
        }
    }
    out
}

pub fn cartier(c: &CartierModule) -> String {
    let mut out = format!(
        "Cartier module over {}, witt precision {}, V precision {}\n",
        field_line(c.field),
        c.witt_precision,
        c.v_precision
    );
    if c.summands.is_empty() {
        out.push_str("  (zero)\n");
    }
    for s in &c.summands {
        match s {
            CartierSummand::Unit { f_unit } => {
                let _ = writeln!(out, "  unit-root summand of rank {}, F =", f_unit.rows());
                out.push_str(&matrix(
                    f_unit,
                    &vec![f_unit.ring().len(); f_unit.rows()],
                    "    ",
                ));
            }
            CartierSummand::Additive { rank } => {
                let _ = writeln!(out, "  additive summand k[[V]]^{rank}");
            }
            CartierSummand::Formal { h, mult } => {
                let _ = writeln!(
                    out,
                    "  formal summand, dimension 1 height {} (x{mult})",
                    h + 1
                );
            }
            CartierSummand::Finite(m) => {
                out.push_str("  finite summand\n");
                out.push_str(&dm(m, "    "));
            }
        }
    }
    out
}

pub fn cohom(k: FieldSpec, r: &CohomReport) -> String {
    let mut out = format!("H^{}({}) over {}\n", r.degree, r.coeff.tag(), field_line(k));
    match &r.finite_part {
        Some(m) => {
            let _ = writeln!(out, "  finite part: length {}", m.length());
            if r.pieces.len() > 1 {
                for (i, p) in r.pieces.iter().enumerate() {
                    let _ = writeln!(out, "  piece {i}:");
                    out.push_str(&dm(p, "    "));
                }
            } else if !m.is_zero() {
                out.push_str(&dm(m, "    "));
            }
        }
        None => out.push_str("  finite part: not assembled\n"),
    }
    let _ = writeln!(out, "  vector_dim: {}", r.vector_dim);
    if let Some(e) = r.etale_rank {
        let _ = writeln!(out, "  etale rank: {e}");
    }
    let _ = writeln!(out, "  extension: {}", r.extension_status.as_str());
    out
}

pub fn formal(r: &FormalGroupReport) -> String {
    let name = match r.kind {
        FormalKind::PhiFl => "Phi^fl",
        FormalKind::Psi => "Psi",
    };
    let mut out = format!("{name} in degree {}\n", r.degree);
    for l in &r.labels {
        let _ = writeln!(out, "  {l}");
    }
    let _ = writeln!(out, "  multiplicative corank: {}", r.mult_corank);
    let _ = writeln!(out, "  unipotent dimension: {}", r.unipotent_dim);
    if let Some(e) = r.etale_corank {
        let _ = writeln!(out, "  etale corank: {e}");
    }
    let _ = writeln!(
        out,
        "  infinitesimal obstruction: length {}",
        r.inf_obstruction.length()
    );
    let _ = writeln!(out, "  extension: {}", r.extension_status.as_str());
    out
}

pub fn les(r: &LesReport) -> String {
    let mut out = format!(
        "long exact sequence at degree {}: {}\n",
        r.degree,
        if r.exact { "exact" } else { "NOT exact" }
    );
    for (pos, d) in &r.defects {
        let _ = writeln!(out, "  position {pos}: len ker - len im = {d}");
    }
    for f in &r.failures {
        let _ = writeln!(out, "  failure: {f}");
    }
    out
}

pub fn parallelogram(r: &ParallelogramReport) -> String {
    let mut out = format!(
        "parallelogram at degree {}: {}\n",
        r.degree,
        if r.commutes {
            "commutes"
        } else {
            "does NOT commute"
        }
    );
    for (name, ok) in &r.checks {
        let _ = writeln!(out, "  [{}] {name}", if *ok { "ok" } else { "FAIL" });
    }
    out
}
