//! Text and TSV rendering of analysis results.

use std::fmt::Write;

use super::AnalysisResult;
use crate::domain::OctValue;
use crate::var::VarId;

#[derive(Clone, Copy, PartialEq, Eq, Debug, Default)]
pub enum Format {
    #[default]
    Text,
    Tsv,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, Default)]
pub struct ReportOptions {
    pub format: Format,
    /// Also list every stored cell.
    pub cells: bool,
}

/// `x in [lo, hi], ...`, `unreachable`, or `true` with no variables.
fn intervals(v: &OctValue) -> String {
    if v.is_bottom() {
        return "unreachable".into();
    }
    if v.n_vars() == 0 {
        return "true".into();
    }
    (0..v.n_vars())
        .map(|i| {
            let x = VarId(i);
            format!("{} in {}", v.vars().name(x), v.bounds_of(x).expect("not bottom"))
        })
        .collect::<Vec<_>>()
        .join(", ")
}

pub fn render(res: &AnalysisResult, opts: &ReportOptions) -> String {
    let mut out = String::new();
    match opts.format {
        Format::Text => {
            for p in &res.points {
                let _ = writeln!(out, "{}: {}", p.label(), intervals(&p.value));
                if opts.cells {
                    for (u, v, c) in p.value.cell_strings() {
                        let _ = writeln!(out, "    {u} {v} {c}");
                    }
                }
            }
            if !res.asserts.is_empty() {
                let proven = res.asserts.iter().filter(|a| a.proven).count();
                let _ = writeln!(
                    out,
                    "asserts: {proven} proven, {} unproven",
                    res.asserts.len() - proven
                );
                for a in &res.asserts {
                    let verdict = if a.proven { "proven" } else { "unproven" };
                    let _ = writeln!(out, "  L{} {}: {verdict}", a.line, a.text);
                }
            }
            for w in &res.warnings {
                let _ = writeln!(out, "warning: line {}: {}", w.line, w.msg);
            }
        }
        Format::Tsv => {
            out.push_str("point\tkind\tpayload\n");
            for (i, p) in res.points.iter().enumerate() {
                let id = format!("p{i}");
                let _ = writeln!(out, "{id}\t{}\t{}", p.label(), intervals(&p.value));
                if opts.cells {
                    for (u, v, c) in p.value.cell_strings() {
                        let _ = writeln!(out, "{id}\tcell\t{u} {v} {c}");
                    }
                }
            }
            for a in &res.asserts {
                let verdict = if a.proven { "proven" } else { "unproven" };
                let _ = writeln!(out, "L{}\tassert\t{verdict}: {}", a.line, a.text);
            }
            for w in &res.warnings {
                let _ = writeln!(out, "L{}\twarning\t{}", w.line, w.msg);
            }
        }
    }
    out
}
