//! CSV reports.
//!
//! Every table starts with `#` lines naming what it holds and the
//! conventions (`lap = d dbar`, `dbar = (d/dx + i d/dy)/2`), then a header
//! row. Numbers use a fixed exponential format so identical inputs give
//! byte-identical files.

use crate::dbar::SolverReport;
use crate::density::DensityReport;
use crate::error::{Error, Result};
use crate::interpolation::InterpolationReport;
use crate::kernel_ops::SchurCertificate;
use crate::CONVENTIONS;

/// Fixed-format number: 12 significant digits, `nan`/`inf` spelled out.
pub fn num(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        }
    } else if x == 0.0 {
        format!("{:.11e}", 0.0)
    } else {
        format!("{x:.11e}")
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CsvTable {
    title: String,
    notes: Vec<String>,
    columns: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl CsvTable {
    pub fn new(title: &str, columns: &[&str]) -> Self {
        CsvTable {
            title: title.into(),
            notes: Vec::new(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    /// Extra `#` line under the title.
    pub fn note(&mut self, text: impl Into<String>) -> &mut Self {
        self.notes.push(text.into());
        self
    }

    pub fn push(&mut self, row: Vec<String>) -> Result<()> {
        if row.len() != self.columns.len() {
            return Err(Error::Parameter(format!("row has {} fields, table has {}", row.len(), self.columns.len())));
        }
        self.rows.push(row);
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn columns(&self) -> &[String] {
        &self.columns
    }

    pub fn rows(&self) -> &[Vec<String>] {
        &self.rows
    }

    pub fn render(&self) -> String {
        let mut out = format!("# {}\n# conventions: {}\n", self.title, CONVENTIONS);
        for n in &self.notes {
            out.push_str(&format!("# {n}\n"));
        }
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.columns).expect("in-memory write");
        for r in &self.rows {
            w.write_record(r).expect("in-memory write");
        }
        let body = w.into_inner().expect("in-memory flush");
        out.push_str(std::str::from_utf8(&body).expect("utf8 fields"));
        out
    }
}

pub fn density_table(rep: &DensityReport) -> CsvTable {
    let mut t = CsvTable::new(
        "density: numerator = sum_{|a|<r} (1-|a|^2)/2 over M_b(Z); denominator = log 1/(1-r^2); margin = 1 - p S/denominator",
        &["r", "center_id", "numerator", "denominator", "value", "margin"],
    );
    t.note(format!("p = {}", num(rep.p)));
    for (i, c) in rep.centers.iter().enumerate() {
        t.note(format!("center {i} = ({}, {})", num(c.re), num(c.im)));
    }
    for row in &rep.rows {
        t.push(vec![
            num(row.r),
            row.center_id.to_string(),
            num(row.numerator),
            num(row.denominator),
            num(row.value),
            num(row.margin),
        ])
        .expect("six fields");
    }
    t
}

/// Per-radius summary of a density report.
pub fn density_summary_table(rep: &DensityReport) -> CsvTable {
    let mut t = CsvTable::new(
        "density summary per radius",
        &["r", "dplus", "dplus_log", "margin_means", "margin_laplace", "lap_multiplier"],
    );
    for (i, &r) in rep.radii.iter().enumerate() {
        t.push(vec![
            num(r),
            num(rep.dplus[i]),
            num(rep.dplus_log[i]),
            num(rep.margin_means[i]),
            num(rep.margin_laplace[i]),
            num(rep.lap_multiplier[i]),
        ])
        .expect("six fields");
    }
    t
}

pub fn interpolation_table(reports: &[InterpolationReport]) -> CsvTable {
    let mut t = CsvTable::new(
        "interpolation: norms in A^p(dA); ||c||_{p,Z} = (sum |c_a|^p (1-|a|^2)^2)^{1/p}; residual = ||(1-|z|^2) dbar f|| / ||(1-|z|^2) dbar g||",
        &["p", "z_count", "node_err_max", "norm_ratio", "residual"],
    );
    for r in reports {
        t.push(vec![num(r.p), r.z_count.to_string(), num(r.node_err_max), num(r.norm_ratio), num(r.residual)])
            .expect("five fields");
    }
    t
}

pub fn solver_table(reports: &[SolverReport]) -> CsvTable {
    let mut t = CsvTable::new(
        "dbar solve of (1-|z|^2) dbar u = f; residual_ratio in L^2(dA); bound_ratio = ||u||_{p,Z}/||f||_{p,Z}",
        &["p", "z_count", "m", "grid_depth", "residual_ratio", "bound_ratio"],
    );
    for r in reports {
        t.push(vec![
            num(r.p),
            r.z_count.to_string(),
            r.m.to_string(),
            r.depth.to_string(),
            num(r.residual_ratio),
            num(r.bound_ratio),
        ])
        .expect("six fields");
    }
    t
}

/// One Schur-test row: kernel parameters, certificate and the empirical
/// norm (`nan` when not measured).
pub struct SchurRow {
    pub a: f64,
    pub b: f64,
    pub q: f64,
    pub cert: SchurCertificate,
    pub empirical_norm: f64,
}

pub fn schur_table(rows: &[SchurRow]) -> CsvTable {
    let mut t = CsvTable::new(
        "Schur test with h = (1-|z|^2)^{-alpha}",
        &["a", "b", "p", "q", "alpha", "C1", "C2", "empirical_norm", "verdict"],
    );
    for r in rows {
        t.push(vec![
            num(r.a),
            num(r.b),
            num(r.cert.p),
            num(r.q),
            num(r.cert.alpha),
            num(r.cert.c1),
            num(r.cert.c2),
            num(r.empirical_norm),
            if r.cert.success { "bounded" } else { "fails" }.into(),
        ])
        .expect("nine fields");
    }
    t
}

/// Plot-ready `(x, y)` series.
pub fn series_table(title: &str, x: &str, y: &str, points: &[(f64, f64)]) -> CsvTable {
    let mut t = CsvTable::new(title, &[x, y]);
    for &(a, b) in points {
        t.push(vec![num(a), num(b)]).expect("two fields");
    }
    t
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::density::density_report;
    use crate::geometry::PointSet;
    use crate::C64;

    #[test]
    fn number_format_is_fixed() {
        assert_eq!(num(1.0), "1.00000000000e0");
        assert_eq!(num(-0.00125), "-1.25000000000e-3");
        assert_eq!(num(f64::NAN), "nan");
        assert_eq!(num(-0.0), num(0.0));
        assert_eq!(num(f64::NEG_INFINITY), "-inf");
    }

    #[test]
    fn table_layout() {
        let mut t = CsvTable::new("demo", &["x", "label"]);
        t.note("seed = 3");
        t.push(vec![num(0.5), "a,b".into()]).unwrap();
        assert!(t.push(vec![num(0.5)]).is_err());
        let text = t.render();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "# demo");
        assert!(lines[1].starts_with("# conventions: lap=d*dbar"));
        assert_eq!(lines[2], "# seed = 3");
        assert_eq!(lines[3], "x,label");
        assert_eq!(lines[4], "5.00000000000e-1,\"a,b\"");
    }

    #[test]
    fn empty_set_density_rows_have_unit_margin() {
        let rep = density_report(&PointSet::empty(), 2.0, &[0.9, 0.99], &[C64::new(0.0, 0.0)]).unwrap();
        let t = density_table(&rep);
        assert_eq!(t.columns(), &["r", "center_id", "numerator", "denominator", "value", "margin"]);
        assert_eq!(t.len(), 2);
        for row in t.rows() {
            assert_eq!(row[5], num(1.0));
        }
        assert_eq!(t.render(), density_table(&rep).render());
    }
}
