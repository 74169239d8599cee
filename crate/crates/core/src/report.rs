//! Serialized verification reports and hierarchy tables.
//!
//! Field order is the serialization order, so equal inputs give byte-equal
//! documents. Non-finite defects serialize as `null`.

use serde::Serialize;

use crate::error::Result;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Pass,
    Fail,
    Error,
    NotApplicable,
}

/// The identity a row checks: a short tag and the identity itself.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RowAnchor {
    pub tag: String,
    pub formula: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckRow {
    pub name: String,
    pub family: String,
    pub anchor: RowAnchor,
    pub samples: usize,
    pub max_abs_defect: f64,
    pub mean_abs_defect: f64,
    pub tol: f64,
    pub pass: bool,
    pub status: Status,
    pub reason: Option<String>,
}

impl CheckRow {
    /// Reduces per-point defects given in point order. Any error makes the
    /// row an error row; a NaN defect fails it.
    pub fn from_defects(
        name: String,
        family: &str,
        anchor: RowAnchor,
        tol: f64,
        defects: Vec<Result<f64>>,
    ) -> Self {
        let samples = defects.len();
        let first_err = defects.iter().enumerate().find_map(|(k, d)| d.as_ref().err().map(|e| (k, e.clone())));
        if let Some((k, e)) = first_err {
            return CheckRow {
                name,
                family: family.into(),
                anchor,
                samples,
                max_abs_defect: f64::NAN,
                mean_abs_defect: f64::NAN,
                tol,
                pass: false,
                status: Status::Error,
                reason: Some(format!("point {k}: {e}")),
            };
        }
        let vals: Vec<f64> = defects.into_iter().map(|d| d.unwrap_or(f64::NAN)).collect();
        let max = vals
            .iter()
            .fold(0.0f64, |w, &v| if v.is_nan() || w.is_nan() { f64::NAN } else { w.max(v) });
        let mean = vals.iter().sum::<f64>() / samples.max(1) as f64;
        let pass = max < tol;
        CheckRow {
            name,
            family: family.into(),
            anchor,
            samples,
            max_abs_defect: max,
            mean_abs_defect: mean,
            tol,
            pass,
            status: if pass { Status::Pass } else { Status::Fail },
            reason: None,
        }
    }

    pub fn not_applicable(name: String, family: &str, anchor: RowAnchor, tol: f64, reason: String) -> Self {
        CheckRow {
            name,
            family: family.into(),
            anchor,
            samples: 0,
            max_abs_defect: f64::NAN,
            mean_abs_defect: f64::NAN,
            tol,
            pass: true,
            status: Status::NotApplicable,
            reason: Some(reason),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Interval {
    pub coord: String,
    pub lo: f64,
    pub hi: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Environment {
    pub system: String,
    pub n: usize,
    pub seed: u64,
    pub samples: usize,
    pub tol: f64,
    pub depth: usize,
    pub min_index: i32,
    #[serde(rename = "box")]
    pub sample_box: Vec<Interval>,
    pub version: String,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct Summary {
    pub passed: usize,
    pub failed: usize,
    pub errors: usize,
    pub not_applicable: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerificationReport {
    pub environment: Environment,
    pub checks: Vec<CheckRow>,
    pub summary: Summary,
    pub all_pass: bool,
}

impl VerificationReport {
    pub fn new(environment: Environment, checks: Vec<CheckRow>) -> Self {
        let mut summary = Summary::default();
        for c in &checks {
            match c.status {
                Status::Pass => summary.passed += 1,
                Status::Fail => summary.failed += 1,
                Status::Error => summary.errors += 1,
                Status::NotApplicable => summary.not_applicable += 1,
            }
        }
        let all_pass = summary.failed == 0 && summary.errors == 0;
        VerificationReport {
            environment,
            checks,
            summary,
            all_pass,
        }
    }

    pub fn row(&self, name: &str) -> Option<&CheckRow> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes") + "\n"
    }

    /// One line per row, for terminals.
    pub fn to_text(&self) -> String {
        let mut s = format!(
            "{} n={} seed={} samples={} tol={:e}\n",
            self.environment.system,
            self.environment.n,
            self.environment.seed,
            self.environment.samples,
            self.environment.tol
        );
        for c in &self.checks {
            let status = match c.status {
                Status::Pass => "pass",
                Status::Fail => "FAIL",
                Status::Error => "ERROR",
                Status::NotApplicable => "n/a",
            };
            s += &format!("  {status:<5} {:<32} max {:<12.3e} tol {:.0e}", c.name, c.max_abs_defect, c.tol);
            if let Some(r) = &c.reason {
                s += &format!("  ({r})");
            }
            s.push('\n');
        }
        let m = &self.summary;
        s += &format!(
            "{} passed, {} failed, {} errors, {} not applicable\n",
            m.passed, m.failed, m.errors, m.not_applicable
        );
        s
    }
}

/// Hamiltonians at a probe point and the pairwise ladder defects
/// `‖π_i♯dĥ_j − π_j♯dĥ_i‖` over the built index range.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HierarchyTable {
    pub system: String,
    pub n: usize,
    pub depth: usize,
    pub probe: Vec<f64>,
    pub indices: Vec<i32>,
    pub h: Vec<f64>,
    pub ladder: Vec<Vec<f64>>,
}

impl HierarchyTable {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("table serializes") + "\n"
    }

    pub fn to_text(&self) -> String {
        let mut s = format!("{} n={} probe {:?}\n", self.system, self.n, self.probe);
        for (i, h) in self.indices.iter().zip(&self.h) {
            s += &format!("  h_{i:<3} = {h:.12}\n");
        }
        s += "ladder defects |π_i♯dh_j − π_j♯dh_i|:\n      ";
        for i in &self.indices {
            s += &format!("{i:>10}");
        }
        s.push('\n');
        for (i, row) in self.indices.iter().zip(&self.ladder) {
            s += &format!("  {i:>3} ");
            for v in row {
                s += &format!("{v:>10.1e}");
            }
            s.push('\n');
        }
        s
    }
}

/// What `pnhier catalog` shows for one entry.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CatalogSummary {
    pub id: String,
    pub n: usize,
    pub summary: String,
    #[serde(rename = "box")]
    pub sample_box: Vec<Interval>,
    pub exclusions: Vec<String>,
    pub hamiltonians: Vec<String>,
    pub extra_poisson: Vec<String>,
    pub min_index: i32,
    pub bihamiltonian: Option<String>,
    pub symmetry: bool,
    pub deformation: bool,
    pub lax: bool,
    pub flaschka: bool,
    pub anchors: Vec<RowAnchor>,
}

impl CatalogSummary {
    pub fn of(e: &crate::systems::CatalogEntry) -> Self {
        let chart = &e.pn.chart;
        CatalogSummary {
            id: e.id.into(),
            n: e.n,
            summary: e.summary.into(),
            sample_box: chart
                .coord_names
                .iter()
                .zip(&chart.sample_box)
                .map(|(c, &(lo, hi))| Interval { coord: c.clone(), lo, hi })
                .collect(),
            exclusions: chart.exclusions.iter().map(|x| x.name.clone()).collect(),
            hamiltonians: e.hamiltonians.iter().map(|(k, _)| k.clone()).collect(),
            extra_poisson: e.extra_poisson.iter().map(|(k, _)| k.clone()).collect(),
            min_index: e.min_index,
            bihamiltonian: e.bihamiltonian.as_ref().map(|b| b.formula.into()),
            symmetry: e.symmetry.is_some(),
            deformation: e.deformation.is_some(),
            lax: e.lax.is_some(),
            flaschka: e.flaschka.is_some(),
            anchors: e
                .anchors
                .iter()
                .map(|a| RowAnchor {
                    tag: a.tag.into(),
                    formula: a.formula.into(),
                })
                .collect(),
        }
    }

    pub fn to_text(&self) -> String {
        let mut s = format!("{} (n = {}): {}\n", self.id, self.n, self.summary);
        let bx: Vec<String> = self
            .sample_box
            .iter()
            .map(|i| format!("{} ∈ [{}, {}]", i.coord, i.lo, i.hi))
            .collect();
        s += &format!("  box: {}\n", bx.join(", "));
        if !self.exclusions.is_empty() {
            s += &format!("  excluded: {}\n", self.exclusions.join(", "));
        }
        s += &format!("  hamiltonians: {}\n", self.hamiltonians.join(", "));
        if let Some(b) = &self.bihamiltonian {
            s += &format!("  pair: {b}\n");
        }
        for a in &self.anchors {
            s += &format!("  [{}] {}\n", a.tag, a.formula);
        }
        s
    }
}
