use std::collections::BTreeMap;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{genus_instance, verify_instance, HarnessError, InequalityReport};
use crate::generators::FamilySpec;
use crate::homology::build_basis;
use crate::sweep::trace_proof;

pub const CSV_COLUMNS: [&str; 13] =
    ["instance", "family", "params", "area", "boundary_len", "delta", "ell", "defect", "ratio", "case", "pass", "refine", "seconds"];

/// One instance of a family run: a report, or the error that stopped it.
#[derive(Debug, Clone, Serialize)]
pub struct FamilyRow {
    pub instance: String,
    pub spec: FamilySpec,
    pub report: Option<InequalityReport>,
    /// Proof case for genus-1 instances.
    pub case: Option<String>,
    pub error: Option<String>,
    pub seconds: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct FamilySummary {
    pub instances: usize,
    pub passed: usize,
    pub failed: usize,
    pub errors: usize,
    pub constant: f64,
    pub max_ratio: Option<f64>,
    pub argmax: Option<String>,
    pub cases: BTreeMap<String, String>,
    pub error_messages: BTreeMap<String, String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct FamilyRun {
    pub rows: Vec<FamilyRow>,
    pub summary: FamilySummary,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum Grid {
    List(Vec<FamilySpec>),
    Table { instances: Vec<FamilySpec>, constant: Option<f64> },
}

/// Parse a grid file: either a list of specs or
/// `{"instances": [...], "constant": M}`.
pub fn read_grid(text: &str) -> Result<(Vec<FamilySpec>, Option<f64>), HarnessError> {
    match serde_json::from_str::<Grid>(text) {
        Ok(Grid::List(v)) => Ok((v, None)),
        Ok(Grid::Table { instances, constant }) => Ok((instances, constant)),
        Err(e) => Err(HarnessError::Grid(e.to_string())),
    }
}

fn run_one(index: usize, spec: &FamilySpec, constant: f64) -> FamilyRow {
    let instance = format!("{index:03}-{}", spec.name());
    let start = Instant::now();
    let outcome = (|| -> Result<(InequalityReport, Option<String>), HarnessError> {
        let mesh = spec.build()?;
        if mesh.genus() >= 2 {
            return Ok((genus_instance(&mesh, &instance, Some(spec), constant)?, None));
        }
        let report = verify_instance(&mesh, &instance, Some(spec), constant)?;
        let cert = trace_proof(&mesh, &build_basis(&mesh)?)?;
        Ok((report, Some(cert.case.label().to_string())))
    })();
    let seconds = start.elapsed().as_secs_f64();
    match outcome {
        Ok((report, case)) => FamilyRow { instance, spec: spec.clone(), report: Some(report), case, error: None, seconds },
        Err(e) => FamilyRow { instance, spec: spec.clone(), report: None, case: None, error: Some(e.to_string()), seconds },
    }
}

/// Verify every spec (in parallel) and collect rows in grid order.
pub fn run_family(specs: &[FamilySpec], constant: f64) -> FamilyRun {
    let rows: Vec<FamilyRow> = specs.par_iter().enumerate().map(|(i, s)| run_one(i, s, constant)).collect();
    let mut summary = FamilySummary {
        instances: rows.len(),
        passed: 0,
        failed: 0,
        errors: 0,
        constant,
        max_ratio: None,
        argmax: None,
        cases: BTreeMap::new(),
        error_messages: BTreeMap::new(),
    };
    for row in &rows {
        match (&row.report, &row.error) {
            (Some(r), _) => {
                if r.pass {
                    summary.passed += 1;
                } else {
                    summary.failed += 1;
                }
                if summary.max_ratio.map_or(true, |m| r.ratio > m) {
                    summary.max_ratio = Some(r.ratio);
                    summary.argmax = Some(row.instance.clone());
                }
            }
            (None, e) => {
                summary.errors += 1;
                summary.error_messages.insert(row.instance.clone(), e.clone().unwrap_or_default());
            }
        }
        if let Some(c) = &row.case {
            summary.cases.insert(row.instance.clone(), c.clone());
        }
    }
    FamilyRun { rows, summary }
}

impl FamilyRun {
    /// CSV with one row per instance. The `seconds` column stays empty
    /// unless `timings` is set, so repeated runs are byte-identical.
    pub fn to_csv(&self, timings: bool) -> Result<String, HarnessError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(CSV_COLUMNS)?;
        for row in &self.rows {
            let secs = if timings { format!("{:.3}", row.seconds) } else { String::new() };
            let mut rec = vec![row.instance.clone(), row.spec.name().to_string(), row.spec.params()];
            match &row.report {
                Some(r) => {
                    rec.extend([r.area, r.boundary_len, r.delta, r.ell, r.defect, r.ratio].map(|x| x.to_string()));
                    rec.push(row.case.clone().unwrap_or_else(|| "-".into()));
                    rec.push(r.pass.to_string());
                }
                None => {
                    rec.extend(std::iter::repeat(String::new()).take(7));
                    rec.push("error".into());
                }
            }
            rec.push(row.spec.refine().to_string());
            rec.push(secs);
            w.write_record(&rec)?;
        }
        let bytes = w.into_inner().map_err(|e| HarnessError::Io(e.into_error()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }
}

/// 3 when any instance errored, else 2 when any check failed, else 0.
pub fn exit_code(summary: &FamilySummary) -> i32 {
    if summary.errors > 0 {
        3
    } else if summary.failed > 0 {
        2
    } else {
        0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::Family;

    #[test]
    fn empty_grid_has_header_only() {
        let run = run_family(&[], 1000.0);
        assert_eq!(run.to_csv(false).unwrap(), CSV_COLUMNS.join(",") + "\n");
        assert_eq!(exit_code(&run.summary), 0);
        assert!(run.summary.max_ratio.is_none());
    }

    #[test]
    fn disk_row_is_an_error() {
        let specs = [
            FamilySpec::new(Family::HandleDisk { eps: 0.2, refine: 0 }),
            FamilySpec::new(Family::UnitDisk { refine: 0 }),
        ];
        let run = run_family(&specs, 1000.0);
        assert!(run.rows[0].report.as_ref().unwrap().pass);
        assert!(run.rows[1].error.is_some());
        assert_eq!(exit_code(&run.summary), 3);
        let csv = run.to_csv(false).unwrap();
        assert_eq!(csv.lines().count(), 3);
        assert!(csv.lines().nth(2).unwrap().contains(",error,"));
        assert_eq!(run.summary.argmax.as_deref(), Some("000-handle_disk"));
    }

    #[test]
    fn failing_constant_gives_two() {
        let run = run_family(&[FamilySpec::new(Family::HandleDisk { eps: 0.2, refine: 0 })], 1e-9);
        assert_eq!(exit_code(&run.summary), 2);
    }

    #[test]
    fn grid_forms() {
        let (v, m) = read_grid(r#"[{"family":"csaszar"}]"#).unwrap();
        assert_eq!((v.len(), m), (1, None));
        let (v, m) = read_grid(r#"{"instances":[{"family":"handle_disk","eps":0.1}],"constant":10}"#).unwrap();
        assert_eq!((v.len(), m), (1, Some(10.0)));
        assert!(read_grid("{").is_err());
    }
}
