//! Case files, the suite harness and report rendering.
//!
//! A case file holds one case object or an array of them:
//!
//! ```json
//! { "row": 4, "L": "m12", "n": 5, "H": "m12_h_a5", "K": "m12_k_m11",
//!   "expect_holds": true, "expected_intersection_order": "5" }
//! ```
//!
//! `H` is either a record name or `{"search": {"seed": .., "attempts": .., "n": ..}}`.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex};
use std::time::Instant;

use num_bigint::BigUint;
use num_integer::Integer;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::catalog::{Catalog, GroupHandle};
use crate::error::{Error, Result};
use crate::factorize::{verify_in, FactorizationVerdict, Outcome, VerifyOptions};
use crate::perm::Permutation;
use crate::recognize::{recognize_alternating, search_factor_subgroup, Overall, RecognitionVerdict, SearchRecipe};
use crate::{BigCount, StabilizerChain};

/// Seed of the generator used for A_n recognition of every case.
pub const RECOGNITION_SEED: u64 = 0x0a11_7e57;
pub const TABLE1_ROWS: u32 = 28;

/// Process exit codes shared by the CLI.
pub mod exit {
    pub const PASS: i32 = 0;
    pub const MISMATCH: i32 = 1;
    pub const INPUT: i32 = 2;
    pub const INDETERMINATE: i32 = 3;
    pub const SEARCH_EXHAUSTED: i32 = 4;
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum HSpec {
    Asset(String),
    Search { search: SearchRecipe },
}

impl HSpec {
    pub fn describe(&self) -> String {
        match self {
            HSpec::Asset(name) => name.clone(),
            HSpec::Search { search } => format!("search(seed={}, attempts={}, n={})", search.seed, search.attempts, search.n),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Case {
    pub row: Option<u32>,
    #[serde(rename = "L")]
    pub l: String,
    /// `H` must be recognized as `A_n` when set.
    #[serde(default)]
    pub n: Option<usize>,
    #[serde(rename = "H")]
    pub h: HSpec,
    #[serde(rename = "K")]
    pub k: String,
    pub expect_holds: bool,
    #[serde(default)]
    pub expected_intersection_order: Option<String>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum CaseFile {
    One(Case),
    Many(Vec<Case>),
}

pub fn read_cases(path: &Path) -> Result<Vec<Case>> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io { path: path.display().to_string(), source })?;
    let file: CaseFile = serde_json::from_str(&text).map_err(|source| Error::Json { path: path.display().to_string(), source })?;
    Ok(match file {
        CaseFile::One(c) => vec![c],
        CaseFile::Many(v) => v,
    })
}

pub fn row_case_path(catalog: &Catalog, row: u32) -> PathBuf {
    catalog.cases_dir().join(format!("table1_row{row:02}.json"))
}

/// Parses a row selection such as `1,4,5-8`. The empty string selects nothing.
pub fn parse_rows(spec: &str) -> Result<Vec<u32>> {
    let mut rows = Vec::new();
    for part in spec.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let bad = || Error::Precondition(format!("bad row selection {part:?}"));
        let (a, b) = match part.split_once('-') {
            Some((a, b)) => (a.trim().parse::<u32>().map_err(|_| bad())?, b.trim().parse::<u32>().map_err(|_| bad())?),
            None => {
                let a = part.parse::<u32>().map_err(|_| bad())?;
                (a, a)
            }
        };
        if a == 0 || b > TABLE1_ROWS || a > b {
            return Err(Error::Precondition(format!("row selection {part:?} is outside 1..{TABLE1_ROWS}")));
        }
        rows.extend(a..=b);
    }
    rows.sort_unstable();
    rows.dedup();
    Ok(rows)
}

/// Loads the cases of the given Table 1 rows, labelled `rowNN.i`.
pub fn table1_cases(catalog: &Catalog, rows: &[u32]) -> Result<Vec<(String, Case)>> {
    let mut out = Vec::new();
    for &row in rows {
        for (i, case) in read_cases(&row_case_path(catalog, row))?.into_iter().enumerate() {
            out.push((format!("row{row:02}.{}", i + 1), case));
        }
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CaseStatus {
    Pass,
    Mismatch,
    Indeterminate,
    Error,
}

impl CaseStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            CaseStatus::Pass => "pass",
            CaseStatus::Mismatch => "mismatch",
            CaseStatus::Indeterminate => "indeterminate",
            CaseStatus::Error => "error",
        }
    }

    pub fn exit_code(self) -> i32 {
        match self {
            CaseStatus::Pass => exit::PASS,
            CaseStatus::Mismatch => exit::MISMATCH,
            CaseStatus::Indeterminate => exit::INDETERMINATE,
            CaseStatus::Error => exit::INPUT,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CaseReport {
    pub id: String,
    pub row: Option<u32>,
    #[serde(rename = "L")]
    pub l: String,
    pub n: Option<usize>,
    #[serde(rename = "H")]
    pub h: String,
    #[serde(rename = "K")]
    pub k: String,
    pub expect_holds: bool,
    pub expected_intersection_order: Option<String>,
    pub status: CaseStatus,
    /// Why the case did not pass.
    pub reason: Option<String>,
    pub verdict: Option<FactorizationVerdict>,
    pub recognition: Option<RecognitionVerdict>,
    /// Seed and attempt index of a searched `H`.
    pub search: Option<SearchProvenance>,
    pub wall_seconds: f64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchProvenance {
    pub seed: u64,
    pub attempt: usize,
    pub generators: Vec<String>,
}

impl CaseReport {
    /// One-line summary, e.g. `row04.1 pass: m12 = m12_h_a5 * m12_k_m11 holds, index 12, |H∩K| = 5`.
    pub fn verdict_line(&self) -> String {
        let mut s = format!("{} {}: {} = {} * {}", self.id, self.status.as_str(), self.l, self.h, self.k);
        if let Some(v) = &self.verdict {
            let outcome = match v.outcome {
                Outcome::Holds => "holds",
                Outcome::Fails => "fails",
                Outcome::Indeterminate => "indeterminate",
            };
            let _ = write!(s, " {outcome}, index {}, orbit {}", v.index, v.orbit_size);
            if let Some(i) = &v.intersection_order {
                let _ = write!(s, ", |H∩K| = {i}");
            }
            if v.exact {
                s.push_str(", exact");
            }
        }
        if let Some(r) = &self.reason {
            let _ = write!(s, " ({r})");
        }
        s
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Totals {
    pub cases: usize,
    pub passed: usize,
    pub mismatched: usize,
    pub indeterminate: usize,
    pub errors: usize,
    pub wall_seconds: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub tool: String,
    pub version: String,
    pub toolchain: String,
    pub recognition_seed: u64,
    pub cases: Vec<CaseReport>,
    pub totals: Totals,
}

impl SuiteReport {
    pub fn new(cases: Vec<CaseReport>, wall_seconds: f64) -> Self {
        let count = |s: CaseStatus| cases.iter().filter(|c| c.status == s).count();
        let totals = Totals {
            cases: cases.len(),
            passed: count(CaseStatus::Pass),
            mismatched: count(CaseStatus::Mismatch),
            indeterminate: count(CaseStatus::Indeterminate),
            errors: count(CaseStatus::Error),
            wall_seconds,
        };
        SuiteReport {
            tool: "factorforge".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            toolchain: env!("FACTORFORGE_RUSTC").into(),
            recognition_seed: RECOGNITION_SEED,
            cases,
            totals,
        }
    }

    pub fn all_passed(&self) -> bool {
        self.totals.passed == self.totals.cases
    }

    /// Input errors dominate, then mismatches, then indeterminate verdicts.
    pub fn exit_code(&self) -> i32 {
        if self.totals.errors > 0 {
            exit::INPUT
        } else if self.totals.mismatched > 0 {
            exit::MISMATCH
        } else if self.totals.indeterminate > 0 {
            exit::INDETERMINATE
        } else {
            exit::PASS
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn to_markdown(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "# factorforge Table 1 report\n");
        let _ = writeln!(s, "{} {} ({}), recognition seed {:#x}\n", self.tool, self.version, self.toolchain, self.recognition_seed);
        s.push_str("| case | row | L | n | H | K | expected | index | orbit | \\|H∩K\\| | exact | status | seconds |\n");
        s.push_str("|---|---|---|---|---|---|---|---|---|---|---|---|---|\n");
        for c in &self.cases {
            let v = c.verdict.as_ref();
            let cell = |x: Option<String>| x.unwrap_or_else(|| "-".into());
            let _ = writeln!(
                s,
                "| {} | {} | {} | {} | {} | {} | {} | {} | {} | {} | {} | {} | {:.2} |",
                c.id,
                cell(c.row.map(|r| r.to_string())),
                c.l,
                cell(c.n.map(|n| n.to_string())),
                c.h,
                c.k,
                if c.expect_holds { "holds" } else { "fails" },
                cell(v.map(|v| v.index.to_string())),
                cell(v.map(|v| v.orbit_size.to_string())),
                cell(v.and_then(|v| v.intersection_order.as_ref().map(|i| i.to_string()))),
                cell(v.map(|v| if v.exact { "yes" } else { "no" }.to_string())),
                c.status.as_str(),
                c.wall_seconds
            );
        }
        let t = &self.totals;
        let _ = writeln!(
            s,
            "\n{} cases: {} passed, {} mismatched, {} indeterminate, {} errors; {:.1} s",
            t.cases, t.passed, t.mismatched, t.indeterminate, t.errors, t.wall_seconds
        );
        s
    }
}

type Memo<V> = Mutex<HashMap<String, Arc<Mutex<Option<V>>>>>;

/// Runs cases against a catalog, memoizing A_n recognition per `(H, n)`.
pub struct Harness {
    pub catalog: Catalog,
    /// Coset budget; defaults to twice the index of each case.
    pub budget_cap: Option<BigCount>,
    recognitions: Memo<std::result::Result<RecognitionVerdict, String>>,
}

struct Resolved {
    l: Arc<GroupHandle>,
    h: Vec<Permutation>,
    k: Arc<GroupHandle>,
    search: Option<SearchProvenance>,
}

impl Harness {
    pub fn new(catalog: Catalog) -> Self {
        Harness { catalog, budget_cap: None, recognitions: Mutex::new(HashMap::new()) }
    }

    fn resolve(&self, case: &Case) -> Result<std::result::Result<Resolved, String>> {
        let l = self.catalog.load(&case.l)?;
        let k = self.catalog.load(&case.k)?;
        let (h, search) = match &case.h {
            HSpec::Asset(name) => (self.catalog.load(name)?.gens.clone(), None),
            HSpec::Search { search } => {
                let t = search_factor_subgroup(&l, &k.gens, search.n, search.attempts, search.seed)?;
                let Some(found) = t.success else {
                    return Ok(Err(format!("search exhausted {} attempts", search.attempts)));
                };
                let gens = found.generators.iter().map(|c| Permutation::parse_cycles(c, l.degree())).collect::<Result<Vec<_>>>()?;
                (gens, Some(SearchProvenance { seed: found.seed, attempt: found.attempt, generators: found.generators }))
            }
        };
        Ok(Ok(Resolved { l, h, k, search }))
    }

    fn recognition(&self, case: &Case, h: &[Permutation], degree: usize, n: usize) -> std::result::Result<RecognitionVerdict, String> {
        let key = format!("{}#{n}", case.h.describe());
        let slot = self.recognitions.lock().unwrap().entry(key).or_default().clone();
        let mut slot = slot.lock().unwrap();
        if let Some(v) = slot.as_ref() {
            return v.clone();
        }
        let v = StabilizerChain::build(degree, h)
            .and_then(|chain| recognize_alternating(&chain, n, &mut ChaCha8Rng::seed_from_u64(RECOGNITION_SEED)))
            .map_err(|e| e.to_string());
        *slot = Some(v.clone());
        v
    }

    pub fn run_case(&self, id: &str, case: &Case) -> CaseReport {
        let start = Instant::now();
        let mut report = CaseReport {
            id: id.to_string(),
            row: case.row,
            l: case.l.clone(),
            n: case.n,
            h: case.h.describe(),
            k: case.k.clone(),
            expect_holds: case.expect_holds,
            expected_intersection_order: case.expected_intersection_order.clone(),
            status: CaseStatus::Error,
            reason: None,
            verdict: None,
            recognition: None,
            search: None,
            wall_seconds: 0.0,
        };
        let (status, reason) = match self.evaluate(case, &mut report) {
            Ok(x) => x,
            Err(e) => (CaseStatus::Error, Some(e.to_string())),
        };
        report.status = status;
        report.reason = reason;
        report.wall_seconds = start.elapsed().as_secs_f64();
        report
    }

    fn evaluate(&self, case: &Case, report: &mut CaseReport) -> Result<(CaseStatus, Option<String>)> {
        let expected_int = match &case.expected_intersection_order {
            Some(s) => Some(s.parse::<BigCount>().map_err(|_| Error::Precondition(format!("expected_intersection_order {s:?} is not a decimal integer")))?),
            None => None,
        };
        let r = match self.resolve(case)? {
            Ok(r) => r,
            Err(msg) => return Ok((CaseStatus::Mismatch, Some(msg))),
        };
        report.search = r.search.clone();
        if let Some(n) = case.n {
            let v = self.recognition(case, &r.h, r.l.degree(), n).map_err(Error::Precondition)?;
            let accepted = v.overall == Overall::Accepted;
            report.recognition = Some(v);
            if !accepted {
                return Ok((CaseStatus::Mismatch, Some(format!("H is not recognized as A{n}"))));
            }
        }
        let (index, rem) = r.l.order().div_rem(r.k.order());
        if rem != BigUint::ZERO {
            return Err(Error::NotSubgroup { what: format!("K = {} (order does not divide |L|)", case.k) });
        }
        let budget = self.budget_cap.clone().unwrap_or(index * 2u32);
        let v = verify_in(&r.l.chain, &r.h, &r.k.gens, &VerifyOptions { budget: Some(budget) })?;
        let outcome = v.outcome;
        let holds = v.holds;
        let intersection = v.intersection_order.clone();
        report.verdict = Some(v);
        if outcome == Outcome::Indeterminate {
            return Ok((CaseStatus::Indeterminate, Some("coset budget exhausted".into())));
        }
        if holds != case.expect_holds {
            return Ok((CaseStatus::Mismatch, Some(format!("expected {}", if case.expect_holds { "holds" } else { "fails" }))));
        }
        if let (Some(want), Some(got)) = (&expected_int, &intersection) {
            if want != got {
                return Ok((CaseStatus::Mismatch, Some(format!("expected |H∩K| = {want}, got {got}"))));
            }
        }
        Ok((CaseStatus::Pass, None))
    }

    /// Runs the cases in parallel on the current rayon pool; reports keep input order.
    pub fn run_suite(&self, cases: &[(String, Case)]) -> SuiteReport {
        let start = Instant::now();
        let reports: Vec<CaseReport> = cases.par_iter().map(|(id, case)| self.run_case(id, case)).collect();
        SuiteReport::new(reports, start.elapsed().as_secs_f64())
    }
}
