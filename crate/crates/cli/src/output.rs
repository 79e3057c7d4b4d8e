use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use entrolab_core::entropy::ExtendedReal;
use entrolab_core::verify::{InequalityReport, Status};
use serde::Serialize;

use crate::{CliError, RunConfig, SCHEMA_VERSION};

/// Writes through a temporary file in the target directory and renames it
/// into place, so readers never see a partial report.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let io = |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    };
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io)?;
    tmp.write_all(bytes).map_err(io)?;
    tmp.as_file().sync_all().map_err(io)?;
    tmp.persist(path).map_err(|e| io(e.error))?;
    Ok(())
}

/// Fields shared by every JSON report.
#[derive(Debug, Serialize)]
pub struct Header<'a> {
    pub schema: u32,
    pub tool: &'static str,
    pub version: &'static str,
    pub generator: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timestamp_unix: Option<u64>,
    pub config: &'a RunConfig,
}

impl<'a> Header<'a> {
    pub fn new(config: &'a RunConfig) -> Self {
        Self {
            schema: SCHEMA_VERSION,
            tool: "entrolab",
            version: env!("CARGO_PKG_VERSION"),
            generator: entrolab_core::statesgen::GENERATOR_ID,
            timestamp_unix: config.timestamp.then(now_unix),
            config,
        }
    }

    /// `# key=value` comment lines opening a CSV report.
    pub fn csv_preamble(&self) -> Result<String, CliError> {
        let mut s = format!("# schema={}\n", self.schema);
        writeln!(s, "# tool={} {}", self.tool, self.version).unwrap();
        writeln!(s, "# generator={}", self.generator).unwrap();
        if let Some(t) = self.timestamp_unix {
            writeln!(s, "# timestamp_unix={t}").unwrap();
        }
        writeln!(s, "# config={}", serde_json::to_string(self.config)?).unwrap();
        Ok(s)
    }
}

fn now_unix() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

/// Shortest representation that parses back to the same `f64`.
pub fn fmt_f64(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else if v.is_infinite() {
        if v > 0.0 { "+inf".into() } else { "-inf".into() }
    } else {
        format!("{v:?}")
    }
}

pub fn fmt_ext(v: ExtendedReal) -> String {
    match v {
        ExtendedReal::Finite(x) => fmt_f64(x),
        ExtendedReal::PosInfinity => "+inf".into(),
    }
}

pub fn status_str(s: Status) -> &'static str {
    match s {
        Status::Pass => "pass",
        Status::Fail => "fail",
        Status::Inapplicable => "inapplicable",
    }
}

pub const REPORT_COLUMNS: &str = "trial_id,name,lhs,rhs,slack,pass";

/// One CSV row per report: `trial_id,name,lhs,rhs,slack,pass`, where `pass`
/// is `pass`, `fail` or `inapplicable` and an undefined slack is empty.
pub fn report_row(out: &mut String, trial: u64, name: &str, r: &InequalityReport) {
    let slack = r.slack.map(fmt_ext).unwrap_or_default();
    writeln!(
        out,
        "{trial},{name},{},{},{slack},{}",
        fmt_ext(r.lhs),
        fmt_ext(r.rhs),
        status_str(r.status)
    )
    .unwrap();
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_format_round_trips() {
        for v in [0.1, 1e-20, -3.5e300, 2.0 / 3.0, 0.0] {
            assert_eq!(fmt_f64(v).parse::<f64>().unwrap(), v);
        }
        assert_eq!(fmt_f64(f64::INFINITY), "+inf");
        assert_eq!(fmt_ext(ExtendedReal::PosInfinity), "+inf");
    }

    #[test]
    fn rows() {
        let mut s = String::new();
        report_row(&mut s, 3, "step1", &InequalityReport::geq("step1", 1.0, 0.5, 1e-9));
        assert_eq!(s, "3,step1,1.0,0.5,0.5,pass\n");
        let mut s = String::new();
        let r = InequalityReport::geq("x", 0.0, ExtendedReal::PosInfinity, 1e-9);
        report_row(&mut s, 0, "x", &r);
        assert_eq!(s, "0,x,0.0,+inf,,inapplicable\n");
    }

    #[test]
    fn atomic_write_replaces_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("out.json");
        write_atomic(&path, b"first").unwrap();
        write_atomic(&path, b"second").unwrap();
        assert_eq!(std::fs::read_to_string(&path).unwrap(), "second");
        assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
        let missing = dir.path().join("no/such/dir/out.json");
        assert!(matches!(write_atomic(&missing, b"x"), Err(CliError::Io { .. })));
    }
}
