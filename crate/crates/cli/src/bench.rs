use std::path::{Path, PathBuf};
use std::process::{Command, Stdio};
use std::time::{Duration, Instant};

use anyhow::Context;
use lidarp::model::Instance;
use serde::Serialize;

use crate::solve::{Algo, RunReport};

#[derive(Debug, Serialize)]
pub struct Row {
    pub instance: String,
    pub n: Option<usize>,
    pub h: Option<usize>,
    pub k: Option<usize>,
    pub c: Option<usize>,
    pub t: Option<u64>,
    pub algo: String,
    pub served: Option<usize>,
    pub tau: Option<usize>,
    pub ms: f64,
    pub status: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub report: Option<RunReport>,
}

impl Row {
    fn csv(&self) -> String {
        fn opt<T: ToString>(v: &Option<T>) -> String {
            v.as_ref().map(T::to_string).unwrap_or_default()
        }
        let t = match (&self.n, self.t) {
            (Some(_), None) => "inf".to_string(),
            _ => opt(&self.t),
        };
        format!(
            "{},{},{},{},{},{},{},{},{},{:.3},{}",
            self.instance,
            opt(&self.n),
            opt(&self.h),
            opt(&self.k),
            opt(&self.c),
            t,
            self.algo,
            opt(&self.served),
            opt(&self.tau),
            self.ms,
            self.status
        )
    }

    pub fn ok(&self) -> bool {
        self.status == "ok"
    }
}

pub const CSV_HEADER: &str = "instance,n,h,k,c,t,algo,served,tau,ms,status";

pub fn instance_files(dir: &Path) -> anyhow::Result<Vec<PathBuf>> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)
        .with_context(|| format!("cannot read directory {}", dir.display()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_file() && p.extension().is_some_and(|x| x == "json"))
        .collect();
    files.sort();
    Ok(files)
}

/// Solves one file in a child process so a timeout can kill it cleanly.
pub fn bench_file(path: &Path, algo: Algo, timeout: Duration) -> anyhow::Result<Row> {
    let name = path.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let parsed = std::fs::read_to_string(path).ok().and_then(|s| Instance::from_json(&s).ok());
    let mut row = Row {
        instance: name,
        n: parsed.as_ref().map(Instance::len),
        h: parsed.as_ref().map(|i| i.line.stops()),
        k: parsed.as_ref().map(|i| i.vehicles),
        c: parsed.as_ref().map(|i| i.capacity),
        t: parsed.as_ref().and_then(Instance::horizon),
        algo: algo.name().to_string(),
        served: None,
        tau: None,
        ms: 0.0,
        status: String::new(),
        report: None,
    };
    let start = Instant::now();
    let mut child = Command::new(std::env::current_exe()?)
        .arg("solve")
        .arg(path)
        .args(["--algo", algo.name(), "--json"])
        .stdin(Stdio::null())
        .stdout(Stdio::piped())
        .stderr(Stdio::null())
        .spawn()
        .context("cannot spawn solver process")?;
    let status = loop {
        if let Some(s) = child.try_wait()? {
            break Some(s);
        }
        if start.elapsed() >= timeout {
            child.kill().ok();
            child.wait().ok();
            break None;
        }
        std::thread::sleep(Duration::from_millis(2));
    };
    row.ms = start.elapsed().as_secs_f64() * 1e3;
    let Some(status) = status else {
        row.status = "timeout".into();
        return Ok(row);
    };
    let mut stdout = String::new();
    if let Some(mut out) = child.stdout.take() {
        use std::io::Read;
        out.read_to_string(&mut stdout).ok();
    }
    let doc: Option<serde_json::Value> = serde_json::from_str(stdout.trim()).ok();
    row.status = match status.code() {
        Some(0) => {
            let report: RunReport = doc
                .and_then(|d| serde_json::from_value(d).ok())
                .context("solver printed no report")?;
            row.algo = report.algorithm.name().to_string();
            row.served = Some(report.max_served);
            row.tau = Some(report.tau);
            row.report = Some(report);
            "ok".into()
        }
        Some(1) => "invalid".into(),
        Some(2) => doc
            .as_ref()
            .and_then(|d| d.get("status"))
            .and_then(|s| s.as_str())
            .unwrap_or("not_applicable")
            .to_string(),
        _ => "error".into(),
    };
    Ok(row)
}

pub fn render_csv(rows: &[Row]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&r.csv());
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(n: Option<usize>, t: Option<u64>) -> Row {
        Row {
            instance: "x.json".into(),
            n,
            h: n.map(|_| 3),
            k: n.map(|_| 1),
            c: n.map(|_| 2),
            t,
            algo: "fpt".into(),
            served: Some(2),
            tau: Some(1),
            ms: 1.5,
            status: "ok".into(),
            report: None,
        }
    }

    #[test]
    fn csv_marks_infinite_horizon_only_for_parsed_instances() {
        assert_eq!(row(Some(4), None).csv(), "x.json,4,3,1,2,inf,fpt,2,1,1.500,ok");
        assert_eq!(row(Some(4), Some(9)).csv(), "x.json,4,3,1,2,9,fpt,2,1,1.500,ok");
        assert_eq!(row(None, None).csv(), "x.json,,,,,,fpt,2,1,1.500,ok");
    }

    #[test]
    fn lists_json_files_sorted() {
        let dir = tempfile::TempDir::new().unwrap();
        for f in ["b.json", "a.json", "c.txt"] {
            std::fs::write(dir.path().join(f), "").unwrap();
        }
        let names: Vec<_> = instance_files(dir.path())
            .unwrap()
            .iter()
            .map(|p| p.file_name().unwrap().to_string_lossy().into_owned())
            .collect();
        assert_eq!(names, ["a.json", "b.json"]);
    }
}
