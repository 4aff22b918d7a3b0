use std::collections::BTreeMap;
use std::fmt::Display;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

/// Provenance written as `#` lines at the top of every output.
#[derive(Debug, Clone)]
pub struct RunManifest {
    pub command: &'static str,
    pub parameters: BTreeMap<String, String>,
    pub seed: Option<u64>,
    pub output_path: Option<PathBuf>,
    pub tool_version: &'static str,
}

impl RunManifest {
    pub fn new(command: &'static str) -> Self {
        Self {
            command,
            parameters: BTreeMap::new(),
            seed: None,
            output_path: None,
            tool_version: env!("CARGO_PKG_VERSION"),
        }
    }

    pub fn param(&mut self, key: &str, value: impl Display) -> &mut Self {
        self.parameters.insert(key.to_string(), value.to_string());
        self
    }

    fn header(&self) -> String {
        let mut s = format!("# wqpe {}\n# command: {}\n", self.tool_version, self.command);
        if let Some(seed) = self.seed {
            s.push_str(&format!("# seed: {seed}\n"));
        }
        let out = self.output_path.as_ref().map_or("-".to_string(), |p| p.display().to_string());
        s.push_str(&format!("# output: {out}\n"));
        for (k, v) in &self.parameters {
            s.push_str(&format!("# {k}: {v}\n"));
        }
        s
    }
}

/// CSV table with a fixed header; cells are pre-formatted strings.
#[derive(Debug, Clone)]
pub struct Table {
    columns: Vec<&'static str>,
    rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(columns: &[&'static str]) -> Self {
        Self { columns: columns.to_vec(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    fn render(&self) -> String {
        let mut s = self.columns.join(",");
        s.push('\n');
        for row in &self.rows {
            s.push_str(&row.join(","));
            s.push('\n');
        }
        s
    }
}

/// Shortest round-trip decimal form, so output is reproducible bit for bit.
pub fn num(x: f64) -> String {
    format!("{x:?}")
}

pub fn opt_num(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

/// Writes to `path` through a sibling temp file and a rename, or to
/// stdout when `path` is `None`.
pub fn emit(manifest: &RunManifest, table: &Table, path: Option<&Path>) -> io::Result<()> {
    let text = format!("{}{}", manifest.header(), table.render());
    match path {
        None => io::stdout().lock().write_all(text.as_bytes()),
        Some(path) => write_atomic(path, text.as_bytes()),
    }
}

fn write_atomic(path: &Path, bytes: &[u8]) -> io::Result<()> {
    let name = path
        .file_name()
        .ok_or_else(|| io::Error::new(io::ErrorKind::InvalidInput, format!("{} is not a file path", path.display())))?;
    let mut tmp_name = std::ffi::OsString::from(".");
    tmp_name.push(name);
    tmp_name.push(format!(".tmp{}", std::process::id()));
    let tmp = path.with_file_name(tmp_name);
    let result = fs::File::create(&tmp).and_then(|mut f| {
        f.write_all(bytes)?;
        f.sync_all()
    });
    match result.and_then(|_| fs::rename(&tmp, path)) {
        Ok(()) => Ok(()),
        Err(e) => {
            let _ = fs::remove_file(&tmp);
            Err(e)
        }
    }
}
