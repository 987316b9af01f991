use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;
use toml::{Table, Value};

use crate::config::RunConfig;

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub id: String,
    /// Which statement of the theory the check exercises.
    pub statement: String,
    pub pass: bool,
    /// Informational checks never change the exit status.
    pub asserted: bool,
    pub detail: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<f64>,
}

impl Check {
    pub fn new(id: &str, statement: &str, pass: bool, detail: impl Into<String>) -> Self {
        Self { id: id.into(), statement: statement.into(), pass, asserted: true, detail: detail.into(), witness: None }
    }

    pub fn info(mut self) -> Self {
        self.asserted = false;
        self
    }

    pub fn witness(mut self, w: Option<f64>) -> Self {
        self.witness = w;
        self
    }
}

/// Key/value report written as TOML, with optional CSV tables alongside.
pub struct Report {
    command: String,
    config: RunConfig,
    checks: Vec<Check>,
    data: Table,
    csv: Vec<(String, String)>,
    files: Vec<(String, String)>,
}

impl Report {
    pub fn new(command: &str, config: &RunConfig) -> Self {
        Self { command: command.into(), config: config.clone(), checks: Vec::new(), data: Table::new(), csv: Vec::new(), files: Vec::new() }
    }

    pub fn check(&mut self, c: Check) {
        self.checks.push(c);
    }

    pub fn data<T: Serialize>(&mut self, key: &str, value: &T) -> Result<()> {
        let v = Value::try_from(value).with_context(|| format!("cannot encode `{key}`"))?;
        self.data.insert(key.into(), v);
        Ok(())
    }

    pub fn csv(&mut self, name: &str, body: String) {
        self.csv.push((name.into(), body));
    }

    pub fn file(&mut self, name: &str, body: String) {
        self.files.push((name.into(), body));
    }

    pub fn all_pass(&self) -> bool {
        self.checks.iter().filter(|c| c.asserted).all(|c| c.pass)
    }

    pub fn checks(&self) -> &[Check] {
        &self.checks
    }

    pub fn render(&self) -> Result<String> {
        let mut root = Table::new();
        root.insert("command".into(), Value::String(self.command.clone()));
        root.insert("pass".into(), Value::Boolean(self.all_pass()));
        root.insert("config".into(), Value::try_from(&self.config)?);
        root.insert("checks".into(), Value::try_from(&self.checks)?);
        root.insert("data".into(), Value::Table(self.data.clone()));
        Ok(toml::to_string(&root)?)
    }

    /// Writes `<command>.toml` plus every table and file into `dir`; returns the written paths.
    pub fn write(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
        let mut out = Vec::new();
        let main = dir.join(format!("{}.toml", self.command));
        fs::write(&main, self.render()?).with_context(|| format!("cannot write {}", main.display()))?;
        out.push(main);
        for (name, body) in self.csv.iter().chain(&self.files) {
            let p = dir.join(name);
            fs::write(&p, body).with_context(|| format!("cannot write {}", p.display()))?;
            out.push(p);
        }
        Ok(out)
    }
}
