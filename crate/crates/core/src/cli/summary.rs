use std::fmt::Write as _;

use sha2::{Digest, Sha256};

use crate::pulse::{format_sig17, Envelope};
use crate::Result;

use super::config::JobConfig;

/// Ordered `key = value` record written as `summary.txt`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Summary {
    entries: Vec<(String, String)>,
}

impl Summary {
    pub fn new() -> Self {
        Summary::default()
    }

    pub fn text(&mut self, key: impl Into<String>, value: impl Into<String>) {
        self.entries.push((key.into(), value.into()));
    }

    pub fn num(&mut self, key: impl Into<String>, value: f64) {
        self.text(key, format_sig17(value));
    }

    pub fn count(&mut self, key: impl Into<String>, value: usize) {
        self.text(key, value.to_string());
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn set(&mut self, key: &str, value: impl Into<String>) {
        match self.entries.iter_mut().find(|(k, _)| k == key) {
            Some(e) => e.1 = value.into(),
            None => self.text(key, value),
        }
    }

    pub fn entries(&self) -> &[(String, String)] {
        &self.entries
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.entries {
            let _ = writeln!(out, "{k} = {v}");
        }
        out
    }

    /// Parses rendered summary text back into entries.
    pub fn parse(text: &str) -> Summary {
        let entries = text
            .lines()
            .filter_map(|l| l.split_once('='))
            .map(|(k, v)| (k.trim().to_string(), v.trim().to_string()))
            .collect();
        Summary { entries }
    }
}

/// SHA-256 of the canonical configuration text, hex encoded.
pub fn config_hash(cfg: &JobConfig) -> String {
    let digest = Sha256::digest(cfg.to_text().as_bytes());
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

/// Rebuilds the job configuration from the `config.*` echo of a summary.
pub fn config_from_summary(text: &str) -> Result<JobConfig> {
    let mut cfg_text = String::new();
    for line in text.lines() {
        if let Some(rest) = line.strip_prefix("config.") {
            cfg_text.push_str(rest);
            cfg_text.push('\n');
        }
    }
    JobConfig::parse(&cfg_text)
}

/// Two-channel envelope table `t,re_phi1,im_phi1,abs2_phi1,abs2_phi2`.
pub fn envelope_csv(phi1: &Envelope, phi2: &Envelope) -> Result<String> {
    phi1.check_grid(phi2)?;
    let f = format_sig17;
    let mut out = String::from("t,re_phi1,im_phi1,abs2_phi1,abs2_phi2\n");
    for (i, t) in phi1.grid().times().enumerate() {
        let (a, b) = (phi1.values()[i], phi2.values()[i]);
        let _ = writeln!(out, "{},{},{},{},{}", f(t), f(a.re), f(a.im), f(a.norm_sqr()), f(b.norm_sqr()));
    }
    Ok(out)
}
