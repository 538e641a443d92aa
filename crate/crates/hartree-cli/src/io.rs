//! Artifact formats.
//!
//! Ground-state text file:
//!
//! ```text
//! # hartree ground state
//! # d = 3
//! # a = -0.1
//! # n = 512
//! # r_max = 12
//! # M_gs = 1.178...
//! # residual = 2.9e-11
//! # r Q
//! 1.7e-2 3.1e0
//! ...
//! ```
//!
//! Header lines start with `#`; data rows are `r_j Q_j`, one per node.

use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::Path;

use hartree_core::evolution::Trajectory;
use serde_json::{json, Value};

use crate::config::RunConfig;

#[derive(Clone, Debug, PartialEq)]
pub struct GroundStateFile {
    pub d: usize,
    pub a: f64,
    pub n: usize,
    pub r_max: f64,
    pub m_gs: f64,
    pub residual: f64,
    pub r: Vec<f64>,
    pub q: Vec<f64>,
}

impl GroundStateFile {
    pub fn render(&self) -> String {
        let mut s = String::new();
        s.push_str("# hartree ground state\n");
        let _ = writeln!(s, "# d = {}", self.d);
        let _ = writeln!(s, "# a = {:e}", self.a);
        let _ = writeln!(s, "# n = {}", self.n);
        let _ = writeln!(s, "# r_max = {:e}", self.r_max);
        let _ = writeln!(s, "# M_gs = {:e}", self.m_gs);
        let _ = writeln!(s, "# residual = {:e}", self.residual);
        s.push_str("# r Q\n");
        for (r, q) in self.r.iter().zip(&self.q) {
            let _ = writeln!(s, "{r:e} {q:e}");
        }
        s
    }

    pub fn parse(text: &str) -> Result<Self, String> {
        let mut header = std::collections::HashMap::new();
        let mut r = Vec::new();
        let mut q = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(h) = line.strip_prefix('#') {
                if let Some((k, v)) = h.split_once('=') {
                    header.insert(k.trim().to_string(), v.trim().to_string());
                }
                continue;
            }
            let mut it = line.split_whitespace();
            let parse = |s: Option<&str>| s.and_then(|s| s.parse::<f64>().ok());
            match (parse(it.next()), parse(it.next())) {
                (Some(a), Some(b)) => {
                    r.push(a);
                    q.push(b);
                }
                _ => return Err(format!("line {}: expected 'r Q'", i + 1)),
            }
        }
        let get = |k: &str| header.get(k).ok_or_else(|| format!("missing header '{k}'"));
        let num = |k: &str| -> Result<f64, String> { get(k)?.parse::<f64>().map_err(|e| format!("header '{k}': {e}")) };
        let d = get("d")?.parse::<usize>().map_err(|e| format!("header 'd': {e}"))?;
        let n = get("n")?.parse::<usize>().map_err(|e| format!("header 'n': {e}"))?;
        if r.len() != n {
            return Err(format!("header says n = {n} but {} rows follow", r.len()));
        }
        Ok(GroundStateFile { d, a: num("a")?, n, r_max: num("r_max")?, m_gs: num("M_gs")?, residual: num("residual")?, r, q })
    }
}

pub fn trajectory_csv(traj: &Trajectory) -> String {
    let mut s = String::from("t,M,H,E,L_V,Gamma,GammaPrime");
    for l in &traj.window_labels {
        s.push(',');
        s.push_str(l);
    }
    s.push('\n');
    for smp in &traj.samples {
        let q = smp.q;
        let _ = write!(s, "{:e},{:e},{:e},{:e},{:e},{:e},{:e}", smp.t, q.m, q.h, q.e, q.lv, smp.gamma, smp.gamma_prime);
        for c in &smp.conc {
            let _ = write!(s, ",{c:e}");
        }
        s.push('\n');
    }
    s
}

pub fn trajectory_sidecar(cfg: &RunConfig, traj: &Trajectory) -> Value {
    json!({
        "d": cfg.params.d,
        "a": cfg.params.a,
        "n": cfg.n,
        "r_max": cfg.r_max,
        "dt": cfg.integrator.dt,
        "scheme": cfg.integrator.scheme.name(),
        "config_hash": cfg.hash(),
        "stop_reason": traj.stop_reason,
        "steps": traj.steps,
        "samples": traj.samples.len(),
        "columns": csv_columns(traj),
    })
}

fn csv_columns(traj: &Trajectory) -> Vec<String> {
    let mut c: Vec<String> = ["t", "M", "H", "E", "L_V", "Gamma", "GammaPrime"].iter().map(|s| s.to_string()).collect();
    c.extend(traj.window_labels.iter().cloned());
    c
}

pub fn write_json(path: &Path, v: &Value) -> io::Result<()> {
    let mut s = serde_json::to_string_pretty(v).map_err(io::Error::other)?;
    s.push('\n');
    fs::write(path, s)
}
