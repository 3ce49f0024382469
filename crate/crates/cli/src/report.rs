use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use anyhow::{Context, Result};
use nctrace::estimators::{AlphaPoint, TraceEstimate};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::config::RunConfig;

/// `[re, im]`.
pub type C64 = [f64; 2];

pub fn c64(z: Complex64) -> C64 {
    [z.re, z.im]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Ok,
    Failed,
    Skipped,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitEntry {
    pub c: C64,
    pub b: C64,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlphaEntry {
    pub n: f64,
    pub alpha: C64,
}

/// One estimator run. `value` is present iff `status` is ok.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateEntry {
    pub estimator: String,
    pub normalization: String,
    pub status: Status,
    pub value: Option<C64>,
    pub fit: Option<FitEntry>,
    pub alpha_sequence: Vec<AlphaEntry>,
    pub error: Option<String>,
}

impl EstimateEntry {
    pub fn ok(t: &TraceEstimate) -> Self {
        Self {
            estimator: t.estimator.to_string(),
            normalization: t.normalization.to_string(),
            status: Status::Ok,
            value: Some(c64(t.value)),
            fit: Some(FitEntry {
                c: c64(t.fit.c),
                b: c64(t.fit.b),
                residual: t.fit.residual,
            }),
            alpha_sequence: t.alpha_sequence.iter().map(alpha_entry).collect(),
            error: None,
        }
    }

    pub fn not_ok(estimator: &str, normalization: &str, status: Status, error: String) -> Self {
        Self {
            estimator: estimator.into(),
            normalization: normalization.into(),
            status,
            value: None,
            fit: None,
            alpha_sequence: Vec::new(),
            error: Some(error),
        }
    }

    pub fn tag(&self) -> String {
        format!("{}/{}", self.estimator, self.normalization)
    }
}

fn alpha_entry(p: &AlphaPoint) -> AlphaEntry {
    AlphaEntry { n: p.n, alpha: c64(p.alpha) }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DualRow {
    pub label: String,
    pub d: usize,
    pub lambda: f64,
    pub weight: f64,
    /// Weight compared with the cutoff (differs from `weight` in subelliptic mode).
    pub cutoff_weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidueEntry {
    pub classical: String,
    pub residue: f64,
    pub dixmier: EstimateEntry,
    pub gap: Option<f64>,
    pub tolerance: f64,
    pub passes: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetPoint {
    pub p: f64,
    pub value: C64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetEntry {
    pub lambda: C64,
    /// `exp(λ·Tr_ω)` from the trace estimate `trace`.
    pub det_omega: Option<C64>,
    pub trace: EstimateEntry,
    /// `(det(I + λσ^p))^{p-1}` extrapolated to `p = 1`.
    pub det_p_omega: Option<C64>,
    pub det_p_omega_residual: Option<f64>,
    pub det_p_omega_sequence: Vec<DetPoint>,
    /// `det(I + λσ)` of the operator truncated to the dual slice.
    pub truncated: Option<C64>,
    pub method: String,
    pub errors: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapEntry {
    pub a: String,
    pub b: String,
    /// `|a - b| / max(|a|, |b|)`.
    pub gap: f64,
}

/// Timings and cache statistics; everything outside this section is a
/// deterministic function of the config.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Runtime {
    pub timings_ms: BTreeMap<String, f64>,
    pub cache_dir: Option<String>,
    pub cache_hits: u64,
    pub cache_misses: u64,
    pub cache_writes: u64,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub config: RunConfig,
    pub group: String,
    pub symbol: Option<String>,
    pub cutoff: f64,
    pub mode: String,
    pub dual: Vec<DualRow>,
    pub estimates: Vec<EstimateEntry>,
    pub residue: Option<ResidueEntry>,
    pub determinants: Option<DetEntry>,
    pub gaps: Vec<GapEntry>,
    /// Some estimator diverged or a numeric routine refused.
    pub failed: bool,
    pub runtime: Runtime,
}

impl Report {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// The report without its runtime section or output paths, for
    /// reproducibility checks.
    pub fn numeric_json(&self) -> String {
        let mut r = self.clone();
        r.runtime = Runtime::default();
        r.config.json = None;
        r.config.csv = None;
        r.to_json()
    }

    pub fn write_json(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json() + "\n").with_context(|| format!("writing {}", path.display()))
    }

    /// One row per α-sequence point.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["source", "estimator", "normalization", "n", "alpha_re", "alpha_im"])?;
        let mut rows = |source: &str, e: &EstimateEntry| -> Result<()> {
            for a in &e.alpha_sequence {
                out.write_record([
                    source.to_string(),
                    e.estimator.clone(),
                    e.normalization.clone(),
                    a.n.to_string(),
                    a.alpha[0].to_string(),
                    a.alpha[1].to_string(),
                ])?;
            }
            Ok(())
        };
        for e in &self.estimates {
            rows("trace", e)?;
        }
        if let Some(r) = &self.residue {
            rows("residue", &r.dixmier)?;
        }
        if let Some(d) = &self.determinants {
            rows("det", &d.trace)?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn write_csv_file(&self, path: &Path) -> Result<()> {
        let f = std::fs::File::create(path).with_context(|| format!("creating {}", path.display()))?;
        self.write_csv(f)
    }

    /// Plain-text summary for the terminal.
    pub fn summary(&self) -> String {
        let mut s = String::new();
        let line = |s: &mut String, t: String| {
            s.push_str(&t);
            s.push('\n');
        };
        let sym = self.symbol.as_deref().unwrap_or("-");
        line(&mut s, format!("{} {} {} cutoff={} mode={}", self.config.command, self.group, sym, self.cutoff, self.mode));
        if !self.dual.is_empty() {
            line(&mut s, format!("{:>12} {:>4} {:>14} {:>14}", "label", "d", "lambda", "<xi>"));
            for r in &self.dual {
                line(&mut s, format!("{:>12} {:>4} {:>14.6} {:>14.6}", r.label, r.d, r.lambda, r.weight));
            }
        }
        for e in &self.estimates {
            line(&mut s, estimate_line(e));
        }
        if let Some(r) = &self.residue {
            line(&mut s, format!("residue {:.10} ({})", r.residue, r.classical));
            line(&mut s, format!("  {}", estimate_line(&r.dixmier)));
            if let Some(g) = r.gap {
                line(&mut s, format!("  gap {g:.3e} tolerance {:.1e} {}", r.tolerance, if r.passes { "pass" } else { "FAIL" }));
            }
        }
        if let Some(d) = &self.determinants {
            let fmt = |z: &Option<C64>| z.map_or("-".to_string(), |z| format!("{:.8} {:+.8}i", z[0], z[1]));
            line(&mut s, format!("lambda {} {:+}i", d.lambda[0], d.lambda[1]));
            line(&mut s, format!("  det_omega   {} (from {})", fmt(&d.det_omega), d.trace.tag()));
            line(&mut s, format!("  det_p_omega {}", fmt(&d.det_p_omega)));
            line(&mut s, format!("  truncated   {} ({})", fmt(&d.truncated), d.method));
            for e in &d.errors {
                line(&mut s, format!("  error: {e}"));
            }
        }
        for g in &self.gaps {
            line(&mut s, format!("gap {} vs {}: {:.3e}", g.a, g.b, g.gap));
        }
        for w in &self.runtime.warnings {
            line(&mut s, format!("warning: {w}"));
        }
        if self.failed {
            line(&mut s, "FAILED".into());
        }
        s
    }
}

fn estimate_line(e: &EstimateEntry) -> String {
    match (&e.value, &e.fit) {
        (Some(v), Some(f)) => format!(
            "{:<8} {:<7} {:.8} {:+.8}i  (b {:.4}, residual {:.2e})",
            e.estimator, e.normalization, v[0], v[1], f.b[0], f.residual
        ),
        _ => format!(
            "{:<8} {:<7} {:?}: {}",
            e.estimator,
            e.normalization,
            e.status,
            e.error.as_deref().unwrap_or("")
        ),
    }
}
