use std::sync::Arc;
use std::time::Instant;

use anyhow::{bail, Result};
use nctrace::determinants::{
    det_fredholm, det_omega, det_p_omega_limit, BlockOperator, DEFAULT_MAX_RESIDUAL,
};
use nctrace::estimators::{
    alpha_sequence, cm_limit, dixmier_limit, general_trace, singular_spectrum, symbol_l1inf_norm, EstimatorKind,
    NormOptions, Normalization, SingularSpectrum, TraceEstimate, DEFAULT_FIT_POINTS,
};
use nctrace::group::{enumerate_dual, GroupKind};
use nctrace::quadrature::haar_grid;
use nctrace::residue::{residue_via_symbol_norm, wodzicki_residue_torus, ClassicalSymbol, ResidueRules};
use nctrace::symbols::{Family, Profile};
use nctrace::{Error, MatrixSymbol};

use crate::cache::{CacheKey, Lookup, SpectrumCache};
use crate::config::{Command, EstimatorSelection, Resolved, RunConfig};
use crate::report::{c64, DetEntry, DetPoint, DualRow, EstimateEntry, GapEntry, Report, ResidueEntry, Runtime, Status};

/// Largest `Σ d³` for which `det` also evaluates the truncated Fredholm determinant.
const TRUNCATED_DET_WORK: f64 = 5e7;

/// Executes configs, sharing a spectrum cache and collecting runtime stats.
pub struct Runner {
    cache: Option<SpectrumCache>,
    runtime: Runtime,
}

pub fn run(config: &RunConfig, cache: Option<SpectrumCache>) -> Result<Report> {
    Runner::new(cache).execute(config)
}

impl Runner {
    pub fn new(cache: Option<SpectrumCache>) -> Self {
        let runtime = Runtime {
            cache_dir: cache.as_ref().map(|c| c.dir().display().to_string()),
            ..Default::default()
        };
        Self { cache, runtime }
    }

    fn timed<T>(&mut self, name: &str, f: impl FnOnce(&mut Self) -> T) -> T {
        let start = Instant::now();
        let out = f(self);
        let ms = start.elapsed().as_secs_f64() * 1e3;
        *self.runtime.timings_ms.entry(name.into()).or_insert(0.0) += ms;
        out
    }

    /// Singular spectrum through the cache when the symbol allows it.
    pub fn spectrum(&mut self, r: &Resolved) -> nctrace::Result<SingularSpectrum> {
        let key = CacheKey::new(&r.group, &r.symbol, r.cutoff, r.mode);
        if let (Some(cache), Some(key)) = (&self.cache, &key) {
            match cache.load(key) {
                Lookup::Hit(s) => {
                    self.runtime.cache_hits += 1;
                    return Ok(s);
                }
                Lookup::Miss => self.runtime.cache_misses += 1,
                Lookup::Corrupt(why) => {
                    self.runtime.cache_misses += 1;
                    self.runtime.warnings.push(format!("ignoring corrupt cache entry {why}"));
                }
            }
        }
        let s = self.timed("spectrum", |_| singular_spectrum(&r.symbol, &r.group, r.cutoff, r.mode))?;
        if let (Some(cache), Some(key)) = (&self.cache, &key) {
            match cache.store(key, &s) {
                Ok(()) => self.runtime.cache_writes += 1,
                Err(e) => self.runtime.warnings.push(format!("cache write failed: {e}")),
            }
        }
        Ok(s)
    }

    fn e1(&mut self, r: &Resolved) -> nctrace::Result<TraceEstimate> {
        let s = self.spectrum(r)?;
        self.timed("e1", |_| {
            let cps = r.schedule.unwrap_or_default().index_checkpoints(s.len())?;
            dixmier_limit(alpha_sequence(&s, &cps)?, DEFAULT_FIT_POINTS, EstimatorKind::E1, Normalization::Index)
        })
    }

    fn e2(&mut self, r: &Resolved, c: &RunConfig) -> nctrace::Result<TraceEstimate> {
        self.timed("e2", |_| cm_limit(&r.symbol, &r.group, c.p_levels, c.tail, r.cutoff, r.mode))
    }

    fn e3(&mut self, r: &Resolved, c: &RunConfig, normalization: Normalization) -> nctrace::Result<TraceEstimate> {
        let opts = NormOptions {
            schedule: r.schedule.unwrap_or(NormOptions::default().schedule),
            normalization,
            ..Default::default()
        };
        self.timed("e3", |_| {
            if r.symbol.is_invariant() {
                symbol_l1inf_norm(&r.symbol, &r.group, r.cutoff, r.mode, &opts)
            } else {
                let grid = haar_grid(&r.group, c.haar_res)?;
                general_trace(&r.symbol, &r.group, &grid, r.cutoff, r.mode, &opts)
            }
        })
    }

    pub fn execute(&mut self, config: &RunConfig) -> Result<Report> {
        let r = config.resolve()?;
        let mut report = Report {
            config: config.clone(),
            group: r.group.to_string(),
            symbol: (config.command != Command::Dual).then(|| r.symbol.to_string()),
            cutoff: r.cutoff,
            mode: r.mode.to_string(),
            dual: Vec::new(),
            estimates: Vec::new(),
            residue: None,
            determinants: None,
            gaps: Vec::new(),
            failed: false,
            runtime: Runtime::default(),
        };
        match config.command {
            Command::Dual => {
                let elems = self.timed("dual", |_| enumerate_dual(&r.group, r.cutoff, r.mode))?;
                report.dual = elems
                    .iter()
                    .map(|e| DualRow {
                        label: e.label.to_string(),
                        d: e.d,
                        lambda: e.lambda,
                        weight: e.weight,
                        cutoff_weight: e.cutoff_weight(&r.group, r.mode),
                    })
                    .collect();
            }
            Command::Trace => {
                report.estimates = self.estimates(&r, config, config.estimators)?;
            }
            Command::Compare => {
                report.estimates = self.estimates(&r, config, EstimatorSelection::All)?;
                if let Ok(residue) = self.residue(&r, config) {
                    report.residue = Some(residue);
                }
                report.gaps = gaps(&report);
            }
            Command::Residue => {
                report.residue = Some(self.residue(&r, config)?);
            }
            Command::Det => {
                report.determinants = Some(self.det(&r, config)?);
            }
        }
        report.failed = report.estimates.iter().any(|e| e.status == Status::Failed)
            || report.residue.as_ref().is_some_and(|x| x.dixmier.status == Status::Failed)
            || (config.command == Command::Residue && report.residue.as_ref().is_some_and(|x| !x.passes))
            || report.determinants.as_ref().is_some_and(|d| !d.errors.is_empty());
        report.runtime = std::mem::take(&mut self.runtime);
        report.runtime.cache_dir = self.cache.as_ref().map(|c| c.dir().display().to_string());
        Ok(report)
    }

    fn estimates(&mut self, r: &Resolved, c: &RunConfig, sel: EstimatorSelection) -> Result<Vec<EstimateEntry>> {
        use EstimatorSelection as S;
        let all = sel == S::All;
        let norm = c.norm.to_string();
        let mut out = Vec::new();
        let variable_skip = |name: &str, norm: &str| {
            EstimateEntry::not_ok(name, norm, Status::Skipped, "needs an invariant symbol".into())
        };
        if all || sel == S::E1 {
            out.push(if all && !r.symbol.is_invariant() {
                variable_skip("e1", "index")
            } else {
                entry("e1", "index", self.e1(r))?
            });
        }
        if all || sel == S::E2 {
            out.push(if all && !r.symbol.is_invariant() {
                variable_skip("e2", "index")
            } else {
                entry("e2", "index", self.e2(r, c))?
            });
        }
        if all || sel == S::E3 {
            out.push(entry("e3", &norm, self.e3(r, c, c.norm))?);
        }
        Ok(out)
    }

    fn residue(&mut self, r: &Resolved, c: &RunConfig) -> Result<ResidueEntry> {
        let GroupKind::Torus(n) = r.group.kind else {
            bail!(Error::Unsupported(format!("residues are computed on tori, not {}", r.group)));
        };
        let classical = classical_part(&r.symbol, n, true)?;
        let rules = ResidueRules {
            sphere_res: c.sphere_res,
            torus_res: c.haar_res,
        };
        let residue = self.timed("residue", |_| wodzicki_residue_torus(&classical, &rules))?;
        let dixmier = if r.symbol.is_invariant() {
            entry("e1", "index", self.e1(r))?
        } else {
            let schedule = r.schedule.unwrap_or_default();
            let est = self.timed("residue_trace", |_| {
                let grid = haar_grid(&r.group, c.haar_res)?;
                residue_via_symbol_norm(&r.symbol, &r.group, &grid, r.cutoff, schedule)
            });
            entry("residue", "index", est)?
        };
        let gap = dixmier
            .value
            .map(|v| (v[0] - residue).abs() / residue.abs().max(f64::MIN_POSITIVE));
        let passes = match gap {
            Some(g) if residue != 0.0 => g <= c.tolerance,
            // a vanishing residue is matched in absolute terms
            _ => dixmier.value.is_some_and(|v| v[0].abs() <= c.tolerance),
        };
        Ok(ResidueEntry {
            classical: classical.name().to_string(),
            residue,
            dixmier,
            gap: gap.filter(|_| residue != 0.0),
            tolerance: c.tolerance,
            passes,
        })
    }

    fn det(&mut self, r: &Resolved, c: &RunConfig) -> Result<DetEntry> {
        let mut errors = Vec::new();
        let est = if r.symbol.is_invariant() {
            self.e1(r)
        } else {
            self.e3(r, c, Normalization::Index)
        };
        let mut det_omega_value = None;
        let trace = match est {
            Ok(t) => {
                match det_omega(&t, r.lambda, DEFAULT_MAX_RESIDUAL) {
                    Ok(d) => det_omega_value = Some(c64(d)),
                    Err(e) => note(&mut errors, e)?,
                }
                EstimateEntry::ok(&t)
            }
            Err(e) => {
                let failed = entry("trace", "index", Err(e))?;
                errors.push(format!("trace estimate failed: {}", failed.error.clone().unwrap_or_default()));
                failed
            }
        };

        let (mut det_p, mut det_p_residual, mut det_p_sequence, mut truncated) = (None, None, Vec::new(), None);
        if r.symbol.is_invariant() {
            match self.timed("det_p_omega", |_| det_p_omega_limit(&r.symbol, &r.group, r.lambda, c.p_levels, r.cutoff, r.mode)) {
                Ok(l) => {
                    det_p = Some(c64(l.value));
                    det_p_residual = Some(l.residual);
                    det_p_sequence = l.sequence.iter().map(|&(p, v)| DetPoint { p, value: c64(v) }).collect();
                }
                Err(e) => note(&mut errors, e)?,
            }
            let work: f64 = enumerate_dual(&r.group, r.cutoff, r.mode)?
                .iter()
                .map(|e| (e.d as f64).powi(3))
                .sum();
            if work <= TRUNCATED_DET_WORK {
                let value = self.timed("truncated_det", |_| {
                    let t = BlockOperator::from_symbol(&r.symbol, &r.group, r.cutoff, r.mode)?;
                    det_fredholm(&t, r.lambda, c.method)
                });
                match value {
                    Ok(v) => truncated = Some(c64(v)),
                    Err(e) => note(&mut errors, e)?,
                }
            }
        }
        Ok(DetEntry {
            lambda: c64(r.lambda),
            det_omega: det_omega_value,
            trace,
            det_p_omega: det_p,
            det_p_omega_residual: det_p_residual,
            det_p_omega_sequence: det_p_sequence,
            truncated,
            method: c.method.to_string(),
            errors,
        })
    }
}

fn note(errors: &mut Vec<String>, e: Error) -> Result<()> {
    if e.is_config() {
        return Err(e.into());
    }
    errors.push(e.to_string());
    Ok(())
}

/// Config errors abort the run; numeric ones become a failed entry.
fn entry(estimator: &str, normalization: &str, res: nctrace::Result<TraceEstimate>) -> Result<EstimateEntry> {
    match res {
        Ok(t) => Ok(EstimateEntry::ok(&t)),
        Err(e) if e.is_config() => Err(e.into()),
        Err(e) => Ok(EstimateEntry::not_ok(estimator, normalization, Status::Failed, e.to_string())),
    }
}

fn gaps(report: &Report) -> Vec<GapEntry> {
    let mut named: Vec<(String, f64)> = report
        .estimates
        .iter()
        .filter_map(|e| e.value.map(|v| (e.tag(), v[0])))
        .collect();
    if let Some(r) = &report.residue {
        named.push(("residue".into(), r.residue));
    }
    let mut out = Vec::new();
    for i in 0..named.len() {
        for j in i + 1..named.len() {
            let (a, b) = (&named[i], &named[j]);
            let scale = a.1.abs().max(b.1.abs());
            out.push(GapEntry {
                a: a.0.clone(),
                b: b.0.clone(),
                gap: if scale > 0.0 { (a.1 - b.1).abs() / scale } else { 0.0 },
            });
        }
    }
    out
}

/// Order `-n` principal part of a torus symbol, as a homogeneous function.
fn classical_part(sigma: &MatrixSymbol, n: usize, allow_profile: bool) -> nctrace::Result<ClassicalSymbol> {
    let critical = -(n as f64);
    let unsupported = || Error::Unsupported(format!("no closed-form principal part of order -{n} for {sigma}"));
    match sigma.family() {
        Family::Zero => ClassicalSymbol::new(n, "zero", Arc::new(|_: &[f64]| 0.0)),
        Family::BesselPower { s } | Family::AnisoTorus { s, .. } if *s < critical => {
            ClassicalSymbol::new(n, "zero", Arc::new(|_: &[f64]| 0.0))
        }
        Family::BesselPower { s } if *s == critical => ClassicalSymbol::inverse_norm(n),
        Family::AnisoTorus { form, s, .. } if *s == critical => ClassicalSymbol::quadratic_form(form.clone()),
        Family::Scaled { factor, inner } if factor.im == 0.0 => {
            classical_part(inner, n, allow_profile)?.scaled(factor.re)
        }
        Family::Profile { profile, inner } if allow_profile => {
            let p = match profile {
                Profile::CosShift { .. } | Profile::SinSquared => profile.clone(),
                Profile::Constant(z) if z.im == 0.0 => profile.clone(),
                _ => return Err(unsupported()),
            };
            Ok(classical_part(inner, n, false)?.with_profile(Arc::new(move |x: &[f64]| p.eval(x).re)))
        }
        _ => Err(unsupported()),
    }
}
