//! Tabulated invariant symbols.
//!
//! One record per line: `label ; d ; re,im re,im ...` with the `d²` entries in
//! row-major order. Blank lines and lines starting with `#` are skipped; a
//! `# order: m` line sets the declared order (default 0).

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use num_complex::Complex64;

use super::calculus::CMatrix;
use crate::error::{Error, Result};
use crate::group::{GroupDescriptor, Label};

#[derive(Debug, Clone, PartialEq)]
pub struct TabulatedSymbol {
    group: GroupDescriptor,
    blocks: HashMap<Label, CMatrix>,
    order: f64,
    source: String,
}

impl TabulatedSymbol {
    pub fn new(group: &GroupDescriptor, blocks: HashMap<Label, CMatrix>, order: f64) -> Result<Self> {
        for (label, m) in &blocks {
            if !group.owns_label(label) {
                return Err(Error::Config(format!("label {label} does not belong to {group}")));
            }
            let d = group.element(label.clone(), Default::default()).d;
            if m.nrows() != d || m.ncols() != d {
                return Err(Error::Config(format!(
                    "block for {label} is {}x{}, representation has dimension {d}",
                    m.nrows(),
                    m.ncols()
                )));
            }
        }
        Ok(Self {
            group: group.clone(),
            blocks,
            order,
            source: "inline".into(),
        })
    }

    pub fn parse(group: &GroupDescriptor, text: &str) -> Result<Self> {
        let mut blocks = HashMap::new();
        let mut order = 0.0;
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(comment) = line.strip_prefix('#') {
                if let Some(v) = comment.trim().strip_prefix("order:") {
                    order = v.trim().parse().map_err(|_| Error::Parse {
                        line: line_no,
                        message: format!("invalid order '{}'", v.trim()),
                    })?;
                }
                continue;
            }
            let perr = |message: String| Error::Parse { line: line_no, message };
            let fields: Vec<&str> = line.split(';').map(str::trim).collect();
            if fields.len() != 3 {
                return Err(perr(format!("expected 'label ; d ; entries', got {} fields", fields.len())));
            }
            let label = group.parse_label(fields[0]).map_err(|e| perr(e.to_string()))?;
            let d: usize = fields[1]
                .parse()
                .map_err(|_| perr(format!("invalid dimension '{}'", fields[1])))?;
            let expected = group.element(label.clone(), Default::default()).d;
            if d != expected {
                return Err(perr(format!("label {label} has dimension {expected}, record says {d}")));
            }
            let entries = fields[2]
                .split_whitespace()
                .map(|pair| {
                    let (re, im) = pair
                        .split_once(',')
                        .ok_or_else(|| perr(format!("entry '{pair}' is not 're,im'")))?;
                    let re: f64 = re.parse().map_err(|_| perr(format!("invalid number '{re}'")))?;
                    let im: f64 = im.parse().map_err(|_| perr(format!("invalid number '{im}'")))?;
                    Ok(Complex64::new(re, im))
                })
                .collect::<Result<Vec<_>>>()?;
            if entries.len() != d * d {
                return Err(perr(format!("expected {} entries, found {}", d * d, entries.len())));
            }
            if blocks
                .insert(label.clone(), CMatrix::from_row_slice(d, d, &entries))
                .is_some()
            {
                return Err(perr(format!("duplicate record for {label}")));
            }
        }
        let mut t = Self::new(group, blocks, order)?;
        t.source = "text".into();
        Ok(t)
    }

    pub fn load(group: &GroupDescriptor, path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        let mut t = Self::parse(group, &text)?;
        t.source = path.display().to_string();
        Ok(t)
    }

    /// Serialise in the record format, labels sorted.
    pub fn to_text(&self) -> String {
        let mut labels: Vec<&Label> = self.blocks.keys().collect();
        labels.sort();
        let mut out = format!("# order: {}\n", self.order);
        for label in labels {
            let m = &self.blocks[label];
            let _ = write!(out, "{label} ; {} ;", m.nrows());
            for i in 0..m.nrows() {
                for j in 0..m.ncols() {
                    let z = m[(i, j)];
                    let _ = write!(out, " {:?},{:?}", z.re, z.im);
                }
            }
            out.push('\n');
        }
        out
    }

    /// Block at `label`; a missing block is an error, never an implicit zero.
    pub fn block(&self, label: &Label) -> Result<&CMatrix> {
        self.blocks
            .get(label)
            .ok_or_else(|| Error::Config(format!("tabulated symbol has no block for {label}")))
    }

    pub fn group(&self) -> &GroupDescriptor {
        &self.group
    }

    pub fn order(&self) -> f64 {
        self.order
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }
}
