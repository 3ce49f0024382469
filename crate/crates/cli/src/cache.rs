//! On-disk cache of singular spectra.
//!
//! One file per key, named by the SHA-256 of the canonical key string. The
//! file repeats the key string (a mismatch is a miss) and ends with a SHA-256
//! of its own contents (a mismatch is a corrupt entry). Writes go to a
//! temporary file in the same directory and are renamed into place.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use nctrace::estimators::aggregate::SliceExtent;
use nctrace::estimators::{SingularSpectrum, SpectrumProvenance};
use nctrace::{CutoffMode, GroupDescriptor, MatrixSymbol};
use sha2::{Digest, Sha256};
use tempfile::NamedTempFile;

pub const CACHE_DIR_ENV: &str = "NCTRACE_CACHE_DIR";
pub const DEFAULT_CACHE_DIR: &str = ".nctrace-cache";

const MAGIC: &[u8; 8] = b"NCTSPEC1";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CacheKey {
    canonical: String,
    digest: String,
}

impl CacheKey {
    /// `None` for symbols whose text does not pin down their values
    /// (tabulated files, closures).
    pub fn new(group: &GroupDescriptor, symbol: &MatrixSymbol, cutoff: f64, mode: CutoffMode) -> Option<Self> {
        let sym = symbol.to_string();
        if sym.contains("tab:") || sym.contains("custom:") || sym.contains('[') {
            return None;
        }
        Some(Self::from_canonical(format!(
            "nctrace-spectrum/1\ngroup={group}\nsymbol={sym}\ncutoff={:016x}\nmode={mode}",
            cutoff.to_bits()
        )))
    }

    pub fn from_canonical(canonical: String) -> Self {
        let digest = hex(&Sha256::digest(canonical.as_bytes()));
        Self { canonical, digest }
    }

    pub fn canonical(&self) -> &str {
        &self.canonical
    }

    pub fn digest(&self) -> &str {
        &self.digest
    }
}

#[derive(Debug)]
pub enum Lookup {
    Hit(SingularSpectrum),
    Miss,
    /// The entry exists but cannot be used; the message says why.
    Corrupt(String),
}

#[derive(Debug, Clone)]
pub struct SpectrumCache {
    dir: PathBuf,
}

impl SpectrumCache {
    pub fn new(dir: impl Into<PathBuf>) -> io::Result<Self> {
        let dir = dir.into();
        fs::create_dir_all(&dir)?;
        Ok(Self { dir })
    }

    /// `$NCTRACE_CACHE_DIR`, or `.nctrace-cache` in the working directory.
    pub fn from_env() -> io::Result<Self> {
        Self::new(std::env::var_os(CACHE_DIR_ENV).map(PathBuf::from).unwrap_or_else(|| DEFAULT_CACHE_DIR.into()))
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn path(&self, key: &CacheKey) -> PathBuf {
        self.dir.join(format!("{}.spectrum", key.digest))
    }

    pub fn store(&self, key: &CacheKey, spectrum: &SingularSpectrum) -> io::Result<()> {
        let bytes = encode(key, spectrum);
        let mut tmp = NamedTempFile::new_in(&self.dir)?;
        tmp.write_all(&bytes)?;
        tmp.as_file().sync_all()?;
        tmp.persist(self.path(key)).map_err(|e| e.error)?;
        Ok(())
    }

    pub fn load(&self, key: &CacheKey) -> Lookup {
        let bytes = match fs::read(self.path(key)) {
            Ok(b) => b,
            Err(e) if e.kind() == io::ErrorKind::NotFound => return Lookup::Miss,
            Err(e) => return Lookup::Corrupt(format!("{}: {e}", self.path(key).display())),
        };
        match decode(key, &bytes) {
            Ok(Some(s)) => Lookup::Hit(s),
            Ok(None) => Lookup::Miss,
            Err(why) => Lookup::Corrupt(format!("{}: {why}", self.path(key).display())),
        }
    }
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

fn encode(key: &CacheKey, s: &SingularSpectrum) -> Vec<u8> {
    let mut out = Vec::new();
    out.extend_from_slice(MAGIC);
    put_u64(&mut out, key.canonical.len() as u64);
    out.extend_from_slice(key.canonical.as_bytes());

    let prov = s.provenance();
    out.push(match prov.mode {
        CutoffMode::Elliptic => 0,
        CutoffMode::Subelliptic => 1,
    });
    put_f64(&mut out, prov.cutoff);
    put_opt(&mut out, prov.threshold.map(f64::to_bits));
    let ext = s.extent();
    put_u64(&mut out, ext.slots);
    put_u64(&mut out, ext.elements);
    put_opt(&mut out, ext.max_two_l.map(u64::from));

    let (entries, counts, sums) = s.parts();
    put_u64(&mut out, entries.len() as u64);
    for &(v, m) in entries {
        put_f64(&mut out, v);
        put_u64(&mut out, m);
    }
    put_u64(&mut out, counts.len() as u64);
    for &c in counts {
        put_u64(&mut out, c);
    }
    put_u64(&mut out, sums.len() as u64);
    for &v in sums {
        put_f64(&mut out, v);
    }
    let digest = Sha256::digest(&out);
    out.extend_from_slice(&digest);
    out
}

fn put_u64(out: &mut Vec<u8>, v: u64) {
    out.extend_from_slice(&v.to_le_bytes());
}

fn put_f64(out: &mut Vec<u8>, v: f64) {
    put_u64(out, v.to_bits());
}

fn put_opt(out: &mut Vec<u8>, v: Option<u64>) {
    out.push(v.is_some() as u8);
    put_u64(out, v.unwrap_or(0));
}

struct Reader<'a> {
    buf: &'a [u8],
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], String> {
        if self.buf.len() < n {
            return Err("truncated entry".into());
        }
        let (head, rest) = self.buf.split_at(n);
        self.buf = rest;
        Ok(head)
    }

    fn u8(&mut self) -> Result<u8, String> {
        Ok(self.take(1)?[0])
    }

    fn u64(&mut self) -> Result<u64, String> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn f64(&mut self) -> Result<f64, String> {
        Ok(f64::from_bits(self.u64()?))
    }

    fn opt(&mut self) -> Result<Option<u64>, String> {
        let flag = self.u8()?;
        let v = self.u64()?;
        match flag {
            0 => Ok(None),
            1 => Ok(Some(v)),
            _ => Err("bad option flag".into()),
        }
    }

    fn len(&mut self) -> Result<usize, String> {
        let n = self.u64()?;
        // each element takes at least 8 bytes
        if n > (self.buf.len() / 8) as u64 {
            return Err(format!("length {n} exceeds the file"));
        }
        Ok(n as usize)
    }
}

/// `Ok(None)` when the file belongs to a different key.
fn decode(key: &CacheKey, bytes: &[u8]) -> Result<Option<SingularSpectrum>, String> {
    if bytes.len() < MAGIC.len() + 32 || &bytes[..MAGIC.len()] != MAGIC {
        return Err("not a spectrum cache file".into());
    }
    let (body, digest) = bytes.split_at(bytes.len() - 32);
    if Sha256::digest(body).as_slice() != digest {
        return Err("checksum mismatch".into());
    }
    let mut r = Reader { buf: &body[MAGIC.len()..] };
    let klen = r.len()?;
    if r.take(klen)? != key.canonical.as_bytes() {
        return Ok(None);
    }
    let mode = match r.u8()? {
        0 => CutoffMode::Elliptic,
        1 => CutoffMode::Subelliptic,
        m => return Err(format!("bad mode tag {m}")),
    };
    let provenance = SpectrumProvenance {
        mode,
        cutoff: r.f64()?,
        threshold: r.opt()?.map(f64::from_bits),
    };
    let extent = SliceExtent {
        slots: r.u64()?,
        elements: r.u64()?,
        max_two_l: r
            .opt()?
            .map(|v| u32::try_from(v).map_err(|_| "bad max_two_l".to_string()))
            .transpose()?,
    };
    let n = r.len()?;
    let mut entries = Vec::with_capacity(n);
    for _ in 0..n {
        entries.push((r.f64()?, r.u64()?));
    }
    let n = r.len()?;
    let counts = (0..n).map(|_| r.u64()).collect::<Result<Vec<_>, _>>()?;
    let n = r.len()?;
    let sums = (0..n).map(|_| r.f64()).collect::<Result<Vec<_>, _>>()?;
    if !r.buf.is_empty() {
        return Err("trailing bytes".into());
    }
    SingularSpectrum::from_parts(entries, counts, sums, provenance, extent)
        .map(Some)
        .map_err(|e| e.to_string())
}
