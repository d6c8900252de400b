//! On-disk artifact formats. All binary fields are little-endian.
//!
//! Grid (`NVG1`): magic, version u32, nx ny nz u32, voxel size f64 (nm),
//! origin 3×f64 (nm), then nx·ny·nz f64 values with x fastest.
//!
//! Signal array (`NVS1`): magic, n_r n_theta n_phi u32, Δf f64 (Hz),
//! gradient f64 (T/m), r0 f64 (nm), dr f64 (nm), the θ list then the φ list
//! (f64, rad), then the payload with r fastest.
//!
//! Spectra CSV: one row per bin with the header [`SPECTRA_HEADER`].

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::encoder::{slice_width, SignalArray, SpinNoiseSpectrum};
use crate::error::{Error, Result};
use crate::phantom::{DensityGrid, GridSpec};
use crate::physics::{hz_per_nm, GradientSetting};
use crate::Vec3;

pub const GRID_MAGIC: &[u8; 4] = b"NVG1";
pub const GRID_VERSION: u32 = 1;
pub const SIGNAL_MAGIC: &[u8; 4] = b"NVS1";
pub const SPECTRA_HEADER: &str = "proj_index,theta_deg,phi_deg,freq_offset_hz,r_nm,brms_tesla";

struct Cursor<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.buf.len()).ok_or_else(|| {
            Error::Format(format!("truncated: need {n} bytes at offset {}", self.pos))
        })?;
        let s = &self.buf[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")))
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }

    fn f64s(&mut self, n: usize) -> Result<Vec<f64>> {
        let bytes = self.take(n.checked_mul(8).ok_or_else(|| Error::Format("length overflow".into()))?)?;
        Ok(bytes
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
            .collect())
    }

    fn magic(&mut self, expected: &[u8; 4]) -> Result<()> {
        let m = self.take(4)?;
        if m != expected {
            return Err(Error::Format(format!(
                "bad magic {:?}, expected {:?}",
                String::from_utf8_lossy(m),
                String::from_utf8_lossy(expected)
            )));
        }
        Ok(())
    }

    fn finish(&self) -> Result<()> {
        if self.pos != self.buf.len() {
            return Err(Error::Format(format!(
                "{} trailing bytes after payload",
                self.buf.len() - self.pos
            )));
        }
        Ok(())
    }
}

fn put_f64s(out: &mut Vec<u8>, values: &[f64]) {
    for v in values {
        out.extend_from_slice(&v.to_le_bytes());
    }
}

fn dim(n: usize) -> Result<[u8; 4]> {
    u32::try_from(n)
        .map(u32::to_le_bytes)
        .map_err(|_| Error::Format(format!("dimension {n} exceeds u32")))
}

pub fn encode_grid(grid: &DensityGrid) -> Result<Vec<u8>> {
    let s = &grid.spec;
    let mut out = Vec::with_capacity(48 + 8 * grid.values.len());
    out.extend_from_slice(GRID_MAGIC);
    out.extend_from_slice(&GRID_VERSION.to_le_bytes());
    for _ in 0..3 {
        out.extend_from_slice(&dim(s.n)?);
    }
    put_f64s(&mut out, &[s.voxel_size, s.origin.x, s.origin.y, s.origin.z]);
    put_f64s(&mut out, &grid.values);
    Ok(out)
}

pub fn decode_grid(bytes: &[u8]) -> Result<DensityGrid> {
    let mut c = Cursor { buf: bytes, pos: 0 };
    c.magic(GRID_MAGIC)?;
    let version = c.u32()?;
    if version != GRID_VERSION {
        return Err(Error::Format(format!("unsupported grid version {version}")));
    }
    let (nx, ny, nz) = (c.u32()? as usize, c.u32()? as usize, c.u32()? as usize);
    if nx != ny || ny != nz {
        return Err(Error::Format(format!("non-cubic grid {nx}x{ny}x{nz}")));
    }
    let voxel = c.f64()?;
    let origin = Vec3::new(c.f64()?, c.f64()?, c.f64()?);
    let spec = GridSpec::new(nx, voxel, origin).map_err(|e| Error::Format(e.to_string()))?;
    let values = c.f64s(spec.len())?;
    c.finish()?;
    DensityGrid::from_values(spec, values)
}

pub fn encode_signal(sig: &SignalArray) -> Result<Vec<u8>> {
    sig.validate()?;
    let mut out = Vec::with_capacity(52 + 8 * (sig.thetas.len() + sig.phis.len() + sig.values.len()));
    out.extend_from_slice(SIGNAL_MAGIC);
    for n in [sig.n_r(), sig.thetas.len(), sig.phis.len()] {
        out.extend_from_slice(&dim(n)?);
    }
    put_f64s(&mut out, &[sig.delta_f, sig.gradient, sig.r0(), sig.dr()]);
    put_f64s(&mut out, &sig.thetas);
    put_f64s(&mut out, &sig.phis);
    put_f64s(&mut out, &sig.values);
    Ok(out)
}

pub fn decode_signal(bytes: &[u8]) -> Result<SignalArray> {
    let mut c = Cursor { buf: bytes, pos: 0 };
    c.magic(SIGNAL_MAGIC)?;
    let (n_r, n_theta, n_phi) = (c.u32()? as usize, c.u32()? as usize, c.u32()? as usize);
    let (delta_f, gradient, r0, dr) = (c.f64()?, c.f64()?, c.f64()?, c.f64()?);
    let thetas = c.f64s(n_theta)?;
    let phis = c.f64s(n_phi)?;
    let len = n_r
        .checked_mul(n_theta)
        .and_then(|v| v.checked_mul(n_phi))
        .ok_or_else(|| Error::Format("dimension overflow".into()))?;
    let values = c.f64s(len)?;
    c.finish()?;
    if !(delta_f > 0.0 && gradient > 0.0 && dr > 0.0) {
        return Err(Error::Format("non-positive delta_f, gradient or dr".into()));
    }
    let expected_dr = slice_width(delta_f, gradient);
    if (dr - expected_dr).abs() > 1e-9 * expected_dr {
        return Err(Error::Format(format!("dr {dr} inconsistent with delta_f and gradient ({expected_dr})")));
    }
    // Axes written by the encoder sit on the lattice k·dr; rebuild them that way.
    let k0 = (r0 / dr).round();
    let r_values = if k0 * dr == r0 {
        (0..n_r).map(|i| (k0 + i as f64) * dr).collect()
    } else {
        (0..n_r).map(|i| r0 + i as f64 * dr).collect()
    };
    let sig = SignalArray {
        r_values,
        thetas,
        phis,
        values,
        delta_f,
        gradient,
    };
    sig.validate().map_err(|e| Error::Format(e.to_string()))?;
    Ok(sig)
}

pub fn write_spectra_csv<W: Write>(mut w: W, spectra: &[SpinNoiseSpectrum]) -> Result<()> {
    writeln!(w, "{SPECTRA_HEADER}")?;
    for (p, s) in spectra.iter().enumerate() {
        let (theta, phi) = (s.gradient.theta.to_degrees(), s.gradient.phi.to_degrees());
        for ((f, r), b) in s.freq_offsets.iter().zip(s.r_centers()).zip(&s.brms) {
            writeln!(w, "{p},{theta:e},{phi:e},{f:e},{r:e},{b:e}")?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Parses spectra back. Δf comes from the bin spacing and the gradient
/// magnitude from the frequency-to-position ratio of an off-center bin.
pub fn read_spectra_csv<R: BufRead>(r: R) -> Result<Vec<SpinNoiseSpectrum>> {
    let mut lines = r.lines().enumerate();
    match lines.next() {
        Some((_, Ok(h))) if h.trim_end() == SPECTRA_HEADER => {}
        Some((_, Ok(h))) => return Err(Error::parse(1, format!("unexpected header '{h}'"))),
        Some((_, Err(e))) => return Err(e.into()),
        None => return Err(Error::parse(1, "empty spectra file")),
    }
    type Rows = Vec<(f64, f64, f64)>;
    let mut groups: BTreeMap<usize, (f64, f64, Rows)> = BTreeMap::new();
    for (i, line) in lines {
        let line = line?;
        let line_no = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 6 {
            return Err(Error::parse(line_no, format!("expected 6 fields, got {}", fields.len())));
        }
        let p: usize = fields[0]
            .parse()
            .map_err(|_| Error::parse(line_no, format!("bad projection index '{}'", fields[0])))?;
        let mut v = [0.0; 5];
        for (k, slot) in v.iter_mut().enumerate() {
            *slot = fields[k + 1]
                .parse()
                .map_err(|_| Error::parse(line_no, format!("bad number '{}'", fields[k + 1])))?;
        }
        let entry = groups.entry(p).or_insert((v[0], v[1], Vec::new()));
        entry.2.push((v[2], v[3], v[4]));
    }
    if groups.keys().copied().ne(0..groups.len()) {
        return Err(Error::Format("projection indices are not contiguous from 0".into()));
    }
    groups
        .into_values()
        .map(|(theta_deg, phi_deg, rows)| {
            if rows.len() < 2 {
                return Err(Error::Format("spectrum with fewer than two bins".into()));
            }
            let delta_f = rows[1].0 - rows[0].0;
            let (f, r, _) = rows
                .iter()
                .copied()
                .find(|&(_, r, _)| r != 0.0)
                .ok_or_else(|| Error::Format("cannot recover gradient: all bins at r = 0".into()))?;
            let magnitude = (f / r) / hz_per_nm(1.0);
            let gradient = GradientSetting::new(theta_deg.to_radians(), phi_deg.to_radians(), magnitude)?;
            Ok(SpinNoiseSpectrum {
                freq_offsets: rows.iter().map(|t| t.0).collect(),
                brms: rows.iter().map(|t| t.2).collect(),
                delta_f,
                gradient,
            })
        })
        .collect()
}

/// Writes via a sibling temporary file and renames, so readers never see a partial artifact.
fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let tmp = path.with_extension("partial");
    {
        let mut f = BufWriter::new(File::create(&tmp)?);
        f.write_all(bytes)?;
        f.flush()?;
    }
    std::fs::rename(&tmp, path)?;
    Ok(())
}

pub fn save_grid(path: &Path, grid: &DensityGrid) -> Result<()> {
    write_atomic(path, &encode_grid(grid)?)
}

pub fn load_grid(path: &Path) -> Result<DensityGrid> {
    decode_grid(&std::fs::read(path)?)
}

pub fn save_signal(path: &Path, sig: &SignalArray) -> Result<()> {
    write_atomic(path, &encode_signal(sig)?)
}

pub fn load_signal(path: &Path) -> Result<SignalArray> {
    let mut bytes = Vec::new();
    File::open(path)?.read_to_end(&mut bytes)?;
    decode_signal(&bytes)
}

pub fn save_spectra(path: &Path, spectra: &[SpinNoiseSpectrum]) -> Result<()> {
    let mut buf = Vec::new();
    write_spectra_csv(&mut buf, spectra)?;
    write_atomic(path, &buf)
}

pub fn load_spectra(path: &Path) -> Result<Vec<SpinNoiseSpectrum>> {
    read_spectra_csv(BufReader::new(File::open(path)?))
}
