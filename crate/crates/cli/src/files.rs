//! On-disk artifact formats.
//!
//! Field files: little-endian binary with magic `SPLF`, a domain header,
//! node coordinates and values, plus a plain-text JSON sidecar and an
//! optional CSV of (x, y, value) triples.
//!
//! Reports: JSON with fixed 17-significant-digit floats and CSV with 10,
//! so identical runs produce byte-identical files.

use anyhow::{bail, Context, Result};
use serde::Serialize;
use sinhlab::asymptotics::{AsymptoticReport, Regime};
use sinhlab::geom::DomainSpec;
use sinhlab::pde::{build_mesh, GridField, Mesh};
use std::io::{BufWriter, Read, Write};
use std::path::Path;
use std::sync::Arc;

const MAGIC: &[u8; 4] = b"SPLF";
const VERSION: u32 = 1;

fn domain_tag(d: &DomainSpec) -> (u8, [f64; 3]) {
    match *d {
        DomainSpec::UnitDisc => (0, [0.0; 3]),
        DomainSpec::Disc { radius, center } => (1, [radius, center.x, center.y]),
        DomainSpec::Rectangle { width, height } => (2, [width, height, 0.0]),
    }
}

fn domain_from_tag(tag: u8, p: [f64; 3]) -> Result<DomainSpec> {
    Ok(match tag {
        0 => DomainSpec::UnitDisc,
        1 => DomainSpec::Disc {
            radius: p[0],
            center: sinhlab::geom::Point2::new(p[1], p[2]),
        },
        2 => DomainSpec::Rectangle {
            width: p[0],
            height: p[1],
        },
        _ => bail!("unknown domain tag {tag}"),
    })
}

/// Writes `<base>.fld` (binary) and `<base>.json` (sidecar).
pub fn write_field(base: &Path, field: &GridField) -> Result<()> {
    let mesh = field.mesh();
    let bin_path = base.with_extension("fld");
    let mut w = BufWriter::new(
        std::fs::File::create(&bin_path)
            .with_context(|| format!("creating {}", bin_path.display()))?,
    );
    w.write_all(MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    let (tag, params) = domain_tag(&mesh.domain);
    w.write_all(&[tag])?;
    for p in params {
        w.write_all(&p.to_le_bytes())?;
    }
    w.write_all(&mesh.h.to_le_bytes())?;
    w.write_all(&(mesh.len() as u64).to_le_bytes())?;
    for p in mesh.points() {
        w.write_all(&p.x.to_le_bytes())?;
        w.write_all(&p.y.to_le_bytes())?;
    }
    for v in field.values() {
        w.write_all(&v.to_le_bytes())?;
    }
    w.flush()?;

    #[derive(Serialize)]
    struct Sidecar<'a> {
        format: &'a str,
        version: u32,
        domain: &'a DomainSpec,
        h: f64,
        node_count: usize,
        binary: String,
    }
    let sidecar = Sidecar {
        format: "sinhlab-field",
        version: VERSION,
        domain: &mesh.domain,
        h: mesh.h,
        node_count: mesh.len(),
        binary: bin_path
            .file_name()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default(),
    };
    std::fs::write(
        base.with_extension("json"),
        serde_json::to_string_pretty(&sidecar)?,
    )?;
    Ok(())
}

/// Reads a field written by [`write_field`], rebuilding its mesh.
pub fn read_field(base: &Path) -> Result<GridField> {
    let bin_path = base.with_extension("fld");
    let mut bytes = Vec::new();
    std::fs::File::open(&bin_path)
        .with_context(|| format!("opening {}", bin_path.display()))?
        .read_to_end(&mut bytes)?;
    let mut off = 0usize;
    let take = |off: &mut usize, n: usize| -> Result<&[u8]> {
        if *off + n > bytes.len() {
            bail!("truncated field file");
        }
        let s = &bytes[*off..*off + n];
        *off += n;
        Ok(s)
    };
    if take(&mut off, 4)? != MAGIC {
        bail!("bad magic in {}", bin_path.display());
    }
    let version = u32::from_le_bytes(take(&mut off, 4)?.try_into()?);
    if version != VERSION {
        bail!("unsupported field version {version}");
    }
    let tag = take(&mut off, 1)?[0];
    let mut params = [0.0f64; 3];
    for p in params.iter_mut() {
        *p = f64::from_le_bytes(take(&mut off, 8)?.try_into()?);
    }
    let domain = domain_from_tag(tag, params)?;
    let h = f64::from_le_bytes(take(&mut off, 8)?.try_into()?);
    let count = u64::from_le_bytes(take(&mut off, 8)?.try_into()?) as usize;
    let mesh: Arc<Mesh> = Arc::new(build_mesh(&domain, h).map_err(|e| anyhow::anyhow!("{e}"))?);
    if mesh.len() != count {
        bail!(
            "field has {count} nodes but the rebuilt mesh has {}",
            mesh.len()
        );
    }
    // coordinates must match the rebuilt mesh bit-for-bit
    for p in mesh.points() {
        let x = f64::from_le_bytes(take(&mut off, 8)?.try_into()?);
        let y = f64::from_le_bytes(take(&mut off, 8)?.try_into()?);
        if x != p.x || y != p.y {
            bail!("node coordinates do not match the rebuilt mesh");
        }
    }
    let mut values = Vec::with_capacity(count);
    for _ in 0..count {
        values.push(f64::from_le_bytes(take(&mut off, 8)?.try_into()?));
    }
    GridField::new(mesh, values).map_err(|e| anyhow::anyhow!("{e}"))
}

/// CSV of (x, y, value) triples at 10 significant digits.
pub fn write_field_csv(path: &Path, field: &GridField) -> Result<()> {
    let mut w = BufWriter::new(std::fs::File::create(path)?);
    writeln!(w, "x,y,value")?;
    for (p, v) in field.mesh().points().iter().zip(field.values()) {
        writeln!(w, "{:.9e},{:.9e},{:.9e}", p.x, p.y, v)?;
    }
    w.flush()?;
    Ok(())
}

/// JSON serializer with every float printed at 17 significant digits,
/// keeping report bytes stable across runs.
struct FixedFloats;

impl serde_json::ser::Formatter for FixedFloats {
    fn write_f64<W>(&mut self, writer: &mut W, value: f64) -> std::io::Result<()>
    where
        W: ?Sized + std::io::Write,
    {
        if value.is_finite() {
            write!(writer, "{:.16e}", value)
        } else {
            // JSON has no infinities; encode as strings like serde_json null
            write!(writer, "null")
        }
    }

    fn write_f32<W>(&mut self, writer: &mut W, value: f32) -> std::io::Result<()>
    where
        W: ?Sized + std::io::Write,
    {
        self.write_f64(writer, value as f64)
    }
}

/// Serializes any report-like structure with fixed float formatting.
pub fn to_fixed_json<T: Serialize>(value: &T) -> Result<String> {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, FixedFloats);
    value.serialize(&mut ser)?;
    Ok(String::from_utf8(out)?)
}

pub fn write_report_json(path: &Path, report: &AsymptoticReport) -> Result<()> {
    std::fs::write(path, to_fixed_json(report)? + "\n")?;
    Ok(())
}

fn regime_code(r: Regime) -> u8 {
    match r {
        Regime::First => 1,
        Regime::Second => 2,
        Regime::Third => 3,
    }
}

/// Companion CSV with header `rho,j,mu,regime,rate,residual`: per (ρ, j)
/// the eigenvalue, its regime, the law constant at that ρ and the
/// far-field deviation when one was computed.
pub fn write_report_csv(
    path: &Path,
    report: &AsymptoticReport,
    spectra: &[sinhlab::spectrum::SpectrumResult],
) -> Result<()> {
    let mut w = BufWriter::new(std::fs::File::create(path)?);
    writeln!(w, "rho,j,mu,regime,rate,residual")?;
    for s in spectra {
        for row in &report.regimes {
            let mu = s.eigenvalues[row.j - 1];
            let lg = s.rho.ln();
            let rate = match row.regime {
                Regime::First => mu * (-4.0 * lg),
                Regime::Second => (1.0 - mu) / (s.rho * s.rho),
                Regime::Third => (mu - 1.0) * (-lg),
            };
            let dev = report
                .far_field
                .iter()
                .find(|f| f.rho == s.rho && f.j == row.j)
                .map(|f| format!("{:.9e}", f.deviation))
                .unwrap_or_default();
            writeln!(
                w,
                "{:.9e},{},{:.9e},{},{:.9e},{}",
                s.rho,
                row.j,
                mu,
                regime_code(row.regime),
                rate,
                dev
            )?;
        }
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use sinhlab::geom::Point2;

    #[test]
    fn field_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let mesh = Arc::new(build_mesh(&DomainSpec::UnitDisc, 1.0 / 16.0).unwrap());
        let f = GridField::from_fn(mesh, |p: Point2| (p.x * 3.0).sin() + p.y).unwrap();
        let base = dir.path().join("field");
        write_field(&base, &f).unwrap();
        let g = read_field(&base).unwrap();
        assert_eq!(f.values(), g.values());
        write_field_csv(&dir.path().join("field.csv"), &f).unwrap();
        let head = std::fs::read_to_string(dir.path().join("field.csv")).unwrap();
        assert!(head.starts_with("x,y,value\n"));
    }

    #[test]
    fn fixed_json_is_deterministic() {
        #[derive(Serialize)]
        struct S {
            a: f64,
            b: Vec<f64>,
        }
        let s = S {
            a: 1.0 / 3.0,
            b: vec![2.5e-17, 1234.5678],
        };
        let one = to_fixed_json(&s).unwrap();
        let two = to_fixed_json(&s).unwrap();
        assert_eq!(one, two);
        assert!(one.contains("3.3333333333333331e-1"));
    }
}
