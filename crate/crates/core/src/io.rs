//! File formats: the `OAMF1` binary field container, JSON beam/design
//! descriptions, and the CSV tables emitted by the command-line tools.
//!
//! `OAMF1` layout: the 5 ASCII bytes `OAMF1`, a newline, a single-line JSON
//! header `{"nx","ny","dx","dy","ox","oy"}`, a newline, then `nx * ny * 2`
//! little-endian IEEE doubles, row-major, re/im interleaved.
//!
//! All decimal output uses exactly 17 significant digits so repeated runs
//! are byte-identical.

use std::collections::BTreeMap;
use std::io::{BufRead, Read, Write};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::analytic::{OamSpectrum, WeightVector};
use crate::error::{Error, Result};
use crate::measurement::SidebandSpectrum;
use crate::model::{NecklaceSpec, SampledField, VortexPancake};
use crate::numeric::DislocationSet;

/// `x` with 17 significant decimal digits, scientific notation.
pub fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

// ---------------------------------------------------------------------------
// OAMF1 field container
// ---------------------------------------------------------------------------

const MAGIC: &[u8] = b"OAMF1";

#[derive(Serialize, Deserialize)]
struct FieldHeader {
    nx: usize,
    ny: usize,
    dx: f64,
    dy: f64,
    ox: f64,
    oy: f64,
}

pub fn write_field<W: Write>(mut w: W, field: &SampledField) -> Result<()> {
    w.write_all(MAGIC)?;
    w.write_all(b"\n")?;
    let (ox, oy) = field.origin();
    let header = FieldHeader {
        nx: field.nx(),
        ny: field.ny(),
        dx: field.dx(),
        dy: field.dy(),
        ox,
        oy,
    };
    serde_json::to_writer(&mut w, &header)?;
    w.write_all(b"\n")?;
    let mut buf = Vec::with_capacity(field.values().len() * 16);
    for v in field.values() {
        buf.extend_from_slice(&v.re.to_le_bytes());
        buf.extend_from_slice(&v.im.to_le_bytes());
    }
    w.write_all(&buf)?;
    Ok(())
}

pub fn read_field<R: Read>(mut r: R) -> Result<SampledField> {
    let mut magic = [0u8; 6];
    r.read_exact(&mut magic)
        .map_err(|_| Error::Format("truncated field file".into()))?;
    if &magic[..5] != MAGIC || magic[5] != b'\n' {
        return Err(Error::Format("bad magic, expected OAMF1".into()));
    }
    let mut header_line = Vec::new();
    let mut buffered = std::io::BufReader::new(&mut r);
    buffered
        .read_until(b'\n', &mut header_line)
        .map_err(|_| Error::Format("missing field header".into()))?;
    if header_line.pop() != Some(b'\n') {
        return Err(Error::Format("unterminated field header".into()));
    }
    let header: FieldHeader = serde_json::from_slice(&header_line)
        .map_err(|e| Error::Format(format!("bad field header: {e}")))?;
    let count = header
        .nx
        .checked_mul(header.ny)
        .ok_or_else(|| Error::Format("field dimensions overflow".into()))?;
    let mut bytes = vec![0u8; count * 16];
    buffered
        .read_exact(&mut bytes)
        .map_err(|_| Error::Format("truncated field payload".into()))?;
    let values: Vec<Complex64> = bytes
        .chunks_exact(16)
        .map(|c| {
            let re = f64::from_le_bytes(c[..8].try_into().unwrap());
            let im = f64::from_le_bytes(c[8..].try_into().unwrap());
            Complex64::new(re, im)
        })
        .collect();
    SampledField::from_values(header.nx, header.ny, header.dx, header.dy, header.ox, header.oy, values)
}

pub fn write_field_to_path(path: &std::path::Path, field: &SampledField) -> Result<()> {
    let f = std::fs::File::create(path)?;
    write_field(std::io::BufWriter::new(f), field)
}

pub fn read_field_from_path(path: &std::path::Path) -> Result<SampledField> {
    let f = std::fs::File::open(path)?;
    read_field(std::io::BufReader::new(f))
}

// ---------------------------------------------------------------------------
// JSON beam and design descriptions
// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct PancakeJson {
    w0: f64,
    a0: [f64; 2],
    vortices: Vec<[f64; 2]>,
}

pub fn pancake_to_json(p: &VortexPancake) -> String {
    let dto = PancakeJson {
        w0: p.w0(),
        a0: [p.a0().re, p.a0().im],
        vortices: p.vortices().iter().map(|v| [v.rho, v.phi]).collect(),
    };
    serde_json::to_string_pretty(&dto).expect("pancake serialization cannot fail")
}

pub fn pancake_from_json(text: &str) -> Result<VortexPancake> {
    let dto: PancakeJson = serde_json::from_str(text)?;
    VortexPancake::new(
        Complex64::new(dto.a0[0], dto.a0[1]),
        dto.w0,
        dto.vortices.iter().map(|v| (v[0], v[1])).collect(),
    )
}

#[derive(Serialize, Deserialize)]
struct NecklaceJson {
    m: i64,
    w0: f64,
    d: f64,
    #[serde(rename = "ampA")]
    amp_a: [f64; 2],
    #[serde(rename = "ampB")]
    amp_b: [f64; 2],
}

pub fn necklace_to_json(n: &NecklaceSpec) -> String {
    let dto = NecklaceJson {
        m: n.m(),
        w0: n.w0(),
        d: n.d(),
        amp_a: [n.amp_a().re, n.amp_a().im],
        amp_b: [n.amp_b().re, n.amp_b().im],
    };
    serde_json::to_string_pretty(&dto).expect("necklace serialization cannot fail")
}

pub fn necklace_from_json(text: &str) -> Result<NecklaceSpec> {
    let dto: NecklaceJson = serde_json::from_str(text)?;
    NecklaceSpec::new(
        dto.m,
        dto.w0,
        dto.d,
        Complex64::new(dto.amp_a[0], dto.amp_a[1]),
        Complex64::new(dto.amp_b[0], dto.amp_b[1]),
    )
}

#[derive(Serialize, Deserialize)]
struct TargetJson {
    #[serde(rename = "N")]
    n: usize,
    tolerance: f64,
    weights: BTreeMap<String, f64>,
}

pub fn target_to_json(t: &crate::designer::DesignTarget) -> String {
    let dto = TargetJson {
        n: t.vortex_count(),
        tolerance: t.tolerance(),
        weights: t.weights().iter().map(|(&n, &p)| (n.to_string(), p)).collect(),
    };
    serde_json::to_string_pretty(&dto).expect("target serialization cannot fail")
}

pub fn target_from_json(text: &str) -> Result<crate::designer::DesignTarget> {
    let dto: TargetJson = serde_json::from_str(text)?;
    let mut weights = BTreeMap::new();
    for (k, v) in dto.weights {
        let n: i64 = k
            .parse()
            .map_err(|_| Error::Format(format!("weight key '{k}' is not an integer")))?;
        weights.insert(n, v);
    }
    crate::designer::DesignTarget::new(dto.n, dto.tolerance, weights)
}

#[derive(Serialize)]
struct ResultJson {
    pancake: serde_json::Value,
    achieved: BTreeMap<String, f64>,
    mean_oam: f64,
    residual: f64,
    converged: bool,
    seed: u64,
    iterations: usize,
    starts: usize,
}

pub fn design_result_to_json(r: &crate::designer::DesignResult) -> String {
    let dto = ResultJson {
        pancake: serde_json::from_str(&pancake_to_json(&r.pancake)).unwrap(),
        achieved: r
            .achieved
            .weights()
            .iter()
            .map(|(&n, &p)| (n.to_string(), p))
            .collect(),
        mean_oam: r.achieved.mean_oam(),
        residual: r.residual,
        converged: r.converged,
        seed: r.seed,
        iterations: r.iterations,
        starts: r.starts,
    };
    serde_json::to_string_pretty(&dto).expect("result serialization cannot fail")
}

// ---------------------------------------------------------------------------
// CSV writers
// ---------------------------------------------------------------------------

/// Spectrum table: `n,C_n,P_n` rows for occupied modes sorted by `n`, the
/// mean OAM as a trailing comment, then any provenance comments.
///
/// A mode counts as occupied above 1e-14 of the strongest entry; numeric
/// spectra carry round-off noise below that in every harmonic.
pub fn write_spectrum_csv<W: Write>(
    mut w: W,
    spectrum: &OamSpectrum,
    weights: &WeightVector,
    comments: &[(String, String)],
) -> Result<()> {
    let floor = 1e-14 * spectrum.max_entry();
    writeln!(w, "n,C_n,P_n")?;
    for (&n, &c) in spectrum.entries() {
        if c > floor {
            writeln!(w, "{n},{},{}", fmt17(c), fmt17(weights.p(n)))?;
        }
    }
    writeln!(w, "# mean_oam={}", fmt17(weights.mean_oam()))?;
    for (k, v) in comments {
        writeln!(w, "# {k}={v}")?;
    }
    Ok(())
}

/// Dislocation table: `x,y,charge`.
pub fn write_dislocation_csv<W: Write>(mut w: W, set: &DislocationSet) -> Result<()> {
    writeln!(w, "x,y,charge")?;
    for d in &set.dislocations {
        writeln!(w, "{},{},{}", fmt17(d.x), fmt17(d.y), d.charge)?;
    }
    Ok(())
}

/// Sideband table: `n,delta_omega,weight`.
pub fn write_sideband_csv<W: Write>(mut w: W, s: &SidebandSpectrum) -> Result<()> {
    writeln!(w, "n,delta_omega,weight")?;
    for line in s.lines() {
        writeln!(w, "{},{},{}", line.n, fmt17(line.delta_omega), fmt17(line.weight))?;
    }
    Ok(())
}

/// Time-series table: `t,intensity`.
pub fn write_time_series_csv<W: Write>(mut w: W, dt: f64, samples: &[f64]) -> Result<()> {
    writeln!(w, "t,intensity")?;
    for (i, &v) in samples.iter().enumerate() {
        writeln!(w, "{},{}", fmt17(i as f64 * dt), fmt17(v))?;
    }
    Ok(())
}

/// Plain matrix of `rows x cols` values, one CSV line per row.
pub fn write_matrix_csv<W: Write>(mut w: W, rows: usize, cols: usize, data: &[f64]) -> Result<()> {
    for iy in 0..rows {
        let line: Vec<String> = (0..cols).map(|ix| fmt17(data[iy * cols + ix])).collect();
        writeln!(w, "{}", line.join(","))?;
    }
    Ok(())
}

/// Parameter-scan table: first column the swept value, one column per mode.
pub fn write_scan_csv<W: Write>(
    mut w: W,
    param: &str,
    modes: &[i64],
    rows: &[(f64, Vec<f64>)],
) -> Result<()> {
    let header: Vec<String> = std::iter::once(param.to_string())
        .chain(modes.iter().map(|n| format!("P_{n}")))
        .collect();
    writeln!(w, "{}", header.join(","))?;
    for (value, weights) in rows {
        let line: Vec<String> = std::iter::once(fmt17(*value))
            .chain(weights.iter().map(|p| fmt17(*p)))
            .collect();
        writeln!(w, "{}", line.join(","))?;
    }
    Ok(())
}

/// Reads back a spectrum CSV written by [`write_spectrum_csv`].
pub fn read_spectrum_csv<R: Read>(r: R) -> Result<(BTreeMap<i64, (f64, f64)>, f64)> {
    let reader = std::io::BufReader::new(r);
    let mut rows = BTreeMap::new();
    let mut mean = None;
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        if idx == 0 {
            if line != "n,C_n,P_n" {
                return Err(Error::Format(format!("bad spectrum header: {line}")));
            }
            continue;
        }
        if let Some(rest) = line.strip_prefix("# mean_oam=") {
            mean = Some(rest.parse::<f64>().map_err(|e| Error::Format(e.to_string()))?);
            continue;
        }
        if line.starts_with('#') || line.is_empty() {
            continue;
        }
        let parts: Vec<&str> = line.split(',').collect();
        if parts.len() != 3 {
            return Err(Error::Format(format!("bad spectrum row: {line}")));
        }
        let n: i64 = parts[0].parse().map_err(|_| Error::Format(format!("bad n: {line}")))?;
        let c: f64 = parts[1].parse().map_err(|_| Error::Format(format!("bad C_n: {line}")))?;
        let p: f64 = parts[2].parse().map_err(|_| Error::Format(format!("bad P_n: {line}")))?;
        rows.insert(n, (c, p));
    }
    let mean = mean.ok_or_else(|| Error::Format("missing mean_oam comment".into()))?;
    Ok((rows, mean))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::{pancake_cn, weights_from_cn};
    use crate::model::{rasterize, GridSpec};
    use proptest::prelude::*;

    fn c64(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn field_round_trip_is_bit_exact() {
        let p = VortexPancake::new(c64(1.0, 0.25), 1.0, vec![(0.7, 1.0)]).unwrap();
        let field = rasterize(&p, &GridSpec::square(64, 5.0)).unwrap();
        let mut buf = Vec::new();
        write_field(&mut buf, &field).unwrap();
        assert!(buf.starts_with(b"OAMF1\n"));
        let back = read_field(buf.as_slice()).unwrap();
        assert_eq!(field, back);
    }

    proptest! {
        #[test]
        fn field_round_trip_arbitrary_values(
            values in proptest::collection::vec((-1e3f64..1e3, -1e3f64..1e3), 12..=12)
        ) {
            let vs: Vec<Complex64> = values.iter().map(|&(re, im)| c64(re, im)).collect();
            let field = SampledField::from_values(4, 3, 0.5, 0.25, 1.0, -2.0, vs).unwrap();
            let mut buf = Vec::new();
            write_field(&mut buf, &field).unwrap();
            let back = read_field(buf.as_slice()).unwrap();
            prop_assert_eq!(field, back);
        }
    }

    #[test]
    fn bad_magic_is_rejected() {
        let err = read_field(&b"OAMFX\n{}"[..]).unwrap_err();
        assert!(matches!(err, Error::Format(_)));
    }

    #[test]
    fn pancake_json_round_trip() {
        let p = VortexPancake::new(c64(0.5, -1.5), 2.0, vec![(0.5, 0.25), (1.0, 3.0)]).unwrap();
        let text = pancake_to_json(&p);
        let back = pancake_from_json(&text).unwrap();
        assert_eq!(p, back);
    }

    #[test]
    fn necklace_json_round_trip() {
        let n = NecklaceSpec::new(1, 1.0, 2.0, c64(0.5, 0.0), c64(0.0, 0.5)).unwrap();
        let text = necklace_to_json(&n);
        let back = necklace_from_json(&text).unwrap();
        assert_eq!(n, back);
    }

    #[test]
    fn json_field_names_match_documented_schema() {
        let p = VortexPancake::new(c64(1.0, 0.0), 1.0, vec![(0.5, 0.1)]).unwrap();
        let parsed: serde_json::Value = serde_json::from_str(&pancake_to_json(&p)).unwrap();
        assert!(parsed.get("w0").is_some());
        assert!(parsed.get("a0").is_some());
        assert!(parsed.get("vortices").is_some());
        let n = NecklaceSpec::new(2, 1.0, 0.5, c64(1.0, 0.0), c64(1.0, 0.0)).unwrap();
        let parsed: serde_json::Value = serde_json::from_str(&necklace_to_json(&n)).unwrap();
        for key in ["m", "w0", "d", "ampA", "ampB"] {
            assert!(parsed.get(key).is_some(), "missing {key}");
        }
    }

    #[test]
    fn spectrum_csv_format_and_round_trip() {
        let p = VortexPancake::new(c64(1.0, 0.0), 1.0, vec![(0.0, 0.0), (1.0, 0.0)]).unwrap();
        let s = pancake_cn(&p);
        let w = weights_from_cn(&s).unwrap();
        let mut buf = Vec::new();
        write_spectrum_csv(&mut buf, &s, &w, &[("grid".into(), "none".into())]).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), "n,C_n,P_n");
        // rho1 = 0 kills C_0: the row list starts at n = 1
        assert!(lines.next().unwrap().starts_with("1,"));
        let (rows, mean) = read_spectrum_csv(buf.as_slice()).unwrap();
        assert_eq!(rows.keys().copied().collect::<Vec<_>>(), vec![1, 2]);
        assert!((mean - w.mean_oam()).abs() < 1e-15);
    }

    #[test]
    fn fmt17_has_17_significant_digits() {
        assert_eq!(fmt17(1.0), "1.0000000000000000e0");
        assert_eq!(fmt17(1.0 / 3.0), "3.3333333333333331e-1");
        let x = 0.1234567890123456789;
        let parsed: f64 = fmt17(x).parse().unwrap();
        assert_eq!(parsed, x);
    }
}
