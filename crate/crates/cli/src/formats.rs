//! On-disk formats: time-tag streams (text and binary), histogram CSV,
//! landscape/correlation/extraction/verification CSV.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use anyhow::{bail, Context, Result};

use timebin_core::correlator::{CoincidenceHistogram, TripleHistogram};
use timebin_core::extraction::ExtractedProbs;
use timebin_core::oracle::VerifyOutcome;
use timebin_core::sampler::TimeTagRecord;

use crate::format_float;

pub const TAGS_TEXT_HEADER: &str = "# timebin-tags v1";
pub const TAGS_BINARY_MAGIC: &[u8; 8] = b"TBTAGS1\0";
const BINARY_FRAME_RECORDS: usize = 1 << 16;

/// Write a tag stream as text: header line, then one
/// `detector_id,bin_index` record per line, bins nondecreasing.
pub fn write_tags_text(path: &Path, tags: &[TimeTagRecord]) -> Result<()> {
    let mut w = BufWriter::new(File::create(path).with_context(|| format!("creating {}", path.display()))?);
    writeln!(w, "{TAGS_TEXT_HEADER}")?;
    for t in tags {
        writeln!(w, "{},{}", t.detector, t.bin)?;
    }
    w.flush()?;
    Ok(())
}

/// Write a tag stream as length-prefixed binary frames of little-endian
/// 32-bit fields: 8-byte magic, then per frame a u32 record count
/// followed by (detector_id, bin_index) u32 pairs.
pub fn write_tags_binary(path: &Path, tags: &[TimeTagRecord]) -> Result<()> {
    let mut w = BufWriter::new(File::create(path).with_context(|| format!("creating {}", path.display()))?);
    w.write_all(TAGS_BINARY_MAGIC)?;
    for frame in tags.chunks(BINARY_FRAME_RECORDS) {
        w.write_all(&(frame.len() as u32).to_le_bytes())?;
        for t in frame {
            w.write_all(&t.detector.to_le_bytes())?;
            w.write_all(&t.bin.to_le_bytes())?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Read a tag stream, auto-detecting text vs binary framing, and
/// enforce the nondecreasing-bin invariant.
pub fn read_tags(path: &Path) -> Result<Vec<TimeTagRecord>> {
    let mut file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    let mut magic = [0u8; 8];
    let n = file.read(&mut magic)?;
    if n == 8 && &magic == TAGS_BINARY_MAGIC {
        let tags = read_tags_binary_body(&mut file, path)?;
        for (i, pair) in tags.windows(2).enumerate() {
            if pair[1].bin < pair[0].bin {
                bail!(
                    "{}: record {} out of order (bin {} after {})",
                    path.display(),
                    i + 2,
                    pair[1].bin,
                    pair[0].bin
                );
            }
        }
        Ok(tags)
    } else {
        drop(file);
        read_tags_text(path)
    }
}

fn read_tags_text(path: &Path) -> Result<Vec<TimeTagRecord>> {
    let reader = BufReader::new(File::open(path)?);
    let mut tags: Vec<TimeTagRecord> = Vec::new();
    let mut lines = reader.lines();
    let header = lines
        .next()
        .transpose()?
        .ok_or_else(|| anyhow::anyhow!("{}: empty tag file", path.display()))?;
    if header.trim() != TAGS_TEXT_HEADER {
        bail!("{}:1: expected header `{TAGS_TEXT_HEADER}`, found `{header}`", path.display());
    }
    for (idx, line) in lines.enumerate() {
        let line_no = idx + 2;
        let line = line?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let (det, bin) = line
            .split_once(',')
            .with_context(|| format!("{}:{line_no}: expected `detector_id,bin_index`", path.display()))?;
        let detector: u32 = det
            .trim()
            .parse()
            .with_context(|| format!("{}:{line_no}: bad detector id `{det}`", path.display()))?;
        let bin: u32 = bin
            .trim()
            .parse()
            .with_context(|| format!("{}:{line_no}: bad bin index `{bin}`", path.display()))?;
        if let Some(last) = tags.last() {
            if bin < last.bin {
                bail!(
                    "{}:{line_no}: bins not nondecreasing ({bin} after {})",
                    path.display(),
                    last.bin
                );
            }
        }
        tags.push(TimeTagRecord { bin, detector });
    }
    Ok(tags)
}

fn read_tags_binary_body(file: &mut File, path: &Path) -> Result<Vec<TimeTagRecord>> {
    let mut body = Vec::new();
    file.read_to_end(&mut body)?;
    let mut tags = Vec::new();
    let mut pos = 0usize;
    while pos < body.len() {
        if pos + 4 > body.len() {
            bail!("{}: truncated frame header at byte {pos}", path.display());
        }
        let count = u32::from_le_bytes(body[pos..pos + 4].try_into().unwrap()) as usize;
        pos += 4;
        let bytes = count
            .checked_mul(8)
            .ok_or_else(|| anyhow::anyhow!("{}: corrupt frame length", path.display()))?;
        if pos + bytes > body.len() {
            bail!("{}: truncated frame payload at byte {pos}", path.display());
        }
        for k in 0..count {
            let off = pos + k * 8;
            let detector = u32::from_le_bytes(body[off..off + 4].try_into().unwrap());
            let bin = u32::from_le_bytes(body[off + 4..off + 8].try_into().unwrap());
            tags.push(TimeTagRecord { bin, detector });
        }
        pos += bytes;
    }
    Ok(tags)
}

/// Histogram CSV, order 2: header comment, `delta,counts` rows, and an
/// optional `baseline,<value>` footer row.
pub fn write_g2_histogram(
    path: &Path,
    hist: &CoincidenceHistogram,
    baseline: Option<f64>,
) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "# timebin-hist v1 order=2")?;
    writeln!(w, "delta,counts")?;
    for (delta, counts) in hist.iter() {
        writeln!(w, "{delta},{counts}")?;
    }
    if let Some(b) = baseline {
        writeln!(w, "baseline,{}", format_float(b))?;
    }
    w.flush()?;
    Ok(())
}

/// Histogram CSV, order 3: `delta1,delta2,counts` rows.
pub fn write_g3_histogram(path: &Path, hist: &TripleHistogram, baseline: Option<f64>) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "# timebin-hist v1 order=3")?;
    writeln!(w, "delta1,delta2,counts")?;
    for ((d1, d2), counts) in hist.iter() {
        writeln!(w, "{d1},{d2},{counts}")?;
    }
    if let Some(b) = baseline {
        writeln!(w, "baseline,,{}", format_float(b))?;
    }
    w.flush()?;
    Ok(())
}

/// Landscape CSV row: angles in units of pi.
pub struct LandscapeRow {
    pub theta_pi: f64,
    pub phi_pi: f64,
    pub p0: f64,
    pub p1: f64,
    pub p2: f64,
    pub model: &'static str,
}

pub fn write_landscape(path: &Path, rows: &[LandscapeRow]) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "theta_pi,phi_pi,P0,P1,P2,model")?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{},{},{}",
            format_float(r.theta_pi),
            format_float(r.phi_pi),
            format_float(r.p0),
            format_float(r.p1),
            format_float(r.p2),
            r.model
        )?;
    }
    w.flush()?;
    Ok(())
}

/// Correlation CSV row: all three second-order correlations at one
/// parameter point.
pub struct CorrelationRow {
    pub theta_pi: f64,
    pub phi_pi: f64,
    pub delta: i32,
    pub g2_ee: f64,
    pub g2_ff: f64,
    pub g2_ef: f64,
}

pub fn write_correlations(path: &Path, rows: &[CorrelationRow]) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "theta_pi,phi_pi,delta,g2_ee,g2_ff,g2_ef")?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{},{},{}",
            format_float(r.theta_pi),
            format_float(r.phi_pi),
            r.delta,
            format_float(r.g2_ee),
            format_float(r.g2_ff),
            format_float(r.g2_ef)
        )?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_extraction(path: &Path, probs: &ExtractedProbs) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "n,P0,P1,P2,P3_bound")?;
    writeln!(
        w,
        "{},{},{},{},{}",
        format_float(probs.mean_photon),
        format_float(probs.p0),
        format_float(probs.p1),
        format_float(probs.p2),
        probs.p3_bound.map(format_float).unwrap_or_default()
    )?;
    w.flush()?;
    Ok(())
}

/// Verification report CSV; angles in units of pi, empty analytic
/// columns where no closed form applies.
pub fn write_verification(path: &Path, outcome: &VerifyOutcome) -> Result<()> {
    let pi = std::f64::consts::PI;
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "quantity,theta_pi,phi_pi,delta,exact,analytic,deviation")?;
    for r in &outcome.reports {
        writeln!(
            w,
            "{},{},{},{},{},{},{}",
            r.quantity,
            format_float(r.theta / pi),
            format_float(r.phi / pi),
            r.delta.map(|d| d.to_string()).unwrap_or_default(),
            format_float(r.exact),
            r.analytic.map(format_float).unwrap_or_default(),
            r.deviation.map(format_float).unwrap_or_default()
        )?;
    }
    w.flush()?;
    Ok(())
}

/// Accessible-ranges CSV.
pub struct RangeRow {
    pub model: &'static str,
    pub quantity: &'static str,
    pub lo: f64,
    pub hi: f64,
}

pub fn write_ranges(path: &Path, rows: &[RangeRow]) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "model,quantity,lo,hi")?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{}",
            r.model,
            r.quantity,
            format_float(r.lo),
            format_float(r.hi)
        )?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use tempfile::tempdir;

    fn tag(detector: u32, bin: u32) -> TimeTagRecord {
        TimeTagRecord { bin, detector }
    }

    #[test]
    fn text_tags_roundtrip() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("run.tags");
        let tags = vec![tag(0, 2), tag(1, 2), tag(0, 5)];
        write_tags_text(&path, &tags).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("# timebin-tags v1\n0,2\n1,2\n0,5\n"));
        assert_eq!(read_tags(&path).unwrap(), tags);
    }

    #[test]
    fn binary_tags_roundtrip() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("run.bin");
        let tags: Vec<TimeTagRecord> = (0..100_000).map(|i| tag(i % 3, i / 2)).collect();
        write_tags_binary(&path, &tags).unwrap();
        assert_eq!(read_tags(&path).unwrap(), tags);
    }

    #[test]
    fn text_reader_reports_line_numbers() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("bad.tags");
        std::fs::write(&path, "# timebin-tags v1\n0,1\nnonsense\n").unwrap();
        let err = format!("{:#}", read_tags(&path).unwrap_err());
        assert!(err.contains(":3"), "{err}");
        std::fs::write(&path, "wrong header\n").unwrap();
        let err = format!("{:#}", read_tags(&path).unwrap_err());
        assert!(err.contains(":1"), "{err}");
    }

    #[test]
    fn out_of_order_tags_rejected() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("bad.tags");
        std::fs::write(&path, "# timebin-tags v1\n0,5\n0,3\n").unwrap();
        let err = format!("{:#}", read_tags(&path).unwrap_err());
        assert!(err.contains(":3") && err.contains("nondecreasing"), "{err}");
    }

    #[test]
    fn truncated_binary_rejected() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("bad.bin");
        let mut bytes = TAGS_BINARY_MAGIC.to_vec();
        bytes.extend_from_slice(&5u32.to_le_bytes());
        bytes.extend_from_slice(&[0u8; 8]); // one record instead of five
        std::fs::write(&path, bytes).unwrap();
        assert!(read_tags(&path).is_err());
    }
}
