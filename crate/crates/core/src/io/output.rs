//! Artifacts: diagnostics CSV, raw snapshots with a text header, manifest.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::grid::{Grid, ScalarField};

pub const DIAGNOSTICS_HEADER: &str =
    "time,mass,momentum_x,momentum_y,momentum_z,charge,density_residual,wave_residual,picard_distance";

#[derive(Clone, Debug, PartialEq)]
pub struct DiagnosticsRow {
    pub time: f64,
    pub mass: f64,
    pub momentum: [f64; 3],
    pub charge: Option<f64>,
    pub density_residual: Option<f64>,
    pub wave_residual: Option<f64>,
    pub picard_distance: Option<f64>,
}

fn cell(v: Option<f64>) -> String {
    v.map_or(String::new(), |x| format!("{x:e}"))
}

impl DiagnosticsRow {
    pub fn to_csv(&self) -> String {
        format!(
            "{:e},{:e},{:e},{:e},{:e},{},{},{},{}",
            self.time,
            self.mass,
            self.momentum[0],
            self.momentum[1],
            self.momentum[2],
            cell(self.charge),
            cell(self.density_residual),
            cell(self.wave_residual),
            cell(self.picard_distance),
        )
    }
}

pub fn diagnostics_csv(rows: &[DiagnosticsRow]) -> String {
    let mut s = String::from(DIAGNOSTICS_HEADER);
    s.push('\n');
    for r in rows {
        s.push_str(&r.to_csv());
        s.push('\n');
    }
    s
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct SnapshotHeader {
    pub dims: [usize; 3],
    pub spacing: [f64; 3],
    pub time: f64,
    pub fields: Vec<String>,
}

impl SnapshotHeader {
    pub fn to_line(&self) -> String {
        let d = self.dims;
        let h = self.spacing;
        format!(
            "dims={},{},{} spacing={:?},{:?},{:?} time={:?} fields={}\n",
            d[0],
            d[1],
            d[2],
            h[0],
            h[1],
            h[2],
            self.time,
            self.fields.join(",")
        )
    }

    pub fn parse(line: &str) -> Result<Self> {
        let bad = |m: &str| Error::Invalid(format!("snapshot header: {m}"));
        let mut dims = None;
        let mut spacing = None;
        let mut time = None;
        let mut fields = None;
        for part in line.split_whitespace() {
            let (k, v) = part.split_once('=').ok_or_else(|| bad("expected key=value"))?;
            let list = || v.split(',');
            match k {
                "dims" => {
                    let d: Vec<usize> = list().map(str::parse).collect::<std::result::Result<_, _>>().map_err(|_| bad("dims"))?;
                    dims = Some(<[usize; 3]>::try_from(d).map_err(|_| bad("dims needs 3 entries"))?);
                }
                "spacing" => {
                    let h: Vec<f64> = list().map(str::parse).collect::<std::result::Result<_, _>>().map_err(|_| bad("spacing"))?;
                    spacing = Some(<[f64; 3]>::try_from(h).map_err(|_| bad("spacing needs 3 entries"))?);
                }
                "time" => time = Some(v.parse::<f64>().map_err(|_| bad("time"))?),
                "fields" => fields = Some(list().map(str::to_string).collect()),
                _ => return Err(bad(&format!("unknown entry `{k}`"))),
            }
        }
        Ok(Self {
            dims: dims.ok_or_else(|| bad("missing dims"))?,
            spacing: spacing.ok_or_else(|| bad("missing spacing"))?,
            time: time.ok_or_else(|| bad("missing time"))?,
            fields: fields.ok_or_else(|| bad("missing fields"))?,
        })
    }
}

/// Writes `<stem>.hdr` and `<stem>.bin`: little-endian f64, field-major, then
/// z, y, x with x fastest.
pub fn write_snapshot(
    dir: &Path,
    stem: &str,
    grid: &Grid,
    time: f64,
    fields: &[(&str, &ScalarField)],
) -> Result<(PathBuf, PathBuf)> {
    for (_, f) in fields {
        grid.same_shape(&f.grid)?;
    }
    let header = SnapshotHeader {
        dims: grid.dims(),
        spacing: grid.spacing(),
        time,
        fields: fields.iter().map(|(n, _)| n.to_string()).collect(),
    };
    let hdr = dir.join(format!("{stem}.hdr"));
    let bin = dir.join(format!("{stem}.bin"));
    fs::write(&hdr, header.to_line())?;
    let mut payload = Vec::with_capacity(8 * grid.len() * fields.len());
    for (_, f) in fields {
        for v in &f.data {
            payload.extend_from_slice(&v.to_le_bytes());
        }
    }
    let mut file = fs::File::create(&bin)?;
    file.write_all(&payload)?;
    Ok((hdr, bin))
}

pub fn read_snapshot(hdr: &Path) -> Result<(SnapshotHeader, Vec<Vec<f64>>)> {
    let header = SnapshotHeader::parse(fs::read_to_string(hdr)?.trim_end())?;
    let bytes = fs::read(hdr.with_extension("bin"))?;
    let n: usize = header.dims.iter().product();
    if bytes.len() != 8 * n * header.fields.len() {
        return Err(Error::Invalid(format!(
            "snapshot payload has {} bytes, header implies {}",
            bytes.len(),
            8 * n * header.fields.len()
        )));
    }
    let values: Vec<f64> = bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")))
        .collect();
    let fields = values.chunks(n).map(<[f64]>::to_vec).collect();
    Ok((header, fields))
}

#[derive(Clone, Debug, Serialize)]
pub struct ArtifactEntry {
    pub path: String,
    pub sha256: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct Manifest {
    pub program: &'static str,
    pub version: &'static str,
    pub config_sha256: String,
    pub seed: u64,
    pub mode: String,
    /// Canonical configuration text; rerunning it reproduces every artifact.
    pub config: String,
    pub artifacts: Vec<ArtifactEntry>,
}

impl Manifest {
    pub fn write(&self, dir: &Path) -> Result<PathBuf> {
        let path = dir.join("manifest.json");
        let text = serde_json::to_string_pretty(self)
            .map_err(|e| Error::Invalid(format!("manifest serialization: {e}")))?;
        fs::write(&path, text + "\n")?;
        Ok(path)
    }
}
