//! Run-directory persistence: atomic file writes, the cube and point CSV
//! formats, and reconstruction of a built run from disk.
//!
//! Reals are written with 17 significant digits, which round-trips every
//! binary64 value exactly; `load_run` therefore rebuilds the cube families
//! bit for bit.

use super::manifest::RunManifest;
use crate::cantor::CantorSet;
use crate::construction::GenerationOutput;
use crate::geometry::{Cube, Point};
use crate::Real;
use std::fs;
use std::path::Path;

/// Writes via a temp file in the same directory plus a rename, so readers
/// never observe a partial file.
pub fn atomic_write(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    let mut tmp = path.to_path_buf();
    tmp.set_extension("tmp");
    fs::write(&tmp, bytes)?;
    fs::rename(&tmp, path)
}

/// 17-significant-digit decimal form of a real; parses back to the same
/// bits.
pub fn fmt_real(x: Real) -> String {
    format!("{x:.16e}")
}

pub fn cubes_file(generation: u32) -> String {
    format!("cubes_gen_{generation}.csv")
}

pub fn points_file(generation: u32) -> String {
    format!("points_gen_{generation}.csv")
}

fn coord_header(prefix: &str, d: usize) -> String {
    (0..d)
        .map(|axis| format!("{prefix}{axis}"))
        .collect::<Vec<_>>()
        .join(",")
}

pub fn cubes_csv(generation: u32, cubes: &[Cube<Real>], parent_ids: &[usize]) -> String {
    let d = cubes.first().map(|c| c.dim()).unwrap_or(0);
    let mut out = format!("generation,cube_id,parent_id,{},side\n", coord_header("c", d));
    for (id, (cube, parent)) in cubes.iter().zip(parent_ids).enumerate() {
        let coords = cube
            .center
            .coords
            .iter()
            .map(|&x| fmt_real(x))
            .collect::<Vec<_>>()
            .join(",");
        out.push_str(&format!(
            "{generation},{id},{parent},{coords},{}\n",
            fmt_real(cube.side)
        ));
    }
    out
}

pub fn points_csv(generation: u32, centers: &[Point<Real>], parent_ids: &[usize]) -> String {
    let d = centers.first().map(|p| p.dim()).unwrap_or(0);
    let mut out = format!("generation,point_id,parent_id,{}\n", coord_header("c", d));
    for (id, (point, parent)) in centers.iter().zip(parent_ids).enumerate() {
        let coords = point
            .coords
            .iter()
            .map(|&x| fmt_real(x))
            .collect::<Vec<_>>()
            .join(",");
        out.push_str(&format!("{generation},{id},{parent},{coords}\n"));
    }
    out
}

/// Parses a cube CSV back into cubes and parent indices. Shape problems
/// (wrong header, bad numbers, non-positive sides) are reported as errors;
/// semantic problems (wrong counts, misplaced cubes) are left for
/// verification to flag.
pub fn parse_cubes_csv(
    text: &str,
    d: usize,
    generation: u32,
) -> Result<(Vec<Cube<Real>>, Vec<usize>), String> {
    let mut lines = text.lines();
    let header = lines.next().ok_or("empty cube file")?;
    let expected = format!("generation,cube_id,parent_id,{},side", coord_header("c", d));
    if header != expected {
        return Err(format!(
            "cube file header {header:?} does not match {expected:?}"
        ));
    }
    let mut cubes = Vec::new();
    let mut parents = Vec::new();
    for (lineno, line) in lines.enumerate() {
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != d + 4 {
            return Err(format!(
                "cube row {}: {} fields, expected {}",
                lineno + 2,
                fields.len(),
                d + 4
            ));
        }
        let row_gen: u32 = fields[0]
            .parse()
            .map_err(|e| format!("cube row {}: {e}", lineno + 2))?;
        if row_gen != generation {
            return Err(format!(
                "cube row {}: generation {row_gen}, expected {generation}",
                lineno + 2
            ));
        }
        let parent: usize = fields[2]
            .parse()
            .map_err(|e| format!("cube row {}: {e}", lineno + 2))?;
        let mut coords = Vec::with_capacity(d);
        for field in &fields[3..3 + d] {
            let x: Real = field
                .parse()
                .map_err(|e| format!("cube row {}: {e}", lineno + 2))?;
            if !x.is_finite() {
                return Err(format!("cube row {}: non-finite coordinate", lineno + 2));
            }
            coords.push(x);
        }
        let side: Real = fields[d + 3]
            .parse()
            .map_err(|e| format!("cube row {}: {e}", lineno + 2))?;
        if !(side > 0.0 && side.is_finite()) {
            return Err(format!("cube row {}: side must be positive", lineno + 2));
        }
        cubes.push(Cube::new(Point::new(coords), side));
        parents.push(parent);
    }
    Ok((cubes, parents))
}

pub fn read_manifest(dir: &Path) -> Result<RunManifest, String> {
    let path = dir.join("manifest.json");
    let text = fs::read_to_string(&path).map_err(|e| format!("{}: {e}", path.display()))?;
    let manifest: RunManifest =
        serde_json::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))?;
    manifest.schedule.validate().map_err(|e| e.to_string())?;
    if manifest.generations.len() != manifest.schedule.n_generations as usize {
        return Err(format!(
            "manifest lists {} generations for a {}-generation schedule",
            manifest.generations.len(),
            manifest.schedule.n_generations
        ));
    }
    for summary in &manifest.generations {
        if summary.params.d != manifest.schedule.d {
            return Err(format!(
                "generation {} parameters disagree with the schedule dimension",
                summary.generation
            ));
        }
    }
    Ok(manifest)
}

/// Rebuilds the run from `manifest.json` and the cube CSVs. Run logs and
/// side data come from the manifest; the cubes come from the CSVs alone.
pub fn load_run(dir: &Path) -> Result<(RunManifest, CantorSet), String> {
    let manifest = read_manifest(dir)?;
    let d = manifest.schedule.d;
    let mut generations = Vec::with_capacity(manifest.generations.len());
    let mut side_lengths = vec![1.0];
    for summary in &manifest.generations {
        let path = dir.join(cubes_file(summary.generation));
        let text = fs::read_to_string(&path).map_err(|e| format!("{}: {e}", path.display()))?;
        let (children, child_parent) = parse_cubes_csv(&text, d, summary.generation)?;
        side_lengths.push(summary.side);
        generations.push(GenerationOutput {
            children,
            child_parent,
            epsilon: summary.side,
            n_per_parent: summary.n_per_parent,
            removal_log: summary.removal_log.clone(),
            retries: summary.retries,
            eta: summary.eta,
        });
    }
    Ok((
        manifest.clone(),
        CantorSet {
            schedule: manifest.schedule,
            generations,
            side_lengths,
        },
    ))
}
