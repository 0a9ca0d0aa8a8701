//! Rectangular node grids on the (r, z) half-plane and the sphere-valued /
//! scalar fields living on them, plus CSV snapshot I/O.

use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::geom::vec3;

/// Uniform rectangular grid over [r_min, r_max] × [z_min, z_max] with
/// `nr` × `nz` cells (so nr+1 × nz+1 nodes). When r_min = 0 the first
/// column lies on the symmetry axis and carries the reflection condition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid2D {
    pub r_min: f64,
    pub r_max: f64,
    pub z_min: f64,
    pub z_max: f64,
    pub nr: usize,
    pub nz: usize,
}

impl Grid2D {
    pub fn new(r_min: f64, r_max: f64, z_min: f64, z_max: f64, nr: usize, nz: usize) -> Result<Self> {
        if r_min < 0.0 {
            return Err(Error::geometry("grids live in the half-plane r ≥ 0"));
        }
        if r_max <= r_min || z_max <= z_min || nr < 2 || nz < 2 {
            return Err(Error::geometry("degenerate grid extents"));
        }
        Ok(Grid2D {
            r_min,
            r_max,
            z_min,
            z_max,
            nr,
            nz,
        })
    }

    pub fn dr(&self) -> f64 {
        (self.r_max - self.r_min) / self.nr as f64
    }

    pub fn dz(&self) -> f64 {
        (self.z_max - self.z_min) / self.nz as f64
    }

    pub fn nodes_r(&self) -> usize {
        self.nr + 1
    }

    pub fn nodes_z(&self) -> usize {
        self.nz + 1
    }

    pub fn n_nodes(&self) -> usize {
        self.nodes_r() * self.nodes_z()
    }

    pub fn node_r(&self, i: usize) -> f64 {
        self.r_min + i as f64 * self.dr()
    }

    pub fn node_z(&self, j: usize) -> f64 {
        self.z_min + j as f64 * self.dz()
    }

    #[inline]
    pub fn idx(&self, i: usize, j: usize) -> usize {
        j * self.nodes_r() + i
    }

    pub fn has_axis(&self) -> bool {
        self.r_min == 0.0
    }

    /// True for nodes on ∂𝒟 \ {r = 0}: the Dirichlet part of the boundary.
    pub fn is_dirichlet_boundary(&self, i: usize, j: usize) -> bool {
        let right = i == self.nr;
        let left = i == 0 && !self.has_axis();
        right || left || j == 0 || j == self.nz
    }

    /// Nearest node to a point, clamped into the grid.
    pub fn nearest_node(&self, r: f64, z: f64) -> (usize, usize) {
        let i = ((r - self.r_min) / self.dr()).round().clamp(0.0, self.nr as f64) as usize;
        let j = ((z - self.z_min) / self.dz()).round().clamp(0.0, self.nz as f64) as usize;
        (i, j)
    }

    /// A grid of `n` × `n` cells spanning `half_width` around a center, with
    /// the node lattice offset half a spacing so the center falls strictly
    /// between nodes.
    pub fn centered_window(center: [f64; 2], half_width: f64, n: usize) -> Result<Self> {
        let h = 2.0 * half_width / n as f64;
        Grid2D::new(
            center[0] - half_width - 0.5 * h,
            center[0] + half_width - 0.5 * h,
            center[1] - half_width - 0.5 * h,
            center[1] + half_width - 0.5 * h,
            n,
            n,
        )
    }
}

/// A sphere-valued field: one unit vector per node.
#[derive(Debug, Clone)]
pub struct MapField {
    pub grid: Grid2D,
    pub data: Vec<[f64; 3]>,
    pub time: f64,
}

impl MapField {
    pub fn constant(grid: Grid2D, v: [f64; 3]) -> Self {
        MapField {
            grid,
            data: vec![v; grid.n_nodes()],
            time: 0.0,
        }
    }

    pub fn from_fn(grid: Grid2D, f: impl Fn(f64, f64) -> [f64; 3]) -> Self {
        let mut data = Vec::with_capacity(grid.n_nodes());
        for j in 0..grid.nodes_z() {
            for i in 0..grid.nodes_r() {
                data.push(f(grid.node_r(i), grid.node_z(j)));
            }
        }
        MapField {
            grid,
            data,
            time: 0.0,
        }
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> [f64; 3] {
        self.data[self.grid.idx(i, j)]
    }

    /// Project every node back to S²; returns the largest pointwise change.
    pub fn renormalize(&mut self) -> f64 {
        let mut max_change: f64 = 0.0;
        for v in &mut self.data {
            let n = vec3::norm(*v);
            if n > 0.0 {
                let w = [v[0] / n, v[1] / n, v[2] / n];
                max_change = max_change.max(vec3::norm(vec3::sub(w, *v)));
                *v = w;
            }
        }
        max_change
    }

    /// Largest |1 − |u|| over nodes.
    pub fn max_norm_defect(&self) -> f64 {
        self.data
            .iter()
            .map(|v| (vec3::norm(*v) - 1.0).abs())
            .fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.data
            .iter()
            .all(|v| v.iter().all(|x| x.is_finite()))
    }
}

/// A scalar (corotational angle) field.
#[derive(Debug, Clone)]
pub struct ScalarField {
    pub grid: Grid2D,
    pub data: Vec<f64>,
    pub time: f64,
}

impl ScalarField {
    pub fn constant(grid: Grid2D, v: f64) -> Self {
        ScalarField {
            grid,
            data: vec![v; grid.n_nodes()],
            time: 0.0,
        }
    }

    pub fn from_fn(grid: Grid2D, f: impl Fn(f64, f64) -> f64) -> Self {
        let mut data = Vec::with_capacity(grid.n_nodes());
        for j in 0..grid.nodes_z() {
            for i in 0..grid.nodes_r() {
                data.push(f(grid.node_r(i), grid.node_z(j)));
            }
        }
        ScalarField {
            grid,
            data,
            time: 0.0,
        }
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[self.grid.idx(i, j)]
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }
}

fn write_header<W: Write>(w: &mut W, grid: &Grid2D, time: f64) -> Result<()> {
    writeln!(w, "# nr,nz,r_min,r_max,z_min,z_max,t")?;
    writeln!(
        w,
        "# {},{},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e}",
        grid.nr, grid.nz, grid.r_min, grid.r_max, grid.z_min, grid.z_max, time
    )?;
    Ok(())
}

fn parse_header(lines: &[String]) -> Result<(Grid2D, f64)> {
    let meta = lines
        .get(1)
        .ok_or_else(|| Error::geometry("snapshot too short"))?
        .trim_start_matches('#')
        .trim();
    let parts: Vec<&str> = meta.split(',').collect();
    if parts.len() != 7 {
        return Err(Error::geometry("malformed snapshot header"));
    }
    let nr: usize = parts[0].trim().parse().map_err(|_| Error::geometry("bad nr"))?;
    let nz: usize = parts[1].trim().parse().map_err(|_| Error::geometry("bad nz"))?;
    let nums: Vec<f64> = parts[2..]
        .iter()
        .map(|s| s.trim().parse::<f64>().map_err(|_| Error::geometry("bad bound")))
        .collect::<Result<_>>()?;
    let grid = Grid2D::new(nums[0], nums[1], nums[2], nums[3], nr, nz)?;
    Ok((grid, nums[4]))
}

/// Write a map snapshot: header lines, a column header, then node-major rows
/// (r fastest) of u₁,u₂,u₃ printed with 17 significant digits.
pub fn write_map_snapshot(path: &Path, field: &MapField) -> Result<()> {
    let mut w = BufWriter::new(std::fs::File::create(path)?);
    write_header(&mut w, &field.grid, field.time)?;
    writeln!(w, "u1,u2,u3")?;
    for v in &field.data {
        writeln!(w, "{:.16e},{:.16e},{:.16e}", v[0], v[1], v[2])?;
    }
    Ok(())
}

pub fn read_map_snapshot(path: &Path) -> Result<MapField> {
    let reader = BufReader::new(std::fs::File::open(path)?);
    let lines: Vec<String> = reader.lines().collect::<std::io::Result<_>>()?;
    let (grid, time) = parse_header(&lines)?;
    let mut data = Vec::with_capacity(grid.n_nodes());
    for line in lines.iter().skip(3) {
        if line.trim().is_empty() {
            continue;
        }
        let cols: Vec<f64> = line
            .split(',')
            .map(|s| s.trim().parse::<f64>().map_err(|_| Error::geometry("bad value")))
            .collect::<Result<_>>()?;
        if cols.len() != 3 {
            return Err(Error::geometry("map snapshot rows need 3 columns"));
        }
        data.push([cols[0], cols[1], cols[2]]);
    }
    if data.len() != grid.n_nodes() {
        return Err(Error::geometry("snapshot node count mismatch"));
    }
    Ok(MapField { grid, data, time })
}

/// Scalar snapshot with a single `v` column.
pub fn write_scalar_snapshot(path: &Path, field: &ScalarField) -> Result<()> {
    let mut w = BufWriter::new(std::fs::File::create(path)?);
    write_header(&mut w, &field.grid, field.time)?;
    writeln!(w, "v")?;
    for v in &field.data {
        writeln!(w, "{v:.16e}")?;
    }
    Ok(())
}

pub fn read_scalar_snapshot(path: &Path) -> Result<ScalarField> {
    let reader = BufReader::new(std::fs::File::open(path)?);
    let lines: Vec<String> = reader.lines().collect::<std::io::Result<_>>()?;
    let (grid, time) = parse_header(&lines)?;
    let mut data = Vec::with_capacity(grid.n_nodes());
    for line in lines.iter().skip(3) {
        if line.trim().is_empty() {
            continue;
        }
        data.push(
            line.trim()
                .parse::<f64>()
                .map_err(|_| Error::geometry("bad value"))?,
        );
    }
    if data.len() != grid.n_nodes() {
        return Err(Error::geometry("snapshot node count mismatch"));
    }
    Ok(ScalarField { grid, data, time })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_basics() {
        let g = Grid2D::new(0.0, 2.0, -1.0, 1.0, 256, 256).unwrap();
        assert!(g.has_axis());
        assert_eq!(g.nodes_r(), 257);
        assert!((g.dr() - 2.0 / 256.0).abs() < 1e-15);
        assert!(g.is_dirichlet_boundary(256, 10));
        assert!(g.is_dirichlet_boundary(5, 0));
        assert!(!g.is_dirichlet_boundary(0, 10), "axis column is not Dirichlet");
        assert!(Grid2D::new(-0.1, 1.0, 0.0, 1.0, 4, 4).is_err());
    }

    #[test]
    fn centered_window_keeps_center_off_nodes() {
        let g = Grid2D::centered_window([1.0, 0.0], 0.1, 256).unwrap();
        let h = g.dr();
        let fi = (1.0 - g.r_min) / h;
        assert!((fi - fi.round()).abs() > 0.4, "center must sit mid-cell");
        let fj = (0.0 - g.z_min) / g.dz();
        assert!((fj - fj.round()).abs() > 0.4);
    }

    #[test]
    fn renormalize_reports_change() {
        let g = Grid2D::new(0.0, 1.0, 0.0, 1.0, 4, 4).unwrap();
        let mut f = MapField::constant(g, [0.0, 0.0, 2.0]);
        let change = f.renormalize();
        assert!((change - 1.0).abs() < 1e-14);
        assert!(f.max_norm_defect() < 1e-15);
    }

    #[test]
    fn snapshot_roundtrip() {
        let dir = std::env::temp_dir().join("hmflow-snapshot-test");
        std::fs::create_dir_all(&dir).unwrap();
        let g = Grid2D::new(0.5, 1.5, -0.25, 0.25, 8, 6).unwrap();
        let mut f = MapField::from_fn(g, |r, z| {
            let n = (r * r + z * z + 1.0).sqrt();
            [r / n, z / n, 1.0 / n]
        });
        f.time = 0.125;
        let path = dir.join("map.csv");
        write_map_snapshot(&path, &f).unwrap();
        let back = read_map_snapshot(&path).unwrap();
        assert_eq!(back.grid, f.grid);
        assert_eq!(back.time, f.time);
        assert_eq!(back.data, f.data);

        let s = ScalarField::from_fn(g, |r, z| r - z);
        let spath = dir.join("scalar.csv");
        write_scalar_snapshot(&spath, &s).unwrap();
        let sback = read_scalar_snapshot(&spath).unwrap();
        assert_eq!(sback.data, s.data);
    }
}
