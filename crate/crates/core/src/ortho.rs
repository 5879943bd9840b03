//! Orthographic depth rasters of canonical clouds.
//!
//! | view  | horizontal | vertical | depth (near = -1) |
//! |-------|------------|----------|-------------------|
//! | front | Y          | Z        | X                 |
//! | top   | X          | Y        | Z                 |
//! | right | X          | Z        | Y                 |
//!
//! Cells tile `[-1, 1]²` uniformly and are half-open except for the last
//! cell on each axis, which also takes the `+1` edge. Row 0 is the top of
//! the image (vertical coordinate near `+1`).

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::cloud::PointCloud;
use crate::error::{Error, Result};

/// Occupied cells never drop below this value.
pub const MIN_OCCUPIED: f64 = 1e-6;

pub const MIN_RESOLUTION: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum View {
    Front,
    Top,
    Right,
}

impl View {
    pub const ALL: [View; 3] = [View::Front, View::Top, View::Right];

    /// Coordinate indices `(horizontal, vertical, depth)`.
    pub fn axes(self) -> (usize, usize, usize) {
        match self {
            View::Front => (1, 2, 0),
            View::Top => (0, 1, 2),
            View::Right => (0, 2, 1),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            View::Front => "front",
            View::Top => "top",
            View::Right => "right",
        }
    }
}

impl std::str::FromStr for View {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "front" => Ok(View::Front),
            "top" => Ok(View::Top),
            "right" => Ok(View::Right),
            _ => Err(Error::BadConfig(format!("unknown view `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Resolution {
    pub width: usize,
    pub height: usize,
}

impl Resolution {
    pub const fn square(n: usize) -> Self {
        Self { width: n, height: n }
    }

    pub fn validate(self) -> Result<Self> {
        if self.width < MIN_RESOLUTION || self.height < MIN_RESOLUTION {
            Err(Error::BadResolution {
                width: self.width,
                height: self.height,
            })
        } else {
            Ok(self)
        }
    }
}

impl Default for Resolution {
    fn default() -> Self {
        Self::square(64)
    }
}

/// A `width × height` depth raster, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ViewGrid {
    view: View,
    resolution: Resolution,
    values: Vec<f64>,
}

impl ViewGrid {
    pub fn new(view: View, resolution: Resolution, values: Vec<f64>) -> Result<Self> {
        if values.len() != resolution.width * resolution.height {
            return Err(Error::DimensionMismatch {
                expected: resolution.width * resolution.height,
                found: values.len(),
            });
        }
        if values.iter().any(|v| !(0.0..=1.0).contains(v)) {
            return Err(Error::BadConfig("grid values must lie in [0, 1]".into()));
        }
        Ok(Self {
            view,
            resolution,
            values,
        })
    }

    pub fn filled(view: View, resolution: Resolution, value: f64) -> Result<Self> {
        Self::new(view, resolution, vec![value; resolution.width * resolution.height])
    }

    pub fn view(&self) -> View {
        self.view
    }

    pub fn resolution(&self) -> Resolution {
        self.resolution
    }

    pub fn width(&self) -> usize {
        self.resolution.width
    }

    pub fn height(&self) -> usize {
        self.resolution.height
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.values[row * self.resolution.width + col]
    }

    /// Value at signed coordinates; anything outside the grid reads as 0.
    pub fn get_or_zero(&self, row: isize, col: isize) -> f64 {
        if row < 0 || col < 0 || row as usize >= self.height() || col as usize >= self.width() {
            0.0
        } else {
            self.get(row as usize, col as usize)
        }
    }

    pub fn occupied_cells(&self) -> usize {
        self.values.iter().filter(|v| **v > 0.0).count()
    }

    /// `size × size` window whose top-left cell is `(top, left)`, zero-filled
    /// where it leaves the grid.
    pub fn window(&self, top: isize, left: isize, size: usize) -> ViewGrid {
        let mut values = Vec::with_capacity(size * size);
        for r in 0..size as isize {
            for c in 0..size as isize {
                values.push(self.get_or_zero(top + r, left + c));
            }
        }
        ViewGrid {
            view: self.view,
            resolution: Resolution::square(size),
            values,
        }
    }

    /// One grid row per line, comma separated, top row first.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for row in self.values.chunks(self.width()) {
            let line: Vec<String> = row.iter().map(|v| v.to_string()).collect();
            let _ = writeln!(out, "{}", line.join(","));
        }
        out
    }

    /// Binary 8-bit PGM with `round(value·255)` intensities.
    pub fn to_pgm(&self) -> Vec<u8> {
        let mut out = format!("P5\n{} {}\n255\n", self.width(), self.height()).into_bytes();
        out.extend(self.values.iter().map(|v| (v * 255.0).round().clamp(0.0, 255.0) as u8));
        out
    }
}

/// Cell index along one axis for coordinate `u ∈ [-1, 1]`.
#[inline]
pub fn cell_index(u: f64, cells: usize) -> usize {
    let t = (u + 1.0) * 0.5;
    let i = (t * cells as f64).floor();
    if i <= 0.0 {
        0
    } else {
        (i as usize).min(cells - 1)
    }
}

/// Same mapping without clamping, for positions that may fall outside the grid.
#[inline]
pub fn cell_index_unclamped(u: f64, cells: usize) -> isize {
    let t = (u + 1.0) * 0.5;
    let i = (t * cells as f64).floor() as isize;
    if u == 1.0 {
        cells as isize - 1
    } else {
        i
    }
}

/// Depth remapped to `[0, 1]`, with 0 nearest to the viewer.
#[inline]
pub fn normalized_depth(d: f64) -> f64 {
    ((d + 1.0) * 0.5).clamp(0.0, 1.0)
}

#[inline]
pub fn depth_value(d_near: f64) -> f64 {
    (1.0 - d_near).max(MIN_OCCUPIED)
}

pub fn project(canonical: &PointCloud, view: View, resolution: Resolution) -> Result<ViewGrid> {
    canonical.ensure_non_empty()?;
    let Resolution { width, height } = resolution.validate()?;
    let (h_axis, v_axis, d_axis) = view.axes();
    let mut nearest = vec![f64::INFINITY; width * height];
    for p in canonical.points() {
        let col = cell_index(p[h_axis], width);
        let row = height - 1 - cell_index(p[v_axis], height);
        let d = normalized_depth(p[d_axis]);
        let slot = &mut nearest[row * width + col];
        if d < *slot {
            *slot = d;
        }
    }
    let values = nearest
        .into_iter()
        .map(|d| if d.is_finite() { depth_value(d) } else { 0.0 })
        .collect();
    Ok(ViewGrid {
        view,
        resolution,
        values,
    })
}

/// Front, top and right grids, in that order.
pub fn project_all(canonical: &PointCloud, resolution: Resolution) -> Result<[ViewGrid; 3]> {
    Ok([
        project(canonical, View::Front, resolution)?,
        project(canonical, View::Top, resolution)?,
        project(canonical, View::Right, resolution)?,
    ])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_point_at_origin() {
        let c = PointCloud::from_xyz(&[[0.0, 0.0, 0.0]]).unwrap();
        let g = project(&c, View::Front, Resolution::square(4)).unwrap();
        assert_eq!(g.occupied_cells(), 1);
        assert_eq!(g.values().iter().cloned().fold(0.0, f64::max), 0.5);
        // (0,0) sits on the lower edge of cell 2 on both axes; row is flipped.
        assert_eq!(g.get(1, 2), 0.5);
    }

    #[test]
    fn near_plane_is_bright() {
        let pts: Vec<[f64; 3]> = (0..100)
            .map(|i| [-1.0, (i % 10) as f64 / 5.0 - 0.9, (i / 10) as f64 / 5.0 - 0.9])
            .collect();
        let g = project(&PointCloud::from_xyz(&pts).unwrap(), View::Front, Resolution::square(8)).unwrap();
        assert!(g.occupied_cells() > 0);
        assert!(g.values().iter().all(|v| *v == 0.0 || *v == 1.0));
    }

    #[test]
    fn far_plane_stays_occupied() {
        let c = PointCloud::from_xyz(&[[1.0, 0.2, 0.2]]).unwrap();
        let g = project(&c, View::Front, Resolution::square(4)).unwrap();
        assert_eq!(g.values().iter().cloned().fold(0.0, f64::max), MIN_OCCUPIED);
    }

    #[test]
    fn top_edge_goes_to_last_cell() {
        assert_eq!(cell_index(1.0, 4), 3);
        assert_eq!(cell_index(-1.0, 4), 0);
        assert_eq!(cell_index(0.4999, 4), 2);
        assert_eq!(cell_index(0.5, 4), 3);
        assert_eq!(cell_index_unclamped(1.0, 4), 3);
        assert_eq!(cell_index_unclamped(1.4, 4), 4);
        assert_eq!(cell_index_unclamped(-1.2, 4), -1);
    }

    #[test]
    fn errors() {
        let empty = PointCloud::new(vec![]).unwrap();
        assert!(matches!(
            project(&empty, View::Top, Resolution::square(8)),
            Err(Error::EmptyCloud)
        ));
        assert!(matches!(
            project_all(&empty, Resolution::square(8)),
            Err(Error::EmptyCloud)
        ));
        let c = PointCloud::from_xyz(&[[0.0, 0.0, 0.0]]).unwrap();
        assert!(matches!(
            project(&c, View::Top, Resolution { width: 3, height: 8 }),
            Err(Error::BadResolution { .. })
        ));
    }

    #[test]
    fn project_all_order() {
        let c = PointCloud::from_xyz(&[[0.1, 0.2, 0.3]]).unwrap();
        let views = project_all(&c, Resolution::square(8)).unwrap();
        assert_eq!(views.map(|g| g.view()), [View::Front, View::Top, View::Right]);
    }

    #[test]
    fn exports() {
        let g = ViewGrid::new(View::Top, Resolution::square(4), {
            let mut v = vec![0.0; 16];
            v[5] = 1.0;
            v[6] = 0.5;
            v
        })
        .unwrap();
        let csv = g.to_csv();
        assert_eq!(csv.lines().count(), 4);
        assert_eq!(csv.lines().nth(1).unwrap(), "0,1,0.5,0");
        let pgm = g.to_pgm();
        assert!(pgm.starts_with(b"P5\n4 4\n255\n"));
        let pixels = &pgm[pgm.len() - 16..];
        assert_eq!(pixels[5], 255);
        assert_eq!(pixels[6], 128);
    }

    #[test]
    fn window_pads_with_zero() {
        let g = ViewGrid::filled(View::Front, Resolution::square(4), 0.5).unwrap();
        let w = g.window(-2, -2, 4);
        assert_eq!(w.values().iter().filter(|v| **v == 0.5).count(), 4);
    }
}
