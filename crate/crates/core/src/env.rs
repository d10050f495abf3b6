//! Occupancy-grid workspace.
//!
//! Cells are addressed by [`VertexId`] (row-major index). The physical
//! position of a cell is its center, `(col, row) * cell_size`, so a cell
//! covers `[c - 0.5, c + 0.5)` in cell units along each axis.

use std::ops::{Add, Deref, Mul, Sub};
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum MapError {
    #[error("line {line}: malformed header: {reason}")]
    MalformedHeader { line: usize, reason: String },
    #[error("line {line}: expected {expected} cells, found {found}")]
    RowLength { line: usize, expected: usize, found: usize },
    #[error("line {line}: unknown glyph {glyph:?}")]
    UnknownGlyph { line: usize, glyph: char },
    #[error("line {line}: expected {expected} map rows, found {found}")]
    RowCount { line: usize, expected: usize, found: usize },
    #[error("invalid dimensions {width}x{height}")]
    InvalidDimensions { width: usize, height: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct VertexId(pub u32);

impl VertexId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const ZERO: Point2 = Point2 { x: 0.0, y: 0.0 };

    pub fn new(x: f64, y: f64) -> Self {
        Point2 { x, y }
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn distance(self, other: Point2) -> f64 {
        (self - other).norm()
    }
}

impl Add for Point2 {
    type Output = Point2;
    fn add(self, rhs: Point2) -> Point2 {
        Point2::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl Sub for Point2 {
    type Output = Point2;
    fn sub(self, rhs: Point2) -> Point2 {
        Point2::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl Mul<f64> for Point2 {
    type Output = Point2;
    fn mul(self, rhs: f64) -> Point2 {
        Point2::new(self.x * rhs, self.y * rhs)
    }
}

/// Up to eight neighbors, stored inline.
#[derive(Debug, Clone, Copy)]
pub struct Neighborhood {
    cells: [VertexId; 8],
    len: usize,
}

impl Deref for Neighborhood {
    type Target = [VertexId];
    fn deref(&self) -> &[VertexId] {
        &self.cells[..self.len]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridMap {
    width: usize,
    height: usize,
    blocked: Vec<bool>,
    cell_size: f64,
}

const OFFSETS: [(i64, i64); 8] = [(-1, -1), (0, -1), (1, -1), (-1, 0), (1, 0), (-1, 1), (0, 1), (1, 1)];

impl GridMap {
    pub fn new(width: usize, height: usize, blocked: Vec<bool>) -> Result<Self, MapError> {
        if width == 0 || height == 0 || blocked.len() != width * height {
            return Err(MapError::InvalidDimensions { width, height });
        }
        Ok(GridMap {
            width,
            height,
            blocked,
            cell_size: 1.0,
        })
    }

    /// Obstacle-free map.
    pub fn open(width: usize, height: usize) -> Self {
        GridMap::new(width, height, vec![false; width * height]).expect("nonzero dimensions")
    }

    /// Builds a map from glyph rows (same glyph table as `.map` files).
    pub fn from_rows(rows: &[&str]) -> Result<Self, MapError> {
        let height = rows.len();
        let width = rows.first().map_or(0, |r| r.chars().count());
        let mut blocked = Vec::with_capacity(width * height);
        for (k, row) in rows.iter().enumerate() {
            parse_row(row, width, k + 1, &mut blocked)?;
        }
        GridMap::new(width, height, blocked)
    }

    pub fn with_cell_size(mut self, cell_size: f64) -> Self {
        assert!(cell_size > 0.0, "cell size must be positive");
        self.cell_size = cell_size;
        self
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn cell_size(&self) -> f64 {
        self.cell_size
    }

    /// Number of cells, free or not.
    pub fn len(&self) -> usize {
        self.blocked.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocked.is_empty()
    }

    pub fn vertex(&self, col: usize, row: usize) -> Option<VertexId> {
        (col < self.width && row < self.height).then(|| VertexId((row * self.width + col) as u32))
    }

    pub fn coords(&self, v: VertexId) -> (usize, usize) {
        (v.index() % self.width, v.index() / self.width)
    }

    pub fn is_free(&self, v: VertexId) -> bool {
        !self.blocked[v.index()]
    }

    /// Out-of-bounds cells count as blocked.
    pub fn is_blocked_at(&self, col: i64, row: i64) -> bool {
        if col < 0 || row < 0 || col >= self.width as i64 || row >= self.height as i64 {
            return true;
        }
        self.blocked[row as usize * self.width + col as usize]
    }

    pub fn free_vertices(&self) -> impl Iterator<Item = VertexId> + '_ {
        self.blocked
            .iter()
            .enumerate()
            .filter(|(_, b)| !**b)
            .map(|(k, _)| VertexId(k as u32))
    }

    pub fn free_count(&self) -> usize {
        self.blocked.iter().filter(|b| !**b).count()
    }

    pub fn position(&self, v: VertexId) -> Point2 {
        let (c, r) = self.coords(v);
        Point2::new(c as f64 * self.cell_size, r as f64 * self.cell_size)
    }

    /// Cell whose square contains `p`, if in bounds.
    pub fn cell_containing(&self, p: Point2) -> Option<VertexId> {
        let (c, r) = self.cell_index_of(p);
        if c < 0 || r < 0 {
            return None;
        }
        self.vertex(c as usize, r as usize)
    }

    fn cell_index_of(&self, p: Point2) -> (i64, i64) {
        let c = (p.x / self.cell_size + 0.5).floor() as i64;
        let r = (p.y / self.cell_size + 0.5).floor() as i64;
        (c, r)
    }

    pub fn euclidean(&self, a: VertexId, b: VertexId) -> f64 {
        self.position(a).distance(self.position(b))
    }

    pub fn diagonal(&self) -> f64 {
        (self.width as f64).hypot(self.height as f64) * self.cell_size
    }

    /// Free 8-connected neighbors. Diagonal moves need both orthogonal cells free.
    pub fn neighbors8(&self, v: VertexId) -> Neighborhood {
        let (c, r) = self.coords(v);
        let (c, r) = (c as i64, r as i64);
        let mut out = Neighborhood {
            cells: [VertexId(0); 8],
            len: 0,
        };
        for &(dc, dr) in &OFFSETS {
            let (nc, nr) = (c + dc, r + dr);
            if self.is_blocked_at(nc, nr) {
                continue;
            }
            if dc != 0 && dr != 0 && (self.is_blocked_at(c + dc, r) || self.is_blocked_at(c, r + dr)) {
                continue;
            }
            out.cells[out.len] = VertexId((nr as usize * self.width + nc as usize) as u32);
            out.len += 1;
        }
        out
    }

    /// True if any of the eight surrounding cells is an obstacle or off the map.
    pub fn near_obstacle(&self, v: VertexId) -> bool {
        let (c, r) = self.coords(v);
        OFFSETS
            .iter()
            .any(|&(dc, dr)| self.is_blocked_at(c as i64 + dc, r as i64 + dr))
    }

    /// Supercover visibility between two cell centers: every cell the segment
    /// touches, including both side cells at exact corner crossings, must be free.
    pub fn line_of_sight(&self, a: VertexId, b: VertexId) -> bool {
        let (x0, y0) = self.coords(a);
        let (x1, y1) = self.coords(b);
        let (mut x, mut y) = (x0 as i64, y0 as i64);
        let (dx, dy) = (x1 as i64 - x, y1 as i64 - y);
        let (nx, ny) = (dx.abs(), dy.abs());
        let (sx, sy) = (dx.signum(), dy.signum());
        if self.is_blocked_at(x, y) {
            return false;
        }
        let (mut ix, mut iy) = (0i64, 0i64);
        while ix < nx || iy < ny {
            let decision = (1 + 2 * ix) * ny - (1 + 2 * iy) * nx;
            if decision == 0 {
                if self.is_blocked_at(x + sx, y) || self.is_blocked_at(x, y + sy) {
                    return false;
                }
                x += sx;
                y += sy;
                ix += 1;
                iy += 1;
            } else if decision < 0 {
                x += sx;
                ix += 1;
            } else {
                y += sy;
                iy += 1;
            }
            if self.is_blocked_at(x, y) {
                return false;
            }
        }
        true
    }

    /// Splits the segment `p -> q` at every cell boundary and calls `visit`
    /// with each piece's length and the cell holding its midpoint.
    fn for_each_piece(&self, p: Point2, q: Point2, mut visit: impl FnMut(f64, i64, i64)) {
        let cs = self.cell_size;
        let (u0, u1) = (p * (1.0 / cs), q * (1.0 / cs));
        let length = p.distance(q);
        if length == 0.0 {
            return;
        }
        let mut ts = vec![0.0, 1.0];
        push_crossings(u0.x, u1.x, &mut ts);
        push_crossings(u0.y, u1.y, &mut ts);
        ts.sort_by(f64::total_cmp);
        for w in ts.windows(2) {
            let (ta, tb) = (w[0], w[1]);
            if tb <= ta {
                continue;
            }
            let tm = 0.5 * (ta + tb);
            let mid = u0 + (u1 - u0) * tm;
            let c = (mid.x + 0.5).floor() as i64;
            let r = (mid.y + 0.5).floor() as i64;
            visit(length * (tb - ta), c, r);
        }
    }

    /// Line integral of the absorption density along `p -> q`: 1 in free
    /// space, `rho_obs` inside obstacles (and off the map).
    pub fn segment_signal_distance(&self, p: Point2, q: Point2, rho_obs: f64) -> f64 {
        let mut total = 0.0;
        self.for_each_piece(p, q, |len, c, r| {
            total += if self.is_blocked_at(c, r) { len * rho_obs } else { len };
        });
        total
    }

    pub fn effective_signal_distance(&self, a: VertexId, b: VertexId, rho_obs: f64) -> f64 {
        self.segment_signal_distance(self.position(a), self.position(b), rho_obs)
    }

    /// True if no piece of positive length of `p -> q` lies in an obstacle
    /// and both endpoints are in free cells.
    pub fn segment_is_free(&self, p: Point2, q: Point2) -> bool {
        let endpoint_free = |pt: Point2| {
            let (c, r) = self.cell_index_of(pt);
            !self.is_blocked_at(c, r)
        };
        if !endpoint_free(p) || !endpoint_free(q) {
            return false;
        }
        let mut free = true;
        self.for_each_piece(p, q, |_, c, r| {
            if self.is_blocked_at(c, r) {
                free = false;
            }
        });
        free
    }
}

/// Parameters in (0, 1) where the coordinate crosses a half-integer boundary.
fn push_crossings(a: f64, b: f64, ts: &mut Vec<f64>) {
    if a == b {
        return;
    }
    let (lo, hi) = if a < b { (a, b) } else { (b, a) };
    // Smallest half-integer strictly above `lo`.
    let mut boundary = (lo - 0.5).floor() + 1.5;
    while boundary < hi {
        let t = (boundary - a) / (b - a);
        if t > 0.0 && t < 1.0 {
            ts.push(t);
        }
        boundary += 1.0;
    }
}

fn parse_row(row: &str, width: usize, line: usize, out: &mut Vec<bool>) -> Result<(), MapError> {
    let found = row.chars().count();
    if found != width {
        return Err(MapError::RowLength {
            line,
            expected: width,
            found,
        });
    }
    for glyph in row.chars() {
        let blocked = match glyph {
            '.' | 'G' => false,
            '@' | 'O' | 'T' | 'S' | 'W' => true,
            other => return Err(MapError::UnknownGlyph { line, glyph: other }),
        };
        out.push(blocked);
    }
    Ok(())
}

/// Parses a MovingAI `.map` file.
pub fn load_map(text: &str) -> Result<GridMap, MapError> {
    let mut lines = text.lines().enumerate().map(|(k, l)| (k + 1, l.trim_end()));
    let mut width = None;
    let mut height = None;
    let mut saw_type = false;
    let mut map_line = 0;
    for (line, content) in lines.by_ref() {
        if content.is_empty() {
            continue;
        }
        let mut parts = content.split_whitespace();
        let key = parts.next().unwrap_or_default();
        let value = parts.next();
        let malformed = |reason: &str| MapError::MalformedHeader {
            line,
            reason: reason.to_string(),
        };
        match key {
            "type" => {
                if value != Some("octile") {
                    return Err(malformed("expected `type octile`"));
                }
                saw_type = true;
            }
            "height" | "width" => {
                let n: usize = value
                    .and_then(|v| v.parse().ok())
                    .filter(|n| *n > 0)
                    .ok_or_else(|| malformed(&format!("`{key}` needs a positive integer")))?;
                if key == "height" {
                    height = Some(n);
                } else {
                    width = Some(n);
                }
            }
            "map" => {
                map_line = line;
                break;
            }
            _ => return Err(malformed(&format!("unexpected header line {content:?}"))),
        }
    }
    let header_err = |reason: &str| MapError::MalformedHeader {
        line: map_line.max(1),
        reason: reason.to_string(),
    };
    if map_line == 0 {
        return Err(header_err("missing `map` line"));
    }
    if !saw_type {
        return Err(header_err("missing `type` line"));
    }
    let width = width.ok_or_else(|| header_err("missing `width`"))?;
    let height = height.ok_or_else(|| header_err("missing `height`"))?;

    let mut blocked = Vec::with_capacity(width * height);
    let mut rows = 0;
    let mut last_line = map_line;
    for (line, content) in lines {
        if rows == height {
            if content.is_empty() {
                continue;
            }
            return Err(MapError::RowCount {
                line,
                expected: height,
                found: rows + 1,
            });
        }
        parse_row(content, width, line, &mut blocked)?;
        rows += 1;
        last_line = line;
    }
    if rows != height {
        return Err(MapError::RowCount {
            line: last_line,
            expected: height,
            found: rows,
        });
    }
    GridMap::new(width, height, blocked)
}

/// Lazily computed rows of effective signal distance from each sensor cell
/// to every cell, shared by all episodes on one map.
#[derive(Debug)]
pub struct SignalDistanceTable {
    rho_obs: f64,
    rows: Vec<OnceLock<Box<[f64]>>>,
}

impl SignalDistanceTable {
    pub fn new(map: &GridMap, rho_obs: f64) -> Self {
        SignalDistanceTable {
            rho_obs,
            rows: (0..map.len()).map(|_| OnceLock::new()).collect(),
        }
    }

    pub fn rho_obs(&self) -> f64 {
        self.rho_obs
    }

    /// Distances from `sensor` to every cell (obstacle cells included).
    pub fn row(&self, map: &GridMap, sensor: VertexId) -> &[f64] {
        self.rows[sensor.index()].get_or_init(|| {
            let origin = map.position(sensor);
            (0..map.len())
                .map(|k| map.segment_signal_distance(origin, map.position(VertexId(k as u32)), self.rho_obs))
                .collect()
        })
    }
}
