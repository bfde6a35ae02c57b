//! Uniform square grids and boolean domain masks.
//!
//! Cell `(ix, iy)` has linear index `iy * n + ix` and covers
//! `[x0 + ix h, x0 + (ix+1) h) x [y0 + iy h, y0 + (iy+1) h)`.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// An `n x n` grid of square cells with side `h`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub origin: [f64; 2],
    pub h: f64,
    pub n: usize,
}

impl Grid {
    pub fn new(origin: [f64; 2], side: f64, n: usize) -> Result<Self> {
        if n == 0 || !(side > 0.0) || !side.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "grid needs n >= 1 and a positive side, got n = {n}, side = {side}"
            )));
        }
        Ok(Self {
            origin,
            h: side / n as f64,
            n,
        })
    }

    pub fn unit(n: usize) -> Result<Self> {
        Self::new([0.0, 0.0], 1.0, n)
    }

    pub fn side(&self) -> f64 {
        self.h * self.n as f64
    }

    pub fn cell_area(&self) -> f64 {
        self.h * self.h
    }

    pub fn num_cells(&self) -> usize {
        self.n * self.n
    }

    pub fn index(&self, ix: usize, iy: usize) -> usize {
        iy * self.n + ix
    }

    pub fn coords(&self, cell: usize) -> (usize, usize) {
        (cell % self.n, cell / self.n)
    }

    pub fn center(&self, cell: usize) -> [f64; 2] {
        let (ix, iy) = self.coords(cell);
        [
            self.origin[0] + (ix as f64 + 0.5) * self.h,
            self.origin[1] + (iy as f64 + 0.5) * self.h,
        ]
    }

    /// The four edge neighbours of `cell`; `None` past the grid border.
    pub fn neighbors(&self, cell: usize) -> [Option<usize>; 4] {
        let (ix, iy) = self.coords(cell);
        let n = self.n;
        [
            (ix > 0).then(|| cell - 1),
            (ix + 1 < n).then(|| cell + 1),
            (iy > 0).then(|| cell - n),
            (iy + 1 < n).then(|| cell + n),
        ]
    }

    /// Range of cell columns (or rows) whose closed extent meets the open
    /// interval `(lo, hi)` along axis `axis`.
    pub fn span(&self, axis: usize, lo: f64, hi: f64) -> std::ops::Range<usize> {
        if !(lo < hi) {
            return 0..0;
        }
        let o = self.origin[axis];
        let a = ((lo - o) / self.h).floor().max(0.0);
        let b = ((hi - o) / self.h).ceil().min(self.n as f64);
        if !(a < b) {
            return 0..0;
        }
        a as usize..b as usize
    }
}

/// Indicator of an open set inside the bounding square of a [`Grid`].
#[derive(Debug, Clone, PartialEq)]
pub struct DomainMask {
    grid: Grid,
    inside: Vec<bool>,
    /// Inside cells in increasing index order.
    cells: Vec<usize>,
}

/// Built-in mask shapes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MaskPreset {
    Square,
    Disk,
    Annulus,
    LShape,
    TwoSquares,
}

impl MaskPreset {
    pub const ALL: [MaskPreset; 5] = [
        MaskPreset::Square,
        MaskPreset::Disk,
        MaskPreset::Annulus,
        MaskPreset::LShape,
        MaskPreset::TwoSquares,
    ];

    pub fn name(self) -> &'static str {
        match self {
            MaskPreset::Square => "square",
            MaskPreset::Disk => "disk",
            MaskPreset::Annulus => "annulus",
            MaskPreset::LShape => "l-shape",
            MaskPreset::TwoSquares => "two-squares",
        }
    }

    pub fn parse(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|p| p.name() == name)
    }

    /// Whether the point `(x, y)` of the unit square lies in the shape.
    fn contains(self, x: f64, y: f64) -> bool {
        let r2 = (x - 0.5).powi(2) + (y - 0.5).powi(2);
        match self {
            MaskPreset::Square => (0.0..1.0).contains(&x) && (0.0..1.0).contains(&y),
            MaskPreset::Disk => r2 < 0.25,
            MaskPreset::Annulus => (0.0625..0.25).contains(&r2),
            MaskPreset::LShape => !(x > 0.5 && y > 0.5),
            MaskPreset::TwoSquares => {
                let a = (0.05..0.45).contains(&x) && (0.05..0.45).contains(&y);
                let b = (0.55..0.95).contains(&x) && (0.55..0.95).contains(&y);
                a || b
            }
        }
    }
}

impl DomainMask {
    pub fn new(grid: Grid, inside: Vec<bool>) -> Result<Self> {
        if inside.len() != grid.num_cells() {
            return Err(Error::ShapeMismatch {
                expected: grid.num_cells(),
                got: inside.len(),
            });
        }
        let cells: Vec<usize> = (0..inside.len()).filter(|&c| inside[c]).collect();
        if cells.is_empty() {
            return Err(Error::EmptySupport);
        }
        Ok(Self {
            grid,
            inside,
            cells,
        })
    }

    /// Cells of an `n x n` grid on the unit square whose centres lie in the preset shape.
    pub fn preset(preset: MaskPreset, n: usize) -> Result<Self> {
        Self::preset_with_side(preset, n, 1.0)
    }

    /// As [`DomainMask::preset`], scaled to a bounding square of the given side.
    pub fn preset_with_side(preset: MaskPreset, n: usize, side: f64) -> Result<Self> {
        let grid = Grid::new([0.0, 0.0], side, n)?;
        let unit = Grid::unit(n)?;
        let inside = (0..grid.num_cells())
            .map(|c| {
                let [x, y] = unit.center(c);
                preset.contains(x, y)
            })
            .collect();
        Self::new(grid, inside)
    }

    pub fn from_fn(grid: Grid, f: impl Fn(f64, f64) -> bool) -> Result<Self> {
        let inside = (0..grid.num_cells())
            .map(|c| {
                let [x, y] = grid.center(c);
                f(x, y)
            })
            .collect();
        Self::new(grid, inside)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn n(&self) -> usize {
        self.grid.n
    }

    pub fn h(&self) -> f64 {
        self.grid.h
    }

    pub fn is_inside(&self, cell: usize) -> bool {
        self.inside[cell]
    }

    pub fn inside(&self) -> &[bool] {
        &self.inside
    }

    /// Inside cells in increasing index order.
    pub fn cells(&self) -> &[usize] {
        &self.cells
    }

    pub fn num_inside(&self) -> usize {
        self.cells.len()
    }

    /// `h^2` times the number of inside cells.
    pub fn measure(&self) -> f64 {
        self.grid.cell_area() * self.cells.len() as f64
    }

    /// Inside cells with at least one edge neighbour outside the mask (or
    /// past the grid border).
    pub fn touches_boundary(&self, cell: usize) -> bool {
        self.grid
            .neighbors(cell)
            .iter()
            .any(|nb| !nb.is_some_and(|c| self.inside[c]))
    }

    /// Whether every inside cell of `self` is inside `other` on the same grid.
    pub fn is_subset_of(&self, other: &DomainMask) -> bool {
        self.grid == other.grid && self.cells.iter().all(|&c| other.inside[c])
    }

    /// Position of each inside cell in [`DomainMask::cells`], `usize::MAX` outside.
    pub fn dof_map(&self) -> Vec<usize> {
        let mut map = vec![usize::MAX; self.inside.len()];
        for (k, &c) in self.cells.iter().enumerate() {
            map[c] = k;
        }
        map
    }

    /// ASCII PGM (P2) with `1` inside, `0` outside. Row `iy` is line `iy`.
    pub fn to_pgm(&self) -> String {
        let n = self.grid.n;
        let mut out = format!("P2\n{n} {n}\n1\n");
        for iy in 0..n {
            let row: Vec<&str> = (0..n)
                .map(|ix| if self.inside[self.grid.index(ix, iy)] { "1" } else { "0" })
                .collect();
            let _ = writeln!(out, "{}", row.join(" "));
        }
        out
    }

    /// Parse an ASCII PGM (P2). Any value `> 0` is inside. Non-square images
    /// are padded with outside cells to the enclosing square.
    pub fn from_pgm(text: &str, side: Option<f64>, source_name: &str) -> Result<Self> {
        let err = |line: usize, msg: &str| Error::Parse {
            source_name: source_name.to_string(),
            line,
            msg: msg.to_string(),
        };
        let mut tokens = Vec::new();
        for (ln, line) in text.lines().enumerate() {
            let data = line.split('#').next().unwrap_or("");
            tokens.extend(data.split_whitespace().map(|t| (ln + 1, t)));
        }
        let mut it = tokens.into_iter();
        match it.next() {
            Some((_, "P2")) => {}
            Some((ln, _)) => return Err(err(ln, "expected magic number P2")),
            None => return Err(err(1, "empty file")),
        }
        let mut header = [0usize; 3];
        for slot in header.iter_mut() {
            let (ln, t) = it.next().ok_or_else(|| err(text.lines().count(), "truncated header"))?;
            *slot = t.parse().map_err(|_| err(ln, &format!("bad header value '{t}'")))?;
        }
        let [w, h, _maxval] = header;
        if w == 0 || h == 0 {
            return Err(err(1, "zero image dimension"));
        }
        let mut rows = vec![vec![false; w]; h];
        for r in 0..h {
            for c in 0..w {
                let (ln, t) = it
                    .next()
                    .ok_or_else(|| err(text.lines().count(), "fewer pixels than declared"))?;
                let v: i64 = t.parse().map_err(|_| err(ln, &format!("bad pixel value '{t}'")))?;
                rows[r][c] = v > 0;
            }
        }
        if let Some((ln, _)) = it.next() {
            return Err(err(ln, "more pixels than declared"));
        }
        Self::from_rows(rows, side)
    }

    /// Parse rows of comma-separated `0`/`1` values.
    pub fn from_csv(text: &str, side: Option<f64>, source_name: &str) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(false)
            .flexible(true)
            .trim(csv::Trim::All)
            .from_reader(text.as_bytes());
        let mut rows = Vec::new();
        for (i, rec) in reader.records().enumerate() {
            let rec = rec?;
            let line = rec.position().map_or(i + 1, |p| p.line() as usize);
            let row = rec
                .iter()
                .map(|t| match t {
                    "0" => Ok(false),
                    "1" => Ok(true),
                    other => Err(Error::Parse {
                        source_name: source_name.to_string(),
                        line,
                        msg: format!("expected 0 or 1, got '{other}'"),
                    }),
                })
                .collect::<Result<Vec<_>>>()?;
            rows.push(row);
        }
        if rows.is_empty() {
            return Err(Error::Parse {
                source_name: source_name.to_string(),
                line: 1,
                msg: "empty file".into(),
            });
        }
        let w = rows[0].len();
        if let Some(i) = rows.iter().position(|r| r.len() != w) {
            return Err(Error::Parse {
                source_name: source_name.to_string(),
                line: i + 1,
                msg: format!("row has {} entries, expected {w}", rows[i].len()),
            });
        }
        Self::from_rows(rows, side)
    }

    fn from_rows(rows: Vec<Vec<bool>>, side: Option<f64>) -> Result<Self> {
        let n = rows.len().max(rows[0].len());
        let grid = Grid::new([0.0, 0.0], side.unwrap_or(1.0), n)?;
        let mut inside = vec![false; n * n];
        for (iy, row) in rows.iter().enumerate() {
            for (ix, &v) in row.iter().enumerate() {
                inside[grid.index(ix, iy)] = v;
            }
        }
        Self::new(grid, inside)
    }

    /// Load a mask from a `.pgm` or `.csv` file.
    pub fn load(path: &Path, side: Option<f64>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let name = path.display().to_string();
        match path.extension().and_then(|e| e.to_str()) {
            Some("csv") => Self::from_csv(&text, side, &name),
            _ => Self::from_pgm(&text, side, &name),
        }
    }
}
