//! TSPLIB instance parsing and the integer distance oracle.
//!
//! Supported edge weights are `EUC_2D`, `ATT` and `EXPLICIT` (with
//! `FULL_MATRIX`, `UPPER_ROW` or `LOWER_DIAG_ROW` storage). Every instance is
//! symmetric; explicit triangles are mirrored into a full matrix on load.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tour lengths and edge weights are integral under TSPLIB conventions.
pub type Length = u64;

/// Known optimal tour lengths, one `name optimum` pair per line.
const OPTIMA_REGISTRY: &str = include_str!("../data/optima.txt");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EdgeWeightKind {
    #[serde(rename = "EUC_2D")]
    Euc2d,
    #[serde(rename = "ATT")]
    Att,
    #[serde(rename = "EXPLICIT")]
    Explicit,
}

impl fmt::Display for EdgeWeightKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EdgeWeightKind::Euc2d => "EUC_2D",
            EdgeWeightKind::Att => "ATT",
            EdgeWeightKind::Explicit => "EXPLICIT",
        })
    }
}

impl FromStr for EdgeWeightKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "EUC_2D" => Ok(EdgeWeightKind::Euc2d),
            "ATT" => Ok(EdgeWeightKind::Att),
            "EXPLICIT" => Ok(EdgeWeightKind::Explicit),
            other => Err(Error::Unsupported {
                field: "EDGE_WEIGHT_TYPE",
                value: other.to_string(),
            }),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum MatrixFormat {
    FullMatrix,
    UpperRow,
    LowerDiagRow,
}

impl MatrixFormat {
    fn parse(s: &str, line: usize) -> Result<Self> {
        match s {
            "FULL_MATRIX" => Ok(MatrixFormat::FullMatrix),
            "UPPER_ROW" => Ok(MatrixFormat::UpperRow),
            "LOWER_DIAG_ROW" => Ok(MatrixFormat::LowerDiagRow),
            other => Err(Error::parse(
                line,
                format!("unsupported EDGE_WEIGHT_FORMAT: {other}"),
            )),
        }
    }

    fn entry_count(self, n: usize) -> usize {
        match self {
            MatrixFormat::FullMatrix => n * n,
            MatrixFormat::UpperRow => n * (n - 1) / 2,
            MatrixFormat::LowerDiagRow => n * (n + 1) / 2,
        }
    }
}

/// An immutable symmetric TSP instance with a materialized distance matrix.
#[derive(Debug, Clone)]
pub struct Instance {
    name: String,
    kind: EdgeWeightKind,
    coords: Option<Vec<(f64, f64)>>,
    dist: Vec<Length>,
    n: usize,
    optimum: Option<Length>,
}

impl Instance {
    /// Builds a coordinate instance. `kind` must be `Euc2d` or `Att`.
    pub fn from_coords(
        name: impl Into<String>,
        kind: EdgeWeightKind,
        coords: Vec<(f64, f64)>,
    ) -> Result<Self> {
        if kind == EdgeWeightKind::Explicit {
            return Err(Error::Config(
                "coordinate instances need EUC_2D or ATT weights".into(),
            ));
        }
        let n = coords.len();
        let mut dist = vec![0; n * n];
        for i in 0..n {
            for j in (i + 1)..n {
                let d = match kind {
                    EdgeWeightKind::Euc2d => euc_2d(coords[i], coords[j]),
                    EdgeWeightKind::Att => att(coords[i], coords[j]),
                    EdgeWeightKind::Explicit => unreachable!(),
                };
                dist[i * n + j] = d;
                dist[j * n + i] = d;
            }
        }
        Self::finish(name.into(), kind, Some(coords), dist, n)
    }

    /// Builds an explicit instance from a full square matrix.
    ///
    /// Only the upper triangle is read; it is mirrored to the lower one.
    pub fn from_matrix(name: impl Into<String>, matrix: &[Vec<Length>]) -> Result<Self> {
        let n = matrix.len();
        if let Some(row) = matrix.iter().find(|row| row.len() != n) {
            return Err(Error::DimensionMismatch {
                line: 0,
                declared: n,
                found: row.len(),
            });
        }
        let mut dist = vec![0; n * n];
        for i in 0..n {
            for j in (i + 1)..n {
                dist[i * n + j] = matrix[i][j];
                dist[j * n + i] = matrix[i][j];
            }
        }
        Self::finish(name.into(), EdgeWeightKind::Explicit, None, dist, n)
    }

    fn finish(
        name: String,
        kind: EdgeWeightKind,
        coords: Option<Vec<(f64, f64)>>,
        dist: Vec<Length>,
        n: usize,
    ) -> Result<Self> {
        if n < 3 {
            return Err(Error::Config(format!(
                "an instance needs at least 3 cities, got {n}"
            )));
        }
        for i in 0..n {
            for j in (i + 1)..n {
                if dist[i * n + j] == 0 {
                    return Err(Error::ZeroDistance(i, j));
                }
            }
        }
        let optimum = registry_optimum(&name);
        Ok(Instance {
            name,
            kind,
            coords,
            dist,
            n,
            optimum,
        })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        parse_instance(&text)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dimension(&self) -> usize {
        self.n
    }

    pub fn edge_weight_kind(&self) -> EdgeWeightKind {
        self.kind
    }

    pub fn coords(&self) -> Option<&[(f64, f64)]> {
        self.coords.as_deref()
    }

    pub fn optimum(&self) -> Option<Length> {
        self.optimum
    }

    /// Overrides the registry optimum, e.g. for instances outside the registry.
    pub fn with_optimum(mut self, optimum: Option<Length>) -> Self {
        self.optimum = optimum;
        self
    }

    /// Checked distance lookup.
    pub fn distance(&self, i: usize, j: usize) -> Result<Length> {
        for index in [i, j] {
            if index >= self.n {
                return Err(Error::CityOutOfRange {
                    index,
                    dimension: self.n,
                });
            }
        }
        Ok(self.dist[i * self.n + j])
    }

    /// Unchecked distance lookup for hot loops; panics on out-of-range indices.
    #[inline]
    pub fn weight(&self, i: usize, j: usize) -> Length {
        self.dist[i * self.n + j]
    }

    /// Closed tour length of `perm`, validating that it is a permutation.
    pub fn tour_length(&self, perm: &[usize]) -> Result<Length> {
        self.check_permutation(perm)?;
        Ok(self.closed_length(perm))
    }

    /// Closed tour length without validating `perm`.
    pub(crate) fn closed_length(&self, perm: &[usize]) -> Length {
        let n = perm.len();
        (0..n).map(|k| self.weight(perm[k], perm[(k + 1) % n])).sum()
    }

    pub fn check_permutation(&self, perm: &[usize]) -> Result<()> {
        if perm.len() != self.n {
            return Err(Error::NotAPermutation(format!(
                "expected {} cities, got {}",
                self.n,
                perm.len()
            )));
        }
        let mut seen = vec![false; self.n];
        for &city in perm {
            if city >= self.n {
                return Err(Error::CityOutOfRange {
                    index: city,
                    dimension: self.n,
                });
            }
            if std::mem::replace(&mut seen[city], true) {
                return Err(Error::NotAPermutation(format!("city {city} repeated")));
            }
        }
        Ok(())
    }

    /// Renders the instance as an `EXPLICIT`/`FULL_MATRIX` TSPLIB file.
    pub fn to_full_matrix_tsplib(&self) -> String {
        let mut out = format!(
            "NAME: {}\nTYPE: TSP\nDIMENSION: {}\nEDGE_WEIGHT_TYPE: EXPLICIT\nEDGE_WEIGHT_FORMAT: FULL_MATRIX\nEDGE_WEIGHT_SECTION\n",
            self.name, self.n
        );
        for i in 0..self.n {
            let row: Vec<String> = (0..self.n).map(|j| self.weight(i, j).to_string()).collect();
            out.push_str(&row.join(" "));
            out.push('\n');
        }
        out.push_str("EOF\n");
        out
    }
}

/// TSPLIB `nint`.
fn nint(x: f64) -> Length {
    (x + 0.5).floor() as Length
}

fn euc_2d(a: (f64, f64), b: (f64, f64)) -> Length {
    nint((a.0 - b.0).hypot(a.1 - b.1))
}

/// TSPLIB pseudo-Euclidean distance.
fn att(a: (f64, f64), b: (f64, f64)) -> Length {
    let dx = a.0 - b.0;
    let dy = a.1 - b.1;
    let r = ((dx * dx + dy * dy) / 10.0).sqrt();
    let t = nint(r);
    if (t as f64) < r {
        t + 1
    } else {
        t
    }
}

const BUNDLED: [(&str, &str); 4] = [
    ("bays29", include_str!("../data/bays29.tsp")),
    ("att48", include_str!("../data/att48.tsp")),
    ("eil51", include_str!("../data/eil51.tsp")),
    ("st70", include_str!("../data/st70.tsp")),
];

/// Names of the instances compiled into the library.
pub fn bundled_names() -> impl Iterator<Item = &'static str> {
    BUNDLED.iter().map(|(name, _)| *name)
}

/// Parses a bundled instance by name, with or without a `.tsp` suffix.
pub fn bundled(name: &str) -> Option<Instance> {
    let name = name.strip_suffix(".tsp").unwrap_or(name);
    BUNDLED
        .iter()
        .find(|(n, _)| n.eq_ignore_ascii_case(name))
        .map(|(_, text)| parse_instance(text).expect("bundled instances parse"))
}

/// Loads `spec` as a file path, falling back to a bundled instance of that name.
pub fn resolve(spec: &str) -> Result<Instance> {
    let path = Path::new(spec);
    if path.exists() {
        return Instance::load(path);
    }
    let stem = path.file_name().and_then(|s| s.to_str()).unwrap_or(spec);
    bundled(stem).ok_or_else(|| {
        Error::io(
            path,
            std::io::Error::new(std::io::ErrorKind::NotFound, "no such file or bundled instance"),
        )
    })
}

/// Looks up a known optimum by instance name (case-insensitive).
pub fn registry_optimum(name: &str) -> Option<Length> {
    registry_entries()
        .find(|(entry, _)| entry.eq_ignore_ascii_case(name))
        .map(|(_, opt)| opt)
}

/// All `(name, optimum)` pairs of the bundled registry.
pub fn registry_entries() -> impl Iterator<Item = (&'static str, Length)> {
    OPTIMA_REGISTRY.lines().filter_map(|line| {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            return None;
        }
        let mut parts = line.split_whitespace();
        let name = parts.next()?;
        let opt = parts.next()?.parse().ok()?;
        Some((name, opt))
    })
}

#[derive(Clone, Copy, PartialEq)]
enum Section {
    Header,
    Coords,
    Weights,
    Skip,
}

/// Parses TSPLIB text into an [`Instance`].
pub fn parse_instance(text: &str) -> Result<Instance> {
    let mut name = String::new();
    let mut dimension: Option<usize> = None;
    let mut kind: Option<EdgeWeightKind> = None;
    let mut format: Option<MatrixFormat> = None;
    let mut coords: Vec<Option<(f64, f64)>> = Vec::new();
    let mut coord_lines = 0usize;
    let mut weights: Vec<Length> = Vec::new();
    let mut section = Section::Header;
    let mut last_line = 0;

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        last_line = line_no;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if line == "EOF" {
            break;
        }

        let keyword = line.split(':').next().unwrap_or("").trim();
        match keyword {
            "NODE_COORD_SECTION" => {
                let n = dimension
                    .ok_or_else(|| Error::parse(line_no, "NODE_COORD_SECTION before DIMENSION"))?;
                coords = vec![None; n];
                section = Section::Coords;
                continue;
            }
            "EDGE_WEIGHT_SECTION" => {
                section = Section::Weights;
                continue;
            }
            "DISPLAY_DATA_SECTION" | "TOUR_SECTION" | "FIXED_EDGES_SECTION" => {
                section = Section::Skip;
                continue;
            }
            _ => {}
        }

        let first = line.split_whitespace().next().unwrap_or("");
        let looks_numeric = first.parse::<f64>().is_ok();

        if looks_numeric {
            match section {
                Section::Coords => {
                    let n = coords.len();
                    let parts: Vec<&str> = line.split_whitespace().collect();
                    if parts.len() != 3 {
                        return Err(Error::parse(
                            line_no,
                            format!("expected `id x y`, found {} fields", parts.len()),
                        ));
                    }
                    let id: usize = parts[0]
                        .parse()
                        .map_err(|_| Error::parse(line_no, format!("bad node id `{}`", parts[0])))?;
                    if id == 0 || id > n {
                        return Err(Error::DimensionMismatch {
                            line: line_no,
                            declared: n,
                            found: id,
                        });
                    }
                    let x: f64 = parts[1]
                        .parse()
                        .map_err(|_| Error::parse(line_no, format!("bad x `{}`", parts[1])))?;
                    let y: f64 = parts[2]
                        .parse()
                        .map_err(|_| Error::parse(line_no, format!("bad y `{}`", parts[2])))?;
                    if coords[id - 1].replace((x, y)).is_some() {
                        return Err(Error::parse(line_no, format!("node {id} listed twice")));
                    }
                    coord_lines += 1;
                }
                Section::Weights => {
                    for token in line.split_whitespace() {
                        let w: f64 = token.parse().map_err(|_| {
                            Error::parse(line_no, format!("bad edge weight `{token}`"))
                        })?;
                        if w < 0.0 || w.fract() != 0.0 {
                            return Err(Error::parse(
                                line_no,
                                format!("edge weight `{token}` is not a non-negative integer"),
                            ));
                        }
                        weights.push(w as Length);
                    }
                }
                Section::Skip => {}
                Section::Header => {
                    return Err(Error::parse(line_no, "data line outside of any section"));
                }
            }
            continue;
        }

        if section == Section::Skip || section == Section::Coords || section == Section::Weights {
            // a header keyword after a data section
            section = Section::Header;
        }
        let (key, value) = line
            .split_once(':')
            .ok_or_else(|| Error::parse(line_no, format!("malformed header line `{line}`")))?;
        let key = key.trim();
        let value = value.trim();
        match key {
            "NAME" => name = value.to_string(),
            "TYPE" => {
                if value != "TSP" {
                    return Err(Error::parse(line_no, format!("unsupported TYPE: {value}")));
                }
            }
            "DIMENSION" => {
                let n: usize = value
                    .parse()
                    .map_err(|_| Error::parse(line_no, format!("bad DIMENSION `{value}`")))?;
                dimension = Some(n);
            }
            "EDGE_WEIGHT_TYPE" => {
                kind = Some(value.parse().map_err(|e: Error| Error::parse(line_no, e.to_string()))?);
            }
            "EDGE_WEIGHT_FORMAT" => format = Some(MatrixFormat::parse(value, line_no)?),
            "COMMENT" | "DISPLAY_DATA_TYPE" | "NODE_COORD_TYPE" => {}
            other => {
                return Err(Error::parse(line_no, format!("unknown header key `{other}`")));
            }
        }
    }

    let n = dimension.ok_or_else(|| Error::parse(last_line, "missing DIMENSION"))?;
    let kind = kind.ok_or_else(|| Error::parse(last_line, "missing EDGE_WEIGHT_TYPE"))?;
    if name.is_empty() {
        name = "unnamed".to_string();
    }

    match kind {
        EdgeWeightKind::Euc2d | EdgeWeightKind::Att => {
            if coord_lines != n {
                return Err(Error::DimensionMismatch {
                    line: last_line,
                    declared: n,
                    found: coord_lines,
                });
            }
            let coords = coords.into_iter().map(|c| c.expect("all nodes present")).collect();
            Instance::from_coords(name, kind, coords)
        }
        EdgeWeightKind::Explicit => {
            let format = format.ok_or_else(|| {
                Error::parse(last_line, "EXPLICIT instance without EDGE_WEIGHT_FORMAT")
            })?;
            let expected = format.entry_count(n);
            if weights.len() != expected {
                return Err(Error::DimensionMismatch {
                    line: last_line,
                    declared: expected,
                    found: weights.len(),
                });
            }
            let matrix = expand_matrix(format, n, &weights);
            Instance::from_matrix(name, &matrix)
        }
    }
}

fn expand_matrix(format: MatrixFormat, n: usize, weights: &[Length]) -> Vec<Vec<Length>> {
    let mut m = vec![vec![0; n]; n];
    let mut it = weights.iter().copied();
    match format {
        MatrixFormat::FullMatrix => {
            for row in m.iter_mut() {
                for cell in row.iter_mut() {
                    *cell = it.next().unwrap();
                }
            }
        }
        MatrixFormat::UpperRow => {
            for i in 0..n {
                for j in (i + 1)..n {
                    let w = it.next().unwrap();
                    m[i][j] = w;
                    m[j][i] = w;
                }
            }
        }
        MatrixFormat::LowerDiagRow => {
            for i in 0..n {
                for j in 0..=i {
                    let w = it.next().unwrap();
                    m[i][j] = w;
                    m[j][i] = w;
                }
            }
        }
    }
    m
}
