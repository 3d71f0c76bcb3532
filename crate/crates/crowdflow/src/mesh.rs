//! Triangular meshes of elongated walkway domains.
//!
//! Meshes are generated by splitting a structured quad grid into triangles
//! (alternating diagonals, so the mesh is mirror-symmetric about the
//! mid-chord) and, for non-rectangular walkways, mapping the chord
//! coordinate through the profile `y -> y_c(x) + y * b(x)/B`. This keeps
//! generation deterministic and reproducible. Boundary edges carry one of
//! three labels: lateral walls, inlet end, outlet end. An optional buffer
//! strip upstream of the inlet (the pedestrian entering region) is meshed
//! jointly with the domain and tracked per element.
//!
//! A `TriMesh` is immutable after construction; concurrent reads are safe.

use std::fmt;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use crate::geometry::{Point2, Polygon2, Vec2};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundaryLabel {
    /// Lateral wall.
    Wall,
    /// Upstream end (pedestrians enter here).
    Inlet,
    /// Downstream end (pedestrians walk out here).
    Outlet,
}

impl fmt::Display for BoundaryLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BoundaryLabel::Wall => write!(f, "wall"),
            BoundaryLabel::Inlet => write!(f, "inlet"),
            BoundaryLabel::Outlet => write!(f, "outlet"),
        }
    }
}

impl std::str::FromStr for BoundaryLabel {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "wall" => Ok(BoundaryLabel::Wall),
            "inlet" => Ok(BoundaryLabel::Inlet),
            "outlet" => Ok(BoundaryLabel::Outlet),
            other => Err(format!("unknown boundary label `{other}`")),
        }
    }
}

/// Walkway centerline/chord profile, in span-scaled coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ChordProfile {
    Rectangle,
    /// Chord pinched by a Gaussian: `b(x) = B * (1 - depth * exp(-((x-center)/width)^2))`.
    Bottleneck {
        depth: f64,
        center: f64,
        width: f64,
    },
    /// Constant chord, centerline bowed laterally: `y_c(x) = offset * sin(pi x)`.
    Curved {
        offset: f64,
    },
    /// Constant chord, ends offset laterally through a smooth ramp:
    /// `y_c(x) = offset * (3x^2 - 2x^3)`.
    Shifted {
        offset: f64,
    },
}

impl ChordProfile {
    /// `b(x)/B`; the coordinate is clamped to [0, 1] so the profile extends
    /// flat into the buffer strip.
    pub fn chord_ratio(&self, x: f64) -> f64 {
        let x = x.clamp(0.0, 1.0);
        match *self {
            ChordProfile::Rectangle
            | ChordProfile::Curved { .. }
            | ChordProfile::Shifted { .. } => 1.0,
            ChordProfile::Bottleneck {
                depth,
                center,
                width,
            } => 1.0 - depth * (-((x - center) / width).powi(2)).exp(),
        }
    }

    pub fn centerline(&self, x: f64) -> f64 {
        let x = x.clamp(0.0, 1.0);
        match *self {
            ChordProfile::Rectangle | ChordProfile::Bottleneck { .. } => 0.0,
            ChordProfile::Curved { offset } => offset * (std::f64::consts::PI * x).sin(),
            ChordProfile::Shifted { offset } => offset * (3.0 * x * x - 2.0 * x * x * x),
        }
    }
}

/// Domain description in span-scaled units: length 1, chord `aspect`,
/// optional entrance buffer of depth `buffer_depth` upstream of x = 0.
#[derive(Debug, Clone, Copy)]
pub struct DomainSpec {
    /// Aspect ratio B/L.
    pub aspect: f64,
    pub profile: ChordProfile,
    /// Depth of the entering-region strip; 0 disables it.
    pub buffer_depth: f64,
}

impl DomainSpec {
    pub fn rectangle(aspect: f64) -> Self {
        Self {
            aspect,
            profile: ChordProfile::Rectangle,
            buffer_depth: 0.0,
        }
    }

    pub fn x_in(&self) -> f64 {
        -self.buffer_depth
    }

    pub fn x_out(&self) -> f64 {
        1.0
    }

    fn min_chord_ratio(&self) -> f64 {
        (0..=400)
            .map(|i| self.profile.chord_ratio(i as f64 / 400.0))
            .fold(f64::INFINITY, f64::min)
    }
}

#[derive(Debug, Clone)]
pub struct BoundaryEdge {
    /// Node ids in the owning triangle's counterclockwise order, so the
    /// domain interior lies to the left of `n0 -> n1`.
    pub nodes: [usize; 2],
    pub label: BoundaryLabel,
    /// Owning element.
    pub elem: usize,
    /// Outward unit normal.
    pub normal: Vec2,
    pub midpoint: Point2,
    pub length: f64,
}

#[derive(Debug)]
pub struct TriMesh {
    pub nodes: Vec<Point2>,
    /// Node indices per triangle, counterclockwise.
    pub tris: Vec<[usize; 3]>,
    pub centroids: Vec<Point2>,
    pub areas: Vec<f64>,
    pub boundary: Vec<BoundaryEdge>,
    /// Elements inside the entering region (sorted).
    pub buffer_elems: Vec<usize>,
    pub is_buffer: Vec<bool>,
    /// Boundary-edge ids within reach of each element (used for wall
    /// handling in the transport step).
    pub nearby_boundary: Vec<Vec<u32>>,
    /// Smallest / largest element size (twice the inradius).
    pub h_min: f64,
    pub h_max: f64,
    pub max_circumradius: f64,
    pub bbox: (Point2, Point2),
}

impl TriMesh {
    /// Assemble a mesh from raw parts, validating connectivity and boundary
    /// labeling. `boundary_labels` must list exactly the topological
    /// boundary edges (node pairs in any order).
    pub fn from_parts(
        nodes: Vec<Point2>,
        tris_in: Vec<[usize; 3]>,
        boundary_labels: &[([usize; 2], BoundaryLabel)],
        buffer_elems: Vec<usize>,
    ) -> Result<Self> {
        if tris_in.is_empty() {
            return Err(Error::Mesh("mesh has no elements".into()));
        }
        let nn = nodes.len();
        let mut tris = Vec::with_capacity(tris_in.len());
        for (k, t) in tris_in.iter().enumerate() {
            if t.iter().any(|&i| i >= nn) {
                return Err(Error::Mesh(format!("triangle {k} references missing node")));
            }
            let [a, b, c] = [nodes[t[0]], nodes[t[1]], nodes[t[2]]];
            let cross = (b - a).cross(c - a);
            if cross.abs() < 1e-300 {
                return Err(Error::Mesh(format!("triangle {k} is degenerate")));
            }
            // Normalize to counterclockwise.
            if cross > 0.0 {
                tris.push(*t);
            } else {
                tris.push([t[0], t[2], t[1]]);
            }
        }

        // Edge census: interior edges must be shared by exactly 2 triangles.
        use std::collections::HashMap;
        let mut edge_use: HashMap<(usize, usize), Vec<(usize, usize)>> = HashMap::new();
        for (k, t) in tris.iter().enumerate() {
            for e in 0..3 {
                let a = t[e];
                let b = t[(e + 1) % 3];
                let key = (a.min(b), a.max(b));
                edge_use.entry(key).or_default().push((k, e));
            }
        }
        for (key, users) in &edge_use {
            if users.len() > 2 {
                return Err(Error::Mesh(format!(
                    "edge {key:?} shared by {} triangles",
                    users.len()
                )));
            }
        }

        let mut label_of: HashMap<(usize, usize), BoundaryLabel> = HashMap::new();
        for (pair, label) in boundary_labels {
            let key = (pair[0].min(pair[1]), pair[0].max(pair[1]));
            if label_of.insert(key, *label).is_some() {
                return Err(Error::Mesh(format!("boundary edge {key:?} labeled twice")));
            }
        }

        let mut boundary = Vec::new();
        for (key, users) in edge_use.iter() {
            if users.len() == 1 {
                let label = label_of.remove(key).ok_or_else(|| {
                    Error::Mesh(format!("unlabeled boundary edge between nodes {key:?}"))
                })?;
                let (k, e) = users[0];
                let a = tris[k][e];
                let b = tris[k][(e + 1) % 3];
                let pa = nodes[a];
                let pb = nodes[b];
                let d = pb - pa;
                let len = d.norm();
                boundary.push(BoundaryEdge {
                    nodes: [a, b],
                    label,
                    elem: k,
                    normal: Vec2::new(d.y / len, -d.x / len),
                    midpoint: Point2::new(0.5 * (pa.x + pb.x), 0.5 * (pa.y + pb.y)),
                    length: len,
                });
            }
        }
        if !label_of.is_empty() {
            let leftover: Vec<_> = label_of.keys().take(4).collect();
            return Err(Error::Mesh(format!(
                "labels given for non-boundary edges: {leftover:?}"
            )));
        }
        // Deterministic ordering regardless of hash iteration.
        boundary.sort_by_key(|e| (e.nodes[0].min(e.nodes[1]), e.nodes[0].max(e.nodes[1])));

        let mut centroids = Vec::with_capacity(tris.len());
        let mut areas = Vec::with_capacity(tris.len());
        let mut sizes = Vec::with_capacity(tris.len());
        let mut max_circumradius: f64 = 0.0;
        let mut bbox = (
            Point2::new(f64::INFINITY, f64::INFINITY),
            Point2::new(f64::NEG_INFINITY, f64::NEG_INFINITY),
        );
        for t in &tris {
            let [a, b, c] = [nodes[t[0]], nodes[t[1]], nodes[t[2]]];
            // Shoelace form, bit-identical to Polygon2::area so that a
            // full polygon overlap carries weight exactly 1.
            let area =
                0.5 * ((a.x * b.y - b.x * a.y) + (b.x * c.y - c.x * b.y) + (c.x * a.y - a.x * c.y));
            let cx = (a.x + b.x + c.x) / 3.0;
            let cy = (a.y + b.y + c.y) / 3.0;
            let perim = (b - a).norm() + (c - b).norm() + (a - c).norm();
            centroids.push(Point2::new(cx, cy));
            areas.push(area);
            sizes.push(4.0 * area / perim); // twice the inradius
            let centroid = Point2::new(cx, cy);
            let circum = [a, b, c]
                .iter()
                .map(|&p| (p - centroid).norm())
                .fold(0.0, f64::max);
            max_circumradius = max_circumradius.max(circum);
            for p in [a, b, c] {
                bbox.0.x = bbox.0.x.min(p.x);
                bbox.0.y = bbox.0.y.min(p.y);
                bbox.1.x = bbox.1.x.max(p.x);
                bbox.1.y = bbox.1.y.max(p.y);
            }
        }
        let h_min = sizes.iter().copied().fold(f64::INFINITY, f64::min);
        let h_max = sizes.iter().copied().fold(0.0, f64::max);

        let mut is_buffer = vec![false; tris.len()];
        for &e in &buffer_elems {
            if e >= tris.len() {
                return Err(Error::Mesh(format!("buffer element {e} out of range")));
            }
            is_buffer[e] = true;
        }
        let mut buffer_elems = buffer_elems;
        buffer_elems.sort_unstable();
        buffer_elems.dedup();

        let mut mesh = TriMesh {
            nodes,
            tris,
            centroids,
            areas,
            boundary,
            buffer_elems,
            is_buffer,
            nearby_boundary: Vec::new(),
            h_min,
            h_max,
            max_circumradius,
            bbox,
        };
        mesh.build_nearby_boundary();
        Ok(mesh)
    }

    /// For every boundary edge, record it on each element whose centroid is
    /// within reach; a translated element can only cross edges in this set
    /// as long as the step respects the transport shift limit
    /// (`max_circumradius + 2 h_max`).
    fn build_nearby_boundary(&mut self) {
        let reach = 3.0 * self.max_circumradius + 2.0 * self.h_max;
        let grid = SpatialGrid::new(&self.centroids, (2.0 * self.h_max).max(1e-12));
        let mut nearby: Vec<Vec<u32>> = vec![Vec::new(); self.tris.len()];
        for (eid, edge) in self.boundary.iter().enumerate() {
            let r = 0.5 * edge.length + reach;
            for k in grid.radius_query_points(&self.centroids, edge.midpoint, r) {
                nearby[k].push(eid as u32);
            }
        }
        self.nearby_boundary = nearby;
    }

    pub fn element_count(&self) -> usize {
        self.tris.len()
    }

    pub fn element_polygon(&self, k: usize) -> Polygon2 {
        let t = self.tris[k];
        Polygon2::from_ccw_unchecked(vec![self.nodes[t[0]], self.nodes[t[1]], self.nodes[t[2]]])
    }

    pub fn total_area(&self) -> f64 {
        self.areas.iter().sum()
    }

    pub fn domain_area(&self) -> f64 {
        self.areas
            .iter()
            .enumerate()
            .filter(|(k, _)| !self.is_buffer[*k])
            .map(|(_, a)| a)
            .sum()
    }

    pub fn buffer_area(&self) -> f64 {
        self.buffer_elems.iter().map(|&k| self.areas[k]).sum()
    }

    /// Elements whose centroid lies within distance `r` of `p` (inclusive),
    /// sorted by element index.
    pub fn radius_query(&self, grid: &SpatialGrid, p: Point2, r: f64) -> Vec<usize> {
        grid.radius_query_points(&self.centroids, p, r)
    }

    pub fn label_census(&self) -> [(BoundaryLabel, usize); 3] {
        let mut wall = 0;
        let mut inlet = 0;
        let mut outlet = 0;
        for e in &self.boundary {
            match e.label {
                BoundaryLabel::Wall => wall += 1,
                BoundaryLabel::Inlet => inlet += 1,
                BoundaryLabel::Outlet => outlet += 1,
            }
        }
        [
            (BoundaryLabel::Wall, wall),
            (BoundaryLabel::Inlet, inlet),
            (BoundaryLabel::Outlet, outlet),
        ]
    }
}

/// Uniform bucket grid over element centroids. The cell size is chosen by
/// the caller (typically the interaction radius); queries of any radius
/// work by scanning the covered cells.
#[derive(Debug)]
pub struct SpatialGrid {
    origin: Point2,
    cell: f64,
    nx: usize,
    ny: usize,
    buckets: Vec<Vec<u32>>,
}

impl SpatialGrid {
    pub fn new(points: &[Point2], cell: f64) -> Self {
        assert!(cell > 0.0, "grid cell size must be positive");
        let mut lo = Point2::new(f64::INFINITY, f64::INFINITY);
        let mut hi = Point2::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
        for p in points {
            lo.x = lo.x.min(p.x);
            lo.y = lo.y.min(p.y);
            hi.x = hi.x.max(p.x);
            hi.y = hi.y.max(p.y);
        }
        if points.is_empty() {
            lo = Point2::new(0.0, 0.0);
            hi = Point2::new(0.0, 0.0);
        }
        let nx = (((hi.x - lo.x) / cell).floor() as usize + 1).max(1);
        let ny = (((hi.y - lo.y) / cell).floor() as usize + 1).max(1);
        let mut buckets = vec![Vec::new(); nx * ny];
        for (i, p) in points.iter().enumerate() {
            let cx = (((p.x - lo.x) / cell) as usize).min(nx - 1);
            let cy = (((p.y - lo.y) / cell) as usize).min(ny - 1);
            buckets[cy * nx + cx].push(i as u32);
        }
        Self {
            origin: lo,
            cell,
            nx,
            ny,
            buckets,
        }
    }

    pub fn radius_query_points(&self, points: &[Point2], p: Point2, r: f64) -> Vec<usize> {
        let r = r.max(0.0);
        let cx0 = (((p.x - r - self.origin.x) / self.cell).floor().max(0.0)) as usize;
        let cy0 = (((p.y - r - self.origin.y) / self.cell).floor().max(0.0)) as usize;
        let cx1 =
            ((((p.x + r - self.origin.x) / self.cell).floor()).max(0.0) as usize).min(self.nx - 1);
        let cy1 =
            ((((p.y + r - self.origin.y) / self.cell).floor()).max(0.0) as usize).min(self.ny - 1);
        let r2 = r * r;
        let mut out = Vec::new();
        for cy in cy0..=cy1 {
            for cx in cx0..=cx1 {
                for &i in &self.buckets[cy * self.nx + cx] {
                    let q = points[i as usize];
                    let dx = q.x - p.x;
                    let dy = q.y - p.y;
                    if dx * dx + dy * dy <= r2 {
                        out.push(i as usize);
                    }
                }
            }
        }
        out.sort_unstable();
        out
    }
}

/// Generate a walkway mesh with target element size `h` (scaled units).
pub fn generate_mesh(spec: &DomainSpec, h: f64) -> Result<TriMesh> {
    let min_chord = spec.aspect * spec.min_chord_ratio();
    if !(h > 0.0) {
        return Err(Error::Mesh(format!(
            "target element size must be positive, got {h}"
        )));
    }
    if min_chord <= 0.0 {
        return Err(Error::Mesh(
            "chord profile is non-positive somewhere".into(),
        ));
    }
    if h >= min_chord {
        return Err(Error::Mesh(format!(
            "target element size {h} must be below the minimum chord {min_chord}"
        )));
    }
    let nx = (1.0 / h).round().max(1.0) as usize;
    let mut ny = (spec.aspect / h).round().max(2.0) as usize;
    if ny % 2 == 1 {
        ny += 1;
    }
    let nx_buf = if spec.buffer_depth > 0.0 {
        (spec.buffer_depth / h).round().max(1.0) as usize
    } else {
        0
    };
    generate_structured(spec, nx, ny, nx_buf)
}

/// Structured generator with explicit resolution: `nx` cells along the
/// domain, `ny` (even) across the chord, `nx_buf` cells along the buffer.
pub fn generate_structured(
    spec: &DomainSpec,
    nx: usize,
    ny: usize,
    nx_buf: usize,
) -> Result<TriMesh> {
    if nx == 0 || ny < 2 {
        return Err(Error::Mesh("mesh resolution too coarse".into()));
    }
    if ny % 2 == 1 {
        return Err(Error::Mesh("chord-wise cell count must be even".into()));
    }
    if spec.buffer_depth > 0.0 && nx_buf == 0 {
        return Err(Error::Mesh(
            "buffer requested but zero buffer columns".into(),
        ));
    }

    // Column coordinates: buffer columns map [-depth, 0], domain columns
    // [0, 1]; x = 0 is always a grid line so the buffer/domain split is
    // exact.
    let mut xs = Vec::with_capacity(nx_buf + nx + 1);
    for i in 0..nx_buf {
        xs.push(-spec.buffer_depth * (1.0 - i as f64 / nx_buf as f64));
    }
    for i in 0..=nx {
        xs.push(i as f64 / nx as f64);
    }
    let ncols = xs.len() - 1;

    let mut nodes = Vec::with_capacity(xs.len() * (ny + 1));
    for &x in &xs {
        let ratio = spec.profile.chord_ratio(x);
        let yc = spec.profile.centerline(x);
        for j in 0..=ny {
            let y_rect = -0.5 * spec.aspect + spec.aspect * j as f64 / ny as f64;
            nodes.push(Point2::new(x, yc + y_rect * ratio));
        }
    }
    let node_id = |i: usize, j: usize| i * (ny + 1) + j;

    let mut tris = Vec::with_capacity(2 * ncols * ny);
    let mut buffer_elems = Vec::new();
    for i in 0..ncols {
        for j in 0..ny {
            let a = node_id(i, j);
            let b = node_id(i + 1, j);
            let c = node_id(i + 1, j + 1);
            let d = node_id(i, j + 1);
            if (i + j) % 2 == 0 {
                tris.push([a, b, c]);
                tris.push([a, c, d]);
            } else {
                tris.push([a, b, d]);
                tris.push([b, c, d]);
            }
            if i < nx_buf {
                let k = tris.len();
                buffer_elems.push(k - 2);
                buffer_elems.push(k - 1);
            }
        }
    }

    let mut boundary_labels = Vec::new();
    for i in 0..ncols {
        boundary_labels.push(([node_id(i, 0), node_id(i + 1, 0)], BoundaryLabel::Wall));
        boundary_labels.push(([node_id(i, ny), node_id(i + 1, ny)], BoundaryLabel::Wall));
    }
    for j in 0..ny {
        boundary_labels.push(([node_id(0, j), node_id(0, j + 1)], BoundaryLabel::Inlet));
        boundary_labels.push((
            [node_id(ncols, j), node_id(ncols, j + 1)],
            BoundaryLabel::Outlet,
        ));
    }

    TriMesh::from_parts(nodes, tris, &boundary_labels, buffer_elems)
}

pub fn save_mesh<P: AsRef<Path>>(mesh: &TriMesh, path: P) -> Result<()> {
    let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(w, "crowdflow-mesh v1")?;
    writeln!(w, "nodes {}", mesh.nodes.len())?;
    for p in &mesh.nodes {
        writeln!(w, "{} {}", p.x, p.y)?;
    }
    writeln!(w, "triangles {}", mesh.tris.len())?;
    for t in &mesh.tris {
        writeln!(w, "{} {} {}", t[0], t[1], t[2])?;
    }
    writeln!(w, "boundary {}", mesh.boundary.len())?;
    for e in &mesh.boundary {
        writeln!(w, "{} {} {}", e.nodes[0], e.nodes[1], e.label)?;
    }
    writeln!(w, "buffer {}", mesh.buffer_elems.len())?;
    for e in &mesh.buffer_elems {
        writeln!(w, "{e}")?;
    }
    Ok(())
}

pub fn load_mesh<P: AsRef<Path>>(path: P) -> Result<TriMesh> {
    let path_str = path.as_ref().display().to_string();
    let file = std::fs::File::open(&path)?;
    let reader = BufReader::new(file);
    let mut lines = reader.lines().enumerate();

    let fail = |line: usize, msg: String| Error::MeshFormat {
        path: path_str.clone(),
        line: line + 1,
        msg,
    };
    let mut next_line = |expect: &str| -> Result<(usize, String)> {
        loop {
            match lines.next() {
                Some((n, Ok(l))) => {
                    let t = l.trim().to_string();
                    if !t.is_empty() {
                        return Ok((n, t));
                    }
                }
                Some((n, Err(e))) => {
                    return Err(Error::MeshFormat {
                        path: path_str.clone(),
                        line: n + 1,
                        msg: e.to_string(),
                    })
                }
                None => {
                    return Err(Error::MeshFormat {
                        path: path_str.clone(),
                        line: 0,
                        msg: format!("unexpected end of file, expected {expect}"),
                    })
                }
            }
        }
    };

    let (n, header) = next_line("header")?;
    if header != "crowdflow-mesh v1" {
        return Err(fail(n, format!("bad header `{header}`")));
    }

    let parse_count = |line: usize, text: &str, section: &str| -> Result<usize> {
        let mut it = text.split_whitespace();
        match (it.next(), it.next(), it.next()) {
            (Some(s), Some(c), None) if s == section => c
                .parse()
                .map_err(|_| fail(line, format!("bad count `{c}` in section {section}"))),
            _ => Err(fail(
                line,
                format!("expected `{section} <count>`, got `{text}`"),
            )),
        }
    };

    let (n, l) = next_line("nodes section")?;
    let node_count = parse_count(n, &l, "nodes")?;
    let mut nodes = Vec::with_capacity(node_count);
    for _ in 0..node_count {
        let (n, l) = next_line("node coordinates")?;
        let mut it = l.split_whitespace();
        let x: f64 = it
            .next()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| fail(n, "bad node line".into()))?;
        let y: f64 = it
            .next()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| fail(n, "bad node line".into()))?;
        nodes.push(Point2::new(x, y));
    }

    let (n, l) = next_line("triangles section")?;
    let tri_count = parse_count(n, &l, "triangles")?;
    let mut tris = Vec::with_capacity(tri_count);
    for _ in 0..tri_count {
        let (n, l) = next_line("triangle indices")?;
        let ids: Vec<usize> = l
            .split_whitespace()
            .map(|s| s.parse::<usize>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| fail(n, "bad triangle line".into()))?;
        if ids.len() != 3 {
            return Err(fail(n, "triangle line must have 3 indices".into()));
        }
        tris.push([ids[0], ids[1], ids[2]]);
    }

    let (n, l) = next_line("boundary section")?;
    let bnd_count = parse_count(n, &l, "boundary")?;
    let mut labels = Vec::with_capacity(bnd_count);
    for _ in 0..bnd_count {
        let (n, l) = next_line("boundary edge")?;
        let parts: Vec<&str> = l.split_whitespace().collect();
        if parts.len() != 3 {
            return Err(fail(n, "boundary line must be `n0 n1 label`".into()));
        }
        let a: usize = parts[0]
            .parse()
            .map_err(|_| fail(n, "bad node id".into()))?;
        let b: usize = parts[1]
            .parse()
            .map_err(|_| fail(n, "bad node id".into()))?;
        let label: BoundaryLabel = parts[2].parse().map_err(|m| fail(n, m))?;
        labels.push(([a, b], label));
    }

    // Optional buffer section.
    let mut buffer = Vec::new();
    if let Ok((n, l)) = next_line("buffer section") {
        let count = parse_count(n, &l, "buffer")?;
        for _ in 0..count {
            let (n, l) = next_line("buffer element id")?;
            buffer.push(
                l.parse::<usize>()
                    .map_err(|_| fail(n, "bad element id".into()))?,
            );
        }
    }

    TriMesh::from_parts(nodes, tris, &labels, buffer)
}
