//! Conforming triangulations of the four benchmark domains.
//!
//! Meshes are immutable once built. Every generator goes through
//! [`Mesh::from_parts`], which validates orientation, builds the edge table and
//! orders the boundary edges as a single counterclockwise loop.
//!
//! Edge orientation convention: an edge is stored from its lower vertex index
//! to its higher one, and its reference normal is the tangent rotated
//! clockwise, `(dy, -dx) / |e|`. For a triangle `K`, the sign
//! [`Mesh::edge_sign`] is `+1` when that reference normal points out of `K`.

use std::collections::HashMap;
use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;

use serde::Serialize;
use thiserror::Error;

use crate::scalar::Scalar;

pub type Point<T> = [T; 2];

/// Default cap on the number of triangles a generator may produce.
pub const DEFAULT_ELEMENT_BUDGET: usize = 4_000_000;

#[derive(Debug, Error)]
pub enum MeshError {
    #[error("mesh level must be at least 1, got {0}")]
    InvalidLevel(u32),
    #[error("level {level} needs {triangles} triangles, above the budget of {budget}")]
    BudgetExceeded {
        level: u32,
        triangles: usize,
        budget: usize,
    },
    #[error("triangle {0} is degenerate (zero area)")]
    Degenerate(usize),
    #[error("triangle {0} is clockwise (negative signed area)")]
    Clockwise(usize),
    #[error("triangle {triangle} references vertex {vertex}, but the mesh has {count} vertices")]
    BadVertexIndex {
        triangle: usize,
        vertex: usize,
        count: usize,
    },
    #[error("edge ({0}, {1}) is shared by more than two triangles")]
    NonManifoldEdge(usize, usize),
    #[error("edge ({0}, {1}) is traversed twice in the same direction")]
    InconsistentOrientation(usize, usize),
    #[error("boundary edges do not form a single closed loop")]
    BoundaryNotSingleLoop,
    #[error("mesh has no triangles")]
    Empty,
    #[error("triangle index {index} out of range (mesh has {count} triangles)")]
    InvalidTriangle { index: usize, count: usize },
    #[error("edge index {index} out of range (mesh has {count} edges)")]
    InvalidEdge { index: usize, count: usize },
    #[error("edge {edge} is not an edge of triangle {triangle}")]
    EdgeNotInTriangle { edge: usize, triangle: usize },
    #[error("unknown domain `{0}` (expected square, right-tri, equi-tri or lshape)")]
    UnknownDomain(String),
    #[error("mesh file line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("mesh file disagrees with the reconstructed topology: {0}")]
    Inconsistent(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// The four benchmark domains.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum DomainId {
    /// `(0,1)²`
    UnitSquare,
    /// Isosceles right triangle with unit legs along the axes.
    RightTriangle,
    /// Equilateral triangle with unit side, base on the x axis.
    EquilateralTriangle,
    /// `(0,1)² \ [1/2,1]²`
    LShape,
}

impl DomainId {
    pub const ALL: [DomainId; 4] = [
        DomainId::UnitSquare,
        DomainId::RightTriangle,
        DomainId::EquilateralTriangle,
        DomainId::LShape,
    ];

    /// Short name used on the command line and in reports.
    pub fn name(self) -> &'static str {
        match self {
            DomainId::UnitSquare => "square",
            DomainId::RightTriangle => "right-tri",
            DomainId::EquilateralTriangle => "equi-tri",
            DomainId::LShape => "lshape",
        }
    }

    pub fn area(self) -> f64 {
        match self {
            DomainId::UnitSquare => 1.0,
            DomainId::RightTriangle => 0.5,
            DomainId::EquilateralTriangle => 3f64.sqrt() / 4.0,
            DomainId::LShape => 0.75,
        }
    }

    pub fn perimeter(self) -> f64 {
        match self {
            DomainId::UnitSquare | DomainId::LShape => 4.0,
            DomainId::RightTriangle => 2.0 + 2f64.sqrt(),
            DomainId::EquilateralTriangle => 3.0,
        }
    }

    /// Number of triangles produced by [`generate`] at `level`, or `None` on overflow.
    pub fn triangle_count(self, level: u32) -> Option<usize> {
        let n = 1usize.checked_shl(level.checked_add(1)?)?;
        let nn = n.checked_mul(n)?;
        Some(match self {
            DomainId::UnitSquare => nn.checked_mul(2)?,
            DomainId::RightTriangle | DomainId::EquilateralTriangle => nn,
            DomainId::LShape => nn / 2 * 3,
        })
    }
}

impl fmt::Display for DomainId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for DomainId {
    type Err = MeshError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "square" | "unit-square" => Ok(DomainId::UnitSquare),
            "right-tri" | "right-triangle" => Ok(DomainId::RightTriangle),
            "equi-tri" | "equilateral" => Ok(DomainId::EquilateralTriangle),
            "lshape" | "l-shape" => Ok(DomainId::LShape),
            other => Err(MeshError::UnknownDomain(other.to_string())),
        }
    }
}

/// An edge stored from lower to higher vertex index.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Edge {
    pub vertices: [usize; 2],
    /// First adjacent triangle (in triangle order).
    pub first: usize,
    /// Second adjacent triangle; `None` on the boundary.
    pub second: Option<usize>,
}

impl Edge {
    pub fn is_boundary(&self) -> bool {
        self.second.is_none()
    }
}

/// Per-element geometry.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ElementGeometry<T> {
    pub area: T,
    pub diameter: T,
    /// Length of the edge opposite each local vertex.
    pub edge_lengths: [T; 3],
}

#[derive(Clone, Debug)]
pub struct Mesh<T> {
    vertices: Vec<Point<T>>,
    triangles: Vec<[usize; 3]>,
    edges: Vec<Edge>,
    /// `tri_edges[t][i]` is the edge opposite local vertex `i`.
    tri_edges: Vec<[usize; 3]>,
    boundary_edges: Vec<usize>,
    /// Position of each edge in `boundary_edges`, if any.
    boundary_slot: Vec<Option<usize>>,
    areas: Vec<T>,
    diameters: Vec<T>,
    edge_lengths: Vec<T>,
    h: T,
    origin: Option<(DomainId, u32)>,
}

/// Result of one uniform (red) refinement step.
#[derive(Clone, Debug)]
pub struct Refinement<T> {
    pub mesh: Mesh<T>,
    /// Coarse triangle containing each fine triangle.
    pub parent: Vec<usize>,
}

fn signed_area2<T: Scalar>(a: Point<T>, b: Point<T>, c: Point<T>) -> T {
    (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
}

fn distance<T: Scalar>(a: Point<T>, b: Point<T>) -> T {
    (b[0] - a[0]).hypot(b[1] - a[1])
}

impl<T: Scalar> Mesh<T> {
    /// Builds a mesh from vertex coordinates and counterclockwise triangles.
    pub fn from_parts(
        vertices: Vec<Point<T>>,
        triangles: Vec<[usize; 3]>,
    ) -> Result<Self, MeshError> {
        if triangles.is_empty() {
            return Err(MeshError::Empty);
        }
        let nv = vertices.len();
        let mut areas = Vec::with_capacity(triangles.len());
        let mut diameters = Vec::with_capacity(triangles.len());
        for (t, tri) in triangles.iter().enumerate() {
            for &v in tri {
                if v >= nv {
                    return Err(MeshError::BadVertexIndex {
                        triangle: t,
                        vertex: v,
                        count: nv,
                    });
                }
            }
            let [a, b, c] = tri.map(|v| vertices[v]);
            let twice = signed_area2(a, b, c);
            let scale = distance(a, b).max(distance(b, c)).max(distance(c, a));
            if twice.abs() <= T::epsilon() * scale * scale {
                return Err(MeshError::Degenerate(t));
            }
            if twice < T::zero() {
                return Err(MeshError::Clockwise(t));
            }
            areas.push(twice * T::lit(0.5));
            diameters.push(scale);
        }

        // Directed half-edges a->b with the triangle on the left.
        let mut directed: HashMap<(usize, usize), usize> = HashMap::new();
        let mut edge_of: HashMap<(usize, usize), usize> = HashMap::new();
        let mut edges: Vec<Edge> = Vec::new();
        let mut tri_edges = Vec::with_capacity(triangles.len());
        for (t, tri) in triangles.iter().enumerate() {
            let mut local = [0usize; 3];
            for i in 0..3 {
                let a = tri[(i + 1) % 3];
                let b = tri[(i + 2) % 3];
                if directed.insert((a, b), t).is_some() {
                    return Err(MeshError::InconsistentOrientation(a, b));
                }
                let key = (a.min(b), a.max(b));
                let id = match edge_of.get(&key) {
                    Some(&id) => {
                        let e = &mut edges[id];
                        if e.second.is_some() {
                            return Err(MeshError::NonManifoldEdge(key.0, key.1));
                        }
                        e.second = Some(t);
                        id
                    }
                    None => {
                        let id = edges.len();
                        edges.push(Edge {
                            vertices: [key.0, key.1],
                            first: t,
                            second: None,
                        });
                        edge_of.insert(key, id);
                        id
                    }
                };
                local[i] = id;
            }
            tri_edges.push(local);
        }

        let edge_lengths: Vec<T> = edges
            .iter()
            .map(|e| distance(vertices[e.vertices[0]], vertices[e.vertices[1]]))
            .collect();

        // Boundary loop: follow directed boundary half-edges counterclockwise.
        let mut next_from: HashMap<usize, (usize, usize)> = HashMap::new();
        let mut boundary_count = 0;
        for (id, e) in edges.iter().enumerate() {
            if !e.is_boundary() {
                continue;
            }
            boundary_count += 1;
            let [lo, hi] = e.vertices;
            let (s, f) = if directed.contains_key(&(lo, hi)) {
                (lo, hi)
            } else {
                (hi, lo)
            };
            if next_from.insert(s, (f, id)).is_some() {
                return Err(MeshError::BoundaryNotSingleLoop);
            }
        }
        let start = *next_from
            .keys()
            .min()
            .ok_or(MeshError::BoundaryNotSingleLoop)?;
        let mut boundary_edges = Vec::with_capacity(boundary_count);
        let mut cur = start;
        loop {
            let (f, id) = next_from[&cur];
            boundary_edges.push(id);
            cur = f;
            if cur == start || boundary_edges.len() > boundary_count {
                break;
            }
        }
        if cur != start || boundary_edges.len() != boundary_count {
            return Err(MeshError::BoundaryNotSingleLoop);
        }
        let mut boundary_slot = vec![None; edges.len()];
        for (slot, &e) in boundary_edges.iter().enumerate() {
            boundary_slot[e] = Some(slot);
        }

        let h = diameters.iter().copied().fold(T::zero(), T::max);
        Ok(Mesh {
            vertices,
            triangles,
            edges,
            tri_edges,
            boundary_edges,
            boundary_slot,
            areas,
            diameters,
            edge_lengths,
            h,
            origin: None,
        })
    }

    fn with_origin(mut self, domain: DomainId, level: u32) -> Self {
        self.origin = Some((domain, level));
        self
    }

    pub fn vertices(&self) -> &[Point<T>] {
        &self.vertices
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    /// Boundary edge indices in counterclockwise loop order.
    pub fn boundary_edges(&self) -> &[usize] {
        &self.boundary_edges
    }

    /// Position of `edge` in [`Mesh::boundary_edges`], `None` for interior edges.
    pub fn boundary_slot(&self, edge: usize) -> Option<usize> {
        self.boundary_slot.get(edge).copied().flatten()
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_triangles(&self) -> usize {
        self.triangles.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn num_boundary_edges(&self) -> usize {
        self.boundary_edges.len()
    }

    /// Domain and level this mesh was generated for, if any.
    pub fn origin(&self) -> Option<(DomainId, u32)> {
        self.origin
    }

    /// Global mesh size: the largest triangle diameter.
    pub fn h(&self) -> T {
        self.h
    }

    pub fn area(&self, t: usize) -> T {
        self.areas[t]
    }

    pub fn diameter(&self, t: usize) -> T {
        self.diameters[t]
    }

    pub fn edge_length(&self, e: usize) -> T {
        self.edge_lengths[e]
    }

    pub fn triangle_edges(&self, t: usize) -> [usize; 3] {
        self.tri_edges[t]
    }

    pub fn triangle_points(&self, t: usize) -> [Point<T>; 3] {
        self.triangles[t].map(|v| self.vertices[v])
    }

    pub fn centroid(&self, t: usize) -> Point<T> {
        let [a, b, c] = self.triangle_points(t);
        let third = T::one() / T::lit(3.0);
        [(a[0] + b[0] + c[0]) * third, (a[1] + b[1] + c[1]) * third]
    }

    pub fn edge_points(&self, e: usize) -> [Point<T>; 2] {
        self.edges[e].vertices.map(|v| self.vertices[v])
    }

    pub fn edge_midpoint(&self, e: usize) -> Point<T> {
        let [a, b] = self.edge_points(e);
        let half = T::lit(0.5);
        [(a[0] + b[0]) * half, (a[1] + b[1]) * half]
    }

    /// Reference unit normal of `e`: the low-to-high tangent rotated clockwise.
    pub fn edge_normal(&self, e: usize) -> Point<T> {
        let [a, b] = self.edge_points(e);
        let len = self.edge_lengths[e];
        [(b[1] - a[1]) / len, (a[0] - b[0]) / len]
    }

    /// `+1` if the reference normal of the edge opposite local vertex `i` points out of `t`.
    pub fn edge_sign(&self, t: usize, i: usize) -> T {
        let tri = self.triangles[t];
        if tri[(i + 1) % 3] < tri[(i + 2) % 3] {
            T::one()
        } else {
            -T::one()
        }
    }

    /// Outward unit normal of a boundary edge.
    pub fn outward_normal(&self, e: usize) -> Point<T> {
        let n = self.edge_normal(e);
        let s = self.boundary_sign(e);
        [n[0] * s, n[1] * s]
    }

    /// `+1` if the reference normal of boundary edge `e` is outward, `-1` otherwise.
    pub fn boundary_sign(&self, e: usize) -> T {
        let t = self.edges[e].first;
        let i = self
            .local_index(t, e)
            .expect("edge adjacent to its first triangle");
        self.edge_sign(t, i)
    }

    /// Local index (opposite vertex) of edge `e` inside triangle `t`.
    pub fn local_index(&self, t: usize, e: usize) -> Option<usize> {
        self.tri_edges[t].iter().position(|&x| x == e)
    }

    pub fn element_geometry(&self, t: usize) -> Result<ElementGeometry<T>, MeshError> {
        if t >= self.triangles.len() {
            return Err(MeshError::InvalidTriangle {
                index: t,
                count: self.triangles.len(),
            });
        }
        Ok(ElementGeometry {
            area: self.areas[t],
            diameter: self.diameters[t],
            edge_lengths: self.tri_edges[t].map(|e| self.edge_lengths[e]),
        })
    }

    /// Sum of boundary edge lengths.
    pub fn boundary_length(&self) -> T {
        self.boundary_edges
            .iter()
            .fold(T::zero(), |acc, &e| acc + self.edge_lengths[e])
    }

    pub fn total_area(&self) -> T {
        self.areas.iter().fold(T::zero(), |acc, &a| acc + a)
    }

    /// Largest and smallest triangle area.
    pub fn area_range(&self) -> (T, T) {
        let max = self.areas.iter().copied().fold(T::zero(), T::max);
        let min = self.areas.iter().copied().fold(T::infinity(), T::min);
        (min, max)
    }

    /// `V - E + T`.
    pub fn euler_characteristic(&self) -> i64 {
        self.vertices.len() as i64 - self.edges.len() as i64 + self.triangles.len() as i64
    }

    /// Red refinement: every triangle is split into four by its edge midpoints.
    ///
    /// Children of coarse triangle `t` are `4t..4t+4`; the fourth child is the
    /// central one.
    pub fn refine_uniform(&self) -> Result<Refinement<T>, MeshError> {
        let nv = self.vertices.len();
        let mut vertices = self.vertices.clone();
        vertices.extend((0..self.edges.len()).map(|e| self.edge_midpoint(e)));
        let mid = |e: usize| nv + e;
        let mut triangles = Vec::with_capacity(4 * self.triangles.len());
        let mut parent = Vec::with_capacity(4 * self.triangles.len());
        for (t, &[a, b, c]) in self.triangles.iter().enumerate() {
            // Opposite-edge midpoints.
            let [ma, mb, mc] = self.tri_edges[t].map(mid);
            triangles.push([a, mc, mb]);
            triangles.push([mc, b, ma]);
            triangles.push([mb, ma, c]);
            triangles.push([ma, mb, mc]);
            parent.extend([t; 4]);
        }
        let mut mesh = Mesh::from_parts(vertices, triangles)?;
        mesh.origin = self.origin.map(|(d, l)| (d, l + 1));
        Ok(Refinement { mesh, parent })
    }

    /// Writes the plain-text mesh format.
    ///
    /// ```text
    /// V T E B
    /// x y            (V lines)
    /// i j k          (T lines)
    /// a b t1 t2      (E lines, t2 = -1 on the boundary)
    /// e              (B lines, boundary loop order)
    /// ```
    pub fn write_text<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(
            w,
            "{} {} {} {}",
            self.vertices.len(),
            self.triangles.len(),
            self.edges.len(),
            self.boundary_edges.len()
        )?;
        for p in &self.vertices {
            writeln!(w, "{} {}", p[0], p[1])?;
        }
        for t in &self.triangles {
            writeln!(w, "{} {} {}", t[0], t[1], t[2])?;
        }
        for e in &self.edges {
            let t2 = e.second.map_or(-1, |t| t as i64);
            writeln!(w, "{} {} {} {}", e.vertices[0], e.vertices[1], e.first, t2)?;
        }
        for &b in &self.boundary_edges {
            writeln!(w, "{b}")?;
        }
        Ok(())
    }

    /// Reads the plain-text mesh format and checks the stored edge and boundary
    /// tables against the topology rebuilt from the triangles.
    pub fn read_text<R: BufRead>(r: R) -> Result<Self, MeshError> {
        let mut lines = r.lines().enumerate().filter_map(|(i, l)| match l {
            Ok(l) if l.trim().is_empty() => None,
            other => Some((i + 1, other)),
        });
        let mut next = |what: &str| -> Result<(usize, Vec<String>), MeshError> {
            let (no, line) = lines.next().ok_or_else(|| MeshError::Parse {
                line: 0,
                msg: format!("unexpected end of file, expected {what}"),
            })?;
            Ok((no, line?.split_whitespace().map(str::to_owned).collect()))
        };
        fn field<V: FromStr>(no: usize, toks: &[String], k: usize) -> Result<V, MeshError> {
            toks.get(k)
                .ok_or_else(|| MeshError::Parse {
                    line: no,
                    msg: format!("missing field {}", k + 1),
                })?
                .parse()
                .map_err(|_| MeshError::Parse {
                    line: no,
                    msg: format!("cannot parse `{}`", toks[k]),
                })
        }
        let (no, head) = next("header")?;
        let nv: usize = field(no, &head, 0)?;
        let nt: usize = field(no, &head, 1)?;
        let ne: usize = field(no, &head, 2)?;
        let nb: usize = field(no, &head, 3)?;
        let mut vertices = Vec::with_capacity(nv);
        for _ in 0..nv {
            let (no, t) = next("vertex")?;
            let x: f64 = field(no, &t, 0)?;
            let y: f64 = field(no, &t, 1)?;
            vertices.push([T::lit(x), T::lit(y)]);
        }
        let mut triangles = Vec::with_capacity(nt);
        for _ in 0..nt {
            let (no, t) = next("triangle")?;
            triangles.push([field(no, &t, 0)?, field(no, &t, 1)?, field(no, &t, 2)?]);
        }
        let mut edges = Vec::with_capacity(ne);
        for _ in 0..ne {
            let (no, t) = next("edge")?;
            let a: usize = field(no, &t, 0)?;
            let b: usize = field(no, &t, 1)?;
            let t1: usize = field(no, &t, 2)?;
            let t2: i64 = field(no, &t, 3)?;
            edges.push(Edge {
                vertices: [a, b],
                first: t1,
                second: (t2 >= 0).then_some(t2 as usize),
            });
        }
        let mut boundary: Vec<usize> = Vec::with_capacity(nb);
        for _ in 0..nb {
            let (no, t) = next("boundary edge")?;
            boundary.push(field(no, &t, 0)?);
        }
        let mesh = Mesh::from_parts(vertices, triangles)?;
        if mesh.edges != edges {
            return Err(MeshError::Inconsistent("edge table".into()));
        }
        if mesh.boundary_edges != boundary {
            return Err(MeshError::Inconsistent("boundary loop".into()));
        }
        Ok(mesh)
    }
}

/// Generates the uniform mesh of `domain` at `level` with the default element budget.
pub fn generate<T: Scalar>(domain: DomainId, level: u32) -> Result<Mesh<T>, MeshError> {
    generate_with_budget(domain, level, DEFAULT_ELEMENT_BUDGET)
}

/// Generates the uniform mesh of `domain` at `level`.
///
/// Square-based domains use a grid of spacing `2^-(level+1)` with every cell
/// split along its lower-left to upper-right diagonal; the equilateral
/// triangle is split into `4^(level+1)` congruent subtriangles.
pub fn generate_with_budget<T: Scalar>(
    domain: DomainId,
    level: u32,
    budget: usize,
) -> Result<Mesh<T>, MeshError> {
    if level < 1 {
        return Err(MeshError::InvalidLevel(level));
    }
    let triangles = domain
        .triangle_count(level)
        .filter(|&t| t <= budget)
        .ok_or(MeshError::BudgetExceeded {
            level,
            triangles: domain.triangle_count(level).unwrap_or(usize::MAX),
            budget,
        })?;
    let n = 1usize << (level + 1);
    let cells = match domain {
        DomainId::UnitSquare => grid_triangles(n, |_, _| CellKind::Full),
        DomainId::LShape => grid_triangles(n, |i, j| {
            if i >= n / 2 && j >= n / 2 {
                CellKind::Empty
            } else {
                CellKind::Full
            }
        }),
        DomainId::RightTriangle => grid_triangles(n, |i, j| match (i + j).cmp(&(n - 1)) {
            std::cmp::Ordering::Less => CellKind::Full,
            std::cmp::Ordering::Equal => CellKind::LowerLeft,
            std::cmp::Ordering::Greater => CellKind::Empty,
        }),
        DomainId::EquilateralTriangle => lattice_triangles(n),
    };
    debug_assert_eq!(cells.len(), triangles);

    // Number used grid points row by row (j, then i) and convert once.
    let mut used = vec![false; (n + 1) * (n + 1)];
    for tri in &cells {
        for &(i, j) in tri {
            used[j * (n + 1) + i] = true;
        }
    }
    let mut id = vec![usize::MAX; (n + 1) * (n + 1)];
    let mut vertices = Vec::new();
    let nf = T::from_usize_lossy(n);
    let sqrt3 = T::lit(3.0).sqrt();
    for j in 0..=n {
        for i in 0..=n {
            let k = j * (n + 1) + i;
            if !used[k] {
                continue;
            }
            id[k] = vertices.len();
            let (fi, fj) = (T::from_usize_lossy(i), T::from_usize_lossy(j));
            let p = match domain {
                DomainId::EquilateralTriangle => {
                    let two_n = nf + nf;
                    [(fi + fi + fj) / two_n, fj * sqrt3 / two_n]
                }
                _ => [fi / nf, fj / nf],
            };
            vertices.push(p);
        }
    }
    let triangles = cells
        .iter()
        .map(|tri| tri.map(|(i, j)| id[j * (n + 1) + i]))
        .collect();
    Ok(Mesh::from_parts(vertices, triangles)?.with_origin(domain, level))
}

enum CellKind {
    Full,
    LowerLeft,
    Empty,
}

fn grid_triangles(n: usize, kind: impl Fn(usize, usize) -> CellKind) -> Vec<[(usize, usize); 3]> {
    let mut out = Vec::new();
    for j in 0..n {
        for i in 0..n {
            let (p00, p10, p01, p11) = ((i, j), (i + 1, j), (i, j + 1), (i + 1, j + 1));
            match kind(i, j) {
                CellKind::Full => {
                    out.push([p00, p10, p11]);
                    out.push([p00, p11, p01]);
                }
                CellKind::LowerLeft => out.push([p00, p10, p01]),
                CellKind::Empty => {}
            }
        }
    }
    out
}

/// Triangular lattice with `n` subdivisions per side; point `(i, j)` sits at
/// `i·a + j·b` with `a = (1/n, 0)`, `b = (1/2n, √3/2n)`.
fn lattice_triangles(n: usize) -> Vec<[(usize, usize); 3]> {
    let mut out = Vec::new();
    for j in 0..n {
        for i in 0..n - j {
            out.push([(i, j), (i + 1, j), (i, j + 1)]);
            if i + j + 1 < n {
                out.push([(i + 1, j), (i + 1, j + 1), (i, j + 1)]);
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn unit_square_level_one_counts() {
        let m: Mesh<f64> = generate(DomainId::UnitSquare, 1).unwrap();
        assert_eq!(m.num_vertices(), 25);
        assert_eq!(m.num_triangles(), 32);
        assert_eq!(m.num_edges(), 56);
        assert_eq!(m.num_boundary_edges(), 16);
        assert_relative_eq!(m.h(), 2f64.sqrt() / 4.0, max_relative = 1e-15);
        assert_eq!(m.euler_characteristic(), 1);
    }

    #[test]
    fn equilateral_level_one_is_sixteen_congruent_triangles() {
        let m: Mesh<f64> = generate(DomainId::EquilateralTriangle, 1).unwrap();
        assert_eq!(m.num_triangles(), 16);
        for t in 0..16 {
            let g = m.element_geometry(t).unwrap();
            assert_relative_eq!(g.area, 3f64.sqrt() / 64.0, max_relative = 1e-14);
            assert_relative_eq!(g.diameter, 0.25, max_relative = 1e-14);
        }
        assert_relative_eq!(3f64.sqrt() / 64.0, 0.02706, epsilon = 1e-5);
    }

    #[test]
    fn boundary_lengths() {
        for level in 1..=3 {
            let sq: Mesh<f64> = generate(DomainId::UnitSquare, level).unwrap();
            assert_relative_eq!(sq.boundary_length(), 4.0, max_relative = 1e-14);
            let l: Mesh<f64> = generate(DomainId::LShape, level).unwrap();
            assert_relative_eq!(l.boundary_length(), 4.0, max_relative = 1e-14);
            let rt: Mesh<f64> = generate(DomainId::RightTriangle, level).unwrap();
            assert_relative_eq!(
                rt.boundary_length(),
                2.0 + 2f64.sqrt(),
                max_relative = 1e-14
            );
            let eq: Mesh<f64> = generate(DomainId::EquilateralTriangle, level).unwrap();
            assert_relative_eq!(eq.boundary_length(), 3.0, max_relative = 1e-14);
        }
    }

    #[test]
    fn reference_triangle_geometry() {
        let m =
            Mesh::from_parts(vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]], vec![[0, 1, 2]]).unwrap();
        let g = m.element_geometry(0).unwrap();
        assert_eq!(g.area, 0.5);
        assert_relative_eq!(g.diameter, 2f64.sqrt());
        assert!(matches!(
            m.element_geometry(1),
            Err(MeshError::InvalidTriangle { index: 1, count: 1 })
        ));
    }

    #[test]
    fn degenerate_and_clockwise_inputs_are_rejected() {
        let collinear =
            Mesh::<f64>::from_parts(vec![[0.0, 0.0], [1.0, 0.0], [2.0, 0.0]], vec![[0, 1, 2]]);
        assert!(matches!(collinear, Err(MeshError::Degenerate(0))));
        let cw = Mesh::<f64>::from_parts(vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]], vec![[0, 2, 1]]);
        assert!(matches!(cw, Err(MeshError::Clockwise(0))));
    }

    #[test]
    fn level_zero_and_budget_are_rejected() {
        assert!(matches!(
            generate::<f64>(DomainId::UnitSquare, 0),
            Err(MeshError::InvalidLevel(0))
        ));
        assert!(matches!(
            generate_with_budget::<f64>(DomainId::UnitSquare, 3, 100),
            Err(MeshError::BudgetExceeded { .. })
        ));
    }

    #[test]
    fn edges_have_one_or_two_neighbours() {
        for d in DomainId::ALL {
            let m: Mesh<f64> = generate(d, 2).unwrap();
            for (id, e) in m.edges().iter().enumerate() {
                assert!(e.vertices[0] < e.vertices[1]);
                assert_eq!(e.is_boundary(), m.boundary_slot(id).is_some());
            }
        }
    }

    #[test]
    fn boundary_loop_is_closed_and_counterclockwise() {
        for d in DomainId::ALL {
            let m: Mesh<f64> = generate(d, 2).unwrap();
            let b = m.boundary_edges();
            // consecutive edges share a vertex, and the loop closes
            for k in 0..b.len() {
                let e0 = m.edges()[b[k]].vertices;
                let e1 = m.edges()[b[(k + 1) % b.len()]].vertices;
                assert!(e0.iter().any(|v| e1.contains(v)), "{d} slot {k}");
            }
            // outward normals point away from the adjacent triangle's centroid
            for &e in b {
                let n = m.outward_normal(e);
                let mid = m.edge_midpoint(e);
                let c = m.centroid(m.edges()[e].first);
                assert!((mid[0] - c[0]) * n[0] + (mid[1] - c[1]) * n[1] > 0.0);
            }
        }
    }

    #[test]
    fn refinement_halves_edges_and_quarters_areas() {
        for d in DomainId::ALL {
            let m: Mesh<f64> = generate(d, 1).unwrap();
            let r = m.refine_uniform().unwrap();
            assert_eq!(r.mesh.num_triangles(), 4 * m.num_triangles());
            for (t, &p) in r.parent.iter().enumerate() {
                assert_relative_eq!(r.mesh.area(t) * 4.0, m.area(p), max_relative = 1e-13);
                assert_relative_eq!(
                    r.mesh.diameter(t) * 2.0,
                    m.diameter(p),
                    max_relative = 1e-13
                );
            }
            assert_eq!(r.mesh.euler_characteristic(), 1);
            assert_eq!(r.mesh.origin(), Some((d, 2)));
        }
    }

    #[test]
    fn refinement_matches_generator_geometry() {
        for d in DomainId::ALL {
            let refined = generate::<f64>(d, 1)
                .unwrap()
                .refine_uniform()
                .unwrap()
                .mesh;
            let direct: Mesh<f64> = generate(d, 2).unwrap();
            assert_eq!(refined.num_triangles(), direct.num_triangles());
            assert_eq!(refined.num_edges(), direct.num_edges());
            assert_relative_eq!(refined.h(), direct.h(), max_relative = 1e-14);
        }
    }

    #[test]
    fn text_format_round_trip() {
        let m: Mesh<f64> = generate(DomainId::LShape, 1).unwrap();
        let mut buf = Vec::new();
        m.write_text(&mut buf).unwrap();
        let back = Mesh::<f64>::read_text(&buf[..]).unwrap();
        assert_eq!(back.vertices(), m.vertices());
        assert_eq!(back.triangles(), m.triangles());
        assert_eq!(back.boundary_edges(), m.boundary_edges());
    }

    #[test]
    fn text_format_rejects_tampered_edges() {
        let m: Mesh<f64> = generate(DomainId::UnitSquare, 1).unwrap();
        let mut buf = Vec::new();
        m.write_text(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines: Vec<&str> = text.lines().collect();
        let first_edge = 1 + m.num_vertices() + m.num_triangles();
        lines.swap(first_edge, first_edge + 1);
        let tampered = lines.join("\n");
        assert!(matches!(
            Mesh::<f64>::read_text(tampered.as_bytes()),
            Err(MeshError::Inconsistent(_))
        ));
    }

    #[test]
    fn domain_names_parse() {
        for d in DomainId::ALL {
            assert_eq!(d.name().parse::<DomainId>().unwrap(), d);
        }
        assert!("circle".parse::<DomainId>().is_err());
    }
}
