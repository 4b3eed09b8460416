//! P1 triangulations of star-shaped domains in the conformal chart, and the
//! line-oriented mesh text format:
//!
//! ```text
//! # comment
//! v <x> <y>        node
//! t <i> <j> <k>    triangle, 0-based, counterclockwise
//! b <i> <j>        boundary edge, traversed counterclockwise
//! ```

use std::collections::BTreeMap;
use std::f64::consts::TAU;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::fem2d::domain::{conformal_factor, DomainSpec};

#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    pub nodes: Vec<[f64; 2]>,
    pub triangles: Vec<[usize; 3]>,
    pub boundary_edges: Vec<[usize; 2]>,
    pub k: f64,
    /// Conformal factor at each node.
    pub lambda: Vec<f64>,
}

/// Summary of a mesh's topology and size.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct MeshStats {
    pub vertices: usize,
    pub edges: usize,
    pub triangles: usize,
    pub boundary_edges: usize,
    pub euler: i64,
    pub max_edge: f64,
    pub min_area: f64,
}

/// Twice the signed area of `(a, b, c)`.
pub(crate) fn cross(a: [f64; 2], b: [f64; 2], c: [f64; 2]) -> f64 {
    (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
}

fn dist(a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

impl Mesh {
    /// Mapped-polar ring triangulation: a center node and rings at
    /// `(i / N) ρ(θ_j)`, with ring sizes growing linearly in `i`. Spacings
    /// shrink until every edge is at most `h`.
    pub fn generate(spec: &DomainSpec) -> Result<Mesh> {
        let h = spec.h;
        let rho_max = (0..720)
            .map(|j| spec.chart_polar(TAU * j as f64 / 720.0)[0])
            .fold(0.0, f64::max);
        let perimeter = spec.chart_perimeter();
        let mut alpha = 0.7;
        for _ in 0..30 {
            let step = alpha * h;
            let rings = ((rho_max / step).ceil() as usize).max(2);
            let outer = (6 * rings).max((perimeter / step).ceil() as usize);
            let mesh = ring_mesh(spec, rings, outer)?;
            if mesh.max_edge_length() <= h {
                return Ok(mesh);
            }
            alpha *= 0.85;
        }
        Err(Error::Domain(format!(
            "could not meet edge bound h = {h} for this domain"
        )))
    }

    /// Builds and validates a mesh from raw parts.
    pub fn from_parts(
        nodes: Vec<[f64; 2]>,
        triangles: Vec<[usize; 3]>,
        boundary_edges: Vec<[usize; 2]>,
        k: f64,
    ) -> Result<Mesh> {
        let lambda = nodes.iter().map(|&p| conformal_factor(k, p)).collect();
        let mesh = Mesh {
            nodes,
            triangles,
            boundary_edges,
            k,
            lambda,
        };
        mesh.validate()?;
        Ok(mesh)
    }

    /// Checks orientation, non-degeneracy, the boundary loop and the Euler
    /// characteristic of a disk.
    pub fn validate(&self) -> Result<()> {
        let nv = self.nodes.len();
        for (i, t) in self.triangles.iter().enumerate() {
            if t.iter().any(|&v| v >= nv) {
                return Err(Error::Domain(format!("triangle {i} references a missing node")));
            }
            let a = 0.5 * cross(self.nodes[t[0]], self.nodes[t[1]], self.nodes[t[2]]);
            if !(a > 1e-14) {
                return Err(Error::Domain(format!(
                    "triangle {i} is degenerate or clockwise (area {a:e})"
                )));
            }
        }
        // edge -> (count, directed occurrence)
        let mut edges: BTreeMap<(usize, usize), (usize, (usize, usize))> = BTreeMap::new();
        for t in &self.triangles {
            for e in 0..3 {
                let (a, b) = (t[e], t[(e + 1) % 3]);
                let key = (a.min(b), a.max(b));
                let entry = edges.entry(key).or_insert((0, (a, b)));
                entry.0 += 1;
            }
        }
        if edges.values().any(|&(c, _)| c > 2) {
            return Err(Error::Domain("an edge is shared by more than two triangles".into()));
        }
        let mut free: BTreeMap<usize, usize> = BTreeMap::new();
        for &(count, (a, b)) in edges.values() {
            if count == 1 {
                free.insert(a, b);
            }
        }
        if free.len() != self.boundary_edges.len() {
            return Err(Error::Domain(format!(
                "{} boundary edges listed but the triangulation has {}",
                self.boundary_edges.len(),
                free.len()
            )));
        }
        for &[a, b] in &self.boundary_edges {
            if free.get(&a) != Some(&b) {
                return Err(Error::Domain(format!(
                    "boundary edge ({a}, {b}) is not a counterclockwise free edge"
                )));
            }
        }
        // single closed loop
        if let Some(&[start, _]) = self.boundary_edges.first() {
            let mut v = start;
            let mut steps = 0;
            loop {
                v = free[&v];
                steps += 1;
                if v == start || steps > free.len() {
                    break;
                }
            }
            if steps != free.len() {
                return Err(Error::Domain("boundary edges do not form a single loop".into()));
            }
        } else {
            return Err(Error::Domain("mesh has no boundary".into()));
        }
        let euler = nv as i64 - edges.len() as i64 + self.triangles.len() as i64;
        if euler != 1 {
            return Err(Error::Domain(format!("V - E + F = {euler}, expected 1")));
        }
        Ok(())
    }

    pub fn stats(&self) -> MeshStats {
        let mut edges = std::collections::BTreeSet::new();
        for t in &self.triangles {
            for e in 0..3 {
                let (a, b) = (t[e], t[(e + 1) % 3]);
                edges.insert((a.min(b), a.max(b)));
            }
        }
        let min_area = self
            .triangles
            .iter()
            .map(|t| 0.5 * cross(self.nodes[t[0]], self.nodes[t[1]], self.nodes[t[2]]))
            .fold(f64::INFINITY, f64::min);
        MeshStats {
            vertices: self.nodes.len(),
            edges: edges.len(),
            triangles: self.triangles.len(),
            boundary_edges: self.boundary_edges.len(),
            euler: self.nodes.len() as i64 - edges.len() as i64 + self.triangles.len() as i64,
            max_edge: self.max_edge_length(),
            min_area,
        }
    }

    pub fn max_edge_length(&self) -> f64 {
        self.triangles
            .iter()
            .flat_map(|t| (0..3).map(move |e| dist(self.nodes[t[e]], self.nodes[t[(e + 1) % 3]])))
            .fold(0.0, f64::max)
    }

    /// Flags nodes on the boundary loop.
    pub fn boundary_flags(&self) -> Vec<bool> {
        let mut flags = vec![false; self.nodes.len()];
        for &[a, b] in &self.boundary_edges {
            flags[a] = true;
            flags[b] = true;
        }
        flags
    }

    pub fn euclidean_area(&self) -> f64 {
        self.triangles
            .iter()
            .map(|t| 0.5 * cross(self.nodes[t[0]], self.nodes[t[1]], self.nodes[t[2]]))
            .sum()
    }

    /// Riemannian area `∫ λ²` with 3-point Gauss quadrature per triangle.
    pub fn riemannian_area(&self) -> f64 {
        self.triangles
            .iter()
            .map(|t| {
                let p = [self.nodes[t[0]], self.nodes[t[1]], self.nodes[t[2]]];
                let area = 0.5 * cross(p[0], p[1], p[2]);
                GAUSS3
                    .iter()
                    .map(|bary| {
                        let lam = conformal_factor(self.k, barycentric_point(&p, bary));
                        area / 3.0 * lam * lam
                    })
                    .sum::<f64>()
            })
            .sum()
    }

    /// Serializes to the mesh text format. Coordinates use the shortest
    /// representation that parses back to the same `f64`.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            "# {} vertices, {} triangles, {} boundary edges",
            self.nodes.len(),
            self.triangles.len(),
            self.boundary_edges.len()
        );
        for p in &self.nodes {
            let _ = writeln!(s, "v {:?} {:?}", p[0], p[1]);
        }
        for t in &self.triangles {
            let _ = writeln!(s, "t {} {} {}", t[0], t[1], t[2]);
        }
        for b in &self.boundary_edges {
            let _ = writeln!(s, "b {} {}", b[0], b[1]);
        }
        s
    }

    /// Parses the mesh text format; the curvature `k` is not part of the
    /// file.
    pub fn from_text(text: &str, k: f64) -> Result<Mesh> {
        let mut nodes = Vec::new();
        let mut triangles = Vec::new();
        let mut boundary = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let mut parts = line.split_whitespace();
            let tag = parts.next().unwrap_or("");
            let rest: Vec<&str> = parts.collect();
            let bad = |what: &str| Error::Parse(format!("line {}: {what}: '{raw}'", lineno + 1));
            match tag {
                "v" => {
                    if rest.len() != 2 {
                        return Err(bad("expected 'v x y'"));
                    }
                    let x: f64 = rest[0].parse().map_err(|_| bad("bad coordinate"))?;
                    let y: f64 = rest[1].parse().map_err(|_| bad("bad coordinate"))?;
                    nodes.push([x, y]);
                }
                "t" => {
                    if rest.len() != 3 {
                        return Err(bad("expected 't i j k'"));
                    }
                    let mut t = [0usize; 3];
                    for (slot, s) in t.iter_mut().zip(&rest) {
                        *slot = s.parse().map_err(|_| bad("bad index"))?;
                    }
                    triangles.push(t);
                }
                "b" => {
                    if rest.len() != 2 {
                        return Err(bad("expected 'b i j'"));
                    }
                    let i: usize = rest[0].parse().map_err(|_| bad("bad index"))?;
                    let j: usize = rest[1].parse().map_err(|_| bad("bad index"))?;
                    boundary.push([i, j]);
                }
                _ => return Err(bad("unknown record")),
            }
        }
        Mesh::from_parts(nodes, triangles, boundary, k)
    }
}

/// Barycentric coordinates and (equal) weights of the degree-2 Gauss rule.
pub(crate) const GAUSS3: [[f64; 3]; 3] = [
    [2.0 / 3.0, 1.0 / 6.0, 1.0 / 6.0],
    [1.0 / 6.0, 2.0 / 3.0, 1.0 / 6.0],
    [1.0 / 6.0, 1.0 / 6.0, 2.0 / 3.0],
];

pub(crate) fn barycentric_point(p: &[[f64; 2]; 3], bary: &[f64; 3]) -> [f64; 2] {
    [
        bary[0] * p[0][0] + bary[1] * p[1][0] + bary[2] * p[2][0],
        bary[0] * p[0][1] + bary[1] * p[1][1] + bary[2] * p[2][1],
    ]
}

fn ring_mesh(spec: &DomainSpec, rings: usize, outer: usize) -> Result<Mesh> {
    let mut nodes = vec![[0.0, 0.0]];
    let mut ring_start = vec![0usize];
    let mut ring_size = vec![1usize];
    for i in 1..=rings {
        let m = ((outer * i) as f64 / rings as f64).ceil().max(6.0) as usize;
        let s = i as f64 / rings as f64;
        ring_start.push(nodes.len());
        ring_size.push(m);
        for j in 0..m {
            let theta = TAU * j as f64 / m as f64;
            let rho = spec.chart_polar(theta)[0];
            let r = if i == rings { rho } else { s * rho };
            nodes.push([r * theta.cos(), r * theta.sin()]);
        }
    }
    let mut triangles = Vec::new();
    // fan around the center
    let (s1, m1) = (ring_start[1], ring_size[1]);
    for j in 0..m1 {
        triangles.push([0, s1 + j, s1 + (j + 1) % m1]);
    }
    // zip consecutive rings by angle
    for i in 1..rings {
        let (si, mi) = (ring_start[i], ring_size[i]);
        let (so, mo) = (ring_start[i + 1], ring_size[i + 1]);
        let (mut a, mut b) = (0usize, 0usize);
        while a < mi || b < mo {
            let next_a = (a + 1) as f64 / mi as f64;
            let next_b = (b + 1) as f64 / mo as f64;
            let ia = si + a % mi;
            let ob = so + b % mo;
            if b < mo && (a == mi || next_b <= next_a) {
                triangles.push([ia, ob, so + (b + 1) % mo]);
                b += 1;
            } else {
                triangles.push([ia, ob, si + (a + 1) % mi]);
                a += 1;
            }
        }
    }
    let (so, mo) = (ring_start[rings], ring_size[rings]);
    let boundary = (0..mo).map(|j| [so + j, so + (j + 1) % mo]).collect();
    Mesh::from_parts(nodes, triangles, boundary, spec.k)
}
