//! Metric graphs embedded in the plane, with a uniform perpendicular magnetic
//! field (symmetric gauge) and Rashba spin-orbit coupling.
//!
//! Everything the spectral conditions need from the geometry is packed into
//! one unitary 2x2 matrix per edge, the transport `tau`, which combines the
//! Aharonov-Bohm phase with the spin rotation accumulated along the edge.

use std::collections::HashMap;
use std::path::Path;

use num_complex::Complex64;

use crate::edge::EdgePotential;
use crate::error::{invalid, Error, Result};
use crate::linalg::{cis, Mat2, I};

/// Tolerance for embedding consistency (lengths, unit directions).
pub const GEOMETRY_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub struct Vertex {
    pub label: String,
    pub position: [f64; 2],
    /// Coupling constant at the vertex (`epsilon = 0` is the ideal coupling).
    pub epsilon: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Edge {
    pub tail: usize,
    pub head: usize,
    pub length: f64,
    pub potential: EdgePotential,
    /// Unit vector from tail to head.
    pub direction: [f64; 2],
}

impl Edge {
    /// Builds an edge between two embedded vertices; the potential's length
    /// must match their distance.
    pub fn new(tail: usize, head: usize, potential: EdgePotential, vertices: &[Vertex]) -> Result<Self> {
        let (Some(a), Some(b)) = (vertices.get(tail), vertices.get(head)) else {
            return invalid(format!("edge ({tail}, {head}) refers to a missing vertex"));
        };
        let dx = b.position[0] - a.position[0];
        let dy = b.position[1] - a.position[1];
        let length = dx.hypot(dy);
        if length <= 0.0 {
            return invalid(format!("edge ({tail}, {head}) has zero length"));
        }
        if (potential.length() - length).abs() > GEOMETRY_TOL {
            return invalid(format!(
                "edge ({}, {}): potential length {} differs from vertex distance {}",
                a.label,
                b.label,
                potential.length(),
                length
            ));
        }
        Ok(Self {
            tail,
            head,
            length,
            potential,
            direction: [dx / length, dy / length],
        })
    }
}

/// Uniform field `B = (0, 0, strength)`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct MagneticField {
    pub strength: f64,
}

/// Transport matrix of one edge.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Transport {
    pub matrix: Mat2,
    pub edge: usize,
}

impl Transport {
    /// `|| tau^* tau - I ||` (max entry).
    pub fn unitarity_defect(&self) -> f64 {
        let d = self.matrix.adjoint() * self.matrix - Mat2::identity();
        d.iter().fold(0.0, |acc, z| acc.max(z.norm()))
    }
}

/// Constant magnetic potential `a = <A(alpha), e>` of an edge leaving `tail`
/// in the symmetric gauge `A(r) = B x r / 2`.
pub fn edge_magnetic_potential(field: MagneticField, tail: [f64; 2], direction: [f64; 2]) -> f64 {
    0.5 * field.strength * (tail[0] * direction[1] - tail[1] * direction[0])
}

/// Spin matrix of an edge direction `e`: `[[0, e2 + i e1], [e2 - i e1, 0]]`.
pub fn sigma_matrix(direction: [f64; 2]) -> Result<Mat2> {
    let [e1, e2] = direction;
    if !(e1.is_finite() && e2.is_finite()) || (e1.hypot(e2) - 1.0).abs() > GEOMETRY_TOL {
        return invalid(format!("direction ({e1}, {e2}) is not a unit vector"));
    }
    let zero = Complex64::new(0.0, 0.0);
    Ok(Mat2::new(
        zero,
        Complex64::new(e2, e1),
        Complex64::new(e2, -e1),
        zero,
    ))
}

/// `tau = e^{i a_int} (cos(k_R l) + i sin(k_R l) sigma)`.
pub fn transport_matrix(a_integral: f64, k_r: f64, length: f64, sigma: &Mat2) -> Result<Mat2> {
    let sq = sigma * sigma - Mat2::identity();
    if sq.iter().any(|z| z.norm() > 1e-10) {
        return invalid("sigma must square to the identity");
    }
    let (sin, cos) = (k_r * length).sin_cos();
    Ok((Mat2::identity() * Complex64::from(cos) + sigma * (I * sin)) * cis(a_integral))
}

/// A finite metric graph with its field, Rashba constant and gauge.
#[derive(Clone, Debug)]
pub struct GraphModel {
    vertices: Vec<Vertex>,
    edges: Vec<Edge>,
    field: MagneticField,
    k_r: f64,
    /// Per-vertex gauge function `chi`; adds `chi(head) - chi(tail)` to each
    /// edge flux integral.
    gauge: Vec<f64>,
}

impl GraphModel {
    pub fn new(vertices: Vec<Vertex>, edges: Vec<Edge>, field: MagneticField, k_r: f64) -> Result<Self> {
        if vertices.is_empty() {
            return invalid("graph has no vertices");
        }
        if !field.strength.is_finite() || !k_r.is_finite() {
            return invalid("field strength and Rashba constant must be finite");
        }
        for v in &vertices {
            if !(v.position[0].is_finite() && v.position[1].is_finite() && v.epsilon.is_finite()) {
                return invalid(format!("vertex {} has non-finite data", v.label));
            }
        }
        for (i, a) in vertices.iter().enumerate() {
            for b in &vertices[i + 1..] {
                let d = (a.position[0] - b.position[0]).hypot(a.position[1] - b.position[1]);
                if d <= GEOMETRY_TOL {
                    return invalid(format!("vertices {} and {} coincide", a.label, b.label));
                }
            }
        }
        let mut degree = vec![0usize; vertices.len()];
        for e in &edges {
            if e.tail >= vertices.len() || e.head >= vertices.len() {
                return invalid("edge refers to a missing vertex");
            }
            let d = (vertices[e.head].position[0] - vertices[e.tail].position[0])
                .hypot(vertices[e.head].position[1] - vertices[e.tail].position[1]);
            if (d - e.length).abs() > GEOMETRY_TOL || (e.potential.length() - e.length).abs() > GEOMETRY_TOL {
                return invalid(format!("edge ({}, {}) is inconsistent with the embedding", e.tail, e.head));
            }
            degree[e.tail] += 1;
            degree[e.head] += 1;
        }
        if let Some(k) = degree.iter().position(|&d| d == 0) {
            return invalid(format!("vertex {} is isolated", vertices[k].label));
        }
        let gauge = vec![0.0; vertices.len()];
        Ok(Self {
            vertices,
            edges,
            field,
            k_r,
            gauge,
        })
    }

    /// The same graph after the gauge change `A -> A + grad chi`.
    pub fn with_gauge(mut self, chi: Vec<f64>) -> Result<Self> {
        if chi.len() != self.vertices.len() || chi.iter().any(|x| !x.is_finite()) {
            return invalid("gauge needs one finite value per vertex");
        }
        self.gauge = chi;
        Ok(self)
    }

    /// Replaces the vertex couplings.
    pub fn with_couplings(mut self, eps: &[f64]) -> Result<Self> {
        if eps.len() != self.vertices.len() || eps.iter().any(|x| !x.is_finite()) {
            return invalid("need one finite coupling per vertex");
        }
        for (v, &e) in self.vertices.iter_mut().zip(eps) {
            v.epsilon = e;
        }
        Ok(self)
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn field(&self) -> MagneticField {
        self.field
    }

    pub fn k_r(&self) -> f64 {
        self.k_r
    }

    pub fn vertex_index(&self, label: &str) -> Option<usize> {
        self.vertices.iter().position(|v| v.label == label)
    }

    /// `(outdeg, indeg)` of every vertex.
    pub fn degrees(&self) -> Vec<(usize, usize)> {
        let mut deg = vec![(0, 0); self.vertices.len()];
        for e in &self.edges {
            deg[e.tail].0 += 1;
            deg[e.head].1 += 1;
        }
        deg
    }

    /// Total flux integral `int_0^l a(s) ds` along edge `k`, gauge included.
    pub fn flux_integral(&self, k: usize) -> f64 {
        let e = &self.edges[k];
        let a = edge_magnetic_potential(self.field, self.vertices[e.tail].position, e.direction);
        a * e.length + self.gauge[e.head] - self.gauge[e.tail]
    }

    pub fn sigma(&self, k: usize) -> Mat2 {
        sigma_matrix(self.edges[k].direction).expect("edge directions are unit vectors")
    }

    pub fn transport(&self, k: usize) -> Transport {
        let e = &self.edges[k];
        let matrix = transport_matrix(self.flux_integral(k), self.k_r, e.length, &self.sigma(k))
            .expect("sigma squares to one");
        Transport { matrix, edge: k }
    }

    /// Loads the text graph format described in [`parse_graph`].
    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)?;
        parse_graph(&text, &path.display().to_string(), path.parent())
    }
}

/// Incremental construction of a [`GraphModel`].
#[derive(Debug, Default)]
pub struct GraphBuilder {
    vertices: Vec<Vertex>,
    edges: Vec<(usize, usize, Option<EdgePotential>)>,
    field: MagneticField,
    k_r: f64,
}

impl GraphBuilder {
    pub fn new(field: f64, k_r: f64) -> Self {
        Self {
            field: MagneticField { strength: field },
            k_r,
            ..Self::default()
        }
    }

    pub fn vertex(&mut self, x: f64, y: f64, epsilon: f64) -> usize {
        let label = self.vertices.len().to_string();
        self.labeled_vertex(label, x, y, epsilon)
    }

    pub fn labeled_vertex(&mut self, label: impl Into<String>, x: f64, y: f64, epsilon: f64) -> usize {
        self.vertices.push(Vertex {
            label: label.into(),
            position: [x, y],
            epsilon,
        });
        self.vertices.len() - 1
    }

    /// Edge with zero potential.
    pub fn edge(&mut self, tail: usize, head: usize) -> &mut Self {
        self.edges.push((tail, head, None));
        self
    }

    pub fn edge_with_potential(&mut self, tail: usize, head: usize, potential: EdgePotential) -> &mut Self {
        self.edges.push((tail, head, Some(potential)));
        self
    }

    pub fn build(self) -> Result<GraphModel> {
        let mut edges = Vec::with_capacity(self.edges.len());
        for (tail, head, pot) in self.edges {
            let (Some(a), Some(b)) = (self.vertices.get(tail), self.vertices.get(head)) else {
                return invalid(format!("edge ({tail}, {head}) refers to a missing vertex"));
            };
            let pot = match pot {
                Some(p) => p,
                None => EdgePotential::zero((b.position[0] - a.position[0]).hypot(b.position[1] - a.position[1]))?,
            };
            edges.push(Edge::new(tail, head, pot, &self.vertices)?);
        }
        GraphModel::new(self.vertices, edges, self.field, self.k_r)
    }
}

/// Parses the line-oriented graph description:
///
/// ```text
/// # comment
/// B   <field strength>            (optional, default 0)
/// k_R <Rashba constant>           (optional, default 0)
/// vertex <id> <x> <y> <epsilon>
/// edge <tail-id> <head-id> [zero | const=<u0> | <potential file>]
/// ```
///
/// Potential files use the two-column `t value` format and are resolved
/// relative to `base_dir`. Duplicate vertex ids and edges whose potential
/// length differs from the vertex distance by more than `1e-9` are rejected.
pub fn parse_graph(text: &str, origin: &str, base_dir: Option<&Path>) -> Result<GraphModel> {
    let mut builder = GraphBuilder::new(0.0, 0.0);
    let mut ids: HashMap<String, usize> = HashMap::new();
    let err = |line: usize, msg: String| Error::Parse {
        path: origin.to_string(),
        line,
        msg,
    };
    let num = |line: usize, tok: &str| -> Result<f64> {
        tok.parse::<f64>()
            .map_err(|e| err(line, format!("bad number {tok:?}: {e}")))
    };
    for (no, raw) in text.lines().enumerate() {
        let line_no = no + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let toks: Vec<&str> = line.split_whitespace().collect();
        match toks.as_slice() {
            ["B", v] => builder.field.strength = num(line_no, v)?,
            ["k_R", v] => builder.k_r = num(line_no, v)?,
            ["vertex", id, x, y, eps] => {
                if ids.contains_key(*id) {
                    return Err(err(line_no, format!("duplicate vertex id {id:?}")));
                }
                let k = builder.labeled_vertex(*id, num(line_no, x)?, num(line_no, y)?, num(line_no, eps)?);
                ids.insert(id.to_string(), k);
            }
            ["edge", tail, head, rest @ ..] => {
                let lookup = |id: &str| {
                    ids.get(id)
                        .copied()
                        .ok_or_else(|| err(line_no, format!("unknown vertex id {id:?}")))
                };
                let (t, h) = (lookup(tail)?, lookup(head)?);
                let a = builder.vertices[t].position;
                let b = builder.vertices[h].position;
                let dist = (b[0] - a[0]).hypot(b[1] - a[1]);
                let pot = match rest {
                    [] | ["zero"] => EdgePotential::zero(dist),
                    [spec] if spec.starts_with("const=") => EdgePotential::constant(num(line_no, &spec[6..])?, dist),
                    [file] => {
                        let p = base_dir.map_or_else(|| Path::new(file).to_path_buf(), |d| d.join(file));
                        EdgePotential::from_file(&p)
                    }
                    _ => return Err(err(line_no, format!("malformed edge record {line:?}"))),
                }
                .map_err(|e| err(line_no, e.to_string()))?;
                if (pot.length() - dist).abs() > GEOMETRY_TOL {
                    return Err(err(
                        line_no,
                        format!("potential length {} differs from vertex distance {dist}", pot.length()),
                    ));
                }
                builder.edge_with_potential(t, h, pot);
            }
            _ => return Err(err(line_no, format!("unrecognised record {line:?}"))),
        }
    }
    builder.build()
}
