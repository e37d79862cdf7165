//! Uniform finite-difference grids on intervals and rectangles.
//!
//! The discrete Dirichlet energy is assembled cell by cell from forward edge
//! differences. In 1D a cell is a single edge; in 2D every grid square is
//! split into a lower-left and an upper-right right triangle whose gradient is
//! given exactly by one x-edge and one y-edge difference. For `p = 2` this is
//! the standard five-point stencil; for other `p` it keeps `|∇v|` isotropic.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeshSpec {
    pub dimension: usize,
    pub extents: Vec<f64>,
    pub nodes: Vec<usize>,
}

impl MeshSpec {
    pub fn interval(length: f64, nodes: usize) -> Self {
        MeshSpec {
            dimension: 1,
            extents: vec![length],
            nodes: vec![nodes],
        }
    }

    pub fn rectangle(lx: f64, ly: f64, nx: usize, ny: usize) -> Self {
        MeshSpec {
            dimension: 2,
            extents: vec![lx, ly],
            nodes: vec![nx, ny],
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.dimension != 1 && self.dimension != 2 {
            return Err(Error::InvalidMesh(format!(
                "dimension must be 1 or 2, got {}",
                self.dimension
            )));
        }
        if self.extents.len() != self.dimension || self.nodes.len() != self.dimension {
            return Err(Error::InvalidMesh("extents and nodes need one entry per axis".into()));
        }
        for (&l, &n) in self.extents.iter().zip(&self.nodes) {
            if !(l.is_finite() && l > 0.0) {
                return Err(Error::InvalidMesh(format!("extent {l} is not positive")));
            }
            if n < 3 {
                return Err(Error::InvalidMesh(format!("need at least 3 nodes per axis, got {n}")));
            }
        }
        Ok(())
    }
}

/// Directed grid edge `tail -> head` along one axis.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Edge {
    pub tail: usize,
    pub head: usize,
    pub axis: usize,
}

/// Integration cell for the gradient term: its edge differences form the
/// gradient vector on the cell.
#[derive(Clone, Debug)]
pub struct GradCell {
    pub edges: [usize; 2],
    pub len: usize,
    pub measure: f64,
}

#[derive(Clone, Debug)]
pub struct Mesh {
    spec: MeshSpec,
    shape: [usize; 2],
    spacing: [f64; 2],
    coords: Vec<[f64; 2]>,
    boundary: Vec<bool>,
    weights: Vec<f64>,
    edges: Vec<Edge>,
    cells: Vec<GradCell>,
}

pub fn build_mesh(spec: &MeshSpec) -> Result<Mesh> {
    spec.validate()?;
    let nx = spec.nodes[0];
    let ny = if spec.dimension == 2 { spec.nodes[1] } else { 1 };
    let hx = spec.extents[0] / (nx - 1) as f64;
    let hy = if spec.dimension == 2 {
        spec.extents[1] / (ny - 1) as f64
    } else {
        1.0
    };

    let trapezoid = |i: usize, n: usize, h: f64| {
        if i == 0 || i == n - 1 {
            0.5 * h
        } else {
            h
        }
    };

    let mut coords = Vec::with_capacity(nx * ny);
    let mut boundary = Vec::with_capacity(nx * ny);
    let mut weights = Vec::with_capacity(nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            let on_x = i == 0 || i == nx - 1;
            if spec.dimension == 1 {
                coords.push([i as f64 * hx, 0.0]);
                boundary.push(on_x);
                weights.push(trapezoid(i, nx, hx));
            } else {
                let on_y = j == 0 || j == ny - 1;
                coords.push([i as f64 * hx, j as f64 * hy]);
                boundary.push(on_x || on_y);
                weights.push(trapezoid(i, nx, hx) * trapezoid(j, ny, hy));
            }
        }
    }

    let idx = |i: usize, j: usize| j * nx + i;
    let mut edges = Vec::new();
    let mut cells = Vec::new();
    if spec.dimension == 1 {
        for i in 0..nx - 1 {
            edges.push(Edge {
                tail: i,
                head: i + 1,
                axis: 0,
            });
            cells.push(GradCell {
                edges: [i, 0],
                len: 1,
                measure: hx,
            });
        }
    } else {
        // x-edges first, then y-edges; both row-major.
        let x_edge = |i: usize, j: usize| j * (nx - 1) + i;
        let n_x_edges = (nx - 1) * ny;
        let y_edge = |i: usize, j: usize| n_x_edges + j * nx + i;
        for j in 0..ny {
            for i in 0..nx - 1 {
                edges.push(Edge {
                    tail: idx(i, j),
                    head: idx(i + 1, j),
                    axis: 0,
                });
            }
        }
        for j in 0..ny - 1 {
            for i in 0..nx {
                edges.push(Edge {
                    tail: idx(i, j),
                    head: idx(i, j + 1),
                    axis: 1,
                });
            }
        }
        let half = 0.5 * hx * hy;
        for j in 0..ny - 1 {
            for i in 0..nx - 1 {
                cells.push(GradCell {
                    edges: [x_edge(i, j), y_edge(i, j)],
                    len: 2,
                    measure: half,
                });
                cells.push(GradCell {
                    edges: [x_edge(i, j + 1), y_edge(i + 1, j)],
                    len: 2,
                    measure: half,
                });
            }
        }
    }

    Ok(Mesh {
        spec: spec.clone(),
        shape: [nx, ny],
        spacing: [hx, hy],
        coords,
        boundary,
        weights,
        edges,
        cells,
    })
}

impl Mesh {
    pub fn spec(&self) -> &MeshSpec {
        &self.spec
    }

    pub fn dimension(&self) -> usize {
        self.spec.dimension
    }

    pub fn len(&self) -> usize {
        self.coords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    /// Nodes per axis; the second entry is 1 for intervals.
    pub fn shape(&self) -> [usize; 2] {
        self.shape
    }

    pub fn spacing(&self) -> &[f64] {
        &self.spacing[..self.spec.dimension]
    }

    pub fn coords(&self) -> &[[f64; 2]] {
        &self.coords
    }

    pub fn boundary(&self) -> &[bool] {
        &self.boundary
    }

    pub fn is_boundary(&self, node: usize) -> bool {
        self.boundary[node]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn cells(&self) -> &[GradCell] {
        &self.cells
    }

    pub fn measure(&self) -> f64 {
        self.spec.extents.iter().product()
    }

    /// Half-bandwidth of node couplings under the row-major numbering.
    pub fn bandwidth(&self) -> usize {
        if self.spec.dimension == 1 {
            1
        } else {
            self.shape[0]
        }
    }

    pub fn zero_field(&self) -> Field {
        Field(vec![0.0; self.len()])
    }

    /// Samples `f` at interior nodes; boundary values are set to zero.
    pub fn field_from_fn(&self, f: impl Fn(f64, f64) -> f64) -> Field {
        Field(
            self.coords
                .iter()
                .zip(&self.boundary)
                .map(|(c, &b)| if b { 0.0 } else { f(c[0], c[1]) })
                .collect(),
        )
    }

    /// Wraps nodal values, checking length and the Dirichlet condition.
    pub fn field(&self, values: Vec<f64>) -> Result<Field> {
        self.check_len(values.len())?;
        if let Some(node) = values.iter().zip(&self.boundary).position(|(&v, &b)| b && v != 0.0) {
            return Err(Error::FieldShape(format!(
                "boundary node {node} has nonzero value {}",
                values[node]
            )));
        }
        Ok(Field(values))
    }

    /// Wraps nodal values, forcing boundary entries to zero.
    pub fn field_masked(&self, mut values: Vec<f64>) -> Result<Field> {
        self.check_len(values.len())?;
        self.mask(&mut values);
        Ok(Field(values))
    }

    pub(crate) fn mask(&self, values: &mut [f64]) {
        for (v, &b) in values.iter_mut().zip(&self.boundary) {
            if b {
                *v = 0.0;
            }
        }
    }

    pub fn check_field(&self, v: &Field) -> Result<()> {
        self.check_len(v.len())
    }

    fn check_len(&self, n: usize) -> Result<()> {
        if n != self.len() {
            return Err(Error::FieldShape(format!(
                "expected {} nodal values, got {n}",
                self.len()
            )));
        }
        Ok(())
    }
}

/// Nodal values on a mesh, zero on the Dirichlet boundary.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Field(Vec<f64>);

impl Field {
    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn into_values(self) -> Vec<f64> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn scaled(&self, c: f64) -> Field {
        Field(self.0.iter().map(|x| c * x).collect())
    }

    /// `self + c * other`
    pub fn axpy(&self, c: f64, other: &Field) -> Field {
        Field(self.0.iter().zip(&other.0).map(|(a, b)| a + c * b).collect())
    }

    pub fn sub(&self, other: &Field) -> Field {
        self.axpy(-1.0, other)
    }

    pub fn dot(&self, other: &Field) -> f64 {
        self.0.iter().zip(&other.0).map(|(a, b)| a * b).sum()
    }

    pub fn sup_norm(&self) -> f64 {
        self.0.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    pub fn min_value(&self) -> f64 {
        self.0.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&x| x == 0.0)
    }

    pub(crate) fn from_raw(values: Vec<f64>) -> Field {
        Field(values)
    }
}

impl std::ops::Index<usize> for Field {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

/// Forward difference on every edge, in units of 1/length.
pub fn gradient(mesh: &Mesh, v: &Field) -> Result<Vec<f64>> {
    mesh.check_field(v)?;
    let h = mesh.spacing;
    Ok(mesh.edges.iter().map(|e| (v[e.head] - v[e.tail]) / h[e.axis]).collect())
}

pub fn integrate_power(mesh: &Mesh, v: &Field, q: f64) -> Result<f64> {
    if !(q >= 1.0) {
        return Err(Error::InvalidArgument(format!("power {q} is below 1")));
    }
    mesh.check_field(v)?;
    Ok(power_sum(mesh, v, q))
}

pub(crate) fn power_sum(mesh: &Mesh, v: &Field, q: f64) -> f64 {
    v.values()
        .iter()
        .zip(&mesh.weights)
        .map(|(x, w)| w * x.abs().powf(q))
        .sum()
}

/// `(1/p) ∫ |∇v|^p` over the gradient cells.
pub fn dirichlet_p_energy(mesh: &Mesh, v: &Field, p: f64) -> Result<f64> {
    check_p(p)?;
    let g = gradient(mesh, v)?;
    Ok(cell_energy(mesh, &g, p))
}

pub(crate) fn cell_energy(mesh: &Mesh, grad: &[f64], p: f64) -> f64 {
    mesh.cells
        .iter()
        .map(|c| {
            let sq: f64 = c.edges[..c.len].iter().map(|&e| grad[e] * grad[e]).sum();
            c.measure * sq.powf(0.5 * p)
        })
        .sum::<f64>()
        / p
}

pub(crate) fn check_p(p: f64) -> Result<()> {
    if !(p > 1.0) {
        return Err(Error::InvalidArgument(format!("p = {p} must exceed 1")));
    }
    Ok(())
}

pub fn w1p_norm(mesh: &Mesh, v: &Field, p: f64) -> Result<f64> {
    Ok((p * dirichlet_p_energy(mesh, v, p)?).powf(1.0 / p))
}

pub fn project_sphere(mesh: &Mesh, v: &Field, p: f64) -> Result<Field> {
    let n = w1p_norm(mesh, v, p)?;
    if n == 0.0 || !n.is_finite() {
        return Err(Error::Degenerate("cannot normalize the zero field".into()));
    }
    Ok(v.scaled(1.0 / n))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Rectify {
    Absolute,
    PositivePart,
}

pub fn rectify(v: &Field, mode: Rectify) -> Field {
    let f: fn(f64) -> f64 = match mode {
        Rectify::Absolute => f64::abs,
        Rectify::PositivePart => |x| x.max(0.0),
    };
    Field(v.0.iter().map(|&x| f(x)).collect())
}
