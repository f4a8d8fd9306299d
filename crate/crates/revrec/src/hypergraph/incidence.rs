//! Sparse incidence assembly: vertex interning, weighted degrees, and the
//! normalized adjacency `A = Dv^{-1/2} H W De^{-1} H^T Dv^{-1/2}`.
//!
//! `A` is assembled edge by edge: a hyperedge `e` contributes
//! `w(e) / (delta(e) * sqrt(d(u)) * sqrt(d(v)))` to every ordered member pair
//! `(u, v)`. Contributions are accumulated once per unordered pair and
//! mirrored, so the stored matrix is exactly symmetric. Zero-weight edges are
//! kept in the edge list (stable vertex enumeration) but skipped here, and
//! zero-degree vertices get empty rows.

use std::collections::{BTreeMap, HashMap};

use super::{EdgeSpec, Hyperedge, IncidenceSystem, PrProfile, Vertex};

/// Compressed sparse row matrix, square, with mirrored symmetric storage.
#[derive(Debug, Clone, Default)]
pub struct CsrMatrix {
    n: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl CsrMatrix {
    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// Build from upper-triangle entries (`row <= col`), mirroring
    /// off-diagonal values.
    pub fn from_upper_triangle(n: usize, upper: &BTreeMap<(usize, usize), f64>) -> Self {
        let mut row_counts = vec![0usize; n];
        for &(u, v) in upper.keys() {
            debug_assert!(u <= v && v < n);
            row_counts[u] += 1;
            if u != v {
                row_counts[v] += 1;
            }
        }
        let mut row_ptr = vec![0usize; n + 1];
        for i in 0..n {
            row_ptr[i + 1] = row_ptr[i] + row_counts[i];
        }
        let nnz = row_ptr[n];
        let mut col_idx = vec![0usize; nnz];
        let mut values = vec![0.0f64; nnz];
        let mut cursor = row_ptr.clone();
        for (&(u, v), &val) in upper.iter() {
            col_idx[cursor[u]] = v;
            values[cursor[u]] = val;
            cursor[u] += 1;
            if u != v {
                col_idx[cursor[v]] = u;
                values[cursor[v]] = val;
                cursor[v] += 1;
            }
        }
        // Rows were filled in ascending (u, v) order, but the mirrored
        // entries land out of order; sort each row by column.
        let mut matrix = CsrMatrix {
            n,
            row_ptr,
            col_idx,
            values,
        };
        matrix.sort_rows();
        matrix
    }

    fn sort_rows(&mut self) {
        for row in 0..self.n {
            let lo = self.row_ptr[row];
            let hi = self.row_ptr[row + 1];
            let mut entries: Vec<(usize, f64)> = (lo..hi)
                .map(|k| (self.col_idx[k], self.values[k]))
                .collect();
            entries.sort_by_key(|&(c, _)| c);
            for (offset, (c, v)) in entries.into_iter().enumerate() {
                self.col_idx[lo + offset] = c;
                self.values[lo + offset] = v;
            }
        }
    }

    /// `y = A x`.
    pub fn apply(&self, x: &[f64], y: &mut [f64]) {
        debug_assert_eq!(x.len(), self.n);
        debug_assert_eq!(y.len(), self.n);
        for (row, out) in y.iter_mut().enumerate() {
            let mut acc = 0.0;
            for k in self.row_ptr[row]..self.row_ptr[row + 1] {
                acc += self.values[k] * x[self.col_idx[k]];
            }
            *out = acc;
        }
    }

    pub fn row(&self, row: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        (self.row_ptr[row]..self.row_ptr[row + 1]).map(|k| (self.col_idx[k], self.values[k]))
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut dense = vec![vec![0.0; self.n]; self.n];
        for (row, dense_row) in dense.iter_mut().enumerate() {
            for (col, val) in self.row(row) {
                dense_row[col] = val;
            }
        }
        dense
    }

    /// Largest-eigenvalue estimate by power iteration with Rayleigh
    /// quotients. For a symmetric matrix the quotient never exceeds the true
    /// spectral radius.
    pub fn spectral_radius_estimate(&self, iterations: usize) -> f64 {
        if self.n == 0 || self.nnz() == 0 {
            return 0.0;
        }
        let mut x = vec![1.0 / (self.n as f64).sqrt(); self.n];
        let mut y = vec![0.0; self.n];
        let mut estimate = 0.0;
        for _ in 0..iterations {
            self.apply(&x, &mut y);
            let norm = y.iter().map(|v| v * v).sum::<f64>().sqrt();
            if norm == 0.0 {
                return 0.0;
            }
            for (xi, yi) in x.iter_mut().zip(y.iter()) {
                *xi = yi / norm;
            }
            self.apply(&x, &mut y);
            estimate = x.iter().zip(y.iter()).map(|(a, b)| a * b).sum::<f64>();
        }
        estimate
    }
}

/// Intern vertices, compute weighted degrees, and assemble the normalized
/// adjacency for a fixed edge list. The vertex order is first appearance
/// across edge member lists; edge order is the spec order. `isolated` pins
/// extra vertices into the system even when no edge touches them.
pub fn assemble_system(
    window: (i64, i64),
    pr_profiles: Vec<PrProfile>,
    specs: Vec<EdgeSpec>,
    isolated: Vec<Vertex>,
) -> IncidenceSystem {
    let mut vertices: Vec<Vertex> = Vec::new();
    let mut vertex_index: HashMap<Vertex, usize> = HashMap::new();
    let mut edges: Vec<Hyperedge> = Vec::with_capacity(specs.len());

    for (edge_id, spec) in specs.into_iter().enumerate() {
        let mut members: Vec<usize> = spec
            .members
            .into_iter()
            .map(|vertex| {
                *vertex_index.entry(vertex.clone()).or_insert_with(|| {
                    vertices.push(vertex);
                    vertices.len() - 1
                })
            })
            .collect();
        members.sort_unstable();
        members.dedup();
        edges.push(Hyperedge {
            edge_id,
            kind: spec.kind,
            members,
            weight: spec.weight,
            latest_event: spec.latest_event,
        });
    }

    for vertex in isolated {
        vertex_index.entry(vertex.clone()).or_insert_with(|| {
            vertices.push(vertex);
            vertices.len() - 1
        });
    }

    let n = vertices.len();
    let mut degree = vec![0.0f64; n];
    for edge in &edges {
        for &v in &edge.members {
            degree[v] += edge.weight;
        }
    }
    let inv_sqrt_degree: Vec<f64> = degree
        .iter()
        .map(|&d| if d > 0.0 { 1.0 / d.sqrt() } else { 0.0 })
        .collect();

    let mut upper: BTreeMap<(usize, usize), f64> = BTreeMap::new();
    for edge in &edges {
        if edge.weight <= 0.0 {
            continue;
        }
        let base = edge.weight / edge.members.len() as f64;
        for (i, &u) in edge.members.iter().enumerate() {
            for &v in &edge.members[i..] {
                // members are sorted, so u <= v
                let contribution = base * inv_sqrt_degree[u] * inv_sqrt_degree[v];
                *upper.entry((u, v)).or_insert(0.0) += contribution;
            }
        }
    }
    let adjacency = CsrMatrix::from_upper_triangle(n, &upper);

    let pr_vertex_of: HashMap<String, usize> = vertices
        .iter()
        .enumerate()
        .filter_map(|(i, v)| match v {
            Vertex::Pr(id) => Some((id.clone(), i)),
            Vertex::Dev(..) => None,
        })
        .collect();

    IncidenceSystem {
        vertices,
        vertex_index,
        pr_vertex_of,
        edges,
        degree,
        adjacency,
        pr_profiles,
        window,
    }
}
