//! Cycle graphs with arithmetic edge indexing.
//!
//! Vertices are `0..l` and edge `e_i` joins `i` and `i + 1 (mod l)`. Nothing is
//! stored besides the length; incidence is computed on demand.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Index of an edge `e_i = {i, i+1 mod l}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Edge(pub usize);

impl Edge {
    #[inline]
    pub fn index(self) -> usize {
        self.0
    }
}

impl fmt::Display for Edge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "e{}", self.0)
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("a cycle needs at least 3 vertices, got {0}")]
    TooShort(usize),
    #[error("vertex {vertex} out of range for cycle of length {len}")]
    VertexOutOfRange { vertex: usize, len: usize },
    #[error("edge {edge} out of range for cycle of length {len}")]
    EdgeOutOfRange { edge: usize, len: usize },
}

/// The cycle graph of length `l >= 3`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "usize", into = "usize")]
pub struct CycleGraph {
    len: usize,
}

impl TryFrom<usize> for CycleGraph {
    type Error = GraphError;

    fn try_from(len: usize) -> Result<Self, Self::Error> {
        CycleGraph::new(len)
    }
}

impl From<CycleGraph> for usize {
    fn from(g: CycleGraph) -> usize {
        g.len
    }
}

impl CycleGraph {
    pub fn new(len: usize) -> Result<Self, GraphError> {
        if len < 3 {
            return Err(GraphError::TooShort(len));
        }
        Ok(Self { len })
    }

    #[inline]
    #[allow(clippy::len_without_is_empty)]
    pub fn len(&self) -> usize {
        self.len
    }

    #[inline]
    pub fn is_even(&self) -> bool {
        self.len.is_multiple_of(2)
    }

    pub fn edges(&self) -> impl Iterator<Item = Edge> {
        (0..self.len).map(Edge)
    }

    #[inline]
    pub fn check_vertex(&self, v: usize) -> Result<(), GraphError> {
        if v < self.len {
            Ok(())
        } else {
            Err(GraphError::VertexOutOfRange {
                vertex: v,
                len: self.len,
            })
        }
    }

    /// The two edges at `v`, as `(e_{v-1}, e_v)`.
    pub fn incident_edges(&self, v: usize) -> Result<(Edge, Edge), GraphError> {
        self.check_vertex(v)?;
        Ok(self.incident(v))
    }

    /// Unchecked variant of [`incident_edges`](Self::incident_edges) for hot loops.
    #[inline]
    pub(crate) fn incident(&self, v: usize) -> (Edge, Edge) {
        (Edge((v + self.len - 1) % self.len), Edge(v))
    }

    /// Endpoints `(i, i+1)` of edge `e_i`.
    pub fn endpoints(&self, e: Edge) -> Result<(usize, usize), GraphError> {
        if e.0 >= self.len {
            return Err(GraphError::EdgeOutOfRange {
                edge: e.0,
                len: self.len,
            });
        }
        Ok((e.0, (e.0 + 1) % self.len))
    }

    /// Vertex reached from `v` by crossing `e`, which must be incident to `v`.
    #[inline]
    pub(crate) fn across(&self, v: usize, e: Edge) -> usize {
        if e.0 == v {
            (v + 1) % self.len
        } else {
            debug_assert_eq!((e.0 + 1) % self.len, v);
            e.0
        }
    }

    /// The edge joining `v` and `w`, if they are adjacent.
    pub fn edge_between(&self, v: usize, w: usize) -> Result<Option<Edge>, GraphError> {
        self.check_vertex(v)?;
        self.check_vertex(w)?;
        let l = self.len;
        if (v + 1) % l == w {
            Ok(Some(Edge(v)))
        } else if (w + 1) % l == v {
            Ok(Some(Edge(w)))
        } else {
            Ok(None)
        }
    }
}
