use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum MeshError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("unsupported mesh format `{0}` (expected .obj or .off)")]
    Format(String),
    #[error("mesh has no triangles")]
    Empty,
    #[error("triangle {tri} references node {node} but only {count} nodes exist")]
    BadIndex { tri: usize, node: usize, count: usize },
    #[error("degenerate triangle {0}")]
    Degenerate(usize),
    #[error("non-manifold edge ({0}, {1}) shared by more than two triangles")]
    NonManifoldEdge(usize, usize),
    #[error("non-manifold node {0}: incident triangles do not form a single fan")]
    NonManifoldNode(usize),
    #[error("node {0} is not referenced by any triangle")]
    IsolatedNode(usize),
    #[error("mesh is not orientable (conflict at triangle {0})")]
    NonOrientable(usize),
    #[error("mesh is not connected (triangle {0} unreachable)")]
    Disconnected(usize),
    #[error("normal at node {0} vanishes (fold-over)")]
    ZeroNormal(usize),
    #[error("edge ({0}, {1}) is parallel to the normal at node {0}")]
    EdgeAlongNormal(usize, usize),
}

#[derive(Debug, Error)]
pub enum FieldError {
    #[error("closed mesh without a pinned node")]
    NoConstraint,
    #[error("linear system is singular: {0}")]
    Singular(String),
}

#[derive(Debug, Error)]
pub enum SingularityError {
    #[error("triangle {tri}: index residual {residual:e} exceeds tolerance")]
    Residual { tri: usize, residual: f64 },
    #[error("triangle {tri}: index {d}/4 is outside the supported range")]
    Pathological { tri: usize, d: i32 },
}

#[derive(Debug, Error)]
pub enum TraceError {
    #[error("entry point coincides with the singularity in triangle {0}")]
    AtSingularity(usize),
    #[error("interpolation requested in singular triangle {0}")]
    SingularTriangle(usize),
    #[error("cannot merge: {0}")]
    Merge(String),
}

#[derive(Debug, Error)]
pub enum LayoutError {
    #[error("face {face} has {corners} corners (expected 4)")]
    FaceNotQuad { face: usize, corners: usize },
    #[error("node {node}: {msg}")]
    BadNode { node: usize, msg: String },
    #[error("euler characteristic mismatch: V - E + F = {got}, expected {expected}")]
    Euler { got: i64, expected: i64 },
    #[error("{0}")]
    Other(String),
}

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("config: {0}")]
    Config(String),
    #[error("input: {0}")]
    Input(#[from] MeshError),
    #[error("field: {0}")]
    Field(#[from] FieldError),
    #[error("singularity: {0}")]
    Singularity(#[from] SingularityError),
    #[error("trace: {0}")]
    Trace(#[from] TraceError),
    #[error("layout: {0}")]
    Layout(#[from] LayoutError),
    #[error("export: {0}")]
    Export(String),
}
