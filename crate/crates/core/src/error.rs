use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid domain spec: {0}")]
    InvalidSpec(String),
    #[error("domain is not strictly convex: radius of curvature {min_rho:.3e} at phi = {phi:.6}")]
    NonConvex { phi: f64, min_rho: f64 },
    #[error("{what} = {value} outside [{lo}, {hi}]")]
    OutOfRange { what: &'static str, value: f64, lo: f64, hi: f64 },
    #[error("quadrature for {what} did not converge (last relative change {change:.3e} at N = {n})")]
    NonConvergent { what: &'static str, change: f64, n: usize },
    #[error("invariant {name} = {value:.6e} is not positive")]
    NonPositiveInvariant { name: &'static str, value: f64 },
    #[error("chord endpoints coincide (s0 = {s0}, s1 = {s1})")]
    CoincidentPoints { s0: f64, s1: f64 },
    #[error("next boundary intersection not bracketed from s = {s}, phi = {phi}")]
    RootNotBracketed { s: f64, phi: f64 },
    #[error("periodic orbit {p}/{q} did not converge: residual {residual:.3e} after {iterations} iterations")]
    NoConvergence { p: u32, q: u32, residual: f64, iterations: usize },
    #[error("rotation number {p}/{q} is not admissible: {reason}")]
    InvalidRotation { p: u32, q: u32, reason: &'static str },
    #[error("adaptive quadrature failed for {0}")]
    QuadratureFailure(&'static str),
    #[error("tangent lines from the boundary point to the caustic probe not found")]
    TangencyNotFound,
    #[error("argument outside the domain of {function}: {value}")]
    DomainError { function: &'static str, value: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
