use alloc::boxed::Box;
use alloc::string::String;
use alloc::vec::Vec;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, thiserror::Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("degenerate deformation at ({x:.6}, {y:.6}), t = {t}: det J = {det:e}", x = .point[0], y = .point[1])]
    DegenerateDeformation { point: [f64; 2], t: f64, det: f64 },

    #[error("degenerate mesh: {0}")]
    DegenerateMesh(String),

    #[error("singular system: {0}")]
    SingularSystem(String),

    #[error("conflicting prescribed values at dof {dof}: {first} vs {second}")]
    ConflictingConstraint { dof: usize, first: f64, second: f64 },

    #[error("{method} did not converge in {iterations} iterations (relative residual {residual:e})")]
    SolverFailure {
        method: &'static str,
        iterations: usize,
        residual: f64,
        history: Vec<f64>,
    },

    #[error("fluid velocity is not admissible for the transport solve: {0}")]
    Inadmissible(String),

    #[error("epsilon continuation is not Cauchy (differences {history:?})")]
    ContinuationFailure { history: Vec<f64> },

    #[error("advection-diffusion not coercive: margin d - C|v|_inf = {0:e}")]
    NotCoercive(f64),

    #[error("stage `{stage}` failed: {source}")]
    Stage {
        stage: &'static str,
        source: Box<Error>,
    },

    #[error("time slab t = {t} did not converge after {} sweeps (last change {last:e})", .history.len())]
    SlabNotConverged { t: f64, last: f64, history: Vec<f64> },
}

impl Error {
    pub(crate) fn in_stage(self, stage: &'static str) -> Self {
        Error::Stage {
            stage,
            source: Box::new(self),
        }
    }
}
