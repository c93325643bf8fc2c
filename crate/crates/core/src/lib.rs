//! Numerical laboratory for zeros of generalized Hurwitz zeta functions
//! L(s, f, α) = Σ f(n)(n+α)^{−s} in the half-plane σ > 1.

pub mod alpha;
pub mod annulus;
pub mod eval;
pub mod hp;
pub mod ideals;
pub mod kronecker;
pub mod twist;
pub mod zeros;

pub use alpha::{AlphaError, AlphaKind, AlphaParam, QuadraticAlpha, Ratio};
pub use annulus::{AnnulusError, AnnulusSpec, Realization};
pub use eval::{ComplexPoint, EvalError, PeriodicFunction, DEFAULT_TOL};
pub use hp::{HpContext, Precision};
pub use ideals::{
    CasselsBlock, FactorTable, FieldElement, Ideal, IdealError, IdealFactorization, MultiplicativeBasis, PrimeIdeal,
    PrivateShift, QuadraticField,
};
pub use kronecker::{KroneckerError, KroneckerProblem, KroneckerSolution, SearchBudget, Strategy};
pub use num_complex::Complex64;
pub use twist::{
    BlockReport, BlockSchedule, GreedyState, InductionReport, Outcome, ScheduleConfig, SetSource, TwistError,
    TwistedSeries, Weights,
};
pub use zeros::{
    Contour, PipelineBudget, PipelineFailure, Quadrature, Rectangle, RoucheCertificate, Stage, ZeroError, ZeroMethod,
    ZeroRecord,
};

/// Any failure raised by the library.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Alpha(#[from] AlphaError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Annulus(#[from] AnnulusError),
    #[error(transparent)]
    Kronecker(#[from] KroneckerError),
    #[error(transparent)]
    Ideal(#[from] IdealError),
    #[error(transparent)]
    Twist(#[from] TwistError),
    #[error(transparent)]
    Zero(#[from] ZeroError),
    #[error(transparent)]
    Pipeline(#[from] PipelineFailure),
}
