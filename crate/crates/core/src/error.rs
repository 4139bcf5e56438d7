use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("packet leaks across period (boundary amplitude {0:.3e})")]
    PacketLeaks(f64),
    #[error("image point leaks out of the safe region")]
    ImageLeaks,
    #[error("band unresolved at this grid")]
    BandUnresolved,
    #[error("reference energy vanished")]
    ReferenceVanished,
    #[error("domain error: {0}")]
    Domain(String),
    #[error("integrator tolerance not met (achieved {achieved:.3e})")]
    Integrator { achieved: f64 },
    #[error("not a simple fold point")]
    NotSimpleFold,
    #[error("no conjugate point: {0}")]
    NoConjugate(String),
    #[error("no caustic in range")]
    NoCaustic,
    #[error("stratum exited; reduce scale")]
    StratumExited,
    #[error("transversality violated")]
    Transversality,
    #[error("fit window outside sampled range")]
    FitWindow,
    #[error("f_odd not odd (max parity defect {0:.3e})")]
    NotOdd(f64),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("format: {0}")]
    Format(String),
}
