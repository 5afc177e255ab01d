use critlab::diffpoly::DiffPolyError;
use critlab::hopf::HopfError;
use critlab::initial_data::InitialDataError;
use critlab::painleve::PainleveError;
use critlab::rh::RhError;
use critlab::spectral::SpectralError;
use critlab::universality::UniversalityError;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Bad flags, config or input values (exit 2).
    #[error("configuration error: {0}")]
    Config(String),
    /// Blow-up, non-convergence and similar (exit 3).
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("cannot write output: {0}")]
    Output(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numerical(_) | CliError::Output(_) => 3,
        }
    }
}

impl From<InitialDataError> for CliError {
    fn from(e: InitialDataError) -> Self {
        match e {
            InitialDataError::Inversion { .. } => CliError::Numerical(e.to_string()),
            _ => CliError::Config(e.to_string()),
        }
    }
}

impl From<HopfError> for CliError {
    fn from(e: HopfError) -> Self {
        match e {
            HopfError::Datum(d) => d.into(),
            HopfError::NegativeTime(_) | HopfError::Multivalued { .. } | HopfError::BadOffsets => {
                CliError::Config(e.to_string())
            }
            _ => CliError::Numerical(e.to_string()),
        }
    }
}

impl From<DiffPolyError> for CliError {
    fn from(e: DiffPolyError) -> Self {
        CliError::Config(e.to_string())
    }
}

impl From<SpectralError> for CliError {
    fn from(e: SpectralError) -> Self {
        match e {
            SpectralError::BlowUp { .. } | SpectralError::Vacuum { .. } => CliError::Numerical(e.to_string()),
            _ => CliError::Config(e.to_string()),
        }
    }
}

impl From<PainleveError> for CliError {
    fn from(e: PainleveError) -> Self {
        match e {
            PainleveError::Domain(_) | PainleveError::OutOfDomain { .. } => CliError::Config(e.to_string()),
            _ => CliError::Numerical(e.to_string()),
        }
    }
}

impl From<RhError> for CliError {
    fn from(e: RhError) -> Self {
        match e {
            RhError::Datum(d) => d.into(),
            RhError::Hopf(h) => h.into(),
            _ => CliError::Config(e.to_string()),
        }
    }
}

impl From<UniversalityError> for CliError {
    fn from(e: UniversalityError) -> Self {
        match e {
            UniversalityError::Painleve(p) => p.into(),
            UniversalityError::Spectral(s) => s.into(),
            UniversalityError::Hopf(h) => h.into(),
            UniversalityError::Datum(d) => d.into(),
            UniversalityError::Domain(_) => CliError::Config(e.to_string()),
            _ => CliError::Numerical(e.to_string()),
        }
    }
}
