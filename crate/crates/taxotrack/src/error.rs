use serde::Serialize;
use taxotrack_core::{CombinationRejection, Error as CoreError};

#[derive(Debug, thiserror::Error)]
pub enum AppError {
    #[error(transparent)]
    Core(#[from] CoreError),
    #[error("unknown dataset `{0}`")]
    UnknownDataset(String),
    #[error("{0}")]
    BadInput(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("config error: {0}")]
    Config(String),
    #[error("worker failed: {0}")]
    Worker(String),
}

pub type AppResult<T> = Result<T, AppError>;

/// How an error is reported to clients: HTTP status plus a stable code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    NotFound,
    Conflict,
    Unprocessable,
    BadRequest,
    Internal,
}

impl ErrorClass {
    pub fn status(self) -> u16 {
        match self {
            ErrorClass::NotFound => 404,
            ErrorClass::Conflict => 409,
            ErrorClass::Unprocessable => 422,
            ErrorClass::BadRequest => 400,
            ErrorClass::Internal => 500,
        }
    }
}

#[derive(Debug, Serialize)]
pub struct ErrorBody {
    pub code: &'static str,
    pub message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reason: Option<CombinationRejection>,
}

impl AppError {
    pub fn bad_input(msg: impl Into<String>) -> Self {
        AppError::BadInput(msg.into())
    }

    pub fn class(&self) -> ErrorClass {
        use CoreError as E;
        match self {
            AppError::UnknownDataset(_) => ErrorClass::NotFound,
            AppError::Core(E::UnknownTrajectory(_)) => ErrorClass::NotFound,
            AppError::Core(E::InvalidCombination { .. }) => ErrorClass::Conflict,
            AppError::Core(
                E::IdenticalZones(_)
                | E::InsufficientZoneMembers { .. }
                | E::InsufficientMembers { .. }
                | E::SingleClass
                | E::TooFewInstances { .. },
            ) => ErrorClass::Unprocessable,
            AppError::Io(_) | AppError::Worker(_) => ErrorClass::Internal,
            _ => ErrorClass::BadRequest,
        }
    }

    pub fn code(&self) -> &'static str {
        use CoreError as E;
        match self {
            AppError::Core(e) => match e {
                E::CoordinateOutOfRange { .. } => "coordinate_out_of_range",
                E::InvalidTimestamp => "invalid_timestamp",
                E::TooFewPoints(_) => "too_few_points",
                E::NonIncreasingTime { .. } => "non_increasing_time",
                E::DuplicateId(_) => "duplicate_id",
                E::NoValidRows => "no_valid_rows",
                E::UnknownTrajectory(_) => "unknown_trajectory",
                E::InvalidCombination { .. } => "invalid_combination",
                E::UnknownNode(_) => "unknown_node",
                E::UnknownCombination(_) => "unknown_combination",
                E::UnknownVariable(_) => "unknown_variable",
                E::SignatureVariable(_) => "signature_variable",
                E::TooFewInstances { .. } => "too_few_instances",
                E::NonPositiveRadius(_) => "non_positive_radius",
                E::DimensionMismatch { .. } => "dimension_mismatch",
                E::ScoreOutOfRange { .. } => "score_out_of_range",
                E::InvalidZone(_) => "invalid_zone",
                E::IdenticalZones(_) => "identical_zones",
                E::InsufficientZoneMembers { .. } => "insufficient_zone_members",
                E::InsufficientMembers { .. } => "insufficient_members",
                E::SingleClass => "single_class",
                E::InvalidConfig(_) => "invalid_config",
                E::EmptyInput => "empty_input",
            },
            AppError::UnknownDataset(_) => "unknown_dataset",
            AppError::BadInput(_) => "bad_input",
            AppError::Io(_) => "io",
            AppError::Csv(_) => "csv",
            AppError::Json(_) => "json",
            AppError::Config(_) => "config",
            AppError::Worker(_) => "worker",
        }
    }

    pub fn body(&self) -> ErrorBody {
        let reason = match self {
            AppError::Core(CoreError::InvalidCombination { reason, .. }) => Some(*reason),
            _ => None,
        };
        ErrorBody { code: self.code(), message: self.to_string(), reason }
    }

    /// `{"error": {...}}` as a single JSON line.
    pub fn to_json(&self) -> String {
        serde_json::json!({ "error": self.body() }).to_string()
    }
}
