use std::fmt;
use std::io;

use serde_json::json;

/// A classified failure with a stable machine-readable code.
#[derive(Debug)]
pub struct Failure {
    pub code: &'static str,
    pub message: String,
}

impl Failure {
    pub fn new(code: &'static str, message: impl Into<String>) -> Self {
        Self {
            code,
            message: message.into(),
        }
    }

    pub fn config(message: impl Into<String>) -> Self {
        Self::new("invalid-config", message)
    }

    pub fn validation(message: impl Into<String>) -> Self {
        Self::new("validation-error", message)
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for Failure {}

/// Error code and exit status for any error reaching `main`.
pub fn classify(err: &anyhow::Error) -> (&'static str, i32) {
    let code = code_of(err);
    let status = match code {
        "input-not-found" | "invalid-config" | "usage" => 2,
        _ => 1,
    };
    (code, status)
}

fn code_of(err: &anyhow::Error) -> &'static str {
    for cause in err.chain() {
        if let Some(f) = cause.downcast_ref::<Failure>() {
            return f.code;
        }
        if let Some(e) = cause.downcast_ref::<storyalign::Error>() {
            use storyalign::Error as E;
            return match e {
                E::Parse { .. }
                | E::Csv { .. }
                | E::BadMagic
                | E::TruncatedPayload { .. }
                | E::TrailingBytes { .. } => "parse-error",
                E::Io(_) => "io-error",
                E::InsufficientNegatives { .. } => "insufficient-negatives",
                E::TooLarge { .. } => "too-large",
                E::Validation(_) | E::UnknownClip { .. } | E::NonFinite { .. } => {
                    "validation-error"
                }
            };
        }
        if cause.downcast_ref::<serde_json::Error>().is_some() {
            return "parse-error";
        }
        if cause.downcast_ref::<io::Error>().is_some() {
            return "io-error";
        }
    }
    "internal-error"
}

pub fn report(code: &str, message: &str) -> String {
    json!({ "error": { "code": code, "message": message } }).to_string()
}
