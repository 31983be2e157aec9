use std::io::Write;
use std::path::{Path, PathBuf};

use serde_json::{json, Value};
use sphere_landau::Error;

/// Failures surfaced by the binary.
#[derive(Debug)]
pub enum Failure {
    Library(Error),
    Io {
        path: PathBuf,
        message: String,
    },
    /// A failure that still produced output worth keeping.
    Partial {
        body: String,
        error: Error,
    },
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Library(e)
    }
}

impl Failure {
    pub fn name(&self) -> &'static str {
        match self {
            Failure::Library(e) | Failure::Partial { error: e, .. } => e.name(),
            Failure::Io { .. } => "IoFailure",
        }
    }

    pub fn message(&self) -> String {
        match self {
            Failure::Library(e) | Failure::Partial { error: e, .. } => e.to_string(),
            Failure::Io { path, message } => format!("{}: {message}", path.display()),
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Library(e) | Failure::Partial { error: e, .. } if e.is_validation() => 1,
            _ => 2,
        }
    }
}

/// One JSON object per line on standard error.
pub fn diagnostic(event: &str, fields: Value) {
    let mut object = json!({ "event": event });
    if let (Some(map), Value::Object(extra)) = (object.as_object_mut(), fields) {
        map.extend(extra);
    }
    let mut err = std::io::stderr().lock();
    let _ = writeln!(err, "{object}");
}

pub fn warning(switch: &str, message: &str) {
    diagnostic("warning", json!({ "switch": switch, "message": message }));
}

pub fn error(failure: &Failure) {
    diagnostic(
        "error",
        json!({
            "name": failure.name(),
            "message": failure.message(),
            "exit_code": failure.exit_code(),
        }),
    );
}

/// Write `body` to `path`, or to standard output when no path is given.
pub fn write_output(path: Option<&Path>, body: &str) -> Result<(), Failure> {
    match path {
        Some(path) => std::fs::write(path, body).map_err(|e| Failure::Io {
            path: path.to_path_buf(),
            message: e.to_string(),
        }),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(body.as_bytes())
                .and_then(|_| out.flush())
                .map_err(|e| Failure::Io {
                    path: PathBuf::from("<stdout>"),
                    message: e.to_string(),
                })
        }
    }
}

/// Pretty JSON with a trailing newline.
pub fn to_json<T: serde::Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable output");
    s.push('\n');
    s
}
