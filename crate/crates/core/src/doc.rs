//! Self-describing JSON documents: every file carries `format_version` and
//! `kind` next to its body.

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DocError {
    #[error("invalid JSON: {0}")]
    Json(String),
    #[error("expected document kind {expected:?}, found {found:?}")]
    WrongKind { expected: String, found: String },
    #[error("unsupported format_version {found} (supported: {supported})")]
    UnsupportedVersion { found: u32, supported: u32 },
    #[error("cannot access {path}: {message}")]
    Io { path: String, message: String },
}

#[derive(Serialize)]
struct Out<'a, T> {
    format_version: u32,
    kind: &'a str,
    #[serde(flatten)]
    body: &'a T,
}

#[derive(Deserialize)]
struct Header {
    format_version: Option<u32>,
    kind: Option<String>,
}

#[derive(Deserialize)]
struct In<T> {
    #[allow(dead_code)]
    format_version: u32,
    #[allow(dead_code)]
    kind: String,
    #[serde(flatten)]
    body: T,
}

/// Pretty-printed JSON with the envelope fields first.
pub fn to_json<T: Serialize>(kind: &str, body: &T) -> String {
    let v = Out {
        format_version: FORMAT_VERSION,
        kind,
        body,
    };
    let mut s = serde_json::to_string_pretty(&v).expect("document serialization cannot fail");
    s.push('\n');
    s
}

/// Check the envelope, then parse the body.
pub fn from_json<T: DeserializeOwned>(kind: &str, text: &str) -> Result<T, DocError> {
    let header: Header = serde_json::from_str(text).map_err(|e| DocError::Json(e.to_string()))?;
    let found = header.kind.ok_or_else(|| DocError::Json("missing field `kind`".into()))?;
    if found != kind {
        return Err(DocError::WrongKind {
            expected: kind.into(),
            found,
        });
    }
    let version = header
        .format_version
        .ok_or_else(|| DocError::Json("missing field `format_version`".into()))?;
    if version != FORMAT_VERSION {
        return Err(DocError::UnsupportedVersion {
            found: version,
            supported: FORMAT_VERSION,
        });
    }
    let doc: In<T> = serde_json::from_str(text).map_err(|e| DocError::Json(e.to_string()))?;
    Ok(doc.body)
}

pub fn read_file(path: &std::path::Path) -> Result<String, DocError> {
    std::fs::read_to_string(path).map_err(|e| DocError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}

pub fn write_file(path: &std::path::Path, text: &str) -> Result<(), DocError> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).map_err(|e| DocError::Io {
            path: parent.display().to_string(),
            message: e.to_string(),
        })?;
    }
    std::fs::write(path, text).map_err(|e| DocError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[derive(Debug, Serialize, Deserialize, PartialEq)]
    struct Body {
        x: f64,
        name: String,
    }

    #[test]
    fn envelope_round_trip() {
        let b = Body {
            x: 0.1 + 0.2,
            name: "a".into(),
        };
        let s = to_json("thing", &b);
        assert!(s.contains("\"format_version\": 1"));
        let back: Body = from_json("thing", &s).unwrap();
        assert_eq!(back, b);
    }

    #[test]
    fn rejects_wrong_kind_and_version() {
        let s = r#"{"format_version": 1, "kind": "other", "x": 1.0, "name": "a"}"#;
        assert!(matches!(from_json::<Body>("thing", s), Err(DocError::WrongKind { .. })));
        let s = r#"{"format_version": 9, "kind": "thing", "x": 1.0, "name": "a"}"#;
        assert!(matches!(
            from_json::<Body>("thing", s),
            Err(DocError::UnsupportedVersion { found: 9, .. })
        ));
        let s = r#"{"format_version": 1, "kind": "thing", "name": "a"}"#;
        let err = from_json::<Body>("thing", s).unwrap_err();
        assert!(err.to_string().contains("missing field `x`"), "{err}");
    }
}
