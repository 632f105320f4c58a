//! JSON loading helpers shared by the CLI and the channel/circuit readers.

use serde::de::DeserializeOwned;

use crate::error::{Result, TwirlError};

/// Converts a serde path (`a.b[3].c`) into a JSON pointer (`/a/b/3/c`).
pub fn json_pointer(path: &serde_path_to_error::Path) -> String {
    let mut out = String::new();
    for seg in path.iter() {
        out.push('/');
        match seg {
            serde_path_to_error::Segment::Seq { index } => out.push_str(&index.to_string()),
            serde_path_to_error::Segment::Map { key } => {
                out.push_str(&key.replace('~', "~0").replace('/', "~1"))
            }
            serde_path_to_error::Segment::Enum { variant } => out.push_str(variant),
            serde_path_to_error::Segment::Unknown => out.push('?'),
        }
    }
    if out.is_empty() {
        out.push('/');
    }
    out
}

/// Parses JSON text into `T`, reporting failures with a JSON pointer.
pub fn from_json_str<T: DeserializeOwned>(s: &str) -> Result<T> {
    let de = &mut serde_json::Deserializer::from_str(s);
    serde_path_to_error::deserialize(de).map_err(|e| TwirlError::Config {
        pointer: json_pointer(e.path()),
        message: e.inner().to_string(),
    })
}
