//! JSON configuration files merged under command-line values.

use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::Value;

use crate::error::{CliError, CliResult};

/// Keys set on the command line win; unset options (null or false) fall
/// back to the file. The file must deserialize on its own, so unknown keys
/// and ill-typed values are rejected.
pub fn merge<T: Serialize + DeserializeOwned>(cli: T, config: Option<&Path>) -> CliResult<T> {
    let Some(path) = config else {
        return Ok(cli);
    };
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Validation(format!("config {}: {e}", path.display())))?;
    let file: Value = serde_json::from_str(&text)
        .map_err(|e| CliError::Validation(format!("config {}: {e}", path.display())))?;
    if !file.is_object() {
        return Err(CliError::Validation(format!(
            "config {}: expected a JSON object",
            path.display()
        )));
    }
    serde_json::from_value::<T>(file.clone())
        .map_err(|e| CliError::Validation(format!("config {}: {e}", path.display())))?;
    let Value::Object(mut merged) = file else {
        unreachable!()
    };
    let Value::Object(over) =
        serde_json::to_value(&cli).map_err(|e| CliError::Validation(e.to_string()))?
    else {
        return Err(CliError::Validation(
            "options do not serialize to an object".into(),
        ));
    };
    for (k, v) in over {
        if !(v.is_null() || v == Value::Bool(false)) {
            merged.insert(k, v);
        }
    }
    serde_json::from_value(Value::Object(merged))
        .map_err(|e| CliError::Validation(format!("config {}: {e}", path.display())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde::Deserialize;

    #[derive(Serialize, Deserialize, Debug, PartialEq, Default)]
    #[serde(deny_unknown_fields, default)]
    struct Opts {
        a: Option<f64>,
        b: Option<usize>,
        flag: bool,
    }

    fn file(text: &str) -> tempfile::NamedTempFile {
        let f = tempfile::NamedTempFile::new().unwrap();
        std::fs::write(f.path(), text).unwrap();
        f
    }

    #[test]
    fn command_line_wins() {
        let f = file(r#"{"a": 1.0, "b": 3, "flag": true}"#);
        let m = merge(
            Opts {
                a: Some(2.0),
                b: None,
                flag: false,
            },
            Some(f.path()),
        )
        .unwrap();
        assert_eq!(
            m,
            Opts {
                a: Some(2.0),
                b: Some(3),
                flag: true
            }
        );
    }

    #[test]
    fn unknown_keys_rejected() {
        let f = file(r#"{"a": 1.0, "bogus": 1}"#);
        let e = merge(
            Opts {
                a: None,
                b: None,
                flag: false,
            },
            Some(f.path()),
        )
        .unwrap_err();
        assert_eq!(e.code(), 2);
        assert!(e.message().contains("bogus"));
    }

    #[test]
    fn bad_types_rejected() {
        let f = file(r#"{"b": -1}"#);
        assert!(merge(
            Opts {
                a: None,
                b: None,
                flag: false
            },
            Some(f.path())
        )
        .is_err());
    }
}
