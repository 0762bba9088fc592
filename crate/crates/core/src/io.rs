//! Instance files: JSON in, canonical JSON out.

use std::path::Path;

use crate::error::{Error, Result};
use crate::model::{validate, ProblemInstance, RawInstance};

pub fn parse_raw(text: &str) -> Result<RawInstance> {
    serde_json::from_str(text).map_err(|e| Error::Parse(format!("line {} column {}: {e}", e.line(), e.column())))
}

/// Parses and validates an instance. A missing name falls back to `fallback`.
pub fn parse_instance(text: &str, fallback: &str) -> Result<ProblemInstance> {
    let mut raw = parse_raw(text)?;
    if raw.name.is_empty() {
        raw.name = fallback.to_string();
    }
    validate(&raw)
}

pub fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

pub fn load_instance(path: &Path) -> Result<ProblemInstance> {
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("instance");
    parse_instance(&read_text(path)?, stem)
}

/// Canonical serialization: fixed field order, reduced rationals.
pub fn canonical_json(inst: &ProblemInstance) -> String {
    serde_json::to_string(&inst.to_raw()).expect("instances always serialize")
}

pub fn write_instance(inst: &ProblemInstance, path: &Path) -> Result<()> {
    let text = serde_json::to_string_pretty(&inst.to_raw()).expect("instances always serialize");
    std::fs::write(path, text + "\n").map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus;

    #[test]
    fn named_instances_roundtrip() {
        for inst in corpus::named() {
            let text = canonical_json(&inst);
            let back = parse_instance(&text, "x").unwrap();
            assert_eq!(back, inst, "{}", inst.name);
            assert_eq!(canonical_json(&back), text);
        }
    }

    #[test]
    fn file_roundtrip_uses_the_stem_as_fallback_name() {
        let dir = std::env::temp_dir().join(format!("sharp-ald-io-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("inst-a.json");
        write_instance(&corpus::inst_a(), &path).unwrap();
        assert_eq!(load_instance(&path).unwrap(), corpus::inst_a());
        let text = read_text(&path).unwrap().replace("\"name\": \"inst-a\"", "\"name\": \"\"");
        assert_eq!(parse_instance(&text, "stem").unwrap().name, "stem");
        std::fs::remove_dir_all(&dir).unwrap();
    }

    #[test]
    fn malformed_json_is_a_parse_error() {
        assert!(matches!(parse_instance("{\"A\": [", "x"), Err(Error::Parse(_))));
        assert!(matches!(parse_instance("{\"b\": [\"1/0\"], \"objective\": {\"kind\": \"linear\", \"c\": []}}", "x"), Err(Error::Parse(_))));
    }

    #[test]
    fn shape_errors_carry_field_paths() {
        let text = r#"{"A": [["1", "1"]], "b": [], "objective": {"kind": "linear", "c": ["1", "0"]}}"#;
        match parse_instance(text, "x") {
            Err(Error::Invalid(v)) => assert!(v.iter().any(|v| v.path == "b")),
            other => panic!("{other:?}"),
        }
    }
}
