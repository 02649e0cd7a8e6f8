//! Replays the checked-in fuzz corpus through the same properties the fuzz
//! targets assert, so regressions surface without a nightly toolchain.

use std::path::PathBuf;

use phasebell::bell::SignPattern;
use phasebell::io::{decode, encode_complex, encode_real, AnyField};
use phasebell::state::StateSpec;
use phasebell_cli::ExperimentReport;

fn seeds(target: &str) -> Vec<(String, Vec<u8>)> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fuzz/corpus").join(target);
    let mut out: Vec<_> = std::fs::read_dir(&dir)
        .unwrap_or_else(|e| panic!("{}: {e}", dir.display()))
        .map(|e| {
            let path = e.unwrap().path();
            (path.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read(&path).unwrap())
        })
        .collect();
    out.sort();
    assert!(!out.is_empty(), "no seeds for {target}");
    out
}

fn encode(field: &AnyField) -> Vec<u8> {
    match field {
        AnyField::Real1(f) => encode_real(f),
        AnyField::Real2(f) => encode_real(f),
        AnyField::Real4(f) => encode_real(f),
        AnyField::Complex1(f) => encode_complex(f),
        AnyField::Complex2(f) => encode_complex(f),
    }
}

#[test]
fn field_decode_seeds() {
    let mut decoded = 0;
    for (name, data) in seeds("field_decode") {
        let Ok(field) = decode(&data) else { continue };
        decoded += 1;
        let bytes = encode(&field);
        let again = decode(&bytes).unwrap_or_else(|e| panic!("{name}: {e}"));
        assert_eq!(encode(&again), bytes, "{name}");
    }
    assert!(decoded >= 5);
}

#[test]
fn pattern_spec_seeds() {
    for (name, data) in seeds("pattern_spec") {
        let Ok(text) = std::str::from_utf8(&data) else { continue };
        let Ok(p) = text.parse::<SignPattern>() else { continue };
        assert_eq!(p.to_string().parse::<SignPattern>().unwrap(), p, "{name}");
        let json = serde_json::to_string(&p).unwrap();
        assert_eq!(serde_json::from_str::<SignPattern>(&json).unwrap(), p, "{name}");
    }
}

#[test]
fn state_spec_seeds() {
    for (name, data) in seeds("state_spec") {
        let Ok(text) = std::str::from_utf8(&data) else { continue };
        let Ok(s) = text.parse::<StateSpec>() else { continue };
        assert_eq!(s.to_string().parse::<StateSpec>().unwrap(), s, "{name}");
    }
}

#[test]
fn report_json_seeds() {
    let mut parsed = 0;
    for (name, data) in seeds("report_json") {
        let Ok(r) = serde_json::from_slice::<ExperimentReport>(&data) else { continue };
        parsed += 1;
        let text = serde_json::to_string(&r).unwrap();
        serde_json::from_str::<ExperimentReport>(&text).unwrap_or_else(|e| panic!("{name}: {e}"));
    }
    assert!(parsed >= 1);
}
