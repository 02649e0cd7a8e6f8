#![no_main]

use libfuzzer_sys::fuzz_target;
use phasebell::bell::SignPattern;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(pattern) = text.parse::<SignPattern>() else { return };
    let again: SignPattern = pattern.to_string().parse().expect("display output parses");
    assert_eq!(again, pattern);
    let json = serde_json::to_string(&pattern).unwrap();
    let back: SignPattern = serde_json::from_str(&json).unwrap();
    assert_eq!(back, pattern);
});
