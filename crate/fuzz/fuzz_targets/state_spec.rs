#![no_main]

use libfuzzer_sys::fuzz_target;
use phasebell::state::StateSpec;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(spec) = text.parse::<StateSpec>() else { return };
    let again: StateSpec = spec.to_string().parse().expect("display output parses");
    assert_eq!(again, spec);
});
