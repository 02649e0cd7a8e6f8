#![no_main]

use libfuzzer_sys::fuzz_target;
use phasebell::io::{decode, encode_complex, encode_real, AnyField};

fuzz_target!(|data: &[u8]| {
    // Decoding is idempotent on its own encoding.
    let Ok(field) = decode(data) else { return };
    let encode = |field: &AnyField| match field {
        AnyField::Real1(f) => encode_real(f),
        AnyField::Real2(f) => encode_real(f),
        AnyField::Real4(f) => encode_real(f),
        AnyField::Complex1(f) => encode_complex(f),
        AnyField::Complex2(f) => encode_complex(f),
    };
    let bytes = encode(&field);
    let again = decode(&bytes).expect("own encoding decodes");
    assert_eq!(encode(&again), bytes);
});
