#![no_main]

use libfuzzer_sys::fuzz_target;
use phasebell_cli::ExperimentReport;

fuzz_target!(|data: &[u8]| {
    let Ok(report) = serde_json::from_slice::<ExperimentReport>(data) else { return };
    let text = serde_json::to_string(&report).unwrap();
    let _: ExperimentReport = serde_json::from_str(&text).expect("re-serialized report parses");
});
