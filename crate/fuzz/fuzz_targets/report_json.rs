#![no_main]

use libfuzzer_sys::fuzz_target;
use pepkit_cli::report::Report;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(r) = Report::from_json(text) else { return };
    // NaN fields rule out comparing values; compare the encoding instead
    let json = r.to_json().expect("serialize");
    let again = Report::from_json(&json).expect("reparse");
    assert_eq!(again.to_json().expect("serialize"), json);
    let _ = again.to_string();
});
