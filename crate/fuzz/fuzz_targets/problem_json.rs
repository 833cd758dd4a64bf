#![no_main]

use libfuzzer_sys::fuzz_target;
use pepkit::sdp::SdpProblem;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(p) = SdpProblem::from_json(text) else { return };
    let json = p.to_json().expect("serialize");
    assert_eq!(SdpProblem::from_json(&json).expect("reparse"), p);
});
