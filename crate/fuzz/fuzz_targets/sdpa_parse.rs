#![no_main]

use libfuzzer_sys::fuzz_target;
use pepkit::sdp::sdpa;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(p) = sdpa::parse(text) else { return };
    let out = sdpa::write(&p);
    let q = sdpa::parse(&out).expect("written SDPA must parse");
    assert_eq!(sdpa::write(&q), out);
});
