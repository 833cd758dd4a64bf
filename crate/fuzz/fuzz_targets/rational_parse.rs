#![no_main]

use libfuzzer_sys::fuzz_target;
use pepkit::rational::{parse_decimal_exact, parse_rational};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(q) = parse_rational(text) {
        assert_eq!(parse_rational(&q.to_string()).expect("reparse"), q);
        assert_eq!(parse_decimal_exact(text).expect("p/q is also a decimal input"), q);
    }
    let _ = parse_decimal_exact(text);
});
