#![no_main]

use libfuzzer_sys::fuzz_target;
use mergewidth::format::*;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(e) = parse_cwe(text) {
        assert_eq!(parse_cwe(&write_cwe(&e)).unwrap(), e);
    }
});
