#![no_main]

use libfuzzer_sys::fuzz_target;
use mergewidth::format::*;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(s) = parse_bst(text) {
        assert_eq!(parse_bst(&write_bst(&s)).unwrap(), s);
    }
});
