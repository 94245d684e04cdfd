#![no_main]

use libfuzzer_sys::fuzz_target;
use mergewidth::format::*;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(t) = parse_tmod(text) {
        let once = write_tmod(&t);
        assert_eq!(write_tmod(&parse_tmod(&once).unwrap()), once);
    }
});
