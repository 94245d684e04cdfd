#![no_main]

use libfuzzer_sys::fuzz_target;
use mergewidth::format::*;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(m) = parse_mseq(text) {
        assert_eq!(parse_mseq(&write_mseq(&m)).unwrap(), m);
    }
});
