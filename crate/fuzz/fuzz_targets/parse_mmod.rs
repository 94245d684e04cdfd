#![no_main]

use libfuzzer_sys::fuzz_target;
use mergewidth::format::*;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(f) = parse_mmod(text) {
        let once = write_mmod(&f.model, f.ranking.as_ref());
        let again = parse_mmod(&once).unwrap();
        assert_eq!(write_mmod(&again.model, again.ranking.as_ref()), once);
    }
});
