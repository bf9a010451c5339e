#![no_main]

use dynwalk::io::{parse_schedule, INLINE};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if data.len() > 1 << 16 {
        return;
    }
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(s) = parse_schedule(text, INLINE) {
            assert!(s.n() > 0);
            s.matrix_at(1).unwrap();
        }
    }
});
