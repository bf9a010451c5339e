#![no_main]

use dynwalk::io::{parse_opinions, INLINE};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    // first byte picks the vertex count
    let Some((&n, rest)) = data.split_first() else {
        return;
    };
    let n = usize::from(n % 64);
    if let Ok(text) = std::str::from_utf8(rest) {
        if let Ok(ops) = parse_opinions(text, INLINE, n) {
            assert_eq!(ops.len(), n);
        }
    }
});
