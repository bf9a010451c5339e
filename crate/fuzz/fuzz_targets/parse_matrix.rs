#![no_main]

use dynwalk::io::{parse_matrix, MatrixFile, INLINE};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(p) = parse_matrix(text, INLINE) {
        // anything accepted must survive a round trip
        let back = serde_json::to_string(&MatrixFile::from_matrix(&p)).unwrap();
        assert_eq!(parse_matrix(&back, INLINE).unwrap(), p);
    }
});
