#![no_main]

use dynwalk::io::{parse_graph, GraphFile, INLINE};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(g) = parse_graph(text, INLINE) {
        let back = serde_json::to_string(&GraphFile::from_graph(&g)).unwrap();
        assert_eq!(parse_graph(&back, INLINE).unwrap(), g);
    }
});
