#![no_main]

use arraylab::Graph;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(g) = Graph::from_document(text) {
        let again = Graph::from_document(&g.to_document()).expect("round trip");
        assert_eq!(again.hash(), g.hash());
    }
});
