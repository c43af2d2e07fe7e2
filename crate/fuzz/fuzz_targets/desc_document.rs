#![no_main]

use arraylab::arrays::DescDocument;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(d) = DescDocument::from_document(text) {
        assert_eq!(DescDocument::from_document(&d.to_document()).as_ref(), Ok(&d));
        // Small cap so huge descriptions are rejected instead of built.
        let _ = d.build(5_000);
    }
});
