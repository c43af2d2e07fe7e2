#![no_main]

use arraylab::walks::{cyclic_reduce, reduce, Word};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(w) = Word::parse(text) else { return };
    let r = reduce(&w);
    assert!(r.is_reduced());
    assert_eq!(reduce(&r), r);
    let (core, conj) = cyclic_reduce(&w);
    assert!(core.is_cyclically_reduced());
    assert_eq!(conj.mul(&core).mul(&conj.inverse()), r);
});
