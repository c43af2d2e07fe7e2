//! Replays the checked-in fuzz corpus through the same entry points and
//! invariants as the fuzz targets.

use std::fs;
use std::path::PathBuf;

use arraylab::arrays::DescDocument;
use arraylab::experiments::ExperimentConfig;
use arraylab::walks::{cyclic_reduce, reduce, Word};
use arraylab::Graph;

fn seeds(target: &str) -> Vec<(String, String)> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fuzz/corpus").join(target);
    let mut out: Vec<(String, String)> = fs::read_dir(&dir)
        .unwrap_or_else(|e| panic!("{}: {e}", dir.display()))
        .map(|e| {
            let p = e.unwrap().path();
            (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read_to_string(&p).unwrap())
        })
        .collect();
    out.sort();
    assert!(!out.is_empty(), "no seeds for {target}");
    out
}

#[test]
fn graph_document_seeds() {
    let mut parsed = 0;
    for (name, text) in seeds("graph_document") {
        if let Ok(g) = Graph::from_document(&text) {
            let again = Graph::from_document(&g.to_document()).unwrap();
            assert_eq!(again.hash(), g.hash(), "{name}");
            parsed += 1;
        }
    }
    assert_eq!(parsed, 2);
}

#[test]
fn desc_document_seeds() {
    let mut built = 0;
    for (name, text) in seeds("desc_document") {
        if let Ok(d) = DescDocument::from_document(&text) {
            assert_eq!(DescDocument::from_document(&d.to_document()).as_ref(), Ok(&d), "{name}");
            if d.build(5_000).is_ok() {
                built += 1;
            }
        }
    }
    assert_eq!(built, 3);
}

#[test]
fn word_parse_seeds() {
    for (name, text) in seeds("word_parse") {
        let Ok(w) = Word::parse(&text) else {
            assert_eq!(name, "bad_letter.txt");
            continue;
        };
        let r = reduce(&w);
        assert_eq!(reduce(&r), r);
        let (core, conj) = cyclic_reduce(&w);
        assert!(core.is_cyclically_reduced());
        assert_eq!(conj.mul(&core).mul(&conj.inverse()), r, "{name}");
    }
}

#[test]
fn experiment_config_seeds() {
    for (name, text) in seeds("experiment_config") {
        let r = ExperimentConfig::from_json(&text);
        assert_eq!(r.is_ok(), name != "conflict.json", "{name}: {r:?}");
    }
}
