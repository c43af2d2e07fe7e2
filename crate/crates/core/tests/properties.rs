use arraylab::arrays::{build_array, build_generalized, random_array_desc, random_gen_desc, DescDocument};
use arraylab::bounds::{collapse, exponent, minmax_bound, pullback_energy_check, supports_adjacent, upper_bound_array};
use arraylab::spectral::{lambda1_dense, lambda1_iterative, rayleigh};
use arraylab::walks::{axis_distances, cyclic_reduce, reduce, run_walks, translation_length, WalkConfig, Word};
use arraylab::{Graph, VertexFunction};
use proptest::prelude::*;

fn word(max: usize) -> impl Strategy<Value = Word> {
    prop::collection::vec(0u8..4, 0..max).prop_map(Word::from_letters)
}

fn reduced_nontrivial(max: usize) -> impl Strategy<Value = Word> {
    word(max).prop_map(|w| reduce(&w)).prop_filter("nontrivial core", |w| translation_length(w) > 0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn reduce_is_idempotent_and_shortens(w in word(80)) {
        let r = reduce(&w);
        prop_assert!(r.is_reduced());
        prop_assert!(r.len() <= w.len());
        prop_assert_eq!(reduce(&r), r);
    }

    #[test]
    fn cyclic_reduce_conjugation_identity(w in word(80)) {
        let (core, conj) = cyclic_reduce(&w);
        prop_assert!(core.is_cyclically_reduced());
        prop_assert_eq!(conj.mul(&core).mul(&conj.inverse()), reduce(&w));
    }

    #[test]
    fn translation_length_is_a_conjugacy_invariant(u in word(30), w in word(30)) {
        let c = u.mul(&w).mul(&u.inverse());
        prop_assert_eq!(translation_length(&c), translation_length(&w));
    }

    #[test]
    fn axis_distance_matches_conjugation(w in reduced_nontrivial(20), x in word(20)) {
        let x = reduce(&x);
        let d = axis_distances(&w, x.letters()).unwrap();
        for t in 0..=x.len() {
            let pre = Word::from_letters(x.letters()[..t].to_vec());
            let c = pre.inverse().mul(&w).mul(&pre);
            prop_assert_eq!(d[t], (c.len() - translation_length(&w)) / 2);
        }
    }

    #[test]
    fn word_display_round_trips(w in word(40)) {
        prop_assert_eq!(Word::parse(&w.to_string()).unwrap(), w);
    }
}

fn small_array(seed: u64) -> Graph {
    build_array(&random_array_desc(seed, 3, 9, 400)).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn documents_round_trip(seed in any::<u64>()) {
        let desc = DescDocument::Array(random_array_desc(seed, 3, 9, 400));
        prop_assert_eq!(DescDocument::from_document(&desc.to_document()).unwrap(), desc.clone());
        let g = desc.build(10_000).unwrap();
        let again = Graph::from_document(&g.to_document()).unwrap();
        prop_assert_eq!(again.hash(), g.hash());
        prop_assert_eq!(again.labels(), g.labels());
    }

    #[test]
    fn builder_volume_matches_description(seed in any::<u64>()) {
        let desc = random_array_desc(seed, 4, 9, 2000);
        let g = build_array(&desc).unwrap();
        prop_assert_eq!(g.volume() as u128, desc.volume());
    }

    #[test]
    fn rayleigh_quotients_dominate_lambda1(seed in any::<u64>(), vals in prop::collection::vec(-1.0f64..1.0, 400)) {
        let g = small_array(seed);
        let lam = lambda1_dense(&g).unwrap().lambda1;
        let mut f = VertexFunction::new(vals[..g.vertex_count()].to_vec());
        f.center();
        prop_assume!(!f.is_zero());
        prop_assert!(rayleigh(&g, &f).unwrap() >= lam * (1.0 - 1e-12));
    }

    #[test]
    fn lambda1_respects_the_array_bound(seed in any::<u64>()) {
        let desc = random_array_desc(seed, 4, 9, 2000);
        let g = build_array(&desc).unwrap();
        let h = desc.depth() as u32;
        let lam = lambda1_dense(&g).unwrap().lambda1;
        prop_assert!(lam <= upper_bound_array(g.volume() as u128, h));
        prop_assert!(exponent(h) > 1.0);
    }

    #[test]
    fn minmax_is_sound(seed in any::<u64>(), split in 0.2f64..0.8, vals in prop::collection::vec(0.1f64..1.0, 400)) {
        let g = small_array(seed);
        let n = g.vertex_count();
        let cut = ((n as f64) * split) as usize;
        // Two bumps with a gap between them so the supports are disjoint.
        let f0 = VertexFunction::new((0..n).map(|v| if v < cut { vals[v] } else { 0.0 }).collect());
        let f1 = VertexFunction::new((0..n).map(|v| if v > cut { vals[v] } else { 0.0 }).collect());
        prop_assume!(!f0.is_zero() && !f1.is_zero());
        let lam = lambda1_dense(&g).unwrap().lambda1;
        let bound = minmax_bound(&g, &f0, &f1).unwrap();
        prop_assert!(lam <= bound * (1.0 + 1e-12), "lam {} bound {} adjacent {}", lam, bound, supports_adjacent(&g, &f0, &f1));
    }

    #[test]
    fn solvers_agree(seed in any::<u64>()) {
        let g = small_array(seed);
        let d = lambda1_dense(&g).unwrap().lambda1;
        let i = lambda1_iterative(&g, 1e-10).unwrap().lambda1;
        prop_assert!((d - i).abs() <= 1e-8 * d);
    }

    #[test]
    fn generators_respect_the_volume_budget(seed in any::<u64>(), budget in 3usize..4000) {
        prop_assert!(random_array_desc(seed, 4, 64, budget).volume() <= budget as u128);
        prop_assert!(random_gen_desc(seed, 3, 48, budget).volume() <= budget as u128);
    }

    #[test]
    fn collapse_contracts(seed in any::<u64>(), vals in prop::collection::vec(-1.0f64..1.0, 3000)) {
        let g = build_generalized(&random_gen_desc(seed, 3, 8, 800)).unwrap();
        let res = collapse(&g).unwrap();
        prop_assert!(res.volume_ok());
        let mut f = VertexFunction::new(vals[..res.h.vertex_count()].to_vec());
        f.center();
        prop_assume!(!f.is_zero());
        prop_assert!(pullback_energy_check(&g, &res, &f).unwrap().ok());
    }
}

#[test]
fn walks_are_deterministic() {
    let cfg = WalkConfig {
        steps: 500,
        trials: 20,
        ..WalkConfig::default()
    };
    assert_eq!(run_walks(&cfg).unwrap(), run_walks(&cfg).unwrap());
}
