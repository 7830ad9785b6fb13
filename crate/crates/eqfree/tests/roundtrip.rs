use eqfree::formula::parse;
use eqfree::harness::{generate_structures, Mode};
use eqfree::structure::{Structure, Vocabulary};
use proptest::prelude::*;

fn mixed_vocab() -> Vocabulary {
    Vocabulary::new()
        .with_relation("P", 1)
        .with_relation("R", 2)
        .with_function("f", 1)
        .with_constant("c")
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn structure_json_round_trips(seed in any::<u64>()) {
        let batch = generate_structures(
            &mixed_vocab(),
            4,
            Mode::Random { seed, count: 4 },
        ).unwrap();
        for s in batch {
            let back = Structure::from_json_str(&s.to_json_string()).unwrap();
            prop_assert_eq!(s.to_json_string(), back.to_json_string());
        }
    }

    #[test]
    fn formula_print_parse_round_trips(seed in any::<u64>()) {
        // printed enumeration sentences re-parse to the same rendering
        let vocab = Vocabulary::new().with_relation("P", 1);
        let sentences = eqfree::formula::enumerate_sentences(&vocab, 2, 2).unwrap();
        let pick = (seed % sentences.len() as u64) as usize;
        let text = sentences[pick].to_string();
        let back = parse(&text, &vocab).unwrap();
        prop_assert_eq!(text, back.to_string());
    }
}
