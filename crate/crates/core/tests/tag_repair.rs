mod common;

use std::time::Instant;

use common::{stream_of, TagOracle, TEXT};
use errcomm::framing::{repair_tags, Edit, RepairOptions, TagStream, Token};
use proptest::prelude::*;

fn apply_script(input: &TagStream, script: &[Edit]) -> TagStream {
    let mut out = Vec::new();
    let mut edits = script.iter().peekable();
    for pos in 0..=input.len() {
        while let Some(Edit::Insert { position, token }) = edits.peek() {
            if *position != pos {
                break;
            }
            out.push(token.clone());
            edits.next();
        }
        if pos == input.len() {
            break;
        }
        match edits.peek() {
            Some(Edit::Substitute { position, from, to }) if *position == pos => {
                assert_eq!(from, &input.0[pos]);
                out.push(to.clone());
                edits.next();
            }
            Some(Edit::Delete { position, token }) if *position == pos => {
                assert_eq!(token, &input.0[pos]);
                edits.next();
            }
            _ => out.push(input.0[pos].clone()),
        }
    }
    assert!(edits.next().is_none(), "script has edits out of order");
    TagStream(out)
}

#[test]
fn repair_cost_matches_exhaustive_search_up_to_eight_tokens() {
    let oracle = TagOracle::new(8);
    let started = Instant::now();
    for codes in oracle.all_strings() {
        let input = stream_of(&codes);
        let r = repair_tags(&input, &["a", "b"], RepairOptions::default()).unwrap();
        assert_eq!(r.cost, oracle.distance(&codes) as usize, "{codes:?}");
        assert_eq!(r.script.len(), r.cost);
        assert!(r.stream.is_well_formed());
        assert_eq!(apply_script(&input, &r.script), r.stream);
        let texts = codes.iter().filter(|&&c| c == TEXT).count();
        assert_eq!(r.stream.0.iter().filter(|t| **t == Token::Text).count(), texts);
    }
    eprintln!("checked up to 8 tokens in {:?}", started.elapsed());
}

fn token() -> impl Strategy<Value = Token> {
    prop_oneof![
        Just(Token::Text),
        prop::sample::select(vec!["x", "y", "z"]).prop_map(|n| Token::Open(n.into())),
        prop::sample::select(vec!["x", "y", "z"]).prop_map(|n| Token::Close(n.into())),
    ]
}

proptest! {
    #[test]
    fn repaired_streams_are_well_formed_and_stable(tokens in prop::collection::vec(token(), 0..14)) {
        let input = TagStream(tokens);
        let opts = RepairOptions { max_edits: 14, max_depth: 16 };
        let r = repair_tags(&input, &["x", "y", "z"], opts).unwrap();
        prop_assert!(r.stream.is_well_formed());
        prop_assert_eq!(apply_script(&input, &r.script), r.stream.clone());
        let again = repair_tags(&r.stream, &["x", "y", "z"], opts).unwrap();
        prop_assert_eq!(again.cost, 0);
    }
}
