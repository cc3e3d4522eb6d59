mod common;

use proptest::prelude::*;

use common::brute_force_visibility;
use seqcsg::corpus::{ImageTriple, ObjectTriple, SceneGraphRecord};
use seqcsg::semgraph::{
    assemble_input, build_visibility_matrix, select_triples, serialize_triples, tokenize_text, SelectedTriples,
    Template, TokenRole,
};

const ENTITIES: [&str; 6] = ["man", "Dog", "red  car", "tree", "train", "person"];
const RELATIONS: [&str; 4] = ["near", "on top of", "has", "behind"];

fn object_triple() -> impl Strategy<Value = ObjectTriple> {
    (0..ENTITIES.len(), 0..RELATIONS.len(), 0..ENTITIES.len(), 0.0..=1.0f64).prop_map(|(s, p, o, score)| ObjectTriple {
        subject: ENTITIES[s].into(),
        predicate: RELATIONS[p].into(),
        object: ENTITIES[o].into(),
        score,
    })
}

fn selected() -> impl Strategy<Value = SelectedTriples> {
    (
        prop::collection::vec(object_triple(), 0..5),
        prop::collection::vec((0..ENTITIES.len(), 0.0..=1.0f64), 0..4),
    )
        .prop_map(|(object_object, io)| SelectedTriples {
            object_object,
            image_object: io
                .into_iter()
                .enumerate()
                .map(|(r, (e, score))| ImageTriple {
                    region_id: format!("r{r}"),
                    object: ENTITIES[e].into(),
                    score,
                })
                .collect(),
        })
}

fn template() -> impl Strategy<Value = Template> {
    prop_oneof![Just(Template::Plain), Just(Template::Tagged)]
}

/// Independent token count of one triple's rendering.
fn words(s: &str) -> usize {
    tokenize_text(s).len()
}

proptest! {
    #[test]
    fn serialized_token_count(triples in selected()) {
        let tokens = serialize_triples(&triples);
        let mut expected = 0;
        for t in &triples.object_object {
            expected += words(&t.subject) + words(&t.predicate) + words(&t.object) + 2;
        }
        for t in &triples.image_object {
            expected += 1 + 2 + 2 + words(&t.object);
        }
        let n = triples.len();
        if n > 0 {
            expected += n - 1;
        }
        prop_assert_eq!(tokens.len(), expected);
        let separators = tokens.iter().filter(|t| t.role == TokenRole::TripleSeparator).count();
        prop_assert_eq!(separators, n.saturating_sub(1));
    }

    #[test]
    fn matrix_is_symmetric_binary_unit_diagonal_and_matches_oracle(
        triples in selected(),
        caption in prop::option::of("[a-z]{1,6}( [a-z]{1,6}){0,3}"),
        template in template(),
    ) {
        let seq = assemble_input(&serialize_triples(&triples), caption.as_deref(), "[target] Bob [/target] rocks", template);
        prop_assert!(seq.check().is_ok());
        let m = build_visibility_matrix(&seq);
        prop_assert!(m.is_symmetric());
        prop_assert!(m.as_bytes().iter().all(|&b| b <= 1));
        for i in 0..m.size() {
            prop_assert!(m.get(i, i));
        }
        let oracle = brute_force_visibility(&seq.tokens);
        for (i, row) in oracle.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                prop_assert_eq!(m.get(i, j), v == 1, "cell ({}, {})", i, j);
            }
        }
        if triples.is_empty() {
            prop_assert!(m.is_all_ones());
        }
    }

    #[test]
    fn removing_a_triple_restricts_the_matrix(
        triples in selected().prop_filter("needs a triple", |t| !t.is_empty()),
        pick in any::<prop::sample::Index>(),
        template in template(),
    ) {
        let tweet = "[target] Ann [/target] at the station";
        let full = assemble_input(&serialize_triples(&triples), Some("a train"), tweet, template);
        let victim = pick.index(triples.len());
        let mut fewer = triples.clone();
        if victim < fewer.object_object.len() {
            fewer.object_object.remove(victim);
        } else {
            fewer.image_object.remove(victim - triples.object_object.len());
        }
        let small = assemble_input(&serialize_triples(&fewer), Some("a train"), tweet, template);

        // surviving indices: drop the victim's tokens and one neighbouring [ts]
        let first = full.tokens.iter().position(|t| t.triple_id == Some(victim)).unwrap();
        let last = full.tokens.iter().rposition(|t| t.triple_id == Some(victim)).unwrap();
        let (lo, hi) = if full.tokens[first - 1].role == TokenRole::TripleSeparator {
            (first - 1, last)
        } else if full.tokens.get(last + 1).map(|t| t.role) == Some(TokenRole::TripleSeparator) {
            (first, last + 1)
        } else {
            (first, last)
        };
        let keep: Vec<usize> = (0..full.len()).filter(|i| *i < lo || *i > hi).collect();
        let kept_text: Vec<&str> = keep.iter().map(|&i| full.tokens[i].text.as_str()).collect();
        prop_assert_eq!(kept_text, small.texts());
        prop_assert_eq!(build_visibility_matrix(&full).restrict(&keep), build_visibility_matrix(&small));
    }
}

#[test]
fn shared_entity_links_triples_but_relations_stay_apart() {
    let mut graph = SceneGraphRecord::empty("img");
    graph.object_object.push(ObjectTriple {
        subject: "train".into(),
        predicate: "has".into(),
        object: "seat".into(),
        score: 0.9,
    });
    graph.object_object.push(ObjectTriple {
        subject: "person".into(),
        predicate: "near".into(),
        object: "bench".into(),
        score: 0.8,
    });
    graph.image_object.push(ImageTriple {
        region_id: "r0".into(),
        object: "train".into(),
        score: 0.7,
    });
    graph.region_features.insert("r0".into(), vec![0.0; 2]);
    let seq = assemble_input(
        &serialize_triples(&select_triples(&graph, 5, 5)),
        Some("a train at a station"),
        "[target] Ann [/target] waits",
        Template::Plain,
    );
    let pos = |text: &str, triple: usize| {
        seq.tokens
            .iter()
            .position(|t| t.text == text && t.triple_id == Some(triple))
            .unwrap()
    };
    let m = build_visibility_matrix(&seq);
    assert!(m.get(pos("train", 0), pos("train", 2)));
    assert!(!m.get(pos("has", 0), pos("person", 1)));
    assert!(!m.get(pos("has", 0), pos("train", 2)));
    let tweet = seq.tokens.iter().position(|t| t.text == "waits").unwrap();
    for j in 0..seq.len() {
        assert!(m.get(tweet, j));
    }
}

#[test]
fn plain_frame_with_empty_triples() {
    let seq = assemble_input(&[], Some("a dog"), "[target] Rex [/target]", Template::Plain);
    assert_eq!(seq.render(), "[s] [/s] a dog [/s] [target] Rex [/target] [/s]");
}
