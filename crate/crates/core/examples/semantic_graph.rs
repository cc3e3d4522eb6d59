//! Serializes a small scene graph, frames it with a caption and a tweet, and
//! prints the visibility matrix with a token legend.

use seqcsg::corpus::{clean_tweet, ImageTriple, Label, ObjectTriple, Sample, SceneGraphRecord};
use seqcsg::semgraph::{assemble_input, build_visibility_matrix, select_triples, serialize_triples, Template};

fn main() -> anyhow::Result<()> {
    let mut graph = SceneGraphRecord::empty("station");
    for (s, p, o, score) in [
        ("train", "has", "seat", 0.9),
        ("person", "near", "bench", 0.7),
        ("dog", "on", "leash", 0.2),
    ] {
        graph.object_object.push(ObjectTriple {
            subject: s.into(),
            predicate: p.into(),
            object: o.into(),
            score,
        });
    }
    graph.image_object.push(ImageTriple {
        region_id: "r0".into(),
        object: "train".into(),
        score: 0.8,
    });
    graph.region_features.insert("r0".into(), vec![0.0; 4]);

    let sample = Sample::new(
        "ex",
        "Congrats to $T$ of Danville !",
        "Jackson Swisher",
        Label::Positive,
        "station",
    )?;
    let tweet = clean_tweet(&sample)?;
    // k = 2 keeps the two best object-object triples
    let triples = serialize_triples(&select_triples(&graph, 2, 1));

    for template in [Template::Plain, Template::Tagged] {
        let seq = assemble_input(&triples, Some("a train at a station"), &tweet, template);
        let m = build_visibility_matrix(&seq);
        println!("{template}: {}", seq.render());
        println!("{} tokens, {} hidden pairs", seq.len(), m.zero_count());
        if template == Template::Plain {
            print!("{}", m.to_labelled_grid(&seq));
        }
    }
    Ok(())
}
