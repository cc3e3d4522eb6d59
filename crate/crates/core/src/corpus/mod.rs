//! Ingestion of annotated tweets, precomputed captions and precomputed scene
//! graphs.

mod clean;
mod io;
mod join;
mod sample;
mod stats;
mod validate;

pub use clean::{clean_tweet, find_ignore_case, normalize_noise, TARGET_CLOSE, TARGET_OPEN};
pub use io::{
    format_split, import_benchmark_tsv, load_captions, load_scene_graphs, load_split, parse_caption_line,
    parse_dataset_line, parse_scene_graph_header, parse_scene_graph_line, parse_split, write_captions,
    write_scene_graphs, write_split, CaptionRecord, ImageTriple, LineError, ObjectTriple, SceneGraphFile,
    SceneGraphHeader, SceneGraphRecord, SCENE_GRAPH_FORMAT, SCENE_GRAPH_VERSION,
};
pub use join::{join_sources, JoinedInstance};
pub use sample::{DatasetSplit, Label, Sample, SplitName, TARGET_PLACEHOLDER};
pub use stats::{reference_counts, split_stats, ReferenceCounts, SplitStats, REFERENCE_COUNTS};
pub use validate::{validate_caption_file, validate_dataset_file, validate_scene_graph_file, Finding};
