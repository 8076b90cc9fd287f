use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use argbank_core::export::{parse_export, serialize_export, ExportDocument};
use argbank_core::testkit::random_graph;
use argbank_core::{NodeId, Strictness};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const SENTENCE_ONE: &str = include_str!("../../core/fixtures/sentence1.export");
const SENTENCE_TWO: &str = include_str!("../../core/fixtures/sentence2.export");

fn argbank(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_argbank"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn gold(dir: &Path) -> PathBuf {
    let mut a = parse_export(SENTENCE_ONE).unwrap();
    a.sentences.extend(parse_export(SENTENCE_TWO).unwrap().sentences);
    write(dir, "gold.export", &serialize_export(&a).unwrap())
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn help_lists_every_subcommand() {
    let o = argbank(&["--help"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    for c in [
        "train-pos",
        "tag",
        "train-labeler",
        "label",
        "train-chunker",
        "chunk",
        "project",
        "validate",
        "compare",
        "search",
        "serve",
    ] {
        assert!(text.contains(c), "{c} missing from help");
    }
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(argbank(&["tag", "--bogus"]).status.code(), Some(2));
    assert_eq!(argbank(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(argbank(&[]).status.code(), Some(2));
    let o = argbank(&["search", "[cat=", "x.export"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("column"));
}

#[test]
fn domain_errors_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write(dir.path(), "bad.export", "#FORMAT 1\n#BOS x\nonly\n#EOS x\n");
    let o = argbank(&["project", s(&bad)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("line 3"), "{}", stderr(&o));
    let g = gold(dir.path());
    let o = argbank(&["tag", "--model", "missing.json", s(&g)]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn compare_identical_files() {
    let dir = tempfile::tempdir().unwrap();
    let g = gold(dir.path());
    let o = argbank(&["compare", s(&g), s(&g)]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("0 inconsistencies\n"));

    let mut other = parse_export(&std::fs::read_to_string(&g).unwrap()).unwrap();
    other.sentences[1].set_label(NodeId(3), "SB".into()).unwrap();
    let b = write(dir.path(), "b.export", &serialize_export(&other).unwrap());
    let o = argbank(&["compare", s(&g), s(&b), "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["total_inconsistencies"], 1);
}

#[test]
fn train_and_tag() {
    let dir = tempfile::tempdir().unwrap();
    let g = gold(dir.path());
    let m = dir.path().join("m.json");
    assert_eq!(argbank(&["train-pos", "-o", s(&m), s(&g)]).status.code(), Some(0));
    let o = argbank(&["tag", "--model", s(&m), s(&g)]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    // seen words keep their only tag, so the corpus comes back unchanged
    assert_eq!(stdout(&o), std::fs::read_to_string(&g).unwrap());
    let o = argbank(&["tag", "--model", s(&m), "--format", "records", s(&g)]);
    let first = stdout(&o).lines().next().unwrap().to_owned();
    assert_eq!(first, "token\ts1\t0\tdaran\tPAV\t1");

    // a second section is added next to the first
    assert_eq!(argbank(&["train-labeler", "-o", s(&m), s(&g)]).status.code(), Some(0));
    let text = std::fs::read_to_string(&m).unwrap();
    assert!(text.contains("\"pos\"") && text.contains("\"labeler\""));
}

#[test]
fn label_keeps_corpus_valid() {
    let dir = tempfile::tempdir().unwrap();
    let g = gold(dir.path());
    let m = dir.path().join("m.json");
    assert_eq!(argbank(&["train-labeler", "-o", s(&m), s(&g)]).status.code(), Some(0));
    let o = argbank(&["label", "--model", s(&m), "--keep-categories", s(&g)]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let doc = parse_export(&stdout(&o)).unwrap();
    for g in &doc.sentences {
        assert!(g.validate(Strictness::Lenient).is_empty());
    }
    let o = argbank(&["label", "--model", s(&m), "--format", "records", s(&g)]);
    let text = stdout(&o);
    assert!(text.lines().any(|l| l.starts_with("phrase\ts2\t500\tVP\t")), "{text}");
    assert!(text.lines().any(|l| l == "edge\ts2\t0\t500\tPD\t1" || l == "edge\ts2\t0\t500\tPD\t0"));
}

const CHUNKS: &str = "#FORMAT 1
#TAGSET stts
#BOS c1
in\tAPPR\tAC\t500
dem\tART\tNK\t500
Haus\tNN\tNK\t500
#500\tPP\t--\t0
#EOS c1
#BOS c2
der\tART\tNK\t501
Mann\tNN\tNK\t501
aus\tAPPR\tAC\t500
dem\tART\tNK\t500
Dorf\tNN\tNK\t500
#500\tPP\tMNR\t501
#501\tNP\t--\t0
#EOS c2
";

const FLAT: &str = "#FORMAT 1
#TAGSET stts
#BOS f1
die\tART\tNK\t500
Frau\tNN\tNK\t500
aus\tAPPR\tNK\t500
dem\tART\tNK\t500
Dorf\tNN\tNK\t500
#500\tNP\t--\t0
#EOS f1
";

#[test]
fn chunk_deepens_flat_phrases() {
    let dir = tempfile::tempdir().unwrap();
    let train = write(dir.path(), "train.export", CHUNKS);
    let flat = write(dir.path(), "flat.export", FLAT);
    let m = dir.path().join("m.json");
    let o = argbank(&["train-chunker", "-o", s(&m), "--categories", "NP,PP", s(&train)]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let o = argbank(&["chunk", "--model", s(&m), s(&flat)]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let doc = parse_export(&stdout(&o)).unwrap();
    let g = &doc.sentences[0];
    assert!(g.validate(Strictness::Lenient).is_empty());
    assert_eq!(g.category(NodeId(501)).map(|c| c.as_str()), Some("PP"));
    assert_eq!(g.parent(NodeId(2)), Some(argbank_core::Parent::Node(NodeId(501))));
    assert_eq!(g.parent(NodeId(1)), Some(argbank_core::Parent::Node(NodeId(500))));

    // with a labeler in the container the inner edges get real labels
    assert_eq!(argbank(&["train-labeler", "-o", s(&m), s(&train)]).status.code(), Some(0));
    let o = argbank(&["chunk", "--model", s(&m), s(&flat)]);
    let doc = parse_export(&stdout(&o)).unwrap();
    assert_eq!(doc.sentences[0].edge(NodeId(2)).unwrap().label.as_str(), "AC");
    assert_eq!(doc.sentences[0].edge(NodeId(501)).unwrap().label.as_str(), "MNR");

    let o = argbank(&["chunk", "--model", s(&m), "--categories", "AP", s(&flat)]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn project_sentence_two() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(dir.path(), "s2.export", SENTENCE_TWO);
    let o = argbank(&["project", s(&p)]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let doc = parse_export(&stdout(&o)).unwrap();
    let g = &doc.sentences[0];
    let st = g.structure();
    assert!(g.nonterminal_ids().all(|n| {
        let y = st.yield_of(n);
        y.is_empty() || y[y.len() - 1] - y[0] + 1 == y.len()
    }));
    assert!(g.comment().unwrap().starts_with("*T1* "));
    let o = argbank(&["project", "--format", "records", s(&p)]);
    assert!(stdout(&o).starts_with("trace\ts2\t1\t"));
}

#[test]
fn validate_reports_violations() {
    let dir = tempfile::tempdir().unwrap();
    let g = gold(dir.path());
    assert_eq!(argbank(&["validate", "--strict", s(&g)]).status.code(), Some(0));
    let bad = write(dir.path(), "bad.export", &SENTENCE_TWO.replace("ADV", "XYZ"));
    assert_eq!(argbank(&["validate", s(&bad)]).status.code(), Some(0));
    let o = argbank(&["validate", "--strict", s(&bad)]);
    assert_eq!(o.status.code(), Some(1));
    let line = stdout(&o);
    assert!(line.starts_with("violation\t") && line.contains("\ts2\t3\t"), "{line}");
}

#[test]
fn search_records_and_sentences() {
    let dir = tempfile::tempdir().unwrap();
    let g = gold(dir.path());
    let o = argbank(&["search", "[cat=\"VP\"] > [pos=\"NN\"]", s(&g)]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(stdout(&o), "match\ts2\t_0=500\t_1=0\n");
    let o = argbank(&["search", "--format", "canonical", "[cat=\"VP\"] > [pos=\"NN\"]", s(&g)]);
    let doc = parse_export(&stdout(&o)).unwrap();
    assert_eq!(doc.sentences.len(), 1);
    assert_eq!(doc.sentences[0].sentence_id(), "s2");
}

#[test]
fn parallel_output_matches_sequential() {
    let dir = tempfile::tempdir().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let doc = ExportDocument::new((0..60).map(|i| random_graph(&mut rng, &format!("r{i}"), 10, 5, false)).collect());
    let p = write(dir.path(), "r.export", &serialize_export(&doc).unwrap());
    let m = dir.path().join("m.json");
    assert_eq!(argbank(&["train-pos", "-o", s(&m), s(&p)]).status.code(), Some(0));
    assert_eq!(argbank(&["train-labeler", "-o", s(&m), s(&p)]).status.code(), Some(0));
    for args in [
        vec!["project", s(&p)],
        vec!["tag", "--model", s(&m), "--format", "records", s(&p)],
        vec!["label", "--model", s(&m), s(&p)],
    ] {
        let one = argbank(&[args.clone(), vec!["--jobs", "1"]].concat());
        let four = argbank(&[args.clone(), vec!["--jobs", "4"]].concat());
        assert_eq!(one.status.code(), Some(0), "{args:?}: {}", stderr(&one));
        assert_eq!(one.stdout, four.stdout, "{args:?}");
        assert_eq!(one.stdout, argbank(&[args.clone(), vec!["--jobs", "4"]].concat()).stdout);
    }
}

#[test]
fn serve_rejects_a_bad_config() {
    let dir = tempfile::tempdir().unwrap();
    let c = write(dir.path(), "c.toml", "max_increment_span = 0\n");
    let o = argbank(&["serve", "--config", s(&c)]);
    assert_eq!(o.status.code(), Some(1));
    let c = write(dir.path(), "d.toml", "colour = \"blue\"\n");
    assert_eq!(argbank(&["serve", "--config", s(&c)]).status.code(), Some(1));
}
