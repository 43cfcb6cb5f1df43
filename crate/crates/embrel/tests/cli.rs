use std::fs;
use std::path::Path;
use std::process::Command;

use clap::Parser;
use embrel::cli::{self, Cli};

const EMB: &str = "6 2
кот 1 0
кошка 0.9 0.1
собака 0.8 0.3
стол 0 1
стул 0.2 0.9
дом 0.5 0.5
";

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_embrel"))
}

fn run(args: &[&str]) -> embrel::Result<String> {
    let cli = Cli::try_parse_from(std::iter::once("embrel").chain(args.iter().copied())).unwrap();
    cli::run_with_env(cli, None)
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.display().to_string()
}

fn pairs_csv(n: usize) -> String {
    let animals = ["кот", "кошка", "собака"];
    let furniture = ["стол", "стул"];
    let mut s = String::from("post,op_post,is_related\n");
    for i in 0..n {
        let related = i % 2 == 0;
        let words: &[&str] = if related { &animals } else { &furniture };
        let post = format!("{} и <b>{}</b>!", words[i % words.len()], words[(i + 1) % words.len()]);
        let op = format!("{} http://example.com {}", words[(i + 2) % words.len()], words[i % words.len()]);
        s.push_str(&format!("\"{post}\",\"{op}\",{}\n", related as u8));
    }
    s
}

#[test]
fn eval_sim_writes_reports_with_drop_counts() {
    let dir = tempfile::tempdir().unwrap();
    let emb = write(dir.path(), "m.txt", EMB);
    let hj = write(dir.path(), "hj.csv", "word1,word2,sim\nкот,кошка,9\nкот,стол,1\nстол,стул,8\nкот,зебра,5\n");
    let rt = write(dir.path(), "rt.csv", "word1,word2,sim\nкот,кошка,1\nкот,стол,0\nстол,стул,1\n");
    let out = dir.path().join("out");
    let summary = run(&[
        "eval-sim",
        "--embeddings",
        &format!("m={emb}"),
        "--gold",
        &format!("HJ={hj}:graded"),
        "--gold",
        &format!("RT={rt}:binary"),
        "--out",
        out.to_str().unwrap(),
    ])
    .unwrap();
    let csv = fs::read_to_string(out.join("similarity.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "model,dataset,metric,value,pairs_total,pairs_dropped");
    assert!(lines[1].starts_with("m,HJ,spearman,1,4,1"), "{}", lines[1]);
    assert!(lines[2].starts_with("m,RT,ap,1,3,0"), "{}", lines[2]);
    assert_eq!(fs::read_to_string(out.join("similarity.txt")).unwrap(), summary);
}

#[test]
fn missing_input_exits_with_code_two_and_names_the_path() {
    let dir = tempfile::tempdir().unwrap();
    let hj = write(dir.path(), "hj.csv", "word1,word2,sim\na,b,1\n");
    let missing = dir.path().join("nowhere.txt");
    let output = bin()
        .args(["eval-sim", "--embeddings", &format!("m={}", missing.display()), "--gold", &format!("HJ={hj}:graded")])
        .arg("--out")
        .arg(dir.path().join("out"))
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains(&missing.display().to_string()), "{stderr}");
    assert!(!dir.path().join("out").exists());
}

#[test]
fn computation_failure_exits_with_code_one() {
    let dir = tempfile::tempdir().unwrap();
    let emb = write(dir.path(), "m.txt", EMB);
    // every pair out of vocabulary
    let hj = write(dir.path(), "hj.csv", "word1,word2,sim\nзебра,жираф,1\nлев,тигр,2\n");
    let output = bin()
        .args(["eval-sim", "--embeddings", &format!("m={emb}"), "--gold", &format!("HJ={hj}:graded")])
        .arg("--out")
        .arg(dir.path().join("out"))
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(1), "{}", String::from_utf8_lossy(&output.stderr));
}

#[test]
fn keep_going_skips_failed_cells() {
    let dir = tempfile::tempdir().unwrap();
    let emb = write(dir.path(), "m.txt", EMB);
    let bad = write(dir.path(), "bad.txt", "a 1 2\nb 1\n");
    let hj = write(dir.path(), "hj.csv", "word1,word2,sim\nкот,кошка,9\nкот,стол,1\nстол,стул,8\n");
    let out = dir.path().join("out");
    let args = [
        "eval-sim".to_string(),
        "--embeddings".into(),
        format!("bad={bad}"),
        "--embeddings".into(),
        format!("m={emb}"),
        "--gold".into(),
        format!("HJ={hj}:graded"),
        "--out".into(),
        out.display().to_string(),
    ];
    let strict = bin().args(&args).output().unwrap();
    assert_eq!(strict.status.code(), Some(2));
    let lenient = bin().args(&args).arg("--keep-going").output().unwrap();
    assert_eq!(lenient.status.code(), Some(0));
    let csv = fs::read_to_string(out.join("similarity.csv")).unwrap();
    assert_eq!(csv.lines().count(), 2);
    assert!(csv.contains("\nm,HJ,"));
}

#[test]
fn eval_rel_grid_and_curve_agree() {
    let dir = tempfile::tempdir().unwrap();
    let emb = write(dir.path(), "m.txt", EMB);
    let pairs = write(dir.path(), "pairs.csv", &pairs_csv(40));
    let out = dir.path().join("out");
    let common = ["--embeddings", &format!("m={emb}"), "--pairs", &pairs, "--folds", "4", "--out", out.to_str().unwrap()];
    let mut args = vec!["eval-rel"];
    args.extend(common);
    let summary = run(&args).unwrap();
    assert!(summary.contains("(2)") && summary.contains("(4)"), "{summary}");
    for f in ["relatedness.csv", "relatedness.txt", "cv_m_sum.csv", "cv_m_con.csv", "cv_m_con_pca.csv", "pca_m.txt"] {
        assert!(out.join(f).is_file(), "{f}");
    }
    let rel = fs::read_to_string(out.join("relatedness.csv")).unwrap();
    let dims: Vec<&str> = rel.lines().skip(1).map(|l| l.split(',').nth(2).unwrap()).collect();
    assert_eq!(dims, ["2", "4", "2"]);
    assert_eq!(fs::read_to_string(out.join("cv_m_sum.csv")).unwrap().lines().count(), 5);

    let mut args = vec!["curve", "--fractions", "1.0"];
    args.extend(common);
    run(&args).unwrap();
    for (line, strategy) in rel.lines().skip(1).zip(["sum", "con", "con_pca"]) {
        let fields: Vec<&str> = line.split(',').collect();
        let curve = fs::read_to_string(out.join(format!("curve_m_{strategy}.csv"))).unwrap();
        let point: Vec<&str> = curve.lines().nth(1).unwrap().split(',').collect();
        assert_eq!((point[1], point[2]), (fields[5], fields[6]), "{strategy}");
    }
}

#[test]
fn per_fold_pca_and_swapped_order_run() {
    let dir = tempfile::tempdir().unwrap();
    let emb = write(dir.path(), "m.txt", EMB);
    let pairs = write(dir.path(), "pairs.csv", &pairs_csv(30));
    let out = dir.path().join("out");
    run(&[
        "eval-rel",
        "--embeddings",
        &format!("m={emb}"),
        "--pairs",
        &pairs,
        "--strategy",
        "con_pca",
        "--pca-per-fold",
        "--swap-concat-order",
        "--folds",
        "3",
        "--k",
        "1",
        "--out",
        out.to_str().unwrap(),
    ])
    .unwrap();
    assert!(!out.join("pca_m.txt").exists());
    assert!(out.join("cv_m_con_pca.csv").is_file());
}

#[test]
fn config_file_supplies_defaults_and_flags_win() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "m.txt", EMB);
    write(dir.path(), "pairs.csv", &pairs_csv(40));
    let config = write(
        dir.path(),
        "run.toml",
        "pairs = \"pairs.csv\"\nout = \"res\"\nfolds = 4\nstrategy = [\"sum\"]\n\n[[embeddings]]\nname = \"m\"\npath = \"m.txt\"\n",
    );
    run(&["eval-rel", "--config", &config]).unwrap();
    let rel = fs::read_to_string(dir.path().join("res/relatedness.csv")).unwrap();
    assert_eq!(rel.lines().nth(1).unwrap().split(',').take(4).collect::<Vec<_>>(), ["m", "sum", "2", "4"]);
    run(&["eval-rel", "--config", &config, "--folds", "5", "--strategy", "con"]).unwrap();
    let rel = fs::read_to_string(dir.path().join("res/relatedness.csv")).unwrap();
    assert_eq!(rel.lines().nth(1).unwrap().split(',').take(4).collect::<Vec<_>>(), ["m", "con", "4", "5"]);
}

#[test]
fn same_seed_repeats_exactly() {
    let dir = tempfile::tempdir().unwrap();
    let emb = write(dir.path(), "m.txt", EMB);
    let pairs = write(dir.path(), "pairs.csv", &pairs_csv(40));
    let go = |seed: &str, out: &str| {
        let out = dir.path().join(out);
        let status = bin()
            .args(["eval-rel", "--embeddings", &format!("m={emb}"), "--pairs", &pairs, "--strategy", "sum", "--seed", seed])
            .arg("--out")
            .arg(&out)
            .status()
            .unwrap();
        assert!(status.success());
        fs::read(out.join("cv_m_sum.csv")).unwrap()
    };
    assert_eq!(go("3", "a"), go("3", "b"));
}

#[test]
fn env_seed_applies_only_without_flag() {
    let dir = tempfile::tempdir().unwrap();
    let emb = write(dir.path(), "m.txt", EMB);
    let pairs = write(dir.path(), "pairs.csv", &pairs_csv(40));
    let go = |env: Option<&str>, flag: Option<&str>, out: &str| {
        let out = dir.path().join(out);
        let mut cmd = bin();
        cmd.args(["eval-rel", "--embeddings", &format!("m={emb}"), "--pairs", &pairs, "--strategy", "sum"])
            .arg("--out")
            .arg(&out)
            .env_remove("EMBREL_SEED");
        if let Some(s) = env {
            cmd.env("EMBREL_SEED", s);
        }
        if let Some(s) = flag {
            cmd.args(["--seed", s]);
        }
        assert!(cmd.status().unwrap().success());
        fs::read(out.join("cv_m_sum.csv")).unwrap()
    };
    assert_eq!(go(Some("5"), None, "a"), go(None, Some("5"), "b"));
    assert_eq!(go(Some("5"), Some("42"), "c"), go(None, None, "d"));
}

#[test]
fn dataset_agg_majority_with_and_without_texts() {
    let dir = tempfile::tempdir().unwrap();
    let ann = write(
        dir.path(),
        "ann.csv",
        "pair_id,annotator_id,label\np2,a,1\np1,a,0\np2,b,1\np1,b,1\np2,c,0\np1,c,0\n",
    );
    let texts = write(dir.path(), "texts.csv", "pair_id,post,op_post\np1,\"пост, один\",оп\np2,пост два,оп\n");
    let out = dir.path().join("labels");
    run(&["dataset-agg", &ann, "--out", out.to_str().unwrap()]).unwrap();
    assert_eq!(fs::read_to_string(out.join("pairs.csv")).unwrap(), "pair_id,is_related\np2,1\np1,0\n");
    let out = dir.path().join("full");
    let summary = run(&["dataset-agg", &ann, "--pairs", &texts, "--out", out.to_str().unwrap()]).unwrap();
    let pairs = embrel::formats::load_pairs(&out.join("pairs.csv")).unwrap();
    assert_eq!(pairs.len(), 2);
    assert_eq!((pairs[0].post.as_str(), pairs[0].is_related), ("пост два", true));
    assert_eq!((pairs[1].post.as_str(), pairs[1].is_related), ("пост, один", false));
    assert!(summary.contains("unanimous_fraction") && summary.contains("0.0000"));
    assert_eq!(fs::read_to_string(out.join("agreement.txt")).unwrap(), summary);

    let even = write(dir.path(), "even.csv", "pair_id,annotator_id,label\np1,a,0\np1,b,1\n");
    let status = bin().args(["dataset-agg", &even, "--out"]).arg(dir.path().join("x")).status().unwrap();
    assert_eq!(status.code(), Some(1));
}
