use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use featrend_core::detect::{DenominatorCounts, FeatureKind};
use featrend_core::history::{history_to_string, parse_history, CommitRecord, FileRecord, RepositoryHistory};

fn featrend(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_featrend")).args(args).current_dir(cwd).output().unwrap()
}

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn read_csv(path: &Path) -> Vec<BTreeMap<String, String>> {
    let mut r = csv::Reader::from_path(path).unwrap();
    let headers = r.headers().unwrap().clone();
    r.records().map(|rec| headers.iter().zip(rec.unwrap().iter()).map(|(h, v)| (h.to_string(), v.to_string())).collect()).collect()
}

#[test]
fn scan_single_declaration() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("a.kt"), "val a = 1\n").unwrap();
    let out = featrend(&["scan", ".", "--quiet"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = stdout(&out);
    assert!(text.starts_with("kind,instances,denominator,denominator_count,ratio\n"));
    assert!(text.contains("TypeInference,1,variable_declarations,1,1.000000\n"), "{text}");
}

#[test]
fn scan_empty_directory_and_errors() {
    let dir = tempfile::tempdir().unwrap();
    let out = featrend(&["scan", ".", "--quiet", "--features", "Lambda"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out), "kind,instances,denominator,denominator_count,ratio\nLambda,0,lloc,0,\n");

    let out = featrend(&["scan", "missing"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).starts_with("error: missing: no such file"));

    std::fs::write(dir.path().join("bad.kt"), b"val s = \"\xff\"\n").unwrap();
    std::fs::write(dir.path().join("ok.kt"), "val f = { 1 }\n").unwrap();
    let out = featrend(&["scan", ".", "--quiet", "--per-file", "files.csv"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(stderr(&out), "warning\tbad.kt\tbad.kt: invalid UTF-8 at byte 9\n");
    let rows = read_csv(&dir.path().join("files.csv"));
    assert!(rows.iter().any(|r| r["path"] == "ok.kt" && r["kind"] == "Lambda" && r["lines"] == "1"));
}

#[test]
fn scan_corpus_matches_labels() {
    let corpus = Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/tests/corpus");
    let out = featrend(&["scan", corpus.to_str().unwrap(), "--quiet"], &fixtures());
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let mut expected: BTreeMap<String, u64> = BTreeMap::new();
    for entry in std::fs::read_dir(&corpus).unwrap() {
        let text = std::fs::read_to_string(entry.unwrap().path()).unwrap();
        for marker in text.lines().filter_map(|l| l.split("// expect").nth(1)) {
            let body = marker.trim_start_matches("-next").trim_start_matches(':');
            let body = body.split("| miss:").next().unwrap();
            for item in body.split_whitespace() {
                let (kind, n) = item.split_once('*').map_or((item, 1), |(k, n)| (k, n.parse().unwrap()));
                *expected.entry(kind.to_string()).or_default() += n;
            }
        }
    }
    let mut r = csv::Reader::from_reader(out.stdout.as_slice());
    for rec in r.records() {
        let rec = rec.unwrap();
        assert_eq!(rec[1].parse::<u64>().unwrap(), expected.get(&rec[0]).copied().unwrap_or(0), "{}", &rec[0]);
    }
}

#[test]
fn trends_match_golden_file() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("trends.csv");
    let f = fixtures();
    let out = featrend(
        &["trends", "alpha.json", "beta.json", "gamma.json", "--out", out_path.to_str().unwrap(), "--quiet"],
        &f,
    );
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert_eq!(std::fs::read_to_string(&out_path).unwrap(), std::fs::read_to_string(f.join("trends.golden.csv")).unwrap());
}

fn history(repo: &str, series: &[(FeatureKind, Vec<u64>)], days: &[i64]) -> RepositoryHistory {
    let commits = days
        .iter()
        .enumerate()
        .map(|(i, &d)| {
            let features: BTreeMap<FeatureKind, u64> =
                series.iter().map(|(k, s)| (*k, s[i])).filter(|(_, n)| *n > 0).collect();
            let record = FileRecord {
                features,
                denominators: DenominatorCounts { lloc: 100, classes: 4, variable_declarations: 10, ..Default::default() },
                instances: Vec::new(),
            };
            CommitRecord {
                id: format!("{repo}{i:0>width$}", width = 40 - repo.len()),
                timestamp: 1_600_000_000 + d * 86_400,
                files: BTreeMap::from([("Main.kt".to_string(), record)]),
                warnings: Vec::new(),
            }
        })
        .collect();
    RepositoryHistory { repo_id: repo.to_string(), branch: "main".into(), commits }
}

#[test]
fn trends_lambda_line_and_absent_kinds() {
    let dir = tempfile::tempdir().unwrap();
    let h = history("r", &[(FeatureKind::Lambda, vec![1, 2, 3, 4])], &[0, 1, 2, 3]);
    std::fs::write(dir.path().join("h.json"), history_to_string(&h)).unwrap();
    std::fs::write(dir.path().join("broken.json"), "{\"schema\": \"featrend-history/1\"}").unwrap();
    let out = featrend(&["trends", "h.json", "broken.json", "--quiet"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).starts_with("warning\tbroken.json\tskipped: "), "{}", stderr(&out));
    let rows = read_csv(&dir.path().join("trends.csv"));
    assert_eq!(rows.len(), 1);
    assert_eq!((rows[0]["kind"].as_str(), rows[0]["label"].as_str(), rows[0]["bucket"].as_str()), ("Lambda", "CR", "Inc"));

    let out = featrend(&["trends", "broken.json"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    let out = featrend(&["trends", "h.json", "--delta", "1.5"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("delta must be below 1"));
}

#[test]
fn trends_plots_are_written() {
    let dir = tempfile::tempdir().unwrap();
    let f = fixtures();
    let out = featrend(
        &["trends", "beta.json", "--out", dir.path().join("t.csv").to_str().unwrap(), "--plots", dir.path().join("plots").to_str().unwrap(), "--quiet"],
        &f,
    );
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let svg = std::fs::read_to_string(dir.path().join("plots/beta__SafeCall.svg")).unwrap();
    assert!(svg.contains("<polyline") && svg.contains("PSR"));
    assert!(dir.path().join("plots/beta__TypeAlias.svg").exists());
}

#[test]
fn summarize_bundle() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    // Lambda introduced after 1, 4, 5 and 9 days; DataClass in every repo from the start
    let intro = [1, 4, 5, 9];
    let mut names = Vec::new();
    for (i, d) in intro.iter().enumerate() {
        let days: Vec<i64> = (0..=10).collect();
        let lambda: Vec<u64> = days.iter().map(|&t| if t >= *d { (t - d + 1) as u64 } else { 0 }).collect();
        let h = history(&format!("app{i}"), &[(FeatureKind::Lambda, lambda), (FeatureKind::DataClass, vec![1; 11])], &days);
        let name = format!("app{i}.json");
        std::fs::write(p.join(&name), history_to_string(&h)).unwrap();
        names.push(name);
    }
    let h = history("app4", &[(FeatureKind::DataClass, vec![2, 2, 2])], &[0, 3, 6]);
    std::fs::write(p.join("app4.json"), history_to_string(&h)).unwrap();
    names.push("app4.json".into());

    let mut args: Vec<&str> = vec!["trends", "--quiet"];
    args.extend(names.iter().map(String::as_str));
    assert_eq!(featrend(&args, p).status.code(), Some(0));
    let mut args: Vec<&str> = vec!["summarize", "--quiet", "--trends", "trends.csv", "--out-dir", "report"];
    args.extend(names.iter().map(String::as_str));
    let out = featrend(&args, p);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));

    let adoption = read_csv(&p.join("report/adoption.csv"));
    let row = |kind: &str| adoption.iter().find(|r| r["kind"] == kind).unwrap().clone();
    assert_eq!((row("DataClass")["apps_using"].as_str(), row("DataClass")["pct_apps"].as_str()), ("5", "100"));
    assert_eq!((row("Lambda")["apps_using"].as_str(), row("Lambda")["pct_apps"].as_str()), ("4", "80"));

    let dist = read_csv(&p.join("report/distributions.csv"));
    let lambda = dist.iter().find(|r| r["metric"] == "introduction_days" && r["kind"] == "Lambda").unwrap();
    // QUARTILE.INC({1,4,5,9})
    let cells: Vec<&str> = ["n", "min", "q1", "median", "q3", "max"].iter().map(|c| lambda[*c].as_str()).collect();
    assert_eq!(cells, ["4", "1.000000", "3.250000", "4.500000", "6.000000", "9.000000"]);

    let table = read_csv(&p.join("report/trend_table.csv"));
    for r in &table {
        let total: u64 = r["total"].parse().unwrap();
        let labels: u64 = ["CR", "CD", "S", "SR", "SD", "SRP", "PGR", "PGD", "PSR", "PSD", "I"].iter().map(|l| r[*l].parse::<u64>().unwrap()).sum();
        let buckets: u64 = ["Inc", "Dec", "Unstable", "Stable"].iter().map(|l| r[*l].parse::<u64>().unwrap()).sum();
        assert_eq!((labels, buckets), (total, total), "{r:?}");
    }
    let dc = table.iter().find(|r| r["kind"] == "DataClass").unwrap();
    assert_eq!((dc["total"].as_str(), dc["S"].as_str(), dc["S_pct"].as_str()), ("5", "5", "100"));
    for name in featrend::summary::OUTPUTS {
        assert!(p.join("report").join(name).exists(), "{name}");
    }

    // trends.csv naming a repository without a history
    std::fs::write(p.join("other.csv"), "repo,kind,label\nghost,Lambda,CR\n").unwrap();
    let mut args: Vec<&str> = vec!["summarize", "--trends", "other.csv", "--out-dir", "r2"];
    args.extend(names.iter().map(String::as_str));
    let out = featrend(&args, p);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("input mismatch"), "{}", stderr(&out));
}

#[test]
fn config_file_and_history_command() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    let repo = p.join("repo");
    std::fs::create_dir(&repo).unwrap();
    let git = |args: &[&str]| {
        let o = Command::new("git")
            .args(args)
            .current_dir(&repo)
            .env("GIT_CONFIG_GLOBAL", "/dev/null")
            .env("GIT_AUTHOR_NAME", "t")
            .env("GIT_AUTHOR_EMAIL", "t@e")
            .env("GIT_COMMITTER_NAME", "t")
            .env("GIT_COMMITTER_EMAIL", "t@e")
            .env("GIT_AUTHOR_DATE", "@1609459200 +0000")
            .env("GIT_COMMITTER_DATE", "@1609459200 +0000")
            .output()
            .unwrap();
        assert!(o.status.success());
    };
    git(&["init", "-q", "-b", "trunk"]);
    std::fs::write(repo.join("a.kt"), "val f = { 1 }\ndata class D(val x: Int)\n").unwrap();
    git(&["add", "-A"]);
    git(&["commit", "-q", "-m", "a"]);
    std::fs::write(p.join("run.conf"), "# only lambdas\nfeatures = Lambda\njobs = 2\n").unwrap();
    let out = featrend(&["--config", "run.conf", "history", "repo", "--out", "h.json", "--repo-id", "x"], p);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert!(stderr(&out).contains("mined 1 commits of x"));
    let h = parse_history(&std::fs::read_to_string(p.join("h.json")).unwrap()).unwrap();
    assert_eq!(h.branch, "trunk");
    assert_eq!(h.commits[0].totals(), BTreeMap::from([(FeatureKind::Lambda, 1)]));

    let out = featrend(&["history", "repo", "--branch", "nope", "--quiet"], p);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("branch \"nope\" not found"));
    std::fs::write(p.join("bad.conf"), "delta = 2\n").unwrap();
    assert_eq!(featrend(&["--config", "bad.conf", "scan", "repo"], p).status.code(), Some(1));
}
