#![allow(dead_code)]
//! Scripted git repositories for miner tests.

use std::path::Path;
use std::process::Command;

use tempfile::TempDir;

pub const DAY: i64 = 86_400;
/// 2021-01-01T00:00:00Z
pub const EPOCH: i64 = 1_609_459_200;

pub struct ScriptedRepo {
    dir: TempDir,
}

impl ScriptedRepo {
    pub fn new() -> Self {
        let dir = tempfile::Builder::new().prefix("scripted-").tempdir().unwrap();
        let repo = ScriptedRepo { dir };
        repo.git(&["init", "-q", "-b", "main"]);
        repo
    }

    pub fn path(&self) -> &Path {
        self.dir.path()
    }

    pub fn git(&self, args: &[&str]) -> String {
        self.git_at(args, EPOCH)
    }

    fn git_at(&self, args: &[&str], when: i64) -> String {
        let date = format!("@{when} +0000");
        let out = Command::new("git")
            .arg("-C")
            .arg(self.path())
            .args(args)
            .env("GIT_CONFIG_GLOBAL", "/dev/null")
            .env("GIT_CONFIG_NOSYSTEM", "1")
            .env("GIT_AUTHOR_NAME", "Test")
            .env("GIT_AUTHOR_EMAIL", "test@example.com")
            .env("GIT_COMMITTER_NAME", "Test")
            .env("GIT_COMMITTER_EMAIL", "test@example.com")
            .env("GIT_AUTHOR_DATE", &date)
            .env("GIT_COMMITTER_DATE", &date)
            .output()
            .unwrap();
        assert!(out.status.success(), "git {args:?}: {}", String::from_utf8_lossy(&out.stderr));
        String::from_utf8(out.stdout).unwrap()
    }

    pub fn write(&self, path: &str, content: impl AsRef<[u8]>) -> &Self {
        let full = self.path().join(path);
        std::fs::create_dir_all(full.parent().unwrap()).unwrap();
        std::fs::write(full, content).unwrap();
        self
    }

    pub fn remove(&self, path: &str) -> &Self {
        self.git(&["rm", "-q", path]);
        self
    }

    /// Commits everything with the given author date and returns the id.
    pub fn commit(&self, message: &str, when: i64) -> String {
        self.git_at(&["add", "-A"], when);
        self.git_at(&["commit", "-q", "--allow-empty", "-m", message], when);
        self.head()
    }

    pub fn merge(&self, branch: &str, when: i64) -> String {
        self.git_at(&["merge", "-q", "--no-ff", "-m", &format!("merge {branch}"), branch], when);
        self.head()
    }

    pub fn head(&self) -> String {
        self.git(&["rev-parse", "HEAD"]).trim().to_string()
    }

    /// Content of `path` at `commit`, straight from git.
    pub fn show(&self, commit: &str, path: &str) -> Vec<u8> {
        let out = Command::new("git")
            .arg("-C")
            .arg(self.path())
            .args(["show", &format!("{commit}:{path}")])
            .output()
            .unwrap();
        assert!(out.status.success());
        out.stdout
    }
}

pub const LAMBDA: &str = "fun a() {\n    listOf(1).map { it + 1 }\n}\n";
pub const DATA: &str = "data class P(val x: Int)\n";
pub const ALIAS: &str = "typealias Name = String\n";

/// Nine first-parent commits (plus two on a feature branch) covering adds,
/// edits, deletions, renames, a non-Kotlin commit, an undecodable file and a merge.
pub fn fidelity_repo() -> ScriptedRepo {
    let r = ScriptedRepo::new();
    r.write("README.md", "docs\n");
    r.commit("docs only", EPOCH);
    r.write("src/A.kt", LAMBDA);
    r.commit("add A", EPOCH + DAY);
    r.write("src/B.kt", "class B {\n    val n = 1\n    fun f(x: Int = 2) = x?.let { it }\n}\n");
    r.commit("add B", EPOCH + 2 * DAY);
    r.write("src/A.kt", format!("{LAMBDA}val s = \"${{1 + 2}}\"\n"));
    r.commit("edit A", EPOCH + 3 * DAY);

    r.git(&["checkout", "-q", "-b", "feature"]);
    r.write("src/feature/F.kt", "sealed class F\nobject G : F()\n");
    r.commit("feature 1", EPOCH + 4 * DAY);
    r.write("src/feature/F.kt", "sealed class F\nobject G : F()\ndata class H(val x: Int) : F()\n");
    r.commit("feature 2", EPOCH + 5 * DAY);
    r.git(&["checkout", "-q", "main"]);

    r.write("build.gradle.kts", "plugins { kotlin(\"jvm\") }\nval v by lazy { 1 }\n");
    r.commit("script", EPOCH + 6 * DAY);
    r.merge("feature", EPOCH + 7 * DAY);
    r.remove("src/B.kt");
    r.commit("delete B", EPOCH + 8 * DAY);
    r.write("src/Bad.kt", b"val x = \"\xff\xfe\"\n");
    r.git(&["mv", "src/A.kt", "src/Renamed.kt"]);
    r.commit("rename A, add undecodable", EPOCH + 9 * DAY);
    r.write("src/C.kt", DATA);
    r.commit("add C", EPOCH + 10 * DAY);
    r
}
