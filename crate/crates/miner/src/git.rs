//! Thin wrapper over the `git` executable.

use std::ffi::OsStr;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};
use std::process::{Child, ChildStdin, ChildStdout, Command, Stdio};

use crate::MineError;

#[derive(Debug, Clone)]
pub struct Repo {
    path: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CommitInfo {
    pub id: String,
    /// Author date, seconds since the epoch.
    pub timestamp: i64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TreeEntry {
    pub path: String,
    pub oid: String,
}

impl Repo {
    pub fn open(path: impl AsRef<Path>) -> Result<Repo, MineError> {
        let path = path.as_ref();
        let not_found = || MineError::RepoNotFound(path.to_path_buf());
        let path = path.canonicalize().map_err(|_| not_found())?;
        let repo = Repo { path };
        match repo.run(["rev-parse", "--git-dir"]) {
            Ok(_) => Ok(repo),
            Err(_) => Err(not_found()),
        }
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    fn command(&self) -> Command {
        let mut cmd = Command::new("git");
        cmd.arg("-C").arg(&self.path);
        cmd.args(["-c", "core.quotepath=off", "-c", "log.showSignature=false"]);
        // never climb out into an enclosing repository
        if let Some(parent) = self.path.parent() {
            cmd.env("GIT_CEILING_DIRECTORIES", parent);
        }
        cmd.env_remove("GIT_DIR").env_remove("GIT_WORK_TREE");
        cmd
    }

    fn run_bytes<I, S>(&self, args: I) -> Result<Vec<u8>, MineError>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<OsStr>,
    {
        let args: Vec<_> = args.into_iter().map(|a| a.as_ref().to_os_string()).collect();
        let out = self.command().args(&args).stdin(Stdio::null()).output()?;
        if !out.status.success() {
            return Err(MineError::Git {
                command: args.iter().map(|a| a.to_string_lossy()).collect::<Vec<_>>().join(" "),
                stderr: String::from_utf8_lossy(&out.stderr).trim().to_string(),
            });
        }
        Ok(out.stdout)
    }

    fn run<I, S>(&self, args: I) -> Result<String, MineError>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<OsStr>,
    {
        let bytes = self.run_bytes(args)?;
        Ok(String::from_utf8_lossy(&bytes).into_owned())
    }

    fn has_commits(&self) -> Result<bool, MineError> {
        Ok(!self.run(["rev-list", "-n", "1", "--all"])?.trim().is_empty())
    }

    /// The branch HEAD points at, or `HEAD` when detached.
    pub fn head_branch(&self) -> Result<String, MineError> {
        match self.run(["symbolic-ref", "--quiet", "--short", "HEAD"]) {
            Ok(name) => Ok(name.trim().to_string()),
            Err(_) => Ok("HEAD".to_string()),
        }
    }

    fn resolve(&self, branch: &str) -> Result<String, MineError> {
        for candidate in [format!("refs/heads/{branch}"), branch.to_string()] {
            if candidate.starts_with('-') {
                continue;
            }
            if let Ok(id) = self.run(["rev-parse", "--verify", "--quiet", &format!("{candidate}^{{commit}}")]) {
                return Ok(id.trim().to_string());
            }
        }
        Err(MineError::BranchNotFound(branch.to_string()))
    }

    /// First-parent chain from the root to the tip of `branch`, oldest first.
    pub fn linearize(&self, branch: &str) -> Result<Vec<CommitInfo>, MineError> {
        if !self.has_commits()? {
            return Err(MineError::EmptyRepository);
        }
        let tip = self.resolve(branch)?;
        let log = self.run(["log", "--first-parent", "--reverse", "--format=%H %at", &tip])?;
        log.lines()
            .filter(|l| !l.is_empty())
            .map(|line| {
                let (id, ts) = line.split_once(' ').ok_or_else(|| MineError::Parse(line.to_string()))?;
                let timestamp = ts.trim().parse().map_err(|_| MineError::Parse(line.to_string()))?;
                Ok(CommitInfo { id: id.to_string(), timestamp })
            })
            .collect()
    }

    /// Regular files and executables ending in `.kt`/`.kts` at `commit`, by path.
    pub fn kotlin_files(&self, commit: &str) -> Result<Vec<TreeEntry>, MineError> {
        let out = self.run_bytes(["ls-tree", "-r", "-z", "--full-tree", commit])?;
        let mut entries = Vec::new();
        for record in out.split(|&b| b == 0).filter(|r| !r.is_empty()) {
            let tab = record.iter().position(|&b| b == b'\t').ok_or_else(|| MineError::Parse(lossy(record)))?;
            let meta = lossy(&record[..tab]);
            let path = String::from_utf8_lossy(&record[tab + 1..]).into_owned();
            let mut fields = meta.split(' ');
            let (Some(mode), Some(kind), Some(oid)) = (fields.next(), fields.next(), fields.next()) else {
                return Err(MineError::Parse(meta));
            };
            if kind == "blob" && mode != "120000" && is_kotlin(&path) {
                entries.push(TreeEntry { path, oid: oid.to_string() });
            }
        }
        entries.sort_by(|a, b| a.path.cmp(&b.path));
        Ok(entries)
    }

    pub fn blob_reader(&self) -> Result<BlobReader, MineError> {
        let mut child = self
            .command()
            .args(["cat-file", "--batch"])
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::null())
            .spawn()?;
        let stdin = BufWriter::new(child.stdin.take().expect("piped"));
        let stdout = BufReader::new(child.stdout.take().expect("piped"));
        Ok(BlobReader { child, stdin: Some(stdin), stdout })
    }
}

pub fn is_kotlin(path: &str) -> bool {
    path.ends_with(".kt") || path.ends_with(".kts")
}

fn lossy(bytes: &[u8]) -> String {
    String::from_utf8_lossy(bytes).into_owned()
}

/// One `git cat-file --batch` process, queried one object at a time.
pub struct BlobReader {
    child: Child,
    stdin: Option<BufWriter<ChildStdin>>,
    stdout: BufReader<ChildStdout>,
}

impl BlobReader {
    pub fn read(&mut self, oid: &str) -> Result<Vec<u8>, MineError> {
        let stdin = self.stdin.as_mut().expect("open until drop");
        writeln!(stdin, "{oid}")?;
        stdin.flush()?;
        let mut header = String::new();
        self.stdout.read_line(&mut header)?;
        let fields: Vec<&str> = header.split_whitespace().collect();
        let size: usize = match fields.as_slice() {
            [_, "blob", size] => size.parse().map_err(|_| MineError::Parse(header.clone()))?,
            _ => return Err(MineError::Parse(header.trim().to_string())),
        };
        let mut content = vec![0; size];
        self.stdout.read_exact(&mut content)?;
        let mut newline = [0u8; 1];
        self.stdout.read_exact(&mut newline)?;
        Ok(content)
    }
}

impl Drop for BlobReader {
    fn drop(&mut self) {
        drop(self.stdin.take());
        let _ = self.child.wait();
    }
}
