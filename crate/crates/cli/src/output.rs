//! Output directories are assembled next to their destination and moved
//! into place only once every file is written.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use tempfile::{NamedTempFile, TempDir};

pub struct Staging {
    dir: TempDir,
    dest: PathBuf,
    files: Vec<String>,
}

impl Staging {
    pub fn new(dest: &Path) -> Result<Self> {
        if dest.exists() && !dest.join("manifest.json").exists() {
            let empty = fs::read_dir(dest).map(|mut d| d.next().is_none()).unwrap_or(false);
            if !empty {
                bail!("{} exists and is not a previous output directory", dest.display());
            }
        }
        let parent = match dest.parent() {
            Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
            _ => PathBuf::from("."),
        };
        fs::create_dir_all(&parent).with_context(|| format!("creating {}", parent.display()))?;
        let dir = tempfile::Builder::new()
            .prefix(".hubsim-")
            .tempdir_in(&parent)
            .with_context(|| format!("creating a staging directory in {}", parent.display()))?;
        Ok(Staging { dir, dest: dest.to_path_buf(), files: Vec::new() })
    }

    /// Writes `rel` (relative to the output directory) and records it.
    pub fn write(&mut self, rel: &str, contents: &[u8]) -> Result<()> {
        let path = self.dir.path().join(rel);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent)?;
        }
        fs::write(&path, contents).with_context(|| format!("writing {rel}"))?;
        self.files.push(rel.to_string());
        Ok(())
    }

    pub fn files(&self) -> &[String] {
        &self.files
    }

    /// Replaces the destination with the staged directory.
    pub fn commit(self) -> Result<PathBuf> {
        let staged = self.dir.keep();
        if self.dest.exists() {
            fs::remove_dir_all(&self.dest)
                .with_context(|| format!("removing previous {}", self.dest.display()))?;
        }
        fs::rename(&staged, &self.dest)
            .with_context(|| format!("moving output into {}", self.dest.display()))?;
        Ok(self.dest)
    }
}

/// Writes a single file through a temporary sibling and a rename.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let parent = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    };
    fs::create_dir_all(&parent)?;
    let mut tmp = NamedTempFile::new_in(&parent)?;
    std::io::Write::write_all(&mut tmp, contents)?;
    tmp.persist(path)
        .with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn staged_files_appear_only_on_commit() {
        let root = tempfile::tempdir().unwrap();
        let dest = root.path().join("out");
        let mut st = Staging::new(&dest).unwrap();
        st.write("a.csv", b"x\n").unwrap();
        st.write("runs/run_000.csv", b"y\n").unwrap();
        assert!(!dest.exists());
        st.commit().unwrap();
        assert_eq!(fs::read(dest.join("runs/run_000.csv")).unwrap(), b"y\n");
    }

    #[test]
    fn dropped_staging_leaves_nothing() {
        let root = tempfile::tempdir().unwrap();
        let dest = root.path().join("out");
        {
            let mut st = Staging::new(&dest).unwrap();
            st.write("a.csv", b"x\n").unwrap();
        }
        assert!(!dest.exists());
        assert_eq!(fs::read_dir(root.path()).unwrap().count(), 0);
    }

    #[test]
    fn refuses_foreign_directory() {
        let root = tempfile::tempdir().unwrap();
        fs::write(root.path().join("notes.txt"), "keep").unwrap();
        assert!(Staging::new(root.path()).is_err());
    }
}
