//! Owner-only atomic file writes.

use std::fs::{self, OpenOptions};
use std::io::{self, Write};
use std::path::{Path, PathBuf};

/// The rename step of an atomic write. Replaceable for fault injection.
pub type RenameFn = fn(&Path, &Path) -> io::Result<()>;

pub fn std_rename(from: &Path, to: &Path) -> io::Result<()> {
    fs::rename(from, to)
}

fn temp_path(path: &Path) -> PathBuf {
    let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    path.with_file_name(format!(".{name}.tmp"))
}

/// Write `bytes` to a temp file next to `path` with mode 0600, then rename
/// it over `path`. If any step fails the previous contents of `path` are
/// untouched and the temp file is removed.
pub fn write_atomic(path: &Path, bytes: &[u8], rename: RenameFn) -> io::Result<()> {
    let tmp = temp_path(path);
    let _ = fs::remove_file(&tmp);
    let result = write_private(&tmp, bytes).and_then(|()| rename(&tmp, path));
    if result.is_err() {
        let _ = fs::remove_file(&tmp);
    }
    result?;
    ensure_owner_only(path)
}

fn write_private(path: &Path, bytes: &[u8]) -> io::Result<()> {
    let mut options = OpenOptions::new();
    options.write(true).create_new(true);
    #[cfg(unix)]
    {
        use std::os::unix::fs::OpenOptionsExt;
        options.mode(0o600);
    }
    let mut file = options.open(path)?;
    set_owner_only(path)?;
    file.write_all(bytes)?;
    file.sync_all()
}

#[cfg(unix)]
fn set_owner_only(path: &Path) -> io::Result<()> {
    use std::os::unix::fs::PermissionsExt;
    fs::set_permissions(path, fs::Permissions::from_mode(0o600))
}

#[cfg(not(unix))]
fn set_owner_only(_path: &Path) -> io::Result<()> {
    Ok(())
}

/// Permission bits of `path` (always 0o600 on non-Unix platforms).
pub fn mode_of(path: &Path) -> io::Result<u32> {
    #[cfg(unix)]
    {
        use std::os::unix::fs::PermissionsExt;
        Ok(fs::metadata(path)?.permissions().mode() & 0o777)
    }
    #[cfg(not(unix))]
    {
        fs::metadata(path).map(|_| 0o600)
    }
}

/// Fails unless group and other have no access to `path`.
pub fn ensure_owner_only(path: &Path) -> io::Result<()> {
    let mode = mode_of(path)?;
    if mode & 0o077 != 0 {
        return Err(io::Error::new(
            io::ErrorKind::PermissionDenied,
            format!("{} has mode {mode:o}, expected owner-only access", path.display()),
        ));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn writes_owner_only() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("a.cred");
        write_atomic(&path, b"one", std_rename).unwrap();
        assert_eq!(fs::read(&path).unwrap(), b"one");
        assert_eq!(mode_of(&path).unwrap(), 0o600);
    }

    #[test]
    fn failed_rename_keeps_previous_contents() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("a.cred");
        write_atomic(&path, b"before", std_rename).unwrap();
        let err = write_atomic(&path, b"after", |_, _| Err(io::Error::other("interrupted")));
        assert!(err.is_err());
        assert_eq!(fs::read(&path).unwrap(), b"before");
        assert!(!temp_path(&path).exists());
    }

    #[cfg(unix)]
    #[test]
    fn detects_loose_permissions() {
        use std::os::unix::fs::PermissionsExt;
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("loose");
        fs::write(&path, "x").unwrap();
        fs::set_permissions(&path, fs::Permissions::from_mode(0o644)).unwrap();
        assert!(ensure_owner_only(&path).is_err());
    }
}
