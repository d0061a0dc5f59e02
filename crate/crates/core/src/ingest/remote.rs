//! Download cache for remote (http/https) sources.
//!
//! Files land in one temporary directory per process, keyed by URL. The
//! directory lives under `$TABEX_DOWNLOAD_DIR` when set, otherwise under the
//! system temp dir, and is removed by [`cleanup`] (the CLI and picker call it
//! on exit).

use std::collections::HashMap;
use std::io::Read;
use std::path::{Path, PathBuf};
use std::sync::{Mutex, OnceLock};

use tempfile::TempDir;

use crate::error::{Error, Result};

/// Environment variable naming the parent directory for downloads.
pub const DOWNLOAD_DIR_ENV: &str = "TABEX_DOWNLOAD_DIR";

const MAX_DOWNLOAD_BYTES: u64 = 1 << 30;

#[derive(Default)]
struct DownloadCache {
    dir: Option<TempDir>,
    files: HashMap<String, PathBuf>,
}

fn cache() -> &'static Mutex<DownloadCache> {
    static CACHE: OnceLock<Mutex<DownloadCache>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(DownloadCache::default()))
}

impl DownloadCache {
    fn dir(&mut self) -> Result<&Path> {
        if self.dir.is_none() {
            let builder = {
                let mut b = tempfile::Builder::new();
                b.prefix("tabex-downloads-");
                b
            };
            let dir = match std::env::var_os(DOWNLOAD_DIR_ENV) {
                Some(parent) => {
                    std::fs::create_dir_all(&parent)?;
                    builder.tempdir_in(parent)?
                }
                None => builder.tempdir()?,
            };
            self.dir = Some(dir);
        }
        Ok(self
            .dir
            .as_ref()
            .map(TempDir::path)
            .expect("initialised above"))
    }
}

/// Downloads `url` once per process and returns the local copy.
pub fn fetch(url: &str) -> Result<PathBuf> {
    let mut cache = cache().lock().unwrap_or_else(|e| e.into_inner());
    if let Some(path) = cache.files.get(url) {
        if path.exists() {
            return Ok(path.clone());
        }
    }
    let index = cache.files.len();
    let slot = cache.dir()?.join(index.to_string());
    std::fs::create_dir_all(&slot)?;
    let path = slot.join(file_name_for(url));

    let bytes = download(url)?;
    std::fs::write(&path, bytes)?;
    log::debug!("downloaded {url} to {}", path.display());
    cache.files.insert(url.to_string(), path.clone());
    Ok(path)
}

fn download(url: &str) -> Result<Vec<u8>> {
    let fail = |reason: String| Error::Download {
        url: url.to_string(),
        reason,
    };
    let mut response = ureq::get(url).call().map_err(|e| fail(e.to_string()))?;
    let mut bytes = Vec::new();
    response
        .body_mut()
        .as_reader()
        .take(MAX_DOWNLOAD_BYTES)
        .read_to_end(&mut bytes)
        .map_err(|e| fail(e.to_string()))?;
    Ok(bytes)
}

/// Directory that holds downloads, if one has been created.
pub fn download_dir() -> Option<PathBuf> {
    let cache = cache().lock().unwrap_or_else(|e| e.into_inner());
    cache.dir.as_ref().map(|d| d.path().to_path_buf())
}

/// Removes every downloaded file and the download directory.
pub fn cleanup() {
    let mut cache = cache().lock().unwrap_or_else(|e| e.into_inner());
    cache.files.clear();
    if let Some(dir) = cache.dir.take() {
        if let Err(e) = dir.close() {
            log::warn!("could not remove download directory: {e}");
        }
    }
}

fn file_name_for(url: &str) -> String {
    let path = url.split(['?', '#']).next().unwrap_or(url);
    let last = path.rsplit('/').next().unwrap_or("");
    let clean: String = last
        .chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || "._-".contains(c) {
                c
            } else {
                '_'
            }
        })
        .collect();
    if clean.is_empty() || clean.starts_with('.') {
        "download.pdf".to_string()
    } else {
        clean
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn file_names_from_urls() {
        assert_eq!(file_name_for("https://x.org/a/mtcars.pdf"), "mtcars.pdf");
        assert_eq!(
            file_name_for("https://x.org/a/report.pdf?dl=1"),
            "report.pdf"
        );
        assert_eq!(file_name_for("https://x.org/"), "download.pdf");
        assert_eq!(file_name_for("https://x.org/we ird.pdf"), "we_ird.pdf");
    }

    #[test]
    fn unreachable_url_is_a_download_error() {
        // Port 9 on loopback is the discard service and is not expected to listen.
        let err = fetch("http://127.0.0.1:9/missing.pdf").unwrap_err();
        assert!(matches!(err, Error::Download { .. }), "{err:?}");
    }
}
