//! Small shared helpers: atomic writes and a bounded worker pool.

use std::path::Path;
use std::sync::Mutex;

use anyhow::Context;

/// Writes via a sibling temp file and rename, so readers never observe a
/// half-written artifact and re-runs are byte-reproducible.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> anyhow::Result<()> {
    let parent = path.parent().unwrap_or_else(|| Path::new("."));
    std::fs::create_dir_all(parent)
        .with_context(|| format!("creating {}", parent.display()))?;
    let file_name = path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| "artifact".into());
    let tmp = parent.join(format!(".tmp-{file_name}"));
    std::fs::write(&tmp, bytes).with_context(|| format!("writing {}", tmp.display()))?;
    std::fs::rename(&tmp, path)
        .with_context(|| format!("renaming into {}", path.display()))?;
    Ok(())
}

/// Runs `work` over all items on up to `jobs` threads, returning results in
/// input order. Output order (and therefore every downstream artifact) is
/// independent of the thread count.
pub fn run_pool<T, R, F>(items: &[T], jobs: usize, work: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync,
{
    let jobs = jobs.max(1).min(items.len().max(1));
    let next = Mutex::new(0usize);
    let results: Vec<Mutex<Option<R>>> = (0..items.len()).map(|_| Mutex::new(None)).collect();

    std::thread::scope(|scope| {
        for _ in 0..jobs {
            scope.spawn(|| loop {
                let index = {
                    let mut guard = next.lock().unwrap();
                    let i = *guard;
                    *guard += 1;
                    i
                };
                if index >= items.len() {
                    break;
                }
                let r = work(&items[index]);
                *results[index].lock().unwrap() = Some(r);
            });
        }
    });

    results
        .into_iter()
        .map(|cell| cell.into_inner().unwrap().expect("worker filled every slot"))
        .collect()
}
