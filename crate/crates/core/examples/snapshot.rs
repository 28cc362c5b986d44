//! Save an index to disk, load it back, and see a corrupted copy rejected.
//!
//! `cargo run --example snapshot`

use std::path::Path;

use chrono::DateTime;
use coauthor_net::extract::Publication;
use coauthor_net::index::{self, CoauthorIndex, SnapshotError};

/// Returns the reloaded index and the error for the corrupted file.
pub fn run_example(dir: &Path) -> Result<(CoauthorIndex, SnapshotError), SnapshotError> {
    let at = DateTime::from_timestamp(1_700_000_000, 0).unwrap();
    let mut original = CoauthorIndex::new("demo");
    original.ingest(Publication::new("r1", ["Novak, Dagmar", "Castillo, Daniel"], ["004".parse().unwrap()], at));
    original.ingest(Publication::new("r2", ["Castillo, Daniel", "Jäger, Thomas"], ["004".parse().unwrap()], at));

    let path = dir.join("demo.snapshot");
    index::save(&original.snapshot(), &path)?;
    let restored = CoauthorIndex::from_snapshot(index::load(&path)?);

    let mut bytes = std::fs::read(&path).map_err(SnapshotError::Io)?;
    bytes[10] ^= 0x20;
    let broken = dir.join("broken.snapshot");
    std::fs::write(&broken, bytes).map_err(SnapshotError::Io)?;
    let rejected = index::load(&broken).expect_err("checksum catches the flip");
    Ok((restored, rejected))
}

fn main() -> Result<(), SnapshotError> {
    let dir = std::env::temp_dir().join(format!("coauthor-net-snapshot-{}", std::process::id()));
    std::fs::create_dir_all(&dir).map_err(SnapshotError::Io)?;
    let (restored, rejected) = run_example(&dir)?;
    println!("reloaded {} publications from {}", restored.len(), dir.display());
    println!("corrupted copy: {rejected}");
    Ok(())
}
