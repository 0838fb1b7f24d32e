use std::fs;
use std::io;
use std::path::PathBuf;
use std::sync::{Arc, Mutex};

use serde::{Deserialize, Serialize};

/// Position of the last fully handled event.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct EventCursor {
    pub block: u64,
    pub index: u32,
}

impl EventCursor {
    pub fn covers(&self, position: (u64, u32)) -> bool {
        position <= (self.block, self.index)
    }
}

impl From<(u64, u32)> for EventCursor {
    fn from((block, index): (u64, u32)) -> Self {
        Self { block, index }
    }
}

pub trait CursorStore: Send + Sync {
    fn load(&self) -> io::Result<Option<EventCursor>>;
    fn save(&self, cursor: EventCursor) -> io::Result<()>;
}

/// Shared in-memory cursor; clones see the same value, so it survives a
/// node being dropped and rebuilt.
#[derive(Debug, Default, Clone)]
pub struct MemoryCursor(Arc<Mutex<Option<EventCursor>>>);

impl MemoryCursor {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn set(&self, cursor: Option<EventCursor>) {
        *self.0.lock().unwrap() = cursor;
    }

    pub fn get(&self) -> Option<EventCursor> {
        *self.0.lock().unwrap()
    }
}

impl CursorStore for MemoryCursor {
    fn load(&self) -> io::Result<Option<EventCursor>> {
        Ok(self.get())
    }

    fn save(&self, cursor: EventCursor) -> io::Result<()> {
        self.set(Some(cursor));
        Ok(())
    }
}

/// JSON file cursor, replaced atomically on every save.
#[derive(Debug, Clone)]
pub struct FileCursor {
    path: PathBuf,
}

impl FileCursor {
    pub fn new(path: impl Into<PathBuf>) -> Self {
        Self { path: path.into() }
    }
}

impl CursorStore for FileCursor {
    fn load(&self) -> io::Result<Option<EventCursor>> {
        match fs::read(&self.path) {
            Ok(bytes) => serde_json::from_slice(&bytes)
                .map(Some)
                .map_err(|e| io::Error::new(io::ErrorKind::InvalidData, e)),
            Err(e) if e.kind() == io::ErrorKind::NotFound => Ok(None),
            Err(e) => Err(e),
        }
    }

    fn save(&self, cursor: EventCursor) -> io::Result<()> {
        if let Some(parent) = self.path.parent() {
            fs::create_dir_all(parent)?;
        }
        let tmp = self.path.with_extension("tmp");
        fs::write(&tmp, serde_json::to_vec(&cursor)?)?;
        fs::rename(tmp, &self.path)
    }
}
