use std::collections::BTreeMap;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::sync::RwLock;

use serde::Serialize;

use super::cid::Cid;

#[derive(Debug, thiserror::Error)]
pub enum StoreError {
    #[error("object {0} not found")]
    NotFound(Cid),
    #[error("store capacity exceeded: {requested} bytes requested, {used}/{limit} used")]
    CapacityExceeded { requested: usize, used: usize, limit: usize },
    #[error("object file {path} does not hash to its name")]
    Corrupt { path: PathBuf },
    #[error("store unavailable: {0}")]
    Unavailable(String),
    #[error(transparent)]
    Io(#[from] io::Error),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StoredObject {
    pub cid: Cid,
    #[serde(skip)]
    pub bytes: Vec<u8>,
    pub size: usize,
    pub pinned: bool,
    /// Insertion sequence number; monotonic within one store instance.
    pub stored_at: u64,
}

/// Anything the pinning adapter can push snapshots into.
pub trait ObjectStore: Send + Sync {
    fn add(&self, content: &[u8], pin: bool) -> Result<Cid, StoreError>;
    fn get(&self, cid: &Cid) -> Result<Vec<u8>, StoreError>;
}

#[derive(Debug, Default)]
struct Inner {
    objects: BTreeMap<Cid, StoredObject>,
    used_bytes: usize,
    next_seq: u64,
}

/// In-memory content-addressed store with pinning, garbage collection and
/// optional file-backed persistence (`<dir>/<cid>` per object, pins as empty
/// marker files under `<dir>/pins/`).
#[derive(Debug, Default)]
pub struct ContentStore {
    inner: RwLock<Inner>,
    max_bytes: Option<usize>,
    dir: Option<PathBuf>,
}

impl ContentStore {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_capacity(max_bytes: usize) -> Self {
        Self { max_bytes: Some(max_bytes), ..Self::default() }
    }

    /// Open (or create) a file-backed store, loading and verifying existing objects.
    pub fn open(dir: impl Into<PathBuf>, max_bytes: Option<usize>) -> Result<Self, StoreError> {
        let dir = dir.into();
        fs::create_dir_all(dir.join("pins"))?;
        let mut inner = Inner::default();
        let mut names: Vec<_> = fs::read_dir(&dir)?
            .filter_map(|e| e.ok())
            .filter(|e| e.file_type().map(|t| t.is_file()).unwrap_or(false))
            .map(|e| e.file_name().to_string_lossy().into_owned())
            .collect();
        names.sort();
        for name in names {
            let Ok(cid) = name.parse::<Cid>() else { continue };
            let path = dir.join(&name);
            let bytes = fs::read(&path)?;
            if !cid.matches(&bytes) {
                return Err(StoreError::Corrupt { path });
            }
            let pinned = dir.join("pins").join(&name).exists();
            inner.used_bytes += bytes.len();
            let obj = StoredObject {
                cid: cid.clone(),
                size: bytes.len(),
                bytes,
                pinned,
                stored_at: inner.next_seq,
            };
            inner.next_seq += 1;
            inner.objects.insert(cid, obj);
        }
        Ok(Self { inner: RwLock::new(inner), max_bytes, dir: Some(dir) })
    }

    /// Store `content`. Re-adding existing content is a no-op apart from
    /// OR-ing the pin flag.
    pub fn add(&self, content: &[u8], pin: bool) -> Result<Cid, StoreError> {
        let cid = Cid::of(content);
        let mut inner = self.inner.write().unwrap();
        if let Some(obj) = inner.objects.get_mut(&cid) {
            if pin && !obj.pinned {
                obj.pinned = true;
                self.persist_pin(&cid, true)?;
            }
            return Ok(cid);
        }
        if let Some(limit) = self.max_bytes {
            if inner.used_bytes + content.len() > limit {
                return Err(StoreError::CapacityExceeded {
                    requested: content.len(),
                    used: inner.used_bytes,
                    limit,
                });
            }
        }
        if let Some(dir) = &self.dir {
            fs::write(dir.join(cid.as_str()), content)?;
        }
        self.persist_pin(&cid, pin)?;
        let seq = inner.next_seq;
        inner.next_seq += 1;
        inner.used_bytes += content.len();
        inner.objects.insert(
            cid.clone(),
            StoredObject {
                cid: cid.clone(),
                bytes: content.to_vec(),
                size: content.len(),
                pinned: pin,
                stored_at: seq,
            },
        );
        Ok(cid)
    }

    pub fn get(&self, cid: &Cid) -> Result<Vec<u8>, StoreError> {
        self.inner
            .read()
            .unwrap()
            .objects
            .get(cid)
            .map(|o| o.bytes.clone())
            .ok_or_else(|| StoreError::NotFound(cid.clone()))
    }

    pub fn contains(&self, cid: &Cid) -> bool {
        self.inner.read().unwrap().objects.contains_key(cid)
    }

    pub fn is_pinned(&self, cid: &Cid) -> Option<bool> {
        self.inner.read().unwrap().objects.get(cid).map(|o| o.pinned)
    }

    pub fn pin(&self, cid: &Cid) -> Result<(), StoreError> {
        self.set_pinned(cid, true)
    }

    pub fn unpin(&self, cid: &Cid) -> Result<(), StoreError> {
        self.set_pinned(cid, false)
    }

    fn set_pinned(&self, cid: &Cid, pinned: bool) -> Result<(), StoreError> {
        let mut inner = self.inner.write().unwrap();
        let obj = inner
            .objects
            .get_mut(cid)
            .ok_or_else(|| StoreError::NotFound(cid.clone()))?;
        obj.pinned = pinned;
        self.persist_pin(cid, pinned)
    }

    /// Remove every unpinned object; returns how many were removed.
    pub fn gc(&self) -> Result<usize, StoreError> {
        let mut inner = self.inner.write().unwrap();
        let doomed: Vec<Cid> = inner
            .objects
            .values()
            .filter(|o| !o.pinned)
            .map(|o| o.cid.clone())
            .collect();
        for cid in &doomed {
            if let Some(dir) = &self.dir {
                remove_if_exists(&dir.join(cid.as_str()))?;
            }
            let obj = inner.objects.remove(cid).expect("listed above");
            inner.used_bytes -= obj.size;
        }
        Ok(doomed.len())
    }

    /// Metadata for every object, ordered by cid.
    pub fn list(&self) -> Vec<StoredObject> {
        self.inner.read().unwrap().objects.values().cloned().collect()
    }

    pub fn pinned(&self) -> Vec<Cid> {
        self.inner
            .read()
            .unwrap()
            .objects
            .values()
            .filter(|o| o.pinned)
            .map(|o| o.cid.clone())
            .collect()
    }

    pub fn len(&self) -> usize {
        self.inner.read().unwrap().objects.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn used_bytes(&self) -> usize {
        self.inner.read().unwrap().used_bytes
    }

    fn persist_pin(&self, cid: &Cid, pinned: bool) -> Result<(), StoreError> {
        let Some(dir) = &self.dir else { return Ok(()) };
        let marker = dir.join("pins").join(cid.as_str());
        if pinned {
            fs::write(marker, b"")?;
        } else {
            remove_if_exists(&marker)?;
        }
        Ok(())
    }
}

fn remove_if_exists(path: &Path) -> io::Result<()> {
    match fs::remove_file(path) {
        Err(e) if e.kind() == io::ErrorKind::NotFound => Ok(()),
        other => other,
    }
}

impl ObjectStore for ContentStore {
    fn add(&self, content: &[u8], pin: bool) -> Result<Cid, StoreError> {
        ContentStore::add(self, content, pin)
    }

    fn get(&self, cid: &Cid) -> Result<Vec<u8>, StoreError> {
        ContentStore::get(self, cid)
    }
}

#[cfg(test)]
mod tests {
    use std::collections::BTreeSet;

    use super::*;
    use proptest::prelude::*;

    #[test]
    fn add_get_round_trip() {
        let s = ContentStore::new();
        let cid = s.add(b"slice", true).unwrap();
        assert_eq!(cid, Cid::of(b"slice"));
        assert_eq!(s.get(&cid).unwrap(), b"slice");
    }

    #[test]
    fn readding_ors_pin_flag() {
        let s = ContentStore::new();
        let a = s.add(b"b", false).unwrap();
        let b = s.add(b"b", true).unwrap();
        assert_eq!(a, b);
        assert_eq!(s.is_pinned(&a), Some(true));
        // and never un-pins
        s.add(b"b", false).unwrap();
        assert_eq!(s.is_pinned(&a), Some(true));
        assert_eq!(s.len(), 1);
    }

    #[test]
    fn unknown_cid_is_not_found() {
        let s = ContentStore::new();
        let c = Cid::of(b"never stored");
        assert!(matches!(s.get(&c), Err(StoreError::NotFound(_))));
        assert!(matches!(s.pin(&c), Err(StoreError::NotFound(_))));
        assert!(matches!(s.unpin(&c), Err(StoreError::NotFound(_))));
    }

    #[test]
    fn gc_respects_pins() {
        let s = ContentStore::new();
        let pinned = s.add(b"keep", true).unwrap();
        assert_eq!(s.gc().unwrap(), 0);
        let loose = s.add(b"drop", false).unwrap();
        assert_eq!(s.gc().unwrap(), 1);
        assert!(s.get(&pinned).is_ok());
        assert!(matches!(s.get(&loose), Err(StoreError::NotFound(_))));
    }

    #[test]
    fn unpin_then_gc_removes() {
        let s = ContentStore::new();
        let c = s.add(b"x", true).unwrap();
        s.unpin(&c).unwrap();
        assert_eq!(s.gc().unwrap(), 1);
        assert!(matches!(s.get(&c), Err(StoreError::NotFound(_))));
        assert_eq!(s.used_bytes(), 0);
    }

    #[test]
    fn thousand_distinct_blobs_have_distinct_cids() {
        let s = ContentStore::new();
        let cids: BTreeSet<Cid> = (0..1000u32)
            .map(|i| s.add(format!("blob-{i}").as_bytes(), false).unwrap())
            .collect();
        assert_eq!(cids.len(), 1000);
        assert_eq!(s.len(), 1000);
    }

    #[test]
    fn capacity_limit_is_enforced() {
        let s = ContentStore::with_capacity(8);
        s.add(b"12345", true).unwrap();
        let err = s.add(b"6789", true).unwrap_err();
        assert!(matches!(err, StoreError::CapacityExceeded { requested: 4, used: 5, limit: 8 }));
        // duplicates do not count against capacity
        s.add(b"12345", false).unwrap();
        s.add(b"678", false).unwrap();
    }

    #[test]
    fn file_backed_store_survives_reopen() {
        let dir = tempfile::tempdir().unwrap();
        let (keep, drop) = {
            let s = ContentStore::open(dir.path(), None).unwrap();
            (s.add(b"keep", true).unwrap(), s.add(b"drop", false).unwrap())
        };
        assert!(dir.path().join(keep.as_str()).is_file());
        let s = ContentStore::open(dir.path(), None).unwrap();
        assert_eq!(s.get(&keep).unwrap(), b"keep");
        assert_eq!(s.is_pinned(&keep), Some(true));
        assert_eq!(s.is_pinned(&drop), Some(false));
        assert_eq!(s.gc().unwrap(), 1);
        let s = ContentStore::open(dir.path(), None).unwrap();
        assert_eq!(s.len(), 1);
    }

    #[test]
    fn tampered_file_is_detected_on_open() {
        let dir = tempfile::tempdir().unwrap();
        let c = ContentStore::open(dir.path(), None).unwrap().add(b"orig", true).unwrap();
        fs::write(dir.path().join(c.as_str()), b"evil").unwrap();
        assert!(matches!(
            ContentStore::open(dir.path(), None),
            Err(StoreError::Corrupt { .. })
        ));
    }

    #[derive(Debug, Clone)]
    enum Op {
        Add(u8, bool),
        Pin(u8),
        Unpin(u8),
        Gc,
    }

    fn op() -> impl Strategy<Value = Op> {
        prop_oneof![
            (0u8..12, any::<bool>()).prop_map(|(k, p)| Op::Add(k, p)),
            (0u8..12).prop_map(Op::Pin),
            (0u8..12).prop_map(Op::Unpin),
            Just(Op::Gc),
        ]
    }

    proptest! {
        #[test]
        fn gc_safety(ops in prop::collection::vec(op(), 0..60)) {
            let s = ContentStore::new();
            let key = |k: u8| Cid::of(&[k]);
            for op in ops {
                match op {
                    Op::Add(k, p) => { s.add(&[k], p).unwrap(); }
                    Op::Pin(k) => { let _ = s.pin(&key(k)); }
                    Op::Unpin(k) => { let _ = s.unpin(&key(k)); }
                    Op::Gc => {
                        let before: BTreeSet<_> = s.list().into_iter().map(|o| o.cid).collect();
                        let pinned_before: BTreeSet<_> = s.pinned().into_iter().collect();
                        let unpinned = before.len() - pinned_before.len();
                        prop_assert_eq!(s.gc().unwrap(), unpinned);
                        let pinned_after: BTreeSet<_> = s.pinned().into_iter().collect();
                        prop_assert_eq!(&pinned_after, &pinned_before);
                        prop_assert_eq!(s.len(), pinned_before.len());
                    }
                }
                let stored: BTreeSet<_> = s.list().into_iter().map(|o| o.cid).collect();
                for p in s.pinned() {
                    prop_assert!(stored.contains(&p));
                }
            }
        }
    }
}
