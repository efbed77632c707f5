//! One JSON file per audit, written atomically, with optimistic revisions.

use super::{require_valid, valid_audit_id, AuditDocument};
use crate::error::{AuditError, ConflictKind, Result};
use crate::reporting::canonical_json;
use std::collections::HashMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex};

#[derive(Debug)]
pub struct FileStore {
    root: PathBuf,
    locks: Mutex<HashMap<String, Arc<Mutex<()>>>>,
}

impl FileStore {
    pub fn open(root: impl Into<PathBuf>) -> Result<Self> {
        let root = root.into();
        fs::create_dir_all(&root)?;
        Ok(FileStore {
            root,
            locks: Mutex::new(HashMap::new()),
        })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    fn path(&self, id: &str) -> Result<PathBuf> {
        if !valid_audit_id(id) {
            return Err(AuditError::NotFound(format!("audit {id:?}")));
        }
        Ok(self.root.join(format!("{id}.json")))
    }

    fn lock(&self, id: &str) -> Arc<Mutex<()>> {
        let mut locks = self.locks.lock().unwrap_or_else(|e| e.into_inner());
        locks.entry(id.to_string()).or_default().clone()
    }

    fn write_atomic(&self, path: &Path, doc: &AuditDocument) -> Result<()> {
        let tmp = path.with_extension("json.tmp");
        {
            let mut f = fs::File::create(&tmp)?;
            f.write_all(canonical_json(doc)?.as_bytes())?;
            f.write_all(b"\n")?;
            f.sync_all()?;
        }
        fs::rename(&tmp, path)?;
        Ok(())
    }

    fn read(&self, path: &Path, id: &str) -> Result<AuditDocument> {
        match fs::read_to_string(path) {
            Ok(text) => Ok(serde_json::from_str(&text)?),
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => Err(AuditError::NotFound(format!("audit {id:?}"))),
            Err(e) => Err(e.into()),
        }
    }

    /// Stores a new document. Fails if the id is taken.
    pub fn create(&self, doc: AuditDocument) -> Result<AuditDocument> {
        require_valid(&doc)?;
        let path = self.path(&doc.audit_id)?;
        let lock = self.lock(&doc.audit_id);
        let _guard = lock.lock().unwrap_or_else(|e| e.into_inner());
        if path.exists() {
            return Err(AuditError::Conflict {
                kind: ConflictKind::DuplicateId,
                message: format!("audit {:?} already exists", doc.audit_id),
            });
        }
        self.write_atomic(&path, &doc)?;
        Ok(doc)
    }

    pub fn get(&self, id: &str) -> Result<AuditDocument> {
        let path = self.path(id)?;
        self.read(&path, id)
    }

    /// Ids of stored audits, sorted.
    pub fn list(&self) -> Result<Vec<String>> {
        let mut ids = Vec::new();
        for entry in fs::read_dir(&self.root)? {
            let name = entry?.file_name();
            let name = name.to_string_lossy();
            if let Some(id) = name.strip_suffix(".json") {
                if valid_audit_id(id) {
                    ids.push(id.to_string());
                }
            }
        }
        ids.sort();
        Ok(ids)
    }

    /// Applies `f` to the stored document if its revision still equals
    /// `expected_revision` (when given), validates, and bumps the revision.
    pub fn update<F>(&self, id: &str, expected_revision: Option<u64>, f: F) -> Result<AuditDocument>
    where
        F: FnOnce(&mut AuditDocument) -> Result<()>,
    {
        let path = self.path(id)?;
        let lock = self.lock(id);
        let _guard = lock.lock().unwrap_or_else(|e| e.into_inner());
        let mut doc = self.read(&path, id)?;
        if let Some(expected) = expected_revision {
            if expected != doc.revision {
                return Err(AuditError::Conflict {
                    kind: ConflictKind::StaleRevision,
                    message: format!("audit {id:?} is at revision {}, not {expected}", doc.revision),
                });
            }
        }
        let current = doc.revision;
        f(&mut doc)?;
        if doc.audit_id != id {
            return Err(AuditError::validation("audit id cannot be changed"));
        }
        doc.revision = current + 1;
        require_valid(&doc)?;
        self.write_atomic(&path, &doc)?;
        Ok(doc)
    }

    /// Replaces the stored document wholesale; `doc.revision` must match the
    /// stored one.
    pub fn put(&self, doc: AuditDocument) -> Result<AuditDocument> {
        let expected = doc.revision;
        let id = doc.audit_id.clone();
        self.update(&id, Some(expected), move |stored| {
            *stored = doc;
            Ok(())
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::service::{create_audit, NewAudit};

    fn new(name: &str) -> AuditDocument {
        create_audit(NewAudit {
            audit_id: None,
            name: name.into(),
            description: String::new(),
            design_class: Default::default(),
        })
        .unwrap()
    }

    #[test]
    fn create_get_update_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let store = FileStore::open(dir.path()).unwrap();
        store.create(new("Alpha")).unwrap();
        assert_eq!(store.create(new("Alpha")).unwrap_err().code(), "duplicate-id");
        assert_eq!(store.list().unwrap(), vec!["alpha"]);
        let updated = store
            .update("alpha", Some(1), |d| {
                d.ecosystem.description = "x".into();
                Ok(())
            })
            .unwrap();
        assert_eq!(updated.revision, 2);
        assert_eq!(store.get("alpha").unwrap(), updated);
        let stale = store.update("alpha", Some(1), |_| Ok(())).unwrap_err();
        assert_eq!(stale.code(), "stale-revision");
        assert_eq!(stale.exit_code(), 2);
    }

    #[test]
    fn invalid_write_leaves_file_untouched() {
        let dir = tempfile::tempdir().unwrap();
        let store = FileStore::open(dir.path()).unwrap();
        store.create(new("Beta")).unwrap();
        let err = store
            .update("beta", None, |d| {
                d.ecosystem.name.clear();
                Ok(())
            })
            .unwrap_err();
        assert_eq!(err.code(), "validation");
        assert_eq!(store.get("beta").unwrap().revision, 1);
        assert_eq!(store.get("../etc").unwrap_err().code(), "not-found");
        assert_eq!(store.get("gamma").unwrap_err().code(), "not-found");
    }
}
