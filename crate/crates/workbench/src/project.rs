//! Project directory: a manifest plus named materials, designs, data files,
//! job outputs and result states, all stored as plain files.

use std::collections::BTreeMap;
use std::path::{Component, Path, PathBuf};

use morphsim::doc;
use morphsim::grid::{GridDesign, MaterialSet};
use morphsim::material::MaterialCard;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Result, WorkbenchError};

pub const PROJECT_FILE: &str = "project.json";
pub const PROJECT_KIND: &str = "project";
/// Default project root when `--project` is not given.
pub const ROOT_ENV: &str = "MORPHSIM_PROJECT";

pub const MATERIALS_DIR: &str = "materials";
pub const DESIGNS_DIR: &str = "designs";
pub const JOBS_DIR: &str = "jobs";

pub fn content_hash(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// References from names to files relative to the project root.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Manifest {
    pub materials: BTreeMap<String, String>,
    pub designs: BTreeMap<String, String>,
    pub observations: BTreeMap<String, String>,
    pub measurements: BTreeMap<String, String>,
    pub states: BTreeMap<String, String>,
}

impl Manifest {
    fn sections(&self) -> [(&'static str, &BTreeMap<String, String>); 5] {
        [
            ("materials", &self.materials),
            ("designs", &self.designs),
            ("observations", &self.observations),
            ("measurements", &self.measurements),
            ("states", &self.states),
        ]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Project {
    root: PathBuf,
    pub manifest: Manifest,
}

/// Names become file stems, so they stay within a safe character set.
pub fn check_name(name: &str) -> Result<()> {
    let ok = !name.is_empty()
        && name.len() <= 128
        && !name.starts_with('.')
        && name.chars().all(|c| c.is_ascii_alphanumeric() || matches!(c, '_' | '-' | '.'));
    if ok {
        Ok(())
    } else {
        Err(WorkbenchError::Input(format!("invalid name {name:?}")))
    }
}

impl Project {
    /// Create the directory layout and an empty manifest if absent, then open.
    pub fn open_or_init(root: &Path) -> Result<Self> {
        if !root.join(PROJECT_FILE).is_file() {
            let p = Project {
                root: root.to_path_buf(),
                manifest: Manifest::default(),
            };
            for d in [MATERIALS_DIR, DESIGNS_DIR, JOBS_DIR] {
                std::fs::create_dir_all(root.join(d)).map_err(|e| WorkbenchError::Input(format!("{}: {e}", root.display())))?;
            }
            p.save()?;
        }
        Self::open(root)
    }

    pub fn open(root: &Path) -> Result<Self> {
        let text = doc::read_file(&root.join(PROJECT_FILE))?;
        let manifest: Manifest = doc::from_json(PROJECT_KIND, &text)?;
        let p = Project {
            root: root.to_path_buf(),
            manifest,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn save(&self) -> Result<()> {
        doc::write_file(&self.root.join(PROJECT_FILE), &doc::to_json(PROJECT_KIND, &self.manifest))?;
        Ok(())
    }

    /// Every manifest reference points at an existing file.
    pub fn validate(&self) -> Result<()> {
        for (section, map) in self.manifest.sections() {
            for (name, rel) in map {
                if !self.root.join(rel).is_file() {
                    return Err(WorkbenchError::Input(format!("manifest {section}.{name}: missing file {rel}")));
                }
            }
        }
        Ok(())
    }

    /// Resolve a path given relative to the root, refusing to leave it.
    pub fn resolve(&self, rel: &str) -> Result<PathBuf> {
        let p = Path::new(rel);
        if p.is_absolute() || p.components().any(|c| !matches!(c, Component::Normal(_))) {
            return Err(WorkbenchError::Input(format!("path {rel:?} must be relative to the project root")));
        }
        let full = self.root.join(p);
        if !full.is_file() {
            return Err(WorkbenchError::NotFound(rel.to_string()));
        }
        Ok(full)
    }

    pub fn material_rel(name: &str) -> String {
        format!("{MATERIALS_DIR}/{name}.matcard.json")
    }

    pub fn design_rel(name: &str) -> String {
        format!("{DESIGNS_DIR}/{name}.grid.json")
    }

    pub fn materials_dir(&self) -> PathBuf {
        self.root.join(MATERIALS_DIR)
    }

    pub fn job_dir(&self, id: &str) -> PathBuf {
        self.root.join(JOBS_DIR).join(id)
    }

    fn read_named(&self, rel: &str, what: &str, name: &str) -> Result<(String, String)> {
        check_name(name)?;
        let path = self.root.join(rel);
        if !path.is_file() {
            return Err(WorkbenchError::NotFound(format!("{what} {name}")));
        }
        let text = doc::read_file(&path)?;
        let hash = content_hash(text.as_bytes());
        Ok((text, hash))
    }

    /// Stored text and its content hash.
    pub fn material_text(&self, name: &str) -> Result<(String, String)> {
        self.read_named(&Self::material_rel(name), "material", name)
    }

    pub fn design_text(&self, name: &str) -> Result<(String, String)> {
        self.read_named(&Self::design_rel(name), "design", name)
    }

    pub fn material(&self, name: &str) -> Result<MaterialCard> {
        Ok(MaterialCard::from_json(&self.material_text(name)?.0)?)
    }

    pub fn design(&self, name: &str) -> Result<GridDesign> {
        Ok(GridDesign::from_json(&self.design_text(name)?.0)?)
    }

    /// Cards referenced by a design, looked up by material name.
    pub fn cards_for(&self, design: &GridDesign) -> Result<MaterialSet> {
        design
            .referenced_materials()
            .into_iter()
            .map(|n| match self.material(&n) {
                Ok(c) => Ok((n, c)),
                Err(WorkbenchError::NotFound(_)) => Err(WorkbenchError::Input(format!("unknown material {n}"))),
                Err(e) => Err(e),
            })
            .collect()
    }

    fn check_version(&self, rel: &str, name: &str, if_match: Option<&str>) -> Result<()> {
        let Some(expected) = if_match else { return Ok(()) };
        let path = self.root.join(rel);
        let current = if path.is_file() {
            content_hash(doc::read_file(&path)?.as_bytes())
        } else {
            String::new()
        };
        if current != expected {
            return Err(WorkbenchError::Conflict {
                name: name.into(),
                expected: expected.into(),
                current,
            });
        }
        Ok(())
    }

    /// Validate and store a card under `name`. With `if_match`, the write
    /// only happens if the stored text still has that hash (empty string for
    /// "not yet stored"). Returns the new hash.
    pub fn put_material(&mut self, name: &str, text: &str, if_match: Option<&str>) -> Result<String> {
        check_name(name)?;
        let card = MaterialCard::from_json(text).map_err(WorkbenchError::input)?;
        card.validate().map_err(WorkbenchError::input)?;
        if card.name != name {
            return Err(WorkbenchError::Input(format!("card is named {:?}, not {name:?}", card.name)));
        }
        let rel = Self::material_rel(name);
        self.check_version(&rel, name, if_match)?;
        let stored = card.to_json();
        doc::write_file(&self.root.join(&rel), &stored)?;
        self.manifest.materials.insert(name.into(), rel);
        self.save()?;
        Ok(content_hash(stored.as_bytes()))
    }

    /// Validate a design against the project's materials and store it.
    pub fn put_design(&mut self, name: &str, text: &str, if_match: Option<&str>) -> Result<String> {
        check_name(name)?;
        let design = GridDesign::from_json(text).map_err(WorkbenchError::input)?;
        let cards = self.cards_for(&design)?;
        design.validate_with(&cards).map_err(WorkbenchError::input)?;
        let rel = Self::design_rel(name);
        self.check_version(&rel, name, if_match)?;
        let stored = design.to_json();
        doc::write_file(&self.root.join(&rel), &stored)?;
        self.manifest.designs.insert(name.into(), rel);
        self.save()?;
        Ok(content_hash(stored.as_bytes()))
    }

    pub fn register_state(&mut self, id: &str, rel: &str) -> Result<()> {
        self.manifest.states.insert(id.into(), rel.into());
        self.save()
    }

    pub fn state_path(&self, id: &str) -> Result<PathBuf> {
        let rel = self
            .manifest
            .states
            .get(id)
            .ok_or_else(|| WorkbenchError::NotFound(format!("state {id}")))?;
        Ok(self.root.join(rel))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn init_then_reopen() {
        let dir = tempfile::tempdir().unwrap();
        let mut p = Project::open_or_init(dir.path()).unwrap();
        let h = p.put_material("PLA", &MaterialCard::pla().to_json(), Some("")).unwrap();
        let q = Project::open(dir.path()).unwrap();
        assert_eq!(q.manifest.materials["PLA"], "materials/PLA.matcard.json");
        assert_eq!(q.material_text("PLA").unwrap().1, h);
    }

    #[test]
    fn stale_hash_conflicts() {
        let dir = tempfile::tempdir().unwrap();
        let mut p = Project::open_or_init(dir.path()).unwrap();
        let card = MaterialCard::pla().to_json();
        let h = p.put_material("PLA", &card, None).unwrap();
        p.put_material("PLA", &card, Some(&h)).unwrap();
        assert!(matches!(
            p.put_material("PLA", &card, Some("0000")),
            Err(WorkbenchError::Conflict { .. })
        ));
    }

    #[test]
    fn names_and_paths_are_confined() {
        assert!(check_name("../x").is_err());
        assert!(check_name("a/b").is_err());
        assert!(check_name("lamp_cover-2").is_ok());
        let dir = tempfile::tempdir().unwrap();
        let p = Project::open_or_init(dir.path()).unwrap();
        assert!(matches!(p.resolve("../etc/passwd"), Err(WorkbenchError::Input(_))));
        assert!(matches!(p.resolve("data/none.csv"), Err(WorkbenchError::NotFound(_))));
    }

    #[test]
    fn dangling_manifest_entry_fails_validation() {
        let dir = tempfile::tempdir().unwrap();
        let mut p = Project::open_or_init(dir.path()).unwrap();
        p.manifest.designs.insert("gone".into(), "designs/gone.grid.json".into());
        p.save().unwrap();
        assert!(Project::open(dir.path()).is_err());
    }
}
