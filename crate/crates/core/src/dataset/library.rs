//! Molecule libraries: the shipped toy library and directories of graph JSON files.

use std::fs;
use std::path::Path;

use super::DatasetError;
use crate::molgraph::{MolecularGraph, Role};

/// Named molecules split by role. Names are file stems.
#[derive(Debug, Clone, Default)]
pub struct MoleculeLibrary {
    pub alcohols: Vec<(String, MolecularGraph)>,
    pub acyl_halides: Vec<(String, MolecularGraph)>,
}

#[rustfmt::skip]
const TOY_LIBRARY: &[(&str, &str)] = &[
    ("00_methanol", include_str!("../../data/library/alcohols/00_methanol.json")),
    ("01_ethanol", include_str!("../../data/library/alcohols/01_ethanol.json")),
    ("02_propan-1-ol", include_str!("../../data/library/alcohols/02_propan-1-ol.json")),
    ("03_propan-2-ol", include_str!("../../data/library/alcohols/03_propan-2-ol.json")),
    ("04_butan-1-ol", include_str!("../../data/library/alcohols/04_butan-1-ol.json")),
    ("05_butan-2-ol", include_str!("../../data/library/alcohols/05_butan-2-ol.json")),
    ("06_2-methylpropan-1-ol", include_str!("../../data/library/alcohols/06_2-methylpropan-1-ol.json")),
    ("07_2-methylpropan-2-ol", include_str!("../../data/library/alcohols/07_2-methylpropan-2-ol.json")),
    ("08_pentan-1-ol", include_str!("../../data/library/alcohols/08_pentan-1-ol.json")),
    ("09_3-methylbutan-1-ol", include_str!("../../data/library/alcohols/09_3-methylbutan-1-ol.json")),
    ("10_hexan-1-ol", include_str!("../../data/library/alcohols/10_hexan-1-ol.json")),
    ("11_cyclopentanol", include_str!("../../data/library/alcohols/11_cyclopentanol.json")),
    ("12_cyclohexanol", include_str!("../../data/library/alcohols/12_cyclohexanol.json")),
    ("13_benzyl_alcohol", include_str!("../../data/library/alcohols/13_benzyl_alcohol.json")),
    ("14_phenol", include_str!("../../data/library/alcohols/14_phenol.json")),
    ("15_prop-2-en-1-ol", include_str!("../../data/library/alcohols/15_prop-2-en-1-ol.json")),
    ("16_prop-2-yn-1-ol", include_str!("../../data/library/alcohols/16_prop-2-yn-1-ol.json")),
    ("17_2-fluoroethanol", include_str!("../../data/library/alcohols/17_2-fluoroethanol.json")),
    ("18_2-methoxyethanol", include_str!("../../data/library/alcohols/18_2-methoxyethanol.json")),
    ("19_2-aminoethanol", include_str!("../../data/library/alcohols/19_2-aminoethanol.json")),
    ("00_acetyl_chloride", include_str!("../../data/library/acyl_halides/00_acetyl_chloride.json")),
    ("01_propanoyl_chloride", include_str!("../../data/library/acyl_halides/01_propanoyl_chloride.json")),
    ("02_butanoyl_chloride", include_str!("../../data/library/acyl_halides/02_butanoyl_chloride.json")),
    ("03_2-methylpropanoyl_chloride", include_str!("../../data/library/acyl_halides/03_2-methylpropanoyl_chloride.json")),
    ("04_2,2-dimethylpropanoyl_chloride", include_str!("../../data/library/acyl_halides/04_2,2-dimethylpropanoyl_chloride.json")),
    ("05_benzoyl_chloride", include_str!("../../data/library/acyl_halides/05_benzoyl_chloride.json")),
    ("06_acetyl_bromide", include_str!("../../data/library/acyl_halides/06_acetyl_bromide.json")),
    ("07_propanoyl_bromide", include_str!("../../data/library/acyl_halides/07_propanoyl_bromide.json")),
    ("08_butanoyl_bromide", include_str!("../../data/library/acyl_halides/08_butanoyl_bromide.json")),
    ("09_2-methylpropanoyl_bromide", include_str!("../../data/library/acyl_halides/09_2-methylpropanoyl_bromide.json")),
    ("10_2,2-dimethylpropanoyl_bromide", include_str!("../../data/library/acyl_halides/10_2,2-dimethylpropanoyl_bromide.json")),
    ("11_benzoyl_bromide", include_str!("../../data/library/acyl_halides/11_benzoyl_bromide.json")),
    ("12_acetyl_iodide", include_str!("../../data/library/acyl_halides/12_acetyl_iodide.json")),
    ("13_propanoyl_iodide", include_str!("../../data/library/acyl_halides/13_propanoyl_iodide.json")),
    ("14_butanoyl_iodide", include_str!("../../data/library/acyl_halides/14_butanoyl_iodide.json")),
    ("15_2-methylpropanoyl_iodide", include_str!("../../data/library/acyl_halides/15_2-methylpropanoyl_iodide.json")),
    ("16_2,2-dimethylpropanoyl_iodide", include_str!("../../data/library/acyl_halides/16_2,2-dimethylpropanoyl_iodide.json")),
    ("17_benzoyl_iodide", include_str!("../../data/library/acyl_halides/17_benzoyl_iodide.json")),
];

impl MoleculeLibrary {
    /// The 20 alcohols and 18 acyl halides (6 each for Cl, Br, I) bundled
    /// with the crate. Heavy atoms plus explicit hydrogens on O and N.
    pub fn toy() -> Self {
        let mut lib = Self::default();
        for (name, text) in TOY_LIBRARY {
            let g = MolecularGraph::from_json(text).expect("bundled library is valid");
            lib.insert(name.to_string(), g).expect("bundled molecules carry a role");
        }
        lib
    }

    /// Reads every `*.json` file below `dir` (recursively, in sorted path
    /// order) and files it under its `role`.
    pub fn load_dir(dir: &Path) -> Result<Self, DatasetError> {
        let mut paths = Vec::new();
        collect_json(dir, &mut paths)?;
        paths.sort();
        let mut lib = Self::default();
        for path in paths {
            let text = fs::read_to_string(&path)?;
            let g = MolecularGraph::from_json(&text).map_err(|e| DatasetError::Parse {
                location: path.display().to_string(),
                message: e.to_string(),
            })?;
            let name = path
                .file_stem()
                .map_or_else(String::new, |s| s.to_string_lossy().into_owned());
            lib.insert(name, g)?;
        }
        Ok(lib)
    }

    fn insert(&mut self, name: String, g: MolecularGraph) -> Result<(), DatasetError> {
        match g.role() {
            Role::Alcohol => self.alcohols.push((name, g)),
            Role::AcylHalide => self.acyl_halides.push((name, g)),
            Role::Unknown => return Err(DatasetError::MissingRole(name)),
        }
        Ok(())
    }

    pub fn alcohol_graphs(&self) -> Vec<MolecularGraph> {
        self.alcohols.iter().map(|(_, g)| g.clone()).collect()
    }

    pub fn acyl_halide_graphs(&self) -> Vec<MolecularGraph> {
        self.acyl_halides.iter().map(|(_, g)| g.clone()).collect()
    }
}

fn collect_json(dir: &Path, out: &mut Vec<std::path::PathBuf>) -> Result<(), DatasetError> {
    for entry in fs::read_dir(dir)? {
        let path = entry?.path();
        if path.is_dir() {
            collect_json(&path, out)?;
        } else if path.extension().is_some_and(|e| e == "json") {
            out.push(path);
        }
    }
    Ok(())
}
