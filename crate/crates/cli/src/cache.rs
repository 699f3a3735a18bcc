//! On-disk moment bases keyed by a hash of everything that determines the samples.

use std::fs;
use std::path::{Path, PathBuf};

use distrust_core::hierarchy::{self, MomentBasis, MonomialList, RankProfile};
use distrust_core::{Functional, Scenario};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{CliError, Result};
use crate::io::{self, MatrixDoc, ScenarioDoc};

#[derive(Debug, Clone, Serialize, Deserialize)]
struct BasisDoc {
    profile: Vec<Vec<usize>>,
    dim: usize,
    real: bool,
    pinned: Vec<bool>,
    matrices: Vec<MatrixDoc>,
}

#[derive(Debug, Clone)]
pub struct BasisCache {
    dir: PathBuf,
}

impl BasisCache {
    pub fn new(dir: &Path) -> Result<Self> {
        fs::create_dir_all(dir).map_err(|source| CliError::Write { path: dir.into(), source })?;
        Ok(Self { dir: dir.into() })
    }

    /// Hex digest of scenario, monomial list, profile (with its index), D and seed.
    pub fn key(scn: &Scenario, mono: &MonomialList, profile: &RankProfile, index: usize, d: usize, seed: u64) -> String {
        let mut h = Sha256::new();
        let doc = ScenarioDoc::from_parts(scn, &Functional::for_scenario(scn));
        h.update(serde_json::to_vec(&(doc.n, doc.m, doc.k, &doc.targets, &doc.epsilons)).expect("plain data"));
        for w in mono.words() {
            let word: Vec<String> = w.iter().map(|s| s.to_string()).collect();
            h.update(word.join(" ").as_bytes());
            h.update(b";");
        }
        h.update(format!("|{profile}|{index}|{d}|{seed}").as_bytes());
        format!("{:x}", h.finalize())
    }

    fn path(&self, key: &str) -> PathBuf {
        self.dir.join(format!("{key}.json"))
    }

    pub fn load(&self, key: &str, mono: &MonomialList) -> Option<MomentBasis> {
        let doc: BasisDoc = io::read_json(&self.path(key)).ok()?;
        let matrices = doc.matrices.iter().map(io::matrix_from_doc).collect::<Result<Vec<_>>>().ok()?;
        MomentBasis::from_samples(mono.clone(), RankProfile::new(doc.profile), doc.dim, doc.real, doc.pinned, matrices)
            .ok()
    }

    pub fn store(&self, key: &str, basis: &MomentBasis) -> Result<()> {
        let doc = BasisDoc {
            profile: basis.profile().ranks.clone(),
            dim: basis.dim(),
            real: basis.is_real(),
            pinned: basis.pinned().to_vec(),
            matrices: basis.matrices().iter().map(io::matrix_doc).collect(),
        };
        io::write_json(&self.path(key), &doc)
    }
}

/// Same bases as [`hierarchy::profile_bases`], read from and written to
/// `cache` when one is given.
pub fn profile_bases(
    scn: &Scenario,
    f: &Functional,
    mono: &MonomialList,
    d: usize,
    seed: u64,
    cache: Option<&BasisCache>,
) -> Vec<(RankProfile, distrust_core::Result<MomentBasis>)> {
    let Some(cache) = cache else {
        return hierarchy::profile_bases(scn, f, mono, d, seed);
    };
    let (_, m, k) = mono.alphabet();
    let profiles: Vec<(usize, RankProfile)> =
        hierarchy::rank_profiles(Some(f), m, k, d).into_iter().enumerate().collect();
    profiles
        .into_par_iter()
        .map(|(i, p)| {
            let key = BasisCache::key(scn, mono, &p, i, d, seed);
            if let Some(b) = cache.load(&key, mono) {
                return (p, Ok(b));
            }
            let b = hierarchy::build_basis(scn, mono, &p, d, &mut hierarchy::profile_rng(seed, i));
            if let Ok(basis) = &b {
                let _ = cache.store(&key, basis);
            }
            (p, b)
        })
        .collect()
}
