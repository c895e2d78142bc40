//! Named verification suites: each runs one check of [`crate::forms`] or
//! [`crate::eigen`] over a seeded family of grid functions.

use crate::eigen::{check_picone, minimize_with_tables, EigenConfig};
use crate::error::{Error, Result};
use crate::forms::{
    check_diaz_saa, check_embedding, check_form_bounds, check_hardy, check_poincare, check_sobolev_gn, energy,
    pohozaev_defect, radial_profile, refinement_study, smooth_profile, EmbeddingMode, Profile,
};
use crate::grid::{assemble_weights, FormTables, GridDomain, GridFunction, Shape};
use crate::kernel::KernelPart;
use crate::report::{Item, Report};
use crate::specfun::Params;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;
use std::sync::Arc;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    FormBounds,
    Poincare,
    Hardy,
    Sobolev,
    Gn,
    Holder,
    Strauss,
    Embedding,
    DiazSaa,
    Picone,
    PohozaevDefect,
}

impl Suite {
    pub const ALL: [Suite; 11] = [
        Suite::FormBounds,
        Suite::Poincare,
        Suite::Hardy,
        Suite::Sobolev,
        Suite::Gn,
        Suite::Holder,
        Suite::Strauss,
        Suite::Embedding,
        Suite::DiazSaa,
        Suite::Picone,
        Suite::PohozaevDefect,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::FormBounds => "form-bounds",
            Suite::Poincare => "poincare",
            Suite::Hardy => "hardy",
            Suite::Sobolev => "sobolev",
            Suite::Gn => "gn",
            Suite::Holder => "holder",
            Suite::Strauss => "strauss",
            Suite::Embedding => "embedding",
            Suite::DiazSaa => "diaz-saa",
            Suite::Picone => "picone",
            Suite::PohozaevDefect => "pohozaev-defect",
        }
    }

    /// The library operation behind the suite.
    pub fn operation(self) -> &'static str {
        match self {
            Suite::FormBounds => "forms::check_form_bounds",
            Suite::Poincare => "forms::check_poincare",
            Suite::Hardy => "forms::check_hardy",
            Suite::Sobolev => "forms::check_sobolev_gn(sobolev)",
            Suite::Gn => "forms::check_sobolev_gn(gn)",
            Suite::Holder => "forms::check_sobolev_gn(holder)",
            Suite::Strauss => "forms::check_sobolev_gn(strauss)",
            Suite::Embedding => "forms::check_embedding",
            Suite::DiazSaa => "forms::check_diaz_saa",
            Suite::Picone => "eigen::check_picone",
            Suite::PohozaevDefect => "forms::pohozaev_defect",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::InvalidParams(format!("unknown suite '{s}'")))
    }
}

/// Inputs shared by all suites.
#[derive(Debug, Clone)]
pub struct SuiteConfig {
    pub params: Params,
    pub shape: Shape,
    pub h: f64,
    pub samples: usize,
    pub seed: u64,
    /// Exponent of the gn suite; defaults to the midpoint of [p, p*].
    pub gn_q: Option<f64>,
    /// Exponent r of the Díaz–Saa suite; defaults to p.
    pub diaz_r: Option<f64>,
    pub picone_eps: f64,
    pub eigen: EigenConfig,
    pub cache: Option<PathBuf>,
}

impl SuiteConfig {
    pub fn new(params: Params, shape: Shape, h: f64) -> Self {
        SuiteConfig {
            params,
            shape,
            h,
            samples: 100,
            seed: 0,
            gn_q: None,
            diaz_r: None,
            picone_eps: 1e-3,
            eigen: EigenConfig::default(),
            cache: None,
        }
    }

    pub fn tables(&self) -> Result<FormTables> {
        let dom = Arc::new(GridDomain::build(self.shape.clone(), self.h)?);
        match &self.cache {
            Some(dir) => FormTables::assemble_cached(dom, self.params, dir),
            None => FormTables::assemble(dom, self.params),
        }
    }
}

/// Seeded uniform(−1, 1) grid functions.
pub fn random_family(domain: &Arc<GridDomain>, n: usize, seed: u64) -> Vec<GridFunction> {
    (0..n as u64).map(|k| GridFunction::random(domain.clone(), seed.wrapping_add(k))).collect()
}

/// Seeded strictly positive grid functions with values in [0.1, 1.1].
pub fn positive_family(domain: &Arc<GridDomain>, n: usize, seed: u64) -> Vec<GridFunction> {
    (0..n as u64)
        .map(|k| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(k));
            let values = (0..domain.len()).map(|_| rng.gen_range(0.1..1.1)).collect();
            GridFunction { domain: domain.clone(), values }
        })
        .collect()
}

fn collect(name: &str, tables: &FormTables, reports: Vec<Result<Report>>) -> Result<Report> {
    let mut rep = Report::new(name, tables.params, Some(tables.domain.fingerprint()));
    for r in reports {
        rep.absorb(r?);
    }
    Ok(rep.finish())
}

fn smooth_profiles(cfg: &SuiteConfig) -> Vec<Profile> {
    (0..cfg.samples as u64)
        .map(|k| Arc::new(smooth_profile(&cfg.shape, cfg.seed.wrapping_add(k))) as Profile)
        .collect()
}

/// Run one named suite.
pub fn run_suite(suite: Suite, cfg: &SuiteConfig) -> Result<Report> {
    if cfg.samples == 0 {
        return Err(Error::InvalidParams("samples must be positive".into()));
    }
    let name = suite.name();
    let prm = cfg.params;
    let study = |check: &(dyn Fn(&GridFunction, &FormTables) -> Result<Report> + Sync), profiles: &[Profile]| {
        refinement_study(name, &cfg.shape, prm, cfg.h, profiles, check)
    };
    match suite {
        Suite::FormBounds | Suite::Poincare => {
            let t = cfg.tables()?;
            let fs = random_family(&t.domain, cfg.samples, cfg.seed);
            let reps = fs
                .par_iter()
                .map(|u| if suite == Suite::FormBounds { check_form_bounds(u, &t) } else { check_poincare(u, &t) })
                .collect();
            collect(name, &t, reps)
        }
        Suite::Hardy => study(&|u, t| check_hardy(u, t), &smooth_profiles(cfg)),
        Suite::Sobolev => study(&|u, t| check_sobolev_gn(u, t, EmbeddingMode::Sobolev), &smooth_profiles(cfg)),
        Suite::Holder => study(&|u, t| check_sobolev_gn(u, t, EmbeddingMode::Holder), &smooth_profiles(cfg)),
        Suite::Gn => {
            let pstar = prm.p_star().ok_or_else(|| Error::Precondition("gn needs N > sp".into()))?;
            let q = cfg.gn_q.unwrap_or(0.5 * (prm.p() + pstar));
            study(&|u, t| check_sobolev_gn(u, t, EmbeddingMode::Gn(q)), &smooth_profiles(cfg))
        }
        Suite::Strauss => {
            let profiles: Vec<Profile> = (0..cfg.samples as u64)
                .map(|k| Arc::new(radial_profile(&cfg.shape, cfg.seed.wrapping_add(k))) as Profile)
                .collect();
            study(&|u, t| check_sobolev_gn(u, t, EmbeddingMode::Strauss), &profiles)
        }
        Suite::Embedding => {
            let eps = 0.1;
            let lifted = prm.with_s(prm.s() + eps)?;
            study(
                &|u, t| {
                    let frac = assemble_weights(&u.domain, &lifted, KernelPart::Frac)?;
                    check_embedding(u, t, &frac)
                },
                &smooth_profiles(cfg),
            )
        }
        Suite::DiazSaa => {
            let t = cfg.tables()?;
            let r = cfg.diaz_r.unwrap_or(prm.p());
            let us = positive_family(&t.domain, cfg.samples, cfg.seed);
            let vs = positive_family(&t.domain, cfg.samples, cfg.seed.wrapping_add(1 << 32));
            let reps = us
                .par_iter()
                .zip(&vs)
                .enumerate()
                .map(|(k, (u, v))| check_diaz_saa(u, v, r, &t, cfg.seed.wrapping_add(k as u64)))
                .collect();
            collect(name, &t, reps)
        }
        Suite::Picone => {
            let t = cfg.tables()?;
            let res = minimize_with_tables(&t, &cfg.eigen)?;
            let mut rep = check_picone(&res.u, &res.u, &prm, cfg.picone_eps, cfg.seed)?;
            rep.note(format!("eigenfunction with lambda {}", res.lambda));
            Ok(rep)
        }
        Suite::PohozaevDefect => {
            let t = cfg.tables()?;
            let fs = random_family(&t.domain, cfg.samples, cfg.seed);
            let half_c = 0.5 * prm.c();
            let reps = fs
                .par_iter()
                .map(|u| -> Result<Report> {
                    let g = pohozaev_defect(u, &t)?;
                    let js = energy(u, &t)?.j_s;
                    let mut r = Report::new(name, prm, Some(t.domain.fingerprint()));
                    r.n_samples = 1;
                    r.push(Item::ge("defect >= 0", g, 0.0));
                    r.push(Item::flag("defect > 0 for u != 0", g > 0.0, g));
                    r.push(Item::le("defect <= (C/2) Js", g, half_c * js));
                    r.ratios.push(g / (half_c * js));
                    Ok(r.finish())
                })
                .collect();
            collect(name, &t, reps)
        }
    }
}
