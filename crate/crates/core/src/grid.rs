//! Uniform Cartesian grids on bounded domains, zero-extended grid functions,
//! pairwise kernel weight tables and exterior killing measures.

use crate::error::{Error, Result};
use crate::kernel::{KernelPart, KernelSpec};
use crate::quadrature::GaussLegendre;
use crate::specfun::Params;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::path::{Path, PathBuf};
use std::sync::Arc;

/// Bounded domain shapes supported by [`GridDomain`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Shape {
    Interval { lo: f64, hi: f64 },
    Box { lo: [f64; 2], hi: [f64; 2] },
    Disc { center: [f64; 2], radius: f64 },
}

impl Shape {
    pub fn dim(&self) -> usize {
        match self {
            Shape::Interval { .. } => 1,
            _ => 2,
        }
    }

    /// Per-axis (lo, hi) of the bounding box.
    pub fn bounding_box(&self) -> Vec<(f64, f64)> {
        match self {
            Shape::Interval { lo, hi } => vec![(*lo, *hi)],
            Shape::Box { lo, hi } => vec![(lo[0], hi[0]), (lo[1], hi[1])],
            Shape::Disc { center, radius } => {
                vec![(center[0] - radius, center[0] + radius), (center[1] - radius, center[1] + radius)]
            }
        }
    }

    /// Distance from an interior point to the boundary (negative outside).
    pub fn boundary_distance(&self, x: &[f64]) -> f64 {
        match self {
            Shape::Interval { lo, hi } => (x[0] - lo).min(hi - x[0]),
            Shape::Box { lo, hi } => (x[0] - lo[0]).min(hi[0] - x[0]).min(x[1] - lo[1]).min(hi[1] - x[1]),
            Shape::Disc { center, radius } => radius - (x[0] - center[0]).hypot(x[1] - center[1]),
        }
    }

    /// Distance from interior point x along unit direction v to the boundary.
    pub fn exit_distance(&self, x: &[f64], v: &[f64]) -> f64 {
        match self {
            Shape::Interval { lo, hi } => {
                if v[0] > 0.0 {
                    (hi - x[0]) / v[0]
                } else {
                    (lo - x[0]) / v[0]
                }
            }
            Shape::Box { lo, hi } => {
                let mut t = f64::INFINITY;
                for a in 0..2 {
                    if v[a] > 0.0 {
                        t = t.min((hi[a] - x[a]) / v[a]);
                    } else if v[a] < 0.0 {
                        t = t.min((lo[a] - x[a]) / v[a]);
                    }
                }
                t
            }
            Shape::Disc { center, radius } => {
                let y = [x[0] - center[0], x[1] - center[1]];
                let b = y[0] * v[0] + y[1] * v[1];
                let c = y[0] * y[0] + y[1] * y[1] - radius * radius;
                -b + (b * b - c).sqrt()
            }
        }
    }

    fn validate(&self) -> Result<()> {
        let ok = match self {
            Shape::Interval { lo, hi } => lo < hi,
            Shape::Box { lo, hi } => lo[0] < hi[0] && lo[1] < hi[1],
            Shape::Disc { radius, .. } => *radius > 0.0,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::DegenerateDomain(format!("{self:?} has empty interior")))
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Shape::Interval { .. } => "interval",
            Shape::Box { .. } => "box",
            Shape::Disc { .. } => "disc",
        }
    }
}

/// Identity of a grid, used to match tables, functions and cache files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DomainFingerprint {
    pub shape: Shape,
    pub h: f64,
    pub n_cells: usize,
}

/// Uniform grid of cells whose centers lie inside a shape.
#[derive(Debug, Clone, PartialEq)]
pub struct GridDomain {
    shape: Shape,
    h: f64,
    counts: Vec<usize>,
    lo: Vec<f64>,
    mask: Vec<bool>,
    centers: Vec<f64>,
    bdist: Vec<f64>,
    diam: f64,
}

impl GridDomain {
    /// Build the grid of cells of size `h` covering the shape's bounding box,
    /// enumerated lexicographically (first axis slowest).
    pub fn build(shape: Shape, h: f64) -> Result<Self> {
        shape.validate()?;
        if !(h > 0.0 && h.is_finite()) {
            return Err(Error::DegenerateDomain(format!("cell size must be positive, got {h}")));
        }
        let bbox = shape.bounding_box();
        let counts: Vec<usize> = bbox
            .iter()
            .map(|(lo, hi)| {
                let r = (hi - lo) / h;
                if (r - r.round()).abs() < 1e-9 * r.max(1.0) {
                    r.round() as usize
                } else {
                    r.ceil() as usize
                }
            })
            .collect();
        let n = shape.dim();
        let lo: Vec<f64> = bbox.iter().map(|b| b.0).collect();
        let total: usize = counts.iter().product();
        let mut mask = vec![false; total];
        let mut centers = Vec::new();
        let mut bdist = Vec::new();
        let mut x = vec![0.0; n];
        for (lin, m) in mask.iter_mut().enumerate() {
            let mut rem = lin;
            for a in (0..n).rev() {
                let k = rem % counts[a];
                rem /= counts[a];
                x[a] = lo[a] + (k as f64 + 0.5) * h;
            }
            let d = shape.boundary_distance(&x);
            if d > 0.0 {
                *m = true;
                centers.extend_from_slice(&x);
                bdist.push(d);
            }
        }
        let len = bdist.len();
        if len < 2 {
            return Err(Error::DegenerateDomain(format!("only {len} inside cells at h = {h}")));
        }
        let max_sq = (0..len)
            .into_par_iter()
            .map(|i| {
                let xi = &centers[i * n..(i + 1) * n];
                (i + 1..len)
                    .map(|j| {
                        let xj = &centers[j * n..(j + 1) * n];
                        xi.iter().zip(xj).map(|(a, b)| (a - b) * (a - b)).sum::<f64>()
                    })
                    .fold(0.0, f64::max)
            })
            .reduce(|| 0.0, f64::max);
        let diam = max_sq.sqrt() + h * (n as f64).sqrt();
        Ok(GridDomain { shape, h, counts, lo, mask, centers, bdist, diam })
    }

    pub fn dim(&self) -> usize {
        self.shape.dim()
    }
    pub fn shape(&self) -> &Shape {
        &self.shape
    }
    pub fn h(&self) -> f64 {
        self.h
    }
    /// Number of inside cells.
    pub fn len(&self) -> usize {
        self.bdist.len()
    }
    pub fn is_empty(&self) -> bool {
        self.bdist.is_empty()
    }
    pub fn center(&self, i: usize) -> &[f64] {
        let n = self.dim();
        &self.centers[i * n..(i + 1) * n]
    }
    pub fn boundary_distance(&self, i: usize) -> f64 {
        self.bdist[i]
    }
    pub fn boundary_distances(&self) -> &[f64] {
        &self.bdist
    }
    /// Max center distance plus h√N.
    pub fn diam(&self) -> f64 {
        self.diam
    }
    /// h^N.
    pub fn cell_volume(&self) -> f64 {
        self.h.powi(self.dim() as i32)
    }
    /// Cells per axis of the bounding lattice.
    pub fn counts(&self) -> &[usize] {
        &self.counts
    }
    /// Inside flags over the full bounding lattice.
    pub fn mask(&self) -> &[bool] {
        &self.mask
    }
    pub fn bounding_box(&self) -> Vec<(f64, f64)> {
        self.lo.iter().zip(&self.counts).map(|(l, c)| (*l, l + *c as f64 * self.h)).collect()
    }
    pub fn distance(&self, i: usize, j: usize) -> f64 {
        self.center(i).iter().zip(self.center(j)).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt()
    }
    pub fn fingerprint(&self) -> DomainFingerprint {
        DomainFingerprint { shape: self.shape.clone(), h: self.h, n_cells: self.len() }
    }

    /// ∫_{S^{N−1}} f(ρ(θ)) dθ, where ρ is the exit distance from cell i's center.
    pub fn angular_integral(&self, i: usize, f: impl Fn(f64) -> f64) -> f64 {
        let x = self.center(i);
        match &self.shape {
            Shape::Interval { .. } => f(self.shape.exit_distance(x, &[1.0])) + f(self.shape.exit_distance(x, &[-1.0])),
            Shape::Disc { .. } => {
                let m = 512;
                (0..m)
                    .map(|j| {
                        let th = 2.0 * PI * j as f64 / m as f64;
                        f(self.shape.exit_distance(x, &[th.cos(), th.sin()]))
                    })
                    .sum::<f64>()
                    * (2.0 * PI / m as f64)
            }
            Shape::Box { lo, hi } => {
                // ρ(θ) is smooth between the corner directions
                let mut cuts: Vec<f64> = [(lo[0], lo[1]), (hi[0], lo[1]), (hi[0], hi[1]), (lo[0], hi[1])]
                    .iter()
                    .map(|(cx, cy)| (cy - x[1]).atan2(cx - x[0]).rem_euclid(2.0 * PI))
                    .collect();
                cuts.sort_by(|a, b| a.total_cmp(b));
                cuts.push(cuts[0] + 2.0 * PI);
                let gl = GaussLegendre::new(16);
                let mut acc = 0.0;
                for w in cuts.windows(2) {
                    let pieces = 4;
                    let step = (w[1] - w[0]) / pieces as f64;
                    for k in 0..pieces {
                        let a = w[0] + k as f64 * step;
                        acc += gl.integrate(a, a + step, |th| f(self.shape.exit_distance(x, &[th.cos(), th.sin()])));
                    }
                }
                acc
            }
        }
    }
}

/// Values on the inside cells of a grid; zero on every outside cell and on ℝᴺ∖Ω.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    pub domain: Arc<GridDomain>,
    pub values: Vec<f64>,
}

impl Serialize for GridFunction {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = ser.serialize_struct("GridFunction", 2)?;
        st.serialize_field("domain", &self.domain.fingerprint())?;
        st.serialize_field("values", &self.values)?;
        st.end()
    }
}

/// How to populate a [`GridFunction`].
pub enum Source<'a> {
    Analytic(&'a dyn Fn(&[f64]) -> f64),
    Random(u64),
    EigenInitial,
}

impl GridFunction {
    pub fn new(domain: Arc<GridDomain>, values: Vec<f64>) -> Result<Self> {
        if values.len() != domain.len() {
            return Err(Error::Mismatch(format!("{} values for {} cells", values.len(), domain.len())));
        }
        Ok(GridFunction { domain, values })
    }

    pub fn zeros(domain: Arc<GridDomain>) -> Self {
        let n = domain.len();
        GridFunction { domain, values: vec![0.0; n] }
    }

    pub fn from_fn(domain: Arc<GridDomain>, f: impl Fn(&[f64]) -> f64) -> Self {
        let values = (0..domain.len()).map(|i| f(domain.center(i))).collect();
        GridFunction { domain, values }
    }

    /// Seeded uniform(−1, 1) values.
    pub fn random(domain: Arc<GridDomain>, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let values = (0..domain.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        GridFunction { domain, values }
    }

    /// Strictly positive profile proportional to the boundary distance.
    pub fn tent(domain: Arc<GridDomain>) -> Self {
        let dmax = domain.boundary_distances().iter().cloned().fold(0.0, f64::max);
        let values = domain.boundary_distances().iter().map(|d| d / dmax).collect();
        GridFunction { domain, values }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }
    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// (Σ|u_i|^q h^N)^{1/q}.
    pub fn lp_norm(&self, q: f64) -> f64 {
        assert!(q >= 1.0, "lp_norm needs q >= 1");
        let vol = self.domain.cell_volume();
        let m = self.sup_norm();
        if m == 0.0 {
            return 0.0;
        }
        // scale by the max to keep powers in range
        let s: f64 = self.values.iter().map(|v| (v.abs() / m).powf(q)).sum();
        m * (s * vol).powf(1.0 / q)
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |a, v| a.max(v.abs()))
    }

    pub fn scaled(&self, c: f64) -> Self {
        self.map(|v| c * v)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        GridFunction { domain: self.domain.clone(), values: self.values.iter().map(|v| f(*v)).collect() }
    }

    pub fn zip_with(&self, other: &GridFunction, f: impl Fn(f64, f64) -> f64) -> Self {
        GridFunction {
            domain: self.domain.clone(),
            values: self.values.iter().zip(&other.values).map(|(a, b)| f(*a, *b)).collect(),
        }
    }

    /// Indicator of cell i.
    pub fn indicator(domain: Arc<GridDomain>, i: usize) -> Self {
        let mut g = GridFunction::zeros(domain);
        g.values[i] = 1.0;
        g
    }
}

/// Populate a grid function from a [`Source`].
pub fn sample_function(domain: Arc<GridDomain>, source: Source<'_>) -> GridFunction {
    match source {
        Source::Analytic(f) => GridFunction::from_fn(domain, f),
        Source::Random(seed) => GridFunction::random(domain, seed),
        Source::EigenInitial => GridFunction::tent(domain),
    }
}

/// Options for weight assembly.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AssemblyOptions {
    /// Sub-cells per axis for pairs closer than 3h.
    pub near_subdivision: usize,
}

impl Default for AssemblyOptions {
    fn default() -> Self {
        AssemblyOptions { near_subdivision: 4 }
    }
}

/// Symmetric cell-pair weights W_ij ≈ ∬ κ(|x − y|) over cell_i × cell_j and
/// exterior weights κ_i = h^N ∫_{ℝᴺ∖Ω} κ(|x_i − y|) dy for one kernel part.
///
/// The diagonal is stored as zero: it multiplies |u_i − u_i|^p and never contributes.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightTable {
    pub part: KernelPart,
    pub params: Params,
    n: usize,
    packed: Vec<f64>,
    killing: Vec<f64>,
    fingerprint: DomainFingerprint,
}

impl WeightTable {
    pub fn len(&self) -> usize {
        self.n
    }
    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    #[inline]
    fn index(&self, i: usize, j: usize) -> usize {
        let (a, b) = if i <= j { (i, j) } else { (j, i) };
        row_start(self.n, a) + (b - a)
    }

    /// W_ij (= W_ji).
    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.packed[self.index(i, j)]
    }

    /// Entries j ≥ i of row i.
    pub fn row_upper(&self, i: usize) -> &[f64] {
        let s = row_start(self.n, i);
        &self.packed[s..s + self.n - i]
    }

    pub fn killing(&self) -> &[f64] {
        &self.killing
    }

    pub fn fingerprint(&self) -> &DomainFingerprint {
        &self.fingerprint
    }

    pub fn matches(&self, domain: &GridDomain) -> bool {
        self.fingerprint == domain.fingerprint()
    }

    /// Packed upper triangle, row-major, diagonal included.
    pub fn packed(&self) -> &[f64] {
        &self.packed
    }

    /// Write the table as little-endian f64 (packed triangle then κ) with a JSON sidecar at `<path>.json`.
    pub fn save(&self, path: &Path) -> Result<()> {
        let mut bytes = Vec::with_capacity(8 * (self.packed.len() + self.n));
        for v in self.packed.iter().chain(&self.killing) {
            bytes.extend_from_slice(&v.to_le_bytes());
        }
        std::fs::write(path, bytes).map_err(|e| Error::Cache(format!("{}: {e}", path.display())))?;
        let side = Sidecar::new(self);
        let json = serde_json::to_string_pretty(&side).map_err(|e| Error::Cache(e.to_string()))?;
        std::fs::write(sidecar_path(path), json).map_err(|e| Error::Cache(e.to_string()))
    }

    /// Load a table saved by [`WeightTable::save`], rejecting sidecars that do not match the request.
    pub fn load(path: &Path, domain: &GridDomain, params: &Params, part: KernelPart) -> Result<Self> {
        let text = std::fs::read_to_string(sidecar_path(path)).map_err(|e| Error::Cache(e.to_string()))?;
        let side: Sidecar = serde_json::from_str(&text).map_err(|e| Error::Cache(e.to_string()))?;
        let want = Sidecar::describe(domain, params, part);
        if side != want {
            return Err(Error::Cache(format!("sidecar mismatch: found {side:?}, expected {want:?}")));
        }
        let bytes = std::fs::read(path).map_err(|e| Error::Cache(e.to_string()))?;
        let n = domain.len();
        let np = n * (n + 1) / 2;
        if bytes.len() != 8 * (np + n) {
            return Err(Error::Cache(format!("expected {} bytes, found {}", 8 * (np + n), bytes.len())));
        }
        let vals: Vec<f64> =
            bytes.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk"))).collect();
        Ok(WeightTable {
            part,
            params: *params,
            n,
            packed: vals[..np].to_vec(),
            killing: vals[np..].to_vec(),
            fingerprint: domain.fingerprint(),
        })
    }
}

#[inline]
fn row_start(n: usize, i: usize) -> usize {
    // Σ_{k<i} (n − k)
    i * n - i * i.saturating_sub(1) / 2
}

fn sidecar_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".json");
    PathBuf::from(s)
}

pub const CACHE_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct Sidecar {
    format_version: u32,
    #[serde(rename = "N")]
    n: usize,
    s: f64,
    p: f64,
    shape: Shape,
    #[serde(rename = "box")]
    bbox: Vec<(f64, f64)>,
    h: f64,
    part: KernelPart,
    n_cells: usize,
}

impl Sidecar {
    fn describe(domain: &GridDomain, params: &Params, part: KernelPart) -> Self {
        Sidecar {
            format_version: CACHE_FORMAT_VERSION,
            n: params.dim(),
            s: params.s(),
            p: params.p(),
            shape: domain.shape().clone(),
            bbox: domain.bounding_box(),
            h: domain.h(),
            part,
            n_cells: domain.len(),
        }
    }
    fn new(t: &WeightTable) -> Self {
        Sidecar {
            format_version: CACHE_FORMAT_VERSION,
            n: t.params.dim(),
            s: t.params.s(),
            p: t.params.p(),
            shape: t.fingerprint.shape.clone(),
            bbox: t.fingerprint.shape.bounding_box(),
            h: t.fingerprint.h,
            part: t.part,
            n_cells: t.n,
        }
    }
}

fn check_dims(domain: &GridDomain, params: &Params) -> Result<()> {
    if domain.dim() != params.dim() {
        return Err(Error::Mismatch(format!("grid is {}-D but params have N = {}", domain.dim(), params.dim())));
    }
    Ok(())
}

/// Assemble the weight table with default options.
pub fn assemble_weights(domain: &GridDomain, params: &Params, part: KernelPart) -> Result<WeightTable> {
    assemble_weights_with(domain, params, part, &AssemblyOptions::default())
}

/// Sub-cell midpoint rule for one pair of distinct cells.
pub fn near_pair_weight(domain: &GridDomain, spec: &KernelSpec, part: KernelPart, i: usize, j: usize, m: usize) -> f64 {
    let n = domain.dim();
    let h = domain.h();
    let sub = h / m as f64;
    let offs: Vec<f64> = (0..m).map(|a| (a as f64 + 0.5) * sub - 0.5 * h).collect();
    let xi = domain.center(i);
    let xj = domain.center(j);
    let mut acc = 0.0;
    match n {
        1 => {
            for a in &offs {
                for b in &offs {
                    acc += spec.eval(part, ((xi[0] + a) - (xj[0] + b)).abs());
                }
            }
        }
        _ => {
            for ax in &offs {
                for ay in &offs {
                    for bx in &offs {
                        for by in &offs {
                            let dx = (xi[0] + ax) - (xj[0] + bx);
                            let dy = (xi[1] + ay) - (xj[1] + by);
                            acc += spec.eval(part, dx.hypot(dy));
                        }
                    }
                }
            }
        }
    }
    acc * sub.powi(2 * n as i32)
}

/// Exterior killing measure of cell i: ∫_{ℝᴺ∖Ω} κ(|x_i − y|) dy, with radial
/// integrals cut at `r_max` (use +∞ for the full measure).
pub fn killing_measure(domain: &GridDomain, spec: &KernelSpec, part: KernelPart, i: usize, r_max: f64) -> f64 {
    domain.angular_integral(i, |rho| {
        if rho >= r_max {
            0.0
        } else {
            spec.ray_integral(part, rho, r_max)
        }
    })
}

/// Assemble W and κ for one kernel part. Rows are computed in parallel and
/// concatenated in index order, so the table is identical for any thread count.
pub fn assemble_weights_with(
    domain: &GridDomain,
    params: &Params,
    part: KernelPart,
    opts: &AssemblyOptions,
) -> Result<WeightTable> {
    check_dims(domain, params)?;
    if opts.near_subdivision < 1 {
        return Err(Error::InvalidParams("near_subdivision must be >= 1".into()));
    }
    let spec = KernelSpec::new(*params);
    let n = domain.len();
    let h = domain.h();
    let vol2 = domain.cell_volume().powi(2);
    let near = 3.0 * h * (1.0 - 1e-9);
    let rows: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut row = Vec::with_capacity(n - i);
            row.push(0.0);
            for j in i + 1..n {
                let d = domain.distance(i, j);
                let w = if d < near {
                    near_pair_weight(domain, &spec, part, i, j, opts.near_subdivision)
                } else {
                    spec.eval(part, d) * vol2
                };
                row.push(w);
            }
            row
        })
        .collect();
    let packed: Vec<f64> = rows.into_iter().flatten().collect();
    let vol = domain.cell_volume();
    let killing: Vec<f64> =
        (0..n).into_par_iter().map(|i| vol * killing_measure(domain, &spec, part, i, f64::INFINITY)).collect();
    Ok(WeightTable { part, params: *params, n, packed, killing, fingerprint: domain.fingerprint() })
}

/// The four tables of one parameter triple on one grid.
#[derive(Debug, Clone)]
pub struct FormTables {
    pub domain: Arc<GridDomain>,
    pub params: Params,
    pub full: WeightTable,
    pub plus: WeightTable,
    pub minus: WeightTable,
    pub frac: WeightTable,
}

impl FormTables {
    pub fn assemble(domain: Arc<GridDomain>, params: Params) -> Result<Self> {
        let full = assemble_weights(&domain, &params, KernelPart::Full)?;
        let plus = assemble_weights(&domain, &params, KernelPart::Plus)?;
        let minus = assemble_weights(&domain, &params, KernelPart::Minus)?;
        let frac = assemble_weights(&domain, &params, KernelPart::Frac)?;
        Ok(FormTables { domain, params, full, plus, minus, frac })
    }

    /// Assemble, reading and writing per-part cache files `<dir>/<part>.bin`.
    pub fn assemble_cached(domain: Arc<GridDomain>, params: Params, dir: &Path) -> Result<Self> {
        std::fs::create_dir_all(dir).map_err(|e| Error::Cache(e.to_string()))?;
        let get = |part: KernelPart| -> Result<WeightTable> {
            let path = dir.join(format!("{}.bin", part.name()));
            match WeightTable::load(&path, &domain, &params, part) {
                Ok(t) => Ok(t),
                Err(_) => {
                    let t = assemble_weights(&domain, &params, part)?;
                    t.save(&path)?;
                    Ok(t)
                }
            }
        };
        Ok(FormTables {
            full: get(KernelPart::Full)?,
            plus: get(KernelPart::Plus)?,
            minus: get(KernelPart::Minus)?,
            frac: get(KernelPart::Frac)?,
            domain,
            params,
        })
    }

    pub fn table(&self, part: KernelPart) -> &WeightTable {
        match part {
            KernelPart::Full => &self.full,
            KernelPart::Plus => &self.plus,
            KernelPart::Minus => &self.minus,
            KernelPart::Frac => &self.frac,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn interval(lo: f64, hi: f64, h: f64) -> GridDomain {
        GridDomain::build(Shape::Interval { lo, hi }, h).unwrap()
    }

    #[test]
    fn interval_grid_basics() {
        let g = interval(0.0, 0.3, 0.003);
        assert_eq!(g.len(), 100);
        assert!((g.diam() - 0.3).abs() < 1e-12);
        let d0 = g.boundary_distance(0);
        assert!(d0 > 0.0 && d0 < g.h());
        assert!((d0 - 0.0015).abs() < 1e-15);
    }

    #[test]
    fn disc_grid_counts_centers_inside() {
        let g = GridDomain::build(Shape::Disc { center: [0.0, 0.0], radius: 0.15 }, 0.01).unwrap();
        let mut count = 0;
        for i in 0..30 {
            for j in 0..30 {
                let x = -0.15 + (i as f64 + 0.5) * 0.01;
                let y = -0.15 + (j as f64 + 0.5) * 0.01;
                if x.hypot(y) < 0.15 {
                    count += 1;
                }
            }
        }
        assert_eq!(g.len(), count);
        assert!(g.boundary_distances().iter().all(|d| *d > 0.0));
        assert!(g.diam() <= 0.3 * 2f64.sqrt());
    }

    #[test]
    fn degenerate_domains_rejected() {
        assert!(GridDomain::build(Shape::Interval { lo: 0.0, hi: 0.0 }, 0.1).is_err());
        assert!(GridDomain::build(Shape::Interval { lo: 0.0, hi: 0.1 }, 0.1).is_err());
        assert!(GridDomain::build(Shape::Interval { lo: 0.0, hi: 1.0 }, -0.1).is_err());
    }

    #[test]
    fn packed_indexing() {
        for n in [1usize, 2, 5, 9] {
            let mut seen = vec![false; n * (n + 1) / 2];
            for i in 0..n {
                for j in i..n {
                    let k = row_start(n, i) + (j - i);
                    assert!(!seen[k]);
                    seen[k] = true;
                }
            }
            assert!(seen.iter().all(|s| *s));
        }
    }

    #[test]
    fn interval_killing_is_exact() {
        let g = interval(0.0, 0.3, 0.03);
        let params = Params::new(1, 0.5, 2.0).unwrap();
        let t = assemble_weights(&g, &params, KernelPart::Frac).unwrap();
        for i in 0..g.len() {
            let x = g.center(i)[0];
            let want = 0.03 * (1.0 / x + 1.0 / (0.3 - x));
            assert!(((t.killing()[i] - want) / want).abs() < 1e-14);
        }
    }

    #[test]
    fn box_killing_matches_disc_free_oracle() {
        // frac killing measure of the square centre: 4 × ∫_{−π/4}^{π/4} (a/cos φ)^{−sp}/(sp) dφ
        let g = GridDomain::build(Shape::Box { lo: [-0.5, -0.5], hi: [0.5, 0.5] }, 0.1).unwrap();
        let params = Params::new(2, 0.5, 2.0).unwrap();
        let spec = KernelSpec::new(params);
        let mid = (0..g.len()).min_by(|a, b| g.center(*a)[0].abs().total_cmp(&g.center(*b)[0].abs()).then(g.center(*a)[1].abs().total_cmp(&g.center(*b)[1].abs()))).unwrap();
        let x = g.center(mid).to_vec();
        let got = killing_measure(&g, &spec, KernelPart::Frac, mid, f64::INFINITY);
        // brute-force angular oracle with many uniform directions
        let m = 200_000;
        let want: f64 = (0..m)
            .map(|k| {
                let th = 2.0 * PI * (k as f64 + 0.5) / m as f64;
                let rho = g.shape().exit_distance(&x, &[th.cos(), th.sin()]);
                rho.powf(-1.0)
            })
            .sum::<f64>()
            * 2.0
            * PI
            / m as f64;
        assert!(((got - want) / want).abs() < 1e-7, "{got} vs {want}");
    }

    #[test]
    fn random_is_deterministic() {
        let g = Arc::new(interval(0.0, 1.0, 0.1));
        assert_eq!(GridFunction::random(g.clone(), 7), GridFunction::random(g.clone(), 7));
        assert_ne!(GridFunction::random(g.clone(), 7), GridFunction::random(g.clone(), 8));
        assert!(GridFunction::tent(g.clone()).values.iter().all(|v| *v > 0.0));
        let z = sample_function(g.clone(), Source::Analytic(&|_| 0.0));
        assert!(z.values.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn lp_norm_basics() {
        let g = Arc::new(interval(0.0, 1.0, 0.01));
        let one = GridFunction::from_fn(g.clone(), |_| 1.0);
        assert!((one.lp_norm(2.0) - 1.0).abs() < 1e-12);
        let u = GridFunction::random(g.clone(), 3);
        assert!((u.scaled(-2.5).lp_norm(3.0) - 2.5 * u.lp_norm(3.0)).abs() < 1e-13);
        assert_eq!(GridFunction::zeros(g).lp_norm(2.0), 0.0);
    }

    #[test]
    fn cache_round_trip_and_mismatch() {
        let g = interval(0.0, 0.3, 0.03);
        let params = Params::new(1, 0.5, 2.0).unwrap();
        let t = assemble_weights(&g, &params, KernelPart::Full).unwrap();
        let dir = std::env::temp_dir().join(format!("loglap-cache-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("full.bin");
        t.save(&path).unwrap();
        let back = WeightTable::load(&path, &g, &params, KernelPart::Full).unwrap();
        assert_eq!(back, t);
        assert!(WeightTable::load(&path, &g, &params, KernelPart::Plus).is_err());
        let other = Params::new(1, 0.4, 2.0).unwrap();
        assert!(WeightTable::load(&path, &g, &other, KernelPart::Full).is_err());
        std::fs::remove_dir_all(&dir).unwrap();
    }
}
