//! Log-Gamma, digamma and the normalization constants built on them.

use crate::error::{domain, Error, Result};
use serde::{Deserialize, Serialize};
use std::f64::consts::LN_2;

/// Euler–Mascheroni constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_860_61;

const LN_PI: f64 = 1.144_729_885_849_400_174_1;

// zeta(k) - 1 for k = 2..41
const ZETA_MINUS_ONE: [f64; 40] = [
    0.644_934_066_848_226_436_47,
    0.202_056_903_159_594_285_4,
    0.082_323_233_711_138_191_516,
    0.036_927_755_143_369_926_331,
    0.017_343_061_984_449_139_715,
    0.008_349_277_381_922_826_839_8,
    0.004_077_356_197_944_339_378_7,
    0.002_008_392_826_082_214_417_9,
    0.000_994_575_127_818_085_337_15,
    0.000_494_188_604_119_464_558_7,
    0.000_246_086_553_308_048_298_64,
    0.000_122_713_347_578_489_146_75,
    6.124_813_505_870_482_925_9e-5,
    3.058_823_630_702_049_355_2e-5,
    1.528_225_940_865_187_173_3e-5,
    7.637_197_637_899_762_273_6e-6,
    3.817_293_264_999_839_856_5e-6,
    1.908_212_716_553_938_925_7e-6,
    9.539_620_338_727_961_131_5e-7,
    4.769_329_867_878_064_631_2e-7,
    2.384_505_027_277_329_9e-7,
    1.192_199_259_653_110_730_7e-7,
    5.960_818_905_125_947_961_2e-8,
    2.980_350_351_465_228_018_6e-8,
    1.490_155_482_836_504_123_5e-8,
    7.450_711_789_835_429_492e-9,
    3.725_334_024_788_457_054_8e-9,
    1.862_659_723_513_049_006_4e-9,
    9.313_274_324_196_681_828_7e-10,
    4.656_629_065_033_784_073e-10,
    2.328_311_833_676_505_492e-10,
    1.164_155_017_270_051_977_6e-10,
    5.820_772_087_902_700_889_2e-11,
    2.910_385_044_497_099_686_9e-11,
    1.455_192_189_104_198_423_6e-11,
    7.275_959_835_057_481_014_5e-12,
    3.637_979_547_378_651_190_2e-12,
    1.818_989_650_307_065_947_6e-12,
    9.094_947_840_263_889_282_5e-13,
    4.547_473_783_042_154_026_8e-13,
];

const LANCZOS: [f64; 14] = [
    57.156_235_665_862_923_5,
    -59.597_960_355_475_491_2,
    14.136_097_974_741_747_1,
    -0.491_913_816_097_620_199,
    0.339_946_499_848_118_887e-4,
    0.465_236_289_270_485_756e-4,
    -0.983_744_753_048_795_646e-4,
    0.158_088_703_224_912_494e-3,
    -0.210_264_441_724_104_883e-3,
    0.217_439_618_115_212_643e-3,
    -0.164_318_106_536_763_890e-3,
    0.844_182_239_838_527_433e-4,
    -0.261_908_384_015_814_087e-4,
    0.368_991_826_595_316_234e-5,
];

/// ln Γ(2 + z) for |z| ≤ 1/2 from the zeta series; no cancellation near z = 0.
fn ln_gamma_two_plus(z: f64) -> f64 {
    let mut acc = 0.0;
    let mut zk = -z;
    for (i, zm1) in ZETA_MINUS_ONE.iter().enumerate() {
        let k = (i + 2) as f64;
        zk *= -z;
        acc += zm1 * zk / k;
    }
    z * (1.0 - EULER_GAMMA) + acc
}

fn ln_gamma_lanczos(x: f64) -> f64 {
    let mut y = x;
    let tmp = x + 5.242_187_5;
    let tmp = (x + 0.5) * tmp.ln() - tmp;
    let mut ser = 0.999_999_999_999_997_092;
    for c in LANCZOS {
        y += 1.0;
        ser += c / y;
    }
    tmp + (2.506_628_274_631_000_5 * ser / x).ln()
}

/// Natural logarithm of the Gamma function for positive finite `x`.
pub fn ln_gamma(x: f64) -> Result<f64> {
    if !x.is_finite() || x <= 0.0 {
        return Err(domain(format!("ln_gamma requires finite x > 0, got {x}")));
    }
    Ok(ln_gamma_unchecked(x))
}

pub(crate) fn ln_gamma_unchecked(x: f64) -> f64 {
    if x > 2.5 {
        return ln_gamma_lanczos(x);
    }
    // the offsets below are exact, so z carries no rounding from the shift
    if x >= 1.5 {
        ln_gamma_two_plus(x - 2.0)
    } else if x >= 0.5 {
        let z = x - 1.0;
        ln_gamma_two_plus(z) - z.ln_1p()
    } else {
        ln_gamma_two_plus(x) - x.ln() - x.ln_1p()
    }
}

/// Digamma ψ = Γ'/Γ for positive finite `x`.
pub fn digamma(x: f64) -> Result<f64> {
    if !x.is_finite() || x <= 0.0 {
        return Err(domain(format!("digamma requires finite x > 0, got {x}")));
    }
    Ok(digamma_unchecked(x))
}

pub(crate) fn digamma_unchecked(mut x: f64) -> f64 {
    let mut acc = 0.0;
    while x < 8.0 {
        acc -= 1.0 / x;
        x += 1.0;
    }
    let inv2 = 1.0 / (x * x);
    // Bernoulli terms B_2k / (2k x^2k), Horner in 1/x^2
    let series = inv2
        * (1.0 / 12.0
            - inv2
                * (1.0 / 120.0
                    - inv2
                        * (1.0 / 252.0
                            - inv2
                                * (1.0 / 240.0
                                    - inv2 * (1.0 / 132.0 - inv2 * (691.0 / 32760.0 - inv2 / 12.0))))));
    acc + x.ln() - 0.5 / x - series
}

/// Surface measure of the unit sphere in ℝᴺ, 2π^{N/2}/Γ(N/2).
pub fn sphere_measure(n: usize) -> f64 {
    assert!(n >= 1, "dimension must be at least 1");
    let half = n as f64 / 2.0;
    (LN_2 + half * LN_PI - ln_gamma_unchecked(half)).exp()
}

fn check_nsp(n: usize, s: f64, p: f64) -> Result<()> {
    if n < 1 {
        return Err(Error::InvalidParams(format!("N must be >= 1, got {n}")));
    }
    if !(s > 0.0 && s < 1.0) {
        return Err(Error::InvalidParams(format!("s must lie in (0,1), got {s}")));
    }
    if !(p > 1.0 && p.is_finite()) {
        return Err(Error::InvalidParams(format!("p must lie in (1,inf), got {p}")));
    }
    Ok(())
}

/// Which closed form of C(N,s,p) to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConstBranch {
    /// The form stated for s ≤ 1/2.
    Low,
    /// The form stated for s > 1/2.
    High,
}

fn ln_norm_branch(n: usize, s: f64, p: f64, branch: ConstBranch) -> f64 {
    let nf = n as f64;
    let common = s.ln() + p.ln() + ln_gamma_unchecked((nf + s * p) / 2.0) - ln_gamma_unchecked(1.0 - s);
    match branch {
        ConstBranch::High => {
            common + 2.0 * (s - 1.0) * LN_2 - 0.5 * (nf - 1.0) * LN_PI - ln_gamma_unchecked((p + 1.0) / 2.0)
        }
        ConstBranch::Low => common + (2.0 * s - 1.0) * LN_2 - 0.5 * nf * LN_PI,
    }
}

/// ln C(N,s,p); the s ≤ 1/2 branch is used at s = 1/2.
fn ln_norm_const(n: usize, s: f64, p: f64) -> f64 {
    let b = if s > 0.5 { ConstBranch::High } else { ConstBranch::Low };
    ln_norm_branch(n, s, p, b)
}

/// One closed form of C(N,s,p) evaluated at any s ∈ (0,1). The two agree when p = 2.
pub fn norm_const_branch(n: usize, s: f64, p: f64, branch: ConstBranch) -> Result<f64> {
    check_nsp(n, s, p)?;
    Ok(ln_norm_branch(n, s, p, branch).exp())
}

/// Normalization constant C(N,s,p) of the fractional p-Laplacian.
pub fn norm_const(n: usize, s: f64, p: f64) -> Result<f64> {
    check_nsp(n, s, p)?;
    Ok(ln_norm_const(n, s, p).exp())
}

fn log_norm_unchecked(n: usize, s: f64, p: f64) -> f64 {
    2.0 * LN_2
        + 1.0 / s
        + 0.5 * p * digamma_unchecked((n as f64 + s * p) / 2.0)
        + digamma_unchecked(1.0 - s)
}

/// B(N,s,p) = 2 ln 2 + 1/s + (p/2)ψ((N+sp)/2) + ψ(1−s), the s-derivative of ln C(N,s,p).
pub fn log_norm_const(n: usize, s: f64, p: f64) -> Result<f64> {
    check_nsp(n, s, p)?;
    Ok(log_norm_unchecked(n, s, p))
}

/// Classical constants (C(N,p), ρ(N,p)) of the logarithmic p-Laplacian.
pub fn classical_const(n: usize, p: f64) -> Result<(f64, f64)> {
    if n < 1 || !(p > 1.0 && p.is_finite()) {
        return Err(Error::InvalidParams(format!("need N >= 1 and p > 1, got N={n}, p={p}")));
    }
    let half = n as f64 / 2.0;
    let c = p * (ln_gamma_unchecked(half) - half * LN_PI).exp() / 2.0;
    let rho = 2.0 * LN_2 + 0.5 * p * digamma_unchecked(half) - EULER_GAMMA;
    Ok((c, rho))
}

/// Root s₀ ∈ (1/2, 1) of s ↦ B(N,s,p), by bisection.
pub fn b_sign_threshold(n: usize, p: f64) -> Result<f64> {
    if n < 1 || !(p > 1.0 && p.is_finite()) {
        return Err(Error::InvalidParams(format!("need N >= 1 and p > 1, got N={n}, p={p}")));
    }
    let (mut lo, mut hi) = (0.5, 1.0 - 1e-9);
    let b = |s: f64| log_norm_unchecked(n, s, p);
    let (b_lo, b_hi) = (b(lo), b(hi));
    if !(b_lo > 0.0 && b_hi < 0.0) {
        return Err(Error::NoSignChange { lo, hi, b_lo, b_hi });
    }
    let mut mid = 0.5 * (lo + hi);
    for _ in 0..80 {
        mid = 0.5 * (lo + hi);
        let v = b(mid);
        if v.abs() < 1e-12 || mid == lo || mid == hi {
            break;
        }
        if v > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(mid)
}

/// The triple (N, s, p) with its derived constants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawParams", into = "RawParams")]
pub struct Params {
    n: usize,
    s: f64,
    p: f64,
    c: f64,
    b: f64,
    omega: f64,
}

#[derive(Serialize, Deserialize)]
struct RawParams {
    #[serde(rename = "N")]
    n: usize,
    s: f64,
    p: f64,
}

impl TryFrom<RawParams> for Params {
    type Error = Error;
    fn try_from(r: RawParams) -> Result<Self> {
        Params::new(r.n, r.s, r.p)
    }
}

impl From<Params> for RawParams {
    fn from(p: Params) -> Self {
        RawParams { n: p.n, s: p.s, p: p.p }
    }
}

impl Params {
    pub fn new(n: usize, s: f64, p: f64) -> Result<Self> {
        check_nsp(n, s, p)?;
        Ok(Params {
            n,
            s,
            p,
            c: ln_norm_const(n, s, p).exp(),
            b: log_norm_unchecked(n, s, p),
            omega: sphere_measure(n),
        })
    }

    pub fn dim(&self) -> usize {
        self.n
    }
    pub fn s(&self) -> f64 {
        self.s
    }
    pub fn p(&self) -> f64 {
        self.p
    }
    /// C(N,s,p).
    pub fn c(&self) -> f64 {
        self.c
    }
    /// B(N,s,p).
    pub fn b(&self) -> f64 {
        self.b
    }
    /// ω_N.
    pub fn omega(&self) -> f64 {
        self.omega
    }
    /// s·p.
    pub fn sp(&self) -> f64 {
        self.s * self.p
    }
    /// N + s·p, the kernel's homogeneity exponent.
    pub fn order(&self) -> f64 {
        self.n as f64 + self.s * self.p
    }
    /// Critical exponent Np/(N − sp), defined when N > sp.
    pub fn p_star(&self) -> Option<f64> {
        let nf = self.n as f64;
        (nf > self.sp()).then(|| nf * self.p / (nf - self.sp()))
    }
    /// e^{−1/(sp)}: diameters below this make the log kernel positive on Ω×Ω.
    pub fn positivity_threshold(&self) -> f64 {
        (-1.0 / self.sp()).exp()
    }
    /// e^{B/p}: the radius where the full kernel changes sign.
    pub fn sign_change_radius(&self) -> f64 {
        (self.b / self.p).exp()
    }
    /// Same (N, p) at a different order s.
    pub fn with_s(&self, s: f64) -> Result<Self> {
        Params::new(self.n, s, self.p)
    }
}
