//! Sampling distributions for the path-loss exponent.
//!
//! The GEV uses the shape/scale/location convention in which a negative shape
//! gives a finite upper endpoint `location - scale / shape`. The Beta family is
//! the four-parameter form, affinely mapped onto `[lower, upper]`.

use rand::distr::{Distribution, Open01};
use rand::Rng;
use serde::{Deserialize, Serialize};
use statrs::function::beta::{beta_reg, inv_beta_reg, ln_beta};
use statrs::function::gamma::gamma;

use super::ModelError;

/// Shapes smaller than this are treated as the Gumbel limit.
const GUMBEL_SHAPE_EPS: f64 = 1e-12;
const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

fn check_finite(what: &'static str, value: f64) -> Result<(), ModelError> {
    if value.is_finite() {
        Ok(())
    } else {
        Err(ModelError::InvalidParameter { what, value })
    }
}

fn check_probability(p: f64) -> Result<(), ModelError> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(ModelError::InvalidProbability(p))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GevParams {
    pub shape: f64,
    pub scale: f64,
    pub location: f64,
}

/// Generalized extreme value distribution `GEV(k, s, m)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GevParams")]
pub struct Gev {
    shape: f64,
    scale: f64,
    location: f64,
}

impl TryFrom<GevParams> for Gev {
    type Error = ModelError;

    fn try_from(p: GevParams) -> Result<Self, Self::Error> {
        Gev::new(p.shape, p.scale, p.location)
    }
}

impl Gev {
    pub fn new(shape: f64, scale: f64, location: f64) -> Result<Self, ModelError> {
        check_finite("gev shape", shape)?;
        check_finite("gev location", location)?;
        if !(scale.is_finite() && scale > 0.0) {
            return Err(ModelError::InvalidParameter { what: "gev scale", value: scale });
        }
        Ok(Self { shape, scale, location })
    }

    pub fn shape(&self) -> f64 {
        self.shape
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn location(&self) -> f64 {
        self.location
    }

    fn is_gumbel(&self) -> bool {
        self.shape.abs() < GUMBEL_SHAPE_EPS
    }

    /// Closed support `(lower, upper)`; infinite ends where unbounded.
    pub fn support(&self) -> (f64, f64) {
        if self.is_gumbel() {
            (f64::NEG_INFINITY, f64::INFINITY)
        } else {
            let endpoint = self.location - self.scale / self.shape;
            if self.shape < 0.0 {
                (f64::NEG_INFINITY, endpoint)
            } else {
                (endpoint, f64::INFINITY)
            }
        }
    }

    /// `t(x)` such that `cdf(x) = exp(-t)`; `None` outside the support.
    fn t(&self, x: f64) -> Option<f64> {
        let z = (x - self.location) / self.scale;
        if self.is_gumbel() {
            return Some((-z).exp());
        }
        let base = 1.0 + self.shape * z;
        if base <= 0.0 {
            None
        } else {
            Some(base.powf(-1.0 / self.shape))
        }
    }

    pub fn ln_pdf(&self, x: f64) -> f64 {
        match self.t(x) {
            // ln f = -ln s + (k + 1) ln t - t
            Some(t) if t > 0.0 && t.is_finite() => -self.scale.ln() + (self.shape + 1.0) * t.ln() - t,
            _ => f64::NEG_INFINITY,
        }
    }

    pub fn pdf(&self, x: f64) -> f64 {
        self.ln_pdf(x).exp()
    }

    pub fn cdf(&self, x: f64) -> f64 {
        match self.t(x) {
            Some(t) => (-t).exp(),
            None => {
                if self.shape < 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }

    pub fn quantile(&self, p: f64) -> Result<f64, ModelError> {
        check_probability(p)?;
        let (lo, hi) = self.support();
        if p == 0.0 {
            return Ok(lo);
        }
        if p == 1.0 {
            return Ok(hi);
        }
        let y = -p.ln();
        Ok(if self.is_gumbel() {
            self.location - self.scale * y.ln()
        } else {
            self.location + self.scale * (y.powf(-self.shape) - 1.0) / self.shape
        })
    }

    pub fn mean(&self) -> f64 {
        if self.is_gumbel() {
            self.location + self.scale * EULER_GAMMA
        } else if self.shape < 1.0 {
            self.location + self.scale * (gamma(1.0 - self.shape) - 1.0) / self.shape
        } else {
            f64::INFINITY
        }
    }

    pub fn variance(&self) -> f64 {
        if self.is_gumbel() {
            self.scale * self.scale * std::f64::consts::PI.powi(2) / 6.0
        } else if self.shape < 0.5 {
            let g1 = gamma(1.0 - self.shape);
            let g2 = gamma(1.0 - 2.0 * self.shape);
            self.scale * self.scale * (g2 - g1 * g1) / (self.shape * self.shape)
        } else {
            f64::INFINITY
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let u: f64 = Open01.sample(rng);
        let y = -u.ln();
        if self.is_gumbel() {
            self.location - self.scale * y.ln()
        } else {
            self.location + self.scale * (y.powf(-self.shape) - 1.0) / self.shape
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScaledBetaParams {
    pub alpha1: f64,
    pub alpha2: f64,
    pub lower: f64,
    pub upper: f64,
}

/// Beta distribution mapped affinely onto `[lower, upper]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ScaledBetaParams")]
pub struct ScaledBeta {
    alpha1: f64,
    alpha2: f64,
    lower: f64,
    upper: f64,
}

impl TryFrom<ScaledBetaParams> for ScaledBeta {
    type Error = ModelError;

    fn try_from(p: ScaledBetaParams) -> Result<Self, Self::Error> {
        ScaledBeta::new(p.alpha1, p.alpha2, p.lower, p.upper)
    }
}

impl ScaledBeta {
    pub fn new(alpha1: f64, alpha2: f64, lower: f64, upper: f64) -> Result<Self, ModelError> {
        for (what, value) in [("beta alpha1", alpha1), ("beta alpha2", alpha2)] {
            if !(value.is_finite() && value > 0.0) {
                return Err(ModelError::InvalidParameter { what, value });
            }
        }
        check_finite("beta lower", lower)?;
        check_finite("beta upper", upper)?;
        if lower >= upper {
            return Err(ModelError::InvalidSupport { lower, upper });
        }
        Ok(Self { alpha1, alpha2, lower, upper })
    }

    pub fn alpha1(&self) -> f64 {
        self.alpha1
    }

    pub fn alpha2(&self) -> f64 {
        self.alpha2
    }

    pub fn lower(&self) -> f64 {
        self.lower
    }

    pub fn upper(&self) -> f64 {
        self.upper
    }

    fn width(&self) -> f64 {
        self.upper - self.lower
    }

    /// Maps `x` onto the unit interval.
    pub fn standardize(&self, x: f64) -> f64 {
        (x - self.lower) / self.width()
    }

    pub fn ln_pdf(&self, x: f64) -> f64 {
        let u = self.standardize(x);
        if !(0.0..=1.0).contains(&u) {
            return f64::NEG_INFINITY;
        }
        unit_beta_ln_pdf(self.alpha1, self.alpha2, u) - self.width().ln()
    }

    pub fn pdf(&self, x: f64) -> f64 {
        self.ln_pdf(x).exp()
    }

    pub fn cdf(&self, x: f64) -> f64 {
        let u = self.standardize(x);
        if u <= 0.0 {
            0.0
        } else if u >= 1.0 {
            1.0
        } else {
            beta_reg(self.alpha1, self.alpha2, u)
        }
    }

    pub fn quantile(&self, p: f64) -> Result<f64, ModelError> {
        check_probability(p)?;
        if p == 0.0 {
            return Ok(self.lower);
        }
        if p == 1.0 {
            return Ok(self.upper);
        }
        let mut u = inv_beta_reg(self.alpha1, self.alpha2, p).clamp(0.0, 1.0);
        // Newton polish on the regularized incomplete beta.
        for _ in 0..8 {
            let err = beta_reg(self.alpha1, self.alpha2, u) - p;
            if err.abs() < 1e-15 {
                break;
            }
            let density = unit_beta_ln_pdf(self.alpha1, self.alpha2, u).exp();
            if !(density.is_finite() && density > 0.0) {
                break;
            }
            let next = u - err / density;
            if !(0.0..=1.0).contains(&next) {
                break;
            }
            u = next;
        }
        Ok(self.lower + self.width() * u)
    }

    pub fn mean(&self) -> f64 {
        self.lower + self.width() * self.alpha1 / (self.alpha1 + self.alpha2)
    }

    pub fn variance(&self) -> f64 {
        let s = self.alpha1 + self.alpha2;
        self.width().powi(2) * self.alpha1 * self.alpha2 / (s * s * (s + 1.0))
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        // Shapes were validated at construction.
        let unit = rand_distr::Beta::new(self.alpha1, self.alpha2).expect("validated beta shapes").sample(rng);
        self.lower + self.width() * unit
    }
}

/// Log-density of the standard Beta on `[0, 1]`.
fn unit_beta_ln_pdf(alpha1: f64, alpha2: f64, u: f64) -> f64 {
    let a = if alpha1 == 1.0 { 0.0 } else { (alpha1 - 1.0) * u.ln() };
    let b = if alpha2 == 1.0 { 0.0 } else { (alpha2 - 1.0) * (-u).ln_1p() };
    a + b - ln_beta(alpha1, alpha2)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UniformParams {
    pub lo: f64,
    pub hi: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "UniformParams")]
pub struct UniformRange {
    lo: f64,
    hi: f64,
}

impl TryFrom<UniformParams> for UniformRange {
    type Error = ModelError;

    fn try_from(p: UniformParams) -> Result<Self, Self::Error> {
        UniformRange::new(p.lo, p.hi)
    }
}

impl UniformRange {
    pub fn new(lo: f64, hi: f64) -> Result<Self, ModelError> {
        check_finite("uniform lo", lo)?;
        check_finite("uniform hi", hi)?;
        if lo >= hi {
            return Err(ModelError::InvalidSupport { lower: lo, upper: hi });
        }
        Ok(Self { lo, hi })
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }
}

/// Statistical model of the path-loss exponent within one distance band.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PleDistribution {
    Gev(Gev),
    ScaledBeta(ScaledBeta),
    Uniform(UniformRange),
    Fixed { value: f64 },
}

impl PleDistribution {
    pub fn gev(shape: f64, scale: f64, location: f64) -> Result<Self, ModelError> {
        Gev::new(shape, scale, location).map(Self::Gev)
    }

    pub fn scaled_beta(alpha1: f64, alpha2: f64, lower: f64, upper: f64) -> Result<Self, ModelError> {
        ScaledBeta::new(alpha1, alpha2, lower, upper).map(Self::ScaledBeta)
    }

    pub fn uniform(lo: f64, hi: f64) -> Result<Self, ModelError> {
        UniformRange::new(lo, hi).map(Self::Uniform)
    }

    pub fn fixed(value: f64) -> Result<Self, ModelError> {
        check_finite("fixed exponent", value)?;
        Ok(Self::Fixed { value })
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            Self::Gev(_) => "GEV",
            Self::ScaledBeta(_) => "Beta",
            Self::Uniform(_) => "Uniform",
            Self::Fixed { .. } => "Fixed",
        }
    }

    pub fn support(&self) -> (f64, f64) {
        match self {
            Self::Gev(g) => g.support(),
            Self::ScaledBeta(b) => (b.lower, b.upper),
            Self::Uniform(u) => (u.lo, u.hi),
            Self::Fixed { value } => (*value, *value),
        }
    }

    /// Log-density. A fixed value has no density; it reports `+inf` at the
    /// atom and `-inf` elsewhere.
    pub fn ln_pdf(&self, x: f64) -> f64 {
        match self {
            Self::Gev(g) => g.ln_pdf(x),
            Self::ScaledBeta(b) => b.ln_pdf(x),
            Self::Uniform(u) => {
                if (u.lo..=u.hi).contains(&x) {
                    -(u.hi - u.lo).ln()
                } else {
                    f64::NEG_INFINITY
                }
            }
            Self::Fixed { value } => {
                if x == *value {
                    f64::INFINITY
                } else {
                    f64::NEG_INFINITY
                }
            }
        }
    }

    pub fn pdf(&self, x: f64) -> f64 {
        self.ln_pdf(x).exp()
    }

    pub fn cdf(&self, x: f64) -> f64 {
        match self {
            Self::Gev(g) => g.cdf(x),
            Self::ScaledBeta(b) => b.cdf(x),
            Self::Uniform(u) => ((x - u.lo) / (u.hi - u.lo)).clamp(0.0, 1.0),
            Self::Fixed { value } => {
                if x >= *value {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }

    pub fn quantile(&self, p: f64) -> Result<f64, ModelError> {
        match self {
            Self::Gev(g) => g.quantile(p),
            Self::ScaledBeta(b) => b.quantile(p),
            Self::Uniform(u) => {
                check_probability(p)?;
                Ok(u.lo + p * (u.hi - u.lo))
            }
            Self::Fixed { value } => {
                check_probability(p)?;
                Ok(*value)
            }
        }
    }

    pub fn mean(&self) -> f64 {
        match self {
            Self::Gev(g) => g.mean(),
            Self::ScaledBeta(b) => b.mean(),
            Self::Uniform(u) => 0.5 * (u.lo + u.hi),
            Self::Fixed { value } => *value,
        }
    }

    pub fn variance(&self) -> f64 {
        match self {
            Self::Gev(g) => g.variance(),
            Self::ScaledBeta(b) => b.variance(),
            Self::Uniform(u) => (u.hi - u.lo).powi(2) / 12.0,
            Self::Fixed { .. } => 0.0,
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            Self::Gev(g) => g.sample(rng),
            Self::ScaledBeta(b) => b.sample(rng),
            Self::Uniform(u) => u.lo + (u.hi - u.lo) * rng.random::<f64>(),
            Self::Fixed { value } => *value,
        }
    }

    /// Sum of log-densities over `data`.
    pub fn log_likelihood(&self, data: &[f64]) -> f64 {
        data.iter().map(|&x| self.ln_pdf(x)).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn near_2600() -> Gev {
        Gev::new(-0.23, 0.93, 2.6).unwrap()
    }

    #[test]
    fn gev_cdf_at_location_is_inverse_e() {
        for shape in [-0.31, -0.23, 0.2] {
            let g = Gev::new(shape, 0.5, 2.7).unwrap();
            assert!((g.cdf(2.7) - (-1.0f64).exp()).abs() < 1e-15);
        }
        let gumbel = Gev::new(0.0, 0.5, 2.7).unwrap();
        assert!((gumbel.cdf(2.7) - (-1.0f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn gev_negative_shape_has_finite_upper_endpoint() {
        let g = near_2600();
        let (_, upper) = g.support();
        assert!((upper - 6.643_478_260_869_565).abs() < 1e-12);
        assert_eq!(g.cdf(upper + 1e-9), 1.0);
        assert_eq!(g.pdf(upper + 0.1), 0.0);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..100_000 {
            assert!(g.sample(&mut rng) < upper);
        }
    }

    #[test]
    fn gev_rejects_bad_scale() {
        assert!(Gev::new(-0.2, 0.0, 1.0).is_err());
        assert!(Gev::new(-0.2, -1.0, 1.0).is_err());
        assert!(Gev::new(f64::NAN, 1.0, 1.0).is_err());
    }

    #[test]
    fn gev_moments_match_extended_precision_values() {
        // Γ-function moments evaluated at 30 digits.
        let near_1800 = Gev::new(-0.31, 0.42, 2.7).unwrap();
        assert!((near_1800.mean() - 2.840_897_566_992_499).abs() < 1e-12);
        assert!((near_1800.variance() - 0.170_893_573_550_775_8).abs() < 1e-12);
        let near_2600 = near_2600();
        assert!((near_2600.mean() - 2.960_860_798_146_83).abs() < 1e-12);
        assert!((near_2600.variance() - 0.917_708_407_259_142_7).abs() < 1e-12);
    }

    #[test]
    fn beta_cdf_endpoints_and_symmetry() {
        let b = ScaledBeta::new(3.0, 3.4, 2.2, 3.2).unwrap();
        assert_eq!(b.cdf(2.2), 0.0);
        assert_eq!(b.cdf(3.2), 1.0);
        let sym = ScaledBeta::new(4.0, 4.0, -1.0, 3.0).unwrap();
        for dx in [0.1, 0.5, 1.3, 1.9] {
            assert!((sym.pdf(1.0 - dx) - sym.pdf(1.0 + dx)).abs() < 1e-13);
        }
        assert!((sym.cdf(1.0) - 0.5).abs() < 1e-13);
    }

    #[test]
    fn beta_rejects_bad_parameters() {
        assert!(ScaledBeta::new(0.0, 1.0, 0.0, 1.0).is_err());
        assert!(ScaledBeta::new(1.0, -2.0, 0.0, 1.0).is_err());
        assert!(ScaledBeta::new(1.0, 2.0, 1.0, 1.0).is_err());
        assert!(ScaledBeta::new(1.0, 2.0, 2.0, 1.0).is_err());
    }

    #[test]
    fn beta_samples_stay_in_support() {
        let b = ScaledBeta::new(21.0, 18.0, 0.0, 5.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..50_000 {
            let x = b.sample(&mut rng);
            assert!((0.0..=5.0).contains(&x));
        }
        assert!((b.mean() - 5.0 * 21.0 / 39.0).abs() < 1e-15);
    }

    #[test]
    fn cdf_of_quantile_round_trips() {
        let models = [
            PleDistribution::gev(-0.31, 0.42, 2.7).unwrap(),
            PleDistribution::gev(-0.23, 0.93, 2.6).unwrap(),
            PleDistribution::gev(0.0, 1.0, 0.0).unwrap(),
            PleDistribution::scaled_beta(3.0, 3.4, 2.2, 3.2).unwrap(),
            PleDistribution::scaled_beta(21.0, 18.0, 0.0, 5.0).unwrap(),
            PleDistribution::scaled_beta(0.7, 0.5, -1.0, 1.0).unwrap(),
            PleDistribution::uniform(1.0, 4.0).unwrap(),
        ];
        for m in &models {
            for p in [0.01, 0.5, 0.99] {
                let q = m.quantile(p).unwrap();
                assert!((m.cdf(q) - p).abs() < 1e-9, "{m:?} p={p}");
            }
        }
    }

    #[test]
    fn quantile_rejects_out_of_range_probability() {
        let m = PleDistribution::gev(-0.3, 1.0, 0.0).unwrap();
        assert!(m.quantile(1.5).is_err());
        assert!(m.quantile(-0.1).is_err());
    }

    #[test]
    fn fixed_is_a_point_mass() {
        let m = PleDistribution::fixed(2.0).unwrap();
        assert_eq!(m.cdf(1.999), 0.0);
        assert_eq!(m.cdf(2.0), 1.0);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert_eq!(m.sample(&mut rng), 2.0);
    }

    #[test]
    fn serde_validates_parameters() {
        let ok: PleDistribution =
            serde_json::from_str(r#"{"kind":"gev","shape":-0.23,"scale":0.93,"location":2.6}"#).unwrap();
        assert_eq!(ok, PleDistribution::gev(-0.23, 0.93, 2.6).unwrap());
        let bad = serde_json::from_str::<PleDistribution>(
            r#"{"kind":"scaled_beta","alpha1":1.0,"alpha2":1.0,"lower":5.0,"upper":0.0}"#,
        );
        assert!(bad.is_err());
        let json = serde_json::to_string(&ok).unwrap();
        assert_eq!(serde_json::from_str::<PleDistribution>(&json).unwrap(), ok);
    }
}
