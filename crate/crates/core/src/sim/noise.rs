//! Zero-mean noise laws with closed-form cumulants.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::{ChiSquared, Distribution, Exp, Gamma, StudentT, Uniform};
use serde::{Deserialize, Serialize};

use crate::cumulant::MAX_ORDER;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// A noise distribution shifted to mean zero. Student-t is additionally
/// scaled to unit variance.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "law", rename_all = "snake_case")]
pub enum NoiseLaw {
    Uniform { low: f64, high: f64 },
    Gamma { shape: f64, rate: f64 },
    ChiSquared { df: f64 },
    Exponential { rate: f64 },
    StudentT { df: f64 },
}

impl NoiseLaw {
    pub const UNIFORM_10: NoiseLaw = NoiseLaw::Uniform { low: -10.0, high: 10.0 };
    pub const UNIFORM_5: NoiseLaw = NoiseLaw::Uniform { low: -5.0, high: 5.0 };
    pub const STUDENT_T_10: NoiseLaw = NoiseLaw::StudentT { df: 10.0 };
    pub const GAMMA_2_4: NoiseLaw = NoiseLaw::Gamma { shape: 2.0, rate: 4.0 };
    pub const CHI_SQUARED_2: NoiseLaw = NoiseLaw::ChiSquared { df: 2.0 };
    pub const EXPONENTIAL_1: NoiseLaw = NoiseLaw::Exponential { rate: 1.0 };

    /// The four laws of the random-graph experiments.
    pub const EXPERIMENT_LAWS: [NoiseLaw; 4] = [
        NoiseLaw::UNIFORM_10,
        NoiseLaw::STUDENT_T_10,
        NoiseLaw::GAMMA_2_4,
        NoiseLaw::CHI_SQUARED_2,
    ];

    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::InvalidParameter(format!("{self}: {what}")));
        let finite_pos = |x: f64| x.is_finite() && x > 0.0;
        match *self {
            NoiseLaw::Uniform { low, high } => {
                if !(low.is_finite() && high.is_finite() && low < high) {
                    return bad("need finite low < high");
                }
            }
            NoiseLaw::Gamma { shape, rate } => {
                if !(finite_pos(shape) && finite_pos(rate)) {
                    return bad("shape and rate must be positive");
                }
            }
            NoiseLaw::ChiSquared { df } => {
                if !finite_pos(df) {
                    return bad("df must be positive");
                }
            }
            NoiseLaw::Exponential { rate } => {
                if !finite_pos(rate) {
                    return bad("rate must be positive");
                }
            }
            NoiseLaw::StudentT { df } => {
                if !(df.is_finite() && df > 2.0) {
                    return bad("df must exceed 2 for unit-variance scaling");
                }
            }
        }
        Ok(())
    }

    /// Mean of the unshifted law.
    fn raw_mean(&self) -> f64 {
        match *self {
            NoiseLaw::Uniform { low, high } => 0.5 * (low + high),
            NoiseLaw::Gamma { shape, rate } => shape / rate,
            NoiseLaw::ChiSquared { df } => df,
            NoiseLaw::Exponential { rate } => 1.0 / rate,
            NoiseLaw::StudentT { .. } => 0.0,
        }
    }

    pub fn sampler(&self) -> Result<NoiseSampler> {
        self.validate()?;
        let invalid = |e: &dyn fmt::Display| Error::InvalidParameter(format!("{self}: {e}"));
        let kind = match *self {
            NoiseLaw::Uniform { low, high } => {
                SamplerKind::Uniform(Uniform::new(low, high).map_err(|e| invalid(&e))?)
            }
            NoiseLaw::Gamma { shape, rate } => {
                SamplerKind::Gamma(Gamma::new(shape, 1.0 / rate).map_err(|e| invalid(&e))?)
            }
            NoiseLaw::ChiSquared { df } => {
                SamplerKind::ChiSquared(ChiSquared::new(df).map_err(|e| invalid(&e))?)
            }
            NoiseLaw::Exponential { rate } => {
                SamplerKind::Exp(Exp::new(rate).map_err(|e| invalid(&e))?)
            }
            NoiseLaw::StudentT { df } => {
                SamplerKind::StudentT(StudentT::new(df).map_err(|e| invalid(&e))?)
            }
        };
        let scale = match *self {
            NoiseLaw::StudentT { df } => ((df - 2.0) / df).sqrt(),
            _ => 1.0,
        };
        Ok(NoiseSampler {
            kind,
            shift: self.raw_mean(),
            scale,
        })
    }

    /// Cumulant of order `k` of the shifted (and for Student-t, scaled) law.
    pub fn cumulant<T: Scalar>(&self, k: usize) -> Result<T> {
        self.validate()?;
        if k == 0 || k > MAX_ORDER {
            return Err(Error::UnsupportedOrder { order: k, max: MAX_ORDER });
        }
        if k == 1 {
            return Ok(T::zero());
        }
        let fact = |m: usize| T::from_int((1..=m as i64).product::<i64>());
        let pow = |x: T, m: usize| (0..m).fold(T::one(), |acc, _| acc * x.clone());
        Ok(match *self {
            NoiseLaw::Uniform { low, high } => {
                if k % 2 == 1 {
                    return Ok(T::zero());
                }
                // kappa_k = B_k (b - a)^k / k with Bernoulli numbers B_k
                let (num, den) = match k {
                    2 => (1, 6),
                    4 => (-1, 30),
                    6 => (1, 42),
                    8 => (-1, 30),
                    _ => unreachable!("order bounded by MAX_ORDER"),
                };
                let width = T::from_param(high) - T::from_param(low);
                T::from_int(num) * pow(width, k) / (T::from_int(den) * T::from_int(k as i64))
            }
            NoiseLaw::Gamma { shape, rate } => {
                T::from_param(shape) * fact(k - 1) / pow(T::from_param(rate), k)
            }
            NoiseLaw::ChiSquared { df } => {
                pow(T::from_int(2), k - 1) * fact(k - 1) * T::from_param(df)
            }
            NoiseLaw::Exponential { rate } => fact(k - 1) / pow(T::from_param(rate), k),
            NoiseLaw::StudentT { df } => {
                if (k as f64) >= df {
                    return Err(Error::UnknownCumulant {
                        law: self.to_string(),
                        order: k,
                    });
                }
                if k % 2 == 1 {
                    return Ok(T::zero());
                }
                // unit-variance moments: m_2j = (df - 2)^j * prod_{i<=j} (2i - 1) / (df - 2i)
                let nu = T::from_param(df);
                let mut moments = vec![T::one(), T::zero()];
                let mut even = T::one();
                for m in 2..=k {
                    if m % 2 == 0 {
                        let i = (m / 2) as i64;
                        even = even * (nu.clone() - T::from_int(2))
                            * T::from_int(2 * i - 1)
                            / (nu.clone() - T::from_int(2 * i));
                        moments.push(even.clone());
                    } else {
                        moments.push(T::zero());
                    }
                }
                univariate_cumulant(&moments, k)
            }
        })
    }

    pub fn variance(&self) -> f64 {
        self.cumulant::<f64>(2).unwrap_or(f64::NAN)
    }
}

/// `kappa_n = m_n - sum_{i=1}^{n-1} C(n-1, i-1) kappa_i m_{n-i}` on raw
/// moments `m_0 = 1, m_1, ..., m_k`.
fn univariate_cumulant<T: Scalar>(moments: &[T], k: usize) -> T {
    let mut kappa: Vec<T> = vec![T::zero(); k + 1];
    for n in 1..=k {
        let mut acc = moments[n].clone();
        let mut binom: i64 = 1;
        for i in 1..n {
            acc = acc - T::from_int(binom) * kappa[i].clone() * moments[n - i].clone();
            binom = binom * (n - 1 - i + 1) as i64 / i as i64;
        }
        kappa[n] = acc;
    }
    kappa[k].clone()
}

impl fmt::Display for NoiseLaw {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            NoiseLaw::Uniform { low, high } => write!(f, "uniform({low},{high})"),
            NoiseLaw::Gamma { shape, rate } => write!(f, "gamma({shape},{rate})"),
            NoiseLaw::ChiSquared { df } => write!(f, "chisq({df})"),
            NoiseLaw::Exponential { rate } => write!(f, "exp({rate})"),
            NoiseLaw::StudentT { df } => write!(f, "t({df})"),
        }
    }
}

/// Accepts the `Display` form (`uniform(-10,10)`, `gamma(2,4)`, `chisq(2)`,
/// `exp(1)`, `t(10)`) and the shorthands `unif10`, `unif5`, `t10`, `gamma`,
/// `chisq`, `exp`.
impl FromStr for NoiseLaw {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase();
        let law = match s.as_str() {
            "unif10" | "uniform" => NoiseLaw::UNIFORM_10,
            "unif5" => NoiseLaw::UNIFORM_5,
            "t10" | "t" | "student-t" => NoiseLaw::STUDENT_T_10,
            "gamma" => NoiseLaw::GAMMA_2_4,
            "chisq" | "chi-squared" => NoiseLaw::CHI_SQUARED_2,
            "exp" | "exponential" => NoiseLaw::EXPONENTIAL_1,
            _ => {
                let (name, rest) = s
                    .split_once('(')
                    .ok_or_else(|| Error::InvalidParameter(format!("unknown noise law `{s}`")))?;
                let args: Vec<f64> = rest
                    .strip_suffix(')')
                    .ok_or_else(|| Error::InvalidParameter(format!("unbalanced `{s}`")))?
                    .split(',')
                    .map(|a| {
                        a.trim()
                            .parse::<f64>()
                            .map_err(|e| Error::InvalidParameter(format!("`{s}`: {e}")))
                    })
                    .collect::<Result<_>>()?;
                match (name, args.as_slice()) {
                    ("uniform" | "unif", &[low, high]) => NoiseLaw::Uniform { low, high },
                    ("gamma", &[shape, rate]) => NoiseLaw::Gamma { shape, rate },
                    ("chisq" | "chi-squared", &[df]) => NoiseLaw::ChiSquared { df },
                    ("exp" | "exponential", &[rate]) => NoiseLaw::Exponential { rate },
                    ("t" | "student-t", &[df]) => NoiseLaw::StudentT { df },
                    _ => {
                        return Err(Error::InvalidParameter(format!("unknown noise law `{s}`")))
                    }
                }
            }
        };
        law.validate()?;
        Ok(law)
    }
}

#[derive(Clone, Debug)]
enum SamplerKind {
    Uniform(Uniform<f64>),
    Gamma(Gamma<f64>),
    ChiSquared(ChiSquared<f64>),
    Exp(Exp<f64>),
    StudentT(StudentT<f64>),
}

/// Draws from a [`NoiseLaw`], already centered and scaled.
#[derive(Clone, Debug)]
pub struct NoiseSampler {
    kind: SamplerKind,
    shift: f64,
    scale: f64,
}

impl NoiseSampler {
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let raw = match &self.kind {
            SamplerKind::Uniform(d) => d.sample(rng),
            SamplerKind::Gamma(d) => d.sample(rng),
            SamplerKind::ChiSquared(d) => d.sample(rng),
            SamplerKind::Exp(d) => d.sample(rng),
            SamplerKind::StudentT(d) => d.sample(rng),
        };
        (raw - self.shift) * self.scale
    }
}
