use num_complex::Complex64;
use serde::Serialize;

use crate::numerics::NeumaierSum;

use super::zeros::ZeroSet;
use super::EntireError;

/// A real number stored as sign and log-magnitude. Zero is `sign = 0`,
/// `log_abs = -inf`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SignedLog {
    pub sign: i8,
    pub log_abs: f64,
}

impl SignedLog {
    pub const ZERO: SignedLog = SignedLog {
        sign: 0,
        log_abs: f64::NEG_INFINITY,
    };

    pub fn from_value(v: f64) -> Self {
        if v == 0.0 {
            Self::ZERO
        } else {
            SignedLog {
                sign: if v > 0.0 { 1 } else { -1 },
                log_abs: v.abs().ln(),
            }
        }
    }

    /// The represented value; overflows to `±inf` when out of range.
    pub fn value(&self) -> f64 {
        if self.sign == 0 {
            0.0
        } else {
            f64::from(self.sign) * self.log_abs.exp()
        }
    }

    pub fn abs(&self) -> f64 {
        if self.sign == 0 {
            0.0
        } else {
            self.log_abs.exp()
        }
    }
}

/// `log|1 - q|` without cancellation for small `q`.
fn log_abs_one_minus(q: f64) -> f64 {
    if q.abs() < 0.5 {
        (-q).ln_1p()
    } else {
        (1.0 - q).abs().ln()
    }
}

/// `log|1 - q|` for complex `q`.
fn log_abs_one_minus_complex(q: Complex64) -> f64 {
    let n2 = q.norm_sqr();
    if n2 < 0.25 {
        0.5 * (n2 - 2.0 * q.re).ln_1p()
    } else {
        (Complex64::new(1.0, 0.0) - q).norm().ln()
    }
}

/// `B(z) = a0 * prod (1 - z/λ)` over a finite zero set.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EntireProduct {
    zeros: ZeroSet,
    a0: f64,
}

impl EntireProduct {
    pub fn new(zeros: ZeroSet, a0: f64) -> Result<Self, EntireError> {
        if !(a0.is_finite() && a0 != 0.0) {
            return Err(EntireError::InvalidA0(a0));
        }
        Ok(EntireProduct { zeros, a0 })
    }

    pub fn zero_set(&self) -> &ZeroSet {
        &self.zeros
    }

    pub fn zeros(&self) -> &[f64] {
        self.zeros.zeros()
    }

    pub fn a0(&self) -> f64 {
        self.a0
    }

    pub fn with_a0(&self, a0: f64) -> Result<Self, EntireError> {
        Self::new(self.zeros.clone(), a0)
    }

    /// `B(x)` for real `x` in sign/log form; exactly zero at a zero.
    pub fn eval(&self, x: f64) -> SignedLog {
        self.eval_skipping(x, None)
    }

    fn eval_skipping(&self, x: f64, skip: Option<usize>) -> SignedLog {
        let mut log = NeumaierSum::new();
        log.add(self.a0.abs().ln());
        let mut negative = self.a0 < 0.0;
        for (i, &lambda) in self.zeros().iter().enumerate() {
            if Some(i) == skip {
                continue;
            }
            if x == lambda {
                return SignedLog::ZERO;
            }
            let q = x / lambda;
            if q > 1.0 {
                negative = !negative;
            }
            log.add(log_abs_one_minus(q));
        }
        SignedLog {
            sign: if negative { -1 } else { 1 },
            log_abs: log.value(),
        }
    }

    /// `B'(λ) = -(a0/λ) prod_{μ ≠ λ} (1 - λ/μ)` at a zero `λ`.
    pub fn derivative_at_zero(&self, lambda: f64) -> Result<SignedLog, EntireError> {
        let i = self
            .zeros
            .index_of(lambda)
            .ok_or(EntireError::NotAZero(lambda))?;
        Ok(self.derivative_at_index(i))
    }

    pub fn derivative_at_index(&self, i: usize) -> SignedLog {
        let lambda = self.zeros()[i];
        let rest = self.eval_skipping(lambda, Some(i));
        let sign = -rest.sign * if lambda > 0.0 { 1 } else { -1 };
        SignedLog {
            sign,
            log_abs: rest.log_abs - lambda.abs().ln(),
        }
    }

    /// `B(z)/(z - λ_i) = -(a0/λ_i) prod_{μ ≠ λ_i} (1 - z/μ)`, as
    /// `(log|.|, arg)`.
    pub fn quotient_log(&self, z: Complex64, i: usize) -> (f64, f64) {
        let lambda = self.zeros()[i];
        let (log_abs, arg) = self.eval_complex_skipping(z, Some(i));
        let factor = -self.a0 / lambda;
        let arg = arg
            + if factor < 0.0 {
                std::f64::consts::PI
            } else {
                0.0
            };
        (log_abs + (1.0 / lambda.abs()).ln(), arg)
    }

    /// `B(z)` for complex `z` as `(log|B(z)|, arg B(z))`.
    pub fn eval_complex_log(&self, z: Complex64) -> (f64, f64) {
        self.eval_complex_skipping(z, None)
    }

    fn eval_complex_skipping(&self, z: Complex64, skip: Option<usize>) -> (f64, f64) {
        let mut log = NeumaierSum::new();
        log.add(self.a0.abs().ln());
        let mut arg = if self.a0 < 0.0 {
            std::f64::consts::PI
        } else {
            0.0
        };
        for (i, &lambda) in self.zeros().iter().enumerate() {
            if Some(i) == skip {
                continue;
            }
            let factor = Complex64::new(1.0, 0.0) - z / lambda;
            if factor == Complex64::new(0.0, 0.0) {
                return (f64::NEG_INFINITY, 0.0);
            }
            log.add(log_abs_one_minus_complex(z / lambda));
            arg += factor.arg();
        }
        (log.value(), arg)
    }

    /// `B(z)` as a complex number (may overflow for large products).
    pub fn eval_complex(&self, z: Complex64) -> Complex64 {
        let (l, a) = self.eval_complex_log(z);
        Complex64::from_polar(l.exp(), a)
    }

    /// `Θ = Σ 1/|B'(λ)|` with the largest term and the term at the largest
    /// `|λ|` (a tail indicator for truncated zero sets).
    pub fn theta(&self) -> Theta {
        let mut sum = NeumaierSum::new();
        let mut largest: f64 = 0.0;
        let mut tail = 0.0;
        for i in self.zeros.order_by_modulus() {
            let term = (-self.derivative_at_index(i).log_abs).exp();
            sum.add(term);
            largest = largest.max(term);
            tail = term;
        }
        Theta {
            value: sum.value(),
            largest_term: largest,
            tail_indicator: tail,
        }
    }

    /// `(r, log M(r) / r)` where `M(r)` is the largest `|B|` over
    /// `circle_samples` equally spaced points of the circle `|z| = r`.
    pub fn type_estimate(
        &self,
        radii: &[f64],
        circle_samples: usize,
    ) -> Result<Vec<(f64, f64)>, EntireError> {
        if radii.iter().any(|r| !(r.is_finite() && *r > 0.0))
            || radii.windows(2).any(|w| w[1] <= w[0])
        {
            return Err(EntireError::Precondition(
                "radii must be positive and increasing".to_string(),
            ));
        }
        Ok(radii
            .iter()
            .map(|&r| (r, self.max_log_on_circle(r, circle_samples) / r))
            .collect())
    }

    /// `max log|B(z)|` over `samples` equally spaced points of `|z| = r`.
    pub fn max_log_on_circle(&self, r: f64, samples: usize) -> f64 {
        let samples = samples.max(4);
        (0..samples)
            .map(|k| {
                let theta = std::f64::consts::TAU * k as f64 / samples as f64;
                self.eval_complex_log(Complex64::from_polar(r, theta)).0
            })
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Theta {
    pub value: f64,
    pub largest_term: f64,
    pub tail_indicator: f64,
}
