//! Small numeric toolbox, generic over the float type.

use num_traits::Float;

/// Streaming mean/variance (Welford).
#[derive(Debug, Clone, Copy)]
pub struct MeanVar<F: Float> {
    n: u64,
    mean: F,
    m2: F,
}

impl<F: Float> Default for MeanVar<F> {
    fn default() -> Self {
        Self { n: 0, mean: F::zero(), m2: F::zero() }
    }
}

impl<F: Float> MeanVar<F> {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, x: F) {
        self.n += 1;
        let d = x - self.mean;
        self.mean = self.mean + d / F::from(self.n).unwrap();
        self.m2 = self.m2 + d * (x - self.mean);
    }

    pub fn count(&self) -> u64 {
        self.n
    }

    pub fn mean(&self) -> F {
        self.mean
    }

    /// Sample variance (n−1 denominator); zero for fewer than two samples.
    pub fn var(&self) -> F {
        if self.n < 2 {
            F::zero()
        } else {
            self.m2 / F::from(self.n - 1).unwrap()
        }
    }

    /// Standard error of the mean.
    pub fn sem(&self) -> F {
        if self.n == 0 {
            F::zero()
        } else {
            (self.var() / F::from(self.n).unwrap()).sqrt()
        }
    }
}

/// Least-squares line fit `y ≈ a + b x`; returns `(a, b, r2)`.
///
/// `r2` is 1 when the residuals vanish; for a flat response (zero total
/// variance) it is defined as 1 if the fit is exact and 0 otherwise.
pub fn linear_fit<F: Float>(xs: &[F], ys: &[F]) -> (F, F, F) {
    assert_eq!(xs.len(), ys.len());
    assert!(xs.len() >= 2, "need at least two points");
    let n = F::from(xs.len()).unwrap();
    let sx = xs.iter().fold(F::zero(), |s, &x| s + x);
    let sy = ys.iter().fold(F::zero(), |s, &y| s + y);
    let mx = sx / n;
    let my = sy / n;
    let mut sxx = F::zero();
    let mut sxy = F::zero();
    for (&x, &y) in xs.iter().zip(ys) {
        sxx = sxx + (x - mx) * (x - mx);
        sxy = sxy + (x - mx) * (y - my);
    }
    let b = sxy / sxx;
    let a = my - b * mx;
    let mut ss_res = F::zero();
    let mut ss_tot = F::zero();
    for (&x, &y) in xs.iter().zip(ys) {
        let e = y - (a + b * x);
        ss_res = ss_res + e * e;
        ss_tot = ss_tot + (y - my) * (y - my);
    }
    let r2 = if ss_tot > F::zero() {
        F::one() - ss_res / ss_tot
    } else if ss_res == F::zero() {
        F::one()
    } else {
        F::zero()
    };
    (a, b, r2)
}

/// Least-squares slope of `y ≈ b x` through the origin.
pub fn slope_through_origin<F: Float>(xs: &[F], ys: &[F]) -> F {
    let mut num = F::zero();
    let mut den = F::zero();
    for (&x, &y) in xs.iter().zip(ys) {
        num = num + x * y;
        den = den + x * x;
    }
    num / den
}

/// Wilson score interval for a binomial proportion at confidence `z` sigma
/// (z = 1.96 for 95%). Correct coverage near 0 and 1.
pub fn wilson_interval<F: Float>(successes: u64, n: u64, z: F) -> (F, F) {
    if n == 0 {
        return (F::zero(), F::one());
    }
    let nf = F::from(n).unwrap();
    let p = F::from(successes).unwrap() / nf;
    let z2 = z * z;
    let denom = F::one() + z2 / nf;
    let centre = p + z2 / (F::from(2.0).unwrap() * nf);
    let half = z * (p * (F::one() - p) / nf + z2 / (F::from(4.0).unwrap() * nf * nf)).sqrt();
    let lo = (centre - half) / denom;
    let hi = (centre + half) / denom;
    (lo.max(F::zero()), hi.min(F::one()))
}

/// `exp` iterated `n` times: exp_(0)(x) = x.
pub fn iterated_exp<F: Float>(n: u32, x: F) -> F {
    let mut v = x;
    for _ in 0..n {
        v = v.exp();
    }
    v
}

/// Upper tail of the chi-squared distribution with `k` degrees of freedom,
/// via the regularised upper incomplete gamma function Q(k/2, x/2).
pub fn chi_square_sf(x: f64, k: u32) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    gamma_q(0.5 * k as f64, 0.5 * x)
}

/// Regularised upper incomplete gamma Q(a, x) (series/continued fraction,
/// Numerical Recipes style).
fn gamma_q(a: f64, x: f64) -> f64 {
    if x < a + 1.0 {
        1.0 - gamma_p_series(a, x)
    } else {
        gamma_q_contfrac(a, x)
    }
}

fn ln_gamma(x: f64) -> f64 {
    // Lanczos, g = 7.
    const COEF: [f64; 9] = [
        0.99999999999980993,
        676.5203681218851,
        -1259.1392167224028,
        771.32342877765313,
        -176.61502916214059,
        12.507343278686905,
        -0.13857109526572012,
        9.9843695780195716e-6,
        1.5056327351493116e-7,
    ];
    if x < 0.5 {
        let pi = std::f64::consts::PI;
        return (pi / (pi * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut acc = COEF[0];
    for (i, &c) in COEF.iter().enumerate().skip(1) {
        acc += c / (x + i as f64);
    }
    let t = x + 7.5;
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + acc.ln()
}

fn gamma_p_series(a: f64, x: f64) -> f64 {
    let mut ap = a;
    let mut sum = 1.0 / a;
    let mut del = sum;
    for _ in 0..500 {
        ap += 1.0;
        del *= x / ap;
        sum += del;
        if del.abs() < sum.abs() * 1e-15 {
            break;
        }
    }
    sum * (-x + a * x.ln() - ln_gamma(a)).exp()
}

fn gamma_q_contfrac(a: f64, x: f64) -> f64 {
    let tiny = 1e-300;
    let mut b = x + 1.0 - a;
    let mut c = 1.0 / tiny;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..500 {
        let an = -(i as f64) * (i as f64 - a);
        b += 2.0;
        d = an * d + b;
        if d.abs() < tiny {
            d = tiny;
        }
        c = b + an / c;
        if c.abs() < tiny {
            c = tiny;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < 1e-15 {
            break;
        }
    }
    h * (-x + a * x.ln() - ln_gamma(a)).exp()
}

/// Two-sample Kolmogorov-Smirnov p-value (asymptotic Kolmogorov tail).
pub fn ks_two_sample(mut a: Vec<f64>, mut b: Vec<f64>) -> f64 {
    a.sort_by(|u, v| u.partial_cmp(v).unwrap());
    b.sort_by(|u, v| u.partial_cmp(v).unwrap());
    let (n, m) = (a.len(), b.len());
    assert!(n > 0 && m > 0);
    let mut i = 0;
    let mut j = 0;
    let mut d: f64 = 0.0;
    while i < n && j < m {
        let x = a[i].min(b[j]);
        while i < n && a[i] <= x {
            i += 1;
        }
        while j < m && b[j] <= x {
            j += 1;
        }
        let fa = i as f64 / n as f64;
        let fb = j as f64 / m as f64;
        d = d.max((fa - fb).abs());
    }
    let ne = (n as f64 * m as f64) / (n as f64 + m as f64);
    let lambda = (ne.sqrt() + 0.12 + 0.11 / ne.sqrt()) * d;
    kolmogorov_tail(lambda)
}

fn kolmogorov_tail(lambda: f64) -> f64 {
    if lambda < 1e-8 {
        return 1.0;
    }
    let mut sum = 0.0;
    for k in 1..=100 {
        let term = (-2.0 * (k as f64) * (k as f64) * lambda * lambda).exp();
        sum += if k % 2 == 1 { term } else { -term };
        if term < 1e-12 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}
