//! Log-Gamma, Bessel functions of the first kind of real order, and their
//! first positive zeros.
//!
//! `J_ν` is summed from its power series with the leading factor
//! `(r/2)^ν/Γ(ν+1)` carried as a logarithm, so orders in the hundreds neither
//! overflow nor underflow. Only when the series terms themselves would
//! overflow is the value taken from Miller's backward recurrence.

use std::f64::consts::PI;

use crate::error::{invalid, Error, Result};
use crate::numerics::adaptive_gauss_legendre;

/// Order of a Bessel function, `ν ≥ 0`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct BesselOrder(f64);

impl BesselOrder {
    pub fn new(nu: f64) -> Result<Self> {
        if !nu.is_finite() || nu < 0.0 {
            return invalid(format!("Bessel order must be finite and ≥ 0, got {nu}"));
        }
        Ok(Self(nu))
    }

    pub fn nu(self) -> f64 {
        self.0
    }
}

/// A real number stored as `sign·exp(log_abs)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogValue {
    pub log_abs: f64,
    pub sign: f64,
}

impl LogValue {
    pub const ZERO: LogValue = LogValue { log_abs: f64::NEG_INFINITY, sign: 0.0 };

    pub fn from_f64(v: f64) -> Self {
        if v == 0.0 {
            Self::ZERO
        } else {
            Self { log_abs: v.abs().ln(), sign: v.signum() }
        }
    }

    pub fn value(self) -> f64 {
        if self.sign == 0.0 {
            0.0
        } else {
            self.sign * self.log_abs.exp()
        }
    }
}

const STIRLING: [f64; 7] = [
    1.0 / 12.0,
    -1.0 / 360.0,
    1.0 / 1260.0,
    -1.0 / 1680.0,
    1.0 / 1188.0,
    -691.0 / 360360.0,
    1.0 / 156.0,
];

/// `ln Γ(x)` for `x > 0`.
///
/// Shifts the argument above 15 with the recurrence, then uses the Stirling
/// series through the `x⁻¹³` term.
pub fn log_gamma(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return invalid(format!("log_gamma needs a positive finite argument, got {x}"));
    }
    Ok(log_gamma_unchecked(x))
}

pub(crate) fn log_gamma_unchecked(x: f64) -> f64 {
    let mut z = x;
    let mut shift = 1.0;
    let mut log_shift = 0.0;
    while z < 15.0 {
        shift *= z;
        if shift > 1e280 {
            log_shift += shift.ln();
            shift = 1.0;
        }
        z += 1.0;
    }
    log_shift += shift.ln();
    let inv = 1.0 / z;
    let inv2 = inv * inv;
    let mut series = 0.0;
    let mut p = inv;
    for c in STIRLING {
        series += c * p;
        p *= inv2;
    }
    (z - 0.5) * z.ln() - z + 0.5 * (2.0 * PI).ln() + series - log_shift
}

/// Series terms are dropped once they fall this many nats below both the
/// largest term and the running sum.
const SERIES_CUTOFF_NATS: f64 = 40.0;
/// Largest series term (relative to the first, in nats) before the series is
/// abandoned for the backward recurrence.
const OVERFLOW_NATS: f64 = 600.0;

/// `J_ν(r)` from the power series, as log-magnitude and sign, together with
/// the log of the largest term relative to the first.
///
/// Terms are generated by their ratio `−(r/2)²/((k+1)(k+ν+1))` and summed in
/// double-double arithmetic, so the cancellation of the alternating series
/// costs no accuracy until the terms themselves would overflow.
pub fn bessel_j_series_log(order: BesselOrder, r: f64) -> Result<(LogValue, f64)> {
    let nu = order.nu();
    if !(r >= 0.0) || !r.is_finite() {
        return invalid(format!("Bessel argument must be finite and ≥ 0, got {r}"));
    }
    if r == 0.0 {
        return Ok((if nu == 0.0 { LogValue::from_f64(1.0) } else { LogValue::ZERO }, 0.0));
    }
    let lh = (0.5 * r).ln();
    let log_t0 = nu * lh - log_gamma_unchecked(nu + 1.0);
    let half = Dd::from(0.5 * r);
    let q = half.mul(half);
    let nu1 = Dd::sum(nu, 1.0);
    let mut term = Dd::from(1.0);
    let mut sum = term;
    let mut log_term = 0.0f64;
    let mut log_max = 0.0f64;
    let mut k = 0usize;
    loop {
        let kf = k as f64;
        let denom = nu1.add(Dd::from(kf)).mul(Dd::from(kf + 1.0));
        term = term.mul(q).div(denom).neg();
        sum = sum.add(term);
        let prev = log_term;
        log_term = term.hi.abs().ln();
        log_max = log_max.max(log_term);
        k += 1;
        let log_sum = (sum.hi + sum.lo).abs().ln();
        if log_term < prev && log_term < log_max.min(log_sum) - SERIES_CUTOFF_NATS {
            break;
        }
        if log_max > OVERFLOW_NATS {
            return Err(Error::Numerical(format!("Bessel series terms overflow for ν={nu}, r={r}")));
        }
        if k > 100_000 {
            return Err(Error::Numerical(format!("Bessel series failed to terminate for ν={nu}, r={r}")));
        }
    }
    let s = sum.hi + sum.lo;
    if s == 0.0 {
        return Ok((LogValue::ZERO, log_max));
    }
    Ok((LogValue { log_abs: log_t0 + s.abs().ln(), sign: s.signum() }, log_max))
}

/// Double-double number `hi + lo` with `|lo| ≤ ulp(hi)/2`.
#[derive(Debug, Clone, Copy)]
struct Dd {
    hi: f64,
    lo: f64,
}

impl Dd {
    fn from(x: f64) -> Self {
        Dd { hi: x, lo: 0.0 }
    }

    /// Exact `a + b`.
    fn sum(a: f64, b: f64) -> Self {
        let s = a + b;
        let bb = s - a;
        let err = (a - (s - bb)) + (b - bb);
        Dd { hi: s, lo: err }
    }

    fn quick(hi: f64, lo: f64) -> Self {
        let s = hi + lo;
        Dd { hi: s, lo: lo - (s - hi) }
    }

    fn neg(self) -> Self {
        Dd { hi: -self.hi, lo: -self.lo }
    }

    fn add(self, o: Dd) -> Self {
        let s = Dd::sum(self.hi, o.hi);
        let t = Dd::sum(self.lo, o.lo);
        let u = Dd::quick(s.hi, s.lo + t.hi);
        Dd::quick(u.hi, u.lo + t.lo)
    }

    fn mul(self, o: Dd) -> Self {
        let p = self.hi * o.hi;
        let err = self.hi.mul_add(o.hi, -p);
        Dd::quick(p, err + (self.hi * o.lo + self.lo * o.hi))
    }

    fn div(self, o: Dd) -> Self {
        let q1 = self.hi / o.hi;
        let r = self.add(o.mul(Dd::from(q1)).neg());
        let q2 = r.hi / o.hi;
        let r = r.add(o.mul(Dd::from(q2)).neg());
        let q3 = r.hi / o.hi;
        Dd::quick(q1, q2).add(Dd::from(q3))
    }
}

/// `J_ν(r)` from the power series only.
pub fn bessel_j_series(order: BesselOrder, r: f64) -> Result<f64> {
    Ok(bessel_j_series_log(order, r)?.0.value())
}

/// `J_ν(r)` by Miller's backward recurrence, normalized with
/// `(r/2)^μ = Σ_j (μ+2j) Γ(μ+j)/j! · J_{μ+2j}(r)` where `μ = ν − ⌊ν⌋`.
pub fn bessel_j_recurrence_log(order: BesselOrder, r: f64) -> Result<LogValue> {
    let nu = order.nu();
    if !(r > 0.0) || !r.is_finite() {
        return invalid(format!("recurrence needs a positive finite argument, got {r}"));
    }
    let n = nu.floor() as usize;
    let mu = nu - n as f64;
    let big = nu.max(r);
    let top = (big + 30.0 + (60.0 * big).sqrt()).ceil() as usize + n % 2;
    let top = top + (top % 2);
    // f[k] ∝ J_{μ+k}(r), built downward from f[top+1] = 0, f[top] = tiny.
    let mut f_next = 0.0f64;
    let mut f_cur = 1e-300f64;
    let mut norm_sum = 0.0f64;
    let mut target = 0.0f64;
    let weight = |k: usize| -> f64 {
        // (μ+2j) Γ(μ+j)/j! with k = 2j; j = 0 gives Γ(μ+1).
        let j = k / 2;
        if j == 0 {
            log_gamma_unchecked(mu + 1.0).exp()
        } else {
            (mu + 2.0 * j as f64) * (log_gamma_unchecked(mu + j as f64) - log_gamma_unchecked(j as f64 + 1.0)).exp()
        }
    };
    let mut k = top;
    loop {
        if k == n {
            target = f_cur;
        }
        if k % 2 == 0 {
            norm_sum += weight(k) * f_cur;
        }
        if k == 0 {
            break;
        }
        let f_prev = 2.0 * (mu + k as f64) / r * f_cur - f_next;
        f_next = f_cur;
        f_cur = f_prev;
        k -= 1;
        if f_cur.abs() > 1e250 {
            f_cur *= 1e-250;
            f_next *= 1e-250;
            norm_sum *= 1e-250;
            target *= 1e-250;
        }
    }
    if target == 0.0 || norm_sum == 0.0 {
        return Ok(LogValue::ZERO);
    }
    let log_abs = mu * (0.5 * r).ln() + target.abs().ln() - norm_sum.abs().ln();
    Ok(LogValue { log_abs, sign: target.signum() * norm_sum.signum() })
}

/// `J_ν(r)` as log-magnitude and sign; safe for results far below the `f64` range.
pub fn bessel_j_log(order: BesselOrder, r: f64) -> Result<LogValue> {
    match bessel_j_series_log(order, r) {
        Ok((value, _)) => Ok(value),
        Err(Error::Numerical(_)) => bessel_j_recurrence_log(order, r),
        Err(e) => Err(e),
    }
}

/// `J_ν(r)`. Returns an error if the result underflows to zero while being
/// nonzero; use [`bessel_j_log`] in that regime.
pub fn bessel_j(order: BesselOrder, r: f64) -> Result<f64> {
    let lv = bessel_j_log(order, r)?;
    let v = lv.value();
    if v == 0.0 && lv.sign != 0.0 {
        return Err(Error::Numerical(format!(
            "J_{}({r}) underflows (log|J| = {:.3}); use the log-magnitude variant",
            order.nu(),
            lv.log_abs
        )));
    }
    Ok(v)
}

/// `J_ν(r)` from `(r/2)^ν/(Γ(ν+½)√π) ∫_{−1}^{1} (1−t²)^{ν−½} cos(rt) dt`,
/// by adaptive Gauss–Legendre with geometric splitting toward `t = 1`.
pub fn bessel_j_integral(order: BesselOrder, r: f64) -> Result<f64> {
    let nu = order.nu();
    if !(r >= 0.0) || !r.is_finite() {
        return invalid(format!("Bessel argument must be finite and ≥ 0, got {r}"));
    }
    let p = nu - 0.5;
    let integrand = |t: f64| ((1.0 - t) * (1.0 + t)).powf(p) * (r * t).cos();
    let mut total = 0.0;
    if p >= 1.0 {
        total = adaptive_gauss_legendre(integrand, 0.0, 1.0, 1e-15).0;
    } else {
        // Panels [1−2^{−m}, 1−2^{−m−1}] toward the algebraic endpoint.
        let mut lo = 0.0;
        let mut width = 0.5;
        for _ in 0..60 {
            let hi = 1.0 - width;
            total += adaptive_gauss_legendre(integrand, lo, hi, 1e-16).0;
            lo = hi;
            width *= 0.5;
        }
        // Remaining sliver: (1−t)^p (1+t)^p cos(rt) ≈ 2^p cos r (1−t)^p.
        let delta = 1.0 - lo;
        total += 2f64.powf(p) * r.cos() * delta.powf(p + 1.0) / (p + 1.0);
    }
    let log_pref = if r == 0.0 {
        if nu == 0.0 {
            0.0
        } else {
            return Ok(0.0);
        }
    } else {
        nu * (0.5 * r).ln()
    };
    let log_pref = log_pref - log_gamma_unchecked(nu + 0.5) - 0.5 * PI.ln();
    Ok(2.0 * total * log_pref.exp())
}

/// Smallest `α > 0` with `J_ν(α) = 0`, to absolute accuracy 1e−10.
///
/// Scans `[ν, ν + 4ν^{1/3} + 6]` for the first sign change, then bisects.
pub fn first_positive_zero(order: BesselOrder) -> Result<f64> {
    let nu = order.nu();
    let lo0 = nu.max(1e-3);
    let hi0 = nu + 4.0 * nu.cbrt() + 6.0;
    let sign_at = |r: f64| -> Result<f64> { Ok(bessel_j_log(order, r)?.sign) };
    let step = 0.05;
    let mut a = lo0;
    let mut sa = sign_at(a)?;
    if sa <= 0.0 {
        return Err(Error::Internal(format!("J_{nu} is not positive at the bracket start {a}")));
    }
    let mut bracket = None;
    while a < hi0 {
        let b = (a + step).min(hi0);
        let sb = sign_at(b)?;
        if sb == 0.0 {
            return Ok(b);
        }
        if sb != sa {
            bracket = Some((a, b));
            break;
        }
        a = b;
        sa = sb;
    }
    let (mut lo, mut hi) = bracket
        .ok_or_else(|| Error::Internal(format!("no sign change of J_{nu} on [{lo0}, {hi0}]")))?;
    while hi - lo > 2e-11 {
        let mid = 0.5 * (lo + hi);
        let s = sign_at(mid)?;
        if s == 0.0 {
            return Ok(mid);
        }
        if s > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}
