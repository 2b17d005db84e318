//! Shannon, Rényi and Tsallis entropies of mass functions and their first
//! two derivatives along a path that moves the last Bernoulli parameter.
//!
//! Natural logarithms throughout. Exact masses are converted to binary64
//! only at the last step; differences `g(k−1) − g(k)` are formed exactly
//! before conversion when the inputs are exact.

use std::f64::consts::LN_2;

use num_traits::{Signed, Zero};
use serde::Serialize;

use crate::bernoulli::{MassFunction, SheppOlkinPath};
use crate::error::{Error, Result};
use crate::mixing::{self, MixingProfile};
use crate::rational::{self, Rational};

/// `2(1 − log 2)`, the largest possible `|∂H/∂t|` at `p_n = 1/2`.
pub const SHANNON_DERIVATIVE_BOUND: f64 = 2.0 * (1.0 - LN_2);

/// Default central-difference step.
pub const DEFAULT_STEP: f64 = 1e-5;

/// Default relative tolerance when comparing against finite differences.
pub const DEFAULT_FD_RTOL: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Shannon,
    Renyi,
    Tsallis,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct EntropyOrder {
    pub family: Family,
    pub q: f64,
}

impl EntropyOrder {
    pub fn shannon() -> Self {
        Self {
            family: Family::Shannon,
            q: 1.0,
        }
    }

    pub fn new(family: Family, q: f64) -> Result<Self> {
        if !(q >= 0.0) || !q.is_finite() {
            return Err(Error::InvalidOrder {
                q,
                reason: "q must be a finite non-negative number",
            });
        }
        if family == Family::Shannon && q != 1.0 {
            return Err(Error::InvalidOrder {
                q,
                reason: "the Shannon family has q = 1",
            });
        }
        Ok(Self { family, q })
    }

    /// Rényi or Tsallis at `q = 1` behaves as Shannon.
    pub fn is_shannon(&self) -> bool {
        self.family == Family::Shannon || self.q == 1.0
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Direct,
    Mixing,
    FiniteDifference,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DerivativeRecord {
    pub first: f64,
    pub second: f64,
    pub method: Method,
    /// `second ≤ 0`, and for Shannon at `p_n = 1/2` also
    /// `|first| ≤ 2(1 − log 2) + 1e-12`.
    pub bound_check: bool,
}

fn masses_checked(f: &MassFunction) -> Result<Vec<f64>> {
    let xs = f.to_f64();
    if let Some((index, &value)) = xs.iter().enumerate().find(|(_, &x)| !(x >= 0.0)) {
        return Err(Error::NegativeMass { index, value });
    }
    Ok(xs)
}

fn xlogx(x: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x * x.ln()
    }
}

pub fn shannon_entropy(f: &MassFunction) -> Result<f64> {
    Ok(-masses_checked(f)?.into_iter().map(xlogx).sum::<f64>())
}

/// `Σ f(k)^q` over the support; `q = 0` counts support points.
fn power_sum(xs: &[f64], q: f64) -> f64 {
    xs.iter()
        .filter(|&&x| x > 0.0)
        .map(|&x| if q == 0.0 { 1.0 } else { x.powf(q) })
        .sum()
}

fn check_q(q: f64) -> Result<()> {
    if !(q >= 0.0) || !q.is_finite() {
        return Err(Error::InvalidOrder {
            q,
            reason: "q must be a finite non-negative number",
        });
    }
    Ok(())
}

/// `log(Σ f^q) / (1 − q)`; `q = 1` is Shannon.
pub fn renyi_entropy(f: &MassFunction, q: f64) -> Result<f64> {
    check_q(q)?;
    if q == 1.0 {
        return shannon_entropy(f);
    }
    let xs = masses_checked(f)?;
    Ok(power_sum(&xs, q).ln() / (1.0 - q))
}

/// `(1 − Σ f^q) / (q − 1)`; `q = 1` is Shannon.
pub fn tsallis_entropy(f: &MassFunction, q: f64) -> Result<f64> {
    check_q(q)?;
    if q == 1.0 {
        return shannon_entropy(f);
    }
    let xs = masses_checked(f)?;
    Ok((1.0 - power_sum(&xs, q)) / (q - 1.0))
}

pub fn entropy(f: &MassFunction, order: EntropyOrder) -> Result<f64> {
    match order.family {
        Family::Shannon => shannon_entropy(f),
        Family::Renyi => renyi_entropy(f, order.q),
        Family::Tsallis => tsallis_entropy(f, order.q),
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::AlphaOutOfRange { alpha });
    }
    Ok(())
}

/// `ψ(α) = α log α − (1−α) log(1−α) − (2 − 2 log 2)(α − 1/2)`.
pub fn psi(alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    Ok(xlogx(alpha) - xlogx(1.0 - alpha) - SHANNON_DERIVATIVE_BOUND * (alpha - 0.5))
}

pub fn psi_rational(alpha: &Rational) -> Result<f64> {
    if !rational::is_in_unit_interval(alpha) {
        return Err(Error::AlphaOutOfRange {
            alpha: rational::to_f64(alpha),
        });
    }
    psi(rational::to_f64(alpha))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SeriesValue {
    pub value: f64,
    /// Upper bound on the absolute value of the discarded tail.
    pub tail_bound: f64,
}

/// Partial sum `−Σ_{r=1}^{R} (2α−1)^{2r+1} / (2r(2r+1))` with a bound on the tail.
pub fn psi_series(alpha: f64, terms: usize) -> Result<SeriesValue> {
    check_alpha(alpha)?;
    let x = 2.0 * alpha - 1.0;
    let value = -(1..=terms)
        .map(|r| {
            let r = r as f64;
            x.powf(2.0 * r + 1.0) / (2.0 * r * (2.0 * r + 1.0))
        })
        .sum::<f64>();
    // Each tail coefficient is at most 1/((2R+2)(2R+3)) and, separately,
    // Σ_{r>R} 1/(2r(2r+1)) ≤ Σ_{r>R} 1/(4r(r−1)) = 1/(4R).
    let r = terms.max(1) as f64;
    let harmonic = 1.0 / (4.0 * r);
    let ax = x.abs();
    let geometric = if ax < 1.0 {
        ax.powf(2.0 * r + 3.0) / ((2.0 * r + 2.0) * (2.0 * r + 3.0) * (1.0 - ax * ax))
    } else {
        f64::INFINITY
    };
    Ok(SeriesValue {
        value,
        tail_bound: harmonic.min(geometric),
    })
}

/// `b^q − b` for `b ≥ 0`, without cancellation near `q = 1`.
fn pow_minus_base(b: f64, q: f64) -> f64 {
    if b == 0.0 {
        0.0
    } else {
        b * ((q - 1.0) * b.ln()).exp_m1()
    }
}

/// `ψ_q(x) = −[(1−x)^q − (1+x)^q + 2qx] / (q − 1)`.
pub fn psi_q(x: f64, q: f64) -> Result<f64> {
    check_q(q)?;
    if q == 1.0 {
        return Err(Error::InvalidOrder {
            q,
            reason: "psi_q is undefined at q = 1; use psi",
        });
    }
    if !(x.abs() <= 1.0) {
        return Err(Error::ArgumentOutOfRange { x });
    }
    if q == 0.0 {
        return Ok(0.0);
    }
    // (1−x)^q − (1+x)^q + 2qx
    //   = [(1−x)^q − (1−x)] − [(1+x)^q − (1+x)] + 2(q−1)x
    let bracket = pow_minus_base(1.0 - x, q) - pow_minus_base(1.0 + x, q) + 2.0 * (q - 1.0) * x;
    Ok(-bracket / (q - 1.0))
}

/// Coefficient of `x^{2r+1}` in the odd power series of [`psi_q`]:
/// `2 q ∏_{i=2}^{2r} (q − i) / (2r+1)!`.
pub fn psi_q_coefficient(q: f64, r: usize) -> f64 {
    let mut c = 2.0 * q;
    for i in 2..=2 * r {
        c *= q - i as f64;
    }
    for i in 2..=2 * r + 1 {
        c /= i as f64;
    }
    c
}

/// Partial sum of the [`psi_q`] power series through `x^{2R+1}`.
pub fn psi_q_series(x: f64, q: f64, terms: usize) -> f64 {
    (1..=terms)
        .map(|r| psi_q_coefficient(q, r) * x.powi(2 * r as i32 + 1))
        .sum()
}

/// `g(k−1) − g(k)` for `k = 0..=n` (exactly formed when `g` is exact) and `f`.
fn path_terms(g: &MassFunction, f: &MassFunction) -> Result<(Vec<f64>, Vec<f64>)> {
    if f.len() != g.len() + 1 {
        return Err(Error::LengthMismatch {
            what: "f against g",
            expected: g.len() + 1,
            got: f.len(),
        });
    }
    let n = g.len() as isize;
    let diffs = match g {
        MassFunction::Exact(m) => (0..=n)
            .map(|k| rational::to_f64(&(crate::bernoulli::at(m, k - 1) - crate::bernoulli::at(m, k))))
            .collect(),
        MassFunction::Float(_) => (0..=n).map(|k| g.float_at(k - 1) - g.float_at(k)).collect(),
    };
    Ok((diffs, masses_checked(f)?))
}

/// `∂H/∂t = Σ_k (g(k) − g(k−1)) log f(k)`.
pub fn shannon_derivative_direct(g: &MassFunction, f: &MassFunction) -> Result<f64> {
    let (diffs, fs) = path_terms(g, f)?;
    let mut total = 0.0;
    for (k, (d, fk)) in diffs.iter().zip(&fs).enumerate() {
        if *fk == 0.0 {
            if *d != 0.0 {
                return Err(Error::ZeroMass { index: k });
            }
            continue;
        }
        total -= d * fk.ln();
    }
    Ok(total)
}

/// `∂²H/∂t² = −Σ_k (g(k) − g(k−1))² / f(k)`.
pub fn shannon_second_derivative(g: &MassFunction, f: &MassFunction) -> Result<f64> {
    let (diffs, fs) = path_terms(g, f)?;
    let mut total = 0.0;
    for (k, (d, fk)) in diffs.iter().zip(&fs).enumerate() {
        if *fk == 0.0 {
            if *d != 0.0 {
                return Err(Error::ZeroMass { index: k });
            }
            continue;
        }
        total -= d * d / fk;
    }
    Ok(total)
}

fn check_profile_len(f: &MassFunction, profile: &MixingProfile) -> Result<()> {
    if f.len() != profile.n + 1 {
        return Err(Error::LengthMismatch {
            what: "f against profile",
            expected: profile.n + 1,
            got: f.len(),
        });
    }
    Ok(())
}

/// `∂H/∂t = 2 Σ_k f(k) ψ(α_k)`, valid at `p_n = 1/2`.
pub fn shannon_derivative_mixing(f: &MassFunction, profile: &MixingProfile) -> Result<f64> {
    check_profile_len(f, profile)?;
    let fs = masses_checked(f)?;
    let mut total = 0.0;
    for (fk, alpha) in fs.iter().zip(&profile.alphas) {
        total += fk * psi_rational(alpha)?;
    }
    Ok(2.0 * total)
}

fn not_one(q: f64) -> Result<()> {
    check_q(q)?;
    if q == 1.0 {
        return Err(Error::InvalidOrder {
            q,
            reason: "q = 1 is the Shannon case",
        });
    }
    Ok(())
}

/// `∂H_{T,q}/∂t = −q/(q−1) Σ_k (g(k−1) − g(k)) f(k)^{q−1}`.
pub fn tsallis_derivative(g: &MassFunction, f: &MassFunction, q: f64) -> Result<f64> {
    not_one(q)?;
    let (diffs, fs) = path_terms(g, f)?;
    if q == 0.0 {
        return Ok(0.0);
    }
    // Σ_k (g(k−1) − g(k)) = 0, so f^{q−1} may be replaced by f^{q−1} − 1,
    // which stays accurate as q → 1.
    let mut total = 0.0;
    for (k, (d, fk)) in diffs.iter().zip(&fs).enumerate() {
        if *d == 0.0 {
            continue;
        }
        let shifted = if *fk > 0.0 {
            ((q - 1.0) * fk.ln()).exp_m1()
        } else if q > 1.0 {
            -1.0
        } else {
            return Err(Error::ZeroMass { index: k });
        };
        total += d * shifted;
    }
    Ok(-q / (q - 1.0) * total)
}

/// `∂²H_{T,q}/∂t² = −q Σ_k (g(k−1) − g(k))² f(k)^{q−2}`.
pub fn tsallis_second_derivative(g: &MassFunction, f: &MassFunction, q: f64) -> Result<f64> {
    not_one(q)?;
    let (diffs, fs) = path_terms(g, f)?;
    if q == 0.0 {
        return Ok(0.0);
    }
    let mut total = 0.0;
    for (k, (d, fk)) in diffs.iter().zip(&fs).enumerate() {
        if *d == 0.0 {
            continue;
        }
        let weight = if *fk > 0.0 {
            fk.powf(q - 2.0)
        } else if q > 2.0 {
            0.0
        } else if q == 2.0 {
            1.0
        } else {
            return Err(Error::ZeroMass { index: k });
        };
        total += d * d * weight;
    }
    Ok(-q * total)
}

/// `∂H_{T,q}/∂t = Σ_k f(k)^q ψ_q(2β_k)`, valid at `p_n = 1/2`.
pub fn tsallis_derivative_mixing(f: &MassFunction, profile: &MixingProfile, q: f64) -> Result<f64> {
    not_one(q)?;
    check_profile_len(f, profile)?;
    if q == 0.0 {
        return Ok(0.0);
    }
    let fs = masses_checked(f)?;
    let mut total = 0.0;
    for (fk, beta) in fs.iter().zip(&profile.betas) {
        let x = 2.0 * rational::to_f64(beta);
        total += fk.powf(q) * psi_q(x, q)?;
    }
    Ok(total)
}

/// Collision-entropy closed form `(1 − 2p_n) Σ_k (g(k−1) − g(k))²`, exact.
pub fn collision_derivative_exact(g: &MassFunction, p_n: &Rational) -> Result<Rational> {
    let g = g.exact("collision_derivative_exact")?;
    let n = g.len() as isize;
    let sum = (0..=n).fold(Rational::zero(), |acc, k| {
        let d = crate::bernoulli::at(g, k - 1) - crate::bernoulli::at(g, k);
        acc + &d * &d
    });
    Ok((Rational::from_integer(1.into()) - rational::int(2) * p_n) * sum)
}

/// `∂H_{R,q}/∂t = (∂H_{T,q}/∂t) / Σ f^q`.
pub fn renyi_derivative(g: &MassFunction, f: &MassFunction, q: f64) -> Result<f64> {
    let t = tsallis_derivative(g, f, q)?;
    Ok(t / power_sum(&f.to_f64(), q))
}

/// `∂²H_{R,q}/∂t² = H_T''/S + (q − 1) H_T'² / S²` with `S = Σ f^q`.
pub fn renyi_second_derivative(g: &MassFunction, f: &MassFunction, q: f64) -> Result<f64> {
    let t1 = tsallis_derivative(g, f, q)?;
    let t2 = tsallis_second_derivative(g, f, q)?;
    let s = power_sum(&f.to_f64(), q);
    Ok(t2 / s + (q - 1.0) * t1 * t1 / (s * s))
}

/// Exact Tsallis derivative for `p = (1/2 − ε, 1/2)` and its linear term
/// in `ε`; the two differ by `O(ε³)`.
pub fn counterexample_leading_term(q: f64, eps: f64) -> Result<(f64, f64)> {
    if !(q > 1.0) || !q.is_finite() {
        return Err(Error::InvalidOrder {
            q,
            reason: "the counterexample needs q > 1",
        });
    }
    if !(eps > 0.0 && eps < 0.5) {
        return Err(Error::Config(format!("eps = {eps} must lie in (0, 1/2)")));
    }
    let exact = -(q * 2f64.powf(1.0 - q) / (q - 1.0))
        * ((0.5 - eps).powf(q) - (0.5 + eps).powf(q) + 2.0 * eps);
    let leading = -(q * 2f64.powf(2.0 - 2.0 * q) / (q - 1.0)) * (2f64.powf(q) - 2.0 * q) * eps;
    Ok((exact, leading))
}

fn bound_check(order: EntropyOrder, path: &SheppOlkinPath, first: f64, second: f64) -> bool {
    let concave = second <= 0.0;
    if order.is_shannon() && *path.base() == rational::half() {
        concave && first.abs() <= SHANNON_DERIVATIVE_BOUND + 1e-12
    } else {
        concave
    }
}

/// Analytic first and second derivatives at `t = 0`.
pub fn derivative(
    path: &SheppOlkinPath,
    order: EntropyOrder,
    method: Method,
) -> Result<DerivativeRecord> {
    if method == Method::FiniteDifference {
        return finite_difference(path, order, DEFAULT_STEP);
    }
    let g = path.g(crate::bernoulli::Backend::Exact);
    let f = path.pmf_at(&Rational::zero())?;
    let (first, second) = if order.is_shannon() {
        let first = match method {
            Method::Direct => shannon_derivative_direct(&g, &f)?,
            _ => {
                require_half(path)?;
                let profile = mixing::mixing_profile(&g)?;
                shannon_derivative_mixing(&f, &profile)?
            }
        };
        (first, shannon_second_derivative(&g, &f)?)
    } else {
        let q = order.q;
        let t_first = match method {
            Method::Direct => tsallis_derivative(&g, &f, q)?,
            _ => {
                require_half(path)?;
                let profile = mixing::mixing_profile(&g)?;
                tsallis_derivative_mixing(&f, &profile, q)?
            }
        };
        let t_second = tsallis_second_derivative(&g, &f, q)?;
        match order.family {
            Family::Renyi => {
                let s = power_sum(&f.to_f64(), q);
                (t_first / s, t_second / s + (q - 1.0) * t_first * t_first / (s * s))
            }
            _ => (t_first, t_second),
        }
    };
    Ok(DerivativeRecord {
        first,
        second,
        method,
        bound_check: bound_check(order, path, first, second),
    })
}

fn require_half(path: &SheppOlkinPath) -> Result<()> {
    if *path.base() != rational::half() {
        return Err(Error::Inconsistent(
            "the mixing form holds only at p_n = 1/2".into(),
        ));
    }
    Ok(())
}

/// `H(f + δ) − H(f)` evaluated termwise so that small increments keep
/// their relative accuracy.
fn entropy_increment(f: &[f64], delta: &[f64], order: EntropyOrder) -> f64 {
    if order.is_shannon() {
        return f
            .iter()
            .zip(delta)
            .map(|(&fk, &dk)| {
                if fk == 0.0 {
                    -xlogx(dk)
                } else {
                    -dk * fk.ln() - (fk + dk) * (dk / fk).ln_1p()
                }
            })
            .sum();
    }
    let q = order.q;
    let d_sum: f64 = f
        .iter()
        .zip(delta)
        .map(|(&fk, &dk)| {
            if q == 0.0 {
                let before = (fk > 0.0) as i32;
                let after = (fk + dk > 0.0) as i32;
                (after - before) as f64
            } else if fk == 0.0 {
                dk.max(0.0).powf(q)
            } else {
                fk.powf(q) * (q * (dk / fk).ln_1p()).exp_m1()
            }
        })
        .sum();
    match order.family {
        Family::Renyi => (d_sum / power_sum(f, q)).ln_1p() / (1.0 - q),
        _ => -d_sum / (q - 1.0),
    }
}

/// Central-difference first and second derivatives of the chosen entropy
/// along the path at `t = 0`, with step `h`.
pub fn finite_difference(
    path: &SheppOlkinPath,
    order: EntropyOrder,
    h: f64,
) -> Result<DerivativeRecord> {
    let base = rational::to_f64(path.base());
    let step = rational::from_f64_exact(h)
        .filter(|s| s.is_positive())
        .ok_or(Error::StepOutOfRange { h, base })?;
    let up = path.params_at(&step);
    let down = path.params_at(&-step.clone());
    let (up, down) = match (up, down) {
        (Ok(u), Ok(d)) => (u, d),
        _ => return Err(Error::StepOutOfRange { h, base }),
    };
    let f0 = path.pmf_at(&Rational::zero())?;
    let f0_exact = f0.exact("finite_difference")?;
    let increments = |params| -> Vec<f64> {
        let shifted = crate::bernoulli::pmf(&params, crate::bernoulli::Backend::Exact);
        let shifted = shifted.exact("finite_difference").unwrap().to_vec();
        shifted
            .iter()
            .zip(f0_exact)
            .map(|(a, b)| rational::to_f64(&(a - b)))
            .collect()
    };
    let f0_float = f0.to_f64();
    let dh_up = entropy_increment(&f0_float, &increments(up), order);
    let dh_down = entropy_increment(&f0_float, &increments(down), order);
    let first = (dh_up - dh_down) / (2.0 * h);
    let second = (dh_up + dh_down) / (h * h);
    Ok(DerivativeRecord {
        first,
        second,
        method: Method::FiniteDifference,
        bound_check: bound_check(order, path, first, second),
    })
}

/// Mixed tolerance `|a − b| ≤ atol + rtol · max(|a|, |b|)`.
pub fn close(a: f64, b: f64, rtol: f64, atol: f64) -> bool {
    (a - b).abs() <= atol + rtol * a.abs().max(b.abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bernoulli::{pmf, shifted_mixture, Backend, ParamVector};
    use crate::rational::ratio;
    use proptest::prelude::*;

    fn exact(xs: &[(i64, i64)]) -> MassFunction {
        MassFunction::Exact(xs.iter().map(|&(a, b)| ratio(a, b)).collect())
    }

    fn pv(xs: &[(i64, i64)]) -> ParamVector {
        ParamVector::new(xs.iter().map(|&(a, b)| ratio(a, b)).collect()).unwrap()
    }

    /// Independent evaluation of ∂H/∂t for (1/4, 1/2): the three-term sum
    /// (3/4) log(3/8) − (1/2) log(1/2) − (1/4) log(1/8).
    fn reference_quarter_half() -> f64 {
        0.75 * (3.0f64 / 8.0).ln() - 0.5 * 0.5f64.ln() - 0.25 * 0.125f64.ln()
    }

    #[test]
    fn shannon_examples() {
        assert_eq!(shannon_entropy(&exact(&[(1, 1)])).unwrap(), 0.0);
        assert!((shannon_entropy(&exact(&[(1, 2), (1, 2)])).unwrap() - LN_2).abs() < 1e-15);
        let h = shannon_entropy(&exact(&[(1, 4), (1, 2), (1, 4)])).unwrap();
        assert!((h - 1.5 * LN_2).abs() < 1e-15);
        assert!((h - 1.039721).abs() < 1e-6);
        assert!(shannon_entropy(&MassFunction::Float(vec![1.5, -0.5])).is_err());
    }

    #[test]
    fn renyi_tsallis_examples() {
        let f = exact(&[(1, 4), (1, 2), (1, 4)]);
        assert!((renyi_entropy(&f, 0.0).unwrap() - 3f64.ln()).abs() < 1e-15);
        assert_eq!(tsallis_entropy(&f, 0.0).unwrap(), 2.0);
        let coin = exact(&[(1, 2), (1, 2)]);
        assert!((tsallis_entropy(&coin, 2.0).unwrap() - 0.5).abs() < 1e-15);
        assert_eq!(renyi_entropy(&f, 1.0).unwrap(), shannon_entropy(&f).unwrap());
        assert_eq!(tsallis_entropy(&f, 1.0).unwrap(), shannon_entropy(&f).unwrap());
        assert!(renyi_entropy(&f, -1.0).is_err());
        assert!(tsallis_entropy(&f, -0.5).is_err());
        // Both approach Shannon as q → 1.
        let h = shannon_entropy(&f).unwrap();
        assert!((renyi_entropy(&f, 1.0 + 1e-7).unwrap() - h).abs() < 1e-6);
        assert!((tsallis_entropy(&f, 1.0 - 1e-7).unwrap() - h).abs() < 1e-6);
    }

    #[test]
    fn psi_values() {
        assert_eq!(psi(0.5).unwrap(), 0.0);
        assert!((psi(0.0).unwrap() - (1.0 - LN_2)).abs() < 1e-15);
        assert!((psi(0.0).unwrap() - 0.306853).abs() < 1e-6);
        assert!((psi(1.0).unwrap() + (1.0 - LN_2)).abs() < 1e-15);
        assert!(psi(1.5).is_err());
        assert!(psi(f64::NAN).is_err());
        assert_eq!(psi_rational(&ratio(1, 2)).unwrap(), 0.0);
    }

    #[test]
    fn psi_series_values() {
        for r in [1, 5, 40] {
            assert_eq!(psi_series(0.5, r).unwrap().value, 0.0);
        }
        let s = psi_series(0.0, 200_000).unwrap();
        assert!((s.value - (1.0 - LN_2)).abs() <= s.tail_bound + 1e-12);
        let s = psi_series(0.75, 30).unwrap();
        assert!((s.value - psi(0.75).unwrap()).abs() <= s.tail_bound + 1e-15);
    }

    #[test]
    fn psi_q_values() {
        for q in [0.3, 1.5, 2.0, 3.0, 7.5] {
            assert_eq!(psi_q(0.0, q).unwrap(), 0.0);
        }
        for x in [-1.0, -0.3, 0.25, 0.9, 1.0] {
            assert!(psi_q(x, 2.0).unwrap().abs() < 1e-15);
        }
        // −[(1/2)^3 − (3/2)^3 + 3] / 2 = −(−1/4)/2 = 1/8.
        assert!((psi_q(0.5, 3.0).unwrap() - 0.125).abs() < 1e-15);
        assert!(psi_q(0.5, 1.0).is_err());
        assert!(psi_q(1.5, 2.0).is_err());
    }

    #[test]
    fn psi_q_series_matches_closed_form() {
        for q in [0.2, 0.7, 1.3, 1.9, 2.5, 3.0] {
            for x in [-0.6, -0.1, 0.3, 0.55] {
                let closed = psi_q(x, q).unwrap();
                let series = psi_q_series(x, q, 60);
                assert!((closed - series).abs() < 1e-12, "q={q} x={x}: {closed} vs {series}");
            }
        }
    }

    #[test]
    fn psi_q_coefficients_negative_below_two() {
        for i in 1..200 {
            let q = i as f64 / 100.0;
            for r in 1..=10 {
                assert!(psi_q_coefficient(q, r) < 0.0, "q={q} r={r}");
            }
        }
    }

    #[test]
    fn psi_q_tends_to_twice_psi() {
        for alpha in [0.0, 0.1, 0.37, 0.5, 0.8, 1.0] {
            let x = 2.0 * alpha - 1.0;
            let near_one = psi_q(x, 1.0 + 1e-9).unwrap();
            assert!((near_one - 2.0 * psi(alpha).unwrap()).abs() < 1e-8);
        }
    }

    #[test]
    fn shannon_derivative_examples() {
        let g = exact(&[(3, 4), (1, 4)]);
        let f = exact(&[(3, 8), (1, 2), (1, 8)]);
        let direct = shannon_derivative_direct(&g, &f).unwrap();
        assert!((direct - reference_quarter_half()).abs() < 1e-15);
        assert!((direct - 0.130812).abs() < 1e-6);

        let profile = mixing::mixing_profile(&g).unwrap();
        let mixed = shannon_derivative_mixing(&f, &profile).unwrap();
        assert!((mixed - direct).abs() < 1e-12);

        for m in 1..8 {
            let g = pmf(&ParamVector::new(vec![rational::half(); m]).unwrap(), Backend::Exact);
            let f = shifted_mixture(&g, &rational::half()).unwrap();
            let profile = mixing::mixing_profile(&g).unwrap();
            assert!(shannon_derivative_direct(&g, &f).unwrap().abs() < 1e-14);
            assert!(shannon_derivative_mixing(&f, &profile).unwrap().abs() < 1e-14);
        }

        let coin = exact(&[(1, 2), (1, 2)]);
        let point = mixing::mixing_profile(&exact(&[(1, 1)])).unwrap();
        assert_eq!(shannon_derivative_mixing(&coin, &point).unwrap(), 0.0);
        assert!(shannon_derivative_direct(&g, &coin).is_err());
    }

    #[test]
    fn shannon_second_derivative_examples() {
        let g = exact(&[(1, 1)]);
        let f = exact(&[(1, 2), (1, 2)]);
        assert_eq!(shannon_second_derivative(&g, &f).unwrap(), -4.0);
        let g = exact(&[(1, 4), (1, 2), (1, 4)]);
        let f = shifted_mixture(&g, &rational::half()).unwrap();
        assert!(shannon_second_derivative(&g, &f).unwrap() < 0.0);
        let zero_inside = exact(&[(1, 2), (0, 1), (1, 2)]);
        assert!(shannon_second_derivative(&exact(&[(1, 4), (3, 4)]), &zero_inside).is_err());
    }

    #[test]
    fn tsallis_examples() {
        // (1/2 − ε, 1/2) at q = 3 against the closed form.
        let eps = ratio(1, 100);
        let g = pmf(&ParamVector::new(vec![rational::half() - &eps]).unwrap(), Backend::Exact);
        let f = shifted_mixture(&g, &rational::half()).unwrap();
        let d = tsallis_derivative(&g, &f, 3.0).unwrap();
        let (closed, _) = counterexample_leading_term(3.0, 0.01).unwrap();
        assert!((d - closed).abs() < 1e-15);
        assert!((d + 0.00187425).abs() < 1e-9);

        assert_eq!(tsallis_derivative(&g, &f, 0.0).unwrap(), 0.0);
        assert!(tsallis_derivative(&g, &f, 1.0).is_err());
        assert!(tsallis_second_derivative(&g, &f, 1.0).is_err());
        assert!(tsallis_second_derivative(&g, &f, 3.0).unwrap() <= 0.0);
    }

    #[test]
    fn collision_closed_form_examples() {
        let g = exact(&[(3, 4), (1, 4)]);
        for p in [ratio(1, 10), ratio(1, 2), ratio(9, 10)] {
            let f = shifted_mixture(&g, &p).unwrap();
            let d = tsallis_derivative(&g, &f, 2.0).unwrap();
            let closed = collision_derivative_exact(&g, &p).unwrap();
            assert!((d - rational::to_f64(&closed)).abs() < 1e-15);
        }
    }

    #[test]
    fn tsallis_mixing_examples() {
        let g = exact(&[(3, 4), (1, 4)]);
        let f = shifted_mixture(&g, &rational::half()).unwrap();
        let profile = mixing::mixing_profile(&g).unwrap();
        assert!(tsallis_derivative_mixing(&f, &profile, 2.0).unwrap().abs() < 1e-15);
        for q in [0.3, 1.5, 2.7] {
            let a = tsallis_derivative(&g, &f, q).unwrap();
            let b = tsallis_derivative_mixing(&f, &profile, q).unwrap();
            assert!((a - b).abs() < 1e-12, "q={q}: {a} vs {b}");
        }
        let gb = pmf(&ParamVector::new(vec![rational::half(); 4]).unwrap(), Backend::Exact);
        let fb = shifted_mixture(&gb, &rational::half()).unwrap();
        let pb = mixing::mixing_profile(&gb).unwrap();
        for q in [0.5, 1.5, 3.0] {
            assert!(tsallis_derivative_mixing(&fb, &pb, q).unwrap().abs() < 1e-15);
        }
        assert!(tsallis_derivative_mixing(&f, &profile, 1.0).is_err());
    }

    #[test]
    fn counterexample_values() {
        let (exact_v, leading) = counterexample_leading_term(3.0, 0.01).unwrap();
        assert!((exact_v + 0.00187425).abs() < 1e-12);
        assert!((leading + 0.001875).abs() < 1e-15);
        let (_, lead2) = counterexample_leading_term(2.0 + 1e-12, 0.1).unwrap();
        assert!(lead2.abs() < 1e-10);
        let (e, _) = counterexample_leading_term(2.5, 1e-3).unwrap();
        assert!(e < 0.0);
        assert!(counterexample_leading_term(0.5, 0.1).is_err());
        assert!(counterexample_leading_term(3.0, 0.7).is_err());
    }

    #[test]
    fn finite_difference_examples() {
        let path = SheppOlkinPath::from_params(&pv(&[(1, 2), (1, 2), (1, 2)])).unwrap();
        let rec = finite_difference(&path, EntropyOrder::shannon(), DEFAULT_STEP).unwrap();
        assert!(rec.first.abs() < 1e-6);
        assert!(rec.second < 0.0);

        let path = SheppOlkinPath::from_params(&pv(&[(1, 4), (1, 2)])).unwrap();
        let rec = finite_difference(&path, EntropyOrder::shannon(), DEFAULT_STEP).unwrap();
        assert!((rec.first - 0.130812).abs() < 1e-6);
        assert!(rec.bound_check);

        let edge = SheppOlkinPath::from_params(&pv(&[(1, 4), (0, 1)])).unwrap();
        assert!(matches!(
            finite_difference(&edge, EntropyOrder::shannon(), DEFAULT_STEP),
            Err(Error::StepOutOfRange { .. })
        ));
    }

    #[test]
    fn analytic_dispatch() {
        let path = SheppOlkinPath::from_params(&pv(&[(1, 4), (1, 2)])).unwrap();
        let order = EntropyOrder::shannon();
        let a = derivative(&path, order, Method::Direct).unwrap();
        let b = derivative(&path, order, Method::Mixing).unwrap();
        assert!((a.first - b.first).abs() < 1e-12);
        let off_half = SheppOlkinPath::from_params(&pv(&[(1, 4), (1, 3)])).unwrap();
        assert!(derivative(&off_half, order, Method::Mixing).is_err());

        let renyi = EntropyOrder::new(Family::Renyi, 1.5).unwrap();
        let fd = finite_difference(&off_half, renyi, DEFAULT_STEP).unwrap();
        let an = derivative(&off_half, renyi, Method::Direct).unwrap();
        assert!(close(an.first, fd.first, 1e-6, 1e-10));
        assert!(close(an.second, fd.second, 1e-6, 1e-8));
        assert!(EntropyOrder::new(Family::Shannon, 2.0).is_err());
    }

    fn constrained(max_n: usize) -> impl Strategy<Value = ParamVector> {
        prop::collection::vec((2i64..=40).prop_flat_map(|d| (1..=d / 2, Just(d))), 1..=max_n)
            .prop_map(|v| ParamVector::new(v.into_iter().map(|(a, b)| ratio(a, b)).collect()).unwrap())
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn psi_antisymmetric_and_monotone(a in 0.0f64..=1.0, b in 0.0f64..=1.0) {
            prop_assert!((psi(a).unwrap() + psi(1.0 - a).unwrap()).abs() < 1e-15);
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            prop_assert!(psi(lo).unwrap() >= psi(hi).unwrap() - 1e-15);
        }

        #[test]
        fn psi_q_is_odd(x in -1.0f64..=1.0, q in 0.05f64..4.0) {
            prop_assume!((q - 1.0).abs() > 1e-6);
            prop_assert!((psi_q(x, q).unwrap() + psi_q(-x, q).unwrap()).abs() < 1e-12);
        }

        #[test]
        fn derivative_forms_agree_at_half(prefix in constrained(10)) {
            let g = pmf(&prefix, Backend::Exact);
            let f = shifted_mixture(&g, &rational::half()).unwrap();
            let profile = mixing::mixing_profile(&g).unwrap();
            let a = shannon_derivative_direct(&g, &f).unwrap();
            let b = shannon_derivative_mixing(&f, &profile).unwrap();
            prop_assert!((a - b).abs() <= 1e-12);
            prop_assert!(a.abs() <= SHANNON_DERIVATIVE_BOUND + 1e-12);
            prop_assert!(shannon_second_derivative(&g, &f).unwrap() < 0.0);
        }

        #[test]
        fn fd_matches_analytic(params in constrained(8), q in prop::sample::select(vec![1.0, 0.5, 1.5, 2.0, 3.0])) {
            let path = SheppOlkinPath::from_params(&params).unwrap();
            let order = if q == 1.0 { EntropyOrder::shannon() } else { EntropyOrder::new(Family::Tsallis, q).unwrap() };
            let an = derivative(&path, order, Method::Direct).unwrap();
            let fd = finite_difference(&path, order, DEFAULT_STEP).unwrap();
            prop_assert!(close(an.first, fd.first, DEFAULT_FD_RTOL, 1e-10), "{} vs {}", an.first, fd.first);
            prop_assert!(close(an.second, fd.second, DEFAULT_FD_RTOL, 1e-8), "{} vs {}", an.second, fd.second);
        }

        #[test]
        fn derivative_larger_for_smaller_pn(prefix in constrained(8), a in 1i64..50, b in 1i64..=50) {
            prop_assume!(a < b);
            let g = pmf(&prefix, Backend::Exact);
            let at = |p: Rational| {
                let f = shifted_mixture(&g, &p).unwrap();
                shannon_derivative_direct(&g, &f).unwrap()
            };
            prop_assert!(at(ratio(a, 100)) > at(ratio(b, 100)));
        }

        #[test]
        fn collision_form_for_unconstrained_g(v in prop::collection::vec((2i64..=30).prop_flat_map(|d| (1..d, Just(d))), 0..8),
                                              p in (2i64..=30).prop_flat_map(|d| (1..d, Just(d)))) {
            let params = ParamVector::new(v.into_iter().map(|(a, b)| ratio(a, b)).collect()).unwrap();
            let g = pmf(&params, Backend::Exact);
            let p_n = ratio(p.0, p.1);
            let f = shifted_mixture(&g, &p_n).unwrap();
            let d = tsallis_derivative(&g, &f, 2.0).unwrap();
            let closed = rational::to_f64(&collision_derivative_exact(&g, &p_n).unwrap());
            prop_assert!((d - closed).abs() <= 1e-12);
        }
    }
}
