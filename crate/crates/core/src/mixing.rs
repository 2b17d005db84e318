//! Mixing coefficients and the S-chain.
//!
//! For a mass function `g` on `{0, …, n−1}` and `f = (g(k) + g(k−1)) / 2`
//! (one extra fair coin), the mixing coefficients are
//! `α_k = g(k−1) / (g(k−1) + g(k))` and `β_k = α_k − 1/2`, so that
//! `g(k) = α_{k+1} f(k+1) + (1 − α_k) f(k)`.
//!
//! The sign-critical sums ([`odd_central_moment`], [`s_chain`]) are
//! homogeneous in α and β. They are evaluated on integer numerators over a
//! shared denominator and divided out once at the end, which keeps the
//! exact arithmetic free of per-operation gcd reductions. The generic
//! kernels are the same ones the rational API uses.

use std::ops::Sub;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::bernoulli::{self, at, MassFunction};
use crate::error::{Error, Result};
use crate::rational::{self, Rational};

/// Scalars the kernels run on: exact rationals or integer numerators.
pub trait Ring: Clone + Zero + One + Sub<Output = Self> {}

impl<T: Clone + Zero + One + Sub<Output = T>> Ring for T {}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MixingProfile {
    #[serde(with = "rational::serde_rational_vec")]
    pub alphas: Vec<Rational>,
    #[serde(with = "rational::serde_rational_vec")]
    pub betas: Vec<Rational>,
    /// Support degree of `f`; `alphas` has `n + 1` entries.
    pub n: usize,
}

impl MixingProfile {
    /// `α_{k+1} − α_k` for `k = 0..n`.
    pub fn spacings(&self) -> Vec<Rational> {
        self.alphas.windows(2).map(|w| &w[1] - &w[0]).collect()
    }

    pub fn is_strictly_increasing(&self) -> bool {
        self.alphas.windows(2).all(|w| w[0] < w[1])
    }
}

/// Mixing coefficients of `g` at `p_n = 1/2`.
pub fn mixing_profile(g: &MassFunction) -> Result<MixingProfile> {
    let g = g.exact("mixing_profile")?;
    if let Some(index) = g.iter().position(|x| !x.is_positive()) {
        return Err(Error::ZeroMass { index });
    }
    let n = g.len();
    let half = rational::half();
    let alphas: Vec<Rational> = (0..=n as isize)
        .map(|k| {
            let prev = at(g, k - 1);
            let cur = at(g, k);
            &prev / (&prev + cur)
        })
        .collect();
    let betas = alphas.iter().map(|a| a - &half).collect();
    Ok(MixingProfile { alphas, betas, n })
}

pub(crate) fn a_product_in<T: Ring>(alphas: &[T], p: usize, k: usize) -> T {
    if p == 0 {
        return T::one();
    }
    if p > k {
        return T::zero();
    }
    (0..p).fold(T::one(), |acc, j| acc * alphas[k - j].clone())
}

pub(crate) fn b_product_in<T: Ring>(betas: &[T], p: usize, k: usize) -> T {
    (0..p).fold(T::one(), |acc, j| {
        acc * (betas[k + 1].clone() - betas[k - j].clone())
    })
}

/// Complete homogeneous polynomial of degree `m`, by dynamic programming
/// over prefixes of `xs`.
pub(crate) fn q_poly_in<T: Ring>(m: i64, xs: &[T]) -> T {
    if m < 0 {
        return T::zero();
    }
    let m = m as usize;
    let mut h = vec![T::zero(); m + 1];
    h[0] = T::one();
    for x in xs {
        for d in 1..=m {
            let step = x.clone() * h[d - 1].clone();
            h[d] = h[d].clone() + step;
        }
    }
    h.swap_remove(m)
}

/// `A_p(k) = α_k α_{k−1} ⋯ α_{k−p+1}`, zero when `p ≥ k + 1`.
pub fn a_product(profile: &MixingProfile, p: usize, k: usize) -> Result<Rational> {
    if k > profile.n {
        return Err(Error::KOutOfRange { k, n: profile.n });
    }
    Ok(a_product_in(&profile.alphas, p, k))
}

/// `B_p(k) = ∏_{j<p} (β_{k+1} − β_{k−j})`, defined only for
/// `p ≤ k + 1 ≤ n` (and everywhere for `p = 0`).
pub fn b_product(profile: &MixingProfile, p: usize, k: usize) -> Result<Rational> {
    if p == 0 {
        return Ok(Rational::one());
    }
    if p > k + 1 || k + 1 > profile.n {
        return Err(Error::BUndefined { p, k, n: profile.n });
    }
    Ok(b_product_in(&profile.betas, p, k))
}

/// `Q_{m,p}(x_1, …, x_p)`: the sum of all monomials of total degree `m`.
pub fn q_poly(m: i64, xs: &[Rational]) -> Result<Rational> {
    if xs.is_empty() {
        return Err(Error::EmptyArguments);
    }
    if m < -1 {
        return Err(Error::NegativeDegree { m });
    }
    Ok(q_poly_in(m, xs))
}

/// Integer numerators of a rational sequence over their least common
/// denominator.
pub(crate) fn lift(xs: &[Rational]) -> (Vec<BigInt>, BigInt) {
    let den = bernoulli::common_denominator(xs);
    let nums = xs
        .iter()
        .map(|x| x.numer() * (&den / x.denom()))
        .collect();
    (nums, den)
}

/// α and β numerators over one shared denominator `d`.
pub(crate) struct LiftedProfile {
    pub alphas: Vec<BigInt>,
    pub betas: Vec<BigInt>,
    pub d: BigInt,
}

impl LiftedProfile {
    pub fn new(profile: &MixingProfile) -> Self {
        let d = profile
            .alphas
            .iter()
            .chain(&profile.betas)
            .fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
        let scale = |x: &Rational| x.numer() * (&d / x.denom());
        Self {
            alphas: profile.alphas.iter().map(scale).collect(),
            betas: profile.betas.iter().map(scale).collect(),
            d,
        }
    }
}

fn check_order(r: usize) -> Result<()> {
    if r == 0 {
        Err(Error::ZeroOrder)
    } else {
        Ok(())
    }
}

fn check_f_len(f: &[Rational], profile: &MixingProfile) -> Result<()> {
    if f.len() != profile.n + 1 {
        return Err(Error::LengthMismatch {
            what: "f against profile",
            expected: profile.n + 1,
            got: f.len(),
        });
    }
    Ok(())
}

pub(crate) fn moment_numerator(f: &[BigInt], betas: &[BigInt], r: usize) -> BigInt {
    f.iter()
        .zip(betas)
        .map(|(fk, b)| fk * num_traits::pow(b.clone(), 2 * r + 1))
        .sum()
}

/// `M_r = Σ_k f(k) β_k^{2r+1}`.
pub fn odd_central_moment(f: &MassFunction, profile: &MixingProfile, r: usize) -> Result<Rational> {
    check_order(r)?;
    let f = f.exact("odd_central_moment")?;
    check_f_len(f, profile)?;
    let (f_num, f_den) = lift(f);
    let lifted = LiftedProfile::new(profile);
    let num = moment_numerator(&f_num, &lifted.betas, r);
    Ok(Rational::new(
        num,
        f_den * num_traits::pow(lifted.d, 2 * r + 1),
    ))
}

/// One term family of the chain, on any scalar ring:
/// `Σ_{k=p−1}^{n−1} g(k) A_{p−1}(k) B_p(k) Q_{r−p,p+1}(β²_{k+1},…,β²_{k−p+1}) (β_{k+1} + β_{k−p+1})`.
pub(crate) fn s_value_in<T: Ring>(g: &[T], alphas: &[T], betas: &[T], r: usize, p: usize) -> T {
    let n = g.len();
    let mut total = T::zero();
    for k in (p - 1)..n {
        let squares: Vec<T> = (0..=p)
            .map(|j| {
                let b = betas[k + 1 - j].clone();
                b.clone() * b
            })
            .collect();
        let q = q_poly_in(r as i64 - p as i64, &squares);
        if q.is_zero() {
            continue;
        }
        let term = g[k].clone()
            * a_product_in(alphas, p - 1, k)
            * b_product_in(betas, p, k)
            * q
            * (betas[k + 1].clone() + betas[k + 1 - p].clone());
        total = total + term;
    }
    total
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SChainReport {
    pub r: usize,
    /// `S_{r,p}` for `p = 1..=r+1`.
    #[serde(with = "rational::serde_rational_vec")]
    pub s_values: Vec<Rational>,
    /// `M_r`.
    #[serde(with = "rational::serde_rational")]
    pub moment: Rational,
    /// `S_{r,1} ≤ S_{r,2} ≤ … ≤ S_{r,r+1} = 0`.
    pub chain_monotone: bool,
    /// `M_r = 0`.
    pub equality_attained: bool,
    /// `4 M_r = S_{r,1}`.
    pub moment_identity: bool,
}

impl SChainReport {
    /// Smallest step `S_{r,p+1} − S_{r,p}`.
    pub fn min_gap(&self) -> Option<Rational> {
        self.s_values
            .windows(2)
            .map(|w| &w[1] - &w[0])
            .min()
    }
}

/// The values `S_{r,1}, …, S_{r,r+1}` together with `M_r`.
pub fn s_chain(
    g: &MassFunction,
    f: &MassFunction,
    profile: &MixingProfile,
    r: usize,
) -> Result<SChainReport> {
    check_order(r)?;
    let g_exact = g.exact("s_chain")?;
    let f_exact = f.exact("s_chain")?;
    if *f != bernoulli::shifted_mixture(g, &rational::half())? {
        return Err(Error::Inconsistent(
            "f is not g convolved with a fair coin".into(),
        ));
    }
    if *profile != mixing_profile(g)? {
        return Err(Error::Inconsistent("profile was not built from g".into()));
    }
    Ok(s_chain_unchecked(g_exact, f_exact, profile, r))
}

pub(crate) fn s_chain_unchecked(
    g: &[Rational],
    f: &[Rational],
    profile: &MixingProfile,
    r: usize,
) -> SChainReport {
    let (g_num, g_den) = lift(g);
    let (f_num, f_den) = lift(f);
    let lifted = LiftedProfile::new(profile);
    chain_from_lifted(&g_num, &g_den, &f_num, &f_den, &lifted, r)
}

pub(crate) fn chain_from_lifted(
    g_num: &[BigInt],
    g_den: &BigInt,
    f_num: &[BigInt],
    f_den: &BigInt,
    lifted: &LiftedProfile,
    r: usize,
) -> SChainReport {
    // Every S_{r,p} is homogeneous of degree 2r in (α, β), so all of them
    // share the denominator g_den · d^{2r}.
    let chain_den = g_den * num_traits::pow(lifted.d.clone(), 2 * r);
    let s_nums: Vec<BigInt> = (1..=r + 1)
        .map(|p| s_value_in(g_num, &lifted.alphas, &lifted.betas, r, p))
        .collect();
    let m_num = moment_numerator(f_num, &lifted.betas, r);
    let m_den = f_den * num_traits::pow(lifted.d.clone(), 2 * r + 1);

    let chain_monotone =
        s_nums.windows(2).all(|w| w[0] <= w[1]) && s_nums.last().is_some_and(|s| s.is_zero());
    // 4 m_num / m_den == s_1 / chain_den
    let moment_identity = BigInt::from(4) * &m_num * &chain_den == &s_nums[0] * &m_den;
    let equality_attained = m_num.is_zero();
    SChainReport {
        r,
        s_values: s_nums
            .into_iter()
            .map(|s| Rational::new(s, chain_den.clone()))
            .collect(),
        moment: Rational::new(m_num, m_den),
        chain_monotone,
        equality_attained,
        moment_identity,
    }
}

/// A finite table `v(offset), …, v(offset + len − 1)`.
#[derive(Clone, Debug, PartialEq)]
pub struct IndexedTable {
    pub offset: usize,
    pub values: Vec<Rational>,
}

impl IndexedTable {
    pub fn new(offset: usize, values: Vec<Rational>) -> Self {
        Self { offset, values }
    }

    pub fn get(&self, k: usize) -> Option<&Rational> {
        k.checked_sub(self.offset).and_then(|i| self.values.get(i))
    }

    /// Index range covered by the table.
    pub fn range(&self) -> std::ops::Range<usize> {
        self.offset..self.offset + self.values.len()
    }

    /// Left difference `∇v(k) = v(k) − v(k−1)`, defined from `offset + 1`.
    pub fn nabla(&self) -> IndexedTable {
        IndexedTable {
            offset: self.offset + 1,
            values: self.values.windows(2).map(|w| &w[1] - &w[0]).collect(),
        }
    }

    /// Pointwise product on the common index range.
    pub fn product(&self, other: &IndexedTable) -> IndexedTable {
        let lo = self.offset.max(other.offset);
        let hi = self.range().end.min(other.range().end);
        IndexedTable {
            offset: lo,
            values: (lo..hi.max(lo))
                .map(|k| self.get(k).unwrap() * other.get(k).unwrap())
                .collect(),
        }
    }
}

/// `LHS − RHS` of the summation-by-parts identity
/// `Σ_{k=p}^{n−1} g(k)A_p(k)v(k)(β_{k+1}+β_{k−p}) = Σ_{k=p+1}^{n−1} g(k)A_{p+1}(k)∇v(k)`.
#[allow(clippy::needless_range_loop)]
pub fn ipp_residual(
    g: &MassFunction,
    profile: &MixingProfile,
    p: usize,
    v: &IndexedTable,
) -> Result<Rational> {
    let g = g.exact("ipp_residual")?;
    let n = profile.n;
    if g.len() != n {
        return Err(Error::LengthMismatch {
            what: "g against profile",
            expected: n,
            got: g.len(),
        });
    }
    let expected_len = n.saturating_sub(p);
    if v.offset != p || v.values.len() != expected_len {
        return Err(Error::LengthMismatch {
            what: "v table on p..n-1",
            expected: expected_len,
            got: v.values.len(),
        });
    }
    let betas = &profile.betas;
    let mut lhs = Rational::zero();
    for k in p..n {
        lhs += &g[k]
            * a_product_in(&profile.alphas, p, k)
            * v.get(k).unwrap()
            * (&betas[k + 1] + &betas[k - p]);
    }
    let nabla = v.nabla();
    let mut rhs = Rational::zero();
    for k in (p + 1)..n {
        rhs += &g[k] * a_product_in(&profile.alphas, p + 1, k) * nabla.get(k).unwrap();
    }
    Ok(lhs - rhs)
}
