//! Poisson–binomial mass functions.
//!
//! A [`ParamVector`] holds the Bernoulli parameters `p_1..p_n`; [`pmf`]
//! builds the law of `B_1 + … + B_n` by left-to-right convolution with
//! `[1 − p_i, p_i]`. Reads outside `0..=n` are total and return zero.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::rational::{self, Rational};

/// Largest `n` accepted by [`brute_force_pmf`].
pub const BRUTE_FORCE_LIMIT: usize = 20;

/// Tolerance on the total mass of a float-backend mass function.
pub const FLOAT_NORMALIZATION_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct ParamVector {
    probs: Vec<Rational>,
}

impl ParamVector {
    pub fn new(probs: Vec<Rational>) -> Result<Self> {
        if let Some(bad) = probs.iter().find(|p| !rational::is_in_unit_interval(p)) {
            return Err(Error::ProbabilityOutOfRange {
                value: rational::format(bad),
            });
        }
        Ok(Self { probs })
    }

    pub fn empty() -> Self {
        Self::default()
    }

    /// Parses each literal with [`rational::parse`].
    pub fn parse<S: AsRef<str>>(literals: &[S]) -> Result<Self> {
        let probs = literals
            .iter()
            .map(|s| rational::parse(s.as_ref()))
            .collect::<Result<Vec<_>>>()?;
        Self::new(probs)
    }

    pub fn probs(&self) -> &[Rational] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn last(&self) -> Option<&Rational> {
        self.probs.last()
    }

    /// All entries lie in `(0, 1/2]`.
    pub fn half_constrained(&self) -> bool {
        let half = rational::half();
        self.probs.iter().all(|p| p.is_positive() && *p <= half)
    }

    /// Position (0-based) of the first entry outside `(0, 1/2]`.
    pub fn first_unconstrained(&self) -> Option<usize> {
        let half = rational::half();
        self.probs
            .iter()
            .position(|p| !(p.is_positive() && *p <= half))
    }

    /// Some entry equals 0 or 1.
    pub fn has_degenerate(&self) -> bool {
        self.probs.iter().any(|p| p.is_zero() || p.is_one())
    }

    /// Removes zero entries; returns the remaining vector and how many were dropped.
    pub fn strip_zeros(&self) -> (ParamVector, usize) {
        let kept: Vec<Rational> = self.probs.iter().filter(|p| !p.is_zero()).cloned().collect();
        let dropped = self.probs.len() - kept.len();
        (ParamVector { probs: kept }, dropped)
    }

    pub fn with_last(&self, p: Rational) -> Result<ParamVector> {
        let mut probs = self.probs.clone();
        match probs.last_mut() {
            Some(last) => *last = p,
            None => return Err(Error::EmptyParams),
        }
        ParamVector::new(probs)
    }

    pub fn push(&self, p: Rational) -> Result<ParamVector> {
        let mut probs = self.probs.clone();
        probs.push(p);
        ParamVector::new(probs)
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.probs.iter().map(rational::to_f64).collect()
    }

    pub fn to_strings(&self) -> Vec<String> {
        self.probs.iter().map(rational::format).collect()
    }
}

impl std::fmt::Display for ParamVector {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({})", self.to_strings().join(", "))
    }
}

impl Serialize for ParamVector {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        rational::serde_rational_vec::serialize(&self.probs, s)
    }
}

impl<'de> Deserialize<'de> for ParamVector {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let probs = rational::serde_rational_vec::deserialize(d)?;
        ParamVector::new(probs).map_err(serde::de::Error::custom)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Backend {
    Exact,
    Float,
}

/// A mass function on `{0, …, n}`.
#[derive(Clone, Debug, PartialEq)]
pub enum MassFunction {
    Exact(Vec<Rational>),
    Float(Vec<f64>),
}

impl MassFunction {
    pub fn point_mass(backend: Backend) -> Self {
        match backend {
            Backend::Exact => MassFunction::Exact(vec![Rational::one()]),
            Backend::Float => MassFunction::Float(vec![1.0]),
        }
    }

    pub fn backend(&self) -> Backend {
        match self {
            MassFunction::Exact(_) => Backend::Exact,
            MassFunction::Float(_) => Backend::Float,
        }
    }

    pub fn len(&self) -> usize {
        match self {
            MassFunction::Exact(m) => m.len(),
            MassFunction::Float(m) => m.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Largest index of the support, `n`.
    pub fn degree(&self) -> usize {
        self.len().saturating_sub(1)
    }

    /// The exact masses, or an error naming `op` for the float backend.
    pub fn exact(&self, op: &'static str) -> Result<&[Rational]> {
        match self {
            MassFunction::Exact(m) => Ok(m),
            MassFunction::Float(_) => Err(Error::FloatBackend { op }),
        }
    }

    /// Mass at `k`, zero outside `0..=n`.
    pub fn exact_at(&self, k: isize) -> Result<Rational> {
        Ok(at(self.exact("exact_at")?, k))
    }

    /// Mass at `k` as binary64, zero outside `0..=n`.
    pub fn float_at(&self, k: isize) -> f64 {
        if k < 0 || k as usize >= self.len() {
            return 0.0;
        }
        match self {
            MassFunction::Exact(m) => rational::to_f64(&m[k as usize]),
            MassFunction::Float(m) => m[k as usize],
        }
    }

    pub fn to_f64(&self) -> Vec<f64> {
        match self {
            MassFunction::Exact(m) => m.iter().map(rational::to_f64).collect(),
            MassFunction::Float(m) => m.clone(),
        }
    }

    pub fn to_float(&self) -> MassFunction {
        MassFunction::Float(self.to_f64())
    }

    /// Non-negative and summing to 1 (exactly, or within
    /// [`FLOAT_NORMALIZATION_TOL`] for floats).
    pub fn is_normalized(&self) -> bool {
        match self {
            MassFunction::Exact(m) => {
                m.iter().all(|x| !x.is_negative())
                    && m.iter().fold(Rational::zero(), |acc, x| acc + x).is_one()
            }
            MassFunction::Float(m) => {
                m.iter().all(|&x| x >= 0.0)
                    && (m.iter().sum::<f64>() - 1.0).abs() <= FLOAT_NORMALIZATION_TOL
            }
        }
    }

    pub fn to_strings(&self) -> Vec<String> {
        match self {
            MassFunction::Exact(m) => m.iter().map(rational::format).collect(),
            MassFunction::Float(m) => m.iter().map(|x| format!("{x}")).collect(),
        }
    }
}

impl Serialize for MassFunction {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("MassFunction", 2)?;
        st.serialize_field("backend", &self.backend())?;
        match self {
            MassFunction::Exact(m) => st.serialize_field(
                "masses",
                &m.iter().map(rational::format).collect::<Vec<_>>(),
            )?,
            MassFunction::Float(m) => st.serialize_field("masses", m)?,
        }
        st.end()
    }
}

/// Zero-extended read.
pub(crate) fn at(xs: &[Rational], k: isize) -> Rational {
    if k < 0 {
        return Rational::zero();
    }
    xs.get(k as usize).cloned().unwrap_or_else(Rational::zero)
}

/// Mass function of `B_1 + … + B_n`.
pub fn pmf(params: &ParamVector, backend: Backend) -> MassFunction {
    match backend {
        Backend::Exact => {
            let mut f = vec![Rational::one()];
            for p in params.probs() {
                f = convolve_exact(&f, p);
            }
            MassFunction::Exact(f)
        }
        Backend::Float => {
            let mut f = vec![1.0];
            for p in params.to_f64() {
                f = convolve_float(&f, p);
            }
            MassFunction::Float(f)
        }
    }
}

fn convolve_exact(g: &[Rational], p: &Rational) -> Vec<Rational> {
    let q = Rational::one() - p;
    (0..=g.len() as isize)
        .map(|k| &q * at(g, k) + p * at(g, k - 1))
        .collect()
}

fn convolve_float(g: &[f64], p: f64) -> Vec<f64> {
    let read = |k: isize| -> f64 {
        if k < 0 {
            0.0
        } else {
            g.get(k as usize).copied().unwrap_or(0.0)
        }
    };
    (0..=g.len() as isize)
        .map(|k| (1.0 - p) * read(k) + p * read(k - 1))
        .collect()
}

/// Exact mass function by explicit enumeration of all `2^n` outcome
/// vectors. Independent of the convolution in [`pmf`].
pub fn brute_force_pmf(params: &ParamVector) -> Result<MassFunction> {
    let n = params.len();
    if n > BRUTE_FORCE_LIMIT {
        return Err(Error::SizeLimit {
            n,
            limit: BRUTE_FORCE_LIMIT,
        });
    }
    // p_i = a_i / d_i; every outcome weight shares the denominator prod d_i.
    let (heads, tails): (Vec<BigInt>, Vec<BigInt>) = params
        .probs()
        .iter()
        .map(|p| (p.numer().clone(), p.denom() - p.numer()))
        .unzip();
    let common: BigInt = params.probs().iter().map(|p| p.denom().clone()).product();
    let mut totals = vec![BigInt::zero(); n + 1];
    for outcome in 0u32..(1u32 << n) {
        let mut weight = BigInt::one();
        for i in 0..n {
            if outcome >> i & 1 == 1 {
                weight *= &heads[i];
            } else {
                weight *= &tails[i];
            }
        }
        totals[outcome.count_ones() as usize] += weight;
    }
    Ok(MassFunction::Exact(
        totals
            .into_iter()
            .map(|t| Rational::new(t, common.clone()))
            .collect(),
    ))
}

/// Parameters of `g`: everything but the moving last coordinate.
pub fn drop_last(params: &ParamVector) -> Result<ParamVector> {
    match params.probs().split_last() {
        Some((_, rest)) => Ok(ParamVector {
            probs: rest.to_vec(),
        }),
        None => Err(Error::EmptyParams),
    }
}

/// Removes the `i`-th entry (1-based).
pub fn leave_one_out(params: &ParamVector, i: usize) -> Result<ParamVector> {
    if i == 0 || i > params.len() {
        return Err(Error::IndexOutOfRange {
            index: i,
            len: params.len(),
        });
    }
    let mut probs = params.probs().to_vec();
    probs.remove(i - 1);
    Ok(ParamVector { probs })
}

/// `(1 − p) g(k) + p g(k − 1)`: convolution with one more Bernoulli(p).
pub fn shifted_mixture(g: &MassFunction, p: &Rational) -> Result<MassFunction> {
    if !rational::is_in_unit_interval(p) {
        return Err(Error::ProbabilityOutOfRange {
            value: rational::format(p),
        });
    }
    Ok(match g {
        MassFunction::Exact(m) => MassFunction::Exact(convolve_exact(m, p)),
        MassFunction::Float(m) => MassFunction::Float(convolve_float(m, rational::to_f64(p))),
    })
}

/// A path that moves only the last coordinate: `p_n(t) = base + t`.
#[derive(Clone, Debug, PartialEq)]
pub struct SheppOlkinPath {
    prefix: ParamVector,
    base: Rational,
}

impl SheppOlkinPath {
    pub fn new(prefix: ParamVector, base: Rational) -> Result<Self> {
        if !rational::is_in_unit_interval(&base) {
            return Err(Error::ProbabilityOutOfRange {
                value: rational::format(&base),
            });
        }
        Ok(Self { prefix, base })
    }

    /// Splits off the last coordinate as the moving one.
    pub fn from_params(params: &ParamVector) -> Result<Self> {
        let base = params.last().cloned().ok_or(Error::EmptyParams)?;
        Self::new(drop_last(params)?, base)
    }

    pub fn prefix(&self) -> &ParamVector {
        &self.prefix
    }

    pub fn base(&self) -> &Rational {
        &self.base
    }

    /// Parameters at offset `t`; fails when `base + t` leaves `[0, 1]`.
    pub fn params_at(&self, t: &Rational) -> Result<ParamVector> {
        self.prefix.push(&self.base + t)
    }

    /// Exact mass function at offset `t`.
    pub fn pmf_at(&self, t: &Rational) -> Result<MassFunction> {
        Ok(pmf(&self.params_at(t)?, Backend::Exact))
    }

    /// `g`, the law of the fixed coordinates.
    pub fn g(&self, backend: Backend) -> MassFunction {
        pmf(&self.prefix, backend)
    }
}

/// Log-concavity minors of a mass function `g` on `{0, …, m−1}`:
/// `D(k) = g(k)² − g(k+1)g(k−1)` for `k < m` and
/// `E(k) = g(k)g(k+1) − g(k+2)g(k−1)` for `k < m − 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct MinorSequence {
    pub d_values: Vec<Rational>,
    pub e_values: Vec<Rational>,
}

pub fn minors(g: &MassFunction) -> Result<MinorSequence> {
    let g = g.exact("minors")?;
    let m = g.len() as isize;
    Ok(MinorSequence {
        d_values: (0..m).map(|k| d_minor(g, k)).collect(),
        e_values: (0..m - 1).map(|k| e_minor(g, k)).collect(),
    })
}

/// `D_g(k)` at any integer `k` (zero-extended).
pub fn d_minor(g: &[Rational], k: isize) -> Rational {
    let gk = at(g, k);
    &gk * &gk - at(g, k + 1) * at(g, k - 1)
}

/// `E_g(k)` at any integer `k` (zero-extended).
pub fn e_minor(g: &[Rational], k: isize) -> Rational {
    at(g, k) * at(g, k + 1) - at(g, k + 2) * at(g, k - 1)
}

/// `Σ p_i (1 − p_i)(1 − 2 p_i)`, the third central moment of the sum.
pub fn third_central_moment(params: &ParamVector) -> Rational {
    let one = Rational::one();
    let two = rational::int(2);
    params
        .probs()
        .iter()
        .map(|p| p * (&one - p) * (&one - &two * p))
        .fold(Rational::zero(), |acc, x| acc + x)
}

/// Least common multiple of the denominators, used to lift a mass
/// function onto integers.
pub(crate) fn common_denominator(xs: &[Rational]) -> BigInt {
    xs.iter()
        .fold(BigInt::one(), |acc, x| acc.lcm(x.denom()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, ratio};
    use proptest::prelude::*;

    fn pv(xs: &[(i64, i64)]) -> ParamVector {
        ParamVector::new(xs.iter().map(|&(a, b)| ratio(a, b)).collect()).unwrap()
    }

    fn exact(xs: &[(i64, i64)]) -> MassFunction {
        MassFunction::Exact(xs.iter().map(|&(a, b)| ratio(a, b)).collect())
    }

    #[test]
    fn pmf_examples() {
        assert_eq!(pmf(&ParamVector::empty(), Backend::Exact), exact(&[(1, 1)]));
        assert_eq!(pmf(&pv(&[(1, 2)]), Backend::Exact), exact(&[(1, 2), (1, 2)]));
        assert_eq!(
            pmf(&pv(&[(1, 5), (3, 10), (1, 2)]), Backend::Exact),
            exact(&[(7, 25), (47, 100), (11, 50), (3, 100)])
        );
    }

    #[test]
    fn brute_force_examples() {
        assert_eq!(
            brute_force_pmf(&pv(&[(1, 2), (1, 2)])).unwrap(),
            exact(&[(1, 4), (1, 2), (1, 4)])
        );
        assert_eq!(brute_force_pmf(&pv(&[(1, 4)])).unwrap(), exact(&[(3, 4), (1, 4)]));
        assert_eq!(
            brute_force_pmf(&pv(&[(1, 5), (3, 10), (1, 2)])).unwrap(),
            exact(&[(7, 25), (47, 100), (11, 50), (3, 100)])
        );
    }

    #[test]
    fn brute_force_refuses_large_n() {
        let params = ParamVector::new(vec![rational::half(); 21]).unwrap();
        assert_eq!(
            brute_force_pmf(&params),
            Err(Error::SizeLimit { n: 21, limit: 20 })
        );
    }

    #[test]
    fn rejects_out_of_range_probabilities() {
        assert!(ParamVector::new(vec![ratio(3, 2)]).is_err());
        assert!(ParamVector::new(vec![ratio(-1, 2)]).is_err());
        assert!(ParamVector::new(vec![int(0), int(1)]).is_ok());
    }

    #[test]
    fn drop_last_and_leave_one_out() {
        let p = pv(&[(1, 5), (3, 10), (1, 2)]);
        assert_eq!(drop_last(&p).unwrap(), pv(&[(1, 5), (3, 10)]));
        assert_eq!(drop_last(&pv(&[(1, 2)])).unwrap(), ParamVector::empty());
        assert_eq!(drop_last(&pv(&[(1, 4), (1, 2)])).unwrap(), pv(&[(1, 4)]));
        assert_eq!(drop_last(&ParamVector::empty()), Err(Error::EmptyParams));

        let q = pv(&[(1, 5), (3, 10)]);
        assert_eq!(leave_one_out(&q, 1).unwrap(), pv(&[(3, 10)]));
        assert_eq!(leave_one_out(&q, 2).unwrap(), pv(&[(1, 5)]));
        assert_eq!(leave_one_out(&pv(&[(1, 3)]), 1).unwrap(), ParamVector::empty());
        assert!(leave_one_out(&q, 0).is_err());
        assert!(leave_one_out(&q, 3).is_err());
    }

    #[test]
    fn shifted_mixture_examples() {
        let p = ratio(1, 3);
        let point = exact(&[(1, 1), (0, 1), (0, 1)]);
        assert_eq!(
            shifted_mixture(&point, &p).unwrap(),
            exact(&[(2, 3), (1, 3), (0, 1), (0, 1)])
        );
        assert_eq!(
            shifted_mixture(&exact(&[(3, 4), (1, 4)]), &rational::half()).unwrap(),
            exact(&[(3, 8), (1, 2), (1, 8)])
        );
        let g = exact(&[(3, 4), (1, 4)]);
        assert_eq!(
            shifted_mixture(&g, &int(0)).unwrap(),
            exact(&[(3, 4), (1, 4), (0, 1)])
        );
        assert!(shifted_mixture(&g, &ratio(5, 4)).is_err());
    }

    #[test]
    fn zero_extension_reads() {
        let f = exact(&[(1, 4), (1, 2), (1, 4)]);
        assert_eq!(f.exact_at(-1).unwrap(), int(0));
        assert_eq!(f.exact_at(3).unwrap(), int(0));
        assert_eq!(f.float_at(-1), 0.0);
        assert_eq!(f.float_at(1), 0.5);
    }

    #[test]
    fn minors_examples() {
        // D(1) = (1/2)^2 - (1/4)(1/4) = 3/16.
        let m = minors(&exact(&[(1, 4), (1, 2), (1, 4)])).unwrap();
        assert_eq!(m.d_values, vec![ratio(1, 16), ratio(3, 16), ratio(1, 16)]);
        assert_eq!(m.e_values, vec![ratio(1, 8), ratio(1, 8)]);

        let m = minors(&exact(&[(1, 1), (0, 1)])).unwrap();
        assert_eq!(m.d_values, vec![int(1), int(0)]);

        let m = minors(&exact(&[(3, 4), (1, 4)])).unwrap();
        assert_eq!(m.d_values, vec![ratio(9, 16), ratio(1, 16)]);

        assert!(minors(&MassFunction::Float(vec![0.5, 0.5])).is_err());
    }

    #[test]
    fn half_constraint_predicate() {
        assert!(pv(&[(1, 2), (1, 10)]).half_constrained());
        assert!(!pv(&[(0, 1), (1, 2)]).half_constrained());
        assert!(!pv(&[(3, 5)]).half_constrained());
        assert_eq!(pv(&[(1, 2), (3, 5)]).first_unconstrained(), Some(1));
        let (stripped, dropped) = pv(&[(0, 1), (1, 2), (0, 1)]).strip_zeros();
        assert_eq!(stripped, pv(&[(1, 2)]));
        assert_eq!(dropped, 2);
    }

    #[test]
    fn third_moment_matches_pmf() {
        let p = pv(&[(1, 5), (3, 10), (1, 2), (1, 7)]);
        let f = pmf(&p, Backend::Exact);
        let f = f.exact("t").unwrap();
        let mean: Rational = p.probs().iter().fold(int(0), |a, x| a + x);
        let third = f.iter().enumerate().fold(int(0), |acc, (k, m)| {
            let d = int(k as i64) - &mean;
            acc + m * &d * &d * &d
        });
        assert_eq!(third, third_central_moment(&p));
    }

    #[test]
    fn float_backend_matches_exact() {
        let p = pv(&[(1, 5), (3, 10), (1, 2)]);
        let e = pmf(&p, Backend::Exact).to_f64();
        let f = pmf(&p, Backend::Float).to_f64();
        for (a, b) in e.iter().zip(&f) {
            assert!((a - b).abs() < 1e-15);
        }
        assert!(pmf(&p, Backend::Float).is_normalized());
    }

    fn params_strategy(max_n: usize) -> impl Strategy<Value = ParamVector> {
        prop::collection::vec((1i64..=30).prop_flat_map(|d| (0..=d, Just(d))), 0..=max_n)
            .prop_map(|v| ParamVector::new(v.into_iter().map(|(a, b)| ratio(a, b)).collect()).unwrap())
    }

    fn open_params_strategy(max_n: usize) -> impl Strategy<Value = ParamVector> {
        prop::collection::vec((2i64..=30).prop_flat_map(|d| (1..d, Just(d))), 1..=max_n)
            .prop_map(|v| ParamVector::new(v.into_iter().map(|(a, b)| ratio(a, b)).collect()).unwrap())
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn convolution_matches_enumeration(params in params_strategy(10)) {
            prop_assert_eq!(pmf(&params, Backend::Exact), brute_force_pmf(&params).unwrap());
        }

        #[test]
        fn exact_pmf_is_normalized(params in params_strategy(12)) {
            prop_assert!(pmf(&params, Backend::Exact).is_normalized());
        }

        #[test]
        fn composition_with_last_coordinate(params in open_params_strategy(10)) {
            let g = pmf(&drop_last(&params).unwrap(), Backend::Exact);
            let f = shifted_mixture(&g, params.last().unwrap()).unwrap();
            prop_assert_eq!(f, pmf(&params, Backend::Exact));
        }

        #[test]
        fn convolution_order_is_irrelevant(params in params_strategy(8)) {
            let mut rev = params.probs().to_vec();
            rev.reverse();
            let rev = ParamVector::new(rev).unwrap();
            prop_assert_eq!(pmf(&params, Backend::Exact), pmf(&rev, Backend::Exact));
        }

        #[test]
        fn strictly_log_concave(params in open_params_strategy(10)) {
            let g = pmf(&params, Backend::Exact);
            let seq = minors(&g).unwrap();
            let masses = g.exact("t").unwrap();
            for (k, d) in seq.d_values.iter().enumerate() {
                if masses[k].is_positive() {
                    prop_assert!(d.is_positive(), "D({}) = {} not positive", k, d);
                }
            }
        }

        #[test]
        fn mass_derivative_along_path(params in open_params_strategy(8)) {
            // Central differences of f along p_n approach g(k-1) - g(k).
            let path = SheppOlkinPath::from_params(&params).unwrap();
            let base = rational::to_f64(path.base());
            let h = 1e-6_f64.min(base / 2.0).min((1.0 - base) / 2.0);
            let h_exact = rational::from_f64_exact(h).unwrap();
            let up = path.pmf_at(&h_exact).unwrap().to_f64();
            let down = path.pmf_at(&-h_exact).unwrap().to_f64();
            let g = path.g(Backend::Float);
            for k in 0..up.len() {
                let fd = (up[k] - down[k]) / (2.0 * h);
                let expected = g.float_at(k as isize - 1) - g.float_at(k as isize);
                prop_assert!((fd - expected).abs() <= 1e-6 * expected.abs().max(1.0),
                    "k={} fd={} expected={}", k, fd, expected);
            }
        }
    }
}
