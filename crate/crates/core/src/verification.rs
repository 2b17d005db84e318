//! Runnable check suites with exact sign determination.
//!
//! Each suite returns a [`VerificationReport`]: a list of named checks,
//! each with a status, the quantity that decided it and, for violations,
//! a replayable witness. Exact checks never fall back to floating point.

use std::collections::BTreeMap;

use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::bernoulli::{self, at, d_minor, e_minor, Backend, MassFunction, ParamVector};
use crate::entropy;
use crate::error::{Error, Result};
use crate::mixing::{self, IndexedTable, MixingProfile};
use crate::rational::{self, ratio, Rational};

/// Pass threshold for float derivatives that should be non-negative.
pub const DERIVATIVE_TOLERANCE: f64 = 1e-12;

/// JSON schema version stamped on every report.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Violated,
    Skipped,
}

/// The quantity that decided a check.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Margin {
    Exact(#[serde(with = "rational::serde_rational")] Rational),
    Float(f64),
    None,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Witness {
    pub params: ParamVector,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q: Option<f64>,
}

impl Witness {
    pub fn new(params: &ParamVector) -> Self {
        Self {
            params: params.clone(),
            k: None,
            r: None,
            q: None,
        }
    }

    pub fn at_k(mut self, k: usize) -> Self {
        self.k = Some(k);
        self
    }

    pub fn at_r(mut self, r: usize) -> Self {
        self.r = Some(r);
        self
    }

    pub fn at_q(mut self, q: f64) -> Self {
        self.q = Some(q);
        self
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub status: Status,
    pub margin: Margin,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Witness>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl Check {
    /// A decided check; the witness is kept only when `ok` is false.
    pub fn decided(name: impl Into<String>, ok: bool, margin: Margin, witness: Witness) -> Self {
        Self {
            name: name.into(),
            status: if ok { Status::Pass } else { Status::Violated },
            margin,
            witness: (!ok).then_some(witness),
            note: None,
        }
    }

    pub fn skipped(name: impl Into<String>, reason: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            status: Status::Skipped,
            margin: Margin::None,
            witness: None,
            note: Some(reason.into()),
        }
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }
}

/// Something worth reporting that is not a failed check.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Finding {
    pub kind: String,
    pub value: Margin,
    pub witness: Witness,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerificationReport {
    pub schema: u32,
    pub suite: String,
    pub checks: Vec<Check>,
    pub findings: Vec<Finding>,
    pub info: BTreeMap<String, Value>,
}

impl VerificationReport {
    pub fn new(suite: impl Into<String>) -> Self {
        Self {
            schema: SCHEMA_VERSION,
            suite: suite.into(),
            checks: Vec::new(),
            findings: Vec::new(),
            info: BTreeMap::new(),
        }
    }

    pub fn push(&mut self, check: Check) {
        self.checks.push(check);
    }

    pub fn set_info(&mut self, key: &str, value: Value) {
        self.info.insert(key.to_string(), value);
    }

    pub fn violations(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| c.status == Status::Violated)
    }

    /// No check is violated. Skipped checks do not count against a report.
    pub fn passed(&self) -> bool {
        self.violations().next().is_none()
    }

    pub fn has_skips(&self) -> bool {
        self.checks.iter().any(|c| c.status == Status::Skipped)
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    /// Appends another report's checks and findings; info keys are
    /// prefixed with that report's suite name.
    pub fn merge(&mut self, other: VerificationReport) {
        self.checks.extend(other.checks);
        self.findings.extend(other.findings);
        for (k, v) in other.info {
            self.info.insert(format!("{}.{}", other.suite, k), v);
        }
    }
}

fn require_half_constraint(params: &ParamVector) -> Result<()> {
    if params.is_empty() {
        return Err(Error::EmptyParams);
    }
    let half = rational::half();
    match params
        .probs()
        .iter()
        .position(|p| p.is_negative() || *p > half)
    {
        Some(i) => Err(Error::ConstraintViolation { index: i + 1 }),
        None => Ok(()),
    }
}

fn prefix_without_zeros(params: &ParamVector) -> Result<(ParamVector, usize)> {
    Ok(bernoulli::drop_last(params)?.strip_zeros())
}

/// `g` and `f = g ⊛ Bernoulli(1/2)` for a prefix, both exact.
fn fair_extension(prefix: &ParamVector) -> (MassFunction, MassFunction) {
    let g = bernoulli::pmf(prefix, Backend::Exact);
    let f = bernoulli::shifted_mixture(&g, &rational::half()).expect("exact backend");
    (g, f)
}

/// Exact moment and chain checks at `p_n = 1/2`, plus float derivative
/// checks at `p_n = 1/2` and at the given `p_n`.
///
/// The moving coordinate is the last one. Zero entries of the prefix are
/// removed before the exact work (they only pad `g` with zero mass); the
/// count is recorded under `stripped_zeros`.
pub fn verify_monotonicity(params: &ParamVector, r_max: usize) -> Result<VerificationReport> {
    require_half_constraint(params)?;
    if r_max == 0 {
        return Err(Error::ZeroOrder);
    }
    let (prefix, stripped) = prefix_without_zeros(params)?;
    let (g, f) = fair_extension(&prefix);
    let profile = mixing::mixing_profile(&g)?;
    let g_exact = g.exact("verify_monotonicity")?;
    let f_exact = f.exact("verify_monotonicity")?;
    let witness = Witness::new(params);

    let mut report = VerificationReport::new("monotonicity");
    let mut exact_ok = true;
    let mut equality = true;
    for r in 1..=r_max {
        let chain = mixing::s_chain_unchecked(g_exact, f_exact, &profile, r);
        let w = witness.clone().at_r(r);
        let moment_ok = !chain.moment.is_positive();
        let gap = chain.min_gap().unwrap_or_else(Rational::zero);
        let identity_gap = rational::int(4) * &chain.moment - &chain.s_values[0];
        exact_ok &= moment_ok && chain.chain_monotone && chain.moment_identity;
        equality &= chain.equality_attained;
        report.push(Check::decided(
            format!("odd_moment_nonpositive[r={r}]"),
            moment_ok,
            Margin::Exact(chain.moment.clone()),
            w.clone(),
        ));
        report.push(Check::decided(
            format!("s_chain_monotone[r={r}]"),
            chain.chain_monotone,
            Margin::Exact(gap),
            w.clone(),
        ));
        report.push(Check::decided(
            format!("moment_identity[r={r}]"),
            chain.moment_identity,
            Margin::Exact(identity_gap),
            w,
        ));
    }

    let at_half = entropy::shannon_derivative_direct(&g, &f)?;
    report.push(derivative_check("derivative_nonnegative[p_n=1/2]", at_half, exact_ok, &witness));

    let p_n = params.last().expect("non-empty").clone();
    let path = bernoulli::SheppOlkinPath::new(prefix, p_n.clone())?;
    let f_here = path.pmf_at(&Rational::zero())?;
    if p_n.is_zero() {
        report.push(Check::skipped(
            "derivative_nonnegative[p_n]",
            "the derivative is +infinity at p_n = 0",
        ));
        report.push(Check::skipped(
            "second_derivative_nonpositive",
            "the derivative is +infinity at p_n = 0",
        ));
    } else {
        if p_n != rational::half() {
            let d = entropy::shannon_derivative_direct(&g, &f_here)?;
            report.push(derivative_check("derivative_nonnegative[p_n]", d, exact_ok, &witness));
        }
        let second = entropy::shannon_second_derivative(&g, &f_here)?;
        report.push(Check::decided(
            "second_derivative_nonpositive",
            second <= 0.0,
            Margin::Float(second),
            witness.clone(),
        ));
    }

    report.set_info("equality_attained", json!(equality));
    report.set_info("stripped_zeros", json!(stripped));
    report.set_info("derivative_at_half", json!(at_half));
    report.set_info(
        "skewness",
        json!(rational::format(&bernoulli::third_central_moment(params))),
    );
    Ok(report)
}

/// A float sign check backed by exact moments: a slightly negative float
/// with all exact moments in order is a precision diagnostic, not a
/// violation.
fn derivative_check(name: &str, value: f64, exact_ok: bool, witness: &Witness) -> Check {
    if value >= -DERIVATIVE_TOLERANCE {
        return Check::decided(name, true, Margin::Float(value), witness.clone());
    }
    if exact_ok {
        return Check::decided(name, true, Margin::Float(value), witness.clone())
            .with_note("precision diagnostic: float derivative below tolerance, exact moments non-positive");
    }
    Check::decided(name, false, Margin::Float(value), witness.clone())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EqualityClass {
    StrictIncrease,
    Stationary,
}

/// Stationary iff every `p_i` is `0` or `1/2`.
pub fn classify_equality(params: &ParamVector) -> Result<EqualityClass> {
    require_half_constraint(params)?;
    let half = rational::half();
    let stationary = params.probs().iter().all(|p| p.is_zero() || *p == half);
    Ok(if stationary {
        EqualityClass::Stationary
    } else {
        EqualityClass::StrictIncrease
    })
}

/// `M_1` for `g = pmf(non-zero p_i)` extended by a fair coin; zero exactly
/// when the vector is stationary.
pub fn equality_moment(params: &ParamVector) -> Result<Rational> {
    require_half_constraint(params)?;
    let (stripped, _) = params.strip_zeros();
    let (g, f) = fair_extension(&stripped);
    let profile = mixing::mixing_profile(&g)?;
    mixing::odd_central_moment(&f, &profile, 1)
}

/// Spacing decrease `α_{k+1} − α_k ≥ α_{k+2} − α_{k+1}` in two exact
/// forms: directly on α, and through the log-concavity minors of `g`.
pub fn verify_spacing(params: &ParamVector) -> Result<VerificationReport> {
    require_half_constraint(params)?;
    let (prefix, stripped) = prefix_without_zeros(params)?;
    let g = bernoulli::pmf(&prefix, Backend::Exact);
    let profile = mixing::mixing_profile(&g)?;
    let gs = g.exact("verify_spacing")?;
    let spacings = profile.spacings();
    let witness = Witness::new(params);

    let mut report = VerificationReport::new("spacing");
    let mut alpha_ok = true;
    let mut minor_ok = true;
    let mut agree = true;
    let mut alpha_margin: Option<(Rational, usize)> = None;
    let mut minor_margin: Option<(Rational, usize)> = None;
    let mut first_disagreement = None;
    for k in 0..spacings.len().saturating_sub(1) {
        let by_alpha = &spacings[k] - &spacings[k + 1];
        let ki = k as isize;
        let by_minor = (at(gs, ki + 2) + at(gs, ki + 1)) * d_minor(gs, ki)
            - (at(gs, ki - 1) + at(gs, ki)) * d_minor(gs, ki + 1);
        alpha_ok &= !by_alpha.is_negative();
        minor_ok &= !by_minor.is_negative();
        if by_alpha.signum() != by_minor.signum() && first_disagreement.is_none() {
            agree = false;
            first_disagreement = Some(k);
        }
        if alpha_margin.as_ref().is_none_or(|(m, _)| by_alpha < *m) {
            alpha_margin = Some((by_alpha, k));
        }
        if minor_margin.as_ref().is_none_or(|(m, _)| by_minor < *m) {
            minor_margin = Some((by_minor, k));
        }
    }
    let decided = |name: &str, ok: bool, m: Option<(Rational, usize)>| match m {
        Some((value, k)) => Check::decided(name, ok, Margin::Exact(value), witness.clone().at_k(k)),
        None => Check::decided(name, ok, Margin::None, witness.clone()),
    };
    report.push(decided("spacing_decreasing[alpha]", alpha_ok, alpha_margin));
    report.push(decided("spacing_decreasing[minors]", minor_ok, minor_margin));
    report.push(Check::decided(
        "spacing_forms_agree",
        agree,
        Margin::None,
        witness.clone().at_k(first_disagreement.unwrap_or(0)),
    ));
    report.set_info("stripped_zeros", json!(stripped));
    report.set_info(
        "spacings",
        json!(spacings.iter().map(rational::format).collect::<Vec<_>>()),
    );
    Ok(report)
}

/// Tracks the first failure of an exact equality across many indices.
struct Tally {
    name: &'static str,
    count: usize,
    failure: Option<(usize, Rational)>,
}

impl Tally {
    fn new(name: &'static str) -> Self {
        Self {
            name,
            count: 0,
            failure: None,
        }
    }

    fn equal(&mut self, k: usize, lhs: &Rational, rhs: &Rational) {
        self.count += 1;
        if lhs != rhs && self.failure.is_none() {
            self.failure = Some((k, lhs - rhs));
        }
    }

    fn nonnegative(&mut self, k: usize, value: Rational) {
        self.count += 1;
        if value.is_negative() && self.failure.is_none() {
            self.failure = Some((k, value));
        }
    }

    fn into_check(self, witness: &Witness) -> Check {
        match self.failure {
            None => Check::decided(self.name, true, Margin::Exact(Rational::zero()), witness.clone())
                .with_note(format!("{} indices", self.count)),
            Some((k, residual)) => {
                Check::decided(self.name, false, Margin::Exact(residual), witness.clone().at_k(k))
            }
        }
    }
}

/// Leave-one-out identities behind the spacing decrease.
///
/// With `g` the law of the first `n − 1` coins and `g⁽ⁱ⁾` the same law
/// with coin `i` removed:
///
/// * `g(k) g(k−1) = Σ p_i(1−p_i) D⁽ⁱ⁾(k−1)`,
/// * `2 g(k−1) g(k+1) = Σ p_i(1−p_i) E⁽ⁱ⁾(k−1)`,
/// * the two cubic forms in `g` equal their minor expansions and their
///   `(1−p_i)` and `p_i` weighted quotient forms,
/// * the difference of the cubic forms is the minor form of the spacing
///   decrease,
/// * `D⁽ⁱ⁾(k)² − D⁽ⁱ⁾(k−1) D⁽ⁱ⁾(k+1) ≥ 0`.
///
/// Indices where some `g⁽ⁱ⁾(k) = 0` are skipped for the quotient forms and
/// counted under `skipped_indices`.
pub fn verify_appendix_identities(params: &ParamVector) -> Result<VerificationReport> {
    if params.is_empty() {
        return Err(Error::EmptyParams);
    }
    let prefix = bernoulli::drop_last(params)?;
    let m = prefix.len();
    let g_mass = bernoulli::pmf(&prefix, Backend::Exact);
    let g = g_mass.exact("verify_appendix_identities")?.to_vec();
    let leave: Vec<Vec<Rational>> = (1..=m)
        .map(|i| {
            let sub = bernoulli::leave_one_out(&prefix, i).expect("index in range");
            bernoulli::pmf(&sub, Backend::Exact)
                .exact("verify_appendix_identities")
                .expect("exact backend")
                .to_vec()
        })
        .collect();
    let one = Rational::one();
    let weights: Vec<Rational> = prefix.probs().iter().map(|p| p * (&one - p)).collect();
    let witness = Witness::new(params);
    let mut report = VerificationReport::new("appendix");

    let mut first_sum = Tally::new("leave_one_out_sum[D]");
    let mut second_sum = Tally::new("leave_one_out_sum[E]");
    for k in 0..=(m + 1) {
        let ki = k as isize;
        let mut d_sum = Rational::zero();
        let mut e_sum = Rational::zero();
        for (w, h) in weights.iter().zip(&leave) {
            d_sum += w * d_minor(h, ki - 1);
            e_sum += w * e_minor(h, ki - 1);
        }
        first_sum.equal(k, &(at(&g, ki) * at(&g, ki - 1)), &d_sum);
        second_sum.equal(k, &(rational::int(2) * at(&g, ki - 1) * at(&g, ki + 1)), &e_sum);
    }
    report.push(first_sum.into_check(&witness));
    report.push(second_sum.into_check(&witness));

    let mut expand1 = Tally::new("cubic_form_expansion[1]");
    let mut expand2 = Tally::new("cubic_form_expansion[2]");
    let mut quotient1 = Tally::new("cubic_form_quotient[1]");
    let mut quotient2 = Tally::new("cubic_form_quotient[2]");
    let mut difference = Tally::new("cubic_forms_difference");
    let mut minor_lc = Tally::new("minor_log_concavity");
    let mut skipped = 0usize;
    let constrained = require_half_constraint(params).is_ok();
    let mut comparison = Tally::new("cubic_form_comparison");
    for k in 0..m {
        let ki = k as isize;
        let gk = |o: isize| at(&g, ki + o);
        let lhs1 = gk(0) * gk(0) * gk(1) + gk(-1) * gk(0) * gk(2)
            - rational::int(2) * gk(-1) * gk(1) * gk(1);
        let lhs2 = gk(0) * gk(1) * gk(1) + gk(-1) * gk(1) * gk(2)
            - rational::int(2) * gk(0) * gk(0) * gk(2);
        let mut mid1 = Rational::zero();
        let mut mid2 = Rational::zero();
        for (w, h) in weights.iter().zip(&leave) {
            mid1 += w * (gk(0) * d_minor(h, ki) + gk(2) * d_minor(h, ki - 1) - gk(1) * e_minor(h, ki - 1));
            mid2 += w * (gk(1) * d_minor(h, ki) + gk(-1) * d_minor(h, ki + 1) - gk(0) * e_minor(h, ki));
            let lc = d_minor(h, ki) * d_minor(h, ki) - d_minor(h, ki - 1) * d_minor(h, ki + 1);
            minor_lc.nonnegative(k, lc);
        }
        expand1.equal(k, &lhs1, &mid1);
        expand2.equal(k, &lhs2, &mid2);
        let tocontrol = (gk(2) + gk(1)) * d_minor(&g, ki) - (gk(-1) + gk(0)) * d_minor(&g, ki + 1);
        difference.equal(k, &(&lhs1 - &lhs2), &tocontrol);

        if leave.iter().any(|h| at(h, ki).is_zero()) {
            skipped += 1;
            continue;
        }
        let mut right1 = Rational::zero();
        let mut right2 = Rational::zero();
        for ((w, h), p) in weights.iter().zip(&leave).zip(prefix.probs()) {
            let lc = d_minor(h, ki) * d_minor(h, ki) - d_minor(h, ki - 1) * d_minor(h, ki + 1);
            let quotient = lc / at(h, ki);
            right1 += w * (&one - p) * &quotient;
            right2 += w * p * &quotient;
        }
        quotient1.equal(k, &lhs1, &right1);
        quotient2.equal(k, &lhs2, &right2);
        if constrained {
            comparison.nonnegative(k, right1 - right2);
        }
    }
    for tally in [expand1, expand2, quotient1, quotient2, difference, minor_lc] {
        report.push(tally.into_check(&witness));
    }
    if constrained {
        report.push(comparison.into_check(&witness));
    } else {
        report.push(Check::skipped(
            "cubic_form_comparison",
            "needs every p_i in [0, 1/2]",
        ));
    }
    report.set_info("skipped_indices", json!(skipped));
    Ok(report)
}

/// Mixing-coefficient identities and the summation-by-parts lemma, with
/// test tables drawn from `seed`.
///
/// Checks `α_0 = 0`, `α_n = 1`, `Σ f(k) α_k = 1/2`, `α_k ≥ k/n` and a zero
/// summation-by-parts residual for every `p = 0..n−1`.
pub fn verify_identities(params: &ParamVector, seed: u64) -> Result<VerificationReport> {
    require_half_constraint(params)?;
    let (prefix, stripped) = prefix_without_zeros(params)?;
    let (g, f) = fair_extension(&prefix);
    let profile = mixing::mixing_profile(&g)?;
    let witness = Witness::new(params);
    let mut report = VerificationReport::new("identities");
    report.checks.extend(mixing_identity_checks(&f, &profile, &witness)?);

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut residual = Tally::new("summation_by_parts");
    for p in 0..profile.n {
        let v = IndexedTable::new(p, (p..profile.n).map(|_| random_rational(&mut rng)).collect());
        let r = mixing::ipp_residual(&g, &profile, p, &v)?;
        residual.equal(p, &r, &Rational::zero());
    }
    report.push(residual.into_check(&witness));
    report.set_info("stripped_zeros", json!(stripped));
    Ok(report)
}

/// `α_0 = 0`, `α_n = 1`, `Σ f α = 1/2`, `α_k ≥ k/n` and strict increase.
pub fn mixing_identity_checks(
    f: &MassFunction,
    profile: &MixingProfile,
    witness: &Witness,
) -> Result<Vec<Check>> {
    let fs = f.exact("mixing_identity_checks")?;
    let n = profile.n;
    let alphas = &profile.alphas;
    let mean = fs
        .iter()
        .zip(alphas)
        .fold(Rational::zero(), |acc, (fk, a)| acc + fk * a);
    let mut lower = Tally::new("alpha_lower_bound");
    for (k, a) in alphas.iter().enumerate() {
        let bound = ratio(k as i64, n.max(1) as i64);
        lower.nonnegative(k, a - bound);
    }
    Ok(vec![
        Check::decided(
            "alpha_first_zero",
            alphas[0].is_zero(),
            Margin::Exact(alphas[0].clone()),
            witness.clone().at_k(0),
        ),
        Check::decided(
            "alpha_last_one",
            alphas[n].is_one(),
            Margin::Exact(alphas[n].clone()),
            witness.clone().at_k(n),
        ),
        Check::decided(
            "alpha_mean_half",
            mean == rational::half(),
            Margin::Exact(&mean - rational::half()),
            witness.clone(),
        ),
        lower.into_check(witness),
        Check::decided(
            "alpha_strictly_increasing",
            profile.is_strictly_increasing(),
            Margin::None,
            witness.clone(),
        ),
    ])
}

fn random_rational(rng: &mut ChaCha8Rng) -> Rational {
    ratio(rng.gen_range(-50..=50), rng.gen_range(1..=30))
}

/// Which interval random parameters are drawn from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Constraint {
    /// `(0, 1/2]`
    Half,
    /// `(0, 1)`
    Open,
    /// `[0, 1]`
    Unit,
}

/// Denominator of the random parameter lattice.
pub const LATTICE: i64 = 10_000;

impl Constraint {
    fn numerators(self) -> std::ops::RangeInclusive<i64> {
        match self {
            Constraint::Half => 1..=LATTICE / 2,
            Constraint::Open => 1..=LATTICE - 1,
            Constraint::Unit => 0..=LATTICE,
        }
    }
}

/// Draws `n` parameters uniformly from the lattice `a / 10⁴` inside the
/// constraint.
pub fn random_params_with<R: Rng>(rng: &mut R, n: usize, constraint: Constraint) -> ParamVector {
    let range = constraint.numerators();
    let probs = (0..n)
        .map(|_| ratio(rng.gen_range(range.clone()), LATTICE))
        .collect();
    ParamVector::new(probs).expect("lattice points lie in [0, 1]")
}

pub fn random_params(n: usize, seed: u64, constraint: Constraint) -> ParamVector {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_params_with(&mut rng, n, constraint)
}

/// `count` vectors with lengths uniform in `n_min..=n_max`; vector `j`
/// depends only on `(seed, j)`.
pub fn random_corpus(
    count: usize,
    n_min: usize,
    n_max: usize,
    seed: u64,
    constraint: Constraint,
) -> Vec<ParamVector> {
    (0..count)
        .map(|j| {
            let mut rng = probe_rng(seed, j);
            let n = rng.gen_range(n_min..=n_max);
            random_params_with(&mut rng, n, constraint)
        })
        .collect()
}

/// Independent stream per probe index.
pub fn probe_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

#[derive(Clone, Debug, PartialEq, Serialize, serde::Deserialize)]
pub struct SearchConfig {
    /// Number of coins, including the fair one at `p_n = 1/2`.
    pub n_min: usize,
    pub n_max: usize,
    pub q_min: f64,
    pub q_max: f64,
    pub samples: usize,
    pub seed: u64,
    pub r_max: usize,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            n_min: 2,
            n_max: 12,
            q_min: 0.0,
            q_max: 2.0,
            samples: 1000,
            seed: 0,
            r_max: 5,
        }
    }
}

/// Smallest q on the search grid when the range starts at 0.
pub const SEARCH_Q_FLOOR: f64 = 1e-3;

/// Grid points placed on the first probes before random q takes over.
pub const SEARCH_GRID_POINTS: usize = 21;

impl SearchConfig {
    fn validate(&self) -> Result<()> {
        let (lo, hi) = (self.q_min, self.q_max);
        if !(lo >= 0.0 && hi <= 2.0 && lo <= hi && hi > 0.0) {
            return Err(Error::QRange { lo, hi });
        }
        if self.n_min < 1 || self.n_min > self.n_max {
            return Err(Error::Config(format!(
                "n range {}..={} is empty",
                self.n_min, self.n_max
            )));
        }
        if self.r_max == 0 {
            return Err(Error::ZeroOrder);
        }
        Ok(())
    }

    /// q values for the first probes: an even grid from the lower end to
    /// `q_max`, plus points just either side of 1.
    pub fn grid(&self) -> Vec<f64> {
        let lo = self.q_min.max(SEARCH_Q_FLOOR).min(self.q_max);
        let hi = self.q_max;
        let mut grid: Vec<f64> = (0..SEARCH_GRID_POINTS)
            .map(|i| lo + (hi - lo) * i as f64 / (SEARCH_GRID_POINTS - 1) as f64)
            .collect();
        for q in [1.0 - 1e-10, 1.0 + 1e-10] {
            if (lo..=hi).contains(&q) {
                grid.push(q);
            }
        }
        grid.dedup();
        grid
    }

    fn q_for(&self, grid: &[f64], index: usize, rng: &mut ChaCha8Rng) -> f64 {
        if let Some(&q) = grid.get(index) {
            return q;
        }
        let lo = self.q_min.max(SEARCH_Q_FLOOR).min(self.q_max);
        if lo == self.q_max {
            lo
        } else {
            rng.gen_range(lo..=self.q_max)
        }
    }
}

/// Result of one search probe.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Probe {
    pub index: usize,
    pub params: ParamVector,
    pub q: f64,
    pub direct: f64,
    pub mixing: f64,
    /// Shannon derivative for probes with q within 1e-9 of 1.
    pub shannon: Option<f64>,
    /// `Σ f(k)^q β_k^{2r+1}` for `r = 1..=r_max`.
    pub weighted_moments: Vec<Margin>,
}

/// Σ f^q β^{2r+1}, exact for integer q.
fn weighted_moment(f: &[Rational], betas: &[Rational], q: f64, r: usize) -> Margin {
    if q.fract() == 0.0 && q <= 8.0 {
        let e = q as usize;
        let total = f
            .iter()
            .zip(betas)
            .fold(Rational::zero(), |acc, (fk, b)| {
                acc + num_traits::pow(fk.clone(), e) * num_traits::pow(b.clone(), 2 * r + 1)
            });
        return Margin::Exact(total);
    }
    let mut total = 0.0;
    let mut scale = 0.0;
    for (fk, b) in f.iter().zip(betas) {
        let term = rational::to_f64(fk).powf(q) * rational::to_f64(b).powi(2 * r as i32 + 1);
        total += term;
        scale += term.abs();
    }
    // Terms that cancel exactly (β symmetric) can leave rounding residue.
    if total.abs() <= 1e-14 * scale {
        total = 0.0;
    }
    Margin::Float(total)
}

fn margin_positive(m: &Margin) -> bool {
    match m {
        Margin::Exact(x) => x.is_positive(),
        Margin::Float(x) => *x > 0.0,
        Margin::None => false,
    }
}

fn run_probe(config: &SearchConfig, grid: &[f64], index: usize) -> Result<Probe> {
    let mut rng = probe_rng(config.seed, index);
    let n = rng.gen_range(config.n_min..=config.n_max);
    let q = config.q_for(grid, index, &mut rng);
    let prefix = random_params_with(&mut rng, n - 1, Constraint::Half);
    let params = prefix.push(rational::half())?;
    let (g, f) = fair_extension(&prefix);
    let profile = mixing::mixing_profile(&g)?;
    let (direct, mixing_form) = if q == 1.0 {
        (
            entropy::shannon_derivative_direct(&g, &f)?,
            entropy::shannon_derivative_mixing(&f, &profile)?,
        )
    } else {
        (
            entropy::tsallis_derivative(&g, &f, q)?,
            entropy::tsallis_derivative_mixing(&f, &profile, q)?,
        )
    };
    let shannon = if (q - 1.0).abs() <= 1e-9 {
        Some(entropy::shannon_derivative_direct(&g, &f)?)
    } else {
        None
    };
    let fs = f.exact("search_tsallis")?;
    let weighted_moments = (1..=config.r_max)
        .map(|r| weighted_moment(fs, &profile.betas, q, r))
        .collect();
    Ok(Probe {
        index,
        params,
        q,
        direct,
        mixing: mixing_form,
        shannon,
        weighted_moments,
    })
}

/// Runs the seeded probes and returns them in index order.
pub fn search_probes(config: &SearchConfig) -> Result<Vec<Probe>> {
    config.validate()?;
    let grid = config.grid();
    (0..config.samples)
        .into_par_iter()
        .map(|j| run_probe(config, &grid, j))
        .collect()
}

/// Seeded probe of the Tsallis derivative at `p_n = 1/2` for `q ∈ (0, 2]`.
///
/// Every probe evaluates the derivative by the direct and the mixing
/// formula and the weighted odd moments `Σ f^q β^{2r+1}`. A negative
/// derivative is reported as a violated check; positive weighted moments
/// are listed as findings.
pub fn search_tsallis(config: &SearchConfig) -> Result<VerificationReport> {
    let probes = search_probes(config)?;
    Ok(search_report(config, &probes))
}

pub fn search_report(config: &SearchConfig, probes: &[Probe]) -> VerificationReport {
    let mut report = VerificationReport::new("search");
    let mut worst: Option<&Probe> = None;
    let mut worst_gap: Option<(f64, &Probe)> = None;
    let mut worst_continuity: Option<(f64, &Probe)> = None;
    let mut negatives = 0usize;
    for probe in probes {
        let value = probe.direct.min(probe.mixing);
        if value < -DERIVATIVE_TOLERANCE {
            negatives += 1;
        }
        if worst.is_none_or(|w| value < w.direct.min(w.mixing)) {
            worst = Some(probe);
        }
        let gap = (probe.direct - probe.mixing).abs();
        if worst_gap.is_none_or(|(g, _)| gap > g) {
            worst_gap = Some((gap, probe));
        }
        if let Some(s) = probe.shannon {
            let c = (probe.direct - s).abs();
            if worst_continuity.is_none_or(|(w, _)| c > w) {
                worst_continuity = Some((c, probe));
            }
        }
        for (i, m) in probe.weighted_moments.iter().enumerate() {
            if margin_positive(m) {
                report.findings.push(Finding {
                    kind: "weighted_moment_positive".into(),
                    value: m.clone(),
                    witness: Witness::new(&probe.params).at_r(i + 1).at_q(probe.q),
                });
            }
        }
    }
    let witness_of = |p: &Probe| Witness::new(&p.params).at_q(p.q).at_k(p.index);
    match worst {
        Some(p) => {
            let value = p.direct.min(p.mixing);
            report.push(Check::decided(
                "tsallis_derivative_nonnegative",
                value >= -DERIVATIVE_TOLERANCE,
                Margin::Float(value),
                witness_of(p),
            ));
        }
        None => report.push(Check::skipped("tsallis_derivative_nonnegative", "no probes")),
    }
    if let Some((gap, p)) = worst_gap {
        let scale = p.direct.abs().max(p.mixing.abs());
        report.push(Check::decided(
            "formula_agreement",
            gap <= 1e-12 + 1e-9 * scale,
            Margin::Float(gap),
            witness_of(p),
        ));
    }
    if let Some((gap, p)) = worst_continuity {
        report.push(Check::decided(
            "shannon_continuity",
            gap <= 1e-8,
            Margin::Float(gap),
            witness_of(p),
        ));
    }
    report.set_info("probes", json!(probes.len()));
    report.set_info("negative_derivatives", json!(negatives));
    report.set_info("weighted_moment_positives", json!(report.findings.len()));
    report.set_info("seed", json!(config.seed));
    report.set_info("q_range", json!([config.q_min, config.q_max]));
    report.set_info(
        "note",
        json!("nonnegativity for q in (0, 2] is conjectural; findings are not failures"),
    );
    report
}

/// Suites available through [`run_suite`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    All,
    Monotonicity,
    Spacing,
    Appendix,
    Identities,
}

/// Runs a suite; constraint violations become skipped checks.
pub fn run_suite(params: &ParamVector, suite: Suite, r_max: usize, seed: u64) -> Result<VerificationReport> {
    let parts: Vec<Suite> = match suite {
        Suite::All => vec![
            Suite::Monotonicity,
            Suite::Spacing,
            Suite::Appendix,
            Suite::Identities,
        ],
        s => vec![s],
    };
    let mut report = VerificationReport::new(suite_name(suite));
    report.set_info("params", json!(params.to_strings()));
    for part in parts {
        let result = match part {
            Suite::Monotonicity => verify_monotonicity(params, r_max),
            Suite::Spacing => verify_spacing(params),
            Suite::Appendix => verify_appendix_identities(params),
            Suite::Identities => verify_identities(params, seed),
            Suite::All => unreachable!(),
        };
        match result {
            Ok(sub) => {
                if suite == Suite::All {
                    report.merge(sub);
                } else {
                    report.checks = sub.checks;
                    report.findings = sub.findings;
                    report.info.extend(sub.info);
                }
            }
            Err(Error::ConstraintViolation { index }) => {
                report.push(Check::skipped(
                    suite_name(part),
                    format!("p_{index} lies outside [0, 1/2]"),
                ));
            }
            Err(e) => return Err(e),
        }
    }
    if let Suite::Monotonicity | Suite::All = suite {
        if let Some(Value::Bool(eq)) = report
            .info
            .get("equality_attained")
            .or_else(|| report.info.get("monotonicity.equality_attained"))
            .cloned()
        {
            report.set_info("equality_attained", json!(eq));
        }
    }
    Ok(report)
}

pub fn suite_name(suite: Suite) -> &'static str {
    match suite {
        Suite::All => "all",
        Suite::Monotonicity => "monotonicity",
        Suite::Spacing => "spacing",
        Suite::Appendix => "appendix",
        Suite::Identities => "identities",
    }
}
