//! Parameter sweeps: one row per probe with entropy, path derivatives,
//! exact odd moments and pass flags, written as CSV or JSON.
//!
//! The moving coordinate is the last one and is held at `last` (default
//! `1/2`); the first `n − 1` coordinates come from a lattice grid or from
//! seeded random draws. Rows are computed in parallel and emitted in probe
//! order, so output depends only on the spec.

use std::io::Write;

use num_traits::{Signed, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::bernoulli::{self, Backend, ParamVector};
use crate::entropy;
use crate::error::{Error, Result};
use crate::mixing;
use crate::rational::{self, Rational};
use crate::verification::{self, Constraint, DERIVATIVE_TOLERANCE, SCHEMA_VERSION};

/// Refuse grids with more rows than this.
pub const MAX_GRID_ROWS: usize = 1_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Grid,
    Random,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepSpec {
    pub mode: Mode,
    /// Number of coins including the moving one.
    pub n: usize,
    #[serde(with = "rational::serde_rational")]
    pub lo: Rational,
    #[serde(with = "rational::serde_rational")]
    pub hi: Rational,
    /// Grid spacing.
    #[serde(with = "rational::serde_rational")]
    pub step: Rational,
    /// Value of the moving coordinate.
    #[serde(with = "rational::serde_rational")]
    pub last: Rational,
    /// Random mode only.
    pub samples: usize,
    pub seed: u64,
    pub constraint: Constraint,
    /// Tsallis orders for the extra derivative columns; `1` means Shannon.
    pub qs: Vec<f64>,
    pub r_max: usize,
    pub format: Format,
}

impl Default for SweepSpec {
    fn default() -> Self {
        Self {
            mode: Mode::Grid,
            n: 2,
            lo: rational::ratio(1, 10),
            hi: rational::half(),
            step: rational::ratio(1, 10),
            last: rational::half(),
            samples: 100,
            seed: 0,
            constraint: Constraint::Half,
            qs: Vec::new(),
            r_max: 3,
            format: Format::Csv,
        }
    }
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if self.n == 0 {
            return bad("n must be at least 1".into());
        }
        if self.r_max == 0 {
            return Err(Error::ZeroOrder);
        }
        if !rational::is_in_unit_interval(&self.last) {
            return Err(Error::ProbabilityOutOfRange {
                value: rational::format(&self.last),
            });
        }
        for q in &self.qs {
            if !(*q >= 0.0) || !q.is_finite() {
                return Err(Error::InvalidOrder {
                    q: *q,
                    reason: "q must be a finite non-negative number",
                });
            }
        }
        if self.mode == Mode::Grid {
            if !rational::is_in_unit_interval(&self.lo) || !rational::is_in_unit_interval(&self.hi) {
                return bad("grid bounds must lie in [0, 1]".into());
            }
            if self.lo > self.hi {
                return bad("grid lower bound exceeds upper bound".into());
            }
            if !self.step.is_positive() {
                return bad("grid step must be positive".into());
            }
            let rows = self.grid_axis().len().checked_pow((self.n - 1) as u32);
            if rows.is_none_or(|r| r > MAX_GRID_ROWS) {
                return bad(format!("grid has more than {MAX_GRID_ROWS} rows"));
            }
        }
        Ok(())
    }

    fn grid_axis(&self) -> Vec<Rational> {
        let mut axis = Vec::new();
        let mut x = self.lo.clone();
        while x <= self.hi {
            axis.push(x.clone());
            x += &self.step;
        }
        axis
    }

    /// Parameter vectors in probe order.
    pub fn probes(&self) -> Result<Vec<ParamVector>> {
        self.validate()?;
        let m = self.n - 1;
        let prefixes: Vec<Vec<Rational>> = match self.mode {
            Mode::Grid => {
                let axis = self.grid_axis();
                let mut out = vec![Vec::new()];
                for _ in 0..m {
                    out = out
                        .into_iter()
                        .flat_map(|p| {
                            axis.iter().map(move |x| {
                                let mut q = p.clone();
                                q.push(x.clone());
                                q
                            })
                        })
                        .collect();
                }
                out
            }
            Mode::Random => verification::random_corpus(self.samples, m, m, self.seed, self.constraint)
                .into_iter()
                .map(|p| p.probs().to_vec())
                .collect(),
        };
        prefixes
            .into_iter()
            .map(|mut p| {
                p.push(self.last.clone());
                ParamVector::new(p)
            })
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TsallisColumn {
    pub q: f64,
    pub derivative: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepRow {
    pub index: usize,
    pub params: ParamVector,
    pub entropy: f64,
    /// Shannon derivative at the given `p_n`, direct form.
    pub derivative_direct: f64,
    /// Mixing form; only defined at `p_n = 1/2` with a strictly positive `g`.
    pub derivative_mixing: Option<f64>,
    /// `M_1, …, M_{r_max}` at `p_n = 1/2`.
    #[serde(with = "rational::serde_rational_vec")]
    pub moments: Vec<Rational>,
    /// Smallest step of any S-chain, `r = 1..=r_max`.
    #[serde(with = "rational::serde_rational")]
    pub min_chain_gap: Rational,
    pub moments_pass: bool,
    pub chain_pass: bool,
    pub derivative_pass: bool,
    pub tsallis: Vec<TsallisColumn>,
}

/// One probe. Derivatives that do not exist (zero mass where a logarithm
/// or negative power is needed) are reported as NaN or +∞.
pub fn evaluate(index: usize, params: &ParamVector, spec: &SweepSpec) -> Result<SweepRow> {
    let prefix = bernoulli::drop_last(params)?;
    let last = params.last().expect("n >= 1").clone();
    let g = bernoulli::pmf(&prefix, Backend::Exact);
    let f_here = bernoulli::shifted_mixture(&g, &last)?;
    let entropy = entropy::shannon_entropy(&f_here)?;
    let derivative_direct = if last.is_zero() {
        f64::INFINITY
    } else {
        entropy::shannon_derivative_direct(&g, &f_here).unwrap_or(f64::NAN)
    };

    // Coins with p = 0 or 1 only shift or pad g; the exact work runs
    // without them.
    let stripped = ParamVector::new(
        prefix
            .probs()
            .iter()
            .filter(|p| !p.is_zero() && !num_traits::One::is_one(*p))
            .cloned()
            .collect(),
    )?;
    let g_half = bernoulli::pmf(&stripped, Backend::Exact);
    let f_half = bernoulli::shifted_mixture(&g_half, &rational::half())?;
    let profile = mixing::mixing_profile(&g_half)?;
    let derivative_mixing = (last == rational::half() && stripped.len() == prefix.len())
        .then(|| entropy::shannon_derivative_mixing(&f_half, &profile))
        .transpose()?;

    let mut moments = Vec::with_capacity(spec.r_max);
    let mut min_chain_gap: Option<Rational> = None;
    let mut chain_pass = true;
    for r in 1..=spec.r_max {
        let chain = mixing::s_chain_unchecked(
            g_half.exact("sweep")?,
            f_half.exact("sweep")?,
            &profile,
            r,
        );
        chain_pass &= chain.chain_monotone && chain.moment_identity;
        if let Some(gap) = chain.min_gap() {
            if min_chain_gap.as_ref().is_none_or(|m| gap < *m) {
                min_chain_gap = Some(gap);
            }
        }
        moments.push(chain.moment);
    }
    let moments_pass = moments.iter().all(|m| !m.is_positive());

    let tsallis = spec
        .qs
        .iter()
        .map(|&q| {
            let derivative = if q == 1.0 {
                derivative_direct
            } else {
                entropy::tsallis_derivative(&g, &f_here, q).unwrap_or(f64::NAN)
            };
            TsallisColumn { q, derivative }
        })
        .collect();

    Ok(SweepRow {
        index,
        params: params.clone(),
        entropy,
        derivative_direct,
        derivative_mixing,
        moments,
        min_chain_gap: min_chain_gap.unwrap_or_else(Rational::zero),
        moments_pass,
        chain_pass,
        derivative_pass: derivative_direct >= -DERIVATIVE_TOLERANCE,
        tsallis,
    })
}

pub fn run(spec: &SweepSpec) -> Result<Vec<SweepRow>> {
    let probes = spec.probes()?;
    probes
        .par_iter()
        .enumerate()
        .map(|(i, p)| evaluate(i, p, spec))
        .collect()
}

fn float_text(x: f64) -> String {
    format!("{x:?}")
}

/// Column names, in order.
pub fn header(spec: &SweepSpec) -> Vec<String> {
    let mut cols: Vec<String> = [
        "index",
        "params",
        "entropy",
        "derivative_direct",
        "derivative_mixing",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    cols.extend((1..=spec.r_max).map(|r| format!("m{r}")));
    cols.extend(
        ["min_chain_gap", "moments_pass", "chain_pass", "derivative_pass"]
            .iter()
            .map(|s| s.to_string()),
    );
    cols.extend(spec.qs.iter().map(|q| format!("tsallis_q{q}")));
    cols
}

pub fn write_csv<W: Write>(spec: &SweepSpec, rows: &[SweepRow], out: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .quote_style(csv::QuoteStyle::NonNumeric)
        .from_writer(out);
    let io = |e: csv::Error| Error::Io(e.to_string());
    w.write_record(header(spec)).map_err(io)?;
    for row in rows {
        let mut rec = vec![
            row.index.to_string(),
            row.params.to_strings().join(" "),
            float_text(row.entropy),
            float_text(row.derivative_direct),
            row.derivative_mixing.map(float_text).unwrap_or_default(),
        ];
        rec.extend(row.moments.iter().map(rational::format));
        rec.push(rational::format(&row.min_chain_gap));
        rec.extend([row.moments_pass, row.chain_pass, row.derivative_pass].map(|b| b.to_string()));
        rec.extend(row.tsallis.iter().map(|t| float_text(t.derivative)));
        w.write_record(&rec).map_err(io)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_json<W: Write>(spec: &SweepSpec, rows: &[SweepRow], mut out: W) -> Result<()> {
    let doc = json!({
        "schema": SCHEMA_VERSION,
        "spec": spec,
        "columns": header(spec),
        "rows": rows,
    });
    serde_json::to_writer_pretty(&mut out, &doc).map_err(|e| Error::Io(e.to_string()))?;
    writeln!(out)?;
    Ok(())
}

pub fn write<W: Write>(spec: &SweepSpec, rows: &[SweepRow], out: W) -> Result<()> {
    match spec.format {
        Format::Csv => write_csv(spec, rows, out),
        Format::Json => write_json(spec, rows, out),
    }
}
