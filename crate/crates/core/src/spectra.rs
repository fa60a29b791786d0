//! Spectral diagnostics of a condensation run.
//!
//! Three families of singular-value traces, one entry per iteration
//! `t = 0..=T`, each entry covering `t + 1` operator applications:
//!
//! * `step`: the spectrum of the single operator built from snapshot `t`;
//! * `cumulative`: the spectrum of the running product of all operators up
//!   to and including iteration `t` (the map actually applied to the data);
//! * `power`: the spectrum of the initial operator raised to `t + 1`, the
//!   static-diffusion reference the cascade is compared against.
//!
//! At `t = 0` the three families coincide by construction. "Top k
//! nontrivial" always means: compute all singular values, drop the single
//! largest (the trivial one attached to row-stochasticity), keep the next
//! `k`, descending.

use crate::engine::CondensationTrace;
use crate::error::{Error, Result};
use crate::io;
use crate::linalg;
use crate::operators::{
    self, gaussian_affinity, markov_normalize, pairwise_distances, DiffusionOperator,
    OperatorKind,
};
use ndarray::Array2;
use serde::{Deserialize, Serialize};
use std::path::Path;

/// Number of nontrivial singular values kept by default.
pub const DEFAULT_TOP_K: usize = 14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpectralFamily {
    Step,
    Cumulative,
    Power,
}

impl SpectralFamily {
    pub fn name(self) -> &'static str {
        match self {
            SpectralFamily::Step => "step",
            SpectralFamily::Cumulative => "cumulative",
            SpectralFamily::Power => "power",
        }
    }

    /// Inverse of [`SpectralFamily::name`].
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "step" => Some(SpectralFamily::Step),
            "cumulative" => Some(SpectralFamily::Cumulative),
            "power" => Some(SpectralFamily::Power),
            _ => None,
        }
    }
}

/// Per-iteration top-k nontrivial singular values of one family.
#[derive(Debug, Clone)]
pub struct SpectralTrace {
    pub family: SpectralFamily,
    pub k: usize,
    /// `values[t]` holds `k` singular values, descending.
    pub values: Vec<Vec<f64>>,
    /// Eigenvalues of the base operator, descending; carried by the power
    /// family (whose whole trace they determine) and absent elsewhere.
    pub eigenvalues: Option<Vec<f64>>,
}

/// The three families of one run.
#[derive(Debug, Clone)]
pub struct SpectralTraces {
    pub step: SpectralTrace,
    pub cumulative: SpectralTrace,
    pub power: SpectralTrace,
}

impl SpectralTraces {
    pub fn all(&self) -> [&SpectralTrace; 3] {
        [&self.step, &self.cumulative, &self.power]
    }
}

/// Top `k` singular values after discarding the single leading trivial one.
pub fn top_singular_values(m: &Array2<f64>, k: usize) -> Result<Vec<f64>> {
    let n = m.nrows();
    if m.ncols() != n {
        return Err(Error::DimensionMismatch(format!(
            "need a square matrix, got {}x{}",
            n,
            m.ncols()
        )));
    }
    if k < 1 || k >= n {
        return Err(Error::InvalidParameter(format!(
            "k must satisfy 1 <= k < {n}, got {k}"
        )));
    }
    let all = linalg::singular_values(m);
    Ok(all[1..=k].to_vec())
}

/// Rebuilds the diffusion operator acting on snapshot `t`, in either
/// normalization. The bandwidth is the one the run scheduled for the pass
/// leaving `t` (the final snapshot reuses the last pass's bandwidth).
pub fn operator_at(
    trace: &CondensationTrace,
    t: usize,
    kind: OperatorKind,
) -> Result<DiffusionOperator> {
    let snap = trace.snapshot(t).ok_or_else(|| {
        Error::InvalidParameter(format!(
            "spectra require full snapshots (stride 1): iteration {t} was not retained"
        ))
    })?;
    let d = pairwise_distances(snap)?;
    let a = gaussian_affinity(&d, trace.operator_epsilon(t))?;
    Ok(markov_normalize(&a, kind))
}

/// Computes all three spectral families from a stride-1 trace.
pub fn spectral_traces(trace: &CondensationTrace, k: usize) -> Result<SpectralTraces> {
    if trace.config.snapshot_stride != 1 {
        return Err(Error::InvalidParameter(format!(
            "spectra require full snapshots (stride 1), trace has stride {}",
            trace.config.snapshot_stride
        )));
    }
    let n = trace.n_points();
    if k < 1 || k >= n {
        return Err(Error::InvalidParameter(format!(
            "k must satisfy 1 <= k < {n}, got {k}"
        )));
    }
    let t_final = trace.final_iteration();

    let mut step_values = Vec::with_capacity(t_final + 1);
    let mut cumulative_values = Vec::with_capacity(t_final + 1);
    let mut power_values = Vec::with_capacity(t_final + 1);

    let p0 = operator_at(trace, 0, OperatorKind::Anisotropic)?;
    let base = p0.values.clone();
    let eigenvalues = operators::eigenvalues(&p0);

    // running product of the cascade and running power of the base operator
    let mut cumulative = base.clone();
    let mut power = base.clone();

    for t in 0..=t_final {
        let p_t = if t == 0 {
            p0.values.clone()
        } else {
            let op = operator_at(trace, t, OperatorKind::Anisotropic)?;
            // newest operator acts last, so it lands on the left
            cumulative = op.values.dot(&cumulative);
            power = power.dot(&base);
            op.values
        };
        step_values.push(top_singular_values(&p_t, k)?);
        cumulative_values.push(top_singular_values(&cumulative, k)?);
        power_values.push(top_singular_values(&power, k)?);
    }

    Ok(SpectralTraces {
        step: SpectralTrace {
            family: SpectralFamily::Step,
            k,
            values: step_values,
            eigenvalues: None,
        },
        cumulative: SpectralTrace {
            family: SpectralFamily::Cumulative,
            k,
            values: cumulative_values,
            eigenvalues: None,
        },
        power: SpectralTrace {
            family: SpectralFamily::Power,
            k,
            values: power_values,
            eigenvalues: Some(eigenvalues),
        },
    })
}

/// Writes traces as `family,iteration,index,value` rows; `index` is the
/// 1-based rank among the nontrivial values. Floats carry 17 significant
/// digits, so a read-back is exact.
pub fn export_spectra<'a, I>(traces: I, path: &Path) -> Result<()>
where
    I: IntoIterator<Item = &'a SpectralTrace>,
{
    let mut out = String::from("family,iteration,index,value\n");
    for trace in traces {
        for (t, values) in trace.values.iter().enumerate() {
            for (idx, v) in values.iter().enumerate() {
                out.push_str(&format!(
                    "{},{},{},{}\n",
                    trace.family.name(),
                    t,
                    idx + 1,
                    io::format_float(*v)
                ));
            }
        }
    }
    io::write_atomic(path, out.as_bytes())
}

/// Reads a file written by [`export_spectra`]. Eigenvalues are not part of
/// the CSV schema, so they come back as `None`.
pub fn import_spectra(path: &Path) -> Result<Vec<SpectralTrace>> {
    let cells = io::read_cells(path)?;
    if cells.is_empty() || cells[0] != ["family", "iteration", "index", "value"] {
        return Err(Error::Parse {
            row: 1,
            col: 1,
            message: "expected a family,iteration,index,value header".into(),
        });
    }
    let mut order: Vec<SpectralFamily> = Vec::new();
    let mut by_family: Vec<Vec<Vec<f64>>> = Vec::new();
    for (r, row) in cells.iter().enumerate().skip(1) {
        let parse_err = |col: usize, message: String| Error::Parse {
            row: r + 1,
            col,
            message,
        };
        if row.len() != 4 {
            return Err(parse_err(row.len().min(4) + 1, "expected 4 cells".into()));
        }
        let family = SpectralFamily::parse(&row[0])
            .ok_or_else(|| parse_err(1, format!("unknown family {:?}", row[0])))?;
        let t: usize = row[1]
            .parse()
            .map_err(|_| parse_err(2, format!("bad iteration {:?}", row[1])))?;
        let idx: usize = row[2]
            .parse()
            .map_err(|_| parse_err(3, format!("bad index {:?}", row[2])))?;
        let value: f64 = row[3]
            .parse()
            .map_err(|_| parse_err(4, format!("bad value {:?}", row[3])))?;
        if idx == 0 {
            return Err(parse_err(3, "indices are 1-based".into()));
        }
        let slot = match order.iter().position(|f| *f == family) {
            Some(i) => i,
            None => {
                order.push(family);
                by_family.push(Vec::new());
                order.len() - 1
            }
        };
        let values = &mut by_family[slot];
        if t >= values.len() {
            values.resize(t + 1, Vec::new());
        }
        if idx != values[t].len() + 1 {
            return Err(parse_err(3, format!("index {idx} out of sequence")));
        }
        values[t].push(value);
    }
    Ok(order
        .into_iter()
        .zip(by_family)
        .map(|(family, values)| SpectralTrace {
            family,
            k: values.first().map_or(0, Vec::len),
            values,
            eigenvalues: None,
        })
        .collect())
}
