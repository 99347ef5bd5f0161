//! Edge-length schemes for the graph families.

use serde::{Deserialize, Serialize};

use crate::error::GraphError;
use crate::report::F17;

/// Rule producing the per-level length `ℓ_n` (or, for the rope ladder,
/// the rail/rung lengths) from the level index.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", content = "args", rename_all = "snake_case")]
pub enum LengthScheme {
    /// All lengths 1.
    Unit,
    /// `ℓ_n = ratio^n`.
    Geometric { ratio: F17 },
    /// `ℓ_n = (n+1)^{-s}`.
    Power { exponent: F17 },
    /// `ℓ_n = ((6√N)^n (n+N+3)!)^{-2}`, the decay that forces the
    /// polynomially growing antitree to deficiency index N+1.
    PaperAnDecay { n_index: usize },
    /// `ℓ_n = (6^n (n+3)!)^{-2}`, the decay used for the unbounded-index
    /// antitree construction.
    PaperAinfDecay,
    /// Rope ladder rails `1/(n+1)^s` with rungs `2n/((n+1)^s - n^s)`.
    RopeLadderPower { exponent: F17 },
    /// Explicit list of lengths; exhausted levels are an error.
    Explicit { lengths: Vec<F17> },
    /// Explicit rope-ladder lengths. `rungs` are (level, length) pairs with
    /// level >= 1; a rung at level 0 is rejected (no such edge exists).
    RopeLadderExplicit {
        plus: Vec<F17>,
        minus: Vec<F17>,
        rungs: Vec<(usize, F17)>,
    },
}

impl LengthScheme {
    pub fn geometric(ratio: f64) -> Self {
        LengthScheme::Geometric { ratio: F17(ratio) }
    }

    pub fn power(exponent: f64) -> Self {
        LengthScheme::Power {
            exponent: F17(exponent),
        }
    }

    pub fn paper_an_decay(n_index: usize) -> Self {
        LengthScheme::PaperAnDecay { n_index }
    }

    pub fn rope_ladder_power(exponent: f64) -> Self {
        LengthScheme::RopeLadderPower {
            exponent: F17(exponent),
        }
    }

    pub fn explicit(lengths: &[f64]) -> Self {
        LengthScheme::Explicit {
            lengths: lengths.iter().copied().map(F17).collect(),
        }
    }

    /// Scalar length at level `n`. For the rope-ladder specific variants this
    /// is the rail length; rungs come from [`LengthScheme::rung_length`].
    pub fn length(&self, n: usize) -> Result<f64, GraphError> {
        let value = match self {
            LengthScheme::Unit => 1.0,
            LengthScheme::Geometric { ratio } => ratio.0.powi(n as i32),
            LengthScheme::Power { exponent } => ((n + 1) as f64).powf(-exponent.0),
            LengthScheme::PaperAnDecay { n_index } => paper_factorial_decay(*n_index, n)?,
            LengthScheme::PaperAinfDecay => paper_inf_decay(n)?,
            LengthScheme::RopeLadderPower { exponent } => ((n + 1) as f64).powf(-exponent.0),
            LengthScheme::Explicit { lengths } => {
                lengths
                    .get(n)
                    .ok_or(GraphError::SchemeExhausted { n })?
                    .0
            }
            LengthScheme::RopeLadderExplicit { plus, .. } => {
                plus.get(n).ok_or(GraphError::SchemeExhausted { n })?.0
            }
        };
        check_positive(value, n)
    }

    /// Rail length on the minus side (differs from `length` only for the
    /// explicit rope-ladder variant).
    pub fn minus_rail_length(&self, n: usize) -> Result<f64, GraphError> {
        match self {
            LengthScheme::RopeLadderExplicit { minus, .. } => {
                let value = minus.get(n).ok_or(GraphError::SchemeExhausted { n })?.0;
                check_positive(value, n)
            }
            _ => self.length(n),
        }
    }

    /// Rung length at level `n >= 1` of the rope ladder. There is no rung at
    /// the root level; the power scheme formula evaluates to 0 there and the
    /// builder never asks for it.
    pub fn rung_length(&self, n: usize) -> Result<f64, GraphError> {
        if n == 0 {
            return Err(GraphError::RungAtRoot);
        }
        let value = match self {
            LengthScheme::RopeLadderPower { exponent } => {
                let s = exponent.0;
                let nf = n as f64;
                2.0 * nf / ((nf + 1.0).powf(s) - nf.powf(s))
            }
            LengthScheme::RopeLadderExplicit { rungs, .. } => {
                if rungs.iter().any(|(level, _)| *level == 0) {
                    return Err(GraphError::RungAtRoot);
                }
                rungs
                    .iter()
                    .find(|(level, _)| *level == n)
                    .ok_or(GraphError::SchemeExhausted { n })?
                    .1
                     .0
            }
            _ => self.length(n)?,
        };
        check_positive(value, n)
    }
}

fn check_positive(value: f64, n: usize) -> Result<f64, GraphError> {
    if !value.is_finite() || value <= 0.0 {
        if value == 0.0 || value.is_subnormal() {
            return Err(GraphError::SchemeUnderflow { n });
        }
        return Err(GraphError::NonpositiveLength {
            value,
            context: format!("scheme level {n}"),
        });
    }
    if value.is_subnormal() {
        return Err(GraphError::SchemeUnderflow { n });
    }
    Ok(value)
}

/// `((6√N)^n (n+N+3)!)^{-2}` evaluated as an incremental product so the
/// factorial never overflows before the final inversion underflows.
fn paper_factorial_decay(n_index: usize, n: usize) -> Result<f64, GraphError> {
    let base = 6.0 * (n_index as f64).sqrt();
    let mut inv_sqrt = 1.0f64;
    for k in 2..=(n_index + 3) {
        inv_sqrt /= k as f64;
    }
    for k in 1..=n {
        inv_sqrt /= base * (k + n_index + 3) as f64;
        if inv_sqrt == 0.0 || inv_sqrt.is_subnormal() {
            return Err(GraphError::SchemeUnderflow { n });
        }
    }
    check_positive(inv_sqrt * inv_sqrt, n)
}

/// `(6^n (n+3)!)^{-2}`.
fn paper_inf_decay(n: usize) -> Result<f64, GraphError> {
    let mut inv_sqrt = 1.0 / 6.0;
    for k in 1..=n {
        inv_sqrt /= 6.0 * (k + 3) as f64;
        if inv_sqrt == 0.0 || inv_sqrt.is_subnormal() {
            return Err(GraphError::SchemeUnderflow { n });
        }
    }
    check_positive(inv_sqrt * inv_sqrt, n)
}
