//! Kirchhoff-harmonic functions, membership tests and deficiency estimates.
//!
//! A harmonic function on a metric graph is edgewise affine with Kirchhoff
//! balance at every vertex, hence fully described by its per-sphere value
//! vectors. Deficiency indices of the minimal Kirchhoff Laplacian reduce, on
//! the finite-volume families handled here, to counting harmonic functions in
//! `ℓ²(V; m)` — which is what [`estimate_deficiency`] certifies field by
//! field through the summability gate.

mod oracle;
mod recurrence;

pub use oracle::{harmonic_oracle, oracle_values_by_sphere};
pub use recurrence::{
    assemble_recurrence, rope_ladder_g0, scheme_lengths, solve_antitree_infinite,
    solve_antitree_reduced, solve_radial_constant, solve_rope_ladder, solve_sphere_recurrence,
    RecurrenceMatrices, OVERFLOW_LIMIT, RESIDUAL_GATE, SEED_TOL,
};

use nalgebra::DMatrix;
use serde::Serialize;

use crate::ends;
use crate::error::{GraphError, HarmonicError};
use crate::graph::{
    build_antitree, build_antitree_infinite, build_radial_tree, build_rope_ladder, IntegerRule,
    LengthScheme, SphereGraph, SphereRule, Vertex,
};
use crate::report::F17;
use crate::series::{self, SummabilityOptions, SummabilityVerdict};

/// Per-sphere value vectors of an edgewise-affine Kirchhoff-harmonic function.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HarmonicField {
    /// `values[n][i]` is the value at vertex `(n, i)`.
    pub values: Vec<Vec<f64>>,
    /// Which solver produced the field.
    pub provenance: String,
    /// Sphere at which the recurrence overflowed, when it did; the field then
    /// holds only the computed prefix.
    pub overflow_at: Option<usize>,
    pub notes: Vec<String>,
}

impl HarmonicField {
    pub fn new(values: Vec<Vec<f64>>, provenance: &str) -> Self {
        HarmonicField {
            values,
            provenance: provenance.into(),
            overflow_at: None,
            notes: Vec::new(),
        }
    }

    /// Largest sphere with values.
    pub fn horizon(&self) -> usize {
        self.values.len().saturating_sub(1)
    }

    pub fn origin(&self) -> f64 {
        self.values[0][0]
    }

    pub fn value(&self, v: Vertex) -> Option<f64> {
        self.values.get(v.sphere)?.get(v.index).copied()
    }

    /// CSV rows `(sphere, index, value)` with 17-digit values.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("sphere,index,value\n");
        for (n, sphere) in self.values.iter().enumerate() {
            for (i, &v) in sphere.iter().enumerate() {
                out.push_str(&format!("{n},{i},{}\n", crate::report::format_f17(v)));
            }
        }
        out
    }
}

/// Largest relative Kirchhoff residual over the interior vertices
/// (spheres strictly below both horizons).
///
/// The residual at `v` is `|Σ (f(u)-f(v))/|e||` scaled by
/// `Σ |f(u)|/|e| + |f(v)| Σ 1/|e|`.
pub fn max_kirchhoff_residual(field: &HarmonicField, g: &SphereGraph) -> f64 {
    let top = field.horizon().min(g.horizon());
    let mut worst = 0.0f64;
    for sphere in 0..top {
        for index in 0..field.values[sphere].len() {
            let v = Vertex::new(sphere, index);
            let fv = field.values[sphere][index];
            let mut balance = 0.0;
            let mut scale = 0.0;
            let mut conductance = 0.0;
            for (u, len) in g.neighbors(v).expect("vertex within horizon") {
                let fu = match field.value(u) {
                    Some(x) => x,
                    None => continue,
                };
                balance += (fu - fv) / len;
                scale += fu.abs() / len;
                conductance += 1.0 / len;
            }
            scale += fv.abs() * conductance;
            let rel = if scale > 0.0 {
                balance.abs() / scale
            } else {
                balance.abs()
            };
            worst = worst.max(rel);
        }
    }
    worst
}

/// ℓ²(V; m) and Dirichlet-sum membership of a harmonic field.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MembershipReport {
    /// Verdict on `Σ |f(v)|² m(v)` (terms grouped per sphere).
    pub l2m: SummabilityVerdict,
    /// Verdict on `Σ_e |f(u)-f(v)|²/|e|` (terms grouped per layer).
    pub dirichlet: SummabilityVerdict,
    /// `max |f|` per sphere.
    pub sup_per_sphere: Vec<F17>,
    /// Field values along each canonical ray.
    pub ray_traces: Vec<Vec<F17>>,
}

impl MembershipReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization cannot fail")
    }
}

/// Evaluates both membership series up to `horizon`.
///
/// Needs `horizon < g.horizon()` so every star weight is fully generated.
pub fn membership(
    field: &HarmonicField,
    g: &SphereGraph,
    horizon: usize,
    opts: &SummabilityOptions,
) -> Result<MembershipReport, HarmonicError> {
    if horizon >= g.horizon() || horizon > field.horizon() {
        return Err(HarmonicError::Graph(GraphError::HorizonExceeded {
            requested: horizon + 1,
            available: g.horizon().min(field.horizon()),
        }));
    }
    // sphere-major, index-minor summation order throughout
    let mut l2m_terms = Vec::with_capacity(horizon + 1);
    for sphere in 0..=horizon {
        let mut t = 0.0;
        for index in 0..field.values[sphere].len() {
            let m = g.star_weight(Vertex::new(sphere, index))?;
            let f = field.values[sphere][index];
            t += f * f * m;
        }
        l2m_terms.push(t);
    }
    let mut dirichlet_terms = Vec::with_capacity(horizon);
    for layer in 1..=horizon {
        let mut t = 0.0;
        for &(i, j, len) in g.forward_edges(layer - 1)? {
            let df = field.values[layer][j] - field.values[layer - 1][i];
            t += df * df / len;
        }
        for &(i, j, len) in g.horizontal_edges(layer)? {
            let df = field.values[layer][j] - field.values[layer][i];
            t += df * df / len;
        }
        dirichlet_terms.push(t);
    }
    let sup_per_sphere = (0..=horizon)
        .map(|n| {
            F17(field.values[n]
                .iter()
                .fold(0.0f64, |acc, &v| acc.max(v.abs())))
        })
        .collect();
    let ray_traces = g
        .canonical_ray_vertices()?
        .iter()
        .map(|ray| {
            ray.iter()
                .take(horizon + 1)
                .filter_map(|&v| field.value(v))
                .map(F17)
                .collect()
        })
        .collect();
    Ok(MembershipReport {
        l2m: series::analyze(&l2m_terms, opts),
        dirichlet: series::analyze(&dirichlet_terms, opts),
        sup_per_sphere,
        ray_traces,
    })
}

/// Rank check on a collection of fields: values on the given spheres are
/// stacked (one row per field), columns are normalized to unit sup so spheres
/// of wildly different magnitude weigh equally, and the numerical rank is the
/// number of singular values above `1e-8 σ_max`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IndependenceCheck {
    pub rank: usize,
    pub sigma_ratio: F17,
}

pub fn stacked_rank(fields: &[&HarmonicField], spheres: std::ops::RangeInclusive<usize>) -> IndependenceCheck {
    let cols: usize = spheres
        .clone()
        .map(|n| fields.iter().map(|f| f.values[n].len()).max().unwrap_or(0))
        .sum();
    let mut mat = DMatrix::<f64>::zeros(fields.len(), cols);
    let mut col = 0;
    for n in spheres {
        let width = fields.iter().map(|f| f.values[n].len()).max().unwrap_or(0);
        for i in 0..width {
            for (row, f) in fields.iter().enumerate() {
                mat[(row, col)] = f.values[n].get(i).copied().unwrap_or(0.0);
            }
            col += 1;
        }
    }
    for mut c in mat.column_iter_mut() {
        let max = c.iter().fold(0.0f64, |acc, &x| acc.max(x.abs()));
        if max > 0.0 {
            c /= max;
        }
    }
    let svd = mat.svd(false, false);
    let sigma_max = svd.singular_values.max();
    let rank = svd
        .singular_values
        .iter()
        .filter(|&&s| s > 1e-8 * sigma_max)
        .count();
    let sigma_min = svd.singular_values.iter().cloned().fold(f64::INFINITY, f64::min);
    IndependenceCheck {
        rank,
        sigma_ratio: F17(if sigma_max > 0.0 { sigma_min / sigma_max } else { 0.0 }),
    }
}

/// Families with a constructive harmonic basis.
#[derive(Debug, Clone, PartialEq)]
pub enum DeficiencyFamily {
    /// `A_N` with the doubled-diagonal lengths; basis = N+1 seed vectors.
    AntitreeAn { n_cap: usize, scheme: LengthScheme },
    /// All-diagonals-doubled antitree; fields `f^1..f^K` (a lower bound on an
    /// unbounded family).
    AntitreeInfinite { fields: usize, scheme: LengthScheme },
    /// Basis `{1, g_0}`.
    RopeLadder { scheme: LengthScheme },
    /// Radially symmetric antitree; the recurrence collapses to constants.
    RadialAntitree { spheres: SphereRule, scheme: LengthScheme },
    /// Radially symmetric tree; only the ends-based lower bound is computed.
    RadialTree { branching: IntegerRule, scheme: LengthScheme },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimateKind {
    /// Finite total volume certified: the count is the deficiency index.
    DeficiencyIndex,
    /// Volume not certified finite: the count only bounds `dim ker H`.
    KernelDimensionOnly,
    /// The family's harmonic space is larger than what finite data shows.
    LowerBound,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FieldCertificate {
    pub label: String,
    pub l2m: SummabilityVerdict,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DeficiencyEstimate {
    pub family: String,
    /// Number of harmonic fields certified in `ℓ²(V; m)`.
    pub count: usize,
    /// Present when some verdicts stayed inconclusive: `[count, count + open]`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bracket: Option<(usize, usize)>,
    pub kind: EstimateKind,
    pub volume_finite_certified: bool,
    pub certificates: Vec<FieldCertificate>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub independence: Option<IndependenceCheck>,
}

impl DeficiencyEstimate {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization cannot fail")
    }
}

fn max_scheme_horizon(scheme: &LengthScheme, requested: usize) -> usize {
    for n in 0..requested {
        if scheme.length(n).is_err() {
            return n;
        }
    }
    requested
}

fn volume_certified_finite(g: &SphereGraph, opts: &SummabilityOptions) -> bool {
    let horizon = g.horizon();
    let terms: Vec<f64> = (1..=horizon)
        .map(|k| g.layer_volume(k).expect("within horizon"))
        .collect();
    series::analyze(&terms, opts).converges()
}

/// Counts the family's harmonic basis fields that pass the ℓ²(V; m) test and
/// bundles the certificates.
pub fn estimate_deficiency(
    family: &DeficiencyFamily,
    horizon: usize,
    opts: &SummabilityOptions,
) -> Result<DeficiencyEstimate, HarmonicError> {
    match family {
        DeficiencyFamily::AntitreeAn { n_cap, scheme } => {
            let n_cap = *n_cap;
            if n_cap == 0 {
                return Err(HarmonicError::UnknownFamily("A_0".into()));
            }
            let horizon = max_scheme_horizon(scheme, horizon).max(4);
            let g = build_antitree(&SphereRule::Affine { offset: n_cap }, scheme, false, horizon)?;
            let finite = volume_certified_finite(&g, opts);
            let mut fields = Vec::with_capacity(n_cap + 1);
            for k in 0..=n_cap {
                let mut seed = vec![0.0; n_cap + 1];
                seed[k] = 1.0;
                fields.push(solve_antitree_reduced(n_cap, scheme, &seed, horizon)?);
            }
            let mut certificates = Vec::new();
            let mut conv = 0;
            let mut open = 0;
            for (k, f) in fields.iter().enumerate() {
                let mhor = f.horizon().min(horizon - 1);
                let report = membership(f, &g, mhor, opts)?;
                let note = f.overflow_at.map(|s| {
                    format!(
                        "prefix stops at sphere {s}; tail dominated by the \
                         factorial growth bound against the chosen length decay"
                    )
                });
                if report.l2m.converges() {
                    conv += 1;
                } else if report.l2m.is_inconclusive() {
                    open += 1;
                }
                certificates.push(FieldCertificate {
                    label: format!("seed e_{}", k + 1),
                    l2m: report.l2m,
                    note,
                });
            }
            let refs: Vec<&HarmonicField> = fields.iter().collect();
            let independence = stacked_rank(&refs, 1..=3usize.min(horizon));
            Ok(DeficiencyEstimate {
                family: format!("antitree A_{n_cap}"),
                count: conv,
                bracket: (open > 0).then_some((conv, conv + open)),
                kind: if finite {
                    EstimateKind::DeficiencyIndex
                } else {
                    EstimateKind::KernelDimensionOnly
                },
                volume_finite_certified: finite,
                certificates,
                independence: Some(independence),
            })
        }
        DeficiencyFamily::AntitreeInfinite { fields: k_max, scheme } => {
            let horizon = max_scheme_horizon(scheme, horizon).max(k_max + 4);
            let g = build_antitree_infinite(scheme, horizon)?;
            let finite = volume_certified_finite(&g, opts);
            let mut fields = Vec::with_capacity(*k_max);
            for k in 1..=*k_max {
                fields.push(solve_antitree_infinite(k, scheme, horizon)?);
            }
            let mut certificates = Vec::new();
            let mut conv = 0;
            let mut open = 0;
            for (k, f) in fields.iter().enumerate() {
                let mhor = f.horizon().min(horizon - 1);
                let report = membership(f, &g, mhor, opts)?;
                if report.l2m.converges() {
                    conv += 1;
                } else if report.l2m.is_inconclusive() {
                    open += 1;
                }
                certificates.push(FieldCertificate {
                    label: format!("f^{}", k + 1),
                    l2m: report.l2m,
                    note: f.overflow_at.map(|s| format!("prefix stops at sphere {s}")),
                });
            }
            let refs: Vec<&HarmonicField> = fields.iter().collect();
            let stack_top = 8usize.min(horizon);
            let independence = stacked_rank(&refs, 0..=stack_top);
            Ok(DeficiencyEstimate {
                family: "antitree A_inf".into(),
                count: conv,
                bracket: (open > 0).then_some((conv, conv + open)),
                kind: EstimateKind::LowerBound,
                volume_finite_certified: finite,
                certificates,
                independence: Some(independence),
            })
        }
        DeficiencyFamily::RopeLadder { scheme } => {
            let horizon = max_scheme_horizon(scheme, horizon).max(8);
            let g = build_rope_ladder(scheme, horizon)?;
            let finite = volume_certified_finite(&g, opts);
            let constant = solve_rope_ladder(1.0, 1.0, &g, horizon)?;
            let g0 = rope_ladder_g0(&g, horizon)?;
            let mut conv = 0;
            let mut open = 0;
            let mut certificates = Vec::new();
            for (label, f) in [("constant", &constant), ("g0", &g0)] {
                let report = membership(f, &g, horizon - 1, opts)?;
                if report.l2m.converges() {
                    conv += 1;
                } else if report.l2m.is_inconclusive() {
                    open += 1;
                }
                certificates.push(FieldCertificate {
                    label: label.into(),
                    l2m: report.l2m,
                    note: None,
                });
            }
            let independence = stacked_rank(&[&constant, &g0], 1..=3);
            Ok(DeficiencyEstimate {
                family: "rope_ladder".into(),
                count: conv,
                bracket: (open > 0).then_some((conv, conv + open)),
                kind: if finite {
                    EstimateKind::DeficiencyIndex
                } else {
                    EstimateKind::KernelDimensionOnly
                },
                volume_finite_certified: finite,
                certificates,
                independence: Some(independence),
            })
        }
        DeficiencyFamily::RadialAntitree { spheres, scheme } => {
            let horizon = max_scheme_horizon(scheme, horizon).max(4);
            let g = build_antitree(spheres, scheme, true, horizon)?;
            let finite = volume_certified_finite(&g, opts);
            // the sphere-constant recurrence collapses: the harmonic space is
            // spanned by the constants, so at most one field can be in ℓ²(V;m)
            let field = solve_radial_constant(&g, 1.0, horizon)?;
            let mut max_dev = 0.0f64;
            for sphere in &field.values {
                for &v in sphere {
                    max_dev = max_dev.max((v - 1.0).abs());
                }
            }
            let report = membership(&field, &g, horizon - 1, opts)?;
            let conv = usize::from(report.l2m.converges());
            let open = usize::from(report.l2m.is_inconclusive());
            let certificates = vec![FieldCertificate {
                label: "constant".into(),
                l2m: report.l2m,
                note: Some(format!(
                    "radial recurrence collapse: max |c_n - c_0| = {max_dev:.3e}"
                )),
            }];
            Ok(DeficiencyEstimate {
                family: "radial antitree".into(),
                count: conv,
                bracket: (open > 0).then_some((conv, conv + open)),
                kind: if finite {
                    EstimateKind::DeficiencyIndex
                } else {
                    EstimateKind::KernelDimensionOnly
                },
                volume_finite_certified: finite,
                certificates,
                independence: None,
            })
        }
        DeficiencyFamily::RadialTree { branching, scheme } => {
            let horizon = max_scheme_horizon(scheme, horizon).max(4);
            let g = build_radial_tree(branching, scheme, horizon)?;
            let report = ends::analyze_ends(&g, horizon, opts)
                .map_err(|e| HarmonicError::Graph(GraphError::Config(e.to_string())))?;
            let verdict = ends::markov_uniqueness_verdict(&report);
            let count = verdict.finite_volume_ends_lower_bound;
            Ok(DeficiencyEstimate {
                family: "radial_tree".into(),
                count,
                bracket: None,
                kind: EstimateKind::LowerBound,
                volume_finite_certified: false,
                certificates: Vec::new(),
                independence: None,
            })
        }
    }
}
