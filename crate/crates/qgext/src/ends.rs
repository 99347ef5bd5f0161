//! Graph ends at a finite horizon.
//!
//! For each level `n <= horizon` we take the connected components of the
//! subgraph induced by spheres `n..=horizon` that still touch the horizon
//! sphere. Components refine as `n` grows, which yields a containment forest;
//! its stable branches are the computable shadow of the end space. Everything
//! reported here is a lower bound: ends are a limit object and finite data can
//! only witness separations, never exclude later ones. For tree families the
//! horizon-level components are genuine subtree separations, so the branch
//! count at the horizon itself is a valid bound; for families with horizontal
//! or complete bipartite joins the last level degenerates into singletons and
//! the bound is read one level earlier.

use serde::Serialize;
use std::collections::HashMap;

use crate::error::EndsError;
use crate::graph::SphereGraph;
use crate::report::F17;
use crate::series::{self, SummabilityOptions, SummabilityVerdict};

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "class", rename_all = "snake_case")]
pub enum VolumeClass {
    /// Tail volume series converges; `limit_upper` bounds the tail sum.
    Finite { limit_upper: F17 },
    Infinite,
    Unknown,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Branch {
    pub id: usize,
    /// Sphere at which this branch separated from all other branches.
    pub witness_sphere: usize,
    /// True when the branch never splits again within the horizon window.
    pub free_at_horizon: bool,
    pub volume_class: VolumeClass,
    /// Verdict on the tail volume series (carries partial sums).
    pub tail: Option<SummabilityVerdict>,
    /// Vertex indices per sphere, starting at `witness_sphere`.
    #[serde(skip)]
    pub members: Vec<Vec<usize>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EndReport {
    pub ends_lower_bound: usize,
    pub horizon: usize,
    /// Component counts per level `1..=reference level`.
    pub branch_counts: Vec<usize>,
    /// True when the branch count still grows over the trailing window
    /// (tree-like explosion; the bound is then only "ends >= count").
    pub growing: bool,
    pub branches: Vec<Branch>,
}

impl EndReport {
    /// The serialization promised to external consumers.
    pub fn to_json(&self) -> String {
        #[derive(Serialize)]
        struct BranchOut<'a> {
            id: usize,
            volume_class: &'a str,
            free_at_horizon: bool,
            tail_partial_sums: Vec<F17>,
        }
        #[derive(Serialize)]
        struct Out<'a> {
            ends_lower_bound: usize,
            branches: Vec<BranchOut<'a>>,
        }
        let out = Out {
            ends_lower_bound: self.ends_lower_bound,
            branches: self
                .branches
                .iter()
                .map(|b| BranchOut {
                    id: b.id,
                    volume_class: match b.volume_class {
                        VolumeClass::Finite { .. } => "finite",
                        VolumeClass::Infinite => "infinite",
                        VolumeClass::Unknown => "unknown",
                    },
                    free_at_horizon: b.free_at_horizon,
                    tail_partial_sums: b
                        .tail
                        .as_ref()
                        .map(|t| t.partial_sums.clone())
                        .unwrap_or_default(),
                })
                .collect(),
        };
        serde_json::to_string_pretty(&out).expect("report serialization cannot fail")
    }
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
        }
    }

    fn find(&mut self, x: usize) -> usize {
        let mut root = x;
        while self.parent[root] != root {
            root = self.parent[root];
        }
        let mut cur = x;
        while self.parent[cur] != root {
            let next = self.parent[cur];
            self.parent[cur] = root;
            cur = next;
        }
        root
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            // keep the smaller id as the canonical label
            let (lo, hi) = (ra.min(rb), ra.max(rb));
            self.parent[hi] = lo;
        }
    }
}

/// Enumerates the branch structure visible at `horizon`.
pub fn detect_ends(g: &SphereGraph, horizon: usize) -> Result<EndReport, EndsError> {
    if horizon < 2 {
        return Err(EndsError::HorizonTooSmall(horizon));
    }
    if horizon > g.horizon() {
        return Err(EndsError::Graph(crate::error::GraphError::HorizonExceeded {
            requested: horizon,
            available: g.horizon(),
        }));
    }
    let mut offsets = vec![0usize; horizon + 2];
    for n in 0..=horizon {
        offsets[n + 1] = offsets[n] + g.sphere_size(n)?;
    }
    let total = offsets[horizon + 1];
    let vid = |sphere: usize, index: usize| offsets[sphere] + index;

    // Incremental union-find from the horizon sphere downwards. labels[n-1]
    // maps each vertex of spheres n..=horizon to its component label.
    let mut uf = UnionFind::new(total);
    let mut labels: Vec<HashMap<usize, usize>> = vec![HashMap::new(); horizon];
    for n in (1..=horizon).rev() {
        for &(i, j, _) in g.horizontal_edges(n)? {
            uf.union(vid(n, i), vid(n, j));
        }
        if n < horizon {
            for &(i, j, _) in g.forward_edges(n)? {
                uf.union(vid(n, i), vid(n + 1, j));
            }
        }
        let map = &mut labels[n - 1];
        for sphere in n..=horizon {
            for index in 0..g.sphere_size(sphere)? {
                let id = vid(sphere, index);
                map.insert(id, uf.find(id));
            }
        }
    }
    // Components that touch the horizon sphere, per level.
    let mut comps_per_level: Vec<Vec<usize>> = Vec::with_capacity(horizon);
    for n in 1..=horizon {
        let map = &labels[n - 1];
        let mut touching: Vec<usize> = (0..g.sphere_size(horizon)?)
            .map(|i| map[&vid(horizon, i)])
            .collect();
        touching.sort_unstable();
        touching.dedup();
        comps_per_level.push(touching);
    }

    let reference = if g.is_tree() { horizon } else { horizon - 1 };
    let counts: Vec<usize> = (1..=reference)
        .map(|n| comps_per_level[n - 1].len())
        .collect();
    let window_start = horizon.div_ceil(2).max(1);
    let growing = (window_start..reference)
        .any(|n| counts[n - 1] != counts[reference - 1]);

    // Ancestor chains: for each reference branch, its component label at
    // every level 1..=reference.
    let branch_labels = comps_per_level[reference - 1].clone();
    let chains: Vec<Vec<usize>> = branch_labels
        .iter()
        .map(|&label| {
            // label is the canonical (smallest) vertex id of the component
            (1..=reference)
                .map(|n| labels[n - 1][&label])
                .collect::<Vec<usize>>()
        })
        .collect();

    let mut branches = Vec::with_capacity(branch_labels.len());
    for (b, &label) in branch_labels.iter().enumerate() {
        // Witness: first level after the deepest level where this chain still
        // coincides with another branch's chain.
        let mut witness = 1usize;
        for (other, chain) in chains.iter().enumerate() {
            if other == b {
                continue;
            }
            for n in (1..=reference).rev() {
                if chain[n - 1] == chains[b][n - 1] {
                    witness = witness.max(n + 1);
                    break;
                }
            }
        }
        let witness = witness.min(reference);
        // Free at horizon: the branch separated before the trailing window
        // and has been stable since. A witness inside the window means the
        // lineage was still splitting recently.
        let free = witness <= window_start;
        // Member vertices per sphere from the witness level on.
        let witness_map = &labels[witness - 1];
        let my_label = witness_map[&label];
        let mut members = Vec::with_capacity(horizon - witness + 1);
        for sphere in witness..=horizon {
            let mut list: Vec<usize> = (0..g.sphere_size(sphere)?)
                .filter(|&i| witness_map[&vid(sphere, i)] == my_label)
                .collect();
            list.sort_unstable();
            members.push(list);
        }
        branches.push(Branch {
            id: b,
            witness_sphere: witness,
            free_at_horizon: free,
            volume_class: VolumeClass::Unknown,
            tail: None,
            members,
        });
    }

    Ok(EndReport {
        ends_lower_bound: branches.len(),
        horizon,
        branch_counts: counts,
        growing,
        branches,
    })
}

/// Classifies a branch's tail volume through the summability gate.
pub fn classify_end_volume(
    g: &SphereGraph,
    branch: &Branch,
    horizon: usize,
    opts: &SummabilityOptions,
) -> Result<(VolumeClass, SummabilityVerdict), EndsError> {
    let witness = branch.witness_sphere;
    let in_branch = |sphere: usize, index: usize| -> bool {
        sphere >= witness
            && branch
                .members
                .get(sphere - witness)
                .map(|m| m.binary_search(&index).is_ok())
                .unwrap_or(false)
    };
    let mut terms = Vec::with_capacity(horizon - witness);
    for k in (witness + 1)..=horizon {
        let mut layer = 0.0;
        for &(i, j, len) in g.forward_edges(k - 1)? {
            if in_branch(k - 1, i) && in_branch(k, j) {
                layer += len;
            }
        }
        for &(i, j, len) in g.horizontal_edges(k)? {
            if in_branch(k, i) && in_branch(k, j) {
                layer += len;
            }
        }
        terms.push(layer);
    }
    let verdict = series::analyze(&terms, opts);
    let class = if verdict.converges() {
        VolumeClass::Finite {
            limit_upper: F17(verdict.upper_estimate().unwrap_or(verdict.partial_sum())),
        }
    } else if verdict.diverges() {
        VolumeClass::Infinite
    } else {
        VolumeClass::Unknown
    };
    Ok((class, verdict))
}

/// Detects ends and classifies every branch's volume.
pub fn analyze_ends(
    g: &SphereGraph,
    horizon: usize,
    opts: &SummabilityOptions,
) -> Result<EndReport, EndsError> {
    let mut report = detect_ends(g, horizon)?;
    for branch in &mut report.branches {
        let (class, verdict) = classify_end_volume(g, branch, horizon, opts)?;
        branch.volume_class = class;
        branch.tail = Some(verdict);
    }
    Ok(report)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MarkovUniqueness {
    Unique,
    NonUnique,
    Unknown,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MarkovVerdict {
    pub verdict: MarkovUniqueness,
    /// Lower bound on the number of finite volume ends (feeds the deficiency
    /// bound N±(H0) >= #C0).
    pub finite_volume_ends_lower_bound: usize,
}

/// Markovian-uniqueness decision: unique exactly when every visible branch
/// has infinite volume.
pub fn markov_uniqueness_verdict(report: &EndReport) -> MarkovVerdict {
    let finite = report
        .branches
        .iter()
        .filter(|b| matches!(b.volume_class, VolumeClass::Finite { .. }))
        .count();
    let all_infinite = report
        .branches
        .iter()
        .all(|b| matches!(b.volume_class, VolumeClass::Infinite));
    let verdict = if finite > 0 {
        MarkovUniqueness::NonUnique
    } else if all_infinite {
        MarkovUniqueness::Unique
    } else {
        MarkovUniqueness::Unknown
    };
    MarkovVerdict {
        verdict,
        finite_volume_ends_lower_bound: finite,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{
        build_antitree, build_radial_tree, build_rope_ladder, build_two_ray_tree, IntegerRule,
        LengthScheme, SphereRule,
    };

    fn opts() -> SummabilityOptions {
        SummabilityOptions::default()
    }

    #[test]
    fn rope_ladder_has_one_free_end() {
        let g = build_rope_ladder(&LengthScheme::Unit, 12).unwrap();
        let report = detect_ends(&g, 12).unwrap();
        assert_eq!(report.ends_lower_bound, 1);
        assert!(!report.growing);
        assert!(report.branches[0].free_at_horizon);
    }

    #[test]
    fn antitree_has_one_free_end() {
        let g = build_antitree(
            &SphereRule::Affine { offset: 1 },
            &LengthScheme::power(4.0),
            true,
            12,
        )
        .unwrap();
        let report = detect_ends(&g, 12).unwrap();
        assert_eq!(report.ends_lower_bound, 1);
        assert!(report.branches[0].free_at_horizon);
    }

    #[test]
    fn binary_tree_branches_explode() {
        let g = build_radial_tree(&IntegerRule::Constant(2), &LengthScheme::Unit, 8).unwrap();
        let report = detect_ends(&g, 8).unwrap();
        assert_eq!(report.ends_lower_bound, 256);
        assert!(report.growing);
        assert!(report.branches.iter().all(|b| !b.free_at_horizon));
    }

    #[test]
    fn end_count_monotone_in_horizon() {
        let g = build_radial_tree(&IntegerRule::Constant(2), &LengthScheme::Unit, 9).unwrap();
        let mut last = 0;
        for h in 2..=9 {
            let report = detect_ends(&g, h).unwrap();
            assert!(report.ends_lower_bound >= last);
            last = report.ends_lower_bound;
        }
        let ladder = build_rope_ladder(&LengthScheme::Unit, 16).unwrap();
        for h in 2..=16 {
            assert_eq!(detect_ends(&ladder, h).unwrap().ends_lower_bound, 1);
        }
    }

    #[test]
    fn volume_classification_antitree() {
        // ℓ_n = (n+1)^{-4}: layer volume ~ n^{-2}, finite
        let g = build_antitree(
            &SphereRule::Affine { offset: 1 },
            &LengthScheme::power(4.0),
            true,
            40,
        )
        .unwrap();
        let report = analyze_ends(&g, 40, &opts()).unwrap();
        assert!(matches!(
            report.branches[0].volume_class,
            VolumeClass::Finite { .. }
        ));
        // unit lengths: layer volumes grow
        let g = build_antitree(
            &SphereRule::Affine { offset: 1 },
            &LengthScheme::Unit,
            true,
            20,
        )
        .unwrap();
        let report = analyze_ends(&g, 20, &opts()).unwrap();
        assert!(matches!(
            report.branches[0].volume_class,
            VolumeClass::Infinite
        ));
    }

    #[test]
    fn rope_ladder_power6_is_finite_volume() {
        let g = build_rope_ladder(&LengthScheme::rope_ladder_power(6.0), 60).unwrap();
        let report = analyze_ends(&g, 60, &opts()).unwrap();
        assert!(matches!(
            report.branches[0].volume_class,
            VolumeClass::Finite { .. }
        ));
        let verdict = markov_uniqueness_verdict(&report);
        assert_eq!(verdict.verdict, MarkovUniqueness::NonUnique);
        assert_eq!(verdict.finite_volume_ends_lower_bound, 1);
    }

    #[test]
    fn mixed_two_ray_tree_is_non_unique() {
        let g = build_two_ray_tree(
            &LengthScheme::geometric(0.5),
            &LengthScheme::Unit,
            40,
        )
        .unwrap();
        let report = analyze_ends(&g, 40, &opts()).unwrap();
        assert_eq!(report.ends_lower_bound, 2);
        let verdict = markov_uniqueness_verdict(&report);
        assert_eq!(verdict.verdict, MarkovUniqueness::NonUnique);
        assert_eq!(verdict.finite_volume_ends_lower_bound, 1);
    }

    #[test]
    fn unit_variants_are_unique() {
        let ladder = build_rope_ladder(&LengthScheme::Unit, 30).unwrap();
        let report = analyze_ends(&ladder, 30, &opts()).unwrap();
        assert_eq!(
            markov_uniqueness_verdict(&report).verdict,
            MarkovUniqueness::Unique
        );
    }

    #[test]
    fn tail_plus_interior_matches_truncation_volume() {
        let g = build_two_ray_tree(
            &LengthScheme::geometric(0.5),
            &LengthScheme::Unit,
            20,
        )
        .unwrap();
        let report = analyze_ends(&g, 20, &opts()).unwrap();
        let witness = report.branches[0].witness_sphere;
        assert!(report.branches.iter().all(|b| b.witness_sphere == witness));
        let interior = g.truncate(witness).unwrap().volume();
        let tails: f64 = report
            .branches
            .iter()
            .map(|b| b.tail.as_ref().unwrap().partial_sum())
            .sum();
        let total = g.truncate(20).unwrap().volume();
        assert!((interior + tails - total).abs() <= 1e-10 * total.max(1.0));
    }

    #[test]
    fn reports_are_deterministic() {
        let g = build_rope_ladder(&LengthScheme::rope_ladder_power(6.0), 30).unwrap();
        let a = analyze_ends(&g, 30, &opts()).unwrap().to_json();
        let b = analyze_ends(&g, 30, &opts()).unwrap().to_json();
        assert_eq!(a, b);
    }

    #[test]
    fn small_horizon_is_rejected() {
        let g = build_rope_ladder(&LengthScheme::Unit, 5).unwrap();
        assert!(matches!(
            detect_ends(&g, 1),
            Err(EndsError::HorizonTooSmall(1))
        ));
    }
}
