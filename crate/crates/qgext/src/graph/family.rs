//! Graph family generators and the JSON config front-end.

use serde::{Deserialize, Serialize};

use crate::error::GraphError;
use crate::report::{format_f17, F17};

use super::{FamilyInfo, ForwardEdge, HorizontalEdge, LengthScheme, SphereGraph};

/// Sphere-number rule; sphere 0 always has exactly the root.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SphereRule {
    /// `s_n = n + offset` for `n >= 1`.
    Affine { offset: usize },
    /// `s_n = size` for `n >= 1`.
    Constant { size: usize },
    Explicit { sizes: Vec<usize> },
}

impl SphereRule {
    pub fn size(&self, n: usize) -> Result<usize, GraphError> {
        if n == 0 {
            return Ok(1);
        }
        let s = match self {
            SphereRule::Affine { offset } => n + offset,
            SphereRule::Constant { size } => *size,
            SphereRule::Explicit { sizes } => *sizes.get(n).ok_or(GraphError::Config(format!(
                "explicit sphere rule exhausted at n = {n}"
            )))?,
        };
        if s == 0 {
            return Err(GraphError::NonpositiveSphere { sphere: n, size: s });
        }
        Ok(s)
    }

    /// Parses `"n+2"`, `"n + 2"` or a plain integer.
    pub fn parse(text: &str) -> Result<Self, GraphError> {
        let compact: String = text.chars().filter(|c| !c.is_whitespace()).collect();
        if let Some(rest) = compact.strip_prefix("n+") {
            let offset: usize = rest
                .parse()
                .map_err(|_| GraphError::Config(format!("bad sphere rule '{text}'")))?;
            return Ok(SphereRule::Affine { offset });
        }
        if let Ok(size) = compact.parse::<usize>() {
            return Ok(SphereRule::Constant { size });
        }
        Err(GraphError::Config(format!("bad sphere rule '{text}'")))
    }

    fn describe(&self) -> String {
        match self {
            SphereRule::Affine { offset } => format!("n+{offset}"),
            SphereRule::Constant { size } => format!("{size}"),
            SphereRule::Explicit { sizes } => format!("explicit({} entries)", sizes.len()),
        }
    }
}

/// Per-level integer rule (used for branching numbers).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum IntegerRule {
    Constant(usize),
    Explicit(Vec<usize>),
}

impl IntegerRule {
    pub fn value(&self, n: usize) -> Result<usize, GraphError> {
        let v = match self {
            IntegerRule::Constant(b) => *b,
            IntegerRule::Explicit(list) => *list.get(n).ok_or(GraphError::Config(format!(
                "branching rule exhausted at n = {n}"
            )))?,
        };
        if v == 0 {
            return Err(GraphError::Config(format!(
                "branching must be at least 1, got 0 at n = {n}"
            )));
        }
        Ok(v)
    }
}

/// Builds the antitree with the given sphere numbers up to `horizon`.
///
/// With `symmetric` every edge between `S_n` and `S_{n+1}` has length `ℓ_n`.
/// Otherwise the sphere rule must be `n+N` and the N diagonal edges
/// `v_i^n – v_i^{n+1}` (i <= N) are doubled to `2ℓ_n`, the length pattern of
/// the deficiency-index-(N+1) construction.
pub fn build_antitree(
    rule: &SphereRule,
    scheme: &LengthScheme,
    symmetric: bool,
    horizon: usize,
) -> Result<SphereGraph, GraphError> {
    let doubled = if symmetric {
        0
    } else {
        match rule {
            SphereRule::Affine { offset } if *offset >= 1 => *offset,
            _ => {
                return Err(GraphError::Config(
                    "asymmetric lengths need sphere numbers n+N with N >= 1".into(),
                ))
            }
        }
    };
    build_antitree_inner(rule, scheme, doubled, false, horizon, symmetric)
}

/// Builds the antitree with sphere numbers `n+1` and every diagonal edge
/// doubled, the base graph of the unbounded-deficiency construction.
pub fn build_antitree_infinite(
    scheme: &LengthScheme,
    horizon: usize,
) -> Result<SphereGraph, GraphError> {
    build_antitree_inner(
        &SphereRule::Affine { offset: 1 },
        scheme,
        usize::MAX,
        true,
        horizon,
        false,
    )
}

fn build_antitree_inner(
    rule: &SphereRule,
    scheme: &LengthScheme,
    doubled: usize,
    all_diagonal: bool,
    horizon: usize,
    symmetric: bool,
) -> Result<SphereGraph, GraphError> {
    let mut sizes = Vec::with_capacity(horizon + 1);
    for n in 0..=horizon {
        sizes.push(rule.size(n)?);
    }
    let mut forward = Vec::with_capacity(horizon);
    for n in 0..horizon {
        let len = scheme.length(n)?;
        let mut edges = Vec::with_capacity(sizes[n] * sizes[n + 1]);
        for i in 0..sizes[n] {
            for j in 0..sizes[n + 1] {
                let double = i == j && (all_diagonal || i < doubled);
                edges.push((i, j, if double { 2.0 * len } else { len }));
            }
        }
        forward.push(edges);
    }
    let horizontal = vec![Vec::new(); horizon + 1];
    let name = if all_diagonal {
        "antitree_infinite"
    } else {
        "antitree"
    };
    let family = FamilyInfo {
        name: name.into(),
        detail: format!(
            "spheres {}, {}",
            rule.describe(),
            if symmetric { "symmetric" } else { "asymmetric" }
        ),
        canonical_rays: vec![vec![0; horizon]],
        notes: Vec::new(),
    };
    SphereGraph::from_parts(sizes, forward, horizontal, family)
}

/// Builds the rope ladder: two rails joined by a rung at every level >= 1,
/// both rails attached to the root by diagonal edges.
pub fn build_rope_ladder(
    scheme: &LengthScheme,
    horizon: usize,
) -> Result<SphereGraph, GraphError> {
    let mut sizes = vec![1usize];
    sizes.extend(std::iter::repeat(2).take(horizon));
    let mut forward: Vec<Vec<ForwardEdge>> = Vec::with_capacity(horizon);
    let mut horizontal: Vec<Vec<HorizontalEdge>> = vec![Vec::new(); horizon + 1];
    for n in 0..horizon {
        let plus = scheme.length(n)?;
        let minus = scheme.minus_rail_length(n)?;
        if n == 0 {
            forward.push(vec![(0, 0, plus), (0, 1, minus)]);
        } else {
            forward.push(vec![(0, 0, plus), (1, 1, minus)]);
        }
    }
    for n in 1..=horizon {
        horizontal[n] = vec![(0, 1, scheme.rung_length(n)?)];
    }
    let mut notes = Vec::new();
    if matches!(scheme, LengthScheme::RopeLadderPower { .. }) {
        notes.push(
            "rung formula value at level 0 is 0 and unused; no rung exists at the root level"
                .into(),
        );
    }
    let family = FamilyInfo {
        name: "rope_ladder".into(),
        detail: scheme_label(scheme),
        canonical_rays: vec![vec![0; horizon], vec![1; horizon]],
        notes,
    };
    SphereGraph::from_parts(sizes, forward, horizontal, family)
}

/// Builds a radially symmetric tree: every vertex of `S_n` has
/// `branching(n)` children, all edges between `S_n` and `S_{n+1}` share the
/// length `ℓ_n`.
pub fn build_radial_tree(
    branching: &IntegerRule,
    scheme: &LengthScheme,
    horizon: usize,
) -> Result<SphereGraph, GraphError> {
    let mut sizes = vec![1usize];
    let mut forward = Vec::with_capacity(horizon);
    for n in 0..horizon {
        let b = branching.value(n)?;
        let len = scheme.length(n)?;
        let parent_count = sizes[n];
        let mut edges = Vec::with_capacity(parent_count * b);
        for i in 0..parent_count {
            for c in 0..b {
                edges.push((i, i * b + c, len));
            }
        }
        forward.push(edges);
        sizes.push(parent_count * b);
    }
    let family = FamilyInfo {
        name: "radial_tree".into(),
        detail: scheme_label(scheme),
        canonical_rays: vec![vec![0; horizon]],
        notes: Vec::new(),
    };
    SphereGraph::from_parts(sizes, forward, vec![Vec::new(); horizon + 1], family)
}

/// A degree-2 root continued by two independent rays with their own length
/// schemes. Useful as the smallest graph with two ends of possibly different
/// volume class.
pub fn build_two_ray_tree(
    scheme_a: &LengthScheme,
    scheme_b: &LengthScheme,
    horizon: usize,
) -> Result<SphereGraph, GraphError> {
    let mut sizes = vec![1usize];
    sizes.extend(std::iter::repeat(2).take(horizon));
    let mut forward = Vec::with_capacity(horizon);
    for n in 0..horizon {
        let a = scheme_a.length(n)?;
        let b = scheme_b.length(n)?;
        if n == 0 {
            forward.push(vec![(0, 0, a), (0, 1, b)]);
        } else {
            forward.push(vec![(0, 0, a), (1, 1, b)]);
        }
    }
    let family = FamilyInfo {
        name: "two_ray_tree".into(),
        detail: format!("{} / {}", scheme_label(scheme_a), scheme_label(scheme_b)),
        canonical_rays: vec![vec![0; horizon], vec![1; horizon]],
        notes: Vec::new(),
    };
    SphereGraph::from_parts(sizes, forward, vec![Vec::new(); horizon + 1], family)
}

fn scheme_label(scheme: &LengthScheme) -> String {
    match scheme {
        LengthScheme::Unit => "unit".into(),
        LengthScheme::Geometric { ratio } => format!("geometric({})", ratio.0),
        LengthScheme::Power { exponent } => format!("power({})", exponent.0),
        LengthScheme::PaperAnDecay { n_index } => format!("paper_an_decay({n_index})"),
        LengthScheme::PaperAinfDecay => "paper_ainf_decay".into(),
        LengthScheme::RopeLadderPower { exponent } => {
            format!("rope_ladder_power({})", exponent.0)
        }
        LengthScheme::Explicit { lengths } => format!("explicit({} entries)", lengths.len()),
        LengthScheme::RopeLadderExplicit { plus, .. } => {
            format!("rope_ladder_explicit({} entries)", plus.len())
        }
    }
}

/// `{"name": ..., "args": [...]}` scheme description used in configs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchemeConfig {
    pub name: String,
    #[serde(default)]
    pub args: Vec<serde_json::Value>,
}

fn value_to_f64(v: &serde_json::Value) -> Result<f64, GraphError> {
    match v {
        serde_json::Value::Number(n) => n
            .as_f64()
            .ok_or_else(|| GraphError::Config(format!("bad numeric argument {n}"))),
        serde_json::Value::String(s) => s
            .parse::<f64>()
            .map_err(|_| GraphError::Config(format!("bad numeric argument '{s}'"))),
        other => Err(GraphError::Config(format!("bad numeric argument {other}"))),
    }
}

fn value_to_usize(v: &serde_json::Value) -> Result<usize, GraphError> {
    let x = value_to_f64(v)?;
    if x < 0.0 || x.fract() != 0.0 {
        return Err(GraphError::Config(format!("expected a nonnegative integer, got {x}")));
    }
    Ok(x as usize)
}

impl SchemeConfig {
    /// Parses the compact CLI form `name:arg1,arg2`.
    pub fn parse_compact(text: &str) -> Result<Self, GraphError> {
        let (name, rest) = match text.split_once(':') {
            Some((n, r)) => (n, r),
            None => (text, ""),
        };
        let args = if rest.is_empty() {
            Vec::new()
        } else {
            rest.split(',')
                .map(|a| {
                    a.parse::<f64>()
                        .map(|x| serde_json::json!(x))
                        .map_err(|_| GraphError::Config(format!("bad scheme argument '{a}'")))
                })
                .collect::<Result<Vec<_>, _>>()?
        };
        Ok(SchemeConfig {
            name: name.to_string(),
            args,
        })
    }

    pub fn to_scheme(&self) -> Result<LengthScheme, GraphError> {
        let arg = |k: usize| -> Result<&serde_json::Value, GraphError> {
            self.args
                .get(k)
                .ok_or_else(|| GraphError::Config(format!("scheme '{}' needs argument {k}", self.name)))
        };
        match self.name.as_str() {
            "unit" => Ok(LengthScheme::Unit),
            "geometric" => Ok(LengthScheme::geometric(value_to_f64(arg(0)?)?)),
            "power" => Ok(LengthScheme::power(value_to_f64(arg(0)?)?)),
            "paper_AN_decay" | "paper_an_decay" => {
                Ok(LengthScheme::paper_an_decay(value_to_usize(arg(0)?)?))
            }
            "paper_Ainf_decay" | "paper_ainf_decay" => Ok(LengthScheme::PaperAinfDecay),
            "rope_ladder_power" => Ok(LengthScheme::rope_ladder_power(value_to_f64(arg(0)?)?)),
            "explicit" => {
                let lengths = self
                    .args
                    .iter()
                    .map(|v| value_to_f64(v).map(F17))
                    .collect::<Result<Vec<_>, _>>()?;
                Ok(LengthScheme::Explicit { lengths })
            }
            other => Err(GraphError::Config(format!("unknown length scheme '{other}'"))),
        }
    }

    pub fn from_scheme(scheme: &LengthScheme) -> Self {
        let (name, args) = match scheme {
            LengthScheme::Unit => ("unit", vec![]),
            LengthScheme::Geometric { ratio } => {
                ("geometric", vec![serde_json::json!(format_f17(ratio.0))])
            }
            LengthScheme::Power { exponent } => {
                ("power", vec![serde_json::json!(format_f17(exponent.0))])
            }
            LengthScheme::PaperAnDecay { n_index } => {
                ("paper_an_decay", vec![serde_json::json!(n_index)])
            }
            LengthScheme::PaperAinfDecay => ("paper_ainf_decay", vec![]),
            LengthScheme::RopeLadderPower { exponent } => (
                "rope_ladder_power",
                vec![serde_json::json!(format_f17(exponent.0))],
            ),
            LengthScheme::Explicit { lengths } => (
                "explicit",
                lengths
                    .iter()
                    .map(|l| serde_json::json!(format_f17(l.0)))
                    .collect(),
            ),
            LengthScheme::RopeLadderExplicit { plus, minus, rungs } => (
                "rope_ladder_explicit",
                vec![
                    serde_json::json!(plus.iter().map(|l| format_f17(l.0)).collect::<Vec<_>>()),
                    serde_json::json!(minus.iter().map(|l| format_f17(l.0)).collect::<Vec<_>>()),
                    serde_json::json!(rungs
                        .iter()
                        .map(|(n, l)| (n, format_f17(l.0)))
                        .collect::<Vec<_>>()),
                ],
            ),
        };
        SchemeConfig {
            name: name.into(),
            args,
        }
    }
}

/// Loadable description of a graph family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilyConfig {
    pub family: String,
    #[serde(default)]
    pub params: serde_json::Map<String, serde_json::Value>,
    pub length_scheme: SchemeConfig,
}

impl FamilyConfig {
    pub fn new(family: &str, length_scheme: SchemeConfig) -> Self {
        FamilyConfig {
            family: family.into(),
            params: serde_json::Map::new(),
            length_scheme,
        }
    }

    pub fn with_param(mut self, key: &str, value: serde_json::Value) -> Self {
        self.params.insert(key.into(), value);
        self
    }

    pub fn from_json(text: &str) -> Result<Self, GraphError> {
        serde_json::from_str(text).map_err(|e| GraphError::Config(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serialization cannot fail")
    }

    /// Generates the configured family up to `horizon`.
    pub fn build(&self, horizon: usize) -> Result<SphereGraph, GraphError> {
        let mut scheme = self.length_scheme.to_scheme()?;
        match self.family.as_str() {
            "antitree" => {
                let rule = match self.params.get("spheres") {
                    Some(serde_json::Value::String(s)) => SphereRule::parse(s)?,
                    Some(other) => {
                        return Err(GraphError::Config(format!("bad 'spheres' param {other}")))
                    }
                    None => SphereRule::Affine { offset: 1 },
                };
                let symmetric = match self.params.get("symmetric") {
                    Some(serde_json::Value::Bool(b)) => *b,
                    None => true,
                    Some(other) => {
                        return Err(GraphError::Config(format!("bad 'symmetric' param {other}")))
                    }
                };
                build_antitree(&rule, &scheme, symmetric, horizon)
            }
            "antitree_infinite" => build_antitree_infinite(&scheme, horizon),
            "rope_ladder" => {
                // A plain power scheme on the rope ladder means the family's
                // canonical power lengths (rails 1/(n+1)^s, matching rungs).
                if let LengthScheme::Power { exponent } = scheme {
                    scheme = LengthScheme::RopeLadderPower { exponent };
                }
                build_rope_ladder(&scheme, horizon)
            }
            "radial_tree" => {
                let branching = match self.params.get("branching") {
                    Some(v) => serde_json::from_value::<IntegerRule>(v.clone())
                        .map_err(|e| GraphError::Config(format!("bad 'branching' param: {e}")))?,
                    None => IntegerRule::Constant(2),
                };
                build_radial_tree(&branching, &scheme, horizon)
            }
            "two_ray_tree" => {
                let scheme_b = match self.params.get("scheme_b") {
                    Some(v) => serde_json::from_value::<SchemeConfig>(v.clone())
                        .map_err(|e| GraphError::Config(format!("bad 'scheme_b' param: {e}")))?
                        .to_scheme()?,
                    None => scheme.clone(),
                };
                build_two_ray_tree(&scheme, &scheme_b, horizon)
            }
            other => Err(GraphError::Config(format!("unknown family '{other}'"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Vertex;

    #[test]
    fn antitree_with_growing_spheres() {
        // sphere numbers n+1: sphere 2 has 3 vertices and 12 forward edges to
        // the 4 vertices of sphere 3, all of length 1
        let g = build_antitree(
            &SphereRule::Affine { offset: 1 },
            &LengthScheme::Unit,
            true,
            4,
        )
        .unwrap();
        assert_eq!(g.sphere_size(2).unwrap(), 3);
        assert_eq!(g.forward_edges(2).unwrap().len(), 12);
        assert!(g.forward_edges(2).unwrap().iter().all(|&(_, _, l)| l == 1.0));
        // root meets s_1 = 2 unit edges
        assert_eq!(g.star_weight(Vertex::new(0, 0)).unwrap(), 2.0);
    }

    #[test]
    fn asymmetric_antitree_doubles_diagonals() {
        // A_2: edge (1,1) between S_1 and S_2 has length 2ℓ_1, edge (1,2) has ℓ_1
        let g = build_antitree(
            &SphereRule::Affine { offset: 2 },
            &LengthScheme::Unit,
            false,
            4,
        )
        .unwrap();
        let edges = g.forward_edges(1).unwrap();
        let get = |i: usize, j: usize| {
            edges
                .iter()
                .find(|&&(a, b, _)| a == i && b == j)
                .map(|&(_, _, l)| l)
                .unwrap()
        };
        assert_eq!(get(0, 0), 2.0);
        assert_eq!(get(0, 1), 1.0);
        assert_eq!(get(1, 1), 2.0);
        assert_eq!(get(2, 2), 1.0); // third row is past the doubled block
    }

    #[test]
    fn degenerate_antitree_is_a_ray() {
        let g = build_antitree(
            &SphereRule::Constant { size: 1 },
            &LengthScheme::Unit,
            true,
            5,
        )
        .unwrap();
        for n in 0..5 {
            assert_eq!(g.forward_edges(n).unwrap().len(), 1);
        }
        assert!(g.is_tree());
    }

    #[test]
    fn radial_tree_sizes_and_volumes() {
        let g = build_radial_tree(
            &IntegerRule::Constant(2),
            &LengthScheme::geometric(0.5),
            6,
        )
        .unwrap();
        assert_eq!(g.sphere_size(3).unwrap(), 8);
        // layer n has 2^{n+1} edges of length 2^{-n}: volume 2 per layer
        for k in 1..=6 {
            assert!((g.layer_volume(k).unwrap() - 2.0).abs() < 1e-12);
        }
        // lengths 8^{-n}: total volume 2 Σ (1/4)^n = 8/3, partial sum at 14
        // is within 2.67 * 0.25^14 of the limit
        let g = build_radial_tree(
            &IntegerRule::Constant(2),
            &LengthScheme::geometric(0.125),
            14,
        )
        .unwrap();
        let vol = g.truncate(14).unwrap().volume();
        assert!((vol - 8.0 / 3.0).abs() < 1e-7);
    }

    #[test]
    fn rejects_zero_branching() {
        assert!(build_radial_tree(&IntegerRule::Constant(0), &LengthScheme::Unit, 3).is_err());
    }

    #[test]
    fn antitree_is_not_a_tree_but_ladder_has_horizontals() {
        let g = build_antitree(
            &SphereRule::Affine { offset: 1 },
            &LengthScheme::Unit,
            true,
            3,
        )
        .unwrap();
        assert!(!g.is_tree());
        assert!(!g.has_horizontal_edges());
        let ladder = build_rope_ladder(&LengthScheme::Unit, 3).unwrap();
        assert!(ladder.has_horizontal_edges());
    }

    #[test]
    fn config_round_trip_preserves_lengths_exactly() {
        let config = FamilyConfig::new(
            "rope_ladder",
            SchemeConfig::from_scheme(&LengthScheme::rope_ladder_power(6.0)),
        );
        let text = config.to_json();
        let back = FamilyConfig::from_json(&text).unwrap();
        assert_eq!(config, back);
        let g1 = config.build(5).unwrap();
        let g2 = back.build(5).unwrap();
        assert_eq!(g1, g2);
    }

    #[test]
    fn cli_compact_scheme_parsing() {
        let c = SchemeConfig::parse_compact("power:6").unwrap();
        assert_eq!(c.name, "power");
        assert_eq!(c.to_scheme().unwrap(), LengthScheme::power(6.0));
        let rule = SphereRule::parse("n+1").unwrap();
        assert_eq!(rule, SphereRule::Affine { offset: 1 });
    }
}
