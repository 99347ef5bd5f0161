//! Sphere recurrences for Kirchhoff-harmonic functions.
//!
//! A harmonic function on a sphere-stratified graph without horizontal edges
//! is determined by its vertex values, and the Kirchhoff conditions at sphere
//! `n` couple exactly three consecutive spheres:
//!
//! ```text
//! M_1 f_1 = d f_0,            M_{n+1} f_{n+1} = D_n f_n - M_n* f_{n-1}
//! ```
//!
//! with `M_{n+1}` the matrix of reciprocal edge lengths between `S_n` and
//! `S_{n+1}` and `D_n` the diagonal of total reciprocal star lengths. The
//! general solver advances by minimum-norm least squares and gates on the
//! residual; the family solvers use the reduced closed forms.

use nalgebra::{DMatrix, DVector};

use crate::error::{GraphError, HarmonicError};
use crate::graph::{LengthScheme, SphereGraph};

use super::HarmonicField;

/// Relative tolerance for the root-equation seed check.
pub const SEED_TOL: f64 = 1e-10;
/// Relative residual above which the right-hand side is declared outside the
/// recurrence range.
pub const RESIDUAL_GATE: f64 = 1e-8;
/// Iterate magnitude treated as numeric overflow.
pub const OVERFLOW_LIMIT: f64 = 1e300;

/// The matrices driving the recurrence at sphere `n`.
#[derive(Debug, Clone, PartialEq)]
pub struct RecurrenceMatrices {
    /// `M_{n+1}`: `s_n x s_{n+1}`, entry `(k, j)` is `1/|e_kj|` (0 if absent).
    pub m_next: DMatrix<f64>,
    /// Diagonal of `D_n`.
    pub d: DVector<f64>,
}

/// Builds `M_{n+1}` and `D_n` from the generated graph.
///
/// Fails when the graph has horizontal edges: the recurrence assumes all
/// adjacency runs between consecutive spheres.
pub fn assemble_recurrence(
    g: &SphereGraph,
    n: usize,
) -> Result<RecurrenceMatrices, HarmonicError> {
    if g.has_horizontal_edges() {
        return Err(HarmonicError::HorizontalEdgesPresent);
    }
    let s_n = g.sphere_size(n)?;
    let s_next = g.sphere_size(n + 1)?;
    let mut m_next = DMatrix::zeros(s_n, s_next);
    for &(i, j, len) in g.forward_edges(n)? {
        m_next[(i, j)] = 1.0 / len;
    }
    let mut d = DVector::zeros(s_n);
    for k in 0..s_n {
        d[k] = m_next.row(k).sum();
    }
    if n > 0 {
        for &(i, j, len) in g.forward_edges(n - 1)? {
            let _ = i;
            d[j] += 1.0 / len;
        }
    }
    Ok(RecurrenceMatrices { m_next, d })
}

fn reciprocal_row_matrix(g: &SphereGraph, n: usize) -> Result<DMatrix<f64>, GraphError> {
    let mut m = DMatrix::zeros(g.sphere_size(n)?, g.sphere_size(n + 1)?);
    for &(i, j, len) in g.forward_edges(n)? {
        m[(i, j)] = 1.0 / len;
    }
    Ok(m)
}

fn overflowed(v: &DVector<f64>) -> bool {
    v.iter().any(|x| !x.is_finite() || x.abs() > OVERFLOW_LIMIT)
}

/// Advances the general sphere recurrence from a seed `(f_0, f_1)`.
///
/// Each step solves `M_{n+1} x = D_n f_n - M_n* f_{n-1}` as the minimum-norm
/// least-squares problem. A right-hand side whose residual exceeds
/// [`RESIDUAL_GATE`] relative to its norm lies outside the recurrence range
/// and stops the solve with [`HarmonicError::InconsistentAt`].
pub fn solve_sphere_recurrence(
    g: &SphereGraph,
    f0: f64,
    f1: &[f64],
    horizon: usize,
) -> Result<HarmonicField, HarmonicError> {
    if g.has_horizontal_edges() {
        return Err(HarmonicError::HorizontalEdgesPresent);
    }
    if horizon > g.horizon() {
        return Err(HarmonicError::Graph(GraphError::HorizonExceeded {
            requested: horizon,
            available: g.horizon(),
        }));
    }
    let s1 = g.sphere_size(1)?;
    if f1.len() != s1 {
        return Err(HarmonicError::Graph(GraphError::Config(format!(
            "seed f1 has {} entries, sphere 1 has {s1}",
            f1.len()
        ))));
    }
    let m1 = reciprocal_row_matrix(g, 0)?;
    let f1 = DVector::from_column_slice(f1);
    let lhs = (m1.clone() * &f1)[0];
    let d0: f64 = m1.sum();
    let scale = m1.abs() * f1.abs();
    let seed_scale = scale[0].max(d0 * f0.abs()).max(1e-300);
    let residual = (lhs - d0 * f0).abs();
    if residual > SEED_TOL * seed_scale {
        return Err(HarmonicError::SeedInconsistent {
            residual: residual / seed_scale,
            tol: SEED_TOL,
        });
    }

    let mut values = Vec::with_capacity(horizon + 1);
    values.push(vec![f0]);
    values.push(f1.iter().copied().collect::<Vec<f64>>());
    let mut prev = DVector::from_element(1, f0);
    let mut cur = f1;
    for n in 1..horizon {
        let mats = assemble_recurrence(g, n)?;
        let m_prev = reciprocal_row_matrix(g, n - 1)?;
        let rhs = DVector::from_fn(mats.d.len(), |k, _| mats.d[k] * cur[k])
            - m_prev.transpose() * &prev;
        if overflowed(&rhs) {
            let mut field = HarmonicField::new(values, "sphere_recurrence");
            field.overflow_at = Some(n + 1);
            return Ok(field);
        }
        let svd = mats.m_next.clone().svd(true, true);
        let sigma_max = svd.singular_values.max();
        let x = svd
            .solve(&rhs, 1e-13 * sigma_max)
            .map_err(|_| HarmonicError::SingularSystem)?;
        let residual = (&mats.m_next * &x - &rhs).norm();
        let rhs_scale = rhs.norm().max(1e-300);
        if residual > RESIDUAL_GATE * rhs_scale {
            return Err(HarmonicError::InconsistentAt {
                sphere: n,
                residual: residual / rhs_scale,
            });
        }
        values.push(x.iter().copied().collect());
        prev = cur;
        cur = x;
    }
    Ok(HarmonicField::new(values, "sphere_recurrence"))
}

/// Per-level lengths for a scheme, capped where the scheme underflows.
pub fn scheme_lengths(
    scheme: &LengthScheme,
    horizon: usize,
) -> Result<Vec<f64>, HarmonicError> {
    let mut out = Vec::with_capacity(horizon);
    for n in 0..horizon {
        out.push(scheme.length(n).map_err(HarmonicError::Graph)?);
    }
    Ok(out)
}

/// Reduced recurrence for the polynomially growing antitree `A_N`
/// (sphere numbers `n+N`, diagonal edges up to `N` doubled).
///
/// The seed is the full sphere-1 vector `(f_1^N; c_1)` of length `N+1`; the
/// remaining spheres have the form `(f_n^N; c_n 1_n)` and follow the scalar
/// recurrences, so the per-sphere work is O(N).
pub fn solve_antitree_reduced(
    n_cap: usize,
    scheme: &LengthScheme,
    seed_f1: &[f64],
    horizon: usize,
) -> Result<HarmonicField, HarmonicError> {
    assert!(n_cap >= 1, "A_N needs N >= 1");
    if seed_f1.len() != n_cap + 1 {
        return Err(HarmonicError::Graph(GraphError::Config(format!(
            "seed must have N+1 = {} entries, got {}",
            n_cap + 1,
            seed_f1.len()
        ))));
    }
    let lengths = scheme_lengths(scheme, horizon.max(2))?;
    let mut notes = Vec::new();
    if lengths.windows(2).any(|w| w[1] > w[0]) {
        notes.push("lengths are not decreasing; growth bounds of the construction may not apply".into());
    }
    let nf = n_cap as f64;
    let l0 = lengths[0];
    let f1_n: Vec<f64> = seed_f1[..n_cap].to_vec();
    let c1 = seed_f1[n_cap];

    // root value from the sphere-0 Kirchhoff condition
    let f0 = (seed_f1[0] + 2.0 * seed_f1[1..].iter().sum::<f64>()) / (2.0 * nf + 1.0);

    // sphere 2 from the sphere-1 conditions; the backward star at sphere 1 is
    // irregular (the root edge to v_1^1 is doubled), so this step is spelled
    // out instead of using the generic n >= 2 recurrence
    let l1 = lengths[1];
    let bwd = |k: usize| if k == 0 { 0.5 / l0 } else { 1.0 / l0 };
    let d_tail = (nf + 2.0) / l1 + 1.0 / l0;
    let sigma = l1 * (d_tail * c1 - f0 / l0);
    let mut f2_n = vec![0.0; n_cap];
    for (k, value) in f2_n.iter_mut().enumerate() {
        let d_k = (nf + 1.5) / l1 + bwd(k);
        *value = 2.0 * (sigma - l1 * (d_k * f1_n[k] - f0 * bwd(k)));
    }
    let c2 = (sigma - f2_n.iter().sum::<f64>()) / 2.0;

    let assemble = |fn_vec: &[f64], c: f64, n: usize| -> Vec<f64> {
        let mut v = fn_vec.to_vec();
        v.extend(std::iter::repeat(c).take(n));
        v
    };

    let mut values = vec![vec![f0], assemble(&f1_n, c1, 1)];
    let mut overflow_at = None;
    if horizon >= 2 {
        values.push(assemble(&f2_n, c2, 2));
        let mut prev = (f1_n, c1);
        let mut cur = (f2_n, c2);
        for n in 2..horizon {
            let (ln, ln1) = (lengths[n], lengths[n - 1]);
            let d1 = (n as f64 + nf - 1.5) / ln1 + (n as f64 + nf + 0.5) / ln;
            let d2 = (n as f64 + nf - 1.0) / ln1 + (n as f64 + nf + 1.0) / ln;
            let bar: f64 = cur.0.iter().sum();
            let mut next = vec![0.0; n_cap];
            for k in 0..n_cap {
                next[k] = 2.0 * ln * (cur.1 * d2 - d1 * cur.0[k]) - (ln / ln1) * prev.0[k];
            }
            let c_next = (ln / (n as f64 + 1.0)) * (2.0 * d1 * bar - (2.0 * nf - 1.0) * d2 * cur.1)
                - prev.1 * ((n as f64 - 1.0) * ln) / ((n as f64 + 1.0) * ln1);
            if next.iter().any(|x| !x.is_finite() || x.abs() > OVERFLOW_LIMIT)
                || !c_next.is_finite()
                || c_next.abs() > OVERFLOW_LIMIT
            {
                overflow_at = Some(n + 1);
                break;
            }
            values.push(assemble(&next, c_next, n + 1));
            prev = cur;
            cur = (next, c_next);
        }
    }
    let mut field = HarmonicField::new(values, &format!("antitree_reduced(N={n_cap})"));
    field.overflow_at = overflow_at;
    field.notes = notes;
    Ok(field)
}

/// Harmonic field `f^N` on the all-diagonals-doubled antitree: zero up to
/// sphere `N`, seeded at sphere `N+1` with `(1, ..., 1, -N-1/2)`, then
/// advanced by inverting the square block of `M_{n+1}` in closed form.
pub fn solve_antitree_infinite(
    n_cutoff: usize,
    scheme: &LengthScheme,
    horizon: usize,
) -> Result<HarmonicField, HarmonicError> {
    assert!(n_cutoff >= 1, "cutoff sphere N >= 1");
    if horizon <= n_cutoff + 1 {
        return Err(HarmonicError::Graph(GraphError::Config(format!(
            "horizon {horizon} must exceed the seed sphere {}",
            n_cutoff + 1
        ))));
    }
    let g = crate::graph::build_antitree_infinite(scheme, horizon)?;
    let lengths = scheme_lengths(scheme, horizon)?;

    let mut values: Vec<Vec<f64>> = (0..=n_cutoff).map(|n| vec![0.0; n + 1]).collect();
    let mut seed = vec![1.0; n_cutoff + 2];
    seed[n_cutoff + 1] = -(n_cutoff as f64) - 0.5;
    values.push(seed.clone());

    let mut prev = DVector::from_element(n_cutoff + 1, 0.0);
    let mut cur = DVector::from_column_slice(&seed);
    let mut overflow_at = None;
    for n in (n_cutoff + 1)..horizon {
        let mats = assemble_recurrence(&g, n)?;
        let m_prev = reciprocal_row_matrix(&g, n - 1).map_err(HarmonicError::Graph)?;
        let rhs = DVector::from_fn(mats.d.len(), |k, _| mats.d[k] * cur[k])
            - m_prev.transpose() * &prev;
        // C_n = (B_{n+1} - I/2)^{-1} = 4/(2n+1) B_{n+1} - 2I applied to ℓ_n rhs
        let total: f64 = rhs.sum();
        let coeff = 4.0 / (2.0 * n as f64 + 1.0);
        let mut next = DVector::zeros(n + 2);
        for k in 0..=n {
            next[k] = lengths[n] * (coeff * total - 2.0 * rhs[k]);
        }
        if overflowed(&next) {
            overflow_at = Some(n + 1);
            break;
        }
        values.push(next.iter().copied().collect());
        prev = cur;
        cur = next;
    }
    let mut field = HarmonicField::new(values, &format!("antitree_infinite(N={n_cutoff})"));
    field.overflow_at = overflow_at;
    Ok(field)
}

/// Harmonic function on the rope ladder with `f(v_1^+) = a`, `f(v_1^-) = b`.
pub fn solve_rope_ladder(
    a: f64,
    b: f64,
    g: &SphereGraph,
    horizon: usize,
) -> Result<HarmonicField, HarmonicError> {
    if g.family().name != "rope_ladder" {
        return Err(HarmonicError::Graph(GraphError::WrongFamily {
            expected: "rope_ladder".into(),
            found: g.family().name.clone(),
        }));
    }
    if horizon > g.horizon() {
        return Err(HarmonicError::Graph(GraphError::HorizonExceeded {
            requested: horizon,
            available: g.horizon(),
        }));
    }
    let rail = |n: usize, side: usize| -> f64 {
        g.forward_edges(n)
            .expect("within horizon")
            .iter()
            .find(|&&(i, j, _)| if n == 0 { j == side } else { i == side && j == side })
            .map(|&(_, _, len)| len)
            .expect("rope ladder rail edge")
    };
    let rung = |n: usize| -> f64 { g.horizontal_edges(n).expect("within horizon")[0].2 };

    let e0p = rail(0, 0);
    let e0m = rail(0, 1);
    let root = (b * e0p + a * e0m) / (e0p + e0m);
    let mut values = vec![vec![root], vec![a, b]];
    let mut overflow_at = None;
    // recursion with v_0^± = o
    let mut prev = [root, root];
    let mut cur = [a, b];
    for n in 1..horizon {
        let rung_n = rung(n);
        let mut next = [0.0f64; 2];
        for side in 0..2 {
            let en = rail(n, side);
            let en_prev = if n == 1 { [e0p, e0m][side] } else { rail(n - 1, side) };
            // difference form of the three-term recursion: constants stay
            // exactly constant
            next[side] = cur[side]
                + (en / en_prev) * (cur[side] - prev[side])
                + (en / rung_n) * (cur[side] - cur[1 - side]);
        }
        if next.iter().any(|x| !x.is_finite() || x.abs() > OVERFLOW_LIMIT) {
            overflow_at = Some(n + 1);
            break;
        }
        values.push(next.to_vec());
        prev = cur;
        cur = next;
    }
    Ok({
        let mut f = HarmonicField::new(values, "rope_ladder");
        f.overflow_at = overflow_at;
        f
    })
}

/// The normalized non-constant harmonic function `g_0` of the rope ladder:
/// `g_0(o) = 0`, `g_0(v_1^+) = |e_0^+|`, `g_0(v_1^-) = -|e_0^-|`.
pub fn rope_ladder_g0(g: &SphereGraph, horizon: usize) -> Result<HarmonicField, HarmonicError> {
    let e0p = g.forward_edges(0)?.iter().find(|&&(_, j, _)| j == 0).unwrap().2;
    let e0m = g.forward_edges(0)?.iter().find(|&&(_, j, _)| j == 1).unwrap().2;
    solve_rope_ladder(e0p, -e0m, g, horizon)
}

/// Sphere-constant recurrence of the radially symmetric antitree. The root
/// equation forces `c_1 = c_0`; the returned field is the sequence of sphere
/// constants.
pub fn solve_radial_constant(
    g: &SphereGraph,
    c0: f64,
    horizon: usize,
) -> Result<HarmonicField, HarmonicError> {
    if g.has_horizontal_edges() {
        return Err(HarmonicError::HorizontalEdgesPresent);
    }
    if horizon > g.horizon() {
        return Err(HarmonicError::Graph(GraphError::HorizonExceeded {
            requested: horizon,
            available: g.horizon(),
        }));
    }
    // per-level common length; a non-radial graph is rejected
    let mut lengths = Vec::with_capacity(horizon);
    for n in 0..horizon {
        let edges = g.forward_edges(n)?;
        let len = edges[0].2;
        if edges.iter().any(|&(_, _, l)| (l - len).abs() > 1e-14 * len) {
            return Err(HarmonicError::Graph(GraphError::WrongFamily {
                expected: "radially symmetric antitree".into(),
                found: "level with unequal lengths".into(),
            }));
        }
        lengths.push(len);
    }
    let sizes: Vec<f64> = (0..=horizon)
        .map(|n| g.sphere_size(n).map(|s| s as f64))
        .collect::<Result<_, _>>()?;
    let mut constants = vec![c0, c0];
    for n in 1..horizon {
        let c_next = constants[n]
            + (sizes[n - 1] * lengths[n]) / (sizes[n + 1] * lengths[n - 1])
                * (constants[n] - constants[n - 1]);
        constants.push(c_next);
    }
    let values = constants
        .iter()
        .enumerate()
        .map(|(n, &c)| vec![c; sizes[n] as usize])
        .collect();
    Ok(HarmonicField::new(values, "radial_constant"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{build_antitree, build_rope_ladder, SphereRule};

    #[test]
    fn assemble_matches_hand_entries() {
        // symmetric antitree s_n = n+1, unit lengths: M_2 all ones 2x3, D_1 = diag(4,4)
        let g = build_antitree(
            &SphereRule::Affine { offset: 1 },
            &LengthScheme::Unit,
            true,
            4,
        )
        .unwrap();
        let mats = assemble_recurrence(&g, 1).unwrap();
        assert_eq!(mats.m_next.nrows(), 2);
        assert_eq!(mats.m_next.ncols(), 3);
        assert!(mats.m_next.iter().all(|&x| x == 1.0));
        assert_eq!(mats.d[0], 4.0);
        assert_eq!(mats.d[1], 4.0);
    }

    #[test]
    fn assemble_a1_doubled_diagonal() {
        let g = build_antitree(
            &SphereRule::Affine { offset: 1 },
            &LengthScheme::Unit,
            false,
            4,
        )
        .unwrap();
        let mats = assemble_recurrence(&g, 1).unwrap();
        assert_eq!(mats.m_next[(0, 0)], 0.5);
        assert_eq!(mats.m_next[(0, 1)], 1.0);
    }

    #[test]
    fn d_equals_m_identity() {
        // D_n 1 = M_{n+1} 1 + M_n* 1 (entrywise), to 1e-12 relative
        let g = build_antitree(
            &SphereRule::Affine { offset: 2 },
            &LengthScheme::geometric(0.5),
            false,
            6,
        )
        .unwrap();
        for n in 1..5 {
            let mats = assemble_recurrence(&g, n).unwrap();
            let m_prev = reciprocal_row_matrix(&g, n - 1).unwrap();
            let ones_next = DVector::from_element(mats.m_next.ncols(), 1.0);
            let ones_prev = DVector::from_element(m_prev.nrows(), 1.0);
            let combined = &mats.m_next * ones_next + m_prev.transpose() * ones_prev;
            for k in 0..mats.d.len() {
                assert!((mats.d[k] - combined[k]).abs() <= 1e-12 * mats.d[k]);
            }
        }
    }

    #[test]
    fn horizontal_edges_are_rejected() {
        let g = build_rope_ladder(&LengthScheme::Unit, 4).unwrap();
        assert!(matches!(
            assemble_recurrence(&g, 1),
            Err(HarmonicError::HorizontalEdgesPresent)
        ));
    }

    #[test]
    fn constant_seed_stays_constant() {
        let g = build_antitree(
            &SphereRule::Affine { offset: 1 },
            &LengthScheme::geometric(0.25),
            true,
            8,
        )
        .unwrap();
        let field = solve_sphere_recurrence(&g, 1.0, &[1.0, 1.0], 8).unwrap();
        for n in 0..=8 {
            for &v in &field.values[n] {
                assert!((v - 1.0).abs() <= 1e-10);
            }
        }
    }

    #[test]
    fn inconsistent_seed_is_rejected() {
        let g = build_antitree(
            &SphereRule::Affine { offset: 1 },
            &LengthScheme::Unit,
            true,
            6,
        )
        .unwrap();
        // radial graph: sphere-constant seed with c_1 != c_0 violates the root equation
        assert!(matches!(
            solve_sphere_recurrence(&g, 0.0, &[1.0, 1.0], 6),
            Err(HarmonicError::SeedInconsistent { .. })
        ));
    }

    #[test]
    fn reduced_constant_field() {
        let field =
            solve_antitree_reduced(2, &LengthScheme::geometric(0.5), &[1.0, 1.0, 1.0], 10)
                .unwrap();
        for n in 0..=10 {
            for &v in &field.values[n] {
                assert!((v - 1.0).abs() <= 1e-10, "sphere {n}: {v}");
            }
        }
        assert_eq!(field.values[5].len(), 7); // s_5 = 5 + 2
    }

    #[test]
    fn reduced_solver_is_linear_in_the_seed() {
        let scheme = LengthScheme::paper_an_decay(2);
        let s1 = [0.3, -1.2, 0.7];
        let s2 = [1.5, 0.4, -0.9];
        let (alpha, beta) = (2.0, -0.5);
        let combo: Vec<f64> = s1.iter().zip(&s2).map(|(a, b)| alpha * a + beta * b).collect();
        let f1 = solve_antitree_reduced(2, &scheme, &s1, 12).unwrap();
        let f2 = solve_antitree_reduced(2, &scheme, &s2, 12).unwrap();
        let fc = solve_antitree_reduced(2, &scheme, &combo, 12).unwrap();
        for n in 0..=12 {
            for i in 0..fc.values[n].len() {
                let expect = alpha * f1.values[n][i] + beta * f2.values[n][i];
                let scale = expect.abs().max(1.0);
                assert!((fc.values[n][i] - expect).abs() <= 1e-12 * scale);
            }
        }
    }

    #[test]
    fn general_recurrence_matches_reduced_solver() {
        // A_1 with mild geometric lengths; seed (1, -3/2)
        let scheme = LengthScheme::geometric(0.5);
        let n_cap = 1;
        let g = build_antitree(
            &SphereRule::Affine { offset: n_cap },
            &scheme,
            false,
            10,
        )
        .unwrap();
        let seed = [1.0, -1.5];
        let reduced = solve_antitree_reduced(n_cap, &scheme, &seed, 10).unwrap();
        let f0 = reduced.values[0][0];
        let general = solve_sphere_recurrence(&g, f0, &seed, 10).unwrap();
        for n in 0..=10 {
            for i in 0..general.values[n].len() {
                let a = general.values[n][i];
                let b = reduced.values[n][i];
                let scale = b.abs().max(1e-6);
                assert!(
                    (a - b).abs() <= 1e-9 * scale,
                    "sphere {n} index {i}: {a} vs {b}"
                );
            }
        }
    }

    #[test]
    fn infinite_antitree_c1_inverse() {
        // C_1 = (4/3)B_2 - 2I; check (B_2 - I/2) C_1 = I by direct arithmetic
        let b = DMatrix::from_element(2, 2, 1.0f64);
        let c1 = &b * (4.0 / 3.0) - DMatrix::identity(2, 2) * 2.0;
        assert!((c1[(0, 0)] + 2.0 / 3.0).abs() < 1e-15);
        assert!((c1[(0, 1)] - 4.0 / 3.0).abs() < 1e-15);
        let lhs = (&b - DMatrix::identity(2, 2) * 0.5) * &c1;
        assert!((lhs - DMatrix::identity(2, 2)).norm() < 1e-14);
    }

    #[test]
    fn infinite_field_seed_and_zero_tail_coordinate() {
        let field = solve_antitree_infinite(1, &LengthScheme::geometric(0.5), 8).unwrap();
        assert_eq!(field.values[2], vec![1.0, 1.0, -1.5]);
        for n in 3..=8 {
            assert_eq!(*field.values[n].last().unwrap(), 0.0, "sphere {n}");
            assert_eq!(field.values[n].len(), n + 1);
        }
        for n in 0..=1 {
            assert!(field.values[n].iter().all(|&v| v == 0.0));
        }
    }

    #[test]
    fn rope_ladder_constant_and_g0_values() {
        let g = build_rope_ladder(&LengthScheme::rope_ladder_power(6.0), 60).unwrap();
        let constant = solve_rope_ladder(1.0, 1.0, &g, 60).unwrap();
        for n in 0..=60 {
            for &v in &constant.values[n] {
                assert!((v - 1.0).abs() <= 1e-12);
            }
        }
        let g0 = rope_ladder_g0(&g, 50).unwrap();
        assert_eq!(g0.values[0][0], 0.0);
        // one recursion step by hand: g0(v_2^+) = 1 + 1/64 + 63/64 = 2
        assert!((g0.values[2][0] - 2.0).abs() <= 1e-12);
        for n in 1..=50 {
            let expect = n as f64;
            assert!(
                (g0.values[n][0] - expect).abs() <= 1e-9 * expect,
                "g0(v_{n}^+) = {}",
                g0.values[n][0]
            );
            assert!((g0.values[n][1] + expect).abs() <= 1e-9 * expect);
        }
    }

    #[test]
    fn g0_monotone_rails() {
        let g = build_rope_ladder(&LengthScheme::rope_ladder_power(4.0), 40).unwrap();
        let g0 = rope_ladder_g0(&g, 40).unwrap();
        for n in 1..40 {
            assert!(g0.values[n + 1][0] > g0.values[n][0]);
            assert!(g0.values[n + 1][1] < g0.values[n][1]);
        }
    }

    #[test]
    fn radial_constants_collapse_to_c0() {
        let g = build_antitree(
            &SphereRule::Affine { offset: 1 },
            &LengthScheme::power(4.0),
            true,
            20,
        )
        .unwrap();
        for &c0 in &[1.0, -2.5, 0.125] {
            let field = solve_radial_constant(&g, c0, 20).unwrap();
            for n in 0..=20 {
                for &v in &field.values[n] {
                    assert!((v - c0).abs() <= 1e-12 * c0.abs().max(1.0));
                }
            }
        }
    }
}

#[cfg(test)]
mod debug_tests {
    use super::*;
    use crate::graph::{build_antitree, SphereRule};

    #[test]
    fn dbg_general_recurrence() {
        let g = build_antitree(
            &SphereRule::Affine { offset: 1 },
            &LengthScheme::geometric(0.25),
            true,
            8,
        )
        .unwrap();
        let mut prev = DVector::from_element(1, 1.0);
        let mut cur = DVector::from_column_slice(&[1.0, 1.0]);
        for n in 1..6 {
            let mats = assemble_recurrence(&g, n).unwrap();
            let m_prev = reciprocal_row_matrix(&g, n - 1).unwrap();
            let rhs = DVector::from_fn(mats.d.len(), |k, _| mats.d[k] * cur[k])
                - m_prev.transpose() * &prev;
            let svd = mats.m_next.clone().svd(true, true);
            let sigma_max = svd.singular_values.max();
            let x = svd.solve(&rhs, 1e-13 * sigma_max).unwrap();
            let resid = (&mats.m_next * &x - &rhs).norm() / rhs.norm();
            eprintln!("n={n} sigma={:?} rhs={:?} x={:?} resid={resid:.3e}", svd.singular_values.as_slice(), rhs.as_slice(), x.as_slice());
            prev = cur;
            cur = x;
        }
        panic!("show output");
    }
}
