//! Direct-solve oracle for discrete harmonicity.
//!
//! Independent of the sphere recurrences: prescribes boundary data on a
//! truncation and solves the Kirchhoff balance at every interior vertex as a
//! dense linear system. Unique by the finite-graph maximum principle, so any
//! recurrence solver can be cross-checked against it.

use std::collections::HashMap;

use nalgebra::{DMatrix, DVector};

use crate::error::HarmonicError;
use crate::graph::{FiniteTruncation, Vertex};

/// Solves `Σ_{u~v} (f(u) - f(v)) / |e_uv| = 0` at every interior vertex with
/// the given boundary data. Returns one value per truncation vertex id.
///
/// The map must cover all of `∂` (the outermost sphere); additional vertices
/// in the map are pinned as extra Dirichlet data.
pub fn harmonic_oracle(
    trunc: &FiniteTruncation,
    boundary_values: &HashMap<Vertex, f64>,
) -> Result<Vec<f64>, HarmonicError> {
    let n = trunc.vertex_count();
    let mut fixed: Vec<Option<f64>> = vec![None; n];
    for &id in trunc.boundary() {
        let v = trunc.vertex(id);
        let value = boundary_values
            .get(&v)
            .copied()
            .ok_or(HarmonicError::MissingBoundaryValue(v))?;
        fixed[id] = Some(value);
    }
    for (&v, &value) in boundary_values {
        let id = trunc.vertex_id(v).map_err(HarmonicError::Graph)?;
        fixed[id] = Some(value);
    }
    let interior: Vec<usize> = (0..n).filter(|&id| fixed[id].is_none()).collect();
    if interior.is_empty() {
        return Ok(fixed.into_iter().map(|v| v.unwrap()).collect());
    }
    let mut col_of = vec![usize::MAX; n];
    for (col, &id) in interior.iter().enumerate() {
        col_of[id] = col;
    }
    let adj = trunc.adjacency();
    let m = interior.len();
    let mut a = DMatrix::<f64>::zeros(m, m);
    let mut rhs = DVector::<f64>::zeros(m);
    for (row, &id) in interior.iter().enumerate() {
        // row normalized by the total conductance at the vertex; keeps the
        // system well scaled even with factorially decaying lengths
        let total: f64 = adj[id].iter().map(|&(_, len)| 1.0 / len).sum();
        for &(other, len) in &adj[id] {
            let w = 1.0 / (len * total);
            match fixed[other] {
                Some(value) => rhs[row] += w * value,
                None => a[(row, col_of[other])] -= w,
            }
        }
        a[(row, row)] += 1.0;
    }
    let lu = a.lu();
    let x = lu.solve(&rhs).ok_or(HarmonicError::SingularSystem)?;
    let mut out = vec![0.0; n];
    for id in 0..n {
        out[id] = match fixed[id] {
            Some(v) => v,
            None => x[col_of[id]],
        };
    }
    Ok(out)
}

/// Oracle output regrouped per sphere.
pub fn oracle_values_by_sphere(trunc: &FiniteTruncation, values: &[f64]) -> Vec<Vec<f64>> {
    let mut out: Vec<Vec<f64>> = vec![Vec::new(); trunc.outer_sphere() + 1];
    for (id, v) in trunc.vertices().iter().enumerate() {
        out[v.sphere].push(values[id]);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{build_antitree, build_rope_ladder, LengthScheme, SphereRule};

    #[test]
    fn constant_boundary_gives_constant_solution() {
        let g = build_rope_ladder(&LengthScheme::Unit, 6).unwrap();
        let trunc = g.truncate(5).unwrap();
        let mut bc = HashMap::new();
        for &id in trunc.boundary() {
            bc.insert(trunc.vertex(id), 3.5);
        }
        let values = harmonic_oracle(&trunc, &bc).unwrap();
        for v in values {
            assert!((v - 3.5).abs() <= 1e-12);
        }
    }

    #[test]
    fn path_graph_interpolates_linearly() {
        // two unit edges in a row: interior vertex sits at the average
        let g = build_antitree(
            &SphereRule::Constant { size: 1 },
            &LengthScheme::Unit,
            true,
            2,
        )
        .unwrap();
        let trunc = g.truncate(2).unwrap();
        let mut bc = HashMap::new();
        bc.insert(Vertex::new(2, 0), 1.0);
        // boundary is only S_2; the root gets the natural (Neumann-like)
        // harmonic condition, which forces a constant on a path
        let values = harmonic_oracle(&trunc, &bc).unwrap();
        assert!((values[0] - 1.0).abs() <= 1e-12);
        assert!((values[1] - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn pinned_ends_interpolate_linearly() {
        let g = build_antitree(
            &SphereRule::Constant { size: 1 },
            &LengthScheme::Unit,
            true,
            2,
        )
        .unwrap();
        let trunc = g.truncate(2).unwrap();
        let mut bc = HashMap::new();
        bc.insert(Vertex::new(2, 0), 1.0);
        bc.insert(Vertex::new(0, 0), 0.0);
        let values = harmonic_oracle(&trunc, &bc).unwrap();
        assert!((values[1] - 0.5).abs() <= 1e-12);
    }

    #[test]
    fn missing_boundary_value_is_reported() {
        let g = build_rope_ladder(&LengthScheme::Unit, 4).unwrap();
        let trunc = g.truncate(3).unwrap();
        let bc = HashMap::new();
        assert!(matches!(
            harmonic_oracle(&trunc, &bc),
            Err(HarmonicError::MissingBoundaryValue(_))
        ));
    }
}
