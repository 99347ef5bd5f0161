//! Linear relations on the finite end space.
//!
//! Self-adjoint extensions of the minimal Kirchhoff Laplacian with finite
//! energy are parametrized by pairs of matrices `(C, D)` on `ℓ²` of the
//! finite-volume ends through the boundary condition `C Γ₀f + D Γ₁f = 0`.
//! This module implements the relation algebra: the subspace view, the
//! Rofe-Beketov self-adjointness test, adjoints, domain/multivalued-part
//! splitting and the Markovian (finite-state Dirichlet form) criterion.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::RelationError;
use crate::report::F17;

/// Numerical rank threshold, relative to the largest singular value.
pub const RANK_TOL: f64 = 1e-10;
/// Entrywise slack for sign conditions in the Markovian criterion.
pub const SIGN_TOL: f64 = 1e-12;

/// A boundary condition pair `(C, D)` with its cached decompositions.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryRelation {
    pub c: DMatrix<f64>,
    pub d: DMatrix<f64>,
    /// rank of the horizontal concatenation (C|D)
    pub rank_cd: usize,
    /// orthonormal basis of ran(D*)
    pub ran_d_star: DMatrix<f64>,
    /// orthonormal basis of ker(D)
    pub ker_d: DMatrix<f64>,
}

impl BoundaryRelation {
    pub fn new(c: DMatrix<f64>, d: DMatrix<f64>) -> Result<Self, RelationError> {
        check_dims(&c, &d)?;
        let rank_cd = rank(&concat_cols(&c, &d));
        let ran_d_star = orthonormal_range(&d.transpose());
        let ker_d = orthonormal_kernel(&d);
        Ok(BoundaryRelation {
            c,
            d,
            rank_cd,
            ran_d_star,
            ker_d,
        })
    }

    pub fn dim(&self) -> usize {
        self.c.nrows()
    }

    pub fn to_json(&self) -> String {
        #[derive(Serialize)]
        struct Out {
            #[serde(rename = "C")]
            c: Vec<Vec<F17>>,
            #[serde(rename = "D")]
            d: Vec<Vec<F17>>,
        }
        let rows = |m: &DMatrix<f64>| -> Vec<Vec<F17>> {
            (0..m.nrows())
                .map(|i| (0..m.ncols()).map(|j| F17(m[(i, j)])).collect())
                .collect()
        };
        serde_json::to_string_pretty(&Out {
            c: rows(&self.c),
            d: rows(&self.d),
        })
        .expect("report serialization cannot fail")
    }
}

/// A linear relation as a subspace of pairs `(f, g) ∈ ℝ^k × ℝ^k`, stored as an
/// orthonormal column basis of length-2k vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct RelationSubspace {
    /// 2k × dim, orthonormal columns.
    pub basis: DMatrix<f64>,
    pub space_dim: usize,
}

impl RelationSubspace {
    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    /// Orthogonal projector onto the subspace.
    pub fn projector(&self) -> DMatrix<f64> {
        &self.basis * self.basis.transpose()
    }

    /// Operator-norm distance between the projectors.
    pub fn projection_distance(&self, other: &RelationSubspace) -> f64 {
        spectral_norm(&(self.projector() - other.projector()))
    }

    pub fn approx_eq(&self, other: &RelationSubspace) -> bool {
        self.space_dim == other.space_dim && self.projection_distance(other) <= 1e-10
    }
}

fn check_dims(c: &DMatrix<f64>, d: &DMatrix<f64>) -> Result<(), RelationError> {
    if c.nrows() != c.ncols() || d.nrows() != d.ncols() || c.nrows() != d.nrows() {
        return Err(RelationError::DimensionMismatch(
            c.nrows(),
            c.ncols(),
            d.nrows(),
            d.ncols(),
        ));
    }
    Ok(())
}

fn concat_cols(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(a.nrows(), a.ncols() + b.ncols());
    m.view_mut((0, 0), (a.nrows(), a.ncols())).copy_from(a);
    m.view_mut((0, a.ncols()), (b.nrows(), b.ncols())).copy_from(b);
    m
}

pub(crate) fn spectral_norm(m: &DMatrix<f64>) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.clone().svd(false, false).singular_values.max()
}

pub(crate) fn rank(m: &DMatrix<f64>) -> usize {
    if m.is_empty() {
        return 0;
    }
    let svd = m.clone().svd(false, false);
    let sigma_max = svd.singular_values.max();
    if sigma_max == 0.0 {
        return 0;
    }
    svd.singular_values
        .iter()
        .filter(|&&s| s > RANK_TOL * sigma_max)
        .count()
}

/// Orthonormal basis of the column space.
pub(crate) fn orthonormal_range(m: &DMatrix<f64>) -> DMatrix<f64> {
    if m.ncols() == 0 || m.nrows() == 0 {
        return DMatrix::zeros(m.nrows(), 0);
    }
    let svd = m.clone().svd(true, false);
    let u = svd.u.as_ref().expect("svd with u");
    let sigma_max = svd.singular_values.max();
    let cols: Vec<usize> = svd
        .singular_values
        .iter()
        .enumerate()
        .filter(|&(_, &s)| sigma_max > 0.0 && s > RANK_TOL * sigma_max)
        .map(|(i, _)| i)
        .collect();
    let mut out = DMatrix::zeros(m.nrows(), cols.len());
    for (k, &i) in cols.iter().enumerate() {
        out.set_column(k, &u.column(i));
    }
    out
}

/// Orthonormal basis of the orthogonal complement of the span of `basis`
/// (whose columns must be orthonormal) inside its ambient space.
pub(crate) fn orthonormal_complement(basis: &DMatrix<f64>) -> DMatrix<f64> {
    let n = basis.nrows();
    let want = n - basis.ncols();
    // columns of the projector I - BBᵀ span the complement; extract an
    // orthonormal set by modified Gram-Schmidt with norm pivoting
    let mut p = DMatrix::<f64>::identity(n, n);
    if basis.ncols() > 0 {
        p -= basis * basis.transpose();
    }
    let mut cols: Vec<DVector<f64>> = (0..n).map(|j| p.column(j).clone_owned()).collect();
    let mut out = DMatrix::zeros(n, want);
    for k in 0..want {
        let (best, _) = cols
            .iter()
            .enumerate()
            .map(|(i, c)| (i, c.norm()))
            .max_by(|a, b| a.1.total_cmp(&b.1))
            .expect("projector has columns");
        let mut v = cols.swap_remove(best);
        let norm = v.norm();
        v /= norm;
        for c in cols.iter_mut() {
            let proj = v.dot(c);
            c.axpy(-proj, &v, 1.0);
        }
        out.set_column(k, &v);
    }
    out
}

/// Orthonormal basis of the kernel: the complement of the row space.
pub(crate) fn orthonormal_kernel(m: &DMatrix<f64>) -> DMatrix<f64> {
    orthonormal_complement(&orthonormal_range(&m.transpose()))
}

/// Moore–Penrose pseudo-inverse with the module's rank threshold.
fn pseudo_inverse(m: &DMatrix<f64>) -> DMatrix<f64> {
    let svd = m.clone().svd(true, true);
    let sigma_max = svd.singular_values.max();
    let mut svd = svd;
    for s in svd.singular_values.iter_mut() {
        *s = if sigma_max > 0.0 && *s > RANK_TOL * sigma_max {
            1.0 / *s
        } else {
            0.0
        };
    }
    let u = svd.u.expect("svd with u");
    let v_t = svd.v_t.expect("svd with v_t");
    v_t.transpose() * DMatrix::from_diagonal(&svd.singular_values) * u.transpose()
}

/// The relation `Θ_{C,D} = {(f, g) : Cf + Dg = 0}` as a subspace.
pub fn relation_from_cd(
    c: &DMatrix<f64>,
    d: &DMatrix<f64>,
) -> Result<RelationSubspace, RelationError> {
    check_dims(c, d)?;
    let basis = orthonormal_kernel(&concat_cols(c, d));
    Ok(RelationSubspace {
        basis,
        space_dim: c.nrows(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RofeBeketovCheck {
    pub self_adjoint: bool,
    /// `‖CD* - DC*‖` (spectral norm).
    pub symmetry_defect: F17,
    pub rank_cd: usize,
    pub witnesses: Vec<String>,
}

/// Algebraic self-adjointness test: `CD* = DC*` and `rank(C|D) = k`.
pub fn check_rofe_beketov(
    c: &DMatrix<f64>,
    d: &DMatrix<f64>,
) -> Result<RofeBeketovCheck, RelationError> {
    check_dims(c, d)?;
    let k = c.nrows();
    let defect = spectral_norm(&(c * d.transpose() - d * c.transpose()));
    let tol = 1e-10 * (spectral_norm(c) * spectral_norm(d) + 1.0);
    let rank_cd = rank(&concat_cols(c, d));
    let mut witnesses = Vec::new();
    if defect > tol {
        witnesses.push(format!("CD* - DC* has norm {defect:.3e} > {tol:.3e}"));
    }
    if rank_cd != k {
        witnesses.push(format!("rank(C|D) = {rank_cd} < {k}"));
    }
    Ok(RofeBeketovCheck {
        self_adjoint: witnesses.is_empty(),
        symmetry_defect: F17(defect),
        rank_cd,
        witnesses,
    })
}

/// Graph adjoint: `Θ* = (J Θ)^⊥` with `J(f, g) = (g, -f)`.
pub fn relation_adjoint(theta: &RelationSubspace) -> RelationSubspace {
    let k = theta.space_dim;
    let dim = theta.basis.ncols();
    let mut j_theta = DMatrix::zeros(2 * k, dim);
    for col in 0..dim {
        for i in 0..k {
            j_theta[(i, col)] = theta.basis[(k + i, col)];
            j_theta[(k + i, col)] = -theta.basis[(i, col)];
        }
    }
    let basis = orthonormal_kernel(&j_theta.transpose());
    RelationSubspace {
        basis,
        space_dim: k,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DomainMulSplit {
    /// Orthonormal basis of `dom(Θ) = ran(D*)`.
    pub dom: DMatrix<f64>,
    /// Orthonormal basis of `mul(Θ) = ker(D)`.
    pub mul: DMatrix<f64>,
}

/// Domain / multivalued-part bases of a self-adjoint relation.
pub fn relation_domain_mul(
    c: &DMatrix<f64>,
    d: &DMatrix<f64>,
) -> Result<DomainMulSplit, RelationError> {
    let rb = check_rofe_beketov(c, d)?;
    if !rb.self_adjoint {
        return Err(RelationError::NotSelfAdjoint(rb.witnesses.join("; ")));
    }
    Ok(DomainMulSplit {
        dom: orthonormal_range(&d.transpose()),
        mul: orthonormal_kernel(d),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct MarkovianCheck {
    pub markovian: bool,
    /// Representing matrix of the boundary form on `ran(D*)`, expressed in the
    /// standard basis (`P sym(D⁺C) P`).
    pub form_matrix: DMatrix<f64>,
    pub reasons: Vec<String>,
    /// True when `0 < rank(D) < k`; the wide-sense criterion is then applied
    /// to a proper subspace and flagged as such in reports.
    pub degenerate: bool,
}

/// Finite-state Dirichlet-form test for the boundary form `⟨D⁻¹C y, y⟩` on
/// `ran(D*)`.
///
/// Markovian iff the orthogonal projector onto `ran(D*)` is positivity
/// preserving (entrywise nonnegative) and the projected symmetric form matrix
/// has nonpositive off-diagonal entries and nonnegative row sums.
pub fn is_markovian(
    c: &DMatrix<f64>,
    d: &DMatrix<f64>,
) -> Result<MarkovianCheck, RelationError> {
    let rb = check_rofe_beketov(c, d)?;
    if !rb.self_adjoint {
        return Err(RelationError::NotSelfAdjoint(rb.witnesses.join("; ")));
    }
    let k = c.nrows();
    let ran_d_star = orthonormal_range(&d.transpose());
    let rank_d = ran_d_star.ncols();
    let p = &ran_d_star * ran_d_star.transpose();
    let w = pseudo_inverse(d) * c;
    let sym = (&w + w.transpose()) * 0.5;
    let form = &p * sym * &p;
    let mut reasons = Vec::new();
    let p_min = p.iter().cloned().fold(0.0f64, f64::min);
    if p_min < -SIGN_TOL {
        reasons.push(format!(
            "projector onto ran(D*) is not positivity preserving (min entry {p_min:.3e})"
        ));
    }
    for i in 0..k {
        for j in 0..k {
            if i != j && form[(i, j)] > SIGN_TOL {
                reasons.push(format!(
                    "off-diagonal form entry ({i},{j}) = {:.3e} > 0",
                    form[(i, j)]
                ));
            }
        }
        let row_sum: f64 = (0..k).map(|j| form[(i, j)]).sum();
        if row_sum < -SIGN_TOL {
            reasons.push(format!("row sum {i} = {row_sum:.3e} < 0"));
        }
    }
    Ok(MarkovianCheck {
        markovian: reasons.is_empty(),
        form_matrix: form,
        reasons,
        degenerate: rank_d > 0 && rank_d < k,
    })
}

/// The one-parameter family `(cos θ · I, sin θ · I)` on a k-dimensional end
/// space.
pub fn theta_relation(theta: f64, k: usize) -> BoundaryRelation {
    let c = DMatrix::identity(k, k) * theta.cos();
    let d = DMatrix::identity(k, k) * theta.sin();
    BoundaryRelation::new(c, d).expect("square by construction")
}

/// Convenience: the span of explicit pair vectors (columns stacked (f; g)).
pub fn subspace_from_pairs(k: usize, pairs: &[DVector<f64>]) -> RelationSubspace {
    let mut m = DMatrix::zeros(2 * k, pairs.len());
    for (j, p) in pairs.iter().enumerate() {
        m.set_column(j, p);
    }
    let basis = orthonormal_range(&m);
    RelationSubspace {
        basis,
        space_dim: k,
    }
}
