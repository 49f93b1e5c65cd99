use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::domain::{Element, RadiiTable};
use crate::error::FitError;

pub const MIN_DEGREE_COUNT: usize = 1;
pub const MAX_DEGREE_COUNT: usize = 6;
pub const DEFAULT_DEGREE_COUNT: usize = 4;

/// Monic polynomials in the ionic radius `r` (pm), mutually orthogonal under
/// the unweighted discrete inner product over the fourteen canonical radii.
///
/// The basis depends only on the radii table, never on which elements a
/// sample happens to carry, so lambdas from different samples share one
/// coordinate system.
///
/// Polynomials are generated by the three-term (Stieltjes) recurrence
///
/// ```text
/// f_0 = 1,  f_1 = r - a_0,  f_{j+1} = (r - a_j) f_j - b_j f_{j-1}
/// a_j = <r f_j, f_j> / <f_j, f_j>,   b_j = <f_j, f_j> / <f_{j-1}, f_{j-1}>
/// ```
///
/// and evaluated through the same recurrence. The expanded monomial
/// coefficients are exposed for inspection only; evaluating them directly in
/// raw picometres loses several digits to cancellation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrthogonalBasis {
    degree_count: usize,
    radii: RadiiTable,
    grid: Vec<f64>,
    alpha: Vec<f64>,
    beta: Vec<f64>,
    coefficients: Vec<Vec<f64>>,
    gram_norms: Vec<f64>,
    id: String,
}

impl OrthogonalBasis {
    pub fn degree_count(&self) -> usize {
        self.degree_count
    }

    pub fn radii(&self) -> &RadiiTable {
        &self.radii
    }

    /// The canonical radii, La first.
    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    /// Ascending-power monomial coefficients of `f_j`; the last entry is 1.
    pub fn coefficients(&self, j: usize) -> &[f64] {
        &self.coefficients[j]
    }

    /// `<f_j, f_j>` summed over the grid.
    pub fn gram_norm(&self, j: usize) -> f64 {
        self.gram_norms[j]
    }

    pub fn gram_norms(&self) -> &[f64] {
        &self.gram_norms
    }

    /// Content hash of the grid and recurrence; equal ids mean identical
    /// polynomials.
    pub fn id(&self) -> &str {
        &self.id
    }

    /// Values of every basis function at radius `r`.
    pub fn evaluate_all(&self, r: f64) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.degree_count);
        let mut prev = 0.0;
        let mut cur = 1.0;
        for j in 0..self.degree_count {
            out.push(cur);
            let next = (r - self.alpha[j]) * cur - self.beta[j] * prev;
            prev = cur;
            cur = next;
        }
        out
    }

    pub fn evaluate(&self, j: usize, r: f64) -> f64 {
        self.evaluate_all(r)[j]
    }

    pub fn evaluate_element(&self, element: Element) -> Vec<f64> {
        self.evaluate_all(self.radii.radius(element))
    }

    /// `Σ_j λ_j f_j(r)`.
    pub fn combine(&self, lambdas: &[f64], r: f64) -> f64 {
        self.evaluate_all(r).iter().zip(lambdas).map(|(f, l)| f * l).sum()
    }

    /// Discrete inner product `Σ_grid f_i(r) f_j(r)`.
    pub fn inner_product(&self, i: usize, j: usize) -> f64 {
        self.grid
            .iter()
            .map(|&r| {
                let v = self.evaluate_all(r);
                v[i] * v[j]
            })
            .sum()
    }
}

/// Builds the orthogonal basis with `degree_count` functions (λ0..λ_{k}).
pub fn build_basis(radii: &RadiiTable, degree_count: usize) -> Result<OrthogonalBasis, FitError> {
    if !(MIN_DEGREE_COUNT..=MAX_DEGREE_COUNT).contains(&degree_count) {
        return Err(FitError::DegreeOutOfRange { requested: degree_count });
    }
    let grid = radii.grid();
    let n = grid.len();

    let mut alpha = Vec::with_capacity(degree_count);
    let mut beta = Vec::with_capacity(degree_count);
    let mut gram_norms = Vec::with_capacity(degree_count);
    let mut coefficients: Vec<Vec<f64>> = Vec::with_capacity(degree_count);

    // values of f_{j-1} and f_j on the grid
    let mut prev = vec![0.0; n];
    let mut cur = vec![1.0; n];
    let mut prev_coef: Vec<f64> = Vec::new();
    let mut cur_coef: Vec<f64> = vec![1.0];

    for j in 0..degree_count {
        let norm: f64 = cur.iter().map(|v| v * v).sum();
        let a = grid.iter().zip(&cur).map(|(r, v)| r * v * v).sum::<f64>() / norm;
        let b = if j == 0 { 0.0 } else { norm / gram_norms[j - 1] };
        gram_norms.push(norm);
        alpha.push(a);
        beta.push(b);
        coefficients.push(cur_coef.clone());

        let next: Vec<f64> = (0..n).map(|i| (grid[i] - a) * cur[i] - b * prev[i]).collect();
        let mut next_coef = vec![0.0; cur_coef.len() + 1];
        for (p, c) in cur_coef.iter().enumerate() {
            next_coef[p + 1] += c;
            next_coef[p] -= a * c;
        }
        for (p, c) in prev_coef.iter().enumerate() {
            next_coef[p] -= b * c;
        }
        prev = std::mem::replace(&mut cur, next);
        prev_coef = std::mem::replace(&mut cur_coef, next_coef);
    }

    let id = basis_hash(degree_count, &grid, &alpha, &beta);
    Ok(OrthogonalBasis { degree_count, radii: radii.clone(), grid, alpha, beta, coefficients, gram_norms, id })
}

fn basis_hash(degree_count: usize, grid: &[f64], alpha: &[f64], beta: &[f64]) -> String {
    let mut h = Sha256::new();
    h.update((degree_count as u64).to_le_bytes());
    for v in grid.iter().chain(alpha).chain(beta) {
        h.update(v.to_bits().to_le_bytes());
    }
    hex::encode(&h.finalize()[..8])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::canonical_radii;

    #[test]
    fn degree_one_is_constant() {
        let b = build_basis(&canonical_radii(), 1).unwrap();
        assert_eq!(b.degree_count(), 1);
        assert_eq!(b.coefficients(0), &[1.0]);
        assert_eq!(b.evaluate_all(101.0), vec![1.0]);
    }

    #[test]
    fn first_function_is_centred_radius() {
        let radii = canonical_radii();
        let b = build_basis(&radii, 4).unwrap();
        let mean = radii.grid().iter().sum::<f64>() / 14.0;
        for r in radii.grid() {
            assert!((b.evaluate(1, r) - (r - mean)).abs() < 1e-12);
        }
    }

    #[test]
    fn orthogonality_by_direct_summation() {
        let radii = canonical_radii();
        let b = build_basis(&radii, 6).unwrap();
        let grid = radii.grid();
        let vals: Vec<Vec<f64>> = grid.iter().map(|&r| b.evaluate_all(r)).collect();
        for i in 0..6 {
            for j in 0..6 {
                let ip: f64 = vals.iter().map(|v| v[i] * v[j]).sum();
                if i == j {
                    assert!((ip - b.gram_norm(i)).abs() <= 1e-12 * b.gram_norm(i));
                } else {
                    let scale = (b.gram_norm(i) * b.gram_norm(j)).sqrt();
                    assert!(ip.abs() <= 1e-9 * scale, "<f{i},f{j}> = {ip}");
                }
            }
        }
    }

    #[test]
    fn monomial_coefficients_agree_with_recurrence() {
        let b = build_basis(&canonical_radii(), 5).unwrap();
        for j in 0..5 {
            let c = b.coefficients(j);
            assert_eq!(c.len(), j + 1);
            assert_eq!(*c.last().unwrap(), 1.0);
            for r in [97.7, 103.0, 116.0] {
                let horner = c.iter().rev().fold(0.0, |acc, &k| acc * r + k);
                let rec = b.evaluate(j, r);
                let scale = c.iter().enumerate().map(|(p, k)| (k * r.powi(p as i32)).abs()).sum::<f64>();
                assert!((horner - rec).abs() <= 1e-12 * scale, "f{j}({r})");
            }
        }
    }

    #[test]
    fn degree_out_of_range() {
        let radii = canonical_radii();
        assert!(matches!(build_basis(&radii, 0), Err(FitError::DegreeOutOfRange { requested: 0 })));
        assert!(matches!(build_basis(&radii, 7), Err(FitError::DegreeOutOfRange { requested: 7 })));
    }

    #[test]
    fn id_is_stable_and_degree_sensitive() {
        let radii = canonical_radii();
        let a = build_basis(&radii, 4).unwrap();
        let b = build_basis(&radii, 4).unwrap();
        let c = build_basis(&radii, 5).unwrap();
        assert_eq!(a.id(), b.id());
        assert_ne!(a.id(), c.id());
    }
}
