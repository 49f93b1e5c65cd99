//! Reference computations for checking the reekit numerics.
//!
//! Nothing here shares code with `reekit-core`. The least-squares oracle
//! works in exact rational arithmetic: it builds its own monic orthogonal
//! basis by Gram-Schmidt on monomials and solves the normal equations by
//! fraction-exact Gaussian elimination, rounding to `f64` only at the end.

use num::rational::BigRational;
use num::{One, Signed, ToPrimitive, Zero};

fn exact(v: f64) -> BigRational {
    BigRational::from_float(v).expect("finite input")
}

fn dot(a: &[BigRational], b: &[BigRational]) -> BigRational {
    a.iter().zip(b).fold(BigRational::zero(), |acc, (x, y)| acc + x * y)
}

/// Exact values of the monic orthogonal polynomials `f_0..f_{k-1}` at every
/// grid point, orthogonal under the unweighted sum over `grid`.
pub fn exact_basis_values(grid: &[f64], degree_count: usize) -> Vec<Vec<BigRational>> {
    let r: Vec<BigRational> = grid.iter().map(|&v| exact(v)).collect();
    let mut basis: Vec<Vec<BigRational>> = Vec::with_capacity(degree_count);
    for j in 0..degree_count {
        // monomial r^j
        let mut v: Vec<BigRational> = r
            .iter()
            .map(|x| {
                let mut p = BigRational::one();
                for _ in 0..j {
                    p *= x;
                }
                p
            })
            .collect();
        for prev in &basis {
            let coef = dot(&v, prev) / dot(prev, prev);
            for (vi, pi) in v.iter_mut().zip(prev) {
                *vi -= &coef * pi;
            }
        }
        basis.push(v);
    }
    // transpose to [grid point][function]
    (0..grid.len()).map(|i| basis.iter().map(|f| f[i].clone()).collect()).collect()
}

/// Basis values rounded to `f64`, `[grid point][function]`.
pub fn basis_values_f64(grid: &[f64], degree_count: usize) -> Vec<Vec<f64>> {
    exact_basis_values(grid, degree_count)
        .into_iter()
        .map(|row| row.iter().map(|v| v.to_f64().expect("finite")).collect())
        .collect()
}

/// Weighted least squares on the basis over `grid`, using only the points
/// in `observations` as `(grid index, y, weight)`.
///
/// Returns `None` when the normal matrix is singular.
pub fn normal_equations_fit(grid: &[f64], observations: &[(usize, f64, f64)], degree_count: usize) -> Option<Vec<f64>> {
    NormalEquationsOracle::new(grid, degree_count).fit(observations)
}

/// Exact basis values computed once, reused across many fits.
pub struct NormalEquationsOracle {
    values: Vec<Vec<BigRational>>,
    degree_count: usize,
}

impl NormalEquationsOracle {
    pub fn new(grid: &[f64], degree_count: usize) -> Self {
        Self { values: exact_basis_values(grid, degree_count), degree_count }
    }

    pub fn fit(&self, observations: &[(usize, f64, f64)]) -> Option<Vec<f64>> {
        let k = self.degree_count;
        let mut a = vec![vec![BigRational::zero(); k + 1]; k];
        for &(idx, y, w) in observations {
            let row = &self.values[idx];
            let y = exact(y);
            let w = exact(w);
            for i in 0..k {
                let wi = &w * &row[i];
                for j in 0..k {
                    a[i][j] += &wi * &row[j];
                }
                a[i][k] += &wi * &y;
            }
        }
        solve_augmented(a).map(|x| x.iter().map(|v| v.to_f64().expect("finite")).collect())
    }
}

fn solve_augmented(mut a: Vec<Vec<BigRational>>) -> Option<Vec<BigRational>> {
    let k = a.len();
    for col in 0..k {
        let pivot = (col..k).find(|&r| !a[r][col].is_zero())?;
        a.swap(col, pivot);
        let pivot_row = a[col].clone();
        for (r, row) in a.iter_mut().enumerate() {
            if r != col && !row[col].is_zero() {
                let factor = &row[col] / &pivot_row[col];
                for (cell, p) in row[col..].iter_mut().zip(&pivot_row[col..]) {
                    *cell -= &factor * p;
                }
            }
        }
    }
    Some((0..k).map(|i| &a[i][k] / &a[i][i]).collect())
}

/// `Σ_grid f_i f_j` computed exactly, for checking orthogonality claims.
pub fn exact_inner_product(values: &[Vec<BigRational>], i: usize, j: usize) -> BigRational {
    values.iter().fold(BigRational::zero(), |acc, row| acc + &row[i] * &row[j])
}

pub fn is_exactly_zero(v: &BigRational) -> bool {
    v.is_zero()
}

pub fn abs_f64(v: &BigRational) -> f64 {
    v.abs().to_f64().unwrap_or(f64::INFINITY)
}

/// Quantile by full sort and linear interpolation between order statistics
/// (`h = (n - 1) p`).
pub fn sorted_quantile(values: &[f64], p: f64) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).expect("no NaN"));
    let h = (v.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(v.len() - 1);
    v[lo] + (h - lo as f64) * (v[hi] - v[lo])
}

/// Direct evaluation of a product-Gaussian kernel density at `(x, y)`.
pub fn kde2_at(points: &[(f64, f64)], hx: f64, hy: f64, x: f64, y: f64) -> f64 {
    let norm = 2.0 * std::f64::consts::PI * hx * hy * points.len() as f64;
    points
        .iter()
        .map(|&(px, py)| {
            let u = (x - px) / hx;
            let v = (y - py) / hy;
            (-0.5 * (u * u + v * v)).exp()
        })
        .sum::<f64>()
        / norm
}

/// Mass ratio of an oxide `M_a O_b` to the metal it contains.
pub fn oxide_mass_ratio(metal_mass: f64, metal_atoms: u32, oxygen_atoms: u32) -> f64 {
    const OXYGEN: f64 = 15.999;
    let metal = metal_mass * metal_atoms as f64;
    (metal + OXYGEN * oxygen_atoms as f64) / metal
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gram_schmidt_is_exactly_orthogonal() {
        let grid = [1.0, 2.0, 3.5, 4.25, 7.0];
        let v = exact_basis_values(&grid, 4);
        for i in 0..4 {
            for j in 0..4 {
                if i != j {
                    assert!(is_exactly_zero(&exact_inner_product(&v, i, j)));
                }
            }
        }
    }

    #[test]
    fn fit_recovers_polynomial() {
        let grid = [1.0, 2.0, 3.0, 4.0, 5.0, 6.0];
        let vals = basis_values_f64(&grid, 3);
        let obs: Vec<(usize, f64, f64)> =
            (0..6).map(|i| (i, 2.0 * vals[i][0] - 0.5 * vals[i][1] + 0.25 * vals[i][2], 1.0)).collect();
        let fit = normal_equations_fit(&grid, &obs, 3).unwrap();
        assert!((fit[0] - 2.0).abs() < 1e-12);
        assert!((fit[1] + 0.5).abs() < 1e-12);
        assert!((fit[2] - 0.25).abs() < 1e-12);
    }

    #[test]
    fn quantile_interpolates() {
        let v = [4.0, 1.0, 3.0, 2.0];
        assert_eq!(sorted_quantile(&v, 0.5), 2.5);
        assert_eq!(sorted_quantile(&v, 0.0), 1.0);
        assert_eq!(sorted_quantile(&v, 1.0), 4.0);
    }
}
