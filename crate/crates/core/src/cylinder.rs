//! Green's function of `-Δ` on a cylinder of length `L` (Dirichlet at
//! `x = 0, L`) and circumference `W` (periodic in `y`), analytically as a
//! transverse mode sum and numerically with a 5-point stencil.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum CylinderError {
    #[error("grid needs at least 8 cells per direction and positive extents")]
    InvalidGrid,
    #[error("analytic form needs x < x', got x = {x}, x' = {xp}")]
    OrderViolation { x: f64, xp: f64 },
    #[error("source ({0}, {1}) is not strictly interior")]
    SourceOnBoundary(usize, usize),
    #[error("conjugate gradient stalled at residual {residual:e} after {iterations} iterations")]
    SolverDivergence { iterations: usize, residual: f64 },
    #[error("invalid parameter: {0}")]
    InvalidParameter(&'static str),
}

/// Nodes `x_i = i·hx` for `i = 0..=nx` and `y_j = j·hy` for `j = 0..ny`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CylinderGrid {
    pub nx: usize,
    pub ny: usize,
    pub l: f64,
    pub w: f64,
    pub hx: f64,
    pub hy: f64,
}

impl CylinderGrid {
    pub fn new(nx: usize, ny: usize, l: f64, w: f64) -> Result<Self, CylinderError> {
        if nx < 8 || ny < 8 || !(l > 0.0 && w > 0.0 && l.is_finite() && w.is_finite()) {
            return Err(CylinderError::InvalidGrid);
        }
        Ok(Self { nx, ny, l, w, hx: l / nx as f64, hy: w / ny as f64 })
    }

    pub fn x(&self, i: usize) -> f64 {
        i as f64 * self.hx
    }

    pub fn y(&self, j: usize) -> f64 {
        j as f64 * self.hy
    }

    fn len(&self) -> usize {
        (self.nx + 1) * self.ny
    }

    fn idx(&self, i: usize, j: usize) -> usize {
        i * self.ny + j
    }

    /// `-Δ_h u` on interior rows; boundary rows are left zero.
    fn apply(&self, u: &[f64], out: &mut [f64]) {
        let (cx, cy) = (1.0 / (self.hx * self.hx), 1.0 / (self.hy * self.hy));
        for i in 1..self.nx {
            for j in 0..self.ny {
                let jm = if j == 0 { self.ny - 1 } else { j - 1 };
                let jp = if j + 1 == self.ny { 0 } else { j + 1 };
                let c = u[self.idx(i, j)];
                out[self.idx(i, j)] = cx * (2.0 * c - u[self.idx(i - 1, j)] - u[self.idx(i + 1, j)])
                    + cy * (2.0 * c - u[self.idx(i, jm)] - u[self.idx(i, jp)]);
            }
        }
    }
}

/// Numerical solution of `-Δ_h u = b` together with solver diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct GreenFunctionSample {
    pub grid: CylinderGrid,
    pub source: (usize, usize),
    /// Row-major `(nx + 1) × ny` node values.
    pub values: Vec<f64>,
    pub iterations: usize,
    /// `‖b - A u‖ / ‖b‖` at exit.
    pub residual: f64,
}

impl GreenFunctionSample {
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[self.grid.idx(i, j)]
    }

    /// `∮ dy u(x_i, y)` for every column, by the periodic trapezoid rule.
    pub fn cycle_integrated(&self) -> Vec<f64> {
        (0..=self.grid.nx)
            .map(|i| self.grid.hy * (0..self.grid.ny).map(|j| self.at(i, j)).sum::<f64>())
            .collect()
    }
}

pub const SOLVER_TOLERANCE: f64 = 1e-12;

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Conjugate gradients on the interior unknowns.
fn solve(grid: &CylinderGrid, b: &[f64]) -> Result<(Vec<f64>, usize, f64), CylinderError> {
    let n = grid.len();
    let bnorm = libm::sqrt(dot(b, b));
    let mut u = vec![0.0; n];
    if bnorm == 0.0 {
        return Ok((u, 0, 0.0));
    }
    let mut r = b.to_vec();
    let mut p = r.clone();
    let mut ap = vec![0.0; n];
    let mut rr = dot(&r, &r);
    let max_iter = 20 * (grid.nx + grid.ny) * 4;
    for it in 0..max_iter {
        let res = libm::sqrt(rr) / bnorm;
        if res < SOLVER_TOLERANCE {
            return Ok((u, it, res));
        }
        grid.apply(&p, &mut ap);
        let alpha = rr / dot(&p, &ap);
        for k in 0..n {
            u[k] += alpha * p[k];
            r[k] -= alpha * ap[k];
        }
        let rr_new = dot(&r, &r);
        let beta = rr_new / rr;
        rr = rr_new;
        for k in 0..n {
            p[k] = r[k] + beta * p[k];
        }
        if !rr.is_finite() {
            break;
        }
    }
    Err(CylinderError::SolverDivergence { iterations: max_iter, residual: libm::sqrt(rr) / bnorm })
}

/// Point source `δ/(hx·hy)` at node `source`.
pub fn green_numeric(grid: &CylinderGrid, source: (usize, usize)) -> Result<GreenFunctionSample, CylinderError> {
    let (i, j) = source;
    if i == 0 || i >= grid.nx || j >= grid.ny {
        return Err(CylinderError::SourceOnBoundary(i, j));
    }
    let mut b = vec![0.0; grid.len()];
    b[grid.idx(i, j)] = 1.0 / (grid.hx * grid.hy);
    let (values, iterations, residual) = solve(grid, &b)?;
    Ok(GreenFunctionSample { grid: *grid, source, values, iterations, residual })
}

/// Uniform line source on the cycle `x = x_i`, i.e. `∮ dy' G(·; x_i, y')`.
pub fn line_source_numeric(grid: &CylinderGrid, i: usize) -> Result<GreenFunctionSample, CylinderError> {
    if i == 0 || i >= grid.nx {
        return Err(CylinderError::SourceOnBoundary(i, 0));
    }
    let mut b = vec![0.0; grid.len()];
    for j in 0..grid.ny {
        b[grid.idx(i, j)] = 1.0 / grid.hx;
    }
    let (values, iterations, residual) = solve(grid, &b)?;
    Ok(GreenFunctionSample { grid: *grid, source: (i, 0), values, iterations, residual })
}

/// `sinh(kx) sinh(k(L-x')) / sinh(kL)` for `0 ≤ x < x' ≤ L`, `k > 0`,
/// without overflow.
fn sinh_ratio(k: f64, x: f64, xp: f64, l: f64) -> f64 {
    let em = |s: f64| -libm::expm1(-2.0 * k * s);
    0.5 * libm::exp(-k * (xp - x)) * em(x) * em(l - xp) / em(l)
}

/// Mode sum `Σ_k e^{ik(y-y')} sinh(kx) sinh(k(L-x')) / (kW sinh(kL))` over
/// `k = 2πm/W`, `|m| ≤ kmax`; the `k = 0` term is `x(L-x')/(LW)`.
pub fn green_analytic(
    x: f64,
    y: f64,
    xp: f64,
    yp: f64,
    grid: &CylinderGrid,
    kmax: usize,
) -> Result<f64, CylinderError> {
    if !(x < xp) {
        return Err(CylinderError::OrderViolation { x, xp });
    }
    if kmax == 0 {
        return Err(CylinderError::InvalidParameter("kmax must be at least 1"));
    }
    let (l, w) = (grid.l, grid.w);
    let mut sum = x * (l - xp) / (l * w);
    for m in 1..=kmax {
        let k = 2.0 * PI * m as f64 / w;
        sum += 2.0 * libm::cos(k * (y - yp)) * sinh_ratio(k, x, xp, l) / (k * w);
    }
    Ok(sum)
}

/// Symmetrized analytic form, valid for any pair of distinct columns.
pub fn green_analytic_symmetric(
    x: f64,
    y: f64,
    xp: f64,
    yp: f64,
    grid: &CylinderGrid,
    kmax: usize,
) -> Result<f64, CylinderError> {
    if x < xp {
        green_analytic(x, y, xp, yp, grid, kmax)
    } else {
        green_analytic(xp, yp, x, y, grid, kmax)
    }
}

/// `G_tree = (n/2π)(W/L)`.
pub fn tree_conductance_analytic(l: f64, w: f64, n: u32) -> f64 {
    n as f64 / (2.0 * PI) * w / l
}

/// Finite-difference evaluation of
/// `G_tree = (1/2)(n/2π)² ∮dy ∮dy' (-∂x ∂x') (4π/n) (-Δ)⁻¹`
/// with `x` at `L/4` and `x'` at `3L/4`.
pub fn tree_conductance_numeric(grid: &CylinderGrid, n: u32) -> Result<f64, CylinderError> {
    let i = grid.nx / 4;
    let ip = (3 * grid.nx) / 4;
    let mixed = mixed_derivative(grid, i, ip)?;
    let n = n as f64;
    let s = n / (2.0 * PI);
    Ok(0.5 * s * s * (-mixed) * (4.0 * PI / n))
}

/// Centered-difference `∂x ∂x' ∮dy ∮dy' (-Δ)⁻¹` at columns `i`, `ip`.
pub fn mixed_derivative(grid: &CylinderGrid, i: usize, ip: usize) -> Result<f64, CylinderError> {
    if i < 1 || ip + 1 >= grid.nx || i + 1 >= ip {
        return Err(CylinderError::InvalidParameter("cycles must be separated interior columns"));
    }
    let plus = line_source_numeric(grid, ip + 1)?.cycle_integrated();
    let minus = line_source_numeric(grid, ip - 1)?.cycle_integrated();
    let d = plus[i + 1] - plus[i - 1] - minus[i + 1] + minus[i - 1];
    Ok(d / (4.0 * grid.hx * grid.hx))
}

/// Least-squares fit `G(r) ≈ A ln r + B + C r²`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LogFit {
    pub slope: f64,
    pub intercept: f64,
    pub curvature: f64,
    pub r_min: f64,
    pub r_max: f64,
}

pub fn fit_log_law(samples: &[(f64, f64)]) -> Result<LogFit, CylinderError> {
    if samples.len() < 3 || samples.iter().any(|&(r, _)| !(r > 0.0)) {
        return Err(CylinderError::InvalidParameter("need at least three positive separations"));
    }
    // normal equations for the basis (ln r, 1, r²)
    let mut m = [[0.0f64; 4]; 3];
    for &(r, g) in samples {
        let phi = [libm::log(r), 1.0, r * r];
        for a in 0..3 {
            for b in 0..3 {
                m[a][b] += phi[a] * phi[b];
            }
            m[a][3] += phi[a] * g;
        }
    }
    for c in 0..3 {
        let p = (c..3)
            .max_by(|&a, &b| m[a][c].abs().partial_cmp(&m[b][c].abs()).unwrap())
            .unwrap();
        m.swap(c, p);
        for row in 0..3 {
            if row != c {
                let f = m[row][c] / m[c][c];
                for col in c..4 {
                    m[row][col] -= f * m[c][col];
                }
            }
        }
    }
    let r_min = samples.iter().map(|s| s.0).fold(f64::INFINITY, f64::min);
    let r_max = samples.iter().map(|s| s.0).fold(0.0, f64::max);
    Ok(LogFit {
        slope: m[0][3] / m[0][0],
        intercept: m[1][3] / m[1][1],
        curvature: m[2][3] / m[2][2],
        r_min,
        r_max,
    })
}

/// Fit the numerical Green's function along the transverse line through a
/// source at the middle of the cylinder.
pub fn near_diagonal_fit(grid: &CylinderGrid, r_cells: core::ops::RangeInclusive<usize>) -> Result<LogFit, CylinderError> {
    let (i, j) = (grid.nx / 2, 0);
    if *r_cells.end() >= grid.ny / 2 || *r_cells.start() == 0 {
        return Err(CylinderError::InvalidParameter("separations must lie in 1..ny/2"));
    }
    let g = green_numeric(grid, (i, j))?;
    let samples: Vec<(f64, f64)> = r_cells.map(|d| (grid.y(d), g.at(i, d))).collect();
    fit_log_law(&samples)
}

/// Error of a quantity on a sequence of refined grids.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ConvergenceReport {
    pub sizes: Vec<usize>,
    pub errors: Vec<f64>,
    /// `log2(e_k / e_{k+1})` for consecutive doublings.
    pub observed_orders: Vec<f64>,
}

impl ConvergenceReport {
    pub fn new(sizes: Vec<usize>, errors: Vec<f64>) -> Self {
        let observed_orders = errors.windows(2).map(|e| libm::log2(e[0] / e[1])).collect();
        Self { sizes, errors, observed_orders }
    }

    pub fn decreasing(&self) -> bool {
        self.errors.windows(2).all(|e| e[1] < e[0])
    }
}

/// Largest relative deviation between the two Green's functions over all
/// interior nodes at least `min_cells` spacings from the source and the
/// boundary, with the source at `(nx/2, ny/2)`.
pub fn green_max_relative_error(grid: &CylinderGrid, min_cells: usize, kmax: usize) -> Result<f64, CylinderError> {
    let src = (grid.nx / 2, grid.ny / 2);
    let g = green_numeric(grid, src)?;
    let (xp, yp) = (grid.x(src.0), grid.y(src.1));
    let mut worst = 0.0f64;
    for i in min_cells..=grid.nx - min_cells {
        if i == src.0 {
            continue;
        }
        for j in 0..grid.ny {
            let (di, dj) = (i.abs_diff(src.0), j.abs_diff(src.1).min(grid.ny - j.abs_diff(src.1)));
            if di * di + dj * dj < min_cells * min_cells {
                continue;
            }
            let exact = green_analytic_symmetric(grid.x(i), grid.y(j), xp, yp, grid, kmax)?;
            worst = worst.max(((g.at(i, j) - exact) / exact).abs());
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn square(n: usize) -> CylinderGrid {
        CylinderGrid::new(n, n, 1.0, 1.0).unwrap()
    }

    #[test]
    fn analytic_boundary_and_zero_mode() {
        let g = square(16);
        assert_eq!(green_analytic(0.0, 0.3, 0.5, 0.1, &g, 50).unwrap(), 0.0);
        assert!(green_analytic(0.5, 0.0, 0.5, 0.0, &g, 50).is_err());
        // averaging over y kills every k ≠ 0 mode
        let avg: f64 = (0..400).map(|j| green_analytic(0.2, j as f64 / 400.0, 0.7, 0.0, &g, 20).unwrap()).sum::<f64>() / 400.0;
        assert_relative_eq!(avg, 0.2 * 0.3, max_relative = 1e-12);
    }

    #[test]
    fn numeric_solution_basics() {
        let g = square(16);
        let s = green_numeric(&g, (8, 3)).unwrap();
        assert!(s.residual < SOLVER_TOLERANCE);
        assert!((0..16).all(|j| s.at(0, j) == 0.0 && s.at(16, j) == 0.0));
        assert!(s.values.iter().all(|&v| v >= -1e-12));
        let t = green_numeric(&g, (8, 7)).unwrap();
        for i in 0..=16 {
            for j in 0..16 {
                assert_relative_eq!(s.at(i, j), t.at(i, (j + 4) % 16), max_relative = 1e-8, epsilon = 1e-12);
            }
        }
        assert!(green_numeric(&g, (0, 3)).is_err());
    }

    #[test]
    fn cycle_integral_is_affine_between_cycles() {
        let g = square(32);
        let u = line_source_numeric(&g, 24).unwrap().cycle_integrated();
        for i in 1..24 {
            assert_relative_eq!(u[i + 1] - u[i], u[i] - u[i - 1], max_relative = 1e-8);
        }
        assert_relative_eq!(u[8], 0.25 * 0.25, max_relative = 1e-9);
    }

    #[test]
    fn tree_conductance_paths() {
        assert_relative_eq!(tree_conductance_analytic(1.0, 1.0, 4), 2.0 / PI);
        assert_relative_eq!(tree_conductance_analytic(1.0, 2.0, 4), 4.0 / PI);
        let g = CylinderGrid::new(16, 16, 1.0, 2.0).unwrap();
        assert_relative_eq!(tree_conductance_numeric(&g, 4).unwrap(), 4.0 / PI, max_relative = 1e-6);
    }

    #[test]
    fn log_fit_recovers_synthetic_law() {
        let samples: Vec<(f64, f64)> =
            (1..50).map(|k| k as f64 * 0.01).map(|r| (r, -0.3 * r.ln() + 0.7 + 2.0 * r * r)).collect();
        let fit = fit_log_law(&samples).unwrap();
        assert_relative_eq!(fit.slope, -0.3, max_relative = 1e-9);
        assert_relative_eq!(fit.intercept, 0.7, max_relative = 1e-9);
        assert_relative_eq!(fit.curvature, 2.0, max_relative = 1e-9);
    }
}
