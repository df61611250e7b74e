//! Laplacian spectrum, the 2-D influence diagram, and Gaussian influence fields.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{max_asymmetry, Matrix};

/// Sweep budget for the cyclic Jacobi iteration.
pub const MAX_SWEEPS: usize = 100;

/// Relative gap below which `λ₂` and `λ₃` are treated as a tie.
pub const TIE_TOL: f64 = 1e-9;

/// Maximum absolute row sum.
pub fn norm_inf(m: &Matrix) -> f64 {
    m.row_iter()
        .map(|row| row.iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

#[derive(Clone, Debug, PartialEq)]
pub struct SpectralDecomposition {
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    /// Column `n` pairs with `eigenvalues[n]`.
    pub eigenvectors: Matrix,
}

impl SpectralDecomposition {
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn reconstruct(&self) -> Matrix {
        let v = &self.eigenvectors;
        let lambda = Matrix::from_diagonal(&nalgebra::DVector::from_column_slice(&self.eigenvalues));
        v * lambda * v.transpose()
    }
}

/// Full symmetric eigendecomposition by cyclic Jacobi rotations.
///
/// Eigenvectors are sign-normalized so that the entry of largest magnitude is
/// positive; on ties the lowest index decides.
pub fn eigendecompose(l: &Matrix, tol: f64) -> Result<SpectralDecomposition> {
    if !l.is_square() {
        return Err(Error::Dimension(format!("matrix is {}x{}", l.nrows(), l.ncols())));
    }
    let n = l.nrows();
    let scale = norm_inf(l).max(1.0);
    let asym = max_asymmetry(l);
    if asym > tol * scale {
        return Err(Error::NotSymmetric(asym));
    }
    let mut a = Matrix::from_fn(n, n, |i, j| 0.5 * (l[(i, j)] + l[(j, i)]));
    let mut v = Matrix::identity(n, n);
    let frob = a.norm();

    let off = |a: &Matrix| -> f64 {
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    s += a[(i, j)] * a[(i, j)];
                }
            }
        }
        s.sqrt()
    };

    let mut converged = off(&a) <= f64::EPSILON * frob;
    let mut sweeps = 0;
    while !converged {
        if sweeps == MAX_SWEEPS {
            return Err(Error::NoConvergence(MAX_SWEEPS));
        }
        sweeps += 1;
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                let tau = s / (1.0 + c);

                a[(p, p)] -= t * apq;
                a[(q, q)] += t * apq;
                a[(p, q)] = 0.0;
                a[(q, p)] = 0.0;
                for r in 0..n {
                    if r != p && r != q {
                        let arp = a[(r, p)];
                        let arq = a[(r, q)];
                        let new_rp = arp - s * (arq + tau * arp);
                        let new_rq = arq + s * (arp - tau * arq);
                        a[(r, p)] = new_rp;
                        a[(p, r)] = new_rp;
                        a[(r, q)] = new_rq;
                        a[(q, r)] = new_rq;
                    }
                }
                for r in 0..n {
                    let vrp = v[(r, p)];
                    let vrq = v[(r, q)];
                    v[(r, p)] = vrp - s * (vrq + tau * vrp);
                    v[(r, q)] = vrq + s * (vrp - tau * vrq);
                }
            }
        }
        converged = off(&a) <= f64::EPSILON * frob;
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].total_cmp(&a[(j, j)]).then(i.cmp(&j)));
    let eigenvalues = order.iter().map(|&k| a[(k, k)]).collect();
    let mut eigenvectors = Matrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        let mut col = v.column(src).clone_owned();
        let mut lead = 0;
        for r in 1..n {
            if col[r].abs() > col[lead].abs() {
                lead = r;
            }
        }
        if col[lead] < 0.0 {
            col.neg_mut();
        }
        eigenvectors.set_column(dst, &col);
    }
    Ok(SpectralDecomposition { eigenvalues, eigenvectors })
}

/// Model parameters a diagram was computed under.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub eta: f64,
    pub p_max: f64,
    pub gamma: f64,
}

/// Agent `i` sits at `(v₂[i]/λ₂, v₃[i]/λ₃)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InfluenceDiagram {
    pub points: Vec<[f64; 2]>,
    pub lambda2: f64,
    pub lambda3: f64,
    /// `λ₂` and `λ₃` coincide, so the axes are only defined up to rotation.
    pub rotation_ambiguous: bool,
    pub provenance: Option<Provenance>,
}

impl InfluenceDiagram {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn distance(&self, i: usize, j: usize) -> f64 {
        let (a, b) = (self.points[i], self.points[j]);
        (a[0] - b[0]).hypot(a[1] - b[1])
    }

    pub fn bounding_box(&self) -> Bounds {
        let mut b = Bounds {
            x_min: f64::INFINITY,
            x_max: f64::NEG_INFINITY,
            y_min: f64::INFINITY,
            y_max: f64::NEG_INFINITY,
        };
        for p in &self.points {
            b.x_min = b.x_min.min(p[0]);
            b.x_max = b.x_max.max(p[0]);
            b.y_min = b.y_min.min(p[1]);
            b.y_max = b.y_max.max(p[1]);
        }
        b
    }

    pub fn bounding_box_diagonal(&self) -> f64 {
        let b = self.bounding_box();
        b.width().hypot(b.height())
    }
}

pub fn embed(decomp: &SpectralDecomposition) -> Result<InfluenceDiagram> {
    let n = decomp.len();
    if n < 3 {
        return Err(Error::Dimension(format!("an influence diagram needs at least 3 agents, got {n}")));
    }
    let scale = decomp.eigenvalues.iter().fold(1.0_f64, |m, v| m.max(v.abs()));
    let (l2, l3) = (decomp.eigenvalues[1], decomp.eigenvalues[2]);
    if l2 <= 1e-9 * scale {
        return Err(Error::Disconnected(l2));
    }
    let v2 = decomp.eigenvectors.column(1);
    let v3 = decomp.eigenvectors.column(2);
    let points = (0..n).map(|i| [v2[i] / l2, v3[i] / l3]).collect();
    Ok(InfluenceDiagram {
        points,
        lambda2: l2,
        lambda3: l3,
        rotation_ambiguous: (l3 - l2).abs() <= TIE_TOL * l3.abs(),
        provenance: None,
    })
}

/// Axis-aligned rectangle in diagram coordinates.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Bounds {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
}

impl Bounds {
    pub fn width(&self) -> f64 {
        self.x_max - self.x_min
    }

    pub fn height(&self) -> f64 {
        self.y_max - self.y_min
    }

    /// Smallest square containing every point, centred on their bounding
    /// box, then grown by `margin` times its side on each side.
    pub fn square_around(points: &[[f64; 2]], margin: f64) -> Bounds {
        let bb = InfluenceDiagram {
            points: points.to_vec(),
            lambda2: 0.0,
            lambda3: 0.0,
            rotation_ambiguous: false,
            provenance: None,
        }
        .bounding_box();
        let side = bb.width().max(bb.height());
        let half = 0.5 * side * (1.0 + 2.0 * margin);
        let cx = 0.5 * (bb.x_min + bb.x_max);
        let cy = 0.5 * (bb.y_min + bb.y_max);
        Bounds {
            x_min: cx - half,
            x_max: cx + half,
            y_min: cy - half,
            y_max: cy + half,
        }
    }
}

fn field_at(points: &[[f64; 2]], x: &[f64], sigma: &[f64], z: [f64; 2]) -> f64 {
    points
        .iter()
        .zip(x)
        .zip(sigma)
        .map(|((p, &xi), &s)| {
            let d2 = (z[0] - p[0]).powi(2) + (z[1] - p[1]).powi(2);
            xi * (-d2 / s).exp()
        })
        .sum()
}

fn check_field_inputs(diagram: &InfluenceDiagram, x: &[f64], sigma: &[f64]) -> Result<()> {
    let n = diagram.len();
    if x.len() != n || sigma.len() != n {
        return Err(Error::Dimension(format!(
            "{n} agents but {} assignments and {} widths",
            x.len(),
            sigma.len()
        )));
    }
    if let Some(s) = sigma.iter().find(|s| !(**s > 0.0 && s.is_finite())) {
        return Err(Error::Parameter(format!("sigma must be positive, got {s}")));
    }
    Ok(())
}

/// Net influence `x(z) = Σᵢ xᵢ·exp(−‖z − zᵢ‖²/σᵢ)`.
pub fn influence_field(diagram: &InfluenceDiagram, x: &[f64], sigma: &[f64], z: [f64; 2]) -> Result<f64> {
    check_field_inputs(diagram, x, sigma)?;
    Ok(field_at(&diagram.points, x, sigma, z))
}

/// Influence field sampled at cell centres.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FieldGrid {
    pub bounds: Bounds,
    pub resolution: usize,
    /// Row-major, row 0 at `y_min`.
    pub values: Vec<f64>,
    pub sigma: Vec<f64>,
}

impl FieldGrid {
    pub fn cell_center(&self, ix: usize, iy: usize) -> [f64; 2] {
        let dx = self.bounds.width() / self.resolution as f64;
        let dy = self.bounds.height() / self.resolution as f64;
        [
            self.bounds.x_min + (ix as f64 + 0.5) * dx,
            self.bounds.y_min + (iy as f64 + 0.5) * dy,
        ]
    }

    pub fn value(&self, ix: usize, iy: usize) -> f64 {
        self.values[iy * self.resolution + ix]
    }
}

pub fn sample_field(
    diagram: &InfluenceDiagram,
    x: &[f64],
    sigma: &[f64],
    bounds: Bounds,
    resolution: usize,
) -> Result<FieldGrid> {
    check_field_inputs(diagram, x, sigma)?;
    if resolution < 2 {
        return Err(Error::Parameter(format!("grid resolution must be at least 2, got {resolution}")));
    }
    if !(bounds.width() > 0.0 && bounds.height() > 0.0) {
        return Err(Error::Parameter("grid bounds are degenerate".into()));
    }
    let mut grid = FieldGrid {
        bounds,
        resolution,
        values: Vec::new(),
        sigma: sigma.to_vec(),
    };
    let rows: Vec<Vec<f64>> = (0..resolution)
        .into_par_iter()
        .map(|iy| {
            (0..resolution)
                .map(|ix| field_at(&diagram.points, x, sigma, grid.cell_center(ix, iy)))
                .collect()
        })
        .collect();
    grid.values = rows.into_iter().flatten().collect();
    Ok(grid)
}

/// Share of cells where the field is strictly positive.
pub fn positive_area_fraction(grid: &FieldGrid) -> Result<f64> {
    if grid.values.is_empty() {
        return Err(Error::Dimension("field grid is empty".into()));
    }
    let positive = grid.values.iter().filter(|v| **v > 0.0).count();
    Ok(positive as f64 / grid.values.len() as f64)
}
