//! Fixed-size 3-vector and 3x3 matrix kernel with a row-pivoted direct solve.

use std::ops::{Add, Index, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative pivot threshold below which a 3x3 system is reported singular.
pub const EPS_RANK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(from = "[f64; 3]", into = "[f64; 3]")]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Vec3 {
    pub const ZERO: Vec3 = Vec3::new(0.0, 0.0, 0.0);

    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn dot(self, other: Vec3) -> f64 {
        self.x * other.x + self.y * other.y + self.z * other.z
    }

    pub fn norm_squared(self) -> f64 {
        self.dot(self)
    }

    pub fn norm(self) -> f64 {
        self.norm_squared().sqrt()
    }

    pub fn distance(self, other: Vec3) -> f64 {
        (self - other).norm()
    }

    pub fn cross(self, other: Vec3) -> Vec3 {
        Vec3::new(
            self.y * other.z - self.z * other.y,
            self.z * other.x - self.x * other.z,
            self.x * other.y - self.y * other.x,
        )
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    pub fn max_abs(self) -> f64 {
        self.x.abs().max(self.y.abs()).max(self.z.abs())
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }
}

impl From<[f64; 3]> for Vec3 {
    fn from(a: [f64; 3]) -> Self {
        Vec3::new(a[0], a[1], a[2])
    }
}

impl From<Vec3> for [f64; 3] {
    fn from(v: Vec3) -> Self {
        v.to_array()
    }
}

impl Index<usize> for Vec3 {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        match i {
            0 => &self.x,
            1 => &self.y,
            2 => &self.z,
            _ => panic!("Vec3 index {i} out of range"),
        }
    }
}

impl Add for Vec3 {
    type Output = Vec3;
    fn add(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl Sub for Vec3 {
    type Output = Vec3;
    fn sub(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl Neg for Vec3 {
    type Output = Vec3;
    fn neg(self) -> Vec3 {
        Vec3::new(-self.x, -self.y, -self.z)
    }
}

impl Mul<Vec3> for f64 {
    type Output = Vec3;
    fn mul(self, v: Vec3) -> Vec3 {
        Vec3::new(self * v.x, self * v.y, self * v.z)
    }
}

impl Mul<f64> for Vec3 {
    type Output = Vec3;
    fn mul(self, s: f64) -> Vec3 {
        s * self
    }
}

/// Inner product of two 3-vectors.
pub fn dot(a: Vec3, b: Vec3) -> f64 {
    a.dot(b)
}

/// Euclidean length of a 3-vector.
pub fn norm(a: Vec3) -> f64 {
    a.norm()
}

/// 3x3 matrix stored as three rows.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Mat3 {
    pub rows: [Vec3; 3],
}

impl Mat3 {
    pub const IDENTITY: Mat3 = Mat3::from_rows(
        Vec3::new(1.0, 0.0, 0.0),
        Vec3::new(0.0, 1.0, 0.0),
        Vec3::new(0.0, 0.0, 1.0),
    );

    pub const fn from_rows(r0: Vec3, r1: Vec3, r2: Vec3) -> Self {
        Self { rows: [r0, r1, r2] }
    }

    pub fn diag(d: Vec3) -> Self {
        Self::from_rows(
            Vec3::new(d.x, 0.0, 0.0),
            Vec3::new(0.0, d.y, 0.0),
            Vec3::new(0.0, 0.0, d.z),
        )
    }

    pub fn row(&self, i: usize) -> Vec3 {
        self.rows[i]
    }

    pub fn transpose(&self) -> Mat3 {
        let [a, b, c] = self.rows;
        Mat3::from_rows(
            Vec3::new(a.x, b.x, c.x),
            Vec3::new(a.y, b.y, c.y),
            Vec3::new(a.z, b.z, c.z),
        )
    }

    pub fn mul_vec(&self, v: Vec3) -> Vec3 {
        Vec3::new(
            self.rows[0].dot(v),
            self.rows[1].dot(v),
            self.rows[2].dot(v),
        )
    }

    pub fn mul_mat(&self, other: &Mat3) -> Mat3 {
        let t = other.transpose();
        let row = |r: Vec3| Vec3::new(r.dot(t.rows[0]), r.dot(t.rows[1]), r.dot(t.rows[2]));
        Mat3::from_rows(row(self.rows[0]), row(self.rows[1]), row(self.rows[2]))
    }

    pub fn is_finite(&self) -> bool {
        self.rows.iter().all(|r| r.is_finite())
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> f64 {
        self.rows.iter().map(|r| r.max_abs()).fold(0.0, f64::max)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.rows
            .iter()
            .map(|r| r.norm_squared())
            .sum::<f64>()
            .sqrt()
    }
}

impl Index<(usize, usize)> for Mat3 {
    type Output = f64;

    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.rows[i][j]
    }
}

/// Row-pivoted LU factorization of a 3x3 matrix.
///
/// Keeps the pivot magnitudes so callers can report how close the system
/// came to rank deficiency.
#[derive(Debug, Clone, Copy)]
pub struct Lu3 {
    lu: [[f64; 3]; 3],
    perm: [usize; 3],
    pivots: [f64; 3],
    scale: f64,
}

#[allow(clippy::needless_range_loop)]
impl Lu3 {
    pub fn factor(a: &Mat3) -> Result<Lu3> {
        let mut lu = a.rows.map(|r| r.to_array());
        let mut perm = [0, 1, 2];
        let mut pivots = [0.0; 3];
        let scale = a.max_abs();
        let threshold = EPS_RANK * scale;

        for col in 0..3 {
            let p = (col..3)
                .max_by(|&i, &j| lu[i][col].abs().total_cmp(&lu[j][col].abs()))
                .unwrap_or(col);
            lu.swap(col, p);
            perm.swap(col, p);

            let pivot = lu[col][col];
            if pivot.is_nan() || pivot.abs() <= threshold {
                return Err(Error::SingularMatrix {
                    pivot: pivot.abs(),
                    threshold,
                });
            }
            pivots[col] = pivot.abs();

            for row in col + 1..3 {
                let factor = lu[row][col] / pivot;
                lu[row][col] = factor;
                for k in col + 1..3 {
                    lu[row][k] -= factor * lu[col][k];
                }
            }
        }

        Ok(Lu3 {
            lu,
            perm,
            pivots,
            scale,
        })
    }

    pub fn solve(&self, b: Vec3) -> Vec3 {
        let b = b.to_array();
        let mut y = [0.0; 3];
        for i in 0..3 {
            let mut s = b[self.perm[i]];
            for k in 0..i {
                s -= self.lu[i][k] * y[k];
            }
            y[i] = s;
        }
        let mut x = [0.0; 3];
        for i in (0..3).rev() {
            let mut s = y[i];
            for k in i + 1..3 {
                s -= self.lu[i][k] * x[k];
            }
            x[i] = s / self.lu[i][i];
        }
        Vec3::from(x)
    }

    pub fn diagnostics(&self) -> PivotDiagnostics {
        let min = self.pivots.iter().copied().fold(f64::INFINITY, f64::min);
        let max = self.pivots.iter().copied().fold(0.0, f64::max);
        PivotDiagnostics {
            pivots: self.pivots,
            matrix_scale: self.scale,
            pivot_ratio: if max > 0.0 { min / max } else { 0.0 },
        }
    }
}

/// Conditioning summary of a factored 3x3 system.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PivotDiagnostics {
    /// Absolute pivot magnitudes in elimination order.
    pub pivots: [f64; 3],
    /// Largest absolute matrix entry.
    pub matrix_scale: f64,
    /// min pivot / max pivot; small values flag near-degenerate geometry.
    pub pivot_ratio: f64,
}

/// Solves `a * s = b` by elimination with row pivoting.
pub fn solve3(a: &Mat3, b: Vec3) -> Result<Vec3> {
    Ok(Lu3::factor(a)?.solve(b))
}
