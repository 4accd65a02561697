//! Small fixed-size helpers shared by the 2D modules.

use nalgebra::{Matrix2, Vector2};

pub type Vec2 = Vector2<f64>;
pub type Mat2 = Matrix2<f64>;

#[inline]
pub fn vec2(x: f64, y: f64) -> Vec2 {
    Vec2::new(x, y)
}

/// Counterclockwise rotation by a quarter turn.
#[inline]
pub fn perp(v: &Vec2) -> Vec2 {
    Vec2::new(-v.y, v.x)
}

#[inline]
pub fn outer(a: &Vec2, b: &Vec2) -> Mat2 {
    a * b.transpose()
}

#[inline]
pub fn cross(a: &Vec2, b: &Vec2) -> f64 {
    a.x * b.y - a.y * b.x
}

#[inline]
pub fn unit_angle(theta: f64) -> Vec2 {
    Vec2::new(theta.cos(), theta.sin())
}

/// Eigenvalues of a symmetric 2x2 matrix, largest first.
pub fn sym_eigenvalues(m: &Mat2) -> (f64, f64) {
    let a = m[(0, 0)];
    let d = m[(1, 1)];
    let b = 0.5 * (m[(0, 1)] + m[(1, 0)]);
    let mean = 0.5 * (a + d);
    let rad = (0.25 * (a - d) * (a - d) + b * b).sqrt();
    (mean + rad, mean - rad)
}

pub fn is_symmetric(m: &Mat2, tol: f64) -> bool {
    (m[(0, 1)] - m[(1, 0)]).abs() <= tol * (1.0 + m.abs().max())
}

pub fn to_array(v: &Vec2) -> [f64; 2] {
    [v.x, v.y]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eigenvalues_of_rotated_diagonal() {
        let r = nalgebra::Rotation2::new(0.7).into_inner();
        let m = r * Mat2::new(3.0, 0.0, 0.0, -1.0) * r.transpose();
        let (hi, lo) = sym_eigenvalues(&m);
        assert!((hi - 3.0).abs() < 1e-12 && (lo + 1.0).abs() < 1e-12);
    }

    #[test]
    fn perp_is_ccw() {
        let v = perp(&vec2(1.0, 0.0));
        assert_eq!(to_array(&v), [0.0, 1.0]);
        assert!(cross(&vec2(1.0, 0.0), &v) > 0.0);
    }
}
