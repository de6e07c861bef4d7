//! Real 3-vector and 3x3 helpers backing the gain-adaptation law.
//!
//! The adaptation state is three gains plus a 3x3 covariance, so everything
//! here stays closed form on stack arrays: cofactor inverse, trigonometric
//! symmetric eigenvalues, no external linear algebra.

pub type Vec3 = [f64; 3];
pub type Mat3 = [[f64; 3]; 3];

pub const VEC_ZERO: Vec3 = [0.0; 3];
pub const MAT_ZERO: Mat3 = [[0.0; 3]; 3];

pub fn identity() -> Mat3 {
    let mut m = MAT_ZERO;
    for i in 0..3 {
        m[i][i] = 1.0;
    }
    m
}

pub fn scaled_identity(s: f64) -> Mat3 {
    let mut m = MAT_ZERO;
    for i in 0..3 {
        m[i][i] = s;
    }
    m
}

pub fn vec_add(a: &Vec3, b: &Vec3) -> Vec3 {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

pub fn vec_sub(a: &Vec3, b: &Vec3) -> Vec3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

pub fn vec_scale(s: f64, v: &Vec3) -> Vec3 {
    [s * v[0], s * v[1], s * v[2]]
}

pub fn dot(a: &Vec3, b: &Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub fn vec_norm(v: &Vec3) -> f64 {
    dot(v, v).sqrt()
}

pub fn mat_add(a: &Mat3, b: &Mat3) -> Mat3 {
    let mut out = *a;
    for i in 0..3 {
        for j in 0..3 {
            out[i][j] += b[i][j];
        }
    }
    out
}

pub fn mat_sub(a: &Mat3, b: &Mat3) -> Mat3 {
    let mut out = *a;
    for i in 0..3 {
        for j in 0..3 {
            out[i][j] -= b[i][j];
        }
    }
    out
}

pub fn mat_scale(s: f64, m: &Mat3) -> Mat3 {
    let mut out = *m;
    for row in &mut out {
        for x in row {
            *x *= s;
        }
    }
    out
}

pub fn mat_vec(m: &Mat3, v: &Vec3) -> Vec3 {
    [dot(&m[0], v), dot(&m[1], v), dot(&m[2], v)]
}

/// Outer product a b^T.
pub fn outer(a: &Vec3, b: &Vec3) -> Mat3 {
    let mut out = MAT_ZERO;
    for i in 0..3 {
        for j in 0..3 {
            out[i][j] = a[i] * b[j];
        }
    }
    out
}

pub fn mat_mul(a: &Mat3, b: &Mat3) -> Mat3 {
    let mut out = MAT_ZERO;
    for i in 0..3 {
        for j in 0..3 {
            out[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j] + a[i][2] * b[2][j];
        }
    }
    out
}

pub fn transpose(m: &Mat3) -> Mat3 {
    let mut out = MAT_ZERO;
    for i in 0..3 {
        for j in 0..3 {
            out[i][j] = m[j][i];
        }
    }
    out
}

/// Symmetric projection (M + M^T) / 2.
pub fn symmetrize(m: &Mat3) -> Mat3 {
    let t = transpose(m);
    mat_scale(0.5, &mat_add(m, &t))
}

pub fn frobenius(m: &Mat3) -> f64 {
    let mut s = 0.0;
    for row in m {
        for x in row {
            s += x * x;
        }
    }
    s.sqrt()
}

pub fn det(m: &Mat3) -> f64 {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
        - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

/// Cofactor inverse; `None` when the determinant is zero or non-finite.
pub fn inverse(m: &Mat3) -> Option<Mat3> {
    let d = det(m);
    if d == 0.0 || !d.is_finite() {
        return None;
    }
    let inv_d = 1.0 / d;
    let mut out = MAT_ZERO;
    for i in 0..3 {
        for j in 0..3 {
            // Cofactor of (j, i), transposed into (i, j).
            let r0 = (j + 1) % 3;
            let r1 = (j + 2) % 3;
            let c0 = (i + 1) % 3;
            let c1 = (i + 2) % 3;
            out[i][j] = (m[r0][c0] * m[r1][c1] - m[r0][c1] * m[r1][c0]) * inv_d;
        }
    }
    if out.iter().flatten().all(|x| x.is_finite()) {
        Some(out)
    } else {
        None
    }
}

pub fn solve(m: &Mat3, rhs: &Vec3) -> Option<Vec3> {
    inverse(m).map(|inv| mat_vec(&inv, rhs))
}

/// Frobenius condition estimate ||A||_F ||A^-1||_F (upper bounds the
/// spectral condition number); +inf when singular.
pub fn cond_frobenius(m: &Mat3) -> f64 {
    match inverse(m) {
        Some(inv) => frobenius(m) * frobenius(&inv),
        None => f64::INFINITY,
    }
}

/// Ascending eigenvalues of a symmetric 3x3 matrix (trigonometric form).
pub fn sym_eigenvalues(m: &Mat3) -> [f64; 3] {
    let p1 = m[0][1] * m[0][1] + m[0][2] * m[0][2] + m[1][2] * m[1][2];
    if p1 == 0.0 {
        let mut d = [m[0][0], m[1][1], m[2][2]];
        d.sort_by(|a, b| a.partial_cmp(b).expect("finite diagonal"));
        return d;
    }
    let q = (m[0][0] + m[1][1] + m[2][2]) / 3.0;
    let p2 = (m[0][0] - q).powi(2) + (m[1][1] - q).powi(2) + (m[2][2] - q).powi(2) + 2.0 * p1;
    let p = (p2 / 6.0).sqrt();
    let mut b = *m;
    for i in 0..3 {
        b[i][i] -= q;
    }
    let b = mat_scale(1.0 / p, &b);
    let r = (det(&b) / 2.0).clamp(-1.0, 1.0);
    let phi = r.acos() / 3.0;
    let hi = q + 2.0 * p * phi.cos();
    let lo = q + 2.0 * p * (phi + 2.0 * std::f64::consts::FRAC_PI_3).cos();
    let mid = 3.0 * q - hi - lo;
    [lo, mid, hi]
}

/// Sylvester criterion on the symmetric part.
pub fn is_positive_definite(m: &Mat3) -> bool {
    let s = symmetrize(m);
    let d1 = s[0][0];
    let d2 = s[0][0] * s[1][1] - s[0][1] * s[1][0];
    d1 > 0.0 && d2 > 0.0 && det(&s) > 0.0
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    const A: Mat3 = [[2.0, 1.0, 0.0], [1.0, 3.0, 1.0], [0.0, 1.0, 4.0]];

    #[test]
    fn inverse_times_matrix_is_identity() {
        let inv = inverse(&A).unwrap();
        let prod = mat_mul(&inv, &A);
        assert!(frobenius(&mat_sub(&prod, &identity())) < 1e-14);
    }

    #[test]
    fn singular_has_no_inverse() {
        let m = [[1.0, 2.0, 3.0], [2.0, 4.0, 6.0], [0.0, 1.0, 1.0]];
        assert!(inverse(&m).is_none());
        assert_eq!(cond_frobenius(&m), f64::INFINITY);
    }

    #[test]
    fn solve_recovers_known_vector() {
        let x = [1.0, -2.0, 0.5];
        let rhs = mat_vec(&A, &x);
        let got = solve(&A, &rhs).unwrap();
        assert!(vec_norm(&vec_sub(&got, &x)) < 1e-13);
    }

    #[test]
    fn sym_eigenvalues_match_invariants() {
        let eig = sym_eigenvalues(&A);
        assert!(eig[0] <= eig[1] && eig[1] <= eig[2]);
        assert_relative_eq!(eig.iter().sum::<f64>(), 9.0, epsilon = 1e-12);
        assert_relative_eq!(eig.iter().product::<f64>(), det(&A), epsilon = 1e-12);
    }

    #[test]
    fn sym_eigenvalues_of_diagonal() {
        let eig = sym_eigenvalues(&scaled_identity(2.5));
        assert_eq!(eig, [2.5, 2.5, 2.5]);
        let eig = sym_eigenvalues(&[[3.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 2.0]]);
        assert_eq!(eig, [1.0, 2.0, 3.0]);
    }

    #[test]
    fn positive_definite_detection() {
        assert!(is_positive_definite(&A));
        assert!(!is_positive_definite(&[
            [1.0, 0.0, 0.0],
            [0.0, -1.0, 0.0],
            [0.0, 0.0, 1.0]
        ]));
        assert!(!is_positive_definite(&MAT_ZERO));
    }

    #[test]
    fn outer_and_quadratic_form() {
        let v = [1.0, 2.0, 3.0];
        let m = outer(&v, &v);
        assert_eq!(m[1][2], 6.0);
        assert_relative_eq!(dot(&mat_vec(&m, &v), &v), dot(&v, &v).powi(2), epsilon = 1e-12);
    }
}
