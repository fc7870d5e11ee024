//! Small dense symmetric eigenproblems and solves used throughout the crate.

/// Eigenvalues of a symmetric 2x2 matrix, ascending.
pub(crate) fn sym2_eigenvalues(m: [[f64; 2]; 2]) -> [f64; 2] {
    let half_tr = 0.5 * (m[0][0] + m[1][1]);
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    let disc = (half_tr * half_tr - det).max(0.0).sqrt();
    [half_tr - disc, half_tr + disc]
}

/// Unit eigenvector for the given eigenvalue of a symmetric 2x2 matrix.
pub(crate) fn sym2_eigenvector(m: [[f64; 2]; 2], eig: f64) -> [f64; 2] {
    // Pick the better-conditioned row of (m - eig I).
    let r0 = [m[0][0] - eig, m[0][1]];
    let r1 = [m[1][0], m[1][1] - eig];
    let n0 = r0[0] * r0[0] + r0[1] * r0[1];
    let n1 = r1[0] * r1[0] + r1[1] * r1[1];
    let r = if n0 >= n1 { r0 } else { r1 };
    let n = (r[0] * r[0] + r[1] * r[1]).sqrt();
    if n == 0.0 {
        // Matrix is a multiple of the identity; any direction works.
        return [1.0, 0.0];
    }
    [-r[1] / n, r[0] / n]
}

/// Eigenvalues of a symmetric 3x3 matrix by cyclic Jacobi rotations, ascending.
pub(crate) fn sym3_eigenvalues(m: &[[f64; 3]; 3]) -> [f64; 3] {
    let mut a = *m;
    for _ in 0..64 {
        let off = a[0][1] * a[0][1] + a[0][2] * a[0][2] + a[1][2] * a[1][2];
        let diag = a[0][0] * a[0][0] + a[1][1] * a[1][1] + a[2][2] * a[2][2];
        if off <= f64::EPSILON * f64::EPSILON * (diag + off) {
            break;
        }
        for (p, q) in [(0usize, 1usize), (0, 2), (1, 2)] {
            if a[p][q] == 0.0 {
                continue;
            }
            let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
            let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
            let c = 1.0 / (t * t + 1.0).sqrt();
            let s = t * c;
            let mut rot = [[0.0; 3]; 3];
            for i in 0..3 {
                rot[i][i] = 1.0;
            }
            rot[p][p] = c;
            rot[q][q] = c;
            rot[p][q] = s;
            rot[q][p] = -s;
            // a <- rot^T a rot
            let mut tmp = [[0.0; 3]; 3];
            for i in 0..3 {
                for j in 0..3 {
                    let mut acc = 0.0;
                    for k in 0..3 {
                        acc += a[i][k] * rot[k][j];
                    }
                    tmp[i][j] = acc;
                }
            }
            let mut next = [[0.0; 3]; 3];
            for i in 0..3 {
                for j in 0..3 {
                    let mut acc = 0.0;
                    for k in 0..3 {
                        acc += rot[k][i] * tmp[k][j];
                    }
                    next[i][j] = acc;
                }
            }
            // Re-symmetrize to keep roundoff from accumulating off-axis.
            for i in 0..3 {
                for j in (i + 1)..3 {
                    let v = 0.5 * (next[i][j] + next[j][i]);
                    next[i][j] = v;
                    next[j][i] = v;
                }
            }
            a = next;
        }
    }
    let mut w = [a[0][0], a[1][1], a[2][2]];
    w.sort_by(|x, y| x.partial_cmp(y).unwrap());
    w
}

/// Inverse of a 3x3 matrix via the adjugate; `None` when numerically singular.
pub(crate) fn inv3(m: &[[f64; 3]; 3]) -> Option<[[f64; 3]; 3]> {
    let c00 = m[1][1] * m[2][2] - m[1][2] * m[2][1];
    let c01 = m[1][2] * m[2][0] - m[1][0] * m[2][2];
    let c02 = m[1][0] * m[2][1] - m[1][1] * m[2][0];
    let det = m[0][0] * c00 + m[0][1] * c01 + m[0][2] * c02;
    let scale: f64 = m.iter().flatten().fold(0.0f64, |acc, v| acc.max(v.abs()));
    if det.abs() <= 1e-14 * scale * scale * scale {
        return None;
    }
    let c10 = m[0][2] * m[2][1] - m[0][1] * m[2][2];
    let c11 = m[0][0] * m[2][2] - m[0][2] * m[2][0];
    let c12 = m[0][1] * m[2][0] - m[0][0] * m[2][1];
    let c20 = m[0][1] * m[1][2] - m[0][2] * m[1][1];
    let c21 = m[0][2] * m[1][0] - m[0][0] * m[1][2];
    let c22 = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    Some([
        [c00 / det, c10 / det, c20 / det],
        [c01 / det, c11 / det, c21 / det],
        [c02 / det, c12 / det, c22 / det],
    ])
}

/// Solve a 2x2 linear system; `None` when numerically singular.
pub(crate) fn solve2(a: [[f64; 2]; 2], b: [f64; 2]) -> Option<[f64; 2]> {
    let det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
    let scale: f64 = a.iter().flatten().fold(0.0f64, |acc, v| acc.max(v.abs()));
    if det.abs() <= 1e-14 * scale * scale {
        return None;
    }
    Some([
        (b[0] * a[1][1] - b[1] * a[0][1]) / det,
        (b[1] * a[0][0] - b[0] * a[1][0]) / det,
    ])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sym3_diagonal() {
        let m = [[3.0, 0.0, 0.0], [0.0, -1.0, 0.0], [0.0, 0.0, 2.0]];
        let w = sym3_eigenvalues(&m);
        assert_eq!(w, [-1.0, 2.0, 3.0]);
    }

    #[test]
    fn sym3_known() {
        // Eigenvalues of [[2,1,0],[1,2,0],[0,0,5]] are 1, 3, 5.
        let m = [[2.0, 1.0, 0.0], [1.0, 2.0, 0.0], [0.0, 0.0, 5.0]];
        let w = sym3_eigenvalues(&m);
        assert!((w[0] - 1.0).abs() < 1e-13);
        assert!((w[1] - 3.0).abs() < 1e-13);
        assert!((w[2] - 5.0).abs() < 1e-13);
    }

    #[test]
    fn sym2_eigenpair() {
        let m = [[2.0, 1.0], [1.0, 2.0]];
        let w = sym2_eigenvalues(m);
        assert!((w[0] - 1.0).abs() < 1e-14 && (w[1] - 3.0).abs() < 1e-14);
        let v = sym2_eigenvector(m, w[0]);
        let mv = [
            m[0][0] * v[0] + m[0][1] * v[1],
            m[1][0] * v[0] + m[1][1] * v[1],
        ];
        assert!((mv[0] - w[0] * v[0]).abs() < 1e-13);
        assert!((mv[1] - w[0] * v[1]).abs() < 1e-13);
    }

    #[test]
    fn inv3_roundtrip() {
        let m = [[2.0, 1.0, 0.5], [1.0, 3.0, -1.0], [0.5, -1.0, 4.0]];
        let inv = inv3(&m).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let mut acc = 0.0;
                for k in 0..3 {
                    acc += m[i][k] * inv[k][j];
                }
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((acc - expect).abs() < 1e-13);
            }
        }
        assert!(inv3(&[[1.0, 2.0, 3.0], [2.0, 4.0, 6.0], [0.0, 0.0, 1.0]]).is_none());
    }

    #[test]
    fn solve2_known() {
        let x = solve2([[2.0, 0.0], [0.0, 4.0]], [2.0, 2.0]).unwrap();
        assert_eq!(x, [1.0, 0.5]);
        assert!(solve2([[1.0, 1.0], [1.0, 1.0]], [1.0, 0.0]).is_none());
    }
}
