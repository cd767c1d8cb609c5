//! Deterministic eigen-decomposition of symmetric 3x3 matrices by cyclic
//! Jacobi rotations.

use crate::geom::Mat3;

const MAX_SWEEPS: usize = 64;

/// Returns eigenvalues in descending order and the matching eigenvectors as
/// the columns of an orthonormal matrix. Input must be symmetric.
pub fn eigen_symmetric(matrix: &Mat3) -> ([f64; 3], Mat3) {
    let mut a = matrix.m;
    let mut v = Mat3::IDENTITY.m;

    let scale = a
        .iter()
        .flatten()
        .fold(0.0f64, |acc, x| acc.max(x.abs()))
        .max(f64::MIN_POSITIVE);

    for _ in 0..MAX_SWEEPS {
        let off = (a[0][1] * a[0][1] + a[0][2] * a[0][2] + a[1][2] * a[1][2]).sqrt();
        if off <= 1e-300 || off <= 1e-16 * scale {
            break;
        }
        for &(p, q) in &[(0usize, 1usize), (0, 2), (1, 2)] {
            let apq = a[p][q];
            if apq == 0.0 {
                continue;
            }
            // Classic Jacobi rotation choosing the smaller angle.
            let tau = (a[q][q] - a[p][p]) / (2.0 * apq);
            let t = if tau >= 0.0 {
                1.0 / (tau + (1.0 + tau * tau).sqrt())
            } else {
                -1.0 / (-tau + (1.0 + tau * tau).sqrt())
            };
            let c = 1.0 / (1.0 + t * t).sqrt();
            let s = t * c;

            let app = a[p][p];
            let aqq = a[q][q];
            a[p][p] = app - t * apq;
            a[q][q] = aqq + t * apq;
            a[p][q] = 0.0;
            a[q][p] = 0.0;
            let r = 3 - p - q; // remaining index
            let arp = a[r][p];
            let arq = a[r][q];
            a[r][p] = c * arp - s * arq;
            a[p][r] = a[r][p];
            a[r][q] = s * arp + c * arq;
            a[q][r] = a[r][q];

            for row in &mut v {
                let vp = row[p];
                let vq = row[q];
                row[p] = c * vp - s * vq;
                row[q] = s * vp + c * vq;
            }
        }
    }

    let mut pairs = [(a[0][0], 0usize), (a[1][1], 1usize), (a[2][2], 2usize)];
    // Descending by value; ties keep the lower original column first.
    pairs.sort_by(|x, y| y.0.total_cmp(&x.0).then(x.1.cmp(&y.1)));

    let vm = Mat3 { m: v };
    let values = [pairs[0].0, pairs[1].0, pairs[2].0];
    let vectors = Mat3::from_columns(
        vm.column(pairs[0].1),
        vm.column(pairs[1].1),
        vm.column(pairs[2].1),
    );
    (values, vectors)
}

/// Max over eigenpairs of ||A v - lambda v||, for residual testing.
pub fn eigen_residual(matrix: &Mat3, values: &[f64; 3], vectors: &Mat3) -> f64 {
    let mut worst: f64 = 0.0;
    for (k, value) in values.iter().enumerate() {
        let v = vectors.column(k);
        let av = matrix.apply(v);
        let r = av - v * *value;
        worst = worst.max(r.norm());
    }
    worst
}

/// Evaluates the characteristic polynomial det(A - lambda I).
pub fn characteristic_poly(matrix: &Mat3, lambda: f64) -> f64 {
    let mut shifted = *matrix;
    for i in 0..3 {
        shifted.m[i][i] -= lambda;
    }
    shifted.det()
}
