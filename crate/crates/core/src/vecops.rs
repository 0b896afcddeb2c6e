//! Small dense-vector helpers on `[f64]`.

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn add(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub fn scale(a: &[f64], s: f64) -> Vec<f64> {
    a.iter().map(|x| x * s).collect()
}

/// `a * x + b * y`
pub fn lincomb(a: f64, x: &[f64], b: f64, y: &[f64]) -> Vec<f64> {
    x.iter().zip(y).map(|(u, v)| a * u + b * v).collect()
}

/// Returns `None` for (near) zero vectors.
pub fn normalized(a: &[f64]) -> Option<Vec<f64>> {
    let n = norm(a);
    if n <= 1e-300 || !n.is_finite() {
        None
    } else {
        Some(scale(a, 1.0 / n))
    }
}

/// Removes from `v` its components along each of `basis`, which must be orthonormal.
pub fn reject(v: &[f64], basis: &[Vec<f64>]) -> Vec<f64> {
    let mut out = v.to_vec();
    for b in basis {
        let c = dot(&out, b);
        for (o, bi) in out.iter_mut().zip(b) {
            *o -= c * bi;
        }
    }
    out
}

/// Orthonormal basis of the complement of the span of `against` (assumed orthonormal),
/// built by Gram-Schmidt over the standard basis.
pub fn complement_basis(dim: usize, against: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let mut basis: Vec<Vec<f64>> = against.to_vec();
    let mut out = Vec::new();
    let target = dim - against.len();
    // Process standard basis vectors in order of how much survives the projection.
    let mut candidates: Vec<(usize, f64)> = (0..dim)
        .map(|i| {
            let mut e = vec![0.0; dim];
            e[i] = 1.0;
            (i, norm(&reject(&e, against)))
        })
        .collect();
    candidates.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    for (i, _) in candidates {
        if out.len() == target {
            break;
        }
        let mut e = vec![0.0; dim];
        e[i] = 1.0;
        // Two passes keep the result orthogonal to working precision.
        let r = reject(&reject(&e, &basis), &basis);
        if let Some(u) = normalized(&r) {
            if norm(&r) > 1e-8 {
                basis.push(u.clone());
                out.push(u);
            }
        }
    }
    out
}

/// Euclidean distance.
pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}
