//! Complex and quaternionic arithmetic on real coordinate blocks.
//!
//! A complex coordinate occupies two consecutive reals `(re, im)`; a quaternion
//! occupies four, `w + x i + y j + z k`. Multiplication is the Hamilton product.

use num_complex::Complex64;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quat(pub [f64; 4]);

impl Quat {
    pub const ONE: Quat = Quat([1.0, 0.0, 0.0, 0.0]);
    pub const I: Quat = Quat([0.0, 1.0, 0.0, 0.0]);
    pub const J: Quat = Quat([0.0, 0.0, 1.0, 0.0]);
    pub const K: Quat = Quat([0.0, 0.0, 0.0, 1.0]);

    pub fn from_slice(s: &[f64]) -> Self {
        Quat([s[0], s[1], s[2], s[3]])
    }

    pub fn mul(self, o: Quat) -> Quat {
        let [a1, b1, c1, d1] = self.0;
        let [a2, b2, c2, d2] = o.0;
        Quat([
            a1 * a2 - b1 * b2 - c1 * c2 - d1 * d2,
            a1 * b2 + b1 * a2 + c1 * d2 - d1 * c2,
            a1 * c2 - b1 * d2 + c1 * a2 + d1 * b2,
            a1 * d2 + b1 * c2 - c1 * b2 + d1 * a2,
        ])
    }

    pub fn conj(self) -> Quat {
        let [a, b, c, d] = self.0;
        Quat([a, -b, -c, -d])
    }

    pub fn add(self, o: Quat) -> Quat {
        Quat(std::array::from_fn(|i| self.0[i] + o.0[i]))
    }

    pub fn scale(self, s: f64) -> Quat {
        Quat(self.0.map(|v| v * s))
    }

    pub fn norm(self) -> f64 {
        self.0.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn normalized(self) -> Quat {
        self.scale(1.0 / self.norm())
    }
}

/// Reads complex coordinate `k` of a real vector.
pub fn complex_at(v: &[f64], k: usize) -> Complex64 {
    Complex64::new(v[2 * k], v[2 * k + 1])
}

/// Hermitian product `sum conj(x_k) y_k` over complex coordinates.
pub fn hermitian(x: &[f64], y: &[f64]) -> Complex64 {
    (0..x.len() / 2).map(|k| complex_at(x, k).conj() * complex_at(y, k)).sum()
}

/// Multiplies every complex coordinate by `c`.
pub fn complex_scale(v: &[f64], c: Complex64) -> Vec<f64> {
    let mut out = Vec::with_capacity(v.len());
    for k in 0..v.len() / 2 {
        let z = complex_at(v, k) * c;
        out.push(z.re);
        out.push(z.im);
    }
    out
}

/// Multiplication by `i` on every complex coordinate.
pub fn complex_i(v: &[f64]) -> Vec<f64> {
    complex_scale(v, Complex64::new(0.0, 1.0))
}

pub fn quat_at(v: &[f64], k: usize) -> Quat {
    Quat::from_slice(&v[4 * k..4 * k + 4])
}

/// Quaternionic product `sum conj(x_k) y_k`; invariant in modulus under right scalar
/// multiplication of either argument by a unit quaternion.
pub fn quat_hermitian(x: &[f64], y: &[f64]) -> Quat {
    (0..x.len() / 4).fold(Quat([0.0; 4]), |acc, k| acc.add(quat_at(x, k).conj().mul(quat_at(y, k))))
}

/// Right scalar multiplication `v * q` on every quaternionic coordinate.
pub fn quat_right_scale(v: &[f64], q: Quat) -> Vec<f64> {
    (0..v.len() / 4).flat_map(|k| quat_at(v, k).mul(q).0).collect()
}

/// Left multiplication `q * v` on every quaternionic coordinate.
pub fn quat_left_scale(v: &[f64], q: Quat) -> Vec<f64> {
    (0..v.len() / 4).flat_map(|k| q.mul(quat_at(v, k)).0).collect()
}
