//! Matrix algebra: Pauli matrices, the Weyl-basis gamma matrices and the
//! isotopic-by-bispinor tensor product.
//!
//! Eight-component objects are ordered isotopic-major: index `4 * a + s` with
//! `a = 0` for `T_{+1/2}`, `a = 1` for `T_{-1/2}` and `s` the bispinor row.

use nalgebra::{Matrix2, Matrix4, SMatrix, SVector, Vector2, Vector4};
use num_complex::Complex64 as C64;

/// 2x2 complex matrix.
pub type Mat2 = Matrix2<C64>;
/// 4x4 complex matrix.
pub type Mat4 = Matrix4<C64>;
/// 8x8 complex matrix.
pub type Mat8 = SMatrix<C64, 8, 8>;
/// 2-component complex vector.
pub type Vec2 = Vector2<C64>;
/// 4-component complex vector.
pub type Vec4 = Vector4<C64>;
/// 8-component complex vector.
pub type Vec8 = SVector<C64, 8>;

/// Shorthand for a real complex number.
pub fn re(x: f64) -> C64 {
    C64::new(x, 0.0)
}

/// The imaginary unit.
pub const I: C64 = C64 { re: 0.0, im: 1.0 };

/// Complex zero.
pub const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

/// Complex one.
pub const ONE: C64 = C64 { re: 1.0, im: 0.0 };

/// Pauli matrix `sigma_k`, `k = 1, 2, 3`; `k = 0` gives the identity.
pub fn pauli(k: usize) -> Mat2 {
    match k {
        0 => Mat2::identity(),
        1 => Mat2::new(ZERO, ONE, ONE, ZERO),
        2 => Mat2::new(ZERO, -I, I, ZERO),
        3 => Mat2::new(ONE, ZERO, ZERO, -ONE),
        _ => panic!("Pauli index {k} out of range"),
    }
}

/// `sigma . n` for a real 3-vector.
pub fn sigma_dot(n: [f64; 3]) -> Mat2 {
    pauli(1) * re(n[0]) + pauli(2) * re(n[1]) + pauli(3) * re(n[2])
}

/// Isospin generator `t^k = sigma_k / 2`.
pub fn isospin(k: usize) -> Mat2 {
    pauli(k) * re(0.5)
}

fn block4(tl: Mat2, tr: Mat2, bl: Mat2, br: Mat2) -> Mat4 {
    let mut m = Mat4::zeros();
    for r in 0..2 {
        for c in 0..2 {
            m[(r, c)] = tl[(r, c)];
            m[(r, c + 2)] = tr[(r, c)];
            m[(r + 2, c)] = bl[(r, c)];
            m[(r + 2, c + 2)] = br[(r, c)];
        }
    }
    m
}

/// Weyl-basis gamma matrix: `gamma^0 = [[0, I], [I, 0]]`,
/// `gamma^k = [[0, -sigma_k], [sigma_k, 0]]`.
pub fn gamma(mu: usize) -> Mat4 {
    let z = Mat2::zeros();
    match mu {
        0 => block4(z, Mat2::identity(), Mat2::identity(), z),
        1..=3 => block4(z, -pauli(mu), pauli(mu), z),
        _ => panic!("gamma index {mu} out of range"),
    }
}

/// `gamma^5 = diag(-I, I) = -i gamma^0 gamma^1 gamma^2 gamma^3`.
pub fn gamma5() -> Mat4 {
    block4(-Mat2::identity(), Mat2::zeros(), Mat2::zeros(), Mat2::identity())
}

/// `i sigma^{12}` in the Weyl basis: `diag(1, -1, 1, -1) / 2`.
pub fn i_sigma12() -> Mat4 {
    Mat4::from_diagonal(&Vec4::new(re(0.5), re(-0.5), re(0.5), re(-0.5)))
}

/// Bispinor reflection factor in the spherical tetrad, `-gamma^5 gamma^1`.
pub fn parity_bispinor_spherical() -> Mat4 {
    -(gamma5() * gamma(1))
}

/// The bispinor reflection factor exactly as printed for the spherical tetrad:
/// the anti-diagonal matrix with entries `-1`.
pub fn printed_parity_bispinor() -> Mat4 {
    let mut m = Mat4::zeros();
    for r in 0..4 {
        m[(r, 3 - r)] = -ONE;
    }
    m
}

/// Bispinor reflection factor in the Cartesian tetrad, `i gamma^0`.
pub fn parity_bispinor_cartesian() -> Mat4 {
    gamma(0) * I
}

/// Tensor product `a (x) b` of an isotopic 2x2 and a bispinor 4x4 matrix.
pub fn kron(a: &Mat2, b: &Mat4) -> Mat8 {
    let mut m = Mat8::zeros();
    for ar in 0..2 {
        for ac in 0..2 {
            for br in 0..4 {
                for bc in 0..4 {
                    m[(4 * ar + br, 4 * ac + bc)] = a[(ar, ac)] * b[(br, bc)];
                }
            }
        }
    }
    m
}

/// Splits an 8-vector into its `T_{+1/2}` and `T_{-1/2}` bispinor blocks.
pub fn split(v: &Vec8) -> (Vec4, Vec4) {
    (
        Vec4::new(v[0], v[1], v[2], v[3]),
        Vec4::new(v[4], v[5], v[6], v[7]),
    )
}

/// Joins two bispinor blocks into an 8-vector.
pub fn join(top: &Vec4, bottom: &Vec4) -> Vec8 {
    Vec8::from_iterator(top.iter().chain(bottom.iter()).copied())
}

/// Maximum absolute entry of a matrix or vector difference.
pub fn max_abs<R: nalgebra::Dim, Cc: nalgebra::Dim, S: nalgebra::storage::Storage<C64, R, Cc>>(
    m: &nalgebra::Matrix<C64, R, Cc, S>,
) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Matrix exponential of `i * a * (sigma . n)` for a complex `a` and unit real `n`:
/// `cos(a) + i sin(a) sigma . n`.
pub fn exp_i_sigma(a: C64, n: [f64; 3]) -> Mat2 {
    Mat2::identity() * a.cos() + sigma_dot(n) * (I * a.sin())
}
