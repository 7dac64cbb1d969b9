//! The simultaneous zero-diagonalization basis rule: given two traceless
//! Hermitian 2x2 matrices, find the qubit basis in which both have vanishing
//! diagonal, with the labeling fixed by the sign of `Im <e0| Mt |e0>`.

use ndarray::Array2;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

/// An orthonormal single-qubit measurement basis with a fixed phase
/// convention (first nonzero component of each ket is real nonnegative).
#[derive(Debug, Clone, PartialEq)]
pub struct QubitBasis {
    pub e0: [C64; 2],
    pub e1: [C64; 2],
}

impl QubitBasis {
    pub fn new(e0: [C64; 2], e1: [C64; 2]) -> Result<Self> {
        let b = Self { e0: canonical_phase(e0), e1: canonical_phase(e1) };
        let n0 = (b.e0[0].norm_sqr() + b.e0[1].norm_sqr()).sqrt();
        let n1 = (b.e1[0].norm_sqr() + b.e1[1].norm_sqr()).sqrt();
        let ip = b.e0[0].conj() * b.e1[0] + b.e0[1].conj() * b.e1[1];
        if (n0 - 1.0).abs() > 1e-10 || (n1 - 1.0).abs() > 1e-10 || ip.norm() > 1e-10 {
            return Err(Error::Structural("basis kets must be orthonormal".into()));
        }
        Ok(b)
    }

    pub fn x_basis() -> Self {
        let s = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        Self::new([s, s], [s, -s]).expect("x basis is orthonormal")
    }

    pub fn computational() -> Self {
        let (o, l) = (C64::new(0.0, 0.0), C64::new(1.0, 0.0));
        Self::new([l, o], [o, l]).expect("computational basis is orthonormal")
    }

    pub fn ket(&self, outcome: bool) -> &[C64; 2] {
        if outcome {
            &self.e1
        } else {
            &self.e0
        }
    }

    /// Bloch axis of `e0` : `n = <e0| sigma |e0>`, as `(theta, phi)`.
    pub fn bloch_angles(&self) -> (f64, f64) {
        let [a, b] = self.e0;
        let nx = 2.0 * (a.conj() * b).re;
        let ny = 2.0 * (a.conj() * b).im;
        let nz = a.norm_sqr() - b.norm_sqr();
        (nz.clamp(-1.0, 1.0).acos(), ny.atan2(nx))
    }

    /// Max deviation of the two kets from another basis, ignoring phases.
    pub fn angle_distance(&self, other: &Self) -> f64 {
        let ov0 = self.e0[0].conj() * other.e0[0] + self.e0[1].conj() * other.e0[1];
        let ov1 = self.e1[0].conj() * other.e1[0] + self.e1[1].conj() * other.e1[1];
        let d0 = (1.0 - ov0.norm().min(1.0).powi(2)).sqrt();
        let d1 = (1.0 - ov1.norm().min(1.0).powi(2)).sqrt();
        d0.max(d1)
    }
}

fn canonical_phase(mut e: [C64; 2]) -> [C64; 2] {
    let pivot = if e[0].norm() > 1e-12 { e[0] } else { e[1] };
    if pivot.norm() > 0.0 {
        let ph = pivot / pivot.norm();
        e[0] /= ph;
        e[1] /= ph;
    }
    e
}

/// The pair of 2x2 matrices driving the basis choice at one step:
/// `m = rho^0 - rho^1` (difference of normalized conditioned density
/// matrices) and the cross matrix `mt` reduced the same way, divided by the
/// branch weight so its elements stay order one.
#[derive(Debug, Clone)]
pub struct MatrixPair {
    pub m: Array2<C64>,
    pub mt: Array2<C64>,
    pub weight: f64,
}

impl MatrixPair {
    /// Zero-diagonalizes the pair; `sign_selector` is `(-1)^{prefix parity}`.
    /// Falls back to the x basis (logged) when both matrices vanish.
    pub fn basis(&self, sign_selector: i8) -> Result<QubitBasis> {
        let herm_defect = {
            let mh = self.m.t().mapv(|z| z.conj());
            crate::dense::fro_norm(&(&self.m - &mh))
        };
        if herm_defect > 1e-10 {
            return Err(Error::Structural(format!(
                "M must be Hermitian (defect {herm_defect:.2e})"
            )));
        }
        let a = traceless(&self.m);
        let bt = &self.mt + &self.mt.t().mapv(|z| z.conj());
        let b = traceless(&bt);
        match zero_diagonalize(&a, &b, sign_selector, &self.mt) {
            Ok(basis) => Ok(basis),
            Err(Error::Degenerate(msg)) => {
                log::warn!("basis underdetermined ({msg}); falling back to x basis");
                Ok(QubitBasis::x_basis())
            }
            Err(e) => Err(e),
        }
    }
}

fn traceless(m: &Array2<C64>) -> Array2<C64> {
    let tr = (m[(0, 0)] + m[(1, 1)]) / 2.0;
    let mut out = m.clone();
    out[(0, 0)] -= tr;
    out[(1, 1)] -= tr;
    out
}

fn bloch_vector(m: &Array2<C64>) -> [f64; 3] {
    [m[(1, 0)].re, m[(1, 0)].im, m[(0, 0)].re]
}

fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

fn norm3(v: [f64; 3]) -> f64 {
    (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()
}

/// Basis in which both traceless Hermitian matrices have zero diagonal.
///
/// The basis axis is `n = a x b / |a x b|` of the two Bloch vectors. When the
/// cross product degenerates, a canonical perpendicular (polar angle rotated
/// by pi/2 at fixed azimuth) of the dominant vector is used; when both
/// vectors vanish the basis is underdetermined and an error is returned.
/// Between the two labelings, the one with
/// `sign(Im <e0| mt_ref |e0>) = sign_selector` is chosen.
pub fn zero_diagonalize(
    a: &Array2<C64>,
    b: &Array2<C64>,
    sign_selector: i8,
    mt_ref: &Array2<C64>,
) -> Result<QubitBasis> {
    let av = bloch_vector(a);
    let bv = bloch_vector(b);
    let (na, nb) = (norm3(av), norm3(bv));
    if na < 1e-12 && nb < 1e-12 {
        return Err(Error::Degenerate("both Bloch vectors vanish".into()));
    }
    let mut axis = cross(av, bv);
    if norm3(axis) < 1e-12 * (na * nb).max(1e-24) || norm3(axis) < 1e-300 {
        // Degenerate direction: rotate the dominant vector's polar angle.
        let v = if na >= nb { av } else { bv };
        let r = norm3(v);
        let theta = (v[2] / r).clamp(-1.0, 1.0).acos();
        let phi = v[1].atan2(v[0]);
        let t2 = theta + std::f64::consts::FRAC_PI_2;
        axis = [t2.sin() * phi.cos(), t2.sin() * phi.sin(), t2.cos()];
    }
    let r = norm3(axis);
    let mut n = [axis[0] / r, axis[1] / r, axis[2] / r];
    // canonical orientation: first component of magnitude > 1e-12 positive
    for k in 0..3 {
        if n[k].abs() > 1e-12 {
            if n[k] < 0.0 {
                n = [-n[0], -n[1], -n[2]];
            }
            break;
        }
    }
    let theta = n[2].clamp(-1.0, 1.0).acos();
    let phi = n[1].atan2(n[0]);
    let eip = C64::new(phi.cos(), phi.sin());
    let plus = [C64::new((theta / 2.0).cos(), 0.0), eip * (theta / 2.0).sin()];
    let minus = [C64::new((theta / 2.0).sin(), 0.0), -eip * (theta / 2.0).cos()];

    let im_part = |e: &[C64; 2]| -> f64 {
        let me0 = [
            mt_ref[(0, 0)] * e[0] + mt_ref[(0, 1)] * e[1],
            mt_ref[(1, 0)] * e[0] + mt_ref[(1, 1)] * e[1],
        ];
        (e[0].conj() * me0[0] + e[1].conj() * me0[1]).im
    };
    let sel = sign_selector as f64;
    let (e0, e1) = if sel * im_part(&plus) >= sel * im_part(&minus) {
        (plus, minus)
    } else {
        (minus, plus)
    };
    QubitBasis::new(e0, e1)
}
