//! Two-qubit local invariants.

use nalgebra::Matrix4;
use num_complex::Complex64;
use serde::Serialize;
use std::f64::consts::FRAC_1_SQRT_2;

pub type Gate = Matrix4<Complex64>;

fn cz(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Magic (Bell) basis in which local gates become real orthogonal.
pub fn magic_basis() -> Gate {
    let s = FRAC_1_SQRT_2;
    Gate::new(
        cz(s, 0.), cz(0., 0.), cz(0., 0.), cz(0., s),
        cz(0., 0.), cz(0., s), cz(s, 0.), cz(0., 0.),
        cz(0., 0.), cz(0., s), cz(-s, 0.), cz(0., 0.),
        cz(s, 0.), cz(0., 0.), cz(0., 0.), cz(0., -s),
    )
}

/// Makhlin invariants (G1, G2) of a two-qubit unitary. G1 is complex, G2
/// real for unitaries; both are returned as complex numbers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MakhlinInvariants {
    pub g1: Complex64,
    pub g2: Complex64,
}

impl MakhlinInvariants {
    pub fn distance(&self, other: &MakhlinInvariants) -> f64 {
        (self.g1 - other.g1).norm() + (self.g2 - other.g2).norm()
    }
}

pub fn makhlin(u: &Gate) -> MakhlinInvariants {
    let q = magic_basis();
    let ub = q.adjoint() * u * q;
    let m = ub.transpose() * ub;
    let det = u.determinant();
    let tr = m.trace();
    let tr2 = (m * m).trace();
    MakhlinInvariants {
        g1: tr * tr / (16.0 * det),
        g2: (tr * tr - tr2) / (4.0 * det),
    }
}

pub fn cz_gate() -> Gate {
    Gate::from_diagonal(&nalgebra::Vector4::new(cz(1., 0.), cz(1., 0.), cz(1., 0.), cz(-1., 0.)))
}

pub fn swap_gate() -> Gate {
    let (o, z) = (cz(1., 0.), cz(0., 0.));
    Gate::new(o, z, z, z, z, z, o, z, z, o, z, z, z, z, z, o)
}

pub fn sqrt_swap_gate() -> Gate {
    let (o, z) = (cz(1., 0.), cz(0., 0.));
    let (p, m) = (cz(0.5, 0.5), cz(0.5, -0.5));
    Gate::new(o, z, z, z, z, p, m, z, z, m, p, z, z, z, z, o)
}

pub fn iswap_gate() -> Gate {
    let (o, z, i) = (cz(1., 0.), cz(0., 0.), cz(0., 1.));
    Gate::new(o, z, z, z, z, z, i, z, z, i, z, z, z, z, z, o)
}

/// max |U†U - I|
pub fn unitarity_residual(u: &Gate) -> f64 {
    (u.adjoint() * u - Gate::identity())
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn local(a: &nalgebra::Matrix2<Complex64>, b: &nalgebra::Matrix2<Complex64>) -> Gate {
        let k = a.kronecker(b);
        Gate::from_fn(|i, j| k[(i, j)])
    }

    fn rot(theta: f64, phi: f64) -> nalgebra::Matrix2<Complex64> {
        let (c, s) = ((0.5 * theta).cos(), (0.5 * theta).sin());
        nalgebra::Matrix2::new(
            cz(c, 0.),
            -Complex64::from_polar(s, phi),
            Complex64::from_polar(s, -phi),
            cz(c, 0.),
        )
    }

    #[test]
    fn reference_invariants() {
        let id = makhlin(&Gate::identity());
        assert!((id.g1 - cz(1., 0.)).norm() < 1e-14 && (id.g2 - cz(3., 0.)).norm() < 1e-14);
        let c = makhlin(&cz_gate());
        assert!(c.g1.norm() < 1e-14 && (c.g2 - cz(1., 0.)).norm() < 1e-14);
        let s = makhlin(&swap_gate());
        assert!((s.g1 + cz(1., 0.)).norm() < 1e-14 && (s.g2 + cz(3., 0.)).norm() < 1e-14);
        let i = makhlin(&iswap_gate());
        assert!(i.g1.norm() < 1e-14 && (i.g2 + cz(1., 0.)).norm() < 1e-14);
    }

    #[test]
    fn sqrt_swap_squares_to_swap() {
        let r = sqrt_swap_gate() * sqrt_swap_gate();
        assert!((r - swap_gate()).iter().all(|z| z.norm() < 1e-15));
        assert!(unitarity_residual(&sqrt_swap_gate()) < 1e-15);
    }

    #[test]
    fn invariants_ignore_local_gates() {
        let u = sqrt_swap_gate();
        let l1 = local(&rot(0.3, 1.1), &rot(2.0, -0.4));
        let l2 = local(&rot(-1.7, 0.2), &rot(0.9, 2.5));
        let dressed = l1 * u * l2;
        assert!(makhlin(&u).distance(&makhlin(&dressed)) < 1e-12);
    }
}
