//! Corotational 3D beam element. The element energy is written once,
//! generically over dual numbers, and differentiated automatically in a
//! local exponential chart around the current nodal rotations.

use nalgebra::{SMatrix, SVector};
use num_dual::{hessian, DualNum};

use crate::grid::{Element, Vec3};

pub type Quat = [f64; 4];
pub type Vec12 = SVector<f64, 12>;
pub type Mat12 = SMatrix<f64, 12, 12>;

/// Section stiffnesses and drive of one element at a given load state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ElementProps {
    pub l0: f64,
    /// N
    pub ea: f64,
    /// N·mm²
    pub gj: f64,
    /// Bending about the lateral axis (out of the layer plane), N·mm².
    pub ei2: f64,
    /// Bending about the stacking axis (in plane), N·mm².
    pub ei3: f64,
    /// Free axial strain, already scaled.
    pub eps: f64,
    /// Free curvature per reference length, already scaled, 1/mm.
    pub kappa: f64,
    pub frame: [Vec3; 3],
}

/// Saint-Venant torsion constant of a solid rectangle.
pub fn rect_torsion_constant(w: f64, t: f64) -> f64 {
    let a = 0.5 * w.max(t);
    let b = 0.5 * w.min(t);
    a * b.powi(3) * (16.0 / 3.0 - 3.36 * (b / a) * (1.0 - b.powi(4) / (12.0 * a.powi(4))))
}

impl ElementProps {
    pub fn new(e: &Element, eigen_scale: f64, regime_blend: f64) -> Self {
        let section = e.section(regime_blend);
        let r = crate::unit::section_response(&section);
        let mut gj = 0.0;
        for (l, sl) in e.layers.iter().zip(&section.layers) {
            let g = sl.modulus / (2.0 * (1.0 + l.poisson));
            gj += g * rect_torsion_constant(l.width, l.thickness);
        }
        let eps = eigen_scale * e.eigenstrain;
        Self {
            l0: e.length,
            ea: r.axial_stiffness,
            gj,
            ei2: r.bending_stiffness,
            ei3: section.lateral_bending_stiffness(),
            eps,
            kappa: eigen_scale * e.eigencurvature * (1.0 + eps),
            frame: e.frame,
        }
    }
}

/// Current kinematic state of the two end nodes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EndState {
    pub xa: Vec3,
    pub xb: Vec3,
    pub qa: Quat,
    pub qb: Quat,
}

type V3<D> = [D; 3];

fn add3<D: DualNum<Primitive = f64> + Copy>(a: V3<D>, b: V3<D>) -> V3<D> {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

fn sub3<D: DualNum<Primitive = f64> + Copy>(a: V3<D>, b: V3<D>) -> V3<D> {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn dot3<D: DualNum<Primitive = f64> + Copy>(a: V3<D>, b: V3<D>) -> D {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn cross3<D: DualNum<Primitive = f64> + Copy>(a: V3<D>, b: V3<D>) -> V3<D> {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

fn scale3<D: DualNum<Primitive = f64> + Copy>(a: V3<D>, s: D) -> V3<D> {
    [a[0] * s, a[1] * s, a[2] * s]
}

fn lift3<D: DualNum<Primitive = f64> + Copy>(a: Vec3) -> V3<D> {
    [D::from(a[0]), D::from(a[1]), D::from(a[2])]
}

fn qmul<D: DualNum<Primitive = f64> + Copy>(p: [D; 4], q: [D; 4]) -> [D; 4] {
    [
        p[0] * q[0] - p[1] * q[1] - p[2] * q[2] - p[3] * q[3],
        p[0] * q[1] + p[1] * q[0] + p[2] * q[3] - p[3] * q[2],
        p[0] * q[2] - p[1] * q[3] + p[2] * q[0] + p[3] * q[1],
        p[0] * q[3] + p[1] * q[2] - p[2] * q[1] + p[3] * q[0],
    ]
}

/// Rotate `v` by the unit quaternion `q`.
fn qrot<D: DualNum<Primitive = f64> + Copy>(q: [D; 4], v: V3<D>) -> V3<D> {
    let u = [q[1], q[2], q[3]];
    let t = scale3(cross3(u, v), D::from(2.0));
    add3(add3(v, scale3(t, q[0])), cross3(u, t))
}

/// Exponential map to second order; enough for exact first and second
/// derivatives at the origin.
fn qexp2<D: DualNum<Primitive = f64> + Copy>(d: V3<D>) -> [D; 4] {
    let half = D::from(0.5);
    [D::from(1.0) - dot3(d, d) * 0.125, d[0] * half, d[1] * half, d[2] * half]
}

/// Exact exponential map, used for finite updates.
pub fn quat_exp(d: Vec3) -> Quat {
    let a = (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt();
    if a < 1e-12 {
        return quat_normalize([1.0, 0.5 * d[0], 0.5 * d[1], 0.5 * d[2]]);
    }
    let s = (0.5 * a).sin() / a;
    [(0.5 * a).cos(), s * d[0], s * d[1], s * d[2]]
}

pub fn quat_mul(p: Quat, q: Quat) -> Quat {
    qmul(p, q)
}

pub fn quat_normalize(q: Quat) -> Quat {
    let n = (q[0] * q[0] + q[1] * q[1] + q[2] * q[2] + q[3] * q[3]).sqrt();
    [q[0] / n, q[1] / n, q[2] / n, q[3] / n]
}

pub fn quat_rotate(q: Quat, v: Vec3) -> Vec3 {
    qrot(q, v)
}

/// Local rotation vector of a matrix close to identity, given as rows of
/// `m[i][j] = r_i · t_j`.
fn log_rotation<D: DualNum<Primitive = f64> + Copy>(m: [[D; 3]; 3]) -> V3<D> {
    let half = D::from(0.5);
    let s = [
        (m[2][1] - m[1][2]) * half,
        (m[0][2] - m[2][0]) * half,
        (m[1][0] - m[0][1]) * half,
    ];
    let c = (m[0][0] + m[1][1] + m[2][2] - 1.0) * half;
    let y = dot3(s, s);
    let f = if y.re() < 1e-6 && c.re() > 0.0 {
        D::from(1.0) + y * (1.0 / 6.0) + y * y * (3.0 / 40.0) + y * y * y * (5.0 / 112.0)
    } else {
        let r = y.sqrt();
        r.atan2(c) / r
    };
    scale3(s, f)
}

/// Local deformation measures of the element.
pub struct LocalDeformation<D> {
    pub strain: D,
    pub theta_a: V3<D>,
    pub theta_b: V3<D>,
}

fn local_deformation<D: DualNum<Primitive = f64> + Copy>(p: &ElementProps, st: &EndState, d: &[D; 12]) -> LocalDeformation<D> {
    let xa = add3(lift3(st.xa), [d[0], d[1], d[2]]);
    let xb = add3(lift3(st.xb), [d[6], d[7], d[8]]);
    let lift4 = |q: Quat| [D::from(q[0]), D::from(q[1]), D::from(q[2]), D::from(q[3])];
    let qa = qmul(qexp2([d[3], d[4], d[5]]), lift4(st.qa));
    let qb0 = if st.qa.iter().zip(&st.qb).map(|(a, b)| a * b).sum::<f64>() < 0.0 {
        st.qb.map(|v| -v)
    } else {
        st.qb
    };
    let qb = qmul(qexp2([d[9], d[10], d[11]]), lift4(qb0));

    let mut qm = [qa[0] + qb[0], qa[1] + qb[1], qa[2] + qb[2], qa[3] + qb[3]];
    let n = (qm[0] * qm[0] + qm[1] * qm[1] + qm[2] * qm[2] + qm[3] * qm[3]).sqrt();
    for v in &mut qm {
        *v /= n;
    }

    let chord = sub3(xb, xa);
    let l = dot3(chord, chord).sqrt();
    let r1 = scale3(chord, l.recip());
    let up = qrot(qm, lift3(p.frame[2]));
    let r2u = cross3(up, r1);
    let r2 = scale3(r2u, dot3(r2u, r2u).sqrt().recip());
    let r3 = cross3(r1, r2);
    let rr = [r1, r2, r3];

    let local = |q: [D; 4]| {
        let t = [qrot(q, lift3(p.frame[0])), qrot(q, lift3(p.frame[1])), qrot(q, lift3(p.frame[2]))];
        let mut m = [[D::from(0.0); 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                m[i][j] = dot3(rr[i], t[j]);
            }
        }
        log_rotation(m)
    };
    LocalDeformation {
        strain: (l - p.l0) / p.l0,
        theta_a: local(qa),
        theta_b: local(qb),
    }
}

/// Strain energy of the element after perturbing its end state by `d`
/// (translations and left rotation increments of both nodes).
pub fn element_energy<D: DualNum<Primitive = f64> + Copy>(p: &ElementProps, st: &EndState, d: &[D; 12]) -> D {
    let ld = local_deformation(p, st, d);
    let (ta, tb) = (ld.theta_a, ld.theta_b);
    let de = ld.strain - p.eps;
    let u_ax = de * de * (0.5 * p.ea * p.l0);
    let dt = tb[0] - ta[0];
    let u_t = dt * dt * (0.5 * p.gj / p.l0);
    let quad = |a: D, b: D| a * a + a * b + b * b;
    let u_2 = quad(ta[1], tb[1]) * (2.0 * p.ei2 / p.l0) - (tb[1] - ta[1]) * (p.ei2 * p.kappa);
    let u_3 = quad(ta[2], tb[2]) * (2.0 * p.ei3 / p.l0);
    u_ax + u_t + u_2 + u_3
}

pub fn energy_at(p: &ElementProps, st: &EndState) -> f64 {
    element_energy::<f64>(p, st, &[0.0; 12])
}

fn skew(v: [f64; 3]) -> nalgebra::Matrix3<f64> {
    nalgebra::Matrix3::new(0.0, -v[2], v[1], v[2], 0.0, -v[0], -v[1], v[0], 0.0)
}

/// Energy, internal force vector and consistent tangent. The tangent is the
/// derivative of the force vector under left rotation updates, which adds
/// a non-symmetric moment term to the chart Hessian.
pub fn element_response(p: &ElementProps, st: &EndState) -> (f64, Vec12, Mat12) {
    let (u, g, mut h) = hessian(
        |v: SVector<num_dual::Dual2SVec64<12>, 12>| {
            let d: [num_dual::Dual2SVec64<12>; 12] = std::array::from_fn(|i| v[i]);
            element_energy(p, st, &d)
        },
        &Vec12::zeros(),
    );
    for base in [3usize, 9] {
        let m = [g[base], g[base + 1], g[base + 2]];
        let k = skew(m) * 0.5;
        for i in 0..3 {
            for j in 0..3 {
                h[(base + i, base + j)] -= k[(i, j)];
            }
        }
    }
    (u, g, h)
}

/// Axial force, torsion and end bending moments in the local frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SectionForces {
    pub axial: f64,
    pub torsion: f64,
    pub moment_a: [f64; 2],
    pub moment_b: [f64; 2],
}

pub fn section_forces(p: &ElementProps, st: &EndState) -> SectionForces {
    let ld = local_deformation::<f64>(p, st, &[0.0; 12]);
    let (ta, tb) = (ld.theta_a, ld.theta_b);
    let k2 = 2.0 * p.ei2 / p.l0;
    let k3 = 2.0 * p.ei3 / p.l0;
    SectionForces {
        axial: p.ea * (ld.strain - p.eps),
        torsion: p.gj / p.l0 * (tb[0] - ta[0]),
        moment_a: [k2 * (2.0 * ta[1] + tb[1]) + p.ei2 * p.kappa, k3 * (2.0 * ta[2] + tb[2])],
        moment_b: [k2 * (ta[1] + 2.0 * tb[1]) - p.ei2 * p.kappa, k3 * (ta[2] + 2.0 * tb[2])],
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn props() -> ElementProps {
        ElementProps {
            l0: 10.0,
            ea: 50.0,
            gj: 20.0,
            ei2: 70.0,
            ei3: 90.0,
            eps: -0.05,
            kappa: -0.02,
            frame: [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]],
        }
    }

    fn perturbed() -> EndState {
        EndState {
            xa: [0.1, -0.2, 0.05],
            xb: [9.7, 0.4, 0.9],
            qa: quat_exp([0.05, -0.1, 0.02]),
            qb: quat_exp([-0.03, 0.12, 0.2]),
        }
    }

    fn apply(st: &EndState, d: &[f64; 12]) -> EndState {
        EndState {
            xa: [st.xa[0] + d[0], st.xa[1] + d[1], st.xa[2] + d[2]],
            qa: quat_normalize(quat_mul(quat_exp([d[3], d[4], d[5]]), st.qa)),
            xb: [st.xb[0] + d[6], st.xb[1] + d[7], st.xb[2] + d[8]],
            qb: quat_normalize(quat_mul(quat_exp([d[9], d[10], d[11]]), st.qb)),
        }
    }

    #[test]
    fn undeformed_is_stress_free_without_drive() {
        let mut p = props();
        p.eps = 0.0;
        p.kappa = 0.0;
        let st = EndState {
            xa: [0.0; 3],
            xb: [10.0, 0.0, 0.0],
            qa: [1.0, 0.0, 0.0, 0.0],
            qb: [1.0, 0.0, 0.0, 0.0],
        };
        let (u, g, _) = element_response(&p, &st);
        assert!(u.abs() < 1e-20 && g.norm() < 1e-12);
    }

    #[test]
    fn tangent_matches_force_differences() {
        let p = props();
        let st = perturbed();
        let (_, _, k) = element_response(&p, &st);
        let h = 1e-6;
        for j in 0..12 {
            let mut d = [0.0; 12];
            d[j] = h;
            let fp = element_response(&p, &apply(&st, &d)).1;
            d[j] = -h;
            let fm = element_response(&p, &apply(&st, &d)).1;
            let col = (fp - fm) / (2.0 * h);
            let err = (col - k.column(j)).norm();
            assert!(err <= 1e-5 * k.norm(), "column {j}: {err}");
        }
    }

    #[test]
    fn rigid_motion_leaves_energy() {
        let p = props();
        let st = perturbed();
        let q = quat_exp([0.7, -1.2, 0.4]);
        let t = [3.0, -5.0, 2.0];
        let mv = |x: Vec3| {
            let r = quat_rotate(q, x);
            [r[0] + t[0], r[1] + t[1], r[2] + t[2]]
        };
        let moved = EndState {
            xa: mv(st.xa),
            xb: mv(st.xb),
            qa: quat_mul(q, st.qa),
            qb: quat_mul(q, st.qb),
        };
        let a = energy_at(&p, &st);
        let b = energy_at(&p, &moved);
        assert!((a - b).abs() < 1e-10 * a.abs().max(1.0), "{a} {b}");
    }

    #[test]
    fn free_arc_is_stress_free() {
        let p = props();
        // Arc of angle φ: chord l0(1+ε), end tangents at ∓φ/2 about the
        // lateral axis relative to the chord.
        let phi = p.kappa * p.l0;
        let st = EndState {
            xa: [0.0; 3],
            xb: [p.l0 * (1.0 + p.eps), 0.0, 0.0],
            qa: quat_exp([0.0, -0.5 * phi, 0.0]),
            qb: quat_exp([0.0, 0.5 * phi, 0.0]),
        };
        let (_, g, _) = element_response(&p, &st);
        assert!(g.norm() < 1e-9, "{g}");
        let f = section_forces(&p, &st);
        assert!(f.moment_a[0].abs() < 1e-9 && f.moment_b[0].abs() < 1e-9);
    }

    #[test]
    fn torsion_constant_square() {
        // Square: J ≈ 0.1406 a⁴ for side a.
        assert!((rect_torsion_constant(2.0, 2.0) / 16.0 - 0.1406).abs() < 1e-3);
    }
}
