//! External force fields, quadratic-potential classical coefficients, and
//! barrier/constraint algebra.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::lattice::{Node, MAX_DIMS};

/// External boson momentum captured per iteration at a node.
#[derive(Debug, Clone, PartialEq, Default)]
pub enum ForceField {
    #[default]
    None,
    /// Uniform force `phi` along the first axis.
    Constant { phi: f64 },
    /// `f = -omega^2 x` in every dimension.
    Harmonic { omega: f64 },
    /// Delta surrogate at the origin: `+lambda/width` on `(-width, 0]`,
    /// `-lambda/width` on `(-2 width, -width]`.
    Rectangular { lambda: f64, width: i64 },
    /// Arbitrary per-node values along the first axis.
    Table { values: HashMap<(Node, u64), f64> },
}

impl ForceField {
    /// Force at node `x` and lifetime `t`.
    pub fn at(&self, x: &Node, t: u64, dims: usize) -> [f64; MAX_DIMS] {
        let mut f = [0.0; MAX_DIMS];
        match self {
            ForceField::None => {}
            ForceField::Constant { phi } => f[0] = *phi,
            ForceField::Harmonic { omega } => {
                for d in 0..dims {
                    f[d] = -omega * omega * x[d] as f64;
                }
            }
            ForceField::Rectangular { lambda, width } => {
                let w = *width;
                let p = x[0];
                if p > -w && p <= 0 {
                    f[0] = lambda / w as f64;
                } else if p > -2 * w && p <= -w {
                    f[0] = -lambda / w as f64;
                }
            }
            ForceField::Table { values } => {
                f[0] = values.get(&(*x, t)).copied().unwrap_or(0.0);
            }
        }
        f
    }

    /// Linear coefficient `alpha` and offset `beta` when `f = alpha x + beta`.
    pub fn quadratic_parts(&self) -> Option<(f64, f64)> {
        match self {
            ForceField::None => Some((0.0, 0.0)),
            ForceField::Constant { phi } => Some((0.0, *phi)),
            ForceField::Harmonic { omega } => Some((-omega * omega, 0.0)),
            _ => None,
        }
    }
}

/// Coefficients of the expected motion `x(t) = A x0 + B vQ + C` for a force
/// `f = alpha x + beta` with constant coefficients.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassicalCoefficients {
    pub alpha: f64,
    pub beta: f64,
}

/// Values of `A, B, C` and their time derivatives at one lifetime.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Abc {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub a_dot: f64,
    pub b_dot: f64,
    pub c_dot: f64,
}

impl Abc {
    pub fn wronskian(&self) -> f64 {
        self.a * self.b_dot - self.a_dot * self.b
    }
}

impl ClassicalCoefficients {
    pub fn eval(&self, t: f64) -> Abc {
        let (al, be) = (self.alpha, self.beta);
        if al == 0.0 {
            Abc {
                a: 1.0,
                b: t,
                c: be * t * t / 2.0,
                a_dot: 0.0,
                b_dot: 1.0,
                c_dot: be * t,
            }
        } else if al < 0.0 {
            let w = (-al).sqrt();
            let (s, c) = (w * t).sin_cos();
            Abc {
                a: c,
                b: s / w,
                c: be * (1.0 - c) / (w * w),
                a_dot: -w * s,
                b_dot: c,
                c_dot: be * s / w,
            }
        } else {
            let k = al.sqrt();
            let (s, c) = ((k * t).sinh(), (k * t).cosh());
            Abc {
                a: c,
                b: s / k,
                c: be * (c - 1.0) / (k * k),
                a_dot: k * s,
                b_dot: c,
                c_dot: be * s / k,
            }
        }
    }

    /// Tabulated values for `t = 0..=t_max`.
    pub fn table(&self, t_max: u64) -> Vec<Abc> {
        (0..=t_max).map(|t| self.eval(t as f64)).collect()
    }

    /// Expected position.
    pub fn position(&self, x0: f64, vq: f64, t: f64) -> f64 {
        let k = self.eval(t);
        k.a * x0 + k.b * vq + k.c
    }
}

/// Closed-form coefficients of a quadratic field.
pub fn quadratic_abc(field: &ForceField) -> Result<ClassicalCoefficients> {
    match field.quadratic_parts() {
        Some((alpha, beta)) => Ok(ClassicalCoefficients { alpha, beta }),
        None => Err(Error::Unsupported(format!(
            "field {field:?} is not of the form alpha x + beta"
        ))),
    }
}

/// Geometric constraint on the motion.
#[derive(Debug, Clone, PartialEq)]
pub enum Constraint {
    /// 1-d walls at `x = -a` and `x = a`.
    Box {
        a: i64,
    },
    /// 2-d wall `a1 x1 - a2 x2 + a0 = 0`; the side where the expression is
    /// positive is forbidden. The line direction is `(a2, a1)`.
    Line {
        a1: f64,
        a2: f64,
        a0: f64,
    },
    Ring {
        r: i64,
    },
    Sphere {
        r: i64,
    },
}

impl Constraint {
    /// Membership of a node in the constraint surface (ring, sphere) or in
    /// the allowed region (box, line).
    pub fn contains(&self, x: &Node) -> bool {
        match self {
            Constraint::Box { a } => x[0].abs() <= *a,
            Constraint::Line { a1, a2, a0 } => a1 * x[0] as f64 - a2 * x[1] as f64 + a0 <= 0.0,
            Constraint::Ring { r } => {
                let q = ((x[0] * x[0] + x[1] * x[1]) as f64).sqrt();
                q.round() as i64 == *r && x[2] == 0
            }
            Constraint::Sphere { r } => {
                let q = ((x[0] * x[0] + x[1] * x[1] + x[2] * x[2]) as f64).sqrt();
                q.round() as i64 == *r
            }
        }
    }
}

/// Wall reflection in 1-d: kick `-2 vQ`, span sign inverted.
pub fn barrier_kick_1d(vq: f64) -> (f64, i64) {
    (-2.0 * vq, -1)
}

/// Reflection matrix `[[-c, s], [s, c]]` with `c = (a1²-a2²)/N`,
/// `s = 2 a1 a2 / N`, `N = a1² + a2²`.
fn reflection(a1: f64, a2: f64) -> Result<(f64, f64)> {
    let n = a1 * a1 + a2 * a2;
    if n == 0.0 {
        return Err(Error::Domain("barrier coefficients (0, 0)".into()));
    }
    Ok(((a1 * a1 - a2 * a2) / n, 2.0 * a1 * a2 / n))
}

/// Result of a 2-d wall hit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Kick2d {
    pub f: [f64; 2],
    pub span: [i64; 2],
}

/// 2-d wall hit: momentum kick and reflected spans. Spans are rounded to the
/// nearest integer when the reflection is not a lattice symmetry.
pub fn barrier_kick_2d(vq: [f64; 2], span: [i64; 2], a1: f64, a2: f64) -> Result<Kick2d> {
    let (c, s) = reflection(a1, a2)?;
    let v1 = -c * vq[0] + s * vq[1];
    let v2 = s * vq[0] + c * vq[1];
    let l1 = -c * span[0] as f64 + s * span[1] as f64;
    let l2 = s * span[0] as f64 + c * span[1] as f64;
    Ok(Kick2d {
        f: [v1 - vq[0], v2 - vq[1]],
        span: [l1.round() as i64, l2.round() as i64],
    })
}

/// Reflected momentum pair (the kicked value `vq + f`).
pub fn reflect_2d(vq: [f64; 2], a1: f64, a2: f64) -> Result<[f64; 2]> {
    let (c, s) = reflection(a1, a2)?;
    Ok([-c * vq[0] + s * vq[1], s * vq[0] + c * vq[1]])
}

/// Decomposition of a constrained state into surface-parallel and normal
/// parts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Decomposition {
    pub v_parallel: f64,
    pub v_perp: f64,
    pub kappa: f64,
    /// Second tangential component (sphere azimuthal), zero otherwise.
    pub v_second: f64,
}

/// Tangential and normal momentum at a node of a line, ring or sphere.
pub fn constraint_decompose(x: &Node, vq: &[f64], constraint: &Constraint) -> Result<Decomposition> {
    match constraint {
        Constraint::Line { a1, a2, .. } => {
            let kappa = 1.0 / (a1 * a1 + a2 * a2).sqrt();
            Ok(Decomposition {
                v_parallel: kappa * (a2 * vq[0] + a1 * vq[1]),
                v_perp: kappa * (a1 * vq[0] - a2 * vq[1]),
                kappa,
                v_second: 0.0,
            })
        }
        Constraint::Ring { r } => {
            if !constraint.contains(x) {
                return Err(Error::Constraint(format!("node {x:?} is not on the ring r={r}")));
            }
            let r = *r as f64;
            let (x1, x2) = (x[0] as f64, x[1] as f64);
            Ok(Decomposition {
                v_parallel: (x2 * vq[0] - x1 * vq[1]) / r,
                v_perp: (x1 * vq[0] + x2 * vq[1]) / r,
                kappa: 1.0 / r,
                v_second: 0.0,
            })
        }
        Constraint::Sphere { r } => {
            if !constraint.contains(x) {
                return Err(Error::Constraint(format!("node {x:?} is not on the sphere r={r}")));
            }
            let r = *r as f64;
            let (x1, x2, x3) = (x[0] as f64, x[1] as f64, x[2] as f64);
            let rho = (x1 * x1 + x2 * x2).sqrt();
            if rho == 0.0 {
                return Err(Error::Constraint("polar node has no meridian direction".into()));
            }
            Ok(Decomposition {
                v_parallel: -r * vq[2] / rho,
                v_perp: (x1 * vq[0] + x2 * vq[1] + x3 * vq[2]) / r,
                kappa: 1.0 / r,
                v_second: (-x2 * vq[0] + x1 * vq[1]) * rho / (r * r),
            })
        }
        Constraint::Box { .. } => Err(Error::Unsupported("box walls have no tangential direction".into())),
    }
}

/// Ring nodes ordered clockwise from `(0, r)`.
pub fn ring_nodes(r: i64) -> Vec<Node> {
    let c = Constraint::Ring { r };
    let mut v: Vec<Node> = (-r - 1..=r + 1)
        .flat_map(|a| (-r - 1..=r + 1).map(move |b| [a, b, 0]))
        .filter(|n| c.contains(n))
        .collect();
    v.sort_by(|p, q| {
        clockwise_angle(p)
            .partial_cmp(&clockwise_angle(q))
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    v
}

/// Polar angle measured clockwise from `(0, r)`, in `[0, 2π)`.
pub fn clockwise_angle(x: &Node) -> f64 {
    let a = (x[0] as f64).atan2(x[1] as f64);
    a.rem_euclid(std::f64::consts::TAU)
}

/// Accumulated arc length `r (φ - φ0)` along a node path on a ring,
/// following the continuous clockwise angle.
pub fn ring_arc_span(path: &[Node], r: i64) -> f64 {
    let mut total = 0.0;
    for w in path.windows(2) {
        let mut d = clockwise_angle(&w[1]) - clockwise_angle(&w[0]);
        if d > std::f64::consts::PI {
            d -= std::f64::consts::TAU;
        } else if d < -std::f64::consts::PI {
            d += std::f64::consts::TAU;
        }
        total += d;
    }
    total * r as f64
}

/// Tangential span accumulated with the midpoint cross product.
pub fn ring_tangential_span(path: &[Node], r: i64) -> f64 {
    let r = r as f64;
    path.windows(2)
        .map(|w| {
            let m1 = (w[0][0] + w[1][0]) as f64 / 2.0;
            let m2 = (w[0][1] + w[1][1]) as f64 / 2.0;
            let v1 = (w[1][0] - w[0][0]) as f64;
            let v2 = (w[1][1] - w[0][1]) as f64;
            (m2 * v1 - m1 * v2) * r / (m1 * m1 + m2 * m2)
        })
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn free_faller_harmonic_coefficients() {
        let free = quadratic_abc(&ForceField::None).unwrap().eval(7.0);
        assert_eq!((free.a, free.b, free.c), (1.0, 7.0, 0.0));
        let faller = quadratic_abc(&ForceField::Constant { phi: 0.002 }).unwrap();
        assert!((faller.eval(200.0).c - 40.0).abs() < 1e-12);
        let ho = quadratic_abc(&ForceField::Harmonic { omega: 0.005 }).unwrap();
        let k = ho.eval(200.0);
        assert!((k.a - 1.0_f64.cos()).abs() < 1e-12);
        assert!((k.b - 1.0_f64.sin() / 0.005).abs() < 1e-9);
        assert!((ho.position(0.0, 1.0, 200.0) - 168.294).abs() < 1e-3);
    }

    #[test]
    fn wronskian_is_one() {
        let fields = [
            ForceField::None,
            ForceField::Constant { phi: 0.002 },
            ForceField::Harmonic { omega: 0.005 },
            ForceField::Harmonic { omega: 1e-4 },
        ];
        for f in &fields {
            let c = quadratic_abc(f).unwrap();
            for t in (0..=10_000).step_by(37) {
                assert!((c.eval(t as f64).wronskian() - 1.0).abs() < 1e-9);
            }
        }
        let inv = ClassicalCoefficients { alpha: 1e-6, beta: 0.0 };
        assert!((inv.eval(500.0).wronskian() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn non_quadratic_rejected() {
        let f = ForceField::Rectangular { lambda: 0.1, width: 15 };
        assert!(matches!(quadratic_abc(&f), Err(Error::Unsupported(_))));
    }

    #[test]
    fn rectangular_profile() {
        let f = ForceField::Rectangular { lambda: 0.3, width: 15 };
        assert_eq!(f.at(&[0, 0, 0], 1, 1)[0], 0.02);
        assert_eq!(f.at(&[-14, 0, 0], 1, 1)[0], 0.02);
        assert_eq!(f.at(&[-15, 0, 0], 1, 1)[0], -0.02);
        assert_eq!(f.at(&[-29, 0, 0], 1, 1)[0], -0.02);
        assert_eq!(f.at(&[-30, 0, 0], 1, 1)[0], 0.0);
        assert_eq!(f.at(&[1, 0, 0], 1, 1)[0], 0.0);
    }

    #[test]
    fn kick_1d() {
        assert_eq!(barrier_kick_1d(0.15), (-0.3, -1));
        assert_eq!(barrier_kick_1d(0.0).0, 0.0);
    }

    #[test]
    fn kick_2d_reduces_to_1d_and_mirrors() {
        let k = barrier_kick_2d([0.3, 0.2], [5, 7], 1.0, 0.0).unwrap();
        assert_eq!(k.f, [-0.6, 0.0]);
        assert_eq!(k.span, [-5, 7]);
        let m = barrier_kick_2d([0.3, 0.1], [4, 2], 1.0, 1.0).unwrap();
        assert!((m.f[0] + 0.3 - 0.1).abs() < 1e-15);
        assert!((m.f[1] + 0.1 - 0.3).abs() < 1e-15);
        assert_eq!(m.span, [2, 4]);
    }

    #[test]
    fn ring_node_set() {
        let nodes = ring_nodes(10);
        assert_eq!(nodes.len(), 56);
        assert_eq!(nodes[0], [0, 10, 0]);
        let d = constraint_decompose(&[0, 10, 0], &[0.4, 0.0], &Constraint::Ring { r: 10 }).unwrap();
        assert!((d.v_parallel - 0.4).abs() < 1e-15);
        assert!(constraint_decompose(&[0, 0, 0], &[0.1, 0.0], &Constraint::Ring { r: 10 }).is_err());
    }

    #[test]
    fn ring_tangential_span_tracks_arc() {
        use rand::{Rng, SeedableRng};
        let nodes = ring_nodes(10);
        let n = nodes.len();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let mut i = rng.gen_range(0..n);
            let mut path = vec![nodes[i]];
            for _ in 0..100 {
                i = (i + n + rng.gen_range(0..3) - 1) % n;
                path.push(nodes[i]);
            }
            let arc = ring_arc_span(&path, 10);
            let tan = ring_tangential_span(&path, 10);
            assert!((arc - tan).abs() < 0.05 * (1.0 + arc.abs()) + 1.0, "{arc} {tan}");
        }
    }

    proptest! {
        #[test]
        fn kick_2d_is_involution(v1 in -1.0f64..1.0, v2 in -1.0f64..1.0, a1 in -5.0f64..5.0, a2 in -5.0f64..5.0) {
            prop_assume!(a1.abs() + a2.abs() > 1e-3);
            let once = reflect_2d([v1, v2], a1, a2).unwrap();
            let twice = reflect_2d(once, a1, a2).unwrap();
            prop_assert!((twice[0] - v1).abs() < 1e-12 && (twice[1] - v2).abs() < 1e-12);
        }

        #[test]
        fn kick_2d_preserves_parallel(v1 in -1.0f64..1.0, v2 in -1.0f64..1.0, a1 in -5.0f64..5.0, a2 in -5.0f64..5.0) {
            prop_assume!(a1.abs() + a2.abs() > 1e-3);
            let line = Constraint::Line { a1, a2, a0: 0.0 };
            let before = constraint_decompose(&[0, 0, 0], &[v1, v2], &line).unwrap();
            let k = reflect_2d([v1, v2], a1, a2).unwrap();
            let after = constraint_decompose(&[0, 0, 0], &k, &line).unwrap();
            prop_assert!((before.v_parallel - after.v_parallel).abs() < 1e-12);
            prop_assert!((before.v_perp + after.v_perp).abs() < 1e-12);
        }
    }
}
