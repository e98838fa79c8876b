//! Fixed quadrature rules used on the data and verification side.
//!
//! Certified quantities (element matrices, flux norms, `C₁`, `κ_h`) use closed
//! forms and never go through these rules.

use crate::mesh::{Mesh, Point};
use crate::scalar::Scalar;

/// 5-point Gauss-Legendre rule on `[0, 1]`: `(node, weight)`, exact to degree 9.
pub fn gauss5<T: Scalar>() -> [(T, T); 5] {
    const X1: f64 = 0.538_469_310_105_683_1;
    const X2: f64 = 0.906_179_845_938_664;
    const W0: f64 = 0.568_888_888_888_888_9;
    const W1: f64 = 0.478_628_670_499_366_5;
    const W2: f64 = 0.236_926_885_056_189_1;
    [
        (0.5 * (1.0 - X2), 0.5 * W2),
        (0.5 * (1.0 - X1), 0.5 * W1),
        (0.5, 0.5 * W0),
        (0.5 * (1.0 + X1), 0.5 * W1),
        (0.5 * (1.0 + X2), 0.5 * W2),
    ]
    .map(|(x, w)| (T::lit(x), T::lit(w)))
}

/// 7-point degree-5 triangle rule: `(barycentric coordinates, weight)`, weights sum to 1.
pub fn triangle7<T: Scalar>() -> [([T; 3], T); 7] {
    let s15 = 15f64.sqrt();
    let a1 = (6.0 - s15) / 21.0;
    let a2 = (6.0 + s15) / 21.0;
    let w1 = (155.0 - s15) / 1200.0;
    let w2 = (155.0 + s15) / 1200.0;
    let b1 = 1.0 - 2.0 * a1;
    let b2 = 1.0 - 2.0 * a2;
    let third = 1.0 / 3.0;
    [
        ([third, third, third], 0.225),
        ([a1, a1, b1], w1),
        ([a1, b1, a1], w1),
        ([b1, a1, a1], w1),
        ([a2, a2, b2], w2),
        ([a2, b2, a2], w2),
        ([b2, a2, a2], w2),
    ]
    .map(|(l, w)| (l.map(T::lit), T::lit(w)))
}

/// Physical quadrature points and weights on edge `e` (weights sum to `|e|`).
pub fn edge_points<T: Scalar>(mesh: &Mesh<T>, e: usize) -> [(Point<T>, T); 5] {
    let [a, b] = mesh.edge_points(e);
    let len = mesh.edge_length(e);
    gauss5::<T>().map(|(s, w)| {
        (
            [a[0] + s * (b[0] - a[0]), a[1] + s * (b[1] - a[1])],
            w * len,
        )
    })
}

/// Physical points, barycentric coordinates and weights on triangle `t` (weights sum to `|K|`).
pub fn triangle_points<T: Scalar>(mesh: &Mesh<T>, t: usize) -> [(Point<T>, [T; 3], T); 7] {
    let [p0, p1, p2] = mesh.triangle_points(t);
    let area = mesh.area(t);
    triangle7::<T>().map(|(l, w)| {
        (
            [
                l[0] * p0[0] + l[1] * p1[0] + l[2] * p2[0],
                l[0] * p0[1] + l[1] * p1[1] + l[2] * p2[1],
            ],
            l,
            w * area,
        )
    })
}

/// `∫_Ω g dx` by the degree-5 rule.
pub fn integrate_domain<T: Scalar>(mesh: &Mesh<T>, g: impl Fn(Point<T>) -> T) -> T {
    let mut total = T::zero();
    for t in 0..mesh.num_triangles() {
        for (p, _, w) in triangle_points(mesh, t) {
            total += w * g(p);
        }
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::Mesh;
    use approx::assert_relative_eq;

    #[test]
    fn gauss5_integrates_degree_nine() {
        let q = gauss5::<f64>();
        for d in 0..=9 {
            let s: f64 = q.iter().map(|(x, w)| w * x.powi(d)).sum();
            assert_relative_eq!(s, 1.0 / (d as f64 + 1.0), epsilon = 1e-15);
        }
        let s: f64 = q.iter().map(|(x, w)| w * x.powi(10)).sum();
        assert!((s - 1.0 / 11.0).abs() > 1e-10);
    }

    #[test]
    fn triangle7_integrates_degree_five() {
        // reference triangle: ∫ x^a y^b = a! b! / (a+b+2)!
        let fact = |n: u32| (1..=n).map(f64::from).product::<f64>();
        let m: Mesh<f64> =
            Mesh::from_parts(vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]], vec![[0, 1, 2]]).unwrap();
        for a in 0..=5u32 {
            for b in 0..=(5 - a) {
                let exact = fact(a) * fact(b) / fact(a + b + 2);
                let q: f64 = triangle_points(&m, 0)
                    .iter()
                    .map(|(p, _, w)| w * p[0].powi(a as i32) * p[1].powi(b as i32))
                    .sum();
                assert_relative_eq!(q, exact, epsilon = 1e-15);
            }
        }
    }
}
