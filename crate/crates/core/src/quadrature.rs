//! Quadrature rules on reference simplices, stored in barycentric form
//! with weights normalised to sum to one (multiply by the cell measure).

use crate::geometry::Vec2;
use crate::Real;

#[derive(Debug, Clone)]
pub struct QuadratureRule<T> {
    dim: usize,
    degree: usize,
    bary: Vec<[T; 3]>,
    weights: Vec<T>,
}

impl<T: Real> QuadratureRule<T> {
    /// Cheapest rule on a `dim`-simplex exact for polynomials of total
    /// degree `degree`. Supported: points (any degree), segments up to 7,
    /// triangles up to 5.
    pub fn new(dim: usize, degree: usize) -> Self {
        match dim {
            0 => Self {
                dim,
                degree: usize::MAX,
                bary: vec![[T::one(), T::zero(), T::zero()]],
                weights: vec![T::one()],
            },
            1 => Self::gauss_legendre(degree),
            2 => Self::triangle(degree),
            _ => panic!("no quadrature for simplices of dimension {dim}"),
        }
    }

    fn gauss_legendre(degree: usize) -> Self {
        let half = T::lit(0.5);
        // nodes on [-1, 1] and weights summing to 2
        let (nodes, weights): (Vec<T>, Vec<T>) = match degree {
            0 | 1 => (vec![T::zero()], vec![T::lit(2.0)]),
            2 | 3 => {
                let r = T::one() / T::lit(3.0).sqrt();
                (vec![-r, r], vec![T::one(), T::one()])
            }
            4 | 5 => {
                let r = T::lit(0.6).sqrt();
                (
                    vec![-r, T::zero(), r],
                    vec![T::lit(5.0 / 9.0), T::lit(8.0 / 9.0), T::lit(5.0 / 9.0)],
                )
            }
            6 | 7 => {
                let s = T::lit(6.0 / 5.0).sqrt() * T::lit(2.0 / 7.0);
                let a = (T::lit(3.0 / 7.0) - s).sqrt();
                let b = (T::lit(3.0 / 7.0) + s).sqrt();
                let w30 = T::lit(30.0).sqrt();
                let wa = (T::lit(18.0) + w30) / T::lit(36.0);
                let wb = (T::lit(18.0) - w30) / T::lit(36.0);
                (vec![-b, -a, a, b], vec![wb, wa, wa, wb])
            }
            _ => panic!("segment quadrature of degree {degree} not available"),
        };
        let bary = nodes
            .iter()
            .map(|&x| {
                let l1 = (x + T::one()) * half;
                [T::one() - l1, l1, T::zero()]
            })
            .collect();
        let weights = weights.into_iter().map(|w| w * half).collect();
        let exact = match degree {
            0 | 1 => 1,
            2 | 3 => 3,
            4 | 5 => 5,
            _ => 7,
        };
        Self {
            dim: 1,
            degree: exact,
            bary,
            weights,
        }
    }

    fn triangle(degree: usize) -> Self {
        let third = T::one() / T::lit(3.0);
        let mut bary = Vec::new();
        let mut weights = Vec::new();
        let orbit = |a: T, w: T, bary: &mut Vec<[T; 3]>, weights: &mut Vec<T>| {
            let b = T::one() - a - a;
            for p in [[a, a, b], [a, b, a], [b, a, a]] {
                bary.push(p);
                weights.push(w);
            }
        };
        let exact = match degree {
            0 | 1 => {
                bary.push([third, third, third]);
                weights.push(T::one());
                1
            }
            2 => {
                // edge midpoints
                let h = T::lit(0.5);
                for p in [[h, h, T::zero()], [T::zero(), h, h], [h, T::zero(), h]] {
                    bary.push(p);
                    weights.push(third);
                }
                2
            }
            3 | 4 => {
                orbit(
                    T::lit(0.445_948_490_915_964_886_32),
                    T::lit(0.223_381_589_678_011_465_70),
                    &mut bary,
                    &mut weights,
                );
                orbit(
                    T::lit(0.091_576_213_509_770_743_46),
                    T::lit(0.109_951_743_655_321_867_64),
                    &mut bary,
                    &mut weights,
                );
                4
            }
            5 => {
                let s15 = T::lit(15.0).sqrt();
                bary.push([third, third, third]);
                weights.push(T::lit(9.0 / 40.0));
                orbit(
                    (T::lit(6.0) - s15) / T::lit(21.0),
                    (T::lit(155.0) - s15) / T::lit(1200.0),
                    &mut bary,
                    &mut weights,
                );
                orbit(
                    (T::lit(6.0) + s15) / T::lit(21.0),
                    (T::lit(155.0) + s15) / T::lit(1200.0),
                    &mut bary,
                    &mut weights,
                );
                5
            }
            _ => panic!("triangle quadrature of degree {degree} not available"),
        };
        Self {
            dim: 2,
            degree: exact,
            bary,
            weights,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// Barycentric coordinates and normalised weights.
    pub fn iter(&self) -> impl Iterator<Item = (&[T; 3], T)> + '_ {
        self.bary.iter().zip(self.weights.iter().copied())
    }

    /// Physical points and measure-scaled weights on the simplex `verts`.
    pub fn mapped<'a>(
        &'a self,
        verts: &'a [Vec2<T>],
        measure: T,
    ) -> impl Iterator<Item = (Vec2<T>, T)> + 'a {
        self.iter().map(move |(b, w)| {
            let mut p = Vec2::zero();
            for (k, v) in verts.iter().enumerate() {
                p += *v * b[k];
            }
            (p, w * measure)
        })
    }
}
