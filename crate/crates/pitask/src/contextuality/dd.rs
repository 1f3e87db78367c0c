//! Exact vertex enumeration for polytopes `{x >= 0, Ax = b}` by the double
//! description method over arbitrary-precision rationals.
//!
//! The polytope is homogenized to the cone `{(x, t) >= 0, Ax - bt = 0}`;
//! extreme rays with `t > 0` are the vertices. Hyperplanes are inserted one
//! at a time, combining adjacent positive/negative rays. Adjacency uses the
//! combinatorial zero-set test, valid because the cone stays pointed inside
//! the nonnegative orthant.

use std::collections::HashSet;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::{Error, Result};

type Ray = Vec<BigInt>;

/// Enumerates the vertices of `{x in R^dim : equalities, x >= 0}` exactly.
/// Equalities are `(coefficients, rhs)` pairs. Fails if the intermediate
/// ray count exceeds `max_rays` or the polytope is unbounded.
pub fn polytope_vertices(
    dim: usize,
    equalities: &[(Vec<BigRational>, BigRational)],
    max_rays: usize,
) -> Result<Vec<Vec<BigRational>>> {
    // homogenizing coordinate t sits at index `dim`
    let mut rays: Vec<Ray> = (0..=dim)
        .map(|i| {
            let mut r = vec![BigInt::zero(); dim + 1];
            r[i] = BigInt::one();
            r
        })
        .collect();

    for (coeffs, rhs) in equalities {
        if coeffs.len() != dim {
            return Err(Error::Constraint(format!(
                "equality has {} coefficients, expected {dim}",
                coeffs.len()
            )));
        }
        let hyperplane = integer_hyperplane(coeffs, rhs);
        rays = cut_with_hyperplane(rays, &hyperplane, max_rays)?;
        if rays.is_empty() {
            return Ok(Vec::new());
        }
    }

    let mut vertices = Vec::with_capacity(rays.len());
    for ray in rays {
        if ray[dim].is_zero() {
            return Err(Error::Constraint(
                "polytope is unbounded (recession ray found)".into(),
            ));
        }
        let t = BigRational::from(ray[dim].clone());
        let vertex: Vec<BigRational> = ray[..dim]
            .iter()
            .map(|c| BigRational::from(c.clone()) / t.clone())
            .collect();
        vertices.push(vertex);
    }
    vertices.sort();
    vertices.dedup();
    Ok(vertices)
}

/// Clears denominators of `sum_i c_i x_i - rhs * t = 0` to integers.
fn integer_hyperplane(coeffs: &[BigRational], rhs: &BigRational) -> Vec<BigInt> {
    let mut lcm = BigInt::one();
    for c in coeffs.iter().chain(std::iter::once(rhs)) {
        lcm = lcm.lcm(c.denom());
    }
    let mut h: Vec<BigInt> = coeffs
        .iter()
        .map(|c| c.numer() * (&lcm / c.denom()))
        .collect();
    h.push(-(rhs.numer() * (&lcm / rhs.denom())));
    h
}

fn dot(h: &[BigInt], r: &[BigInt]) -> BigInt {
    h.iter().zip(r).map(|(a, b)| a * b).sum()
}

/// Zero coordinates of a ray as a bitset over coordinate facets.
fn zero_set(r: &[BigInt]) -> u128 {
    assert!(r.len() <= 128, "coordinate count exceeds the zero-set bitset");
    let mut z = 0u128;
    for (i, v) in r.iter().enumerate() {
        if v.is_zero() {
            z |= 1 << i;
        }
    }
    z
}

/// Divides by the gcd so rays have a canonical integer representative.
fn canonicalize(mut r: Ray) -> Ray {
    let mut g = BigInt::zero();
    for v in &r {
        g = g.gcd(v);
    }
    if !g.is_zero() && !g.is_one() {
        for v in &mut r {
            *v /= &g;
        }
    }
    r
}

fn cut_with_hyperplane(rays: Vec<Ray>, h: &[BigInt], max_rays: usize) -> Result<Vec<Ray>> {
    let values: Vec<BigInt> = rays.iter().map(|r| dot(h, r)).collect();
    let zeros: Vec<u128> = rays.iter().map(|r| zero_set(r)).collect();

    let mut kept: Vec<Ray> = Vec::new();
    let mut seen: HashSet<Ray> = HashSet::new();
    let mut positive = Vec::new();
    let mut negative = Vec::new();
    for (i, v) in values.iter().enumerate() {
        match v.sign() {
            num_bigint::Sign::NoSign => {
                if seen.insert(rays[i].clone()) {
                    kept.push(rays[i].clone());
                }
            }
            num_bigint::Sign::Plus => positive.push(i),
            num_bigint::Sign::Minus => negative.push(i),
        }
    }

    for &p in &positive {
        for &m in &negative {
            if !adjacent(p, m, &zeros, rays.len()) {
                continue;
            }
            // (h.r_p) r_m - (h.r_m) r_p is a nonnegative combination lying
            // on the hyperplane
            let mut w: Ray = rays[p]
                .iter()
                .zip(&rays[m])
                .map(|(rp, rm)| &values[p] * rm - &values[m] * rp)
                .collect();
            w = canonicalize(w);
            debug_assert!(dot(h, &w).is_zero());
            if seen.insert(w.clone()) {
                kept.push(w);
            }
            if kept.len() > max_rays {
                return Err(Error::Budget(format!(
                    "double description exceeded {max_rays} rays"
                )));
            }
        }
    }
    Ok(kept)
}

/// Combinatorial adjacency: no third ray's zero set contains the common
/// zero set of the pair.
fn adjacent(p: usize, m: usize, zeros: &[u128], n: usize) -> bool {
    let common = zeros[p] & zeros[m];
    for r in 0..n {
        if r != p && r != m && (zeros[r] & common) == common {
            return false;
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    fn vertices_f64(vs: &[Vec<BigRational>]) -> Vec<Vec<f64>> {
        vs.iter()
            .map(|v| {
                v.iter()
                    .map(|r| {
                        let n: f64 = r.numer().to_string().parse().unwrap();
                        let d: f64 = r.denom().to_string().parse().unwrap();
                        n / d
                    })
                    .collect()
            })
            .collect()
    }

    #[test]
    fn unit_simplex() {
        // x + y + z = 1, x,y,z >= 0 -> three unit vertices
        let eqs = vec![(vec![rat(1, 1), rat(1, 1), rat(1, 1)], rat(1, 1))];
        let vs = polytope_vertices(3, &eqs, 1000).unwrap();
        assert_eq!(vs.len(), 3);
    }

    #[test]
    fn product_of_two_simplices() {
        // two independent normalizations -> 2 x 2 product vertices
        let eqs = vec![
            (vec![rat(1, 1), rat(1, 1), rat(0, 1), rat(0, 1)], rat(1, 1)),
            (vec![rat(0, 1), rat(0, 1), rat(1, 1), rat(1, 1)], rat(1, 1)),
        ];
        let vs = polytope_vertices(4, &eqs, 1000).unwrap();
        assert_eq!(vs.len(), 4);
    }

    #[test]
    fn coupled_simplices_with_fractional_vertex() {
        // xi1 + xi2 = 2 xi3 across three binary measurements
        // (x1,x3,x5 are the first outcomes): vertices at
        // (0,0,0), (1,0,1/2), (0,1,1/2), (1,1,1)
        let eqs = vec![
            (vec![rat(1, 1), rat(1, 1), rat(0, 1), rat(0, 1), rat(0, 1), rat(0, 1)], rat(1, 1)),
            (vec![rat(0, 1), rat(0, 1), rat(1, 1), rat(1, 1), rat(0, 1), rat(0, 1)], rat(1, 1)),
            (vec![rat(0, 1), rat(0, 1), rat(0, 1), rat(0, 1), rat(1, 1), rat(1, 1)], rat(1, 1)),
            (
                vec![rat(1, 1), rat(0, 1), rat(1, 1), rat(0, 1), rat(-2, 1), rat(0, 1)],
                rat(0, 1),
            ),
        ];
        let vs = polytope_vertices(6, &eqs, 1000).unwrap();
        assert_eq!(vs.len(), 4);
        let f = vertices_f64(&vs);
        assert!(f
            .iter()
            .any(|v| (v[0] - 1.0).abs() < 1e-12 && (v[2] - 0.0).abs() < 1e-12 && (v[4] - 0.5).abs() < 1e-12));
    }

    #[test]
    fn empty_polytope() {
        // x = 1 and x = 2 cannot both hold
        let eqs = vec![
            (vec![rat(1, 1)], rat(1, 1)),
            (vec![rat(1, 1)], rat(2, 1)),
        ];
        let vs = polytope_vertices(1, &eqs, 1000).unwrap();
        assert!(vs.is_empty());
    }

    #[test]
    fn budget_guard() {
        let eqs = vec![(vec![rat(1, 1); 12], rat(1, 1))];
        assert!(matches!(
            polytope_vertices(12, &eqs, 4),
            Err(Error::Budget(_))
        ));
    }
}
