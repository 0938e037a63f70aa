//! Dense complex polynomials and a simultaneous-iteration root solver.
//!
//! Coefficients are stored in ascending order of degree. Exact trailing
//! zeros are trimmed on construction so that the last stored coefficient of
//! a nonzero polynomial is its leading coefficient; the zero polynomial has
//! no coefficients at all.

use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Default relative tolerance for merging roots into one cluster.
pub const DEFAULT_CLUSTER_TOL: f64 = 1e-7;

/// Relative threshold under which high-order coefficients count as zero.
pub const DEGREE_DROP_TOL: f64 = 1e-12;

const ABERTH_MAX_ITER: usize = 1000;
const MAX_BACKWARD_ERROR: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Default)]
pub struct CPoly {
    coeffs: Vec<Complex64>,
}

impl CPoly {
    pub fn new(mut coeffs: Vec<Complex64>) -> Self {
        while coeffs.last().is_some_and(|c| *c == Complex64::new(0.0, 0.0)) {
            coeffs.pop();
        }
        CPoly { coeffs }
    }

    pub fn from_real(coeffs: &[f64]) -> Self {
        Self::new(coeffs.iter().map(|&c| Complex64::new(c, 0.0)).collect())
    }

    pub fn zero() -> Self {
        CPoly { coeffs: Vec::new() }
    }

    pub fn constant(c: Complex64) -> Self {
        Self::new(vec![c])
    }

    /// The monic linear factor `z - root`.
    pub fn linear(root: Complex64) -> Self {
        Self::new(vec![-root, Complex64::new(1.0, 0.0)])
    }

    /// Monic polynomial with the given roots.
    pub fn from_roots(roots: &[Complex64]) -> Self {
        roots
            .iter()
            .fold(Self::constant(Complex64::new(1.0, 0.0)), |acc, &r| {
                &acc * &Self::linear(r)
            })
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// Coefficient of `z^i`, zero beyond the stored range.
    pub fn coeff(&self, i: usize) -> Complex64 {
        self.coeffs.get(i).copied().unwrap_or_default()
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn leading(&self) -> Complex64 {
        self.coeffs.last().copied().unwrap_or_default()
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        self.coeffs
            .iter()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c)
    }

    /// Value and first derivative by a doubled Horner sweep.
    pub fn eval_with_derivative(&self, z: Complex64) -> (Complex64, Complex64) {
        let mut p = Complex64::new(0.0, 0.0);
        let mut dp = Complex64::new(0.0, 0.0);
        for &c in self.coeffs.iter().rev() {
            dp = dp * z + p;
            p = p * z + c;
        }
        (p, dp)
    }

    /// `sum |a_k| r^k`, the scale against which evaluation error is measured.
    pub fn abs_eval(&self, r: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, c| acc * r + c.norm())
    }

    pub fn derivative(&self) -> CPoly {
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, &c)| c * k as f64)
                .collect(),
        )
    }

    pub fn nth_derivative(&self, n: usize) -> CPoly {
        (0..n).fold(self.clone(), |p, _| p.derivative())
    }

    pub fn scale(&self, s: Complex64) -> CPoly {
        Self::new(self.coeffs.iter().map(|&c| c * s).collect())
    }

    pub fn powi(&self, n: u32) -> CPoly {
        (0..n).fold(Self::constant(Complex64::new(1.0, 0.0)), |acc, _| {
            &acc * self
        })
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Drops every power above `max_degree`.
    pub fn truncated(&self, max_degree: usize) -> CPoly {
        Self::new(self.coeffs.iter().take(max_degree + 1).copied().collect())
    }

    /// Drops leading coefficients whose magnitude is below
    /// `rel_tol * max|coeff|`.
    pub fn trimmed(&self, rel_tol: f64) -> CPoly {
        let cut = rel_tol * self.max_abs_coeff();
        let mut coeffs = self.coeffs.clone();
        while coeffs.last().is_some_and(|c| c.norm() <= cut) {
            coeffs.pop();
        }
        Self::new(coeffs)
    }

    pub fn monic(&self) -> CPoly {
        if self.is_zero() {
            return self.clone();
        }
        self.scale(self.leading().inv())
    }

    /// Euclidean division, `self = q * divisor + r` with `deg r < deg divisor`.
    pub fn div_rem(&self, divisor: &CPoly) -> Result<(CPoly, CPoly)> {
        let dd = divisor
            .degree()
            .ok_or_else(|| Error::DegenerateInput("division by the zero polynomial".into()))?;
        let lead = divisor.leading();
        let mut rem = self.coeffs.clone();
        let Some(nd) = self.degree().filter(|&n| n >= dd) else {
            return Ok((CPoly::zero(), self.clone()));
        };
        let mut quot = vec![Complex64::new(0.0, 0.0); nd - dd + 1];
        for k in (0..=nd - dd).rev() {
            let q = rem[k + dd] / lead;
            quot[k] = q;
            for (j, &dc) in divisor.coeffs.iter().enumerate() {
                rem[k + j] -= q * dc;
            }
        }
        rem.truncate(dd);
        Ok((CPoly::new(quot), CPoly::new(rem)))
    }

    /// All roots, unclustered, by Aberth iteration.
    pub fn raw_roots(&self) -> Result<Vec<Complex64>> {
        self.raw_roots_from(None)
    }

    /// Like [`CPoly::raw_roots`] but warm-started from `guesses`, which must
    /// hold exactly `degree` values.
    pub fn raw_roots_from(&self, guesses: Option<&[Complex64]>) -> Result<Vec<Complex64>> {
        match self.degree() {
            None | Some(0) => Err(Error::DegenerateInput(
                "root finding needs degree >= 1".into(),
            )),
            Some(_) => aberth(self, guesses),
        }
    }

    /// All roots with multiplicities recovered by clustering: roots closer
    /// than `cluster_tol * (1 + |r|)` are merged.
    pub fn roots(&self, cluster_tol: f64) -> Result<RootSet> {
        if !(cluster_tol > 0.0) {
            return Err(Error::DegenerateInput("cluster_tol must be positive".into()));
        }
        let raw = self.raw_roots()?;
        let mut set = RootSet::from_raw(&raw, cluster_tol, |z| self.eval(z));
        for root in set.roots.iter_mut().filter(|r| r.multiplicity > 1) {
            root.value = self.polish_multiple(root.value, root.multiplicity, cluster_tol);
        }
        set.residual_bound = set
            .roots
            .iter()
            .map(|r| self.eval(r.value).norm())
            .fold(0.0, f64::max);
        Ok(set)
    }

    /// A root of multiplicity `m` is a simple root of the `(m-1)`-th
    /// derivative; Newton on that derivative recovers it to full precision
    /// from a cluster centroid that is only accurate to `eps^(1/m)`.
    fn polish_multiple(&self, start: Complex64, m: usize, cluster_tol: f64) -> Complex64 {
        let d = self.nth_derivative(m - 1);
        let mut z = start;
        for _ in 0..8 {
            let (f, df) = d.eval_with_derivative(z);
            if df.norm() == 0.0 {
                break;
            }
            let step = f / df;
            z -= step;
            if step.norm() <= 4.0 * f64::EPSILON * (1.0 + z.norm()) {
                break;
            }
        }
        let moved = (z - start).norm();
        if z.is_finite() && moved < cluster_tol * (1.0 + start.norm()) {
            z
        } else {
            start
        }
    }
}

impl Add for &CPoly {
    type Output = CPoly;
    fn add(self, rhs: &CPoly) -> CPoly {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        CPoly::new((0..n).map(|i| self.coeff(i) + rhs.coeff(i)).collect())
    }
}

impl Sub for &CPoly {
    type Output = CPoly;
    fn sub(self, rhs: &CPoly) -> CPoly {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        CPoly::new((0..n).map(|i| self.coeff(i) - rhs.coeff(i)).collect())
    }
}

impl Mul for &CPoly {
    type Output = CPoly;
    fn mul(self, rhs: &CPoly) -> CPoly {
        if self.is_zero() || rhs.is_zero() {
            return CPoly::zero();
        }
        let mut out = vec![Complex64::new(0.0, 0.0); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            for (j, &b) in rhs.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        CPoly::new(out)
    }
}

impl Neg for &CPoly {
    type Output = CPoly;
    fn neg(self) -> CPoly {
        CPoly::new(self.coeffs.iter().map(|c| -c).collect())
    }
}

macro_rules! forward_owned_binop {
    ($tr:ident, $m:ident) => {
        impl $tr for CPoly {
            type Output = CPoly;
            fn $m(self, rhs: CPoly) -> CPoly {
                (&self).$m(&rhs)
            }
        }
        impl $tr<&CPoly> for CPoly {
            type Output = CPoly;
            fn $m(self, rhs: &CPoly) -> CPoly {
                (&self).$m(rhs)
            }
        }
        impl $tr<CPoly> for &CPoly {
            type Output = CPoly;
            fn $m(self, rhs: CPoly) -> CPoly {
                self.$m(&rhs)
            }
        }
    };
}

forward_owned_binop!(Add, add);
forward_owned_binop!(Sub, sub);
forward_owned_binop!(Mul, mul);

impl Neg for CPoly {
    type Output = CPoly;
    fn neg(self) -> CPoly {
        -&self
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Root {
    pub value: Complex64,
    pub multiplicity: usize,
}

/// Roots with multiplicities and a bound on `|p(r)|` over the reported values.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RootSet {
    pub roots: Vec<Root>,
    pub residual_bound: f64,
}

impl RootSet {
    /// Single-linkage clustering of `raw` with relative tolerance `tol`.
    /// Each cluster is reported at its centroid; clusters are sorted by
    /// real then imaginary part.
    pub fn from_raw(raw: &[Complex64], tol: f64, eval: impl Fn(Complex64) -> Complex64) -> Self {
        let n = raw.len();
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(parent: &mut [usize], mut i: usize) -> usize {
            while parent[i] != i {
                parent[i] = parent[parent[i]];
                i = parent[i];
            }
            i
        }
        for i in 0..n {
            for j in i + 1..n {
                let scale = 1.0 + raw[i].norm().max(raw[j].norm());
                if (raw[i] - raw[j]).norm() < tol * scale {
                    let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                    if ri != rj {
                        parent[ri.max(rj)] = ri.min(rj);
                    }
                }
            }
        }
        let mut groups: Vec<(usize, Complex64, usize)> = Vec::new();
        for i in 0..n {
            let r = find(&mut parent, i);
            match groups.iter_mut().find(|g| g.0 == r) {
                Some(g) => {
                    g.1 += raw[i];
                    g.2 += 1;
                }
                None => groups.push((r, raw[i], 1)),
            }
        }
        let mut roots: Vec<Root> = groups
            .into_iter()
            .map(|(_, sum, m)| Root {
                value: sum / m as f64,
                multiplicity: m,
            })
            .collect();
        roots.sort_by(|a, b| {
            a.value
                .re
                .total_cmp(&b.value.re)
                .then(a.value.im.total_cmp(&b.value.im))
        });
        let residual_bound = roots.iter().map(|r| eval(r.value).norm()).fold(0.0, f64::max);
        RootSet {
            roots,
            residual_bound,
        }
    }

    pub fn values(&self) -> Vec<Complex64> {
        self.roots.iter().map(|r| r.value).collect()
    }

    pub fn total_multiplicity(&self) -> usize {
        self.roots.iter().map(|r| r.multiplicity).sum()
    }

    pub fn simple(&self) -> impl Iterator<Item = Complex64> + '_ {
        self.roots
            .iter()
            .filter(|r| r.multiplicity == 1)
            .map(|r| r.value)
    }

    pub fn multiple(&self) -> impl Iterator<Item = &Root> + '_ {
        self.roots.iter().filter(|r| r.multiplicity > 1)
    }

    pub fn len(&self) -> usize {
        self.roots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.roots.is_empty()
    }
}

/// Anything Aberth iteration can run on: the polynomial need not be stored
/// in the monomial basis.
pub trait PolyEval {
    fn degree(&self) -> usize;
    fn eval_with_derivative(&self, z: Complex64) -> (Complex64, Complex64);
    /// Rounding-error scale of an evaluation at `z`.
    fn magnitude(&self, z: Complex64) -> f64;
    fn initial_guesses(&self) -> Vec<Complex64>;
}

impl PolyEval for CPoly {
    fn degree(&self) -> usize {
        CPoly::degree(self).unwrap_or(0)
    }

    fn eval_with_derivative(&self, z: Complex64) -> (Complex64, Complex64) {
        CPoly::eval_with_derivative(self, z)
    }

    fn magnitude(&self, z: Complex64) -> f64 {
        self.abs_eval(z.norm())
    }

    fn initial_guesses(&self) -> Vec<Complex64> {
        let n = PolyEval::degree(self);
        let lead = self.leading().norm();
        // Fujiwara-type radius; every root lies within twice this value.
        let radius = (1..=n)
            .map(|k| (self.coeff(n - k).norm() / lead).powf(1.0 / k as f64))
            .fold(0.0, f64::max)
            .max(f64::MIN_POSITIVE.sqrt());
        circle_guesses(Complex64::new(0.0, 0.0), radius, n)
    }
}

pub(crate) fn circle_guesses(center: Complex64, radius: f64, n: usize) -> Vec<Complex64> {
    (0..n)
        .map(|k| {
            let theta = std::f64::consts::TAU * k as f64 / n as f64 + 0.7;
            center + Complex64::from_polar(radius, theta)
        })
        .collect()
}

/// Aberth–Ehrlich iteration with Gauss–Seidel updates.
///
/// A root is frozen once its correction is at the rounding level or its
/// backward error `|p(z)| / magnitude(z)` is below a few ulps.
pub fn aberth<P: PolyEval>(p: &P, guesses: Option<&[Complex64]>) -> Result<Vec<Complex64>> {
    let n = p.degree();
    if n == 0 {
        return Ok(Vec::new());
    }
    let mut z: Vec<Complex64> = match guesses {
        Some(g) if g.len() == n => g.to_vec(),
        _ => p.initial_guesses(),
    };
    let scale = z.iter().map(|v| v.norm()).fold(0.0, f64::max).max(1e-300);
    let eps = f64::EPSILON;
    let mut frozen = vec![false; n];

    for _ in 0..ABERTH_MAX_ITER {
        let mut moving = false;
        for i in 0..n {
            if frozen[i] {
                continue;
            }
            let (f, df) = p.eval_with_derivative(z[i]);
            if f.norm() <= 4.0 * eps * p.magnitude(z[i]) {
                frozen[i] = true;
                continue;
            }
            let mut repel = Complex64::new(0.0, 0.0);
            for j in 0..n {
                if j != i {
                    let diff = z[i] - z[j];
                    if diff.norm() > 0.0 {
                        repel += diff.inv();
                    }
                }
            }
            let ratio = if df.norm() > 0.0 {
                f / df
            } else {
                Complex64::new(scale * 1e-3, scale * 1e-3)
            };
            let denom = Complex64::new(1.0, 0.0) - ratio * repel;
            let step = if denom.norm() > 0.0 { ratio / denom } else { ratio };
            z[i] -= step;
            if step.norm() <= 4.0 * eps * z[i].norm() + 1e-20 * scale {
                frozen[i] = true;
            } else {
                moving = true;
            }
        }
        if !moving {
            break;
        }
    }

    // Normwise backward error: |p(z)| against the scale of p over the
    // disk of radius max(1, |z|).
    let worst = z
        .iter()
        .map(|&zi| {
            let (f, _) = p.eval_with_derivative(zi);
            let r = zi.norm().max(1.0);
            let mag = p.magnitude(Complex64::new(r, 0.0));
            if mag > 0.0 {
                f.norm() / mag
            } else {
                f.norm()
            }
        })
        .fold(0.0, f64::max);
    if !(worst <= MAX_BACKWARD_ERROR) {
        return Err(Error::NonConvergence {
            backward_error: worst,
        });
    }
    Ok(z)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn assert_poly_close(a: &CPoly, b: &CPoly, tol: f64) {
        let n = a.coeffs().len().max(b.coeffs().len());
        for i in 0..n {
            assert!(
                (a.coeff(i) - b.coeff(i)).norm() <= tol,
                "coefficient {i}: {} vs {}",
                a.coeff(i),
                b.coeff(i)
            );
        }
    }

    #[test]
    fn derivative_of_branch_point_quartic() {
        let p = CPoly::from_real(&[9.0 / 64.0, 0.0, -73.0 / 64.0, 0.0, 1.0]);
        let expected = CPoly::from_real(&[0.0, -73.0 / 32.0, 0.0, 4.0]);
        assert_eq!(p.derivative(), expected);
    }

    #[test]
    fn zero_polynomial_evaluates_to_zero() {
        let z = CPoly::zero();
        assert_eq!(z.eval(c(3.0, -2.0)), c(0.0, 0.0));
        assert_eq!(z.degree(), None);
        assert!(CPoly::new(vec![c(0.0, 0.0); 4]).is_zero());
    }

    #[test]
    fn difference_of_squares() {
        let p = &CPoly::from_real(&[-1.0, 1.0]) * &CPoly::from_real(&[1.0, 1.0]);
        assert_eq!(p, CPoly::from_real(&[-1.0, 0.0, 1.0]));
    }

    #[test]
    fn div_rem_reconstructs() {
        let a = CPoly::new(vec![c(1.0, 2.0), c(-3.0, 0.5), c(0.0, 1.0), c(2.0, 0.0)]);
        let b = CPoly::new(vec![c(0.5, 0.0), c(1.0, -1.0)]);
        let (q, r) = a.div_rem(&b).unwrap();
        assert!(r.degree().unwrap_or(0) < 1);
        assert_poly_close(&(&(&q * &b) + &r), &a, 1e-14);
    }

    #[test]
    fn roots_of_hyperelliptic_quartic() {
        let p = CPoly::from_real(&[3601.0 / 1024.0, 0.0, -73.0 / 16.0, 0.0, 4.0]);
        let rs = p.roots(DEFAULT_CLUSTER_TOL).unwrap();
        assert_eq!(rs.len(), 4);
        let s3 = 3f64.sqrt();
        let expected: Vec<Complex64> = [c(146.0, 110.0 * s3), c(146.0, -110.0 * s3)]
            .iter()
            .flat_map(|w| {
                let r = w.sqrt() / 16.0;
                [r, -r]
            })
            .collect();
        for e in expected {
            let hit = rs.roots.iter().find(|r| (r.value - e).norm() < 1e-13);
            assert_eq!(hit.map(|r| r.multiplicity), Some(1), "missing {e}");
        }
    }

    #[test]
    fn perfect_square_is_one_double_root() {
        let p = CPoly::from_real(&[4.0, -4.0, 1.0]);
        let rs = p.roots(DEFAULT_CLUSTER_TOL).unwrap();
        assert_eq!(rs.len(), 1);
        assert_eq!(rs.roots[0].multiplicity, 2);
        assert!((rs.roots[0].value - c(2.0, 0.0)).norm() < 1e-10);
    }

    #[test]
    fn cube_roots_of_unity() {
        let p = CPoly::from_real(&[-1.0, 0.0, 0.0, 1.0]);
        let rs = p.roots(DEFAULT_CLUSTER_TOL).unwrap();
        assert_eq!(rs.len(), 3);
        for k in 0..3 {
            let w = Complex64::from_polar(1.0, std::f64::consts::TAU * k as f64 / 3.0);
            assert!(rs.roots.iter().any(|r| (r.value - w).norm() < 1e-14));
        }
    }

    #[test]
    fn roots_reject_constants_and_bad_tolerance() {
        assert!(CPoly::from_real(&[2.0]).roots(1e-7).is_err());
        assert!(CPoly::from_real(&[1.0, 1.0]).roots(0.0).is_err());
    }

    #[test]
    fn zero_roots_are_found() {
        // z^2 (z - 1)
        let p = CPoly::from_real(&[0.0, 0.0, -1.0, 1.0]);
        let rs = p.roots(DEFAULT_CLUSTER_TOL).unwrap();
        assert_eq!(rs.total_multiplicity(), 3);
        assert!(rs
            .roots
            .iter()
            .any(|r| r.multiplicity == 2 && r.value.norm() < 1e-12));
    }

    #[test]
    fn trimmed_drops_tiny_leading_terms() {
        let p = CPoly::from_real(&[1.0, 2.0, 1e-15, 1e-17]);
        assert_eq!(p.trimmed(DEGREE_DROP_TOL).degree(), Some(1));
    }

    fn arb_poly(max_deg: usize) -> impl Strategy<Value = CPoly> {
        (1..=max_deg).prop_flat_map(|deg| {
            proptest::collection::vec((-2.0..2.0f64, -2.0..2.0f64), deg + 1).prop_map(move |v| {
                let mut coeffs: Vec<Complex64> = v.into_iter().map(|(a, b)| c(a, b)).collect();
                if coeffs[deg].norm() < 0.1 {
                    coeffs[deg] = c(1.0, 0.0);
                }
                CPoly::new(coeffs)
            })
        })
    }

    proptest! {
        #[test]
        fn multiplicities_sum_to_degree_with_small_residual(p in arb_poly(6)) {
            let rs = p.roots(DEFAULT_CLUSTER_TOL).unwrap();
            prop_assert_eq!(rs.total_multiplicity(), p.degree().unwrap());
            prop_assert!(rs.residual_bound < 1e-10 * (1.0 + p.max_abs_coeff()));
        }

        #[test]
        fn product_rule(p in arb_poly(5), q in arb_poly(5)) {
            let lhs = (&p * &q).derivative();
            let rhs = &(&p.derivative() * &q) + &(&p * &q.derivative());
            let scale = 1.0 + lhs.max_abs_coeff();
            for i in 0..lhs.coeffs().len().max(rhs.coeffs().len()) {
                prop_assert!((lhs.coeff(i) - rhs.coeff(i)).norm() <= 1e-12 * scale);
            }
        }
    }
}
