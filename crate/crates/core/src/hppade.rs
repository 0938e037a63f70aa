//! Type II Hermite–Padé denominators for the pair
//! `f_j(z) = log((z - a_j)/(z - b_j))`, used to corroborate the traced set
//! of equal potentials.
//!
//! The order conditions at infinity are equivalent to the multiple
//! orthogonality `∫_{a_j}^{b_j} P(x) x^i dx = 0`, `i < n_j`, along the
//! segments. The solver imposes them against Legendre polynomials of each
//! segment with `P` expanded in Chebyshev polynomials of an affine
//! variable, which keeps the system well conditioned; the literal moment
//! system is kept for small indices and for the defect check.

use std::num::NonZeroUsize;

use gauss_quad::GaussLegendre;
use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::curve::BranchConfig;
use crate::error::{Error, Result};
use crate::poly::{aberth, circle_guesses, CPoly, PolyEval, RootSet};

/// Singular values below this fraction of the largest count towards the
/// null space.
pub const RANK_TOL: f64 = 1e-11;
/// Largest supported `n1 + n2`.
pub const MAX_TOTAL_INDEX: usize = 40;

#[derive(Debug, Clone, PartialEq)]
pub struct HPSystem {
    pub n: (usize, usize),
    /// `moments[j][k] = f_{j,k}` for `k = 0..=n1+n2+n_j`.
    pub moments: [Vec<Complex64>; 2],
    /// Monic when the solution has full degree.
    pub denominator: CPoly,
    pub zeros: RootSet,
    /// Dimension of the numerical null space minus one; nonzero means the
    /// index is not normal.
    pub rank_deficiency: usize,
}

impl HPSystem {
    pub fn is_normal(&self) -> bool {
        self.rank_deficiency == 0
    }
}

/// `f_{j,k} = (b^k - a^k)/k` for `k >= 1`, `f_{j,0} = 0`.
pub fn log_moments(a: Complex64, b: Complex64, count: usize) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); count];
    let (mut ak, mut bk) = (Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0));
    for (k, m) in out.iter_mut().enumerate().skip(1) {
        ak *= a;
        bk *= b;
        *m = (bk - ak) / k as f64;
    }
    out
}

/// Rows `i = 1..=n_j` of the literal homogeneous system: the coefficient of
/// `z^-i` in `f_j P` is `sum_m p_m f_{j, m+i}`.
pub fn moment_rows(moments: &[Vec<Complex64>; 2], n: (usize, usize)) -> Vec<Vec<Complex64>> {
    let total = n.0 + n.1;
    let mut rows = Vec::with_capacity(total);
    for (j, &nj) in [n.0, n.1].iter().enumerate() {
        for i in 1..=nj {
            rows.push((0..=total).map(|m| moments[j][m + i]).collect());
        }
    }
    rows
}

/// Affine map `w = alpha z + beta` taking the four points into `[-1, 1]`
/// along their principal direction.
fn frame(points: &[Complex64; 4]) -> (Complex64, Complex64) {
    let center = points.iter().sum::<Complex64>() / 4.0;
    let spread: Complex64 = points.iter().map(|p| (p - center) * (p - center)).sum();
    let rot = if spread.norm() > 0.0 {
        Complex64::from_polar(1.0, -0.5 * spread.arg())
    } else {
        Complex64::new(1.0, 0.0)
    };
    let proj: Vec<f64> = points.iter().map(|p| ((p - center) * rot).re).collect();
    let lo = proj.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = proj.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let half = (0.5 * (hi - lo)).max(1e-300);
    let mid = 0.5 * (hi + lo);
    // w = ((z - center) rot - mid) / half
    let alpha = rot / half;
    let beta = -(center * rot + mid) / half;
    (alpha, beta)
}

/// `T_0 .. T_{deg}` at `w`.
fn chebyshev_values(w: Complex64, deg: usize) -> Vec<Complex64> {
    let mut t = Vec::with_capacity(deg + 1);
    t.push(Complex64::new(1.0, 0.0));
    if deg >= 1 {
        t.push(w);
    }
    for m in 2..=deg {
        let next = w * t[m - 1] * 2.0 - t[m - 2];
        t.push(next);
    }
    t
}

/// Legendre polynomials `P_0 .. P_{deg}` at real `t`.
fn legendre_values(t: f64, deg: usize) -> Vec<f64> {
    let mut p = Vec::with_capacity(deg + 1);
    p.push(1.0);
    if deg >= 1 {
        p.push(t);
    }
    for m in 2..=deg {
        let m_f = m as f64;
        let next = ((2.0 * m_f - 1.0) * t * p[m - 1] - (m_f - 1.0) * p[m - 2]) / m_f;
        p.push(next);
    }
    p
}

/// A polynomial in Chebyshev form in the variable `w`.
struct ChebSeries {
    coeffs: Vec<Complex64>,
    deriv: Vec<Complex64>,
}

impl ChebSeries {
    fn new(coeffs: Vec<Complex64>) -> Self {
        let n = coeffs.len();
        let mut deriv = vec![Complex64::new(0.0, 0.0); n.max(1)];
        if n >= 2 {
            // d_{m-1} = d_{m+1} + 2 m c_m, with d_0 halved.
            let mut d = vec![Complex64::new(0.0, 0.0); n + 1];
            for m in (1..n).rev() {
                d[m - 1] = d[m + 1] + coeffs[m] * (2.0 * m as f64);
            }
            d[0] *= 0.5;
            deriv = d[..n - 1].to_vec();
        }
        ChebSeries { coeffs, deriv }
    }

    fn clenshaw(c: &[Complex64], w: Complex64) -> Complex64 {
        let mut b1 = Complex64::new(0.0, 0.0);
        let mut b2 = Complex64::new(0.0, 0.0);
        for ck in c.iter().skip(1).rev() {
            let b0 = ck + w * b1 * 2.0 - b2;
            b2 = b1;
            b1 = b0;
        }
        match c.first() {
            Some(c0) => c0 + w * b1 - b2,
            None => Complex64::new(0.0, 0.0),
        }
    }
}

impl PolyEval for ChebSeries {
    fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    fn eval_with_derivative(&self, w: Complex64) -> (Complex64, Complex64) {
        (Self::clenshaw(&self.coeffs, w), Self::clenshaw(&self.deriv, w))
    }

    fn magnitude(&self, w: Complex64) -> f64 {
        let growth = w.norm() + (w.norm_sqr() + 1.0).sqrt();
        let mut g = 1.0;
        let mut total = 0.0;
        for c in &self.coeffs {
            total += c.norm() * g;
            g *= growth;
        }
        total
    }

    fn initial_guesses(&self) -> Vec<Complex64> {
        circle_guesses(Complex64::new(0.0, 0.0), 1.1, self.degree())
    }
}

/// `sum_m c_m T_m(alpha z + beta)` as a monomial polynomial in `z`.
fn chebyshev_to_monomial(c: &[Complex64], alpha: Complex64, beta: Complex64) -> CPoly {
    let w = CPoly::new(vec![beta, alpha]);
    let mut t_prev = CPoly::constant(Complex64::new(1.0, 0.0));
    let mut t_cur = w.clone();
    let mut out = t_prev.scale(c[0]);
    if c.len() > 1 {
        out = &out + &t_cur.scale(c[1]);
    }
    for ck in c.iter().skip(2) {
        let next = &(&w * &t_cur).scale(Complex64::new(2.0, 0.0)) - &t_prev;
        out = &out + &next.scale(*ck);
        t_prev = t_cur;
        t_cur = next;
    }
    out
}

/// Solves for the denominator of index `n` and its zeros.
pub fn solve_hp(
    a1: Complex64,
    b1: Complex64,
    a2: Complex64,
    b2: Complex64,
    n: (usize, usize),
) -> Result<HPSystem> {
    let config = BranchConfig::new(a1, b1, a2, b2)?;
    let total = n.0 + n.1;
    if total > MAX_TOTAL_INDEX {
        return Err(Error::DegenerateInput(format!(
            "n1 + n2 = {total} exceeds {MAX_TOTAL_INDEX}"
        )));
    }
    let moments = [
        log_moments(a1, b1, total + n.0 + 1),
        log_moments(a2, b2, total + n.1 + 1),
    ];
    let one = Complex64::new(1.0, 0.0);
    if total == 0 {
        return Ok(HPSystem {
            n,
            moments,
            denominator: CPoly::constant(one),
            zeros: RootSet::from_raw(&[], 0.0, |_| one),
            rank_deficiency: 0,
        });
    }
    let (alpha, beta) = frame(&config.points());

    // Row (j, i): ∫_{a_j}^{b_j} T_m(w(x)) L_i(t) dx over the segment.
    let nodes = GaussLegendre::new(NonZeroUsize::new(total + 8).unwrap_or(NonZeroUsize::MIN));
    let mut m = DMatrix::<Complex64>::zeros(total.max(total + 1), total + 1);
    let mut row = 0;
    for (&(a, b), &nj) in [(a1, b1), (a2, b2)].iter().zip([n.0, n.1].iter()) {
        let half = (b - a) * 0.5;
        for &(t, wgt) in nodes.iter() {
            let x = a + half * (t + 1.0);
            let tm = chebyshev_values(alpha * x + beta, total);
            let li = legendre_values(t, nj.saturating_sub(1));
            for i in 0..nj {
                let f = half * (wgt * li[i]);
                for (col, tv) in tm.iter().enumerate() {
                    m[(row + i, col)] += f * tv;
                }
            }
        }
        row += nj;
    }
    // Square up with a zero row so the SVD exposes the whole null space.
    for i in 0..total {
        let norm = (0..=total).map(|c| m[(i, c)].norm_sqr()).sum::<f64>().sqrt();
        if norm > 0.0 {
            for c in 0..=total {
                m[(i, c)] /= norm;
            }
        }
    }
    let svd = m.svd(false, true);
    let v_t = svd
        .v_t
        .ok_or(Error::NonConvergence { backward_error: f64::NAN })?;
    let sigma = &svd.singular_values;
    let smax = sigma.iter().copied().fold(0.0f64, f64::max);
    let mut order: Vec<usize> = (0..sigma.len()).collect();
    order.sort_by(|&i, &j| sigma[i].total_cmp(&sigma[j]));
    let nullity = sigma.iter().filter(|&&s| s <= RANK_TOL * smax).count().max(1);
    let null_row = order[0];
    let mut cheb: Vec<Complex64> = (0..=total).map(|c| v_t[(null_row, c)].conj()).collect();

    let cmax = cheb.iter().map(|c| c.norm()).fold(0.0f64, f64::max);
    while cheb.len() > 1 && cheb[cheb.len() - 1].norm() <= 1e-12 * cmax {
        cheb.pop();
    }
    let full_degree = cheb.len() == total + 1;
    let series = ChebSeries::new(cheb.clone());
    let w_roots = aberth(&series, None)?;
    let raw: Vec<Complex64> = w_roots.iter().map(|w| (w - beta) / alpha).collect();
    let mut denominator = chebyshev_to_monomial(&cheb, alpha, beta);
    if full_degree {
        denominator = denominator.monic();
    }
    let zeros = RootSet::from_raw(&raw, crate::poly::DEFAULT_CLUSTER_TOL, |z| {
        ChebSeries::clenshaw(&cheb, alpha * z + beta)
    });
    Ok(HPSystem {
        n,
        moments,
        denominator,
        zeros,
        rank_deficiency: nullity - 1,
    })
}

/// `solve_hp` on a configuration.
pub fn solve_hp_config(config: &BranchConfig, n: (usize, usize)) -> Result<HPSystem> {
    solve_hp(config.a1, config.b1, config.a2, config.b2, n)
}

/// Largest coefficient of `z^-1 .. z^-n_j` in `f_j P - Q_j` over both
/// functions, relative to the largest coefficient of `P`.
pub fn defect(system: &HPSystem) -> f64 {
    let p = system.denominator.coeffs();
    let norm = p.iter().map(|c| c.norm()).fold(0.0f64, f64::max);
    if norm == 0.0 {
        return 0.0;
    }
    let total = system.n.0 + system.n.1;
    let mut worst = 0.0f64;
    for (j, &nj) in [system.n.0, system.n.1].iter().enumerate() {
        for i in 1..=nj {
            let s: Complex64 = (0..=total)
                .map(|m| p.get(m).copied().unwrap_or_default() * system.moments[j][m + i])
                .sum();
            worst = worst.max(s.norm() / norm);
        }
    }
    worst
}
