//! Branch configurations, the cubic curve family and its three branches.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::poly::{CPoly, Root, RootSet, DEFAULT_CLUSTER_TOL, DEGREE_DROP_TOL};

/// Relative size allowed for the z^5 and z^6 coefficients of the reduced
/// discriminant before it counts as an arithmetic failure.
pub const DEGREE_BOUND_TOL: f64 = 1e-10;

/// Two simple roots closer than this (relative) are tested for being a
/// single double root split by rounding.
const SPLIT_DOUBLE_RADIUS: f64 = 1e-5;
const SPLIT_DOUBLE_CRITICAL: f64 = 1e-10;

/// Guard radius around singular points, relative to the configuration scale.
pub const SINGULAR_GUARD: f64 = 1e-10;

/// The four branch points and the monic quartic vanishing on them.
///
/// `pi4 = x^4 - s1 x^3 + s2 x^2 - s3 x + s4`.
#[derive(Debug, Clone, PartialEq)]
pub struct BranchConfig {
    pub a1: Complex64,
    pub b1: Complex64,
    pub a2: Complex64,
    pub b2: Complex64,
    pub pi4: CPoly,
    pub s1: Complex64,
    pub s2: Complex64,
    pub s3: Complex64,
    pub s4: Complex64,
}

pub fn build_config(
    a1: Complex64,
    b1: Complex64,
    a2: Complex64,
    b2: Complex64,
) -> Result<BranchConfig> {
    BranchConfig::new(a1, b1, a2, b2)
}

impl BranchConfig {
    pub fn new(a1: Complex64, b1: Complex64, a2: Complex64, b2: Complex64) -> Result<Self> {
        let pts = [a1, b1, a2, b2];
        if pts.iter().any(|p| !p.is_finite()) {
            return Err(Error::DegenerateInput("branch points must be finite".into()));
        }
        let scale = max_pairwise_distance(&pts);
        for i in 0..4 {
            for j in i + 1..4 {
                if !((pts[i] - pts[j]).norm() > 1e-12 * scale) {
                    return Err(Error::DegenerateInput(format!(
                        "branch points {} and {} coincide",
                        pts[i], pts[j]
                    )));
                }
            }
        }
        let pi4 = CPoly::from_roots(&pts);
        Ok(BranchConfig {
            a1,
            b1,
            a2,
            b2,
            s1: -pi4.coeff(3),
            s2: pi4.coeff(2),
            s3: -pi4.coeff(1),
            s4: pi4.coeff(0),
            pi4,
        })
    }

    /// `[a1, b1, a2, b2]`.
    pub fn points(&self) -> [Complex64; 4] {
        [self.a1, self.b1, self.a2, self.b2]
    }

    /// Largest distance between two branch points.
    pub fn scale(&self) -> f64 {
        max_pairwise_distance(&self.points())
    }

    pub fn max_modulus(&self) -> f64 {
        self.points().iter().map(|p| p.norm()).fold(0.0, f64::max)
    }
}

fn max_pairwise_distance(pts: &[Complex64]) -> f64 {
    let mut m = 0.0f64;
    for i in 0..pts.len() {
        for j in i + 1..pts.len() {
            m = m.max((pts[i] - pts[j]).norm());
        }
    }
    m
}

/// The free pair `(c, d)` of the curve family.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurveParams {
    pub c: Complex64,
    pub d: Complex64,
}

impl CurveParams {
    pub fn new(c: Complex64, d: Complex64) -> Self {
        CurveParams { c, d }
    }
}

/// `h^3 - 3 (P2/Pi4) h + 2 P1/Pi4 = 0` together with its discriminant data.
#[derive(Debug, Clone, PartialEq)]
pub struct CubicCurve {
    pub config: BranchConfig,
    pub params: CurveParams,
    pub p1: CPoly,
    pub p2: CPoly,
    /// `P2^3 - Pi4 P1^2`, truncated to degree at most 4.
    pub dtilde: CPoly,
    pub dtilde_roots: RootSet,
    pub genus: u8,
    /// Odd-multiplicity roots of `dtilde`.
    pub soft_points: RootSet,
    /// Double roots of `dtilde`.
    pub nodes: Vec<Complex64>,
}

pub fn build_curve(config: BranchConfig, params: CurveParams) -> Result<CubicCurve> {
    CubicCurve::new(config, params, DEFAULT_CLUSTER_TOL)
}

/// `P1 = z - c`.
pub fn p1_of(params: &CurveParams) -> CPoly {
    CPoly::new(vec![-params.c, Complex64::new(1.0, 0.0)])
}

/// `P2 = z^2 - ((s1 + 2c)/3) z + d`.
pub fn p2_of(config: &BranchConfig, params: &CurveParams) -> CPoly {
    CPoly::new(vec![
        params.d,
        -(config.s1 + params.c * 2.0) / 3.0,
        Complex64::new(1.0, 0.0),
    ])
}

/// Genus from the roots of a degree-4 discriminant whose missing degree is
/// carried by a zero at infinity: half the number of odd-multiplicity zeros.
pub(crate) fn genus_from_roots(roots: &RootSet, degree: usize, full_degree: usize) -> usize {
    let at_infinity = full_degree.saturating_sub(degree);
    let odd = roots.roots.iter().filter(|r| r.multiplicity % 2 == 1).count()
        + (at_infinity % 2);
    odd / 2
}

/// Replaces pairs of nearby simple roots with a double root when `p` has a
/// critical point between them with a critical value at the rounding level.
pub(crate) fn merge_split_doubles(set: &mut RootSet, p: &CPoly) {
    let dp = p.derivative();
    loop {
        let mut merged = None;
        'search: for i in 0..set.roots.len() {
            for j in i + 1..set.roots.len() {
                let (ri, rj) = (set.roots[i], set.roots[j]);
                if ri.multiplicity != 1 || rj.multiplicity != 1 {
                    continue;
                }
                let gap = (ri.value - rj.value).norm();
                if gap > SPLIT_DOUBLE_RADIUS * (1.0 + ri.value.norm()) {
                    continue;
                }
                let mid = (ri.value + rj.value) / 2.0;
                let mut xi = mid;
                for _ in 0..30 {
                    let (f, df) = dp.eval_with_derivative(xi);
                    if df.norm() == 0.0 {
                        break;
                    }
                    let step = f / df;
                    xi -= step;
                    if step.norm() <= 4.0 * f64::EPSILON * (1.0 + xi.norm()) {
                        break;
                    }
                }
                if !xi.is_finite() || (xi - mid).norm() > gap {
                    continue;
                }
                if p.eval(xi).norm() <= SPLIT_DOUBLE_CRITICAL * p.abs_eval(xi.norm()) {
                    merged = Some((i, j, xi));
                    break 'search;
                }
            }
        }
        match merged {
            Some((i, j, xi)) => {
                set.roots.remove(j);
                set.roots[i] = Root {
                    value: xi,
                    multiplicity: 2,
                };
            }
            None => break,
        }
    }
    set.roots.sort_by(|a, b| {
        a.value
            .re
            .total_cmp(&b.value.re)
            .then(a.value.im.total_cmp(&b.value.im))
    });
    set.residual_bound = set
        .roots
        .iter()
        .map(|r| p.eval(r.value).norm())
        .fold(0.0, f64::max);
}

impl CubicCurve {
    pub fn new(config: BranchConfig, params: CurveParams, cluster_tol: f64) -> Result<Self> {
        if !params.c.is_finite() || !params.d.is_finite() {
            return Err(Error::DegenerateInput("c and d must be finite".into()));
        }
        let p1 = p1_of(&params);
        let p2 = p2_of(&config, &params);
        let full = &p2.powi(3) - &(&config.pi4 * &p1.powi(2));
        let scale = full.max_abs_coeff();
        for power in [6, 5] {
            let rel = if scale > 0.0 {
                full.coeff(power).norm() / scale
            } else {
                0.0
            };
            if rel > DEGREE_BOUND_TOL {
                return Err(Error::DegreeViolation {
                    power,
                    magnitude: rel,
                });
            }
        }
        let dtilde = full.truncated(4).trimmed(DEGREE_DROP_TOL);
        let degree = dtilde.degree().ok_or_else(|| {
            Error::DegenerateInput("reduced discriminant vanishes identically".into())
        })?;
        let dtilde_roots = if degree == 0 {
            RootSet::default()
        } else {
            let mut set = dtilde.roots(cluster_tol)?;
            merge_split_doubles(&mut set, &dtilde);
            set
        };
        let genus = genus_from_roots(&dtilde_roots, degree, 4) as u8;
        let soft_points = RootSet {
            roots: dtilde_roots
                .roots
                .iter()
                .filter(|r| r.multiplicity % 2 == 1)
                .copied()
                .collect(),
            residual_bound: dtilde_roots.residual_bound,
        };
        let nodes = dtilde_roots
            .roots
            .iter()
            .filter(|r| r.multiplicity == 2)
            .map(|r| r.value)
            .collect();
        Ok(CubicCurve {
            config,
            params,
            p1,
            p2,
            dtilde,
            dtilde_roots,
            genus,
            soft_points,
            nodes,
        })
    }

    /// Beyond this radius branches are labelled by their behaviour at
    /// infinity.
    pub fn r_sort(&self) -> f64 {
        10.0 * (1.0 + self.config.max_modulus())
    }

    /// Hard edges followed by every root of the reduced discriminant.
    pub fn singular_points(&self) -> Vec<Complex64> {
        let mut pts = self.config.points().to_vec();
        pts.extend(self.dtilde_roots.values());
        pts
    }

    /// The cubic cleared of denominators, as a polynomial in `h`:
    /// `Pi4(z) h^3 - 3 P2(z) h + 2 P1(z)`.
    pub fn cleared_cubic(&self, z: Complex64) -> CPoly {
        CPoly::new(vec![
            self.p1.eval(z) * 2.0,
            self.p2.eval(z) * -3.0,
            Complex64::new(0.0, 0.0),
            self.config.pi4.eval(z),
        ])
    }

    /// Relative residual of the cleared cubic at `(z, h)`.
    pub fn residual(&self, z: Complex64, h: Complex64) -> f64 {
        let pi = self.config.pi4.eval(z);
        let p2 = self.p2.eval(z);
        let p1 = self.p1.eval(z);
        let val = pi * h * h * h - p2 * h * 3.0 + p1 * 2.0;
        let mag = pi.norm() * h.norm().powi(3) + 3.0 * p2.norm() * h.norm() + 2.0 * p1.norm();
        if mag > 0.0 {
            val.norm() / mag
        } else {
            val.norm()
        }
    }

    /// Distance check against every singular point.
    pub fn check_regular(&self, z: Complex64) -> Result<()> {
        let guard = SINGULAR_GUARD * self.config.scale();
        for s in self.singular_points() {
            let distance = (z - s).norm();
            if distance <= guard {
                return Err(Error::NearSingular {
                    z,
                    singular: s,
                    distance,
                });
            }
        }
        Ok(())
    }

    /// The three roots at `z` in solver order; `guesses` warm-starts them.
    pub fn raw_branches(&self, z: Complex64, guesses: Option<&[Complex64; 3]>) -> Result<[Complex64; 3]> {
        let cubic = self.cleared_cubic(z);
        if cubic.degree() != Some(3) {
            return Err(Error::NearSingular {
                z,
                singular: z,
                distance: 0.0,
            });
        }
        let r = cubic.raw_roots_from(guesses.map(|g| &g[..]))?;
        Ok([r[0], r[1], r[2]])
    }

    /// Labels by behaviour at infinity: `h0 z -> -2`, the other two ordered
    /// lexicographically by `z (z h - 1)`.
    fn sort_at_infinity(&self, z: Complex64, h: [Complex64; 3]) -> [Complex64; 3] {
        let i0 = (0..3)
            .min_by(|&i, &j| {
                (z * h[i] + 2.0)
                    .norm()
                    .total_cmp(&(z * h[j] + 2.0).norm())
            })
            .unwrap_or(0);
        let mut rest: Vec<Complex64> = (0..3).filter(|&i| i != i0).map(|i| h[i]).collect();
        rest.sort_by(|a, b| {
            let wa = z * (z * a - 1.0);
            let wb = z * (z * b - 1.0);
            wa.re.total_cmp(&wb.re).then(wa.im.total_cmp(&wb.im))
        });
        [h[i0], rest[0], rest[1]]
    }

    /// The three branches `(h0, h1, h2)` at `z`.
    ///
    /// For `|z| > r_sort` labels come from the behaviour at infinity; inside
    /// that radius they are carried by continuation along the straight
    /// segment from `r_sort` on the positive real axis.
    pub fn branches_at(&self, z: Complex64) -> Result<[Complex64; 3]> {
        self.check_regular(z)?;
        let rs = self.r_sort();
        if z.norm() > rs {
            let h = self.raw_branches(z, None)?;
            return Ok(self.sort_at_infinity(z, h));
        }
        let anchor = Complex64::new(rs * (1.0 + 1e-9), 0.0);
        let start = self.sort_at_infinity(anchor, self.raw_branches(anchor, None)?);
        continue_branches(self, &self.label_path(anchor, z), start)
    }

    /// The segment from `a` to `z`, bent to pass singular points on the
    /// left of the direction of travel.
    fn label_path(&self, a: Complex64, z: Complex64) -> Vec<Complex64> {
        let singular = self.singular_points();
        let mut spacing = f64::INFINITY;
        for (i, p) in singular.iter().enumerate() {
            for q in &singular[i + 1..] {
                let d = (p - q).norm();
                if d > 0.0 {
                    spacing = spacing.min(d);
                }
            }
        }
        let rho = (0.25 * spacing).min(0.05 * self.config.scale());
        let mut path = vec![a, z];
        let mut seg = 0;
        while seg + 1 < path.len() && path.len() < 4 * singular.len() + 2 {
            let (p, q) = (path[seg], path[seg + 1]);
            let dir = q - p;
            let len2 = dir.norm_sqr();
            let hit = singular.iter().find_map(|s| {
                let t = ((s - p) * dir.conj()).re / len2;
                let dist = (p + dir * t - s).norm();
                let r = rho.min(0.5 * (q - s).norm()).min(0.5 * (p - s).norm());
                (t > 0.0 && t < 1.0 && dist < r).then(|| s + Complex64::new(0.0, r) * dir / dir.norm())
            });
            match hit {
                Some(v) => path.insert(seg + 1, v),
                None => seg += 1,
            }
        }
        path
    }
}

/// Minimum step, relative to the configuration scale, before continuation
/// gives up.
const MIN_TRACK_STEP: f64 = 1e-13;

/// Carries the labelled triple `start`, valid at `path[0]`, along the
/// polyline `path` and returns the labelled triple at its end.
pub fn continue_branches(
    curve: &CubicCurve,
    path: &[Complex64],
    start: [Complex64; 3],
) -> Result<[Complex64; 3]> {
    let mut h = start;
    for seg in path.windows(2) {
        h = track_segment(curve, seg[0], seg[1], h)?;
    }
    Ok(h)
}

/// `dh/dz` of each branch by implicit differentiation of the cleared cubic.
fn branch_slopes(curve: &CubicCurve, z: Complex64, h: &[Complex64; 3]) -> [Complex64; 3] {
    let pi = curve.config.pi4.eval(z);
    let dpi = curve.config.pi4.derivative().eval(z);
    let p2 = curve.p2.eval(z);
    let dp2 = curve.p2.derivative().eval(z);
    let dp1 = curve.p1.derivative().eval(z);
    h.map(|v| {
        let fh = pi * v * v * 3.0 - p2 * 3.0;
        let fz = dpi * v * v * v - dp2 * v * 3.0 + dp1 * 2.0;
        let s = -fz / fh;
        if s.re.is_finite() && s.im.is_finite() {
            s
        } else {
            Complex64::new(0.0, 0.0)
        }
    })
}

/// One step of continuation from `(z, h)` to `z_new`; `None` if the step is
/// too long to match roots unambiguously against the linear prediction.
fn track_step(
    curve: &CubicCurve,
    z: Complex64,
    z_new: Complex64,
    h: &[Complex64; 3],
) -> Result<Option<[Complex64; 3]>> {
    let slopes = branch_slopes(curve, z, h);
    let dz = z_new - z;
    let pred = [h[0] + slopes[0] * dz, h[1] + slopes[1] * dz, h[2] + slopes[2] * dz];
    let raw = match curve.raw_branches(z_new, Some(&pred)) {
        Ok(r) => r,
        Err(Error::NonConvergence { .. }) => return Ok(None),
        Err(e) => return Err(e),
    };
    let next = match_roots(&pred, &raw);
    for i in 0..3 {
        let sep = (0..3)
            .filter(|&j| j != i)
            .map(|j| (next[i] - next[j]).norm())
            .fold(f64::INFINITY, f64::min);
        if (next[i] - pred[i]).norm() > 0.25 * sep {
            return Ok(None);
        }
    }
    Ok(Some(next))
}

fn track_segment(
    curve: &CubicCurve,
    from: Complex64,
    to: Complex64,
    start: [Complex64; 3],
) -> Result<[Complex64; 3]> {
    let length = (to - from).norm();
    if length == 0.0 {
        return Ok(start);
    }
    let min_step = MIN_TRACK_STEP * (1.0 + curve.config.scale());
    let mut t = 0.0f64;
    let mut dt = (0.05 * curve.config.scale() / length).min(1.0);
    let mut h = start;
    while t < 1.0 {
        let t_next = (t + dt).min(1.0);
        let z_now = from + (to - from) * t;
        let z_next = from + (to - from) * t_next;
        match track_step(curve, z_now, z_next, &h)? {
            Some(next) => {
                h = next;
                t = t_next;
                dt *= 1.5;
            }
            None => {
                dt *= 0.5;
                if dt * length < min_step {
                    return Err(Error::BranchCollision { z: z_next });
                }
            }
        }
    }
    Ok(h)
}

/// Assigns the entries of `new` to the slots of `old` by the permutation of
/// least total displacement.
pub(crate) fn match_roots(old: &[Complex64; 3], new: &[Complex64; 3]) -> [Complex64; 3] {
    const PERMS: [[usize; 3]; 6] = [
        [0, 1, 2],
        [0, 2, 1],
        [1, 0, 2],
        [1, 2, 0],
        [2, 0, 1],
        [2, 1, 0],
    ];
    let best = PERMS
        .iter()
        .min_by(|p, q| {
            let cost = |perm: &[usize; 3]| -> f64 {
                (0..3).map(|i| (old[i] - new[perm[i]]).norm()).sum()
            };
            cost(p).total_cmp(&cost(q))
        })
        .unwrap_or(&PERMS[0]);
    [new[best[0]], new[best[1]], new[best[2]]]
}
