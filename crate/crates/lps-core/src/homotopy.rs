//! Complex multivariate polynomial systems and a predictor-corrector
//! homotopy continuation tracker.
//!
//! The target system is deformed from a total-degree start system
//! g_i = gamma (theta_i^{d_i} - 1) along H(theta, t) = (1 - t) F + t G,
//! tracking t from 1 to 0 with an Euler predictor and a Newton corrector.
//! The random unit-modulus gamma is folded into the start system, which is
//! the usual trick for avoiding singular homotopies.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::error::CoreError;
use crate::rng;

type C = Complex64;

/// Bezout-count cap for the start-system enumeration.
pub const MAX_PATHS: u128 = 100_000;

/// Norm beyond which a path is declared divergent.
pub const DIVERGENCE_NORM: f64 = 1e8;

/// One monomial: coefficient times prod theta_j^{exponents[j]}.
#[derive(Debug, Clone, PartialEq)]
pub struct Term {
    pub coeff: C,
    pub exponents: Vec<u32>,
}

/// A square system of complex-coefficient multivariate polynomials.
#[derive(Debug, Clone, PartialEq)]
pub struct PolySystem {
    pub num_vars: usize,
    pub equations: Vec<Vec<Term>>,
    /// Per-equation total degree.
    pub degrees: Vec<u32>,
}

impl PolySystem {
    pub fn new(num_vars: usize, equations: Vec<Vec<Term>>) -> Result<Self, CoreError> {
        if equations.len() != num_vars {
            return Err(CoreError::ShapeMismatch("system must be square"));
        }
        let mut degrees = Vec::with_capacity(equations.len());
        for eq in &equations {
            let mut deg = 0;
            for term in eq {
                if term.exponents.len() != num_vars {
                    return Err(CoreError::ShapeMismatch("exponent vector length"));
                }
                deg = deg.max(term.exponents.iter().sum::<u32>());
            }
            degrees.push(deg);
        }
        Ok(PolySystem {
            num_vars,
            equations,
            degrees,
        })
    }

    /// Evaluate every equation at `point`.
    pub fn eval(&self, point: &[C]) -> Vec<C> {
        self.equations
            .iter()
            .map(|eq| {
                let mut acc = C::new(0.0, 0.0);
                for term in eq {
                    let mut v = term.coeff;
                    for (x, &e) in point.iter().zip(term.exponents.iter()) {
                        v *= x.powu(e);
                    }
                    acc += v;
                }
                acc
            })
            .collect()
    }

    /// Row-major Jacobian at `point`.
    pub fn jacobian(&self, point: &[C]) -> Vec<C> {
        let n = self.num_vars;
        let mut jac = vec![C::new(0.0, 0.0); n * n];
        for (i, eq) in self.equations.iter().enumerate() {
            for term in eq {
                for j in 0..n {
                    let e = term.exponents[j];
                    if e == 0 {
                        continue;
                    }
                    let mut v = term.coeff * e as f64;
                    for (k, (x, &ek)) in point.iter().zip(term.exponents.iter()).enumerate() {
                        let p = if k == j { ek - 1 } else { ek };
                        v *= x.powu(p);
                    }
                    jac[i * n + j] += v;
                }
            }
        }
        jac
    }

    /// Product of the per-equation total degrees.
    pub fn bezout_number(&self) -> u128 {
        self.degrees.iter().fold(1u128, |acc, &d| {
            acc.saturating_mul(d.max(1) as u128)
        })
    }
}

/// Euclidean norm of the evaluated system.
pub fn residual(system: &PolySystem, point: &[C]) -> Result<f64, CoreError> {
    if point.len() != system.num_vars {
        return Err(CoreError::ShapeMismatch("point dimension"));
    }
    let vals = system.eval(point);
    Ok(libm::sqrt(vals.iter().map(|v| v.norm_sqr()).sum::<f64>()))
}

fn term(re: f64, exps: &[u32]) -> Term {
    Term {
        coeff: C::new(re, 0.0),
        exponents: exps.to_vec(),
    }
}

/// The 7-equation, 7-variable system fitting y = |x| with a one-hidden-layer
/// width-2 network under the quadratic activation approximation. Variable
/// order: (w1_1, w1_2, w2_1, w2_2, b1_1, b1_2, b2).
pub fn build_abs_fit_system() -> PolySystem {
    let e = |a: u32, b: u32, c: u32, d: u32, f: u32, g: u32, h: u32| [a, b, c, d, f, g, h];
    let equations = vec![
        // 15/32 (w2_1 w1_1^2 + w2_2 w1_2^2) - 15/16
        vec![
            term(15.0 / 32.0, &e(2, 0, 1, 0, 0, 0, 0)),
            term(15.0 / 32.0, &e(0, 2, 0, 1, 0, 0, 0)),
            term(-15.0 / 16.0, &e(0, 0, 0, 0, 0, 0, 0)),
        ],
        // 1/2 (w1_1 w2_1 + w1_2 w2_2) + 15/16 (b1_1 w1_1 w2_1 + b1_2 w1_2 w2_2)
        vec![
            term(0.5, &e(1, 0, 1, 0, 0, 0, 0)),
            term(0.5, &e(0, 1, 0, 1, 0, 0, 0)),
            term(15.0 / 16.0, &e(1, 0, 1, 0, 1, 0, 0)),
            term(15.0 / 16.0, &e(0, 1, 0, 1, 0, 1, 0)),
        ],
        // b2 + 1/32 w2_1 (15 b1_1^2 + 16 b1_1 + 3)
        //    + 1/32 w2_2 (15 b1_2^2 + 16 b1_2 + 3) - 3/16
        vec![
            term(1.0, &e(0, 0, 0, 0, 0, 0, 1)),
            term(15.0 / 32.0, &e(0, 0, 1, 0, 2, 0, 0)),
            term(0.5, &e(0, 0, 1, 0, 1, 0, 0)),
            term(3.0 / 32.0, &e(0, 0, 1, 0, 0, 0, 0)),
            term(15.0 / 32.0, &e(0, 0, 0, 1, 0, 2, 0)),
            term(0.5, &e(0, 0, 0, 1, 0, 1, 0)),
            term(3.0 / 32.0, &e(0, 0, 0, 1, 0, 0, 0)),
            term(-3.0 / 16.0, &e(0, 0, 0, 0, 0, 0, 0)),
        ],
        // Symmetry breakers and b2 = 0.
        vec![
            term(1.0, &e(2, 0, 0, 0, 0, 0, 0)),
            term(-1.0, &e(0, 2, 0, 0, 0, 0, 0)),
        ],
        vec![
            term(1.0, &e(0, 0, 2, 0, 0, 0, 0)),
            term(-1.0, &e(0, 0, 0, 2, 0, 0, 0)),
        ],
        vec![
            term(1.0, &e(0, 0, 0, 0, 2, 0, 0)),
            term(-1.0, &e(0, 0, 0, 0, 0, 2, 0)),
        ],
        vec![term(1.0, &e(0, 0, 0, 0, 0, 0, 1))],
    ];
    PolySystem::new(7, equations).expect("static system is well formed")
}

/// Total-degree start system g_i = gamma (theta_i^{d_i} - 1) with its full
/// root set (all combinations of d_i-th roots of unity).
pub fn total_degree_start(
    system: &PolySystem,
    gamma: C,
) -> Result<(PolySystem, Vec<Vec<C>>), CoreError> {
    if system.degrees.iter().any(|&d| d == 0) {
        return Err(CoreError::Range("zero-degree equation in target system"));
    }
    let count = system.bezout_number();
    if count > MAX_PATHS {
        return Err(CoreError::TooLarge("Bezout count above the path cap"));
    }
    let n = system.num_vars;
    let mut equations = Vec::with_capacity(n);
    for (i, &d) in system.degrees.iter().enumerate() {
        let mut exps = vec![0u32; n];
        exps[i] = d;
        equations.push(vec![
            Term {
                coeff: gamma,
                exponents: exps,
            },
            Term {
                coeff: -gamma,
                exponents: vec![0; n],
            },
        ]);
    }
    let start = PolySystem::new(n, equations)?;

    let mut points: Vec<Vec<C>> = vec![vec![]];
    for &d in &system.degrees {
        let roots: Vec<C> = (0..d)
            .map(|k| {
                let ang = 2.0 * core::f64::consts::PI * k as f64 / d as f64;
                C::new(libm::cos(ang), libm::sin(ang))
            })
            .collect();
        let mut next = Vec::with_capacity(points.len() * d as usize);
        for p in &points {
            for r in &roots {
                let mut q = p.clone();
                q.push(*r);
                next.push(q);
            }
        }
        points = next;
    }
    Ok((start, points))
}

/// Step-size and convergence controls for path tracking.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrackSettings {
    pub initial_step: f64,
    pub min_step: f64,
    pub corrector_tol: f64,
    pub max_corrector_iters: usize,
    /// Below this t the tracker switches to fixed small steps.
    pub endgame_start_t: f64,
    /// Hard cap on predictor steps per path.
    pub max_steps: usize,
}

impl Default for TrackSettings {
    fn default() -> Self {
        TrackSettings {
            initial_step: 0.05,
            min_step: 1e-7,
            corrector_tol: 1e-10,
            max_corrector_iters: 6,
            endgame_start_t: 0.1,
            max_steps: 20_000,
        }
    }
}

impl TrackSettings {
    pub fn validate(&self) -> Result<(), CoreError> {
        if !(self.min_step > 0.0 && self.min_step <= self.initial_step && self.initial_step <= 1.0)
        {
            return Err(CoreError::Range("0 < min_step <= initial_step <= 1 required"));
        }
        if !(self.corrector_tol > 0.0) {
            return Err(CoreError::Range("corrector_tol must be positive"));
        }
        Ok(())
    }
}

/// Why a path ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PathStatus {
    Converged,
    Diverged,
    Truncated,
}

/// Endpoint record of one tracked path.
#[derive(Debug, Clone, PartialEq)]
pub struct PathOutcome {
    pub start_index: usize,
    pub status: PathStatus,
    pub endpoint: Vec<C>,
    pub residual: f64,
    pub steps_taken: usize,
}

/// Solve the complex n x n system J x = rhs by Gaussian elimination with
/// partial pivoting. Fails only on a numerically zero pivot.
fn solve_linear(jac: &[C], rhs: &[C]) -> Result<Vec<C>, CoreError> {
    let n = rhs.len();
    let mut a = jac.to_vec();
    let mut b = rhs.to_vec();
    for col in 0..n {
        let mut pivot = col;
        let mut best = a[col * n + col].norm_sqr();
        for row in col + 1..n {
            let mag = a[row * n + col].norm_sqr();
            if mag > best {
                best = mag;
                pivot = row;
            }
        }
        if best < 1e-280 {
            return Err(CoreError::Numerical("singular Jacobian", best));
        }
        if pivot != col {
            for j in 0..n {
                a.swap(col * n + j, pivot * n + j);
            }
            b.swap(col, pivot);
        }
        let diag = a[col * n + col];
        for row in col + 1..n {
            let factor = a[row * n + col] / diag;
            if factor.norm_sqr() == 0.0 {
                continue;
            }
            for j in col..n {
                let v = a[col * n + j];
                a[row * n + j] -= factor * v;
            }
            let v = b[col];
            b[row] -= factor * v;
        }
    }
    let mut x = vec![C::new(0.0, 0.0); n];
    for row in (0..n).rev() {
        let mut acc = b[row];
        for j in row + 1..n {
            acc -= a[row * n + j] * x[j];
        }
        x[row] = acc / a[row * n + row];
    }
    Ok(x)
}

fn point_norm(p: &[C]) -> f64 {
    libm::sqrt(p.iter().map(|v| v.norm_sqr()).sum::<f64>())
}

struct Homotopy<'a> {
    target: &'a PolySystem,
    start: &'a PolySystem,
}

impl Homotopy<'_> {
    // H(theta, t) = (1 - t) F(theta) + t G(theta)
    fn eval(&self, p: &[C], t: f64) -> Vec<C> {
        let f = self.target.eval(p);
        let g = self.start.eval(p);
        f.iter()
            .zip(g.iter())
            .map(|(fv, gv)| fv * (1.0 - t) + gv * t)
            .collect()
    }

    fn jacobian(&self, p: &[C], t: f64) -> Vec<C> {
        let jf = self.target.jacobian(p);
        let jg = self.start.jacobian(p);
        jf.iter()
            .zip(jg.iter())
            .map(|(f, g)| f * (1.0 - t) + g * t)
            .collect()
    }

    // dH/dt = G - F
    fn dt(&self, p: &[C]) -> Vec<C> {
        let f = self.target.eval(p);
        let g = self.start.eval(p);
        g.iter().zip(f.iter()).map(|(gv, fv)| gv - fv).collect()
    }

    /// Newton-correct `p` onto H(., t) = 0. Returns true on convergence.
    fn correct(&self, p: &mut Vec<C>, t: f64, settings: &TrackSettings) -> bool {
        for _ in 0..settings.max_corrector_iters {
            let h = self.eval(p, t);
            let norm = libm::sqrt(h.iter().map(|v| v.norm_sqr()).sum::<f64>());
            if norm < settings.corrector_tol {
                return true;
            }
            let jac = self.jacobian(p, t);
            let delta = match solve_linear(&jac, &h) {
                Ok(d) => d,
                Err(_) => return false,
            };
            for (x, d) in p.iter_mut().zip(delta.iter()) {
                *x -= d;
            }
            if point_norm(p) > DIVERGENCE_NORM {
                return false;
            }
        }
        let h = self.eval(p, t);
        libm::sqrt(h.iter().map(|v| v.norm_sqr()).sum::<f64>()) < settings.corrector_tol
    }
}

/// Track one start root from t = 1 to t = 0 and polish on the target.
pub fn track_path(
    target: &PolySystem,
    start: &PolySystem,
    start_point: &[C],
    start_index: usize,
    settings: &TrackSettings,
) -> Result<PathOutcome, CoreError> {
    settings.validate()?;
    if start_point.len() != target.num_vars || start.num_vars != target.num_vars {
        return Err(CoreError::ShapeMismatch("start point / system dimensions"));
    }
    let hom = Homotopy { target, start };
    let mut point = start_point.to_vec();
    let mut t = 1.0;
    let mut h = settings.initial_step;
    let mut steps_taken = 0usize;
    let endgame_step = (settings.endgame_start_t / 50.0).max(settings.min_step);

    let outcome = |status, point: Vec<C>, steps_taken| {
        let res = residual(target, &point).unwrap_or(f64::INFINITY);
        PathOutcome {
            start_index,
            status,
            endpoint: point,
            residual: res,
            steps_taken,
        }
    };

    while t > 0.0 {
        if steps_taken >= settings.max_steps {
            return Ok(outcome(PathStatus::Truncated, point, steps_taken));
        }
        if point_norm(&point) > DIVERGENCE_NORM {
            return Ok(outcome(PathStatus::Diverged, point, steps_taken));
        }
        let step = if t < settings.endgame_start_t {
            endgame_step.min(t)
        } else {
            h.min(t)
        };
        let t_next = (t - step).max(0.0);

        // Euler predictor: theta' = -J^{-1} dH/dt, advanced by -step.
        let mut predicted = point.clone();
        if let Ok(dtheta) = solve_linear(&hom.jacobian(&point, t), &hom.dt(&point)) {
            for (x, d) in predicted.iter_mut().zip(dtheta.iter()) {
                *x += d * step;
            }
        }

        let mut corrected = predicted;
        if hom.correct(&mut corrected, t_next, settings) {
            point = corrected;
            t = t_next;
            steps_taken += 1;
            if t >= settings.endgame_start_t {
                h = (h * 2.0).min(settings.initial_step);
            }
        } else {
            steps_taken += 1;
            if t < settings.endgame_start_t {
                // Endgame steps are fixed; a failed correction there means
                // the path is heading somewhere we cannot follow.
                return Ok(outcome(PathStatus::Truncated, point, steps_taken));
            }
            h *= 0.5;
            if h < settings.min_step {
                return Ok(outcome(PathStatus::Truncated, point, steps_taken));
            }
        }
    }

    // Final Newton polish on the target itself. Singular roots converge
    // linearly, so allow a generous iteration budget.
    for _ in 0..60 {
        let f = target.eval(&point);
        let norm = libm::sqrt(f.iter().map(|v| v.norm_sqr()).sum::<f64>());
        if norm < 1e-14 {
            break;
        }
        let jac = target.jacobian(&point);
        match solve_linear(&jac, &f) {
            Ok(delta) => {
                let dn = point_norm(&delta);
                if dn > 1.0 {
                    break;
                }
                for (x, d) in point.iter_mut().zip(delta.iter()) {
                    *x -= d;
                }
            }
            Err(_) => break,
        }
    }
    let mut res = residual(target, &point)?;
    // Plain Newton stalls on singular roots; if the endpoint is already
    // near a solution, fall back to regularized Gauss-Newton.
    if res >= settings.corrector_tol && res < 1e-2 {
        res = gauss_newton(target, &mut point, 80);
    }
    // A singular endpoint with a tiny imaginary part may be a real solution
    // the stalled polish could not reach: project onto the real slice and
    // re-polish (all-real arithmetic keeps it exactly real). Keep the
    // projection only if it still meets the tolerance.
    if res < settings.corrector_tol {
        let imag_max = point.iter().map(|v| libm::fabs(v.im)).fold(0.0, f64::max);
        if imag_max > 0.0 && imag_max < 1e-4 {
            let mut real_pt: Vec<C> = point.iter().map(|v| C::new(v.re, 0.0)).collect();
            let real_res = gauss_newton(target, &mut real_pt, 80);
            if real_res < settings.corrector_tol {
                point = real_pt;
                res = real_res;
            }
        }
    }
    let status = if res < settings.corrector_tol {
        PathStatus::Converged
    } else if point_norm(&point) > DIVERGENCE_NORM {
        PathStatus::Diverged
    } else {
        PathStatus::Truncated
    };
    Ok(PathOutcome {
        start_index,
        status,
        endpoint: point,
        residual: res,
        steps_taken,
    })
}

/// Damped Gauss-Newton on the (possibly rank-deficient) system: solves the
/// Tikhonov-regularized normal equations (J^H J + lambda I) d = -J^H F.
/// Returns the final residual; `point` holds the refined estimate.
pub fn gauss_newton(system: &PolySystem, point: &mut Vec<C>, iters: usize) -> f64 {
    let n = system.num_vars;
    let mut best = residual(system, point).unwrap_or(f64::INFINITY);
    let mut best_point = point.clone();
    for _ in 0..iters {
        let f = system.eval(point);
        let jac = system.jacobian(point);
        // Normal matrix J^H J and right-hand side -J^H F.
        let mut normal = vec![C::new(0.0, 0.0); n * n];
        let mut rhs = vec![C::new(0.0, 0.0); n];
        for i in 0..n {
            for j in 0..n {
                let mut acc = C::new(0.0, 0.0);
                for k in 0..n {
                    acc += jac[k * n + i].conj() * jac[k * n + j];
                }
                normal[i * n + j] = acc;
            }
            let mut acc = C::new(0.0, 0.0);
            for k in 0..n {
                acc += jac[k * n + i].conj() * f[k];
            }
            rhs[i] = -acc;
        }
        let scale: f64 = (0..n).map(|i| normal[i * n + i].norm()).fold(0.0, f64::max);
        let lambda = (scale * 1e-14).max(1e-300);
        for i in 0..n {
            normal[i * n + i] += C::new(lambda, 0.0);
        }
        let Ok(delta) = solve_linear(&normal, &rhs) else {
            break;
        };
        if point_norm(&delta) > 1.0 {
            break;
        }
        for (x, d) in point.iter_mut().zip(delta.iter()) {
            *x += d;
        }
        let res = residual(system, point).unwrap_or(f64::INFINITY);
        if res < best {
            best = res;
            best_point = point.clone();
        }
        if res < 1e-15 {
            break;
        }
    }
    *point = best_point;
    best
}

/// One cluster of (numerically identical) converged endpoints.
#[derive(Debug, Clone, PartialEq)]
pub struct SolutionCluster {
    pub representative: Vec<C>,
    /// Number of converged paths that landed here.
    pub path_count: usize,
    pub residual: f64,
    pub is_real: bool,
}

/// Full solve report: per-path outcomes plus clustered solutions.
#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    pub bezout: u128,
    pub outcomes: Vec<PathOutcome>,
    pub clusters: Vec<SolutionCluster>,
}

pub const CLUSTER_TOL: f64 = 1e-6;
pub const REAL_TOL: f64 = 1e-6;

fn canonical_cmp(a: &[C], b: &[C]) -> core::cmp::Ordering {
    for (x, y) in a.iter().zip(b.iter()) {
        match x.re.partial_cmp(&y.re).unwrap_or(core::cmp::Ordering::Equal) {
            core::cmp::Ordering::Equal => {}
            ord => return ord,
        }
        match x.im.partial_cmp(&y.im).unwrap_or(core::cmp::Ordering::Equal) {
            core::cmp::Ordering::Equal => {}
            ord => return ord,
        }
    }
    core::cmp::Ordering::Equal
}

fn max_coord_dist(a: &[C], b: &[C]) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

/// Cluster converged endpoints; endpoints are sorted canonically first so
/// the result does not depend on path order.
pub fn cluster_endpoints(outcomes: &[PathOutcome]) -> Vec<SolutionCluster> {
    let mut converged: Vec<&PathOutcome> = outcomes
        .iter()
        .filter(|o| o.status == PathStatus::Converged)
        .collect();
    converged.sort_by(|a, b| canonical_cmp(&a.endpoint, &b.endpoint));
    let mut clusters: Vec<SolutionCluster> = Vec::new();
    for o in converged {
        if let Some(cl) = clusters
            .iter_mut()
            .find(|cl| max_coord_dist(&cl.representative, &o.endpoint) < CLUSTER_TOL)
        {
            cl.path_count += 1;
            if o.residual < cl.residual {
                cl.representative = o.endpoint.clone();
                cl.residual = o.residual;
            }
        } else {
            let is_real = o
                .endpoint
                .iter()
                .all(|v| libm::fabs(v.im) < REAL_TOL);
            clusters.push(SolutionCluster {
                representative: o.endpoint.clone(),
                path_count: 1,
                residual: o.residual,
                is_real,
            });
        }
    }
    clusters
}

/// Build a total-degree start for `target`, track every path, and cluster
/// the converged endpoints. Single-path failures never abort the batch.
pub fn solve_all(
    target: &PolySystem,
    settings: &TrackSettings,
    gamma_seed: u64,
) -> Result<SolveReport, CoreError> {
    settings.validate()?;
    let mut grng = rng::stream(gamma_seed, &[42]);
    let angle = 2.0 * core::f64::consts::PI * rng::uniform01(&mut grng);
    let gamma = C::new(libm::cos(angle), libm::sin(angle));
    let (start, start_points) = total_degree_start(target, gamma)?;
    let mut outcomes = Vec::with_capacity(start_points.len());
    for (i, sp) in start_points.iter().enumerate() {
        outcomes.push(track_path(target, &start, sp, i, settings)?);
    }
    let clusters = cluster_endpoints(&outcomes);
    Ok(SolveReport {
        bezout: target.bezout_number(),
        outcomes,
        clusters,
    })
}

// ---------------------------------------------------------------------------
// Positive-dimensional real components.
//
// A square system can have solution sets of positive dimension; path
// endpoints then land at arbitrary (gamma-dependent) points of the set. For
// real one-dimensional components we detect the rank drop at a real
// endpoint and trace the curve by tangent prediction plus Gauss-Newton
// correction, giving a polyline description of the whole component.

fn eval_real(system: &PolySystem, p: &[f64]) -> Vec<f64> {
    let cp: Vec<C> = p.iter().map(|&v| C::new(v, 0.0)).collect();
    system.eval(&cp).iter().map(|v| v.re).collect()
}

fn jacobian_real(system: &PolySystem, p: &[f64]) -> Vec<f64> {
    let cp: Vec<C> = p.iter().map(|&v| C::new(v, 0.0)).collect();
    system.jacobian(&cp).iter().map(|v| v.re).collect()
}

fn residual_real(system: &PolySystem, p: &[f64]) -> f64 {
    libm::sqrt(eval_real(system, p).iter().map(|v| v * v).sum::<f64>())
}

/// Real Gaussian elimination with partial pivoting.
fn solve_real(a: &[f64], b: &[f64]) -> Option<Vec<f64>> {
    let n = b.len();
    let mut m = a.to_vec();
    let mut rhs = b.to_vec();
    for col in 0..n {
        let mut pivot = col;
        let mut best = libm::fabs(m[col * n + col]);
        for row in col + 1..n {
            let mag = libm::fabs(m[row * n + col]);
            if mag > best {
                best = mag;
                pivot = row;
            }
        }
        if best < 1e-300 {
            return None;
        }
        if pivot != col {
            for k in 0..n {
                m.swap(col * n + k, pivot * n + k);
            }
            rhs.swap(col, pivot);
        }
        for row in col + 1..n {
            let factor = m[row * n + col] / m[col * n + col];
            for k in col..n {
                m[row * n + k] -= factor * m[col * n + k];
            }
            rhs[row] -= factor * rhs[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let mut acc = rhs[row];
        for k in row + 1..n {
            acc -= m[row * n + k] * x[k];
        }
        x[row] = acc / m[row * n + row];
    }
    Some(x)
}

/// Regularized real Gauss-Newton; returns the achieved residual.
pub fn refine_real(system: &PolySystem, p: &mut Vec<f64>, iters: usize) -> f64 {
    let n = system.num_vars;
    let mut best = residual_real(system, p);
    let mut best_p = p.clone();
    for _ in 0..iters {
        let f = eval_real(system, p);
        let jac = jacobian_real(system, p);
        let mut normal = vec![0.0; n * n];
        let mut rhs = vec![0.0; n];
        for i in 0..n {
            for j in 0..n {
                normal[i * n + j] = (0..n).map(|k| jac[k * n + i] * jac[k * n + j]).sum();
            }
            rhs[i] = -(0..n).map(|k| jac[k * n + i] * f[k]).sum::<f64>();
        }
        let scale = (0..n).map(|i| normal[i * n + i]).fold(0.0, f64::max);
        let lambda = (scale * 1e-14).max(1e-300);
        for i in 0..n {
            normal[i * n + i] += lambda;
        }
        let Some(delta) = solve_real(&normal, &rhs) else {
            break;
        };
        if libm::sqrt(delta.iter().map(|d| d * d).sum::<f64>()) > 1.0 {
            break;
        }
        for (x, d) in p.iter_mut().zip(delta.iter()) {
            *x += d;
        }
        let res = residual_real(system, p);
        if res < best {
            best = res;
            best_p = p.clone();
        }
        if res < 1e-15 {
            break;
        }
    }
    *p = best_p;
    best
}

fn norm_real(v: &[f64]) -> f64 {
    libm::sqrt(v.iter().map(|x| x * x).sum::<f64>())
}

/// Unit vector spanning the Jacobian null space at a corank-1 point, found
/// by inverse iteration on the regularized normal matrix. `None` when the
/// Jacobian has full rank (the solution is isolated).
pub fn kernel_direction(system: &PolySystem, p: &[f64]) -> Option<Vec<f64>> {
    let n = system.num_vars;
    let jac = jacobian_real(system, p);
    let mut normal = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            normal[i * n + j] = (0..n).map(|k| jac[k * n + i] * jac[k * n + j]).sum();
        }
    }
    let scale = (0..n).map(|i| normal[i * n + i]).fold(0.0, f64::max);
    if scale == 0.0 {
        return None;
    }
    let lambda = scale * 1e-13;
    let mut shifted = normal.clone();
    for i in 0..n {
        shifted[i * n + i] += lambda;
    }
    // Deterministic start vector; inverse iteration converges to the
    // eigenvector of the smallest eigenvalue.
    let mut v: Vec<f64> = (0..n).map(|i| libm::sin(1.7 * (i as f64 + 1.0))).collect();
    let nv = norm_real(&v);
    v.iter_mut().for_each(|x| *x /= nv);
    for _ in 0..12 {
        let w = solve_real(&shifted, &v)?;
        let nw = norm_real(&w);
        if !nw.is_finite() || nw == 0.0 {
            return None;
        }
        v = w.iter().map(|x| x / nw).collect();
    }
    // Rayleigh quotient of J^T J relative to its largest diagonal entry.
    let jv: Vec<f64> = (0..n)
        .map(|k| (0..n).map(|i| jac[k * n + i] * v[i]).sum())
        .collect();
    let mu = jv.iter().map(|x| x * x).sum::<f64>() / scale;
    if mu < 1e-12 {
        Some(v)
    } else {
        None
    }
}

/// Polyline sample of a one-dimensional real solution component.
#[derive(Debug, Clone, PartialEq)]
pub struct RealCurve {
    pub samples: Vec<Vec<f64>>,
    pub closed: bool,
}

const CURVE_RESIDUAL_TOL: f64 = 1e-9;

fn trace_direction(
    system: &PolySystem,
    start: &[f64],
    first_tangent: &[f64],
    step: f64,
    max_norm: f64,
    max_samples: usize,
) -> (Vec<Vec<f64>>, bool) {
    let mut samples = Vec::new();
    let mut point = start.to_vec();
    let mut tangent = first_tangent.to_vec();
    let mut closed = false;
    while samples.len() < max_samples {
        let mut predicted: Vec<f64> = point
            .iter()
            .zip(tangent.iter())
            .map(|(x, t)| x + step * t)
            .collect();
        if refine_real(system, &mut predicted, 30) > CURVE_RESIDUAL_TOL {
            break;
        }
        // Reject corrections that collapsed back onto the previous point.
        let moved: f64 = norm_real(
            &predicted
                .iter()
                .zip(point.iter())
                .map(|(a, b)| a - b)
                .collect::<Vec<f64>>(),
        );
        if moved < step * 0.1 {
            break;
        }
        point = predicted;
        samples.push(point.clone());
        if norm_real(&point) > max_norm {
            break;
        }
        let back: Vec<f64> = point.iter().zip(start.iter()).map(|(a, b)| a - b).collect();
        if samples.len() > 10 && norm_real(&back) < step * 0.6 {
            closed = true;
            break;
        }
        let Some(mut next_tangent) = kernel_direction(system, &point) else {
            break;
        };
        // Keep walking the same way along the curve.
        let dot: f64 = next_tangent.iter().zip(tangent.iter()).map(|(a, b)| a * b).sum();
        if dot < 0.0 {
            next_tangent.iter_mut().for_each(|x| *x = -*x);
        }
        tangent = next_tangent;
    }
    (samples, closed)
}

/// Trace the real solution curve through `start` in both directions until
/// it leaves the ball of radius `max_norm`, closes a loop, or hits the
/// sample cap. Fails when `start` is not a (refinable) singular solution.
pub fn trace_real_curve(
    system: &PolySystem,
    start: &[f64],
    step: f64,
    max_norm: f64,
    max_samples: usize,
) -> Result<RealCurve, CoreError> {
    if start.len() != system.num_vars {
        return Err(CoreError::ShapeMismatch("curve start dimension"));
    }
    if !(step > 0.0) || !(max_norm > 0.0) || max_samples == 0 {
        return Err(CoreError::Range("curve tracing parameters must be positive"));
    }
    let mut anchor = start.to_vec();
    let res = refine_real(system, &mut anchor, 60);
    if res > CURVE_RESIDUAL_TOL {
        return Err(CoreError::Numerical("curve start does not refine to a solution", res));
    }
    let Some(tangent) = kernel_direction(system, &anchor) else {
        return Err(CoreError::Numerical("Jacobian has full rank at curve start", res));
    };
    let (forward, closed) = trace_direction(system, &anchor, &tangent, step, max_norm, max_samples);
    let mut samples: Vec<Vec<f64>> = Vec::new();
    if !closed {
        let back_tangent: Vec<f64> = tangent.iter().map(|x| -x).collect();
        let (backward, _) =
            trace_direction(system, &anchor, &back_tangent, step, max_norm, max_samples);
        samples.extend(backward.into_iter().rev());
    }
    samples.push(anchor);
    samples.extend(forward);
    Ok(RealCurve { samples, closed })
}

/// Trace every distinct real solution curve reachable from the clusters:
/// each representative's real part is refined back onto the variety (the
/// real part of a point on the complexified curve lands near the real
/// curve), then traced if the Jacobian there is rank-deficient. Curves
/// already covered by an earlier trace are skipped.
pub fn explore_real_curves(
    system: &PolySystem,
    clusters: &[SolutionCluster],
    step: f64,
    max_norm: f64,
    max_samples: usize,
) -> Vec<RealCurve> {
    let mut curves: Vec<RealCurve> = Vec::new();
    for cl in clusters {
        let mut p: Vec<f64> = cl.representative.iter().map(|v| v.re).collect();
        if norm_real(&p) > max_norm {
            continue;
        }
        if refine_real(system, &mut p, 80) > CURVE_RESIDUAL_TOL {
            continue;
        }
        if curves
            .iter()
            .any(|cv| distance_to_polyline(&cv.samples, &p) < 10.0 * step)
        {
            continue;
        }
        if kernel_direction(system, &p).is_none() {
            continue;
        }
        if let Ok(cv) = trace_real_curve(system, &p, step, max_norm, max_samples) {
            curves.push(cv);
        }
    }
    curves
}

/// Distance from `q` to the polyline through `samples`.
pub fn distance_to_polyline(samples: &[Vec<f64>], q: &[f64]) -> f64 {
    let mut best = f64::INFINITY;
    for pair in samples.windows(2) {
        let (a, b) = (&pair[0], &pair[1]);
        let ab: Vec<f64> = b.iter().zip(a.iter()).map(|(x, y)| x - y).collect();
        let aq: Vec<f64> = q.iter().zip(a.iter()).map(|(x, y)| x - y).collect();
        let ab2: f64 = ab.iter().map(|x| x * x).sum();
        let s = if ab2 > 0.0 {
            (ab.iter().zip(aq.iter()).map(|(x, y)| x * y).sum::<f64>() / ab2).clamp(0.0, 1.0)
        } else {
            0.0
        };
        let d2: f64 = a
            .iter()
            .zip(ab.iter())
            .zip(q.iter())
            .map(|((av, abv), qv)| {
                let diff = av + s * abv - qv;
                diff * diff
            })
            .sum();
        best = best.min(d2);
    }
    if samples.len() == 1 {
        best = samples[0]
            .iter()
            .zip(q.iter())
            .map(|(a, b)| (a - b) * (a - b))
            .sum();
    }
    libm::sqrt(best)
}

/// Point of the solution curve closest to `anchor`, starting the search at
/// `start` (e.g. the nearest polyline sample): alternates a tangential move
/// toward the anchor with Gauss-Newton re-projection onto the curve.
pub fn project_to_curve(
    system: &PolySystem,
    anchor: &[f64],
    start: &[f64],
    iters: usize,
) -> Result<Vec<f64>, CoreError> {
    let mut p = start.to_vec();
    if refine_real(system, &mut p, 60) > CURVE_RESIDUAL_TOL {
        return Err(CoreError::Numerical("projection start is not on the curve", 0.0));
    }
    for _ in 0..iters {
        let Some(tangent) = kernel_direction(system, &p) else {
            break;
        };
        let gap: Vec<f64> = anchor.iter().zip(p.iter()).map(|(a, b)| a - b).collect();
        let along: f64 = tangent.iter().zip(gap.iter()).map(|(a, b)| a * b).sum();
        if libm::fabs(along) < 1e-14 {
            break;
        }
        for (x, t) in p.iter_mut().zip(tangent.iter()) {
            *x += along * t;
        }
        refine_real(system, &mut p, 30);
    }
    Ok(p)
}
