//! Limited-memory projected quasi-Newton minimization over an ℓ∞ box.
//!
//! Each iteration builds an L-BFGS direction on the free variables (those
//! not held at a bound by the gradient), then backtracks along the projected
//! arc `P(x + t d)` until the Armijo condition holds. If the quasi-Newton
//! direction fails, the step is retried once along the projected steepest
//! descent direction with the memory cleared.

use std::collections::VecDeque;

/// Closed box `[-radius, radius]^n`. An infinite radius means unconstrained.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoxConstraint {
    pub radius: f64,
}

impl BoxConstraint {
    pub fn new(radius: f64) -> Self {
        assert!(radius > 0.0, "box radius must be positive, got {radius}");
        Self { radius }
    }

    pub fn unbounded() -> Self {
        Self { radius: f64::INFINITY }
    }

    pub fn contains(&self, v: &[f64]) -> bool {
        v.iter().all(|x| x.abs() <= self.radius)
    }
}

pub fn project_box(v: &[f64], bx: &BoxConstraint) -> Vec<f64> {
    v.iter().map(|x| x.clamp(-bx.radius, bx.radius)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimConfig {
    pub memory: usize,
    pub max_iter: usize,
    /// Stop once the projected gradient's ∞-norm is at most this.
    pub tol: f64,
    pub ls_max: usize,
    pub armijo_c1: f64,
}

impl Default for OptimConfig {
    fn default() -> Self {
        Self {
            memory: 10,
            max_iter: 500,
            tol: 1e-7,
            ls_max: 30,
            armijo_c1: 1e-4,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    Converged,
    MaxIter,
    /// No backtracked step decreased the objective; the best iterate is kept.
    LineSearchFailure,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimResult {
    pub point: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    pub evaluations: usize,
    pub converged: bool,
    pub final_pg_norm: f64,
    pub termination: Termination,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn norm_inf(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m, v| m.max(v.abs()))
}

/// `‖x - P(x - g)‖_∞`.
pub fn projected_gradient_norm(x: &[f64], g: &[f64], bx: &BoxConstraint) -> f64 {
    x.iter()
        .zip(g)
        .map(|(xi, gi)| (xi - (xi - gi).clamp(-bx.radius, bx.radius)).abs())
        .fold(0.0, f64::max)
}

/// Coordinates sitting on a bound with the gradient pushing outward.
fn binding_set(x: &[f64], g: &[f64], bx: &BoxConstraint) -> Vec<bool> {
    x.iter()
        .zip(g)
        .map(|(&xi, &gi)| (xi <= -bx.radius && gi > 0.0) || (xi >= bx.radius && gi < 0.0))
        .collect()
}

struct Memory {
    pairs: VecDeque<(Vec<f64>, Vec<f64>, f64)>,
    cap: usize,
}

impl Memory {
    fn new(cap: usize) -> Self {
        Self {
            pairs: VecDeque::with_capacity(cap),
            cap,
        }
    }

    fn push(&mut self, s: Vec<f64>, y: Vec<f64>) -> bool {
        let sy = dot(&s, &y);
        if !(sy > 1e-10 * norm2(&s) * norm2(&y)) {
            return false;
        }
        if self.pairs.len() == self.cap {
            self.pairs.pop_front();
        }
        self.pairs.push_back((s, y, 1.0 / sy));
        true
    }

    fn clear(&mut self) {
        self.pairs.clear();
    }

    /// Two-loop recursion: `-H q` with the Barzilai-Borwein initial scaling.
    fn direction(&self, q: &[f64], first_scale: f64) -> Vec<f64> {
        let mut q = q.to_vec();
        let mut alphas = Vec::with_capacity(self.pairs.len());
        for (s, y, rho) in self.pairs.iter().rev() {
            let a = rho * dot(s, &q);
            q.iter_mut().zip(y).for_each(|(qi, yi)| *qi -= a * yi);
            alphas.push(a);
        }
        let gamma = match self.pairs.back() {
            Some((s, y, _)) => dot(s, y) / dot(y, y),
            None => first_scale,
        };
        q.iter_mut().for_each(|v| *v *= gamma);
        for ((s, y, rho), a) in self.pairs.iter().zip(alphas.into_iter().rev()) {
            let b = rho * dot(y, &q);
            q.iter_mut().zip(s).for_each(|(qi, si)| *qi += (a - b) * si);
        }
        q.iter_mut().for_each(|v| *v = -*v);
        q
    }
}

/// Minimizes `f` over the box starting from `x0` (projected if infeasible).
///
/// The objective at accepted iterates never increases, and `f` is only ever
/// evaluated at feasible points.
pub fn minimize<F>(mut f_and_grad: F, x0: &[f64], bx: &BoxConstraint, cfg: &OptimConfig) -> OptimResult
where
    F: FnMut(&[f64]) -> (f64, Vec<f64>),
{
    let mut x = project_box(x0, bx);
    let (mut f, mut g) = f_and_grad(&x);
    let mut evaluations = 1;
    let mut mem = Memory::new(cfg.memory.max(1));
    let mut iterations = 0;

    let termination = loop {
        let pg = projected_gradient_norm(&x, &g, bx);
        if pg <= cfg.tol {
            break Termination::Converged;
        }
        if iterations >= cfg.max_iter {
            break Termination::MaxIter;
        }
        let binding = binding_set(&x, &g, bx);
        let g_free: Vec<f64> = g
            .iter()
            .zip(&binding)
            .map(|(&gi, &b)| if b { 0.0 } else { gi })
            .collect();
        let first_scale = 1.0 / norm_inf(&g_free).max(1.0);

        let mut step = None;
        for use_memory in [true, false] {
            if !use_memory {
                mem.clear();
            } else if mem.pairs.is_empty() {
                continue;
            }
            let mut d = if use_memory {
                mem.direction(&g_free, first_scale)
            } else {
                g_free.iter().map(|v| -v * first_scale).collect()
            };
            d.iter_mut().zip(&binding).filter(|(_, &b)| b).for_each(|(di, _)| *di = 0.0);
            if !(dot(&d, &g_free) < 0.0) {
                continue;
            }
            step = line_search(&mut f_and_grad, &x, f, &g, &d, bx, cfg, &mut evaluations);
            if step.is_some() {
                break;
            }
        }

        let Some((x_new, f_new, g_new)) = step else {
            break Termination::LineSearchFailure;
        };
        debug_assert!(f_new <= f, "objective increased: {f} -> {f_new}");
        let s: Vec<f64> = x_new.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = g_new.iter().zip(&g).map(|(a, b)| a - b).collect();
        mem.push(s, y);
        x = x_new;
        f = f_new;
        g = g_new;
        iterations += 1;
    };

    let final_pg_norm = projected_gradient_norm(&x, &g, bx);
    log::debug!("minimize: {termination:?} after {iterations} iterations, f = {f:e}, pg = {final_pg_norm:e}");
    OptimResult {
        point: x,
        value: f,
        iterations,
        evaluations,
        converged: termination == Termination::Converged,
        final_pg_norm,
        termination,
    }
}

#[allow(clippy::too_many_arguments)]
fn line_search<F>(
    f_and_grad: &mut F,
    x: &[f64],
    f: f64,
    g: &[f64],
    d: &[f64],
    bx: &BoxConstraint,
    cfg: &OptimConfig,
    evaluations: &mut usize,
) -> Option<(Vec<f64>, f64, Vec<f64>)>
where
    F: FnMut(&[f64]) -> (f64, Vec<f64>),
{
    let mut t = 1.0;
    for _ in 0..cfg.ls_max {
        let trial: Vec<f64> = x
            .iter()
            .zip(d)
            .map(|(xi, di)| (xi + t * di).clamp(-bx.radius, bx.radius))
            .collect();
        if trial.as_slice() == x {
            return None;
        }
        let decrease: f64 = g.iter().zip(&trial).zip(x).map(|((gi, a), b)| gi * (a - b)).sum();
        if decrease < 0.0 {
            let (ft, gt) = f_and_grad(&trial);
            *evaluations += 1;
            if ft.is_finite() && ft <= f + cfg.armijo_c1 * decrease {
                return Some((trial, ft, gt));
            }
        }
        t *= 0.5;
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn quad(c: Vec<f64>) -> impl FnMut(&[f64]) -> (f64, Vec<f64>) {
        move |x| {
            let g: Vec<f64> = x.iter().zip(&c).map(|(a, b)| 2.0 * (a - b)).collect();
            (x.iter().zip(&c).map(|(a, b)| (a - b) * (a - b)).sum(), g)
        }
    }

    #[test]
    fn projection_examples() {
        let bx = BoxConstraint::new(1.5);
        assert_eq!(project_box(&[3.0, -0.2], &bx), vec![1.5, -0.2]);
        assert_eq!(project_box(&[0.4, -1.5], &bx), vec![0.4, -1.5]);
        let p = project_box(&[-9.0, 2.0, 0.1], &bx);
        assert_eq!(project_box(&p, &bx), p);
        assert_eq!(project_box(&[1e300], &BoxConstraint::unbounded()), vec![1e300]);
    }

    #[test]
    fn quadratic_inside_box() {
        let bx = BoxConstraint::new(1.5);
        let res = minimize(quad(vec![0.3, -1.0, 1.2]), &[0.0; 3], &bx, &OptimConfig::default());
        assert!(res.converged);
        assert!(res.final_pg_norm <= 1e-7);
        for (a, b) in res.point.iter().zip([0.3, -1.0, 1.2]) {
            assert!((a - b).abs() < 1e-7);
        }
    }

    #[test]
    fn quadratic_outside_box() {
        let bx = BoxConstraint::new(1.5);
        let c = vec![3.0, -0.2, -7.0];
        let res = minimize(quad(c.clone()), &[5.0, 5.0, 5.0], &bx, &OptimConfig::default());
        assert!(res.converged, "{res:?}");
        let want = project_box(&c, &bx);
        for (a, b) in res.point.iter().zip(&want) {
            assert!((a - b).abs() < 1e-7);
        }
    }

    #[test]
    fn rosenbrock_unconstrained() {
        let f = |x: &[f64]| {
            let (a, b) = (x[0], x[1]);
            let v = (1.0 - a).powi(2) + 100.0 * (b - a * a).powi(2);
            let g = vec![-2.0 * (1.0 - a) - 400.0 * a * (b - a * a), 200.0 * (b - a * a)];
            (v, g)
        };
        let cfg = OptimConfig {
            max_iter: 2000,
            tol: 1e-9,
            ..OptimConfig::default()
        };
        let res = minimize(f, &[-1.2, 1.0], &BoxConstraint::unbounded(), &cfg);
        assert!(res.converged, "{res:?}");
        assert!((res.point[0] - 1.0).abs() < 1e-6 && (res.point[1] - 1.0).abs() < 1e-6);
    }

    #[test]
    fn rosenbrock_with_active_bound() {
        // optimum on the face x0 = 0.5: x1 = 0.25
        let f = |x: &[f64]| {
            let (a, b) = (x[0], x[1]);
            let v = (1.0 - a).powi(2) + 100.0 * (b - a * a).powi(2);
            let g = vec![-2.0 * (1.0 - a) - 400.0 * a * (b - a * a), 200.0 * (b - a * a)];
            (v, g)
        };
        let cfg = OptimConfig {
            max_iter: 2000,
            tol: 1e-9,
            ..OptimConfig::default()
        };
        let res = minimize(f, &[-0.3, 0.4], &BoxConstraint::new(0.5), &cfg);
        assert!(res.converged, "{res:?}");
        assert!((res.point[0] - 0.5).abs() < 1e-12);
        assert!((res.point[1] - 0.25).abs() < 1e-7);
    }

    #[test]
    fn nonsmooth_objective_stops_gracefully() {
        // |x| has no usable curvature at 0; the run must still end feasibly
        let f = |x: &[f64]| (x[0].abs() + 0.1, vec![if x[0] >= 0.0 { 1.0 } else { -1.0 }]);
        let res = minimize(f, &[0.7], &BoxConstraint::new(1.0), &OptimConfig::default());
        assert!(!res.converged);
        assert!(res.value <= 0.8);
        assert!(res.point[0].abs() <= 1.0);
    }

    proptest! {
        #[test]
        fn iterates_feasible_and_descending(
            c in proptest::collection::vec(-4.0f64..4.0, 1..6),
            scales in proptest::collection::vec(0.1f64..10.0, 6),
            r in 0.2f64..2.0,
        ) {
            let bx = BoxConstraint::new(r);
            let n = c.len();
            let mut values: Vec<f64> = Vec::new();
            let mut feasible = true;
            let res = minimize(
                |x: &[f64]| {
                    feasible &= bx.contains(x);
                    let v: f64 = (0..n).map(|i| scales[i] * (x[i] - c[i]).powi(2)).sum();
                    values.push(v);
                    (v, (0..n).map(|i| 2.0 * scales[i] * (x[i] - c[i])).collect())
                },
                &vec![3.0; n],
                &bx,
                &OptimConfig::default(),
            );
            prop_assert!(feasible);
            prop_assert!(bx.contains(&res.point));
            prop_assert!(res.converged);
            for (p, ci) in res.point.iter().zip(&c) {
                prop_assert!((p - ci.clamp(-r, r)).abs() < 1e-6);
            }
            prop_assert!(res.value <= values[0]);
        }
    }
}
