use std::fmt::Write;

use bregman_tweedie::extended::DomainSpec;
use bregman_tweedie::legendre::{is_legendre_type, phi_domain, psi_domain};
use bregman_tweedie::losses::margin_limit;
use bregman_tweedie::{
    bregman_div, bt_loss, bt_loss_grad, classify_rational, domain_exp, domain_ln, make_spec, BaseFunction, BaseKind,
    BranchChoice, LossMode, MarginLoss, Rational,
};

use crate::args::{BaseArg, DivergenceTableArgs, DomainInfoArgs, LossTableArgs};
use crate::learn::build_loss;
use crate::{emit, CmdResult, Failure};

fn grid(lo: f64, hi: f64, steps: usize) -> Result<Vec<f64>, Failure> {
    if steps == 0 || !lo.is_finite() || !hi.is_finite() || lo > hi {
        return Err(Failure::usage(format!("bad grid [{lo}, {hi}] with {steps} steps")));
    }
    if steps == 1 {
        return Ok(vec![lo]);
    }
    let h = (hi - lo) / (steps - 1) as f64;
    Ok((0..steps).map(|i| if i + 1 == steps { hi } else { lo + h * i as f64 }).collect())
}

pub fn loss_table(a: &LossTableArgs) -> CmdResult {
    let loss = build_loss(&a.loss)?;
    let mut s = String::from("m,loss,grad\n");
    for m in grid(a.m_min, a.m_max, a.steps)? {
        let (value, grad) = match &loss {
            MarginLoss::BregmanTweedie(spec) => (bt_loss(spec, m), bt_loss_grad(spec, m).ok()),
            MarginLoss::HigherOrderHinge { .. } => (loss.value(m), Some(loss.slope(m))),
        };
        let g = grad.map(|g| g.to_string()).unwrap_or_default();
        let _ = writeln!(s, "{m},{value},{g}");
    }
    if let MarginLoss::BregmanTweedie(spec) = &loss {
        log::info!(
            "alpha = {}, c = {}, c_alpha = {}, gradient defined for m < {}",
            spec.alpha,
            spec.c,
            spec.c_alpha,
            margin_limit(spec)
        );
    }
    emit(a.out.as_deref(), &s)
}

pub fn divergence_table(a: &DivergenceTableArgs) -> CmdResult {
    let kind = match a.base {
        BaseArg::Psi => BaseKind::Psi,
        BaseArg::Phi => BaseKind::Phi,
    };
    let base = BaseFunction::new(kind, a.alpha, a.branch.into()).map_err(Failure::usage)?;
    if !base.domain().contains_interior(a.y) {
        return Err(Failure::usage(format!("y = {} is not interior to {}", a.y, pretty(base.domain()))));
    }
    let mut s = String::from("x,divergence\n");
    for x in grid(a.x_min, a.x_max, a.steps)? {
        let d = bregman_div(&base, x, a.y).map(|d| d.to_string()).unwrap_or_default();
        let _ = writeln!(s, "{x},{d}");
    }
    emit(a.out.as_deref(), &s)
}

/// Domain names with blackboard-bold R.
fn pretty(d: DomainSpec) -> String {
    let s = d.to_string();
    match s.strip_prefix('R') {
        Some(rest) => format!("ℝ{rest}"),
        None => s,
    }
}

/// One domain, or both half-lines when the branch matters.
fn both(f: impl Fn(BranchChoice) -> DomainSpec) -> String {
    let p = f(BranchChoice::Positive);
    let n = f(BranchChoice::Negative);
    if p == n {
        pretty(p)
    } else {
        format!("{} or {} (branch)", pretty(p), pretty(n))
    }
}

fn category(q: Rational) -> String {
    format!("ℝ{}", &classify_rational(q).symbol()[1..])
}

pub fn domain_info(a: &DomainInfoArgs) -> CmdResult {
    let alpha = a.alpha;
    let one_minus = Rational::ONE - alpha;
    let mut s = String::new();
    let _ = writeln!(s, "α = {alpha}");
    let _ = writeln!(s, "α ∈ {}, 1 − α ∈ {}", category(alpha), category(one_minus));
    let _ = writeln!(s, "dom exp_α = {}", both(|b| domain_exp(alpha, false, b)));
    let _ = writeln!(s, "dom ln_α = {}", both(|b| domain_ln(alpha, false, b)));
    let _ = writeln!(s, "reduced dom exp_α = {}", both(|b| domain_exp(alpha, true, b)));
    let _ = writeln!(s, "reduced dom ln_α = {}", both(|b| domain_ln(alpha, true, b)));
    let _ = writeln!(s, "dom Ψ = {}", both(|b| psi_domain(alpha, b)));
    let _ = writeln!(s, "dom Φ = {}", both(|b| phi_domain(alpha, b)));
    let legendre = is_legendre_type(alpha);
    let _ = writeln!(s, "Ψ, Φ of Legendre type: {}", if legendre { "yes" } else { "no" });
    if alpha.is_one() {
        let _ = writeln!(s, "c_α: none (α = 1 shifts by ln c)");
    } else {
        let _ = writeln!(s, "c_α = c^({one_minus})/({})", alpha - Rational::ONE);
    }
    match make_spec(alpha, LossMode::LBregman, None) {
        Ok(l) if !l.is_logistic() => {
            let _ = writeln!(s, "loss family: supported; L-Bregman c = 1, c_α = {}, gradient for m < {}", l.c_alpha, margin_limit(&l));
            if let Ok(h) = make_spec(alpha, LossMode::HBregman, None) {
                let _ = writeln!(s, "loss family: H-Bregman c = {}, c_α = -1, gradient for m < 2", h.c);
            }
        }
        Ok(_) => {
            let _ = writeln!(s, "loss family: supported (logistic)");
        }
        Err(_) => {
            let _ = writeln!(
                s,
                "warning: α = {alpha} ∈ {} is outside the supported loss family {{0, 1}} ∪ ((0, 1) ∩ ℝe)",
                category(alpha)
            );
        }
    }
    emit(None, &s)
}
