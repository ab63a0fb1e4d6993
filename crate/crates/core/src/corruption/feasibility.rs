//! Feasible-outlier attack used in the simulation study.
//!
//! The adversary first finds the best decoy explanation of the authentic data
//! that avoids the true support,
//!
//! ```text
//! θ* = argmin { ‖y^A − X^A_{(Λ*)ᶜ} θ‖₂ : ‖θ‖₁ ≤ ‖β*‖₁ },
//! ```
//!
//! then writes outlier rows whose true-support part pulls toward `−β*` and
//! whose off-support part is exactly explained by `θ*`.

use rand::Rng;
use rand_distr::StandardNormal;

use super::{require_clean, row_attack_start, sign};
use crate::error::{Error, Result};
use crate::model::{dot, norm2, Matrix, RegressionInstance, SupportSet};
use crate::rng::{stream, Purpose};

/// Euclidean projection onto `{θ : ‖θ‖₁ ≤ radius}` by the sorting method.
pub fn project_l1_ball(v: &[f64], radius: f64) -> Vec<f64> {
    if v.iter().map(|x| x.abs()).sum::<f64>() <= radius {
        return v.to_vec();
    }
    if radius <= 0.0 {
        return vec![0.0; v.len()];
    }
    let mut u: Vec<f64> = v.iter().map(|x| x.abs()).collect();
    u.sort_unstable_by(|a, b| b.total_cmp(a));
    let mut cumsum = 0.0;
    let mut shift = 0.0;
    for (j, &uj) in u.iter().enumerate() {
        cumsum += uj;
        let candidate = (cumsum - radius) / (j + 1) as f64;
        if uj - candidate > 0.0 {
            shift = candidate;
        } else {
            break;
        }
    }
    v.iter()
        .map(|&x| x.signum() * (x.abs() - shift).max(0.0))
        .collect()
}

#[derive(Clone, Debug)]
pub struct L1Options {
    pub max_iters: usize,
    /// Stop once the relative objective change between iterates falls below this.
    pub tol: f64,
}

impl Default for L1Options {
    fn default() -> Self {
        Self {
            max_iters: 10_000,
            tol: 1e-8,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct L1Fit {
    pub theta: Vec<f64>,
    /// `‖b − Aθ‖₂` at the returned point.
    pub objective: f64,
    pub iterations: usize,
}

/// `argmin ‖b − Aθ‖₂` over the ℓ₁ ball of the given radius.
///
/// Accelerated projected gradient on `½‖b − Aθ‖²` with backtracking on the
/// step size and a momentum restart whenever the objective goes up.
pub fn l1_constrained_least_squares(
    a: &Matrix,
    b: &[f64],
    radius: f64,
    opts: &L1Options,
) -> Result<L1Fit> {
    if b.len() != a.rows() {
        return Err(Error::DimensionMismatch(format!(
            "A has {} rows but b has {} entries",
            a.rows(),
            b.len()
        )));
    }
    if !(radius >= 0.0 && radius.is_finite()) {
        return Err(Error::InvalidParameter(format!("radius {radius} must be >= 0")));
    }
    let q = a.cols();
    let half_sq = |ax: &[f64]| 0.5 * ax.iter().zip(b).map(|(u, v)| (v - u).powi(2)).sum::<f64>();

    let mut x = vec![0.0; q];
    let mut ax = vec![0.0; a.rows()];
    let mut f_x = half_sq(&ax);
    let mut lip = spectral_norm_sq(a) * 1.01;
    if lip == 0.0 || q == 0 {
        return Ok(L1Fit {
            theta: x,
            objective: (2.0 * f_x).sqrt(),
            iterations: 0,
        });
    }

    let mut yk = x.clone();
    let mut ay = ax.clone();
    let mut t: f64 = 1.0;
    for it in 1..=opts.max_iters {
        let r: Vec<f64> = ay.iter().zip(b).map(|(u, v)| u - v).collect();
        let g = a.tr_matvec(&r);
        let f_y = 0.5 * dot(&r, &r);
        let (x_new, ax_new, f_new) = loop {
            let step: Vec<f64> = yk.iter().zip(&g).map(|(y, gi)| y - gi / lip).collect();
            let cand = project_l1_ball(&step, radius);
            let acand = a.matvec(&cand);
            let f_c = half_sq(&acand);
            let d: Vec<f64> = cand.iter().zip(&yk).map(|(c, y)| c - y).collect();
            let model = f_y + dot(&g, &d) + 0.5 * lip * dot(&d, &d);
            if f_c <= model * (1.0 + 1e-12) + 1e-300 {
                break (cand, acand, f_c);
            }
            lip *= 2.0;
        };

        if f_new > f_x {
            // Momentum overshot: restart from the last accepted point.
            yk.clone_from(&x);
            ay.clone_from(&ax);
            t = 1.0;
            continue;
        }
        let t_new = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
        let mom = (t - 1.0) / t_new;
        for i in 0..q {
            yk[i] = x_new[i] + mom * (x_new[i] - x[i]);
        }
        for i in 0..ay.len() {
            ay[i] = ax_new[i] + mom * (ax_new[i] - ax[i]);
        }
        let change = f_x - f_new;
        x = x_new;
        ax = ax_new;
        t = t_new;
        let done = change <= opts.tol * f_x;
        f_x = f_new;
        if done {
            return Ok(L1Fit {
                theta: x,
                objective: (2.0 * f_x).sqrt(),
                iterations: it,
            });
        }
    }
    Err(Error::NotConverged {
        solver: "l1-constrained least squares",
        iterations: opts.max_iters,
        last: x,
    })
}

/// Largest eigenvalue of `AᵀA` by power iteration.
fn spectral_norm_sq(a: &Matrix) -> f64 {
    let q = a.cols();
    if q == 0 {
        return 0.0;
    }
    let mut v: Vec<f64> = (0..q).map(|j| 1.0 + (j % 7) as f64 * 0.1).collect();
    let mut est = 0.0;
    for _ in 0..30 {
        let nv = norm2(&v);
        if nv == 0.0 {
            return 0.0;
        }
        v.iter_mut().for_each(|x| *x /= nv);
        let w = a.tr_matvec(&a.matvec(&v));
        est = dot(&v, &w);
        v = w;
    }
    est
}

/// `θ*` over the complement columns `(Λ*)ᶜ` (in ascending column order),
/// fit on the authentic rows of a clean instance.
pub fn solve_theta_star(inst: &RegressionInstance) -> Result<Vec<f64>> {
    let cols = SupportSet::new(inst.truth.support().complement(inst.p()), inst.p())?;
    let a = crate::model::submatrix(&inst.x, &inst.authentic_rows, &cols)?;
    let b: Vec<f64> = inst.authentic_rows.iter().map(|&i| inst.y[i]).collect();
    let fit = l1_constrained_least_squares(&a, &b, inst.truth.norm1(), &L1Options::default())?;
    Ok(fit.theta)
}

pub fn attack_feasibility(inst: &RegressionInstance, seed: u64) -> Result<RegressionInstance> {
    require_clean(inst)?;
    if inst.n_outliers() == 0 {
        return row_attack_start(inst, "feasibility");
    }
    let theta = solve_theta_star(inst)?;
    attack_feasibility_with(inst, &theta, seed)
}

/// The attack with a precomputed `θ*` (indexed like `(Λ*)ᶜ`).
pub fn attack_feasibility_with(
    inst: &RegressionInstance,
    theta: &[f64],
    seed: u64,
) -> Result<RegressionInstance> {
    let p = inst.p();
    let support = inst.truth.support();
    let complement = support.complement(p);
    if theta.len() != complement.len() {
        return Err(Error::DimensionMismatch(format!(
            "theta has {} entries for {} off-support columns",
            theta.len(),
            complement.len()
        )));
    }
    let mut out = row_attack_start(inst, "feasibility")?;
    if inst.n_outliers() == 0 {
        return Ok(out);
    }
    if norm2(theta) < 1e-10 {
        return Err(Error::DegenerateAttack("theta* is numerically zero".into()));
    }

    let mut rng = stream(seed, Purpose::Attack);
    let scale = 3.0 / (inst.n() as f64).sqrt();
    let mut b = vec![0.0; complement.len()];
    for i in inst.outlier_rows() {
        let row = out.x.row_mut(i);
        let mut yi = 0.0;
        for (j, &beta) in support.iter().zip(inst.truth.values()) {
            row[j] = scale * sign(&mut rng);
            yi -= row[j] * beta;
        }
        let bt = loop {
            b.iter_mut()
                .for_each(|v| *v = rng.sample::<f64, _>(StandardNormal));
            let bt = dot(&b, theta);
            if bt.abs() > 1e-8 {
                break bt;
            }
        };
        let ratio = yi / bt;
        for (&j, &bj) in complement.iter().zip(&b) {
            row[j] = ratio * bj;
        }
        out.y[i] = yi;
    }
    Ok(out)
}
