//! Small local optimizers: box-constrained Levenberg–Marquardt with a
//! central finite-difference Jacobian, and Nelder–Mead for the
//! derivative-free refinement of sampled constants.

use nalgebra::Cholesky;

use crate::interval::{inf_norm, BoxRegion, Mat, Vector};

#[derive(Debug, Clone, Copy)]
pub struct LmOptions {
    pub max_iters: usize,
    /// Stop once `‖r(x)‖∞ <= tol`.
    pub tol: f64,
    /// Relative finite-difference step.
    pub fd_step: f64,
}

impl Default for LmOptions {
    fn default() -> Self {
        Self {
            max_iters: 100,
            tol: 1e-13,
            fd_step: 1e-6,
        }
    }
}

#[derive(Debug, Clone)]
pub struct LmOutcome {
    pub x: Vector,
    pub residual: f64,
    pub iterations: usize,
}

pub fn fd_jacobian<R>(resid: &R, x: &Vector, rel: f64) -> Mat
where
    R: Fn(&Vector) -> Vector + ?Sized,
{
    let n = x.len();
    let mut cols = Vec::with_capacity(n);
    for j in 0..n {
        let h = rel * x[j].abs().max(1.0);
        let mut xp = x.clone();
        let mut xm = x.clone();
        xp[j] += h;
        xm[j] -= h;
        cols.push((resid(&xp) - resid(&xm)) / (2.0 * h));
    }
    Mat::from_columns(&cols)
}

/// Minimizes `½‖r(x)‖²` over `region`, projecting every trial step back
/// into the box.
pub fn levenberg_marquardt_box<R>(
    resid: &R,
    x0: &Vector,
    region: &BoxRegion,
    opts: &LmOptions,
) -> LmOutcome
where
    R: Fn(&Vector) -> Vector + ?Sized,
{
    let mut x = region.clamp(x0);
    let mut r = resid(&x);
    let mut cost = 0.5 * r.norm_squared();
    let mut mu: Option<f64> = None;
    let mut iterations = 0;

    while iterations < opts.max_iters && inf_norm(&r) > opts.tol {
        iterations += 1;
        let j = fd_jacobian(resid, &x, opts.fd_step);
        let g = j.transpose() * &r;
        let jtj = j.transpose() * &j;
        let dmax = jtj.diagonal().max().max(1e-300);
        let damp = jtj.diagonal().map(|d| d.max(1e-12 * dmax));
        let mut lambda = *mu.get_or_insert(1e-3);

        let mut accepted = false;
        let mut stalled = false;
        while lambda < 1e20 {
            let mut lhs = jtj.clone();
            for i in 0..lhs.nrows() {
                lhs[(i, i)] += lambda * damp[i];
            }
            let step = match Cholesky::new(lhs.clone()) {
                Some(ch) => ch.solve(&(-&g)),
                None => match lhs.lu().solve(&(-&g)) {
                    Some(s) => s,
                    None => {
                        lambda *= 10.0;
                        continue;
                    }
                },
            };
            let x_new = region.clamp(&(&x + &step));
            let moved = inf_norm(&(&x_new - &x));
            if moved <= 1e-16 * (1.0 + inf_norm(&x)) {
                stalled = true;
                break;
            }
            let r_new = resid(&x_new);
            let cost_new = 0.5 * r_new.norm_squared();
            if cost_new < cost {
                x = x_new;
                r = r_new;
                cost = cost_new;
                lambda = (lambda * 0.3).max(1e-20);
                accepted = true;
                break;
            }
            lambda *= 10.0;
        }
        mu = Some(lambda);
        if !accepted || stalled {
            break;
        }
    }
    LmOutcome {
        residual: inf_norm(&r),
        x,
        iterations,
    }
}

/// Plain Nelder–Mead minimization from `x0` with an axis-aligned initial
/// simplex of edge `scale`. Returns the best vertex and its value.
pub fn nelder_mead<F>(f: &F, x0: &Vector, scale: f64, max_iters: usize, ftol: f64) -> (Vector, f64)
where
    F: Fn(&Vector) -> f64 + ?Sized,
{
    let n = x0.len();
    let mut simplex: Vec<(Vector, f64)> = Vec::with_capacity(n + 1);
    simplex.push((x0.clone(), f(x0)));
    for i in 0..n {
        let mut v = x0.clone();
        v[i] += scale;
        let fv = f(&v);
        simplex.push((v, fv));
    }

    for _ in 0..max_iters {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let (best, worst) = (simplex[0].1, simplex[n].1);
        if (worst - best).abs() <= ftol * (1.0 + best.abs()) && worst.is_finite() {
            break;
        }
        let centroid = simplex[..n]
            .iter()
            .fold(Vector::zeros(n), |acc, (v, _)| acc + v)
            / n as f64;
        let xw = simplex[n].0.clone();
        let reflect = &centroid + (&centroid - &xw);
        let fr = f(&reflect);
        if fr < simplex[0].1 {
            let expand = &centroid + (&centroid - &xw) * 2.0;
            let fe = f(&expand);
            simplex[n] = if fe < fr { (expand, fe) } else { (reflect, fr) };
        } else if fr < simplex[n - 1].1 {
            simplex[n] = (reflect, fr);
        } else {
            let contract = if fr < simplex[n].1 {
                &centroid + (&reflect - &centroid) * 0.5
            } else {
                &centroid + (&xw - &centroid) * 0.5
            };
            let fc = f(&contract);
            if fc < simplex[n].1.min(fr) {
                simplex[n] = (contract, fc);
            } else {
                let x_best = simplex[0].0.clone();
                for entry in simplex.iter_mut().skip(1) {
                    let v = &x_best + (&entry.0 - &x_best) * 0.5;
                    let fv = f(&v);
                    *entry = (v, fv);
                }
            }
        }
    }
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    let (x, fx) = simplex.swap_remove(0);
    (x, fx)
}
