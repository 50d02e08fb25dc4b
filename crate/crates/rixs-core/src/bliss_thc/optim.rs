//! Small deterministic optimizers used by the tensor-hypercontraction fit:
//! Adam for the rough phase and L-BFGS with Armijo backtracking for polish.

pub struct AdamOptions {
    pub iters: usize,
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl Default for AdamOptions {
    fn default() -> Self {
        AdamOptions {
            iters: 500,
            lr: 0.02,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }
}

/// Runs Adam on `f`, which writes the gradient into its second argument and
/// returns the cost. Returns the best-seen point and its cost.
pub fn adam_minimize<F>(mut f: F, x0: Vec<f64>, opts: &AdamOptions) -> (Vec<f64>, f64)
where
    F: FnMut(&[f64], &mut [f64]) -> f64,
{
    let n = x0.len();
    let mut x = x0;
    let mut m = vec![0.0; n];
    let mut v = vec![0.0; n];
    let mut grad = vec![0.0; n];
    let mut best_x = x.clone();
    let mut best_f = f(&x, &mut grad);
    for t in 1..=opts.iters {
        let cost = f(&x, &mut grad);
        if cost < best_f {
            best_f = cost;
            best_x.copy_from_slice(&x);
        }
        let b1t = 1.0 - opts.beta1.powi(t as i32);
        let b2t = 1.0 - opts.beta2.powi(t as i32);
        for i in 0..n {
            m[i] = opts.beta1 * m[i] + (1.0 - opts.beta1) * grad[i];
            v[i] = opts.beta2 * v[i] + (1.0 - opts.beta2) * grad[i] * grad[i];
            let mh = m[i] / b1t;
            let vh = v[i] / b2t;
            x[i] -= opts.lr * mh / (vh.sqrt() + opts.eps);
        }
    }
    let cost = f(&x, &mut grad);
    if cost < best_f {
        best_f = cost;
        best_x.copy_from_slice(&x);
    }
    (best_x, best_f)
}

pub struct LbfgsOptions {
    pub max_iters: usize,
    pub memory: usize,
    pub grad_tol: f64,
    pub f_tol: f64,
}

impl Default for LbfgsOptions {
    fn default() -> Self {
        LbfgsOptions {
            max_iters: 200,
            memory: 10,
            grad_tol: 1e-14,
            f_tol: 1e-14,
        }
    }
}

/// Limited-memory BFGS with Armijo backtracking. Suited to the smooth
/// (penalty-free) phases of the fit.
pub fn lbfgs_minimize<F>(mut f: F, x0: Vec<f64>, opts: &LbfgsOptions) -> (Vec<f64>, f64)
where
    F: FnMut(&[f64], &mut [f64]) -> f64,
{
    let n = x0.len();
    let mut x = x0;
    let mut grad = vec![0.0; n];
    let mut cost = f(&x, &mut grad);
    let mut s_list: Vec<Vec<f64>> = Vec::new();
    let mut y_list: Vec<Vec<f64>> = Vec::new();
    let mut rho_list: Vec<f64> = Vec::new();

    for _ in 0..opts.max_iters {
        let gnorm = grad.iter().map(|g| g * g).sum::<f64>().sqrt();
        if gnorm < opts.grad_tol {
            break;
        }
        // Two-loop recursion.
        let mut dir: Vec<f64> = grad.iter().map(|g| -g).collect();
        let k = s_list.len();
        let mut alphas = vec![0.0; k];
        for i in (0..k).rev() {
            let a = rho_list[i] * dot(&s_list[i], &dir);
            alphas[i] = a;
            axpy(&mut dir, -a, &y_list[i]);
        }
        if k > 0 {
            let last = k - 1;
            let scale = dot(&s_list[last], &y_list[last]) / dot(&y_list[last], &y_list[last]);
            if scale.is_finite() && scale > 0.0 {
                for d in dir.iter_mut() {
                    *d *= scale;
                }
            }
        }
        for i in 0..k {
            let b = rho_list[i] * dot(&y_list[i], &dir);
            axpy(&mut dir, alphas[i] - b, &s_list[i]);
        }
        let mut slope = dot(&grad, &dir);
        if slope >= 0.0 {
            // Fall back to steepest descent.
            for (d, g) in dir.iter_mut().zip(&grad) {
                *d = -g;
            }
            slope = -gnorm * gnorm;
            s_list.clear();
            y_list.clear();
            rho_list.clear();
        }

        // Armijo backtracking.
        let mut step = 1.0;
        let mut new_x = x.clone();
        let mut new_grad = vec![0.0; n];
        let mut new_cost;
        let mut accepted = false;
        for _ in 0..40 {
            for i in 0..n {
                new_x[i] = x[i] + step * dir[i];
            }
            new_cost = f(&new_x, &mut new_grad);
            if new_cost <= cost + 1e-4 * step * slope {
                // Update memory.
                let s: Vec<f64> = new_x.iter().zip(&x).map(|(a, b)| a - b).collect();
                let y: Vec<f64> = new_grad.iter().zip(&grad).map(|(a, b)| a - b).collect();
                let sy = dot(&s, &y);
                if sy > 1e-14 {
                    s_list.push(s);
                    y_list.push(y);
                    rho_list.push(1.0 / sy);
                    if s_list.len() > opts.memory {
                        s_list.remove(0);
                        y_list.remove(0);
                        rho_list.remove(0);
                    }
                }
                let df = cost - new_cost;
                x.copy_from_slice(&new_x);
                grad.copy_from_slice(&new_grad);
                cost = new_cost;
                accepted = true;
                // Relative-progress stop; no absolute floor, so fits can
                // descend to the numerical residual floor.
                if df < opts.f_tol * cost.abs() {
                    return (x, cost);
                }
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    (x, cost)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn axpy(y: &mut [f64], a: f64, x: &[f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}
