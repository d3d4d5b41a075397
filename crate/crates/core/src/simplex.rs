//! Box-constrained Nelder-Mead minimization.
//!
//! Trial points are projected onto the box, so a minimizer lying on a bound
//! (e.g. `kappa = 0`) is reached exactly rather than approached
//! asymptotically.

#[derive(Debug, Clone, Copy)]
pub struct SimplexConfig<const N: usize> {
    pub lower: [f64; N],
    pub upper: [f64; N],
    /// Initial edge lengths.
    pub step: [f64; N],
    /// Spread of objective values across the simplex.
    pub f_tol: f64,
    /// Max-norm distance of every vertex from the best one.
    pub x_tol: f64,
    pub max_iter: usize,
    /// Fresh-simplex restarts from the incumbent after convergence.
    pub restarts: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimplexOutcome<const N: usize> {
    pub x: [f64; N],
    pub value: f64,
    pub iterations: usize,
    pub converged: bool,
}

pub fn minimize<const N: usize, F>(f: F, start: [f64; N], cfg: &SimplexConfig<N>) -> SimplexOutcome<N>
where
    F: Fn(&[f64; N]) -> f64,
{
    let eval = |x: &[f64; N]| {
        let v = f(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };
    let mut best = project(start, cfg);
    let mut best_val = eval(&best);
    let mut iterations = 0;
    let mut converged = false;
    let mut scale = 1.0;

    for round in 0..=cfg.restarts {
        let run = run_simplex(&eval, best, best_val, cfg, scale, cfg.max_iter - iterations.min(cfg.max_iter));
        iterations += run.iterations;
        let improved = best_val - run.value;
        if run.value <= best_val {
            best = run.x;
            best_val = run.value;
        }
        converged = run.converged;
        if !run.converged || iterations >= cfg.max_iter {
            break;
        }
        // A restart that finds nothing new confirms the optimum.
        if round > 0 && !(improved > cfg.f_tol) {
            break;
        }
        scale *= 0.5;
    }

    SimplexOutcome {
        x: best,
        value: best_val,
        iterations,
        converged,
    }
}

fn project<const N: usize>(mut x: [f64; N], cfg: &SimplexConfig<N>) -> [f64; N] {
    for i in 0..N {
        x[i] = x[i].clamp(cfg.lower[i], cfg.upper[i]);
    }
    x
}

fn run_simplex<const N: usize, F>(
    eval: &F,
    x0: [f64; N],
    f0: f64,
    cfg: &SimplexConfig<N>,
    scale: f64,
    budget: usize,
) -> SimplexOutcome<N>
where
    F: Fn(&[f64; N]) -> f64,
{
    let mut pts: Vec<([f64; N], f64)> = Vec::with_capacity(N + 1);
    pts.push((x0, f0));
    for i in 0..N {
        let mut x = x0;
        let h = cfg.step[i] * scale;
        x[i] = if x0[i] + h <= cfg.upper[i] { x0[i] + h } else { x0[i] - h };
        let x = project(x, cfg);
        pts.push((x, eval(&x)));
    }

    let mut iterations = 0;
    loop {
        pts.sort_by(|a, b| a.1.total_cmp(&b.1));
        let (best, fbest) = pts[0];
        let fworst = pts[N].1;
        let spread = if fworst.is_finite() { fworst - fbest } else { f64::INFINITY };
        let size = pts[1..]
            .iter()
            .flat_map(|(x, _)| x.iter().zip(best.iter()).map(|(a, b)| (a - b).abs()))
            .fold(0.0, f64::max);
        if spread <= cfg.f_tol && size <= cfg.x_tol {
            return SimplexOutcome { x: best, value: fbest, iterations, converged: true };
        }
        if iterations >= budget {
            return SimplexOutcome { x: best, value: fbest, iterations, converged: false };
        }
        iterations += 1;

        let mut centroid = [0.0; N];
        for (x, _) in &pts[..N] {
            for i in 0..N {
                centroid[i] += x[i] / N as f64;
            }
        }
        let along = |t: f64| {
            let mut y = [0.0; N];
            for i in 0..N {
                y[i] = centroid[i] + t * (pts[N].0[i] - centroid[i]);
            }
            project(y, cfg)
        };

        let xr = along(-1.0);
        let fr = eval(&xr);
        if fr < pts[0].1 {
            let xe = along(-2.0);
            let fe = eval(&xe);
            pts[N] = if fe < fr { (xe, fe) } else { (xr, fr) };
            continue;
        }
        if fr < pts[N - 1].1 {
            pts[N] = (xr, fr);
            continue;
        }
        let (xc, fc) = if fr < pts[N].1 {
            let xc = along(-0.5);
            (xc, eval(&xc))
        } else {
            let xc = along(0.5);
            (xc, eval(&xc))
        };
        if fc < pts[N].1.min(fr) {
            pts[N] = (xc, fc);
            continue;
        }
        // shrink toward the best vertex
        let x_best = pts[0].0;
        for (x, fx) in pts.iter_mut().skip(1) {
            for i in 0..N {
                x[i] = x_best[i] + 0.5 * (x[i] - x_best[i]);
            }
            *fx = eval(x);
        }
    }
}
