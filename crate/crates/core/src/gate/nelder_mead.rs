//! Derivative-free simplex minimisation with box constraints.
//!
//! Bounds are enforced by projection: the cost is always evaluated at the
//! clamped point and the returned minimiser lies inside the box.

#[derive(Debug, Clone, Copy)]
pub struct Options {
    pub max_evals: usize,
    /// Simplex diameter (per coordinate, relative to `1 + |x|`) below which
    /// the search stops.
    pub x_tol: f64,
    /// Spread of simplex values below which the search stops.
    pub f_tol: f64,
}

impl Default for Options {
    fn default() -> Self {
        Self {
            max_evals: 4000,
            x_tol: 1e-11,
            f_tol: 1e-18,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub value: f64,
    pub evals: usize,
}

fn clamp(x: &mut [f64], bounds: &[(f64, f64)]) {
    for (v, (lo, hi)) in x.iter_mut().zip(bounds) {
        *v = v.clamp(*lo, *hi);
    }
}

pub fn minimize<F>(f: F, x0: &[f64], steps: &[f64], bounds: &[(f64, f64)], opts: Options) -> Minimum
where
    F: Fn(&[f64]) -> f64,
{
    let n = x0.len();
    let evals = std::cell::Cell::new(0usize);
    let eval = |x: &mut Vec<f64>| {
        clamp(x, bounds);
        evals.set(evals.get() + 1);
        let v = f(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };

    if n == 0 {
        let mut x = x0.to_vec();
        let value = eval(&mut x);
        return Minimum {
            x,
            value,
            evals: evals.get(),
        };
    }

    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
    let mut start = x0.to_vec();
    let v0 = eval(&mut start);
    simplex.push((start.clone(), v0));
    for i in 0..n {
        let mut x = start.clone();
        x[i] += steps[i];
        if (x[i] - start[i]).abs() < 1e-15 || x[i] > bounds[i].1 {
            x[i] = start[i] - steps[i];
        }
        let v = eval(&mut x);
        simplex.push((x, v));
    }

    while evals.get() < opts.max_evals {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let best = simplex[0].1;
        let worst = simplex[n].1;
        let spread = simplex
            .iter()
            .skip(1)
            .map(|(x, _)| {
                x.iter()
                    .zip(&simplex[0].0)
                    .map(|(a, b)| (a - b).abs() / (1.0 + b.abs()))
                    .fold(0.0, f64::max)
            })
            .fold(0.0, f64::max);
        if spread < opts.x_tol || (worst - best).abs() < opts.f_tol {
            break;
        }

        let centroid: Vec<f64> = (0..n)
            .map(|j| simplex[..n].iter().map(|(x, _)| x[j]).sum::<f64>() / n as f64)
            .collect();
        let toward = |coef: f64| -> Vec<f64> {
            centroid
                .iter()
                .zip(&simplex[n].0)
                .map(|(c, w)| c + coef * (c - w))
                .collect()
        };

        let mut reflected = toward(1.0);
        let fr = eval(&mut reflected);
        if fr < simplex[0].1 {
            let mut expanded = toward(2.0);
            let fe = eval(&mut expanded);
            simplex[n] = if fe < fr { (expanded, fe) } else { (reflected, fr) };
            continue;
        }
        if fr < simplex[n - 1].1 {
            simplex[n] = (reflected, fr);
            continue;
        }
        let (mut contracted, outside) = if fr < simplex[n].1 {
            (toward(0.5), true)
        } else {
            (toward(-0.5), false)
        };
        let fc = eval(&mut contracted);
        if (outside && fc <= fr) || (!outside && fc < simplex[n].1) {
            simplex[n] = (contracted, fc);
            continue;
        }
        let anchor = simplex[0].0.clone();
        for vertex in simplex.iter_mut().skip(1) {
            let mut x: Vec<f64> = anchor.iter().zip(&vertex.0).map(|(a, v)| a + 0.5 * (v - a)).collect();
            let v = eval(&mut x);
            *vertex = (x, v);
        }
    }

    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    let (x, value) = simplex.swap_remove(0);
    Minimum {
        x,
        value,
        evals: evals.get(),
    }
}
