//! Derivative-free Nelder-Mead simplex minimization.

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NelderMeadOptions {
    /// Edge length of the initial simplex along each coordinate.
    pub initial_step: f64,
    pub max_evaluations: usize,
    /// Stop once the spread of simplex values falls below this.
    pub f_tolerance: f64,
    /// ...and the simplex diameter falls below this.
    pub x_tolerance: f64,
}

impl Default for NelderMeadOptions {
    fn default() -> Self {
        Self { initial_step: 0.5, max_evaluations: 20_000, f_tolerance: 1e-13, x_tolerance: 1e-9 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub value: f64,
    pub evaluations: usize,
    pub converged: bool,
}

/// Minimizes `f` from `x0` with reflection 1, expansion 2, contraction 1/2
/// and shrink 1/2. Deterministic for a deterministic `f`.
pub fn nelder_mead(f: impl Fn(&[f64]) -> f64, x0: &[f64], opts: &NelderMeadOptions) -> Minimum {
    let n = x0.len();
    let count = std::cell::Cell::new(0usize);
    let eval = |x: &[f64]| {
        count.set(count.get() + 1);
        let v = f(x);
        if v.is_nan() { f64::INFINITY } else { v }
    };
    if n == 0 {
        let value = eval(x0);
        return Minimum { x: vec![], value, evaluations: count.get(), converged: true };
    }

    let mut simplex: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
    simplex.push(x0.to_vec());
    for i in 0..n {
        let mut v = x0.to_vec();
        v[i] += opts.initial_step;
        simplex.push(v);
    }
    let mut values: Vec<f64> = simplex.iter().map(|v| eval(v)).collect();
    let mut converged = false;

    let along = |base: &[f64], dir_from: &[f64], t: f64| -> Vec<f64> {
        base.iter().zip(dir_from).map(|(c, w)| c + t * (c - w)).collect()
    };

    while count.get() < opts.max_evaluations {
        let mut order: Vec<usize> = (0..=n).collect();
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
        simplex = order.iter().map(|&i| simplex[i].clone()).collect();
        values = order.iter().map(|&i| values[i]).collect();

        let spread = values[n] - values[0];
        let diameter = simplex[1..]
            .iter()
            .map(|v| v.iter().zip(&simplex[0]).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
            .fold(0.0, f64::max);
        if spread.abs() <= opts.f_tolerance && diameter <= opts.x_tolerance {
            converged = true;
            break;
        }

        let mut centroid = vec![0.0; n];
        for v in &simplex[..n] {
            for (c, x) in centroid.iter_mut().zip(v) {
                *c += x / n as f64;
            }
        }

        let reflected = along(&centroid, &simplex[n], 1.0);
        let fr = eval(&reflected);
        if fr < values[0] {
            let expanded = along(&centroid, &simplex[n], 2.0);
            let fe = eval(&expanded);
            if fe < fr {
                simplex[n] = expanded;
                values[n] = fe;
            } else {
                simplex[n] = reflected;
                values[n] = fr;
            }
            continue;
        }
        if fr < values[n - 1] {
            simplex[n] = reflected;
            values[n] = fr;
            continue;
        }
        let (contracted, fc) = if fr < values[n] {
            let c = along(&centroid, &simplex[n], 0.5);
            let fc = eval(&c);
            (c, fc)
        } else {
            let c = along(&centroid, &simplex[n], -0.5);
            let fc = eval(&c);
            (c, fc)
        };
        if fc < values[n].min(fr) {
            simplex[n] = contracted;
            values[n] = fc;
            continue;
        }
        let best = simplex[0].clone();
        for i in 1..=n {
            simplex[i] = simplex[i].iter().zip(&best).map(|(x, b)| b + 0.5 * (x - b)).collect();
            values[i] = eval(&simplex[i]);
        }
    }

    let best = (0..=n).min_by(|&a, &b| values[a].total_cmp(&values[b])).unwrap();
    Minimum { x: simplex[best].clone(), value: values[best], evaluations: count.get(), converged }
}
