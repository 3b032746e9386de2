//! Nelder–Mead minimisation for the handful of collapse parameters.

pub(crate) struct NelderMead {
    pub max_iter: usize,
    pub f_tol: f64,
    pub x_tol: f64,
}

impl Default for NelderMead {
    fn default() -> Self {
        Self { max_iter: 2000, f_tol: 1e-14, x_tol: 1e-10 }
    }
}

impl NelderMead {
    /// Minimises `f` from `start` with initial edge lengths `steps`.
    /// Returns the best point, its value and the number of evaluations.
    pub fn minimize<F: Fn(&[f64]) -> f64>(
        &self,
        f: F,
        start: &[f64],
        steps: &[f64],
    ) -> (Vec<f64>, f64, usize) {
        let dim = start.len();
        if dim == 0 {
            return (vec![], f(start), 1);
        }
        let mut evals = 0;
        let mut eval = |x: &[f64]| {
            evals += 1;
            let v = f(x);
            if v.is_nan() {
                f64::INFINITY
            } else {
                v
            }
        };
        let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(dim + 1);
        simplex.push((start.to_vec(), eval(start)));
        for d in 0..dim {
            let mut x = start.to_vec();
            x[d] += steps[d];
            let v = eval(&x);
            simplex.push((x, v));
        }

        for _ in 0..self.max_iter {
            simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
            let best = simplex[0].1;
            let worst = simplex[dim].1;
            let spread = simplex
                .iter()
                .flat_map(|(x, _)| x.iter().zip(&simplex[0].0).map(|(a, b)| (a - b).abs()))
                .fold(0.0, f64::max);
            if ((worst - best).abs() <= self.f_tol && best.is_finite()) || spread <= self.x_tol {
                break;
            }
            let centroid: Vec<f64> = (0..dim)
                .map(|d| simplex[..dim].iter().map(|(x, _)| x[d]).sum::<f64>() / dim as f64)
                .collect();
            let along = |t: f64| -> Vec<f64> {
                centroid.iter().zip(&simplex[dim].0).map(|(c, w)| c + t * (w - c)).collect()
            };
            let reflected = along(-1.0);
            let fr = eval(&reflected);
            if fr < simplex[0].1 {
                let expanded = along(-2.0);
                let fe = eval(&expanded);
                simplex[dim] = if fe < fr { (expanded, fe) } else { (reflected, fr) };
            } else if fr < simplex[dim - 1].1 {
                simplex[dim] = (reflected, fr);
            } else {
                let (contracted, fc) = if fr < worst {
                    let c = along(-0.5);
                    let v = eval(&c);
                    (c, v)
                } else {
                    let c = along(0.5);
                    let v = eval(&c);
                    (c, v)
                };
                if fc < worst.min(fr) {
                    simplex[dim] = (contracted, fc);
                } else {
                    let anchor = simplex[0].0.clone();
                    for entry in simplex.iter_mut().skip(1) {
                        let x: Vec<f64> =
                            anchor.iter().zip(&entry.0).map(|(a, x)| a + 0.5 * (x - a)).collect();
                        let v = eval(&x);
                        *entry = (x, v);
                    }
                }
            }
        }
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let (x, v) = simplex.swap_remove(0);
        (x, v, evals)
    }
}
