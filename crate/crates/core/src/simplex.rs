//! Derivative-free Nelder–Mead minimization with restarts.

/// Outcome of one local search.
#[derive(Clone, Debug)]
pub struct SimplexOutcome {
    pub x: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    pub evaluations: usize,
    pub converged: bool,
    /// Best value after every iteration; non-increasing.
    pub trace: Vec<f64>,
}

#[derive(Clone, Copy, Debug)]
pub struct SimplexSettings {
    pub step: f64,
    pub tol: f64,
    pub max_iters: usize,
    /// Known lower bound of the objective; the search stops once reached.
    pub floor: Option<f64>,
    pub max_restarts: usize,
}

const REFLECT: f64 = 1.0;
const EXPAND: f64 = 2.0;
const CONTRACT: f64 = 0.5;
const SHRINK: f64 = 0.5;

/// Minimizes `f` from `x0`. Each time the simplex collapses (value spread at
/// most `tol`) it is rebuilt around the best point; the search ends when a
/// restart gains less than `tol`, the floor is hit, or the budget runs out.
pub fn minimize<E>(
    mut f: impl FnMut(&[f64]) -> Result<f64, E>,
    x0: &[f64],
    settings: &SimplexSettings,
) -> Result<SimplexOutcome, E> {
    let dim = x0.len();
    let mut evaluations = 0usize;
    let mut eval = |x: &[f64], evaluations: &mut usize| -> Result<f64, E> {
        *evaluations += 1;
        let v = f(x)?;
        Ok(if v.is_nan() { f64::INFINITY } else { v })
    };
    let at_floor = |v: f64| settings.floor.is_some_and(|fl| v <= fl);

    let mut best_x = x0.to_vec();
    let mut best_v = eval(x0, &mut evaluations)?;
    let mut trace = Vec::new();
    let mut iterations = 0usize;
    let mut converged = false;

    if at_floor(best_v) || dim == 0 {
        return Ok(SimplexOutcome {
            x: best_x,
            value: best_v,
            iterations,
            evaluations,
            converged: true,
            trace,
        });
    }

    let mut restarts = 0usize;
    'outer: loop {
        let restart_start = best_v;
        let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(dim + 1);
        simplex.push((best_x.clone(), best_v));
        for k in 0..dim {
            let mut x = best_x.clone();
            x[k] += settings.step;
            let v = eval(&x, &mut evaluations)?;
            simplex.push((x, v));
        }

        loop {
            simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
            if simplex[0].1 < best_v {
                best_v = simplex[0].1;
                best_x = simplex[0].0.clone();
            }
            if at_floor(best_v) {
                converged = true;
                break 'outer;
            }
            let spread = simplex[dim].1 - simplex[0].1;
            if spread <= settings.tol {
                break;
            }
            if iterations >= settings.max_iters {
                break 'outer;
            }
            iterations += 1;

            let mut centroid = vec![0.0; dim];
            for (x, _) in &simplex[..dim] {
                for (c, xi) in centroid.iter_mut().zip(x) {
                    *c += xi / dim as f64;
                }
            }
            let worst = simplex[dim].clone();
            let towards = |t: f64| -> Vec<f64> {
                centroid.iter().zip(&worst.0).map(|(c, w)| c + t * (c - w)).collect()
            };

            let xr = towards(REFLECT);
            let vr = eval(&xr, &mut evaluations)?;
            if vr < simplex[0].1 {
                let xe = towards(REFLECT * EXPAND);
                let ve = eval(&xe, &mut evaluations)?;
                simplex[dim] = if ve < vr { (xe, ve) } else { (xr, vr) };
            } else if vr < simplex[dim - 1].1 {
                simplex[dim] = (xr, vr);
            } else {
                let (xc, vc) = if vr < worst.1 {
                    let xc = towards(REFLECT * CONTRACT);
                    let vc = eval(&xc, &mut evaluations)?;
                    (xc, vc)
                } else {
                    let xc = towards(-CONTRACT);
                    let vc = eval(&xc, &mut evaluations)?;
                    (xc, vc)
                };
                if vc < worst.1.min(vr) {
                    simplex[dim] = (xc, vc);
                } else {
                    let anchor = simplex[0].0.clone();
                    for vertex in simplex.iter_mut().skip(1) {
                        let x: Vec<f64> = anchor
                            .iter()
                            .zip(&vertex.0)
                            .map(|(a, v)| a + SHRINK * (v - a))
                            .collect();
                        let v = eval(&x, &mut evaluations)?;
                        *vertex = (x, v);
                    }
                }
            }
            let current = simplex.iter().map(|s| s.1).fold(f64::INFINITY, f64::min);
            trace.push(current.min(best_v));
        }

        if restart_start - best_v <= settings.tol || restarts >= settings.max_restarts {
            converged = true;
            break;
        }
        restarts += 1;
    }

    if !converged {
        // Budget exhausted: call it converged if the last quarter of the
        // budget improved the best value by no more than `tol`.
        let q = trace.len() * 3 / 4;
        converged = trace.get(q.saturating_sub(1)).is_none_or(|v| v - best_v <= settings.tol);
    }

    Ok(SimplexOutcome { x: best_x, value: best_v, iterations, evaluations, converged, trace })
}
