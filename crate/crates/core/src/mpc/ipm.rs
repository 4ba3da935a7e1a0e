//! Primal-feasible Mehrotra interior-point method for the horizon program.
//!
//! States are never decision variables: the program is posed in the inputs
//! and slacks, the trajectory comes from forward simulation, and each Newton
//! step is an unconstrained LQ problem solved by a Riccati recursion.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use serde::{Deserialize, Serialize};

use super::problem::HorizonProblem;

const STEP_FRACTION: f64 = 0.99;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolveStatus {
    Optimal,
    MaxIterations,
    InfeasibleNumerics,
}

impl SolveStatus {
    pub fn name(self) -> &'static str {
        match self {
            SolveStatus::Optimal => "optimal",
            SolveStatus::MaxIterations => "max-iterations",
            SolveStatus::InfeasibleNumerics => "infeasible-numerics",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            tolerance: 1e-6,
            max_iterations: 100,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MpcSolution {
    /// Heat flows, kW, index `k * n + j`.
    pub heat_kw: Vec<f64>,
    pub slack: Vec<f64>,
    /// Full objective, EUR.
    pub objective: f64,
    /// Energy cost over the horizon, EUR.
    pub energy_cost: f64,
    pub iterations: usize,
    pub status: SolveStatus,
    /// Scaled stationarity residual at return.
    pub dual_residual: f64,
    /// Complementarity gap relative to the objective.
    pub gap: f64,
}

impl MpcSolution {
    pub fn slack_sum(&self) -> f64 {
        self.slack.iter().sum()
    }
}

/// Inequality multipliers (or constraint values), grouped by constraint kind.
#[derive(Debug, Clone)]
struct Duals {
    /// `u >= 0`
    u: Vec<f64>,
    /// `sum_j u <= heat max`, one per slot
    sum: Vec<f64>,
    /// `T + s >= lower`
    lo: Vec<f64>,
    /// `T - s <= upper`
    hi: Vec<f64>,
    /// `s >= 0`
    s: Vec<f64>,
}

impl Duals {
    fn filled(nv: usize, horizon: usize, v: f64) -> Self {
        Self {
            u: vec![v; nv],
            sum: vec![v; horizon],
            lo: vec![v; nv],
            hi: vec![v; nv],
            s: vec![v; nv],
        }
    }

    fn groups(&self) -> [&[f64]; 5] {
        [&self.u, &self.sum, &self.lo, &self.hi, &self.s]
    }

    fn groups_mut(&mut self) -> [&mut Vec<f64>; 5] {
        [&mut self.u, &mut self.sum, &mut self.lo, &mut self.hi, &mut self.s]
    }

    fn count(&self) -> usize {
        self.groups().iter().map(|g| g.len()).sum()
    }

    fn dot(&self, other: &Duals) -> f64 {
        self.groups()
            .iter()
            .zip(other.groups())
            .map(|(a, b)| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>())
            .sum()
    }

    fn zip_map(&self, other: &Duals, f: impl Fn(f64, f64) -> f64) -> Duals {
        let m = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(&x, &y)| f(x, y)).collect();
        Duals {
            u: m(&self.u, &other.u),
            sum: m(&self.sum, &other.sum),
            lo: m(&self.lo, &other.lo),
            hi: m(&self.hi, &other.hi),
            s: m(&self.s, &other.s),
        }
    }

    /// Largest step in `(0, 1]` keeping `self + alpha * dir` non-negative.
    fn max_step(&self, dir: &Duals) -> f64 {
        let mut alpha: f64 = 1.0;
        for (v, d) in self.groups().iter().zip(dir.groups()) {
            for (&x, &dx) in v.iter().zip(d) {
                if dx < 0.0 {
                    alpha = alpha.min(-x / dx);
                }
            }
        }
        alpha
    }

    fn axpy(&mut self, alpha: f64, dir: &Duals) {
        for (v, d) in self.groups_mut().into_iter().zip(dir.groups()) {
            for (x, &dx) in v.iter_mut().zip(d) {
                *x += alpha * dx;
            }
        }
    }

    fn is_finite(&self) -> bool {
        self.groups().iter().all(|g| g.iter().all(|v| v.is_finite()))
    }
}

struct Direction {
    du: Vec<f64>,
    ds: Vec<f64>,
    /// Constraint-value change `G dz`.
    dg: Duals,
}

/// Newton-system factorization for one set of barrier weights.
struct Factorization {
    n: usize,
    horizon: usize,
    nxi: usize,
    a_aug: DMatrix<f64>,
    b_aug: DMatrix<f64>,
    chol: Vec<Cholesky<f64, Dyn>>,
    gain_l: Vec<DMatrix<f64>>,
    gain_k: Vec<DMatrix<f64>>,
    /// Slack elimination coefficients per `(k, j)`.
    elim_a: Vec<f64>,
    elim_b: Vec<f64>,
}

impl Factorization {
    fn new(p: &HorizonProblem, d: &Duals) -> Option<Self> {
        let n = p.n_rooms;
        let horizon = p.horizon;
        let nx = 2 * n;
        let rate = p.rate_weight > 0.0;
        let nxi = if rate { nx + n } else { nx };

        let mut a_aug = DMatrix::zeros(nxi, nxi);
        let mut b_aug = DMatrix::zeros(nxi, n);
        for j in 0..n {
            a_aug.view_mut((2 * j, 2 * j), (2, 2)).copy_from(&p.a[j]);
            b_aug[(2 * j, j)] = p.b[j][0];
            b_aug[(2 * j + 1, j)] = p.b[j][1];
            if rate {
                b_aug[(nx + j, j)] = 1.0;
            }
        }

        let nv = p.n_vars();
        let mut elim_a = Vec::with_capacity(nv);
        let mut elim_b = Vec::with_capacity(nv);
        let mut q_t = Vec::with_capacity(nv);
        for i in 0..nv {
            let a = d.lo[i] + d.hi[i] + d.s[i];
            let b = d.lo[i] - d.hi[i];
            let c = d.lo[i] + d.hi[i];
            elim_a.push(a);
            elim_b.push(b);
            q_t.push((c - b * b / a).max(0.0));
        }

        let two_rho = 2.0 * p.rate_weight;
        let state_cost = |instant: usize| {
            let mut q = DMatrix::zeros(nxi, nxi);
            for j in 0..n {
                q[(2 * j, 2 * j)] = q_t[(instant - 1) * n + j];
            }
            if rate && instant < horizon {
                for j in 0..n {
                    q[(nx + j, nx + j)] = two_rho;
                }
            }
            q
        };

        let mut chol = Vec::with_capacity(horizon);
        let mut gain_l = Vec::with_capacity(horizon);
        let mut gain_k = Vec::with_capacity(horizon);
        let mut pm = state_cost(horizon);
        for k in (0..horizon).rev() {
            let mut h = DMatrix::from_element(n, n, d.sum[k]);
            for j in 0..n {
                h[(j, j)] += d.u[k * n + j] + two_rho;
            }
            let pb = &pm * &b_aug;
            let mut m = h + b_aug.transpose() * &pb;
            let mut l = pb.transpose() * &a_aug;
            if rate && k > 0 {
                for j in 0..n {
                    l[(j, nx + j)] -= two_rho;
                }
            }
            let c = factor_regularized(&mut m)?;
            let kmat = -c.solve(&l);
            if k > 0 {
                let mut next = state_cost(k) + a_aug.transpose() * &pm * &a_aug + l.transpose() * &kmat;
                next = (&next + next.transpose()) * 0.5;
                pm = next;
            }
            chol.push(c);
            gain_l.push(l);
            gain_k.push(kmat);
        }
        chol.reverse();
        gain_l.reverse();
        gain_k.reverse();
        Some(Self {
            n,
            horizon,
            nxi,
            a_aug,
            b_aug,
            chol,
            gain_l,
            gain_k,
            elim_a,
            elim_b,
        })
    }

    /// Solves the LQ subproblem for linear terms `lin_u` (inputs), `g_t`
    /// (air temperatures at slot ends) and `g_s` (slacks).
    fn solve(&self, lin_u: &[f64], g_t: &[f64], g_s: &[f64]) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
        let n = self.n;
        let horizon = self.horizon;
        let reduced = |i: usize| g_t[i] - self.elim_b[i] * g_s[i] / self.elim_a[i];
        let state_lin = |instant: usize| {
            let mut q = DVector::zeros(self.nxi);
            for j in 0..n {
                q[2 * j] = reduced((instant - 1) * n + j);
            }
            q
        };

        let mut kff = vec![DVector::zeros(n); horizon];
        let mut pv = state_lin(horizon);
        for k in (0..horizon).rev() {
            let rhs = DVector::from_column_slice(&lin_u[k * n..(k + 1) * n]) + self.b_aug.transpose() * &pv;
            let f = -self.chol[k].solve(&rhs);
            if k > 0 {
                pv = state_lin(k) + self.a_aug.transpose() * &pv + self.gain_l[k].transpose() * &f;
            }
            kff[k] = f;
        }

        let mut du = Vec::with_capacity(n * horizon);
        let mut dt = Vec::with_capacity(n * horizon);
        let mut xi = DVector::zeros(self.nxi);
        for (gain, ff) in self.gain_k.iter().zip(&kff).take(horizon) {
            let v = gain * &xi + ff;
            xi = &self.a_aug * &xi + &self.b_aug * &v;
            du.extend(v.iter());
            dt.extend((0..n).map(|j| xi[2 * j]));
        }
        let ds = (0..n * horizon)
            .map(|i| -(g_s[i] + self.elim_b[i] * dt[i]) / self.elim_a[i])
            .collect();
        (du, dt, ds)
    }
}

fn factor_regularized(m: &mut DMatrix<f64>) -> Option<Cholesky<f64, Dyn>> {
    if let Some(c) = Cholesky::new(m.clone()) {
        return Some(c);
    }
    let scale = m.diagonal().amax().max(1.0);
    let mut delta = 1e-12 * scale;
    for _ in 0..12 {
        let mut shifted = m.clone();
        for i in 0..shifted.nrows() {
            shifted[(i, i)] += delta;
        }
        if let Some(c) = Cholesky::new(shifted) {
            return Some(c);
        }
        delta *= 10.0;
    }
    None
}

struct Iterate<'a> {
    p: &'a HorizonProblem,
    u: Vec<f64>,
    s: Vec<f64>,
    g: Duals,
}

impl<'a> Iterate<'a> {
    fn new(p: &'a HorizonProblem, u: Vec<f64>, s: Vec<f64>) -> Self {
        let n = p.n_rooms;
        let x = p.simulate(&u);
        let t_end: Vec<f64> = (0..p.n_vars()).map(|i| x[i + n][0]).collect();
        let sum = (0..p.horizon)
            .map(|k| p.heat_max_kw[k] - u[k * n..(k + 1) * n].iter().sum::<f64>())
            .collect();
        let lo = (0..p.n_vars()).map(|i| t_end[i] + s[i] - p.lower[i]).collect();
        let hi = (0..p.n_vars()).map(|i| p.upper[i] - t_end[i] + s[i]).collect();
        let g = Duals {
            u: u.clone(),
            sum,
            lo,
            hi,
            s: s.clone(),
        };
        Self { p, u, s, g }
    }

    fn grad_u(&self) -> Vec<f64> {
        let p = self.p;
        let n = p.n_rooms;
        let two_rho = 2.0 * p.rate_weight;
        (0..p.n_vars())
            .map(|i| {
                let k = i / n;
                let j = i % n;
                let mut g = p.heat_price[k];
                if two_rho > 0.0 {
                    let prev = if k == 0 { p.u_prev_kw[j] } else { self.u[i - n] };
                    g += two_rho * (self.u[i] - prev);
                    if k + 1 < p.horizon {
                        g -= two_rho * (self.u[i + n] - self.u[i]);
                    }
                }
                g
            })
            .collect()
    }

    /// Stationarity residuals `grad f - G' lambda` for inputs and slacks.
    fn dual_residual(&self, grad_u: &[f64], lam: &Duals) -> (Vec<f64>, Vec<f64>) {
        let p = self.p;
        let n = p.n_rooms;
        let mut ru = vec![0.0; p.n_vars()];
        for j in 0..n {
            let at = p.a[j].transpose();
            let mut adj = nalgebra::Vector2::zeros();
            for k in (0..p.horizon).rev() {
                let i = k * n + j;
                adj[0] += lam.lo[i] - lam.hi[i];
                ru[i] = grad_u[i] - lam.u[i] + lam.sum[k] - p.b[j].dot(&adj);
                adj = at * adj;
            }
        }
        let rs = (0..p.n_vars())
            .map(|i| p.slack_penalty - lam.lo[i] - lam.hi[i] - lam.s[i])
            .collect();
        (ru, rs)
    }
}

fn direction(f: &Factorization, p: &HorizonProblem, grad_u: &[f64], nu: Option<&Duals>) -> Direction {
    let n = p.n_rooms;
    let nv = p.n_vars();
    let (lin_u, g_t, g_s): (Vec<f64>, Vec<f64>, Vec<f64>) = match nu {
        None => (grad_u.to_vec(), vec![0.0; nv], vec![p.slack_penalty; nv]),
        Some(nu) => (
            (0..nv).map(|i| grad_u[i] - nu.u[i] + nu.sum[i / n]).collect(),
            (0..nv).map(|i| nu.hi[i] - nu.lo[i]).collect(),
            (0..nv)
                .map(|i| p.slack_penalty - nu.lo[i] - nu.hi[i] - nu.s[i])
                .collect(),
        ),
    };
    let (du, dt, ds) = f.solve(&lin_u, &g_t, &g_s);
    let dg = Duals {
        u: du.clone(),
        sum: (0..p.horizon)
            .map(|k| -du[k * n..(k + 1) * n].iter().sum::<f64>())
            .collect(),
        lo: (0..nv).map(|i| dt[i] + ds[i]).collect(),
        hi: (0..nv).map(|i| ds[i] - dt[i]).collect(),
        s: ds.clone(),
    };
    Direction { du, ds, dg }
}

/// Solves the horizon program to the requested KKT tolerance.
pub fn solve(p: &HorizonProblem, opts: &SolverOptions) -> MpcSolution {
    let n = p.n_rooms;
    let nv = p.n_vars();

    let u0: Vec<f64> = (0..nv).map(|i| 0.1 * p.heat_max_kw[i / n] / n as f64).collect();
    let viol = p.violations(&u0);
    let s0: Vec<f64> = viol.iter().map(|v| v + 1.0).collect();
    let mut it = Iterate::new(p, u0, s0);
    let mut lam = Duals::filled(nv, p.horizon, 1.0);
    let third = p.slack_penalty / 3.0;
    for v in lam.lo.iter_mut().chain(lam.hi.iter_mut()).chain(lam.s.iter_mut()) {
        *v = third;
    }
    let price_scale = p.heat_price.iter().fold(0.0f64, |a, r| a.max(r.abs())).max(1e-6);
    for v in lam.u.iter_mut().chain(lam.sum.iter_mut()) {
        *v = price_scale;
    }
    let m = lam.count() as f64;

    let mut status = SolveStatus::MaxIterations;
    let mut iterations = 0;
    let mut residual;
    let mut gap;

    loop {
        let grad_u = it.grad_u();
        let (ru, rs) = it.dual_residual(&grad_u, &lam);
        let fval = p.objective(&it.u, &it.s);
        let comp = lam.dot(&it.g);
        let scale_u = 1.0 + grad_u.iter().fold(0.0f64, |a, g| a.max(g.abs()));
        let res_u = ru.iter().fold(0.0f64, |a, r| a.max(r.abs())) / scale_u;
        let res_s = rs.iter().fold(0.0f64, |a, r| a.max(r.abs())) / (1.0 + p.slack_penalty);
        residual = res_u.max(res_s);
        gap = comp / (1.0 + fval.abs());
        if !(residual.is_finite() && gap.is_finite() && fval.is_finite()) {
            status = SolveStatus::InfeasibleNumerics;
            break;
        }
        if residual <= opts.tolerance && gap <= opts.tolerance {
            status = SolveStatus::Optimal;
            break;
        }
        if iterations >= opts.max_iterations {
            break;
        }
        iterations += 1;

        let mu = comp / m;
        let weights = lam.zip_map(&it.g, |l, g| l / g);
        let Some(fact) = Factorization::new(p, &weights) else {
            status = SolveStatus::InfeasibleNumerics;
            break;
        };

        // predictor
        let aff = direction(&fact, p, &grad_u, None);
        let dlam_aff = lam
            .zip_map(&aff.dg, |l, _| -l)
            .zip_map(&weights.zip_map(&aff.dg, |w, dg| w * dg), |a, b| a - b);
        let ap = it.g.max_step(&aff.dg);
        let ad = lam.max_step(&dlam_aff);
        let mut g_aff = it.g.clone();
        g_aff.axpy(ap, &aff.dg);
        let mut lam_aff = lam.clone();
        lam_aff.axpy(ad, &dlam_aff);
        let mu_aff = g_aff.dot(&lam_aff) / m;
        let sigma = (mu_aff / mu).clamp(0.0, 1.0).powi(3);

        // corrector
        let cross = aff.dg.zip_map(&dlam_aff, |a, b| a * b);
        let nu = cross.zip_map(&it.g, |c, g| (sigma * mu - c) / g);
        let dir = direction(&fact, p, &grad_u, Some(&nu));
        let dlam = nu
            .zip_map(&lam, |v, l| v - l)
            .zip_map(&weights.zip_map(&dir.dg, |w, dg| w * dg), |a, b| a - b);

        let alpha = (STEP_FRACTION * it.g.max_step(&dir.dg).min(lam.max_step(&dlam))).min(1.0);
        let u: Vec<f64> = it.u.iter().zip(&dir.du).map(|(x, d)| x + alpha * d).collect();
        let s: Vec<f64> = it.s.iter().zip(&dir.ds).map(|(x, d)| x + alpha * d).collect();
        let next = Iterate::new(p, u, s);
        lam.axpy(alpha, &dlam);
        if !lam.is_finite() || next.g.groups().iter().any(|g| g.iter().any(|v| !(*v > 0.0))) {
            status = SolveStatus::InfeasibleNumerics;
            it = next;
            break;
        }
        it = next;
    }

    let heat_kw: Vec<f64> = it.u.iter().map(|v| v.max(0.0)).collect();
    let slack: Vec<f64> = it.s.iter().map(|v| v.max(0.0)).collect();
    MpcSolution {
        objective: p.objective(&heat_kw, &slack),
        energy_cost: p.energy_cost(&heat_kw),
        heat_kw,
        slack,
        iterations,
        status,
        dual_residual: residual,
        gap,
    }
}
