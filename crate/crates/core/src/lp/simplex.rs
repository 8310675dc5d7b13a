//! Bounded-variable revised simplex with an explicit basis inverse.
//!
//! Row activities become logical variables `w = A z` bounded by `[l, u]`, so
//! the working system is `[A  −I] (z, w) = 0`. The all-logical basis is the
//! starting point; phase 1 minimizes the sum of bound infeasibilities of the
//! basic variables and phase 2 the true objective. Pricing is Dantzig's rule
//! with lowest-index ties, switching to Bland's rule while a run of
//! degenerate pivots persists.

use nalgebra::{DMatrix, DVector};

use super::{BasisStatus, LpProblem, LpSolution, LpStatus};

const PIVOT_TOL: f64 = 1e-9;
const DEGENERATE_STEP: f64 = 1e-12;
const BLAND_AFTER: usize = 30;
const REFACTOR_EVERY: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum VarState {
    Basic,
    Lower,
    Upper,
}

pub(super) struct Simplex<'a> {
    a: &'a DMatrix<f64>,
    cost: &'a DVector<f64>,
    m: usize,
    k: usize,
    lo: Vec<f64>,
    hi: Vec<f64>,
    x: Vec<f64>,
    state: Vec<VarState>,
    basis: Vec<usize>,
    binv: DMatrix<f64>,
    tol: f64,
    updates_since_refactor: usize,
}

enum Step {
    Optimal,
    Infeasible,
    Unbounded,
    Continue { degenerate: bool },
}

impl<'a> Simplex<'a> {
    pub(super) fn new(problem: &'a LpProblem, tol: f64) -> Self {
        let a = &problem.constraint_matrix;
        let (k, m) = a.shape();
        let mut lo = vec![0.0; m + k];
        let mut hi = vec![f64::INFINITY; m + k];
        for i in 0..k {
            lo[m + i] = problem.lower_bounds[i];
            hi[m + i] = problem.upper_bounds[i];
        }
        let mut state = vec![VarState::Lower; m + k];
        for s in state.iter_mut().skip(m) {
            *s = VarState::Basic;
        }
        Self {
            a,
            cost: &problem.objective,
            m,
            k,
            lo,
            hi,
            x: vec![0.0; m + k],
            state,
            basis: (m..m + k).collect(),
            binv: -DMatrix::identity(k, k),
            tol,
            updates_since_refactor: 0,
        }
    }

    /// Starts from `warm`; `None` if it does not describe a nonsingular basis.
    pub(super) fn with_basis(problem: &'a LpProblem, tol: f64, warm: &[BasisStatus]) -> Option<Self> {
        let mut s = Self::new(problem, tol);
        let (m, k) = (s.m, s.k);
        if warm.len() != m + k || warm.iter().filter(|&&b| b == BasisStatus::Basic).count() != k {
            return None;
        }
        s.basis.clear();
        for (j, &b) in warm.iter().enumerate() {
            match b {
                BasisStatus::Basic => {
                    s.state[j] = VarState::Basic;
                    s.basis.push(j);
                }
                BasisStatus::AtUpper if s.hi[j].is_finite() => {
                    s.state[j] = VarState::Upper;
                    s.x[j] = s.hi[j];
                }
                _ => {
                    s.state[j] = VarState::Lower;
                    s.x[j] = s.lo[j];
                }
            }
        }
        if !s.refactor() {
            return None;
        }
        Some(s)
    }

    pub(super) fn run(mut self, max_iters: usize) -> LpSolution {
        self.recompute_basics();
        let mut iterations = 0;
        let mut degenerate_run = 0;
        let mut verified = false;
        let status = loop {
            if iterations >= max_iters {
                break LpStatus::IterationLimit;
            }
            match self.step(degenerate_run >= BLAND_AFTER) {
                Step::Continue { degenerate } => {
                    iterations += 1;
                    verified = false;
                    degenerate_run = if degenerate { degenerate_run + 1 } else { 0 };
                }
                terminal => {
                    // Confirm the verdict on a freshly factored basis.
                    if !verified && self.updates_since_refactor > 0 {
                        let _ = self.refactor();
                        self.recompute_basics();
                        verified = true;
                        continue;
                    }
                    break match terminal {
                        Step::Optimal => LpStatus::Optimal,
                        Step::Infeasible => LpStatus::Infeasible,
                        _ => LpStatus::Unbounded,
                    };
                }
            }
        };
        self.finish(status, iterations)
    }

    fn column_dot(&self, j: usize, y: &DVector<f64>) -> f64 {
        if j < self.m {
            self.a.column(j).dot(y)
        } else {
            -y[j - self.m]
        }
    }

    /// `B⁻¹ a_j`.
    fn ftran(&self, j: usize) -> DVector<f64> {
        if j < self.m {
            &self.binv * self.a.column(j)
        } else {
            -self.binv.column(j - self.m)
        }
    }

    fn recompute_basics(&mut self) {
        let mut rhs = DVector::zeros(self.k);
        for j in 0..self.m {
            if self.state[j] != VarState::Basic && self.x[j] != 0.0 {
                rhs.axpy(-self.x[j], &self.a.column(j), 1.0);
            }
        }
        for i in 0..self.k {
            let j = self.m + i;
            if self.state[j] != VarState::Basic {
                rhs[i] += self.x[j];
            }
        }
        let xb = &self.binv * rhs;
        for (pos, &j) in self.basis.iter().enumerate() {
            self.x[j] = xb[pos];
        }
    }

    /// Re-inverts the basis; keeps the old inverse and returns false if singular.
    fn refactor(&mut self) -> bool {
        let mut b = DMatrix::zeros(self.k, self.k);
        for (pos, &j) in self.basis.iter().enumerate() {
            if j < self.m {
                b.set_column(pos, &self.a.column(j));
            } else {
                b[(j - self.m, pos)] = -1.0;
            }
        }
        self.updates_since_refactor = 0;
        match b.try_inverse() {
            Some(inv) if inv.iter().all(|v| v.is_finite()) => {
                self.binv = inv;
                true
            }
            _ => false,
        }
    }

    /// Phase-1 cost of a basic variable: the sign of its bound violation.
    fn infeasibility_cost(&self, j: usize) -> f64 {
        if self.x[j] < self.lo[j] - self.tol {
            -1.0
        } else if self.x[j] > self.hi[j] + self.tol {
            1.0
        } else {
            0.0
        }
    }

    fn phase_one_costs(&self) -> Option<DVector<f64>> {
        let cb = DVector::from_iterator(self.k, self.basis.iter().map(|&j| self.infeasibility_cost(j)));
        if cb.iter().any(|&c| c != 0.0) {
            Some(cb)
        } else {
            None
        }
    }

    fn true_cost(&self, j: usize) -> f64 {
        if j < self.m {
            self.cost[j]
        } else {
            0.0
        }
    }

    fn duals(&self, cb: &DVector<f64>) -> DVector<f64> {
        self.binv.tr_mul(cb)
    }

    fn step(&mut self, bland: bool) -> Step {
        let phase_one = self.phase_one_costs();
        let (cb, in_phase_one) = match phase_one {
            Some(cb) => (cb, true),
            None => (
                DVector::from_iterator(self.k, self.basis.iter().map(|&j| self.true_cost(j))),
                false,
            ),
        };
        let y = self.duals(&cb);

        // Pricing: most improving reduced cost, lowest index on ties.
        let mut entering: Option<(usize, f64)> = None;
        let mut best = 0.0;
        for j in 0..self.m + self.k {
            let st = self.state[j];
            if st == VarState::Basic || self.hi[j] <= self.lo[j] {
                continue;
            }
            let cj = if in_phase_one { 0.0 } else { self.true_cost(j) };
            let d = cj - self.column_dot(j, &y);
            let improving = match st {
                VarState::Lower => d < -self.tol,
                VarState::Upper => d > self.tol,
                VarState::Basic => false,
            };
            if !improving {
                continue;
            }
            if bland {
                entering = Some((j, d));
                break;
            }
            if d.abs() > best {
                best = d.abs();
                entering = Some((j, d));
            }
        }
        let Some((q, dq)) = entering else {
            return if in_phase_one { Step::Infeasible } else { Step::Optimal };
        };
        let dir = if dq < 0.0 { 1.0 } else { -1.0 };
        let alpha = self.ftran(q);

        // Harris two-pass ratio test.
        let flip = self.hi[q] - self.lo[q];
        let limit_of = |s: &Self, pos: usize, rate: f64| -> Option<f64> {
            let j = s.basis[pos];
            let xj = s.x[j];
            if rate < 0.0 {
                if xj > s.hi[j] + s.tol {
                    Some(s.hi[j])
                } else if xj >= s.lo[j] - s.tol {
                    Some(s.lo[j])
                } else {
                    None
                }
            } else if xj < s.lo[j] - s.tol {
                Some(s.lo[j])
            } else if xj <= s.hi[j] + s.tol && s.hi[j].is_finite() {
                Some(s.hi[j])
            } else {
                None
            }
        };
        let mut relaxed_min = f64::INFINITY;
        for pos in 0..self.k {
            let rate = -dir * alpha[pos];
            if rate.abs() <= PIVOT_TOL {
                continue;
            }
            if let Some(lim) = limit_of(self, pos, rate) {
                let xj = self.x[self.basis[pos]];
                let t = ((lim - xj) * rate.signum() + self.tol) / rate.abs();
                relaxed_min = relaxed_min.min(t.max(0.0));
            }
        }
        let mut leaving: Option<(usize, f64, f64)> = None;
        let mut best_key = f64::NEG_INFINITY;
        for pos in 0..self.k {
            let rate = -dir * alpha[pos];
            if rate.abs() <= PIVOT_TOL {
                continue;
            }
            if let Some(lim) = limit_of(self, pos, rate) {
                let xj = self.x[self.basis[pos]];
                let t = ((lim - xj) / rate).max(0.0);
                if t <= relaxed_min {
                    let key = if bland {
                        -(self.basis[pos] as f64)
                    } else {
                        rate.abs()
                    };
                    if key > best_key {
                        best_key = key;
                        leaving = Some((pos, t, lim));
                    }
                }
            }
        }

        let use_flip = match leaving {
            None => flip.is_finite(),
            Some((_, t, _)) => flip <= t,
        };
        if use_flip {
            if !flip.is_finite() {
                return Step::Unbounded;
            }
            self.x[q] = if dir > 0.0 { self.hi[q] } else { self.lo[q] };
            self.state[q] = if dir > 0.0 { VarState::Upper } else { VarState::Lower };
            for pos in 0..self.k {
                let j = self.basis[pos];
                self.x[j] += -dir * alpha[pos] * flip;
            }
            return Step::Continue {
                degenerate: flip <= DEGENERATE_STEP,
            };
        }
        let Some((r, t, lim)) = leaving else {
            return Step::Unbounded;
        };

        self.x[q] += dir * t;
        for pos in 0..self.k {
            let j = self.basis[pos];
            self.x[j] += -dir * alpha[pos] * t;
        }
        let out = self.basis[r];
        self.x[out] = lim;
        self.state[out] = if lim == self.lo[out] {
            VarState::Lower
        } else {
            VarState::Upper
        };
        self.state[q] = VarState::Basic;
        self.basis[r] = q;

        // Eta update, column by column for contiguous access.
        let piv = alpha[r];
        for mut col in self.binv.column_iter_mut() {
            let f = col[r] / piv;
            if f != 0.0 {
                col.axpy(-f, &alpha, 1.0);
            }
            col[r] = f;
        }
        self.updates_since_refactor += 1;
        if self.updates_since_refactor >= REFACTOR_EVERY {
            let _ = self.refactor();
        }
        self.recompute_basics();

        Step::Continue {
            degenerate: t <= DEGENERATE_STEP,
        }
    }

    fn finish(self, status: LpStatus, iterations: usize) -> LpSolution {
        let mut z = DVector::from_iterator(self.m, self.x[..self.m].iter().copied());
        for v in z.iter_mut() {
            if *v < 0.0 && *v > -self.tol {
                *v = 0.0;
            }
        }
        let objective_value = self.cost.dot(&z);
        let cb = DVector::from_iterator(self.k, self.basis.iter().map(|&j| self.true_cost(j)));
        let y = self.duals(&cb);

        // Dual objective  Σ_i (y_i⁺ l_i − y_i⁻ u_i)  for  c − Aᵀy ≥ 0.
        let mut dual_infeasibility = 0.0f64;
        for j in 0..self.m {
            let d = self.cost[j] - self.a.column(j).dot(&y);
            dual_infeasibility = dual_infeasibility.max(-d);
        }
        let dual_objective: f64 = (0..self.k)
            .map(|i| {
                if y[i] > 0.0 {
                    y[i] * self.lo[self.m + i]
                } else {
                    y[i] * self.hi[self.m + i]
                }
            })
            .sum();
        let basis = self
            .state
            .iter()
            .map(|s| match s {
                VarState::Basic => BasisStatus::Basic,
                VarState::Lower => BasisStatus::AtLower,
                VarState::Upper => BasisStatus::AtUpper,
            })
            .collect();
        LpSolution {
            basis,
            z,
            objective_value,
            status,
            iterations,
            duals: y,
            optimality_gap: objective_value - dual_objective,
            dual_infeasibility,
        }
    }
}
