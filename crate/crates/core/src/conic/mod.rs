//! Second-order cone programs: representation, solving, and the beamforming
//! problem builders.
//!
//! A [`ConicProblem`] is `minimize c^T x` subject to a list of cone blocks, each
//! row of which is an affine expression of `x`. Solves go through
//! [`solve_socp`], which is backed by Clarabel's interior-point method.

mod builders;
mod verify;

use std::fmt;
use std::io::{self, Write};

use clarabel::algebra::CscMatrix;
use clarabel::solver::{
    DefaultSettingsBuilder, DefaultSolver, IPSolver, SolverStatus, SupportedConeT,
};

use crate::scalar::{lit, Real};

pub use builders::{
    build_power_min, build_rminlp_relaxation, build_weighted_group_norm, solve_power_min,
    solve_rminlp_relaxation, solve_weighted_group_norm, BeamLayout, BeamSolve, ProblemData,
    RelaxationSolve,
};
pub use verify::{sinr, verify_solution, VerificationReport};

/// What a cone block encodes; kept so duals can be traced back to constraints.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConeOrigin {
    /// SINR constraint of user `k`.
    Sinr(usize),
    /// Per-RRH transmit power cap.
    PowerCap(usize),
    /// Rotated-cone epigraph `t_l >= ||w̃_l||^2`.
    Epigraph(usize),
    /// Norm epigraph `u_l >= ||w̃_l||`.
    GroupNorm(usize),
    /// Relaxed cap `||w̃_l||^2 <= z_l P_l`.
    RelaxedCap(usize),
    /// Box `0 <= z_l <= 1` on a relaxed activity variable.
    ActivityBounds(usize),
    /// Anything built by hand.
    Generic,
}

impl fmt::Display for ConeOrigin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConeOrigin::Sinr(k) => write!(f, "sinr:{k}"),
            ConeOrigin::PowerCap(l) => write!(f, "power_cap:{l}"),
            ConeOrigin::Epigraph(l) => write!(f, "epigraph:{l}"),
            ConeOrigin::GroupNorm(l) => write!(f, "group_norm:{l}"),
            ConeOrigin::RelaxedCap(l) => write!(f, "relaxed_cap:{l}"),
            ConeOrigin::ActivityBounds(l) => write!(f, "activity_bounds:{l}"),
            ConeOrigin::Generic => write!(f, "generic"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConeKind {
    /// Every row is `= 0`.
    Zero,
    /// Every row is `>= 0`.
    NonNegative,
    /// First row bounds the Euclidean norm of the remaining rows.
    SecondOrder,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConeBlock {
    pub kind: ConeKind,
    pub dim: usize,
    pub origin: ConeOrigin,
}

/// One affine expression `Σ coef * x[idx] + constant`.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineRow<T> {
    pub terms: Vec<(usize, T)>,
    pub constant: T,
}

impl<T: Real> AffineRow<T> {
    pub fn constant(c: T) -> Self {
        Self { terms: Vec::new(), constant: c }
    }

    pub fn var(idx: usize, coef: T) -> Self {
        Self { terms: vec![(idx, coef)], constant: T::zero() }
    }

    pub fn eval(&self, x: &[T]) -> T {
        self.terms.iter().fold(self.constant, |acc, &(i, c)| acc + c * x[i])
    }
}

/// `minimize scale * c^T x` subject to affine rows lying in a product of cones.
///
/// All data is real; complex beamforming variables are lifted to (re, im) pairs
/// before they get here.
#[derive(Debug, Clone, PartialEq)]
pub struct ConicProblem<T> {
    num_vars: usize,
    objective: Vec<T>,
    objective_scale: T,
    rows: Vec<AffineRow<T>>,
    cones: Vec<ConeBlock>,
}

impl<T: Real> ConicProblem<T> {
    pub fn new(num_vars: usize) -> Self {
        Self {
            num_vars,
            objective: vec![T::zero(); num_vars],
            objective_scale: T::one(),
            rows: Vec::new(),
            cones: Vec::new(),
        }
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn cones(&self) -> &[ConeBlock] {
        &self.cones
    }

    pub fn rows(&self) -> &[AffineRow<T>] {
        &self.rows
    }

    pub fn objective(&self) -> &[T] {
        &self.objective
    }

    /// The solver sees `c`; reported objective values are multiplied by `scale`.
    pub fn set_objective(&mut self, c: Vec<T>, scale: T) {
        assert_eq!(c.len(), self.num_vars, "objective length");
        self.objective = c;
        self.objective_scale = scale;
    }

    pub fn objective_scale(&self) -> T {
        self.objective_scale
    }

    /// Appends `n` variables with zero cost; returns the index of the first.
    pub fn add_vars(&mut self, n: usize) -> usize {
        let first = self.num_vars;
        self.num_vars += n;
        self.objective.resize(self.num_vars, T::zero());
        first
    }

    /// Adds `rows[i] = 0` for every row.
    pub fn add_zero(&mut self, origin: ConeOrigin, rows: Vec<AffineRow<T>>) {
        self.push_block(ConeKind::Zero, origin, rows);
    }

    /// Adds `||rows[1..]|| <= rows[0]`.
    pub fn add_soc(&mut self, origin: ConeOrigin, rows: Vec<AffineRow<T>>) {
        self.push_block(ConeKind::SecondOrder, origin, rows);
    }

    /// Adds `rows[i] >= 0` for every row.
    pub fn add_nonneg(&mut self, origin: ConeOrigin, rows: Vec<AffineRow<T>>) {
        self.push_block(ConeKind::NonNegative, origin, rows);
    }

    fn push_block(&mut self, kind: ConeKind, origin: ConeOrigin, rows: Vec<AffineRow<T>>) {
        assert!(!rows.is_empty(), "empty cone block");
        assert!(
            rows.iter().flat_map(|r| &r.terms).all(|&(i, _)| i < self.num_vars),
            "variable index out of range"
        );
        self.cones.push(ConeBlock { kind, dim: rows.len(), origin });
        self.rows.extend(rows);
    }

    /// Row values `s(x)`.
    pub fn slacks(&self, x: &[T]) -> Vec<T> {
        self.rows.iter().map(|r| r.eval(x)).collect()
    }

    /// Largest cone violation of `s(x)`: `max(-s_i)` for rays, `||s_1..|| - s_0` for SOCs.
    pub fn max_violation(&self, x: &[T]) -> T {
        cone_violation(&self.cones, &self.slacks(x))
    }

    pub fn evaluate_objective(&self, x: &[T]) -> T {
        self.objective_scale
            * self.objective.iter().zip(x).fold(T::zero(), |acc, (c, v)| acc + *c * *v)
    }

    /// Clarabel form: `A x + s = b`, `s ∈ K`, i.e. `A = -terms`, `b = constant`.
    fn clarabel_data(&self) -> (CscMatrix<T>, Vec<T>, Vec<SupportedConeT<T>>) {
        let mut ii = Vec::new();
        let mut jj = Vec::new();
        let mut vv = Vec::new();
        for (r, row) in self.rows.iter().enumerate() {
            for &(j, c) in &row.terms {
                ii.push(r);
                jj.push(j);
                vv.push(-c);
            }
        }
        let a = CscMatrix::new_from_triplets(self.rows.len(), self.num_vars, ii, jj, vv);
        let b = self.rows.iter().map(|r| r.constant).collect();
        let cones = self
            .cones
            .iter()
            .map(|c| match c.kind {
                ConeKind::Zero => SupportedConeT::ZeroConeT(c.dim),
                ConeKind::NonNegative => SupportedConeT::NonnegativeConeT(c.dim),
                ConeKind::SecondOrder => SupportedConeT::SecondOrderConeT(c.dim),
            })
            .collect();
        (a, b, cones)
    }

    /// `A^T z` with `A` the row-term matrix (the sign convention of the dual pairing
    /// `Σ z_i * rows_i(x)`).
    fn transpose_apply(&self, z: &[T]) -> Vec<T> {
        let mut out = vec![T::zero(); self.num_vars];
        for (row, &zi) in self.rows.iter().zip(z) {
            for &(j, c) in &row.terms {
                out[j] = out[j] + c * zi;
            }
        }
        out
    }

    /// Writes the problem in a line-oriented text format for cross-checking with
    /// external solvers:
    ///
    /// ```text
    /// conic-problem v1
    /// vars <n> rows <m> scale <s>
    /// objective <c_0> ... <c_{n-1}>
    /// cone <soc|nonneg|zero> <dim> <origin>      (one line per block, in row order)
    /// row <i> <constant> <j>:<coef> ...     (row i = Σ coef*x_j + constant)
    /// ```
    pub fn write_text<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "conic-problem v1")?;
        writeln!(out, "vars {} rows {} scale {:e}", self.num_vars, self.rows.len(), self.objective_scale)?;
        write!(out, "objective")?;
        for c in &self.objective {
            write!(out, " {c:e}")?;
        }
        writeln!(out)?;
        for c in &self.cones {
            let kind = match c.kind {
                ConeKind::Zero => "zero",
                ConeKind::SecondOrder => "soc",
                ConeKind::NonNegative => "nonneg",
            };
            writeln!(out, "cone {kind} {} {}", c.dim, c.origin)?;
        }
        for (i, r) in self.rows.iter().enumerate() {
            write!(out, "row {i} {:e}", r.constant)?;
            for (j, c) in &r.terms {
                write!(out, " {j}:{c:e}")?;
            }
            writeln!(out)?;
        }
        Ok(())
    }
}

/// Primal cone violation of `s`; the dual cone is the same except that zero
/// blocks are unconstrained there.
fn cone_violation<T: Real>(cones: &[ConeBlock], s: &[T]) -> T {
    block_violation(cones, s, false)
}

fn block_violation<T: Real>(cones: &[ConeBlock], s: &[T], dual: bool) -> T {
    let mut worst = T::zero();
    let mut at = 0;
    for c in cones {
        let block = &s[at..at + c.dim];
        let v = match c.kind {
            ConeKind::Zero if dual => T::zero(),
            ConeKind::Zero => block.iter().fold(T::zero(), |m, &x| m.max(x.abs())),
            ConeKind::NonNegative => block.iter().fold(T::zero(), |m, &x| m.max(-x)),
            ConeKind::SecondOrder => {
                let tail = block[1..].iter().fold(T::zero(), |acc, &x| acc + x * x).sqrt();
                tail - block[0]
            }
        };
        worst = worst.max(v);
        at += c.dim;
    }
    worst
}

/// Interior-point tolerances and limits.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverSettings<T> {
    pub feasibility_tol: T,
    /// Relative duality-gap tolerance.
    pub gap_tol: T,
    pub max_iter: u32,
    /// Tolerance for accepting a Farkas certificate of infeasibility.
    pub certificate_tol: T,
}

impl<T: Real> Default for SolverSettings<T> {
    /// `1e-8` tolerances in double precision; single precision gets `sqrt(eps)/2`.
    fn default() -> Self {
        let tol = lit::<T>(1e-8).max(T::epsilon().sqrt() / lit(2.0));
        Self { feasibility_tol: tol, gap_tol: tol, max_iter: 200, certificate_tol: tol }
    }
}

impl<T: Real> SolverSettings<T> {
    pub fn validate(&self) -> Result<(), String> {
        let ok = |t: T| t > T::zero() && t.is_finite();
        if !(ok(self.feasibility_tol) && ok(self.gap_tol) && ok(self.certificate_tol)) {
            return Err("solver tolerances must be positive".into());
        }
        if self.max_iter == 0 {
            return Err("max_iter must be positive".into());
        }
        Ok(())
    }
}

/// Result of [`solve_socp`].
#[derive(Debug, Clone, PartialEq)]
pub enum SocpSolution<T> {
    Optimal {
        x: Vec<T>,
        /// Dual multipliers, one per row, in the dual cone.
        z: Vec<T>,
        /// Reported objective (scale applied).
        objective: T,
        iterations: u32,
    },
    /// `certificate` is a dual ray `z ∈ K*` with `Σ z_i terms_i = 0` and
    /// `Σ z_i constant_i = -1`.
    Infeasible { certificate: Vec<T> },
    Failure { reason: String },
}

impl<T> SocpSolution<T> {
    pub fn is_optimal(&self) -> bool {
        matches!(self, SocpSolution::Optimal { .. })
    }

    pub fn is_infeasible(&self) -> bool {
        matches!(self, SocpSolution::Infeasible { .. })
    }
}

/// Solves a conic problem.
///
/// Clarabel's verdict is re-checked here: an optimal point must satisfy every
/// cone within the feasibility tolerance, and an infeasibility verdict must come
/// with a Farkas certificate that checks out at `certificate_tol`. Anything else
/// is a `Failure`, never silently `Infeasible`.
pub fn solve_socp<T: Real>(problem: &ConicProblem<T>, settings: &SolverSettings<T>) -> SocpSolution<T> {
    if let Err(e) = settings.validate() {
        return SocpSolution::Failure { reason: e };
    }
    let (a, b, cones) = problem.clarabel_data();
    let p = CscMatrix::<T>::zeros((problem.num_vars, problem.num_vars));
    // Clarabel's regularization defaults assume double precision.
    let eps = T::epsilon();
    let coarse = eps > lit(1e-10);
    let mut builder = DefaultSettingsBuilder::default();
    if coarse {
        builder
            .static_regularization_constant(eps.sqrt())
            .dynamic_regularization_eps(eps)
            .dynamic_regularization_delta(eps.sqrt())
            .iterative_refinement_abstol(eps)
            .iterative_refinement_reltol(eps);
    }
    let clarabel_settings = match builder
        .verbose(false)
        .max_iter(settings.max_iter)
        .tol_feas(settings.feasibility_tol)
        .tol_gap_abs(settings.gap_tol)
        .tol_gap_rel(settings.gap_tol)
        .tol_infeas_abs(settings.certificate_tol)
        .tol_infeas_rel(settings.certificate_tol)
        .presolve_enable(false)
        .build()
    {
        Ok(s) => s,
        Err(e) => return SocpSolution::Failure { reason: format!("settings: {e:?}") },
    };
    let mut solver = match DefaultSolver::new(&p, &problem.objective, &a, &b, &cones, clarabel_settings) {
        Ok(s) => s,
        Err(e) => return SocpSolution::Failure { reason: format!("setup: {e:?}") },
    };
    solver.solve();
    let sol = &solver.solution;
    match sol.status {
        SolverStatus::Solved | SolverStatus::AlmostSolved => {
            let x = sol.x.clone();
            let scale = row_scale(problem, &x);
            let viol = problem.max_violation(&x);
            if viol <= lit::<T>(10.0) * settings.feasibility_tol * scale {
                SocpSolution::Optimal {
                    objective: problem.evaluate_objective(&x),
                    x,
                    z: sol.z.clone(),
                    iterations: sol.iterations,
                }
            } else {
                SocpSolution::Failure {
                    reason: format!("{:?} but cone violation {viol:e} exceeds tolerance", sol.status),
                }
            }
        }
        SolverStatus::PrimalInfeasible | SolverStatus::AlmostPrimalInfeasible => {
            match check_certificate(problem, &sol.z, settings.certificate_tol) {
                Ok(certificate) => SocpSolution::Infeasible { certificate },
                Err(why) => SocpSolution::Failure {
                    reason: format!("{:?} with unverifiable certificate: {why}", sol.status),
                },
            }
        }
        other => SocpSolution::Failure { reason: format!("solver stopped with status {other:?}") },
    }
}

/// Magnitude scale for residual tests: `max(1, |constant|, |coef * x|)` over all rows.
fn row_scale<T: Real>(problem: &ConicProblem<T>, x: &[T]) -> T {
    problem.rows.iter().fold(T::one(), |m, r| {
        r.terms
            .iter()
            .fold(m.max(r.constant.abs()), |m, &(j, c)| m.max((c * x[j]).abs()))
    })
}

/// Normalizes and checks a primal-infeasibility certificate.
fn check_certificate<T: Real>(problem: &ConicProblem<T>, z: &[T], tol: T) -> Result<Vec<T>, String> {
    if z.len() != problem.rows.len() || z.iter().any(|v| !v.is_finite()) {
        return Err("malformed certificate".into());
    }
    // Clarabel's z satisfies A^T z = 0, b^T z < 0 with A = -terms, b = constant.
    let btz = problem.rows.iter().zip(z).fold(T::zero(), |acc, (r, &zi)| acc + r.constant * zi);
    if !(btz < T::zero()) {
        return Err(format!("b^T z = {btz:e} is not negative"));
    }
    let zn: Vec<T> = z.iter().map(|&v| v / -btz).collect();
    let zmax = zn.iter().fold(T::zero(), |m, v| m.max(v.abs()));
    let amax = problem
        .rows
        .iter()
        .flat_map(|r| r.terms.iter().map(|t| t.1.abs()))
        .fold(T::zero(), T::max);
    let residual = problem.transpose_apply(&zn).iter().fold(T::zero(), |m, v| m.max(v.abs()));
    let limit = tol * T::one().max(zmax * amax);
    if residual > limit {
        return Err(format!("||A^T z|| = {residual:e} exceeds {limit:e}"));
    }
    let dual_violation = block_violation(&problem.cones, &zn, true);
    if dual_violation > tol * T::one().max(zmax) {
        return Err(format!("certificate outside the dual cone by {dual_violation:e}"));
    }
    Ok(zn)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn norm_of_fixed_vector() {
        // minimize t s.t. ||(3, 4)|| <= t
        let mut p = ConicProblem::<f64>::new(1);
        p.set_objective(vec![1.0], 1.0);
        p.add_soc(
            ConeOrigin::Generic,
            vec![AffineRow::var(0, 1.0), AffineRow::constant(3.0), AffineRow::constant(4.0)],
        );
        match solve_socp(&p, &SolverSettings::default()) {
            SocpSolution::Optimal { x, objective, .. } => {
                assert!((x[0] - 5.0).abs() < 1e-7);
                assert!((objective - 5.0).abs() < 1e-7);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn empty_feasible_set_gives_certificate() {
        // minimize x s.t. x >= 1, |x| <= 0.5
        let mut p = ConicProblem::<f64>::new(1);
        p.set_objective(vec![1.0], 1.0);
        p.add_nonneg(ConeOrigin::Generic, vec![AffineRow { terms: vec![(0, 1.0)], constant: -1.0 }]);
        p.add_soc(ConeOrigin::Generic, vec![AffineRow::constant(0.5), AffineRow::var(0, 1.0)]);
        match solve_socp(&p, &SolverSettings::default()) {
            SocpSolution::Infeasible { certificate } => {
                let aty = p.transpose_apply(&certificate);
                assert!(aty[0].abs() < 1e-8);
                let bty: f64 = p.rows().iter().zip(&certificate).map(|(r, z)| r.constant * z).sum();
                assert!((bty + 1.0).abs() < 1e-12);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn iteration_limit_is_a_failure_not_infeasible() {
        let mut p = ConicProblem::<f64>::new(1);
        p.set_objective(vec![1.0], 1.0);
        p.add_soc(
            ConeOrigin::Generic,
            vec![AffineRow::var(0, 1.0), AffineRow::constant(3.0), AffineRow::constant(4.0)],
        );
        let settings = SolverSettings { max_iter: 1, ..Default::default() };
        assert!(matches!(solve_socp(&p, &settings), SocpSolution::Failure { .. }));
    }

    #[test]
    fn invalid_settings_rejected() {
        let p = ConicProblem::<f64>::new(1);
        let s = SolverSettings { gap_tol: 0.0, ..Default::default() };
        assert!(matches!(solve_socp(&p, &s), SocpSolution::Failure { .. }));
    }

    #[test]
    fn text_dump_lists_every_block() {
        let mut p = ConicProblem::<f64>::new(2);
        p.set_objective(vec![1.0, 0.0], 2.0);
        p.add_soc(ConeOrigin::Sinr(3), vec![AffineRow::var(0, 1.0), AffineRow::var(1, 2.0)]);
        p.add_nonneg(ConeOrigin::ActivityBounds(1), vec![AffineRow::constant(1.0)]);
        let mut buf = Vec::new();
        p.write_text(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("conic-problem v1\nvars 2 rows 3"));
        assert!(text.contains("cone soc 2 sinr:3"));
        assert!(text.contains("cone nonneg 1 activity_bounds:1"));
        assert!(text.contains("row 1 0e0 1:2e0"));
    }
}
