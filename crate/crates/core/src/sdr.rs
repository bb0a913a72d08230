//! Semidefinite-relaxation reference solver for the power minimization problem.
//!
//! Lifting `W_k = w_k w_k^H` and dropping the rank constraint turns P(A) into
//!
//! ```text
//! minimize    Σ_k tr(D W_k)
//! subject to  tr(H_k W_k)/γ_k - Σ_{i≠k} tr(H_k W_i) >= σ_k^2
//!             Σ_k tr(E_l W_k) <= P_l
//!             W_k ⪰ 0
//! ```
//!
//! with `D` the diagonal of `1/η_l` per antenna, `H_k = h_k h_k^H` and `E_l` the
//! antenna selector of RRH `l`. Hermitian blocks are realified as
//! `[[Re, -Im], [Im, Re]]`, and the resulting real SDP is solved with a
//! primal-dual path-following method (HKM direction, Mehrotra predictor-corrector).
//!
//! The solver shares nothing with the conic module; it exists to cross-check it.
//! It is `f64` only and meant for small instances.

use nalgebra::{DMatrix, DVector};

use crate::conic::ProblemData;
use crate::error::{Error, Result};

/// Result of [`sdr_power_min`].
#[derive(Debug, Clone)]
pub struct SdrSolution {
    /// Optimal `Σ_k tr(D W_k)`, the relaxed minimum transmit power.
    pub transmit_power: f64,
    /// Dual objective at termination.
    pub dual_bound: f64,
    /// Largest ratio of the second to the first eigenvalue over the `W_k`;
    /// zero for an exactly rank-one solution.
    pub rank_ratio: f64,
    pub iterations: usize,
}

#[derive(Debug, Clone, Copy)]
pub struct SdrSettings {
    /// Relative gap and residual target.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for SdrSettings {
    fn default() -> Self {
        Self { tol: 1e-10, max_iter: 100 }
    }
}

/// Block-diagonal symmetric variable: PSD blocks plus a non-negative vector.
#[derive(Debug, Clone)]
struct BlockVar {
    psd: Vec<DMatrix<f64>>,
    lp: DVector<f64>,
}

impl BlockVar {
    fn scaled_identity(sizes: &[usize], lp: usize, v: f64) -> Self {
        Self {
            psd: sizes.iter().map(|&n| DMatrix::identity(n, n) * v).collect(),
            lp: DVector::from_element(lp, v),
        }
    }

    fn zeros_like(&self) -> Self {
        Self {
            psd: self.psd.iter().map(|b| DMatrix::zeros(b.nrows(), b.ncols())).collect(),
            lp: DVector::zeros(self.lp.len()),
        }
    }

    fn dot(&self, other: &Self) -> f64 {
        self.psd.iter().zip(&other.psd).map(|(a, b)| a.dot(b)).sum::<f64>() + self.lp.dot(&other.lp)
    }

    fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    fn axpy(&mut self, alpha: f64, x: &Self) {
        for (a, b) in self.psd.iter_mut().zip(&x.psd) {
            *a += b * alpha;
        }
        self.lp += &x.lp * alpha;
    }
}

/// One linear constraint `<A_i, X> = b_i`; blocks absent from `psd` are zero.
#[derive(Debug, Clone)]
struct Constraint {
    psd: Vec<Option<DMatrix<f64>>>,
    lp: Vec<(usize, f64)>,
}

impl Constraint {
    fn apply(&self, x: &BlockVar) -> f64 {
        let s: f64 = self
            .psd
            .iter()
            .zip(&x.psd)
            .filter_map(|(a, xb)| a.as_ref().map(|a| a.dot(xb)))
            .sum();
        s + self.lp.iter().map(|&(j, c)| c * x.lp[j]).sum::<f64>()
    }

    fn add_scaled_to(&self, alpha: f64, out: &mut BlockVar) {
        for (a, o) in self.psd.iter().zip(out.psd.iter_mut()) {
            if let Some(a) = a {
                *o += a * alpha;
            }
        }
        for &(j, c) in &self.lp {
            out.lp[j] += c * alpha;
        }
    }

    fn norm(&self) -> f64 {
        let s: f64 = self.psd.iter().flatten().map(|a| a.norm_squared()).sum();
        (s + self.lp.iter().map(|t| t.1 * t.1).sum::<f64>()).sqrt()
    }
}

struct Sdp {
    c: BlockVar,
    cons: Vec<Constraint>,
    b: DVector<f64>,
}

/// `R(h h^H) / 2` with `h` given as (re, im) parts.
fn realified_outer(h: &[(f64, f64)]) -> DMatrix<f64> {
    let n = h.len();
    // Real vectors u = [Re h; Im h] and v = [-Im h; Re h] give R(h h^H) = u u^T + v v^T.
    let u = DVector::from_iterator(2 * n, h.iter().map(|z| z.0).chain(h.iter().map(|z| z.1)));
    let v = DVector::from_iterator(2 * n, h.iter().map(|z| -z.1).chain(h.iter().map(|z| z.0)));
    (&u * u.transpose() + &v * v.transpose()) * 0.5
}

fn realified_diag(d: &[f64]) -> DMatrix<f64> {
    let n = d.len();
    DMatrix::from_fn(2 * n, 2 * n, |i, j| if i == j { 0.5 * d[i % n] } else { 0.0 })
}

fn build(active: &[usize], data: &ProblemData<'_, f64>) -> Sdp {
    let k_users = data.num_users();
    let antennas = data.antennas();
    let n: usize = active.iter().map(|&l| antennas[l]).sum();
    let num_lp = k_users + active.len();

    let d: Vec<f64> = active
        .iter()
        .flat_map(|&l| std::iter::repeat_n(1.0 / data.model.eta(l), antennas[l]))
        .collect();
    let c_block = realified_diag(&d);
    let c = BlockVar { psd: vec![c_block; k_users], lp: DVector::zeros(num_lp) };

    let mut cons = Vec::new();
    let mut b = Vec::new();
    for k in 0..k_users {
        let s2 = data.qos.sigma2(k);
        let h: Vec<(f64, f64)> = data
            .channel
            .user_vector(k, active)
            .iter()
            .map(|z| (z.re / s2.sqrt(), z.im / s2.sqrt()))
            .collect();
        let m = realified_outer(&h);
        let psd = (0..k_users)
            .map(|i| Some(if i == k { &m / data.qos.gamma(k) } else { -&m }))
            .collect();
        cons.push(Constraint { psd, lp: vec![(k, -1.0)] });
        b.push(1.0);
    }
    let mut offset = 0;
    for (pos, &l) in active.iter().enumerate() {
        let sel: Vec<f64> = (0..n).map(|i| if (offset..offset + antennas[l]).contains(&i) { 1.0 } else { 0.0 }).collect();
        offset += antennas[l];
        let e = realified_diag(&sel);
        cons.push(Constraint { psd: vec![Some(e); k_users], lp: vec![(k_users + pos, 1.0)] });
        b.push(data.model.p_max(l));
    }
    Sdp { c, cons, b: DVector::from_vec(b) }
}

/// Largest step `α` keeping `x + α dx` in the cone (unbounded steps return `f64::INFINITY`).
fn max_step(x: &BlockVar, dx: &BlockVar) -> Result<f64> {
    let mut alpha = f64::INFINITY;
    for (xb, db) in x.psd.iter().zip(&dx.psd) {
        let chol = xb
            .clone()
            .cholesky()
            .ok_or_else(|| Error::Numerical("iterate left the PSD cone".into()))?;
        let l = chol.l();
        let li = l
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::Numerical("singular Cholesky factor".into()))?;
        let m = &li * db * li.transpose();
        let m = (&m + m.transpose()) * 0.5;
        let lmin = m.symmetric_eigenvalues().min();
        if lmin < 0.0 {
            alpha = alpha.min(-1.0 / lmin);
        }
    }
    for (xi, di) in x.lp.iter().zip(dx.lp.iter()) {
        if *di < 0.0 {
            alpha = alpha.min(-xi / di);
        }
    }
    Ok(alpha)
}

/// Solves the relaxation of P(A) for the RRHs in `active`.
pub fn sdr_power_min(active: &[usize], data: &ProblemData<'_, f64>, settings: &SdrSettings) -> Result<SdrSolution> {
    if active.is_empty() {
        return Err(Error::Contract("active set must be nonempty".into()));
    }
    let sdp = build(active, data);
    let m = sdp.cons.len();
    let sizes: Vec<usize> = sdp.c.psd.iter().map(|b| b.nrows()).collect();
    let num_lp = sdp.c.lp.len();

    let cnorm = sdp.c.norm();
    let anorms: Vec<f64> = sdp.cons.iter().map(Constraint::norm).collect();
    let big_n = sizes.iter().sum::<usize>() + num_lp;
    let nf = big_n as f64;
    let xi0 = (0..m)
        .map(|i| nf * (1.0 + sdp.b[i].abs()) / (1.0 + anorms[i]))
        .fold(10.0f64.max(nf.sqrt()), f64::max);
    let zeta0 = anorms.iter().copied().fold(10.0f64.max(nf.sqrt()).max(cnorm), f64::max);
    let mut x = BlockVar::scaled_identity(&sizes, num_lp, xi0);
    let mut z = BlockVar::scaled_identity(&sizes, num_lp, zeta0);
    let mut y = DVector::<f64>::zeros(m);
    let bnorm = sdp.b.norm();

    for iter in 0..settings.max_iter {
        let ax = DVector::from_iterator(m, sdp.cons.iter().map(|c| c.apply(&x)));
        let rp = &sdp.b - ax;
        let mut rd = sdp.c.clone();
        for (i, c) in sdp.cons.iter().enumerate() {
            c.add_scaled_to(-y[i], &mut rd);
        }
        rd.axpy(-1.0, &z);
        let pobj = sdp.c.dot(&x);
        let dobj = sdp.b.dot(&y);
        let gap = x.dot(&z);
        let mu = gap / nf;
        let rel_gap = (pobj - dobj).abs() / (1.0 + pobj.abs() + dobj.abs());
        let pinf = rp.norm() / (1.0 + bnorm);
        let dinf = rd.norm() / (1.0 + cnorm);
        if rel_gap.max(gap / (1.0 + pobj.abs())) < settings.tol && pinf < settings.tol && dinf < settings.tol {
            return Ok(SdrSolution {
                transmit_power: pobj,
                dual_bound: dobj,
                rank_ratio: rank_ratio(&x),
                iterations: iter,
            });
        }

        let zinv: Vec<DMatrix<f64>> = z
            .psd
            .iter()
            .map(|b| {
                b.clone()
                    .cholesky()
                    .map(|c| c.inverse())
                    .ok_or_else(|| Error::Numerical("dual iterate left the PSD cone".into()))
            })
            .collect::<Result<_>>()?;
        let zinv_lp = z.lp.map(|v| 1.0 / v);

        // Schur complement M_ij = <A_i, X A_j Z^-1>.
        let g: Vec<BlockVar> = sdp
            .cons
            .iter()
            .map(|c| {
                let mut out = x.zeros_like();
                for (blk, a) in c.psd.iter().enumerate() {
                    if let Some(a) = a {
                        out.psd[blk] = &x.psd[blk] * a * &zinv[blk];
                    }
                }
                for &(j, v) in &c.lp {
                    out.lp[j] = x.lp[j] * v * zinv_lp[j];
                }
                out
            })
            .collect();
        let schur = DMatrix::from_fn(m, m, |i, j| sdp.cons[i].apply(&g[j]));
        let schur = (&schur + schur.transpose()) * 0.5;
        let factor = schur
            .clone()
            .cholesky()
            .ok_or_else(|| Error::Numerical("Schur complement is not positive definite".into()))?;

        // X Rd Z^-1, shared by both directions.
        let mut x_rd_zinv = x.zeros_like();
        for blk in 0..sizes.len() {
            x_rd_zinv.psd[blk] = &x.psd[blk] * &rd.psd[blk] * &zinv[blk];
        }
        x_rd_zinv.lp = x.lp.component_mul(&rd.lp).component_mul(&zinv_lp);

        // Direction for the complementarity target R_c, passed as R_c Z^-1.
        let direction = |rc_zinv: &BlockVar| -> (BlockVar, DVector<f64>, BlockVar) {
            let rhs = DVector::from_iterator(
                m,
                (0..m).map(|i| rp[i] - sdp.cons[i].apply(rc_zinv) + sdp.cons[i].apply(&x_rd_zinv)),
            );
            let dy = factor.solve(&rhs);
            let mut dz = rd.clone();
            for (i, c) in sdp.cons.iter().enumerate() {
                c.add_scaled_to(-dy[i], &mut dz);
            }
            let mut dx = x.zeros_like();
            for blk in 0..sizes.len() {
                let t = &rc_zinv.psd[blk] - &x.psd[blk] * &dz.psd[blk] * &zinv[blk];
                dx.psd[blk] = (&t + t.transpose()) * 0.5;
            }
            dx.lp = &rc_zinv.lp - x.lp.component_mul(&dz.lp).component_mul(&zinv_lp);
            (dx, dy, dz)
        };

        // Predictor: R_c Z^-1 = -X.
        let mut rc = x.clone();
        rc.psd.iter_mut().for_each(|b| *b *= -1.0);
        rc.lp *= -1.0;
        let (dxa, _, dza) = direction(&rc);
        let ap = max_step(&x, &dxa)?.min(1.0);
        let ad = max_step(&z, &dza)?.min(1.0);
        let mut xa = x.clone();
        xa.axpy(ap, &dxa);
        let mut za = z.clone();
        za.axpy(ad, &dza);
        let mu_aff = xa.dot(&za) / nf;
        let sigma = (mu_aff / mu).clamp(0.0, 1.0).powi(3);

        // Corrector: R_c Z^-1 = σμ Z^-1 - X - dXa dZa Z^-1.
        let mut rc = x.zeros_like();
        for blk in 0..sizes.len() {
            rc.psd[blk] = &zinv[blk] * (sigma * mu) - &x.psd[blk] - &dxa.psd[blk] * &dza.psd[blk] * &zinv[blk];
        }
        rc.lp = zinv_lp.map(|v| sigma * mu * v) - &x.lp - dxa.lp.component_mul(&dza.lp).component_mul(&zinv_lp);
        let (dx, dy, dz) = direction(&rc);
        let ap = (0.98 * max_step(&x, &dx)?).min(1.0);
        let ad = (0.98 * max_step(&z, &dz)?).min(1.0);
        x.axpy(ap, &dx);
        y += &dy * ad;
        z.axpy(ad, &dz);
        if !(x.norm().is_finite() && z.norm().is_finite()) || x.norm() > 1e12 * xi0 {
            return Err(Error::Numerical(format!("iterates diverged at iteration {iter}; the relaxation is likely infeasible")));
        }
    }
    Err(Error::Numerical(format!("no convergence in {} iterations", settings.max_iter)))
}

fn rank_ratio(x: &BlockVar) -> f64 {
    x.psd
        .iter()
        .map(|b| {
            // Eigenvalues of a realified Hermitian matrix come in pairs.
            let mut ev: Vec<f64> = b.clone().symmetric_eigenvalues().iter().copied().collect();
            ev.sort_by(|a, b| b.total_cmp(a));
            if ev[0] > 0.0 { ev.get(2).copied().unwrap_or(0.0).max(0.0) / ev[0] } else { 0.0 }
        })
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::ChannelState;
    use crate::model::{PowerModel, QosSpec};
    use num_complex::Complex;

    #[test]
    fn single_user_matches_closed_form() {
        // γσ²/(η ||h||²) with ||h||² = 5, η = 2, γ = 3, σ² = 0.5
        let ch = ChannelState::from_rows(&[2], vec![vec![Complex::new(1.0, 0.0), Complex::new(0.0, 2.0)]]).unwrap();
        let qos = QosSpec::new(vec![3.0], vec![0.5]).unwrap();
        let model = PowerModel::uniform(1, 2.0, 100.0, 1.0).unwrap();
        let data = ProblemData::new(&ch, &qos, &model).unwrap();
        let sol = sdr_power_min(&[0], &data, &SdrSettings::default()).unwrap();
        let expect = 3.0 * 0.5 / 5.0 / 2.0;
        assert!((sol.transmit_power - expect).abs() < 1e-8 * expect, "{sol:?}");
        assert!(sol.rank_ratio < 1e-6);
    }

    #[test]
    fn orthogonal_users_decouple() {
        let ch = ChannelState::from_rows(
            &[1, 1],
            vec![
                vec![Complex::new(2.0, 0.0), Complex::new(0.0, 0.0)],
                vec![Complex::new(0.0, 0.0), Complex::new(0.0, 1.0)],
            ],
        )
        .unwrap();
        let qos = QosSpec::new(vec![1.0, 4.0], vec![1.0, 1.0]).unwrap();
        let model = PowerModel::uniform(2, 1.0, 100.0, 1.0).unwrap();
        let data = ProblemData::new(&ch, &qos, &model).unwrap();
        let sol = sdr_power_min(&[0, 1], &data, &SdrSettings::default()).unwrap();
        assert!((sol.transmit_power - (0.25 + 4.0)).abs() < 1e-8, "{sol:?}");
    }

    #[test]
    fn binding_cap_is_infeasible() {
        let ch = ChannelState::from_rows(&[1], vec![vec![Complex::new(1.0, 0.0)]]).unwrap();
        let qos = QosSpec::new(vec![2.0], vec![1.0]).unwrap();
        let model = PowerModel::uniform(1, 1.0, 1.0, 1.0).unwrap();
        let data = ProblemData::new(&ch, &qos, &model).unwrap();
        assert!(sdr_power_min(&[0], &data, &SdrSettings::default()).is_err());
    }
}
