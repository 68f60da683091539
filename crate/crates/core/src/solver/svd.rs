//! Singular value decomposition and the pseudoinverse solver built on it.
//!
//! The decomposition reduces the matrix to upper bidiagonal form with
//! Householder reflections (Golub–Kahan), then chases the bulge with
//! implicitly shifted QR sweeps until every superdiagonal entry is below
//! `ε·(|dᵢ| + |dᵢ₊₁|)`. Matrices with more columns than rows are handled
//! through their transpose.

use std::sync::Arc;

use super::{default_rtol, LinearSolver, Solution, SolveResult, Spaces};
use crate::error::Result;
use crate::matrix::Matrix;
use crate::operator::{Operator, OperatorInfo};
use crate::structure::TreeVector;

/// Thin SVD `A = U diag(σ) Vᵀ` with `k = min(m, n)` singular values in
/// nonincreasing order. `U` is `m × k`, `V` is `n × k`.
#[derive(Clone, Debug)]
pub struct SvdFactors {
    pub u: Matrix,
    pub sigma: Vec<f64>,
    pub v: Matrix,
    /// False when the QR sweeps hit their iteration limit.
    pub converged: bool,
}

impl SvdFactors {
    /// Number of singular values above `rtol · σ_max`.
    pub fn rank(&self, rtol: f64) -> usize {
        let cutoff = rtol * self.sigma.first().copied().unwrap_or(0.0);
        self.sigma.iter().filter(|&&s| s > cutoff && s > 0.0).count()
    }
}

/// Computes the thin SVD of `a`.
pub fn svd(a: &Matrix) -> SvdFactors {
    let (m, n) = a.shape();
    if m >= n {
        golub_kahan(a)
    } else {
        let t = golub_kahan(&a.transpose());
        SvdFactors {
            u: t.v,
            sigma: t.sigma,
            v: t.u,
            converged: t.converged,
        }
    }
}

fn hypot(a: f64, b: f64) -> f64 {
    a.hypot(b)
}

/// Requires `m ≥ n`.
fn golub_kahan(a_in: &Matrix) -> SvdFactors {
    let (m, n) = a_in.shape();
    if n == 0 {
        return SvdFactors {
            u: Matrix::zeros(m, 0),
            sigma: Vec::new(),
            v: Matrix::zeros(0, 0),
            converged: true,
        };
    }
    let mut a = a_in.clone();
    let nu = n;
    let mut s = vec![0.0; n];
    let mut u = Matrix::zeros(m, nu);
    let mut v = Matrix::zeros(n, n);
    let mut e = vec![0.0; n];
    let mut work = vec![0.0; m];

    // Reduce to bidiagonal form, storing the diagonal in `s` and the
    // superdiagonal in `e`.
    let nct = (m - 1).min(n);
    let nrt = n.saturating_sub(2).min(m);
    for k in 0..nct.max(nrt) {
        if k < nct {
            // Column reflector: zero A[k+1.., k].
            s[k] = 0.0;
            for i in k..m {
                s[k] = hypot(s[k], a[(i, k)]);
            }
            if s[k] != 0.0 {
                if a[(k, k)] < 0.0 {
                    s[k] = -s[k];
                }
                for i in k..m {
                    a[(i, k)] /= s[k];
                }
                a[(k, k)] += 1.0;
            }
            s[k] = -s[k];
        }
        for j in k + 1..n {
            if k < nct && s[k] != 0.0 {
                let mut t = 0.0;
                for i in k..m {
                    t += a[(i, k)] * a[(i, j)];
                }
                t = -t / a[(k, k)];
                for i in k..m {
                    a[(i, j)] += t * a[(i, k)];
                }
            }
            e[j] = a[(k, j)];
        }
        if k < nct {
            for i in k..m {
                u[(i, k)] = a[(i, k)];
            }
        }
        if k < nrt {
            // Row reflector: zero e[k+2..].
            e[k] = 0.0;
            for i in k + 1..n {
                e[k] = hypot(e[k], e[i]);
            }
            if e[k] != 0.0 {
                if e[k + 1] < 0.0 {
                    e[k] = -e[k];
                }
                for i in k + 1..n {
                    e[i] /= e[k];
                }
                e[k + 1] += 1.0;
            }
            e[k] = -e[k];
            if k + 1 < m && e[k] != 0.0 {
                for w in work.iter_mut().skip(k + 1) {
                    *w = 0.0;
                }
                for j in k + 1..n {
                    for i in k + 1..m {
                        work[i] += e[j] * a[(i, j)];
                    }
                }
                for j in k + 1..n {
                    let t = -e[j] / e[k + 1];
                    for i in k + 1..m {
                        a[(i, j)] += t * work[i];
                    }
                }
            }
            for i in k + 1..n {
                v[(i, k)] = e[i];
            }
        }
    }

    let mut p = n.min(m + 1);
    if nct < n {
        s[nct] = a[(nct, nct)];
    }
    if m < p {
        s[p - 1] = 0.0;
    }
    if nrt + 1 < p {
        e[nrt] = a[(nrt, p - 1)];
    }
    e[p - 1] = 0.0;

    // Accumulate U.
    for j in nct..nu {
        for i in 0..m {
            u[(i, j)] = 0.0;
        }
        u[(j, j)] = 1.0;
    }
    for k in (0..nct).rev() {
        if s[k] != 0.0 {
            for j in k + 1..nu {
                let mut t = 0.0;
                for i in k..m {
                    t += u[(i, k)] * u[(i, j)];
                }
                t = -t / u[(k, k)];
                for i in k..m {
                    u[(i, j)] += t * u[(i, k)];
                }
            }
            for i in k..m {
                u[(i, k)] = -u[(i, k)];
            }
            u[(k, k)] += 1.0;
            for i in 0..k {
                u[(i, k)] = 0.0;
            }
        } else {
            for i in 0..m {
                u[(i, k)] = 0.0;
            }
            u[(k, k)] = 1.0;
        }
    }

    // Accumulate V.
    for k in (0..n).rev() {
        if k < nrt && e[k] != 0.0 {
            for j in k + 1..n {
                let mut t = 0.0;
                for i in k + 1..n {
                    t += v[(i, k)] * v[(i, j)];
                }
                t = -t / v[(k + 1, k)];
                for i in k + 1..n {
                    v[(i, j)] += t * v[(i, k)];
                }
            }
        }
        for i in 0..n {
            v[(i, k)] = 0.0;
        }
        v[(k, k)] = 1.0;
    }

    // Implicit-shift QR on the bidiagonal.
    let pp = p - 1;
    let eps = f64::EPSILON;
    let tiny = 2f64.powi(-966);
    let max_sweeps = 75 * n;
    let mut sweeps = 0;
    let mut converged = true;
    while p > 0 {
        // Find the largest k < p-1 with negligible e[k]; k = -1 if none.
        let mut k: isize = p as isize - 2;
        while k >= 0 {
            let ku = k as usize;
            if e[ku].abs() <= tiny + eps * (s[ku].abs() + s[ku + 1].abs()) {
                e[ku] = 0.0;
                break;
            }
            k -= 1;
        }
        let kase;
        if k == p as isize - 2 {
            kase = 4;
        } else {
            let mut ks: isize = p as isize - 1;
            while ks > k {
                let ksu = ks as usize;
                let t = (if ksu != p { e[ksu].abs() } else { 0.0 })
                    + (if ks != k + 1 { e[ksu - 1].abs() } else { 0.0 });
                if s[ksu].abs() <= tiny + eps * t {
                    s[ksu] = 0.0;
                    break;
                }
                ks -= 1;
            }
            if ks == k {
                kase = 3;
            } else if ks == p as isize - 1 {
                kase = 1;
            } else {
                kase = 2;
                k = ks;
            }
        }
        let k = (k + 1) as usize;

        match kase {
            // Deflate a negligible s[p-1].
            1 => {
                let mut f = e[p - 2];
                e[p - 2] = 0.0;
                for j in (k..=p - 2).rev() {
                    let t = hypot(s[j], f);
                    let cs = s[j] / t;
                    let sn = f / t;
                    s[j] = t;
                    if j != k {
                        f = -sn * e[j - 1];
                        e[j - 1] *= cs;
                    }
                    for i in 0..n {
                        let t = cs * v[(i, j)] + sn * v[(i, p - 1)];
                        v[(i, p - 1)] = -sn * v[(i, j)] + cs * v[(i, p - 1)];
                        v[(i, j)] = t;
                    }
                }
            }
            // Split at a negligible s[k-1].
            2 => {
                let mut f = e[k - 1];
                e[k - 1] = 0.0;
                for j in k..p {
                    let t = hypot(s[j], f);
                    let cs = s[j] / t;
                    let sn = f / t;
                    s[j] = t;
                    f = -sn * e[j];
                    e[j] *= cs;
                    for i in 0..m {
                        let t = cs * u[(i, j)] + sn * u[(i, k - 1)];
                        u[(i, k - 1)] = -sn * u[(i, j)] + cs * u[(i, k - 1)];
                        u[(i, j)] = t;
                    }
                }
            }
            // One QR sweep with a Wilkinson-style shift.
            3 => {
                sweeps += 1;
                if sweeps > max_sweeps {
                    converged = false;
                    break;
                }
                let scale = s[p - 1]
                    .abs()
                    .max(s[p - 2].abs())
                    .max(e[p - 2].abs())
                    .max(s[k].abs())
                    .max(e[k].abs());
                let sp = s[p - 1] / scale;
                let spm1 = s[p - 2] / scale;
                let epm1 = e[p - 2] / scale;
                let sk = s[k] / scale;
                let ek = e[k] / scale;
                let b = ((spm1 + sp) * (spm1 - sp) + epm1 * epm1) / 2.0;
                let c = (sp * epm1) * (sp * epm1);
                let mut shift = 0.0;
                if b != 0.0 || c != 0.0 {
                    shift = (b * b + c).sqrt();
                    if b < 0.0 {
                        shift = -shift;
                    }
                    shift = c / (b + shift);
                }
                let mut f = (sk + sp) * (sk - sp) + shift;
                let mut g = sk * ek;
                for j in k..p - 1 {
                    let mut t = hypot(f, g);
                    let mut cs = f / t;
                    let mut sn = g / t;
                    if j != k {
                        e[j - 1] = t;
                    }
                    f = cs * s[j] + sn * e[j];
                    e[j] = cs * e[j] - sn * s[j];
                    g = sn * s[j + 1];
                    s[j + 1] *= cs;
                    for i in 0..n {
                        let t = cs * v[(i, j)] + sn * v[(i, j + 1)];
                        v[(i, j + 1)] = -sn * v[(i, j)] + cs * v[(i, j + 1)];
                        v[(i, j)] = t;
                    }
                    t = hypot(f, g);
                    cs = f / t;
                    sn = g / t;
                    s[j] = t;
                    f = cs * e[j] + sn * s[j + 1];
                    s[j + 1] = -sn * e[j] + cs * s[j + 1];
                    g = sn * e[j + 1];
                    e[j + 1] *= cs;
                    if j < m - 1 {
                        for i in 0..m {
                            let t = cs * u[(i, j)] + sn * u[(i, j + 1)];
                            u[(i, j + 1)] = -sn * u[(i, j)] + cs * u[(i, j + 1)];
                            u[(i, j)] = t;
                        }
                    }
                }
                e[p - 2] = f;
            }
            // s[k] converged: make it nonnegative and sort it into place.
            _ => {
                if s[k] <= 0.0 {
                    s[k] = if s[k] < 0.0 { -s[k] } else { 0.0 };
                    for i in 0..=pp {
                        v[(i, k)] = -v[(i, k)];
                    }
                }
                let mut k = k;
                while k < pp {
                    if s[k] >= s[k + 1] {
                        break;
                    }
                    s.swap(k, k + 1);
                    if k < n - 1 {
                        for i in 0..n {
                            let t = v[(i, k + 1)];
                            v[(i, k + 1)] = v[(i, k)];
                            v[(i, k)] = t;
                        }
                    }
                    if k < m - 1 {
                        for i in 0..m {
                            let t = u[(i, k + 1)];
                            u[(i, k + 1)] = u[(i, k)];
                            u[(i, k)] = t;
                        }
                    }
                    k += 1;
                }
                sweeps = 0;
                p -= 1;
            }
        }
    }

    SvdFactors {
        u,
        sigma: s,
        v,
        converged,
    }
}

/// Pseudoinverse solver: `x = V Σ† Uᵀ b`, treating singular values below
/// `rtol · σ_max` as zero. Handles every shape and rank.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Svd {
    /// Overrides the default `max(m, n) · ε · 2⁶` cutoff.
    pub rtol: Option<f64>,
}

#[derive(Clone, Debug)]
struct Factors {
    svd: SvdFactors,
    /// Reciprocals of the retained singular values, zero elsewhere.
    sigma_pinv: Vec<f64>,
    a: Matrix,
}

#[derive(Clone, Debug)]
pub struct SvdState {
    factors: Arc<Factors>,
    transposed: bool,
    spaces: Spaces,
}

impl SvdState {
    pub fn factors(&self) -> &SvdFactors {
        &self.factors.svd
    }

    pub fn rank(&self) -> usize {
        self.factors.sigma_pinv.iter().filter(|&&s| s != 0.0).count()
    }
}

impl Svd {
    pub fn with_rtol(rtol: f64) -> Self {
        Svd { rtol: Some(rtol) }
    }
}

impl LinearSolver for Svd {
    type State = SvdState;

    fn name(&self) -> &'static str {
        "svd"
    }

    fn check(&self, _: &OperatorInfo) -> Result<()> {
        Ok(())
    }

    fn init(&self, op: &Operator) -> Result<SvdState> {
        let a = op.as_matrix()?;
        let (m, n) = a.shape();
        let svd = svd(&a);
        let rtol = self.rtol.unwrap_or_else(|| default_rtol(m, n));
        let cutoff = rtol * svd.sigma.first().copied().unwrap_or(0.0);
        let sigma_pinv = svd
            .sigma
            .iter()
            .map(|&s| if s > cutoff && s > 0.0 { 1.0 / s } else { 0.0 })
            .collect();
        Ok(SvdState {
            factors: Arc::new(Factors { svd, sigma_pinv, a }),
            transposed: false,
            spaces: Spaces::of(op),
        })
    }

    fn compute(&self, state: &SvdState, b: &TreeVector) -> Result<Solution> {
        state.spaces.check_rhs(b)?;
        let f = &state.factors;
        if !f.svd.converged {
            return Ok(Solution::failed(&state.spaces.input, SolveResult::Breakdown));
        }
        // A† = V Σ† Uᵀ and (Aᵀ)† = U Σ† Vᵀ.
        let (left, right) = if state.transposed {
            (&f.svd.u, &f.svd.v)
        } else {
            (&f.svd.v, &f.svd.u)
        };
        let mut coeffs = right.matvec_t(b.as_slice());
        for (c, s) in coeffs.iter_mut().zip(&f.sigma_pinv) {
            *c *= s;
        }
        let x = left.matvec(&coeffs);
        Ok(if state.transposed {
            state.spaces.finish(x, b, |x| f.a.matvec_t(x))
        } else {
            state.spaces.finish(x, b, |x| f.a.matvec(x))
        })
    }

    fn transpose(&self, state: &SvdState) -> SvdState {
        SvdState {
            factors: Arc::clone(&state.factors),
            transposed: !state.transposed,
            spaces: state.spaces.swapped(),
        }
    }

    fn allow_dependent_rows(&self, _: &OperatorInfo) -> bool {
        true
    }

    fn allow_dependent_columns(&self, _: &OperatorInfo) -> bool {
        true
    }
}
