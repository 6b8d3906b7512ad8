//! Dense primal-dual interior-point method for LP + PSD cone programs.
//!
//! The problem is brought into the standard form
//!
//! ```text
//! minimize c·x  subject to  G x + s = h,  A x = b,  s ∈ K
//! ```
//!
//! where `K` is a product of a nonnegative orthant (variable bounds) and PSD
//! cones stored in scaled lower-triangular vectorization (`svec`). The
//! iteration runs on the homogeneous self-dual embedding with Nesterov-Todd
//! scaling and a Mehrotra predictor-corrector step, so infeasibility is
//! reported through certificates instead of divergence.

use nalgebra::{DMatrix, DVector};

use super::problem::ConicProblem;

const STEP_FRACTION: f64 = 0.99;
const REFINEMENT_STEPS: usize = 3;
const SQRT2: f64 = std::f64::consts::SQRT_2;
const EQUILIBRATION_PASSES: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    /// Primal and dual residual tolerance (relative).
    pub feastol: f64,
    /// Absolute duality-gap tolerance.
    pub abstol: f64,
    /// Relative duality-gap tolerance.
    pub reltol: f64,
    pub max_iterations: usize,
    /// Print one line per iteration to stderr.
    pub verbose: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            feastol: 1e-8,
            abstol: 1e-8,
            reltol: 1e-8,
            max_iterations: 200,
            verbose: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolveStatus {
    Optimal,
    MaxIterations,
    /// A primal infeasibility certificate was found.
    Infeasible,
    /// A dual infeasibility certificate was found.
    Unbounded,
    NumericalFailure,
}

impl std::fmt::Display for SolveStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Optimal => "optimal",
            Self::MaxIterations => "max-iterations",
            Self::Infeasible => "infeasible",
            Self::Unbounded => "unbounded",
            Self::NumericalFailure => "numerical-failure",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverOutput {
    pub status: SolveStatus,
    /// Last primal iterate, normalized by the homogenizing variable.
    pub x: Vec<f64>,
    /// Multipliers of the equality constraints.
    pub y: Vec<f64>,
    pub primal_objective: f64,
    pub dual_objective: f64,
    pub primal_residual: f64,
    pub dual_residual: f64,
    /// Relative duality gap.
    pub gap: f64,
    pub iterations: usize,
}

/// A solver for [`ConicProblem`]s.
pub trait ConicSolver {
    fn solve(&self, problem: &ConicProblem) -> SolverOutput;
}

#[derive(Debug, Clone, Default)]
pub struct InteriorPointSolver {
    pub config: SolverConfig,
}

impl InteriorPointSolver {
    pub fn new(config: SolverConfig) -> Self {
        Self { config }
    }
}

impl ConicSolver for InteriorPointSolver {
    fn solve(&self, problem: &ConicProblem) -> SolverOutput {
        let mut std = StandardForm::from_problem(problem);
        let scale = std.equilibrate(EQUILIBRATION_PASSES);
        let mut out = run(&std, &self.config);
        for (x, d) in out.x.iter_mut().zip(scale.col.iter()) {
            *x *= d;
        }
        for (y, e) in out.y.iter_mut().zip(scale.eq_row.iter()) {
            *y *= e;
        }
        out
    }
}

fn svec_len(d: usize) -> usize {
    d * (d + 1) / 2
}

fn svec_into(m: &DMatrix<f64>, out: &mut [f64]) {
    let d = m.nrows();
    let mut k = 0;
    for j in 0..d {
        out[k] = m[(j, j)];
        k += 1;
        for i in j + 1..d {
            out[k] = SQRT2 * 0.5 * (m[(i, j)] + m[(j, i)]);
            k += 1;
        }
    }
}

fn smat(v: &[f64], d: usize) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(d, d);
    let mut k = 0;
    for j in 0..d {
        m[(j, j)] = v[k];
        k += 1;
        for i in j + 1..d {
            let x = v[k] / SQRT2;
            m[(i, j)] = x;
            m[(j, i)] = x;
            k += 1;
        }
    }
    m
}

/// Layout of the cone `K`: `lp` orthant entries followed by PSD blocks.
#[derive(Debug, Clone)]
struct Cones {
    lp: usize,
    dims: Vec<usize>,
    offsets: Vec<usize>,
    len: usize,
}

impl Cones {
    fn new(lp: usize, dims: Vec<usize>) -> Self {
        let mut offsets = Vec::with_capacity(dims.len());
        let mut at = lp;
        for &d in &dims {
            offsets.push(at);
            at += svec_len(d);
        }
        Self {
            lp,
            dims,
            offsets,
            len: at,
        }
    }

    /// Barrier degree.
    fn degree(&self) -> f64 {
        (self.lp + self.dims.iter().sum::<usize>()) as f64
    }

    fn block<'a>(&self, v: &'a [f64], k: usize) -> &'a [f64] {
        &v[self.offsets[k]..self.offsets[k] + svec_len(self.dims[k])]
    }

    fn block_mut<'a>(&self, v: &'a mut [f64], k: usize) -> &'a mut [f64] {
        &mut v[self.offsets[k]..self.offsets[k] + svec_len(self.dims[k])]
    }

    fn identity(&self) -> DVector<f64> {
        let mut e = DVector::zeros(self.len);
        for i in 0..self.lp {
            e[i] = 1.0;
        }
        for (k, &d) in self.dims.iter().enumerate() {
            svec_into(
                &DMatrix::identity(d, d),
                self.block_mut(e.as_mut_slice(), k),
            );
        }
        e
    }

    /// Smallest `t` with `v + t e` in the cone, i.e. minus the smallest
    /// eigenvalue.
    fn min_eig(&self, v: &DVector<f64>) -> f64 {
        let mut lo = f64::INFINITY;
        for i in 0..self.lp {
            lo = lo.min(v[i]);
        }
        for (k, &d) in self.dims.iter().enumerate() {
            let m = smat(self.block(v.as_slice(), k), d);
            lo = lo.min(m.symmetric_eigenvalues().min());
        }
        lo
    }

    /// Jordan product `u ∘ v`.
    fn jordan(&self, u: &DVector<f64>, v: &DVector<f64>) -> DVector<f64> {
        let mut out = DVector::zeros(self.len);
        for i in 0..self.lp {
            out[i] = u[i] * v[i];
        }
        for (k, &d) in self.dims.iter().enumerate() {
            let a = smat(self.block(u.as_slice(), k), d);
            let b = smat(self.block(v.as_slice(), k), d);
            let p = (&a * &b + &b * &a) * 0.5;
            svec_into(&p, self.block_mut(out.as_mut_slice(), k));
        }
        out
    }
}

/// Nesterov-Todd scaling at a strictly feasible `(s, z)` pair.
struct Scaling {
    /// LP part: `W = diag(w)`.
    w: Vec<f64>,
    /// PSD part: `W(U) = Rᵀ U R`, stored as `(R, R⁻¹)`.
    r: Vec<(DMatrix<f64>, DMatrix<f64>)>,
    /// Scaled point `λ = W z = W⁻ᵀ s`; PSD blocks are diagonal, stored as
    /// eigenvalues.
    lambda_lp: Vec<f64>,
    lambda_psd: Vec<Vec<f64>>,
}

impl Scaling {
    fn compute(cones: &Cones, s: &DVector<f64>, z: &DVector<f64>) -> Option<Self> {
        let mut w = Vec::with_capacity(cones.lp);
        let mut lambda_lp = Vec::with_capacity(cones.lp);
        for i in 0..cones.lp {
            if !(s[i] > 0.0 && z[i] > 0.0) {
                return None;
            }
            w.push((s[i] / z[i]).sqrt());
            lambda_lp.push((s[i] * z[i]).sqrt());
        }
        let mut r = Vec::with_capacity(cones.dims.len());
        let mut lambda_psd = Vec::with_capacity(cones.dims.len());
        for (k, &d) in cones.dims.iter().enumerate() {
            let sm = smat(cones.block(s.as_slice(), k), d);
            let zm = smat(cones.block(z.as_slice(), k), d);
            let ls = sm.cholesky()?.l();
            let lz = zm.cholesky()?.l();
            let svd = (lz.transpose() * &ls).svd(true, true);
            let u = svd.u?;
            let vt = svd.v_t?;
            let sig = svd.singular_values;
            if sig.iter().any(|&x| !(x > 0.0)) {
                return None;
            }
            let inv_sqrt = DMatrix::from_diagonal(&sig.map(|x| 1.0 / x.sqrt()));
            let rm = &ls * vt.transpose() * &inv_sqrt;
            let rinv = &inv_sqrt * u.transpose() * lz.transpose();
            r.push((rm, rinv));
            lambda_psd.push(sig.iter().copied().collect());
        }
        Some(Self {
            w,
            r,
            lambda_lp,
            lambda_psd,
        })
    }

    fn lambda(&self, cones: &Cones) -> DVector<f64> {
        let mut out = DVector::zeros(cones.len);
        out.as_mut_slice()[..cones.lp].copy_from_slice(&self.lambda_lp);
        for (k, lam) in self.lambda_psd.iter().enumerate() {
            let m = DMatrix::from_diagonal(&DVector::from_column_slice(lam));
            svec_into(&m, cones.block_mut(out.as_mut_slice(), k));
        }
        out
    }

    fn apply(&self, cones: &Cones, v: &[f64], out: &mut [f64], kind: Op) {
        for i in 0..cones.lp {
            out[i] = match kind {
                Op::Wt => self.w[i] * v[i],
                Op::WinvT | Op::Winv => v[i] / self.w[i],
            };
        }
        for (k, &d) in cones.dims.iter().enumerate() {
            let m = smat(cones.block(v, k), d);
            let (r, rinv) = &self.r[k];
            let res = match kind {
                Op::Wt => r * m * r.transpose(),
                Op::WinvT => rinv * m * rinv.transpose(),
                Op::Winv => rinv.transpose() * m * rinv,
            };
            svec_into(&res, cones.block_mut(out, k));
        }
    }

    fn op(&self, cones: &Cones, v: &DVector<f64>, kind: Op) -> DVector<f64> {
        let mut out = DVector::zeros(cones.len);
        self.apply(cones, v.as_slice(), out.as_mut_slice(), kind);
        out
    }

    /// Solves `λ ∘ u = v` for `u`.
    fn lambda_div(&self, cones: &Cones, v: &DVector<f64>) -> DVector<f64> {
        let mut out = DVector::zeros(cones.len);
        for i in 0..cones.lp {
            out[i] = v[i] / self.lambda_lp[i];
        }
        for (k, &d) in cones.dims.iter().enumerate() {
            let lam = &self.lambda_psd[k];
            let mut m = smat(cones.block(v.as_slice(), k), d);
            for j in 0..d {
                for i in 0..d {
                    m[(i, j)] *= 2.0 / (lam[i] + lam[j]);
                }
            }
            svec_into(&m, cones.block_mut(out.as_mut_slice(), k));
        }
        out
    }

    /// Largest `α` (capped at `cap`) with `λ + α Δ` in the cone.
    fn max_step(&self, cones: &Cones, delta: &DVector<f64>, cap: f64) -> f64 {
        let mut alpha = cap;
        for i in 0..cones.lp {
            if delta[i] < 0.0 {
                alpha = alpha.min(-self.lambda_lp[i] / delta[i]);
            }
        }
        for (k, &d) in cones.dims.iter().enumerate() {
            let lam = &self.lambda_psd[k];
            let mut m = smat(cones.block(delta.as_slice(), k), d);
            for j in 0..d {
                for i in 0..d {
                    m[(i, j)] /= (lam[i] * lam[j]).sqrt();
                }
            }
            let lo = m.symmetric_eigenvalues().min();
            if lo < 0.0 {
                alpha = alpha.min(-1.0 / lo);
            }
        }
        alpha
    }
}

#[derive(Clone, Copy)]
enum Op {
    Wt,
    WinvT,
    Winv,
}

struct StandardForm {
    n: usize,
    c: DVector<f64>,
    a: DMatrix<f64>,
    b: DVector<f64>,
    g: DMatrix<f64>,
    h: DVector<f64>,
    cones: Cones,
}

impl StandardForm {
    fn from_problem(p: &ConicProblem) -> Self {
        let n = p.num_vars;
        let mut lp_rows: Vec<(usize, f64, f64)> = Vec::new();
        for (i, b) in p.bounds.iter().enumerate() {
            // x_i - s = lower  ->  -x_i + s = -lower
            if let Some(lo) = b.lower {
                lp_rows.push((i, -1.0, -lo));
            }
            // x_i + s = upper
            if let Some(hi) = b.upper {
                lp_rows.push((i, 1.0, hi));
            }
        }
        let dims: Vec<usize> = p.psd_blocks.iter().map(|b| b.dim).collect();
        let cones = Cones::new(lp_rows.len(), dims);
        let mut g = DMatrix::zeros(cones.len, n);
        let mut h = DVector::zeros(cones.len);
        for (row, &(var, coef, rhs)) in lp_rows.iter().enumerate() {
            g[(row, var)] = coef;
            h[row] = rhs;
        }
        // F0 + Σ x_i F_i = s  ->  G_i = -svec(F_i), h = svec(F0)
        let mut buf = vec![0.0; cones.len];
        for (k, block) in p.psd_blocks.iter().enumerate() {
            svec_into(
                &block.constant_matrix(),
                cones.block_mut(h.as_mut_slice(), k),
            );
            for t in &block.terms {
                let m = DMatrix::from_row_slice(block.dim, block.dim, &t.matrix);
                let dst = cones.block_mut(&mut buf, k);
                svec_into(&m, dst);
                let off = cones.offsets[k];
                for (r, v) in dst.iter().enumerate() {
                    g[(off + r, t.var)] = -v;
                }
            }
        }
        let neq = p.equalities.len();
        let a = DMatrix::from_fn(neq, n, |r, col| p.equalities[r].coefficients[col]);
        let b = DVector::from_iterator(neq, p.equalities.iter().map(|e| e.rhs));
        Self {
            n,
            c: DVector::from_column_slice(&p.objective),
            a,
            b,
            g,
            h,
            cones,
        }
    }
}

/// Positive diagonal scalings with `x = col ∘ x̃` and `y = eq_row ∘ ỹ`,
/// where `x̃`, `ỹ` solve the equilibrated problem.
struct Equilibration {
    col: DVector<f64>,
    eq_row: DVector<f64>,
}

fn inv_sqrt(v: f64) -> f64 {
    if v > 0.0 && v.is_finite() {
        1.0 / v.sqrt()
    } else {
        1.0
    }
}

impl StandardForm {
    /// Ruiz-style equilibration of `[A; G]`. Variables, equality rows and LP
    /// rows get plain diagonal scalings; each PSD block gets a diagonal
    /// congruence `D S D`, which maps the cone onto itself.
    ///
    /// Without this, relaxations of large arrays mix entries of order `x²`
    /// with entries of order one, and the primal residual stalls well above
    /// tolerance.
    fn equilibrate(&mut self, passes: usize) -> Equilibration {
        let n = self.n;
        let neq = self.a.nrows();
        let mut col = DVector::from_element(n, 1.0);
        let mut eq_row = DVector::from_element(neq, 1.0);
        let pairs: Vec<Vec<(usize, usize)>> = self.cones.dims.iter().map(|&d| svec_pairs(d)).collect();
        for _ in 0..passes {
            let cs = DVector::from_fn(n, |j, _| {
                let a = self.a.column(j).amax();
                let g = self.g.column(j).amax();
                inv_sqrt(a.max(g))
            });
            let rs = DVector::from_fn(neq, |i, _| inv_sqrt(self.a.row(i).amax()));
            let mut gs = DVector::from_element(self.cones.len, 1.0);
            for r in 0..self.cones.lp {
                gs[r] = inv_sqrt(self.g.row(r).amax());
            }
            for (k, &d) in self.cones.dims.iter().enumerate() {
                let off = self.cones.offsets[k];
                let mut largest = vec![0.0f64; d];
                for (e, &(p, q)) in pairs[k].iter().enumerate() {
                    let v = self.g.row(off + e).amax();
                    largest[p] = largest[p].max(v);
                    largest[q] = largest[q].max(v);
                }
                let dk: Vec<f64> = largest.into_iter().map(inv_sqrt).collect();
                for (e, &(p, q)) in pairs[k].iter().enumerate() {
                    gs[off + e] = dk[p] * dk[q];
                }
            }
            for j in 0..n {
                self.a.column_mut(j).scale_mut(cs[j]);
                self.g.column_mut(j).scale_mut(cs[j]);
            }
            for i in 0..neq {
                self.a.row_mut(i).scale_mut(rs[i]);
            }
            for r in 0..self.cones.len {
                self.g.row_mut(r).scale_mut(gs[r]);
            }
            self.b.component_mul_assign(&rs);
            self.h.component_mul_assign(&gs);
            self.c.component_mul_assign(&cs);
            col.component_mul_assign(&cs);
            eq_row.component_mul_assign(&rs);
        }
        Equilibration { col, eq_row }
    }
}

/// Matrix index pair of every `svec` entry, in `svec` order.
fn svec_pairs(d: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::with_capacity(svec_len(d));
    for j in 0..d {
        out.push((j, j));
        for i in j + 1..d {
            out.push((i, j));
        }
    }
    out
}

/// Factorized KKT system for one scaling.
///
/// The equality constraints are eliminated through a QR factorization
/// `Aᵀ = [Q1 Q2] [R1; 0]`, and the remaining least-squares problem in the
/// null space of `A` is solved with a second QR factorization
/// `W⁻ᵀ G Q2 = Q3 R3`, which avoids forming the normal equations.
struct Kkt<'a> {
    sf: &'a StandardForm,
    /// `W⁻ᵀ G`
    g_scaled: DMatrix<f64>,
    /// `W⁻ᵀ G Q1`
    gs1: DMatrix<f64>,
    q3: DMatrix<f64>,
    r3: DMatrix<f64>,
}

/// Null-space factorization of `Aᵀ`, shared by every scaling.
struct EqualityBasis {
    q1: DMatrix<f64>,
    q2: DMatrix<f64>,
    r1: DMatrix<f64>,
}

impl EqualityBasis {
    fn new(a: &DMatrix<f64>) -> Option<Self> {
        let (p, n) = a.shape();
        if p > n {
            return None;
        }
        // QR of [Aᵀ I] yields a full orthonormal basis whose leading p
        // columns span the range of Aᵀ.
        let mut aug = DMatrix::zeros(n, p + n);
        aug.view_mut((0, 0), (n, p)).copy_from(&a.transpose());
        aug.view_mut((0, p), (n, n)).fill_with_identity();
        let qr = aug.qr();
        let q = qr.q();
        let r = qr.r();
        let r1 = r.view((0, 0), (p, p)).into_owned();
        let scale = a.amax().max(1.0);
        if (0..p).any(|i| !(r1[(i, i)].abs() > 1e-12 * scale)) {
            return None;
        }
        Some(Self {
            q1: q.columns(0, p).into_owned(),
            q2: q.columns(p, n - p).into_owned(),
            r1,
        })
    }
}

impl<'a> Kkt<'a> {
    fn new(sf: &'a StandardForm, basis: &EqualityBasis, scaling: Option<&Scaling>) -> Option<Self> {
        let n = sf.n;
        let g_scaled = match scaling {
            None => sf.g.clone(),
            Some(w) => {
                let mut out = DMatrix::zeros(sf.cones.len, n);
                let mut dst = vec![0.0; sf.cones.len];
                for j in 0..n {
                    w.apply(&sf.cones, sf.g.column(j).as_slice(), &mut dst, Op::WinvT);
                    out.column_mut(j).copy_from_slice(&dst);
                }
                out
            }
        };
        let gs1 = &g_scaled * &basis.q1;
        let gs2 = &g_scaled * &basis.q2;
        let qr = gs2.qr();
        let r3 = qr.r();
        let scale = r3.amax().max(f64::MIN_POSITIVE);
        if (0..r3.nrows()).any(|i| !(r3[(i, i)].abs() > 1e-13 * scale)) {
            return None;
        }
        Some(Self {
            sf,
            g_scaled,
            gs1,
            q3: qr.q(),
            r3,
        })
    }

    /// Solves
    ///
    /// ```text
    /// [0  Aᵀ  Gᵀ   ] [ux]   [bx]
    /// [A  0   0    ] [uy] = [by]
    /// [G  0  -WᵀW  ] [uz]   [bz]
    /// ```
    ///
    /// with `bz` passed pre-scaled as `W⁻ᵀ bz`. Returns `(ux, uy, W uz)`.
    fn solve(
        &self,
        basis: &EqualityBasis,
        bx: &DVector<f64>,
        by: &DVector<f64>,
        bz_scaled: &DVector<f64>,
    ) -> Option<(DVector<f64>, DVector<f64>, DVector<f64>)> {
        let (mut ux, mut uy, mut wz) = self.solve_once(basis, bx, by, bz_scaled)?;
        for _ in 0..REFINEMENT_STEPS {
            let rx = bx - self.sf.a.tr_mul(&uy) - self.g_scaled.tr_mul(&wz);
            let ry = by - &self.sf.a * &ux;
            let rz = bz_scaled - &self.g_scaled * &ux + &wz;
            let (dx, dy, dz) = self.solve_once(basis, &rx, &ry, &rz)?;
            ux += dx;
            uy += dy;
            wz += dz;
        }
        Some((ux, uy, wz))
    }

    fn solve_once(
        &self,
        basis: &EqualityBasis,
        bx: &DVector<f64>,
        by: &DVector<f64>,
        bz_scaled: &DVector<f64>,
    ) -> Option<(DVector<f64>, DVector<f64>, DVector<f64>)> {
        let p = self.sf.a.nrows();
        // x1 = R1⁻ᵀ by
        let x1 = basis.r1.tr_solve_upper_triangular(by)?;
        let w = bz_scaled - &self.gs1 * &x1;
        let v2 = self
            .r3
            .tr_solve_upper_triangular(&(basis.q2.transpose() * bx))?;
        let u = self.q3.transpose() * &w + v2;
        let x2 = self.r3.solve_upper_triangular(&u)?;
        let wz = &self.q3 * &u - &w;
        let v1 = basis.q1.transpose() * bx - self.gs1.transpose() * &wz;
        let uy = if p == 0 {
            DVector::zeros(0)
        } else {
            basis.r1.solve_upper_triangular(&v1)?
        };
        let ux = &basis.q1 * x1 + &basis.q2 * x2;
        if ux
            .iter()
            .chain(uy.iter())
            .chain(wz.iter())
            .any(|v| !v.is_finite())
        {
            return None;
        }
        Some((ux, uy, wz))
    }
}

/// One component per block of the linearized system.
struct Step {
    x: DVector<f64>,
    y: DVector<f64>,
    z: DVector<f64>,
    s: DVector<f64>,
    tau: f64,
    kappa: f64,
}

impl Step {
    fn add(&mut self, o: &Step) {
        self.x += &o.x;
        self.y += &o.y;
        self.z += &o.z;
        self.s += &o.s;
        self.tau += o.tau;
        self.kappa += o.kappa;
    }
}

struct Iterate {
    x: DVector<f64>,
    y: DVector<f64>,
    z: DVector<f64>,
    s: DVector<f64>,
    tau: f64,
    kappa: f64,
}

fn initial_point(sf: &StandardForm, basis: &EqualityBasis) -> Option<Iterate> {
    let cones = &sf.cones;
    let kkt = Kkt::new(sf, basis, None)?;
    let zero_n = DVector::zeros(sf.n);
    let zero_p = DVector::zeros(sf.a.nrows());
    // primal: min ||G x - h|| s.t. A x = b; s = h - G x
    let (x, _, uz) = kkt.solve(basis, &zero_n, &sf.b, &sf.h)?;
    let mut s = -uz;
    // dual: min ||z|| s.t. Gᵀz + Aᵀy + c = 0
    let (_, y, mut z) = kkt.solve(basis, &(-&sf.c), &zero_p, &DVector::zeros(cones.len))?;
    let e = cones.identity();
    for v in [&mut s, &mut z] {
        let alpha = -cones.min_eig(v);
        if alpha >= -1e-8 * (1.0 + v.amax()) {
            *v += &e * (1.0 + alpha.max(0.0));
        }
    }
    Some(Iterate {
        x,
        y,
        z,
        s,
        tau: 1.0,
        kappa: 1.0,
    })
}

fn run(sf: &StandardForm, cfg: &SolverConfig) -> SolverOutput {
    let cones = &sf.cones;
    let n = sf.n;
    let mut out = SolverOutput {
        status: SolveStatus::NumericalFailure,
        x: vec![0.0; n],
        y: vec![0.0; sf.a.nrows()],
        primal_objective: f64::NAN,
        dual_objective: f64::NAN,
        primal_residual: f64::INFINITY,
        dual_residual: f64::INFINITY,
        gap: f64::INFINITY,
        iterations: 0,
    };
    let Some(basis) = EqualityBasis::new(&sf.a) else {
        return out;
    };
    let Some(mut it) = initial_point(sf, &basis) else {
        return out;
    };

    let Some(mut w) = Scaling::compute(cones, &it.s, &it.z) else {
        return out;
    };

    let resx0 = sf.c.norm().max(1.0);
    let resy0 = sf.b.norm().max(1.0);
    let resz0 = sf.h.norm().max(1.0);
    let degree = cones.degree();
    let e = cones.identity();

    for iter in 0..=cfg.max_iterations {
        out.iterations = iter;
        let aty_gtz = sf.a.transpose() * &it.y + sf.g.transpose() * &it.z;
        let ax = &sf.a * &it.x;
        let gx_s = &sf.g * &it.x + &it.s;
        let rx = &aty_gtz + &sf.c * it.tau;
        let ry = &sf.b * it.tau - &ax;
        let rz = &gx_s - &sf.h * it.tau;
        let cx = sf.c.dot(&it.x);
        let by_hz = sf.b.dot(&it.y) + sf.h.dot(&it.z);
        let rt = it.kappa + cx + by_hz;
        let gap = it.s.dot(&it.z);
        let mu = (gap + it.tau * it.kappa) / (degree + 1.0);

        let pcost = cx / it.tau;
        let dcost = -by_hz / it.tau;
        let pres = (ry.norm() / resy0).max(rz.norm() / resz0) / it.tau;
        let dres = rx.norm() / resx0 / it.tau;
        let abs_gap = gap / (it.tau * it.tau);
        let relgap = if pcost < 0.0 {
            abs_gap / -pcost
        } else if dcost > 0.0 {
            abs_gap / dcost
        } else {
            f64::INFINITY
        };
        let pinfres = if by_hz < 0.0 {
            aty_gtz.norm() / resx0 / -by_hz
        } else {
            f64::INFINITY
        };
        let dinfres = if cx < 0.0 {
            (ax.norm() / resy0).max(gx_s.norm() / resz0) / -cx
        } else {
            f64::INFINITY
        };

        out.x = (&it.x / it.tau).iter().copied().collect();
        out.y = (&it.y / it.tau).iter().copied().collect();
        out.primal_objective = pcost;
        out.dual_objective = dcost;
        out.primal_residual = pres;
        out.dual_residual = dres;
        out.gap = relgap.min(abs_gap / pcost.abs().max(dcost.abs()).max(1.0));

        if cfg.verbose {
            eprintln!(
                "ipm {iter:3}  pcost {pcost:+.8e}  dcost {dcost:+.8e}  gap {abs_gap:.2e}  \
                 pres {pres:.2e}  dres {dres:.2e}  k/t {:.2e}",
                it.kappa / it.tau
            );
        }

        if pres <= cfg.feastol
            && dres <= cfg.feastol
            && (abs_gap <= cfg.abstol || relgap <= cfg.reltol)
        {
            out.status = SolveStatus::Optimal;
            return out;
        }
        if pinfres <= cfg.feastol {
            out.status = SolveStatus::Infeasible;
            let scale = -by_hz;
            out.y = (&it.y / scale).iter().copied().collect();
            return out;
        }
        if dinfres <= cfg.feastol {
            out.status = SolveStatus::Unbounded;
            out.x = (&it.x / -cx).iter().copied().collect();
            return out;
        }
        if iter == cfg.max_iterations {
            out.status = SolveStatus::MaxIterations;
            return out;
        }

        let Some(kkt) = Kkt::new(sf, &basis, Some(&w)) else {
            out.status = SolveStatus::NumericalFailure;
            return out;
        };
        let lambda = w.lambda(cones);
        let h_scaled = w.op(cones, &sf.h, Op::WinvT);

        let Some((x1, y1, z1)) = kkt.solve(&basis, &(-&sf.c), &sf.b, &h_scaled) else {
            out.status = SolveStatus::NumericalFailure;
            return out;
        };
        let tau_den = -z1.norm_squared() - it.kappa / it.tau;

        // Solves the linearized system for the right-hand side `r`; `r.s`
        // is the target of `λ ∘ (Δs̃ + Δz̃)`. The returned `z` and `s` are
        // in scaled coordinates.
        let newton_once = |r: &Step| {
            let ds_div = w.lambda_div(cones, &r.s);
            let bz = w.op(cones, &r.z, Op::WinvT) - &ds_div;
            let (x2, y2, z2) = kkt.solve(&basis, &r.x, &(-&r.y), &bz)?;
            let dk = r.kappa;
            let num = r.tau - dk / it.tau - sf.c.dot(&x2) - sf.b.dot(&y2) - h_scaled.dot(&z2);
            let dtau = num / tau_den;
            let z = z2 + &z1 * dtau;
            Some(Step {
                x: x2 + &x1 * dtau,
                y: y2 + &y1 * dtau,
                s: &ds_div - &z,
                z,
                tau: dtau,
                kappa: (dk - it.kappa * dtau) / it.tau,
            })
        };
        let residual = |r: &Step, d: &Step| {
            let dz = w.op(cones, &d.z, Op::Winv);
            let ds = w.op(cones, &d.s, Op::Wt);
            Step {
                x: &r.x - sf.a.tr_mul(&d.y) - sf.g.tr_mul(&dz) - &sf.c * d.tau,
                y: &r.y - &sf.b * d.tau + &sf.a * &d.x,
                z: &r.z - &sf.g * &d.x - ds + &sf.h * d.tau,
                tau: r.tau - sf.c.dot(&d.x) - sf.b.dot(&d.y) - sf.h.dot(&dz) - d.kappa,
                s: &r.s - cones.jordan(&lambda, &(&d.s + &d.z)),
                kappa: r.kappa - it.kappa * d.tau - it.tau * d.kappa,
            }
        };
        let newton = |r: &Step| {
            let mut d = newton_once(r)?;
            for _ in 0..REFINEMENT_STEPS {
                let corr = newton_once(&residual(r, &d))?;
                d.add(&corr);
            }
            Some(d)
        };
        // One Newton direction for target complementarity `ds`, `dk` and
        // residual reduction `1 - sigma`.
        let direction = |ds: &DVector<f64>, dk: f64, sigma: f64| {
            let keep = 1.0 - sigma;
            let d = newton(&Step {
                x: -&rx * keep,
                y: -&ry * keep,
                z: -&rz * keep,
                tau: -keep * rt,
                s: ds.clone(),
                kappa: dk,
            })?;
            Some((d.x, d.y, d.z, d.s, d.tau, d.kappa))
        };
        let step_to_boundary = |dz: &DVector<f64>, ds: &DVector<f64>, dtau: f64, dkappa: f64| {
            let mut a = w.max_step(cones, ds, f64::INFINITY);
            a = a.min(w.max_step(cones, dz, f64::INFINITY));
            if dtau < 0.0 {
                a = a.min(-it.tau / dtau);
            }
            if dkappa < 0.0 {
                a = a.min(-it.kappa / dkappa);
            }
            a
        };

        // predictor
        let lam_sq = cones.jordan(&lambda, &lambda);
        let Some((_, _, dz_a, ds_a, dtau_a, dkappa_a)) =
            direction(&(-&lam_sq), -it.tau * it.kappa, 0.0)
        else {
            out.status = SolveStatus::NumericalFailure;
            return out;
        };
        let alpha_a = step_to_boundary(&dz_a, &ds_a, dtau_a, dkappa_a).min(1.0);
        let sigma = (1.0 - alpha_a).powi(3);

        // corrector
        let ds = -&lam_sq - cones.jordan(&ds_a, &dz_a) + &e * (sigma * mu);
        let dk = -it.tau * it.kappa - dtau_a * dkappa_a + sigma * mu;
        let Some((dx, dy, dz, dsv, dtau, dkappa)) = direction(&ds, dk, sigma) else {
            out.status = SolveStatus::NumericalFailure;
            return out;
        };
        let alpha = (STEP_FRACTION * step_to_boundary(&dz, &dsv, dtau, dkappa)).min(1.0);
        if !(alpha > 0.0) || !alpha.is_finite() {
            out.status = SolveStatus::NumericalFailure;
            return out;
        }

        it.x += dx * alpha;
        it.y += dy * alpha;
        it.tau += dtau * alpha;
        it.kappa += dkappa * alpha;
        // `s` and `z` are stepped directly and the scaling rebuilt from
        // them. Reconstructing them from a composed scaling drifts near the
        // boundary and stalls the residuals.
        it.s += w.op(cones, &dsv, Op::Wt) * alpha;
        it.z += w.op(cones, &dz, Op::Winv) * alpha;
        drop(kkt);
        let Some(fresh) = Scaling::compute(cones, &it.s, &it.z) else {
            out.status = SolveStatus::NumericalFailure;
            return out;
        };
        w = fresh;
        if !(it.tau > 0.0 && it.kappa > 0.0) {
            out.status = SolveStatus::NumericalFailure;
            return out;
        }
    }
    out
}
