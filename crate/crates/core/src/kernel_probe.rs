//! The Schwartz kernel of the normal operator near a fold of the conjugate
//! locus, and the principal symbol of its pseudodifferential part.
//!
//! The kernel is probed as `K(p, q) ≈ Nφ_q(p) / ∫φ_q` for narrow Gaussian
//! bumps `φ_q` with `Nφ(p) = ∫ W(p,v) φ(exp_p v) dVol(v)`,
//! `W = |v|^{1-n} κ♯ κ`. Only `v` near the fold vector contribute near
//! `Σ(p)`. The integral runs along the curve of `v` whose images share the
//! tangential coordinates of the bump centre, traced by arclength
//! continuation through the fold, with Gauss–Hermite quadrature across it.

use nalgebra::SymmetricEigen;
use serde::Serialize;

use crate::geodesic::conjugate::{find_conjugate_in, record, Classification, ConjugateOptions};
use crate::geodesic::conormal::left_null;
use crate::geodesic::frozen::{annihilator_basis, conorm, gnorm, sqrt_pair, Frozen};
use crate::geodesic::{exp_map, find_conjugate, flow, GeodesicModel, Matrix, Vector, Weights};
use crate::{Error, Execution, Result};

/// Straight path `q0 + s·d` through the fold image `q0`.
#[derive(Clone, Debug)]
pub struct SlicePath {
    /// `None` follows the unit normal of `Σ(p)`, oriented to the range side.
    pub direction: Option<Vector>,
    pub offsets: Vec<f64>,
}

impl SlicePath {
    /// Normal path with `count` log-spaced offsets on `[lo, hi]`, plus the
    /// mirrored offsets when `both_sides` is set.
    pub fn log_spaced(lo: f64, hi: f64, count: usize, both_sides: bool) -> Self {
        let mut offsets: Vec<f64> = (0..count)
            .map(|i| {
                let t = if count == 1 { 0.0 } else { i as f64 / (count - 1) as f64 };
                lo * (hi / lo).powf(t)
            })
            .collect();
        if both_sides {
            let neg: Vec<f64> = offsets.iter().map(|s| -s).collect();
            offsets.extend(neg);
        }
        Self {
            direction: None,
            offsets,
        }
    }
}

#[derive(Clone, Debug)]
pub struct SliceOptions {
    /// Coarse bump width; the fine one is half of it.
    pub bump_width: f64,
    pub hermite_nodes: usize,
    pub weights: Weights,
    /// Also extrapolate from widths `2h, h` for a convergence check.
    pub convergence: bool,
    pub exec: Execution,
}

impl Default for SliceOptions {
    fn default() -> Self {
        Self {
            bump_width: 0.00125,
            hermite_nodes: 12,
            weights: Weights::default(),
            convergence: false,
            exec: Execution::default(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SlicePoint {
    pub s: f64,
    /// Signed distance to `Σ(p)`, positive on the range side.
    pub z: f64,
    pub q: Vec<f64>,
    pub coarse: f64,
    pub fine: f64,
    /// Richardson value from widths `h, h/2`.
    pub kernel: f64,
    /// Richardson value from widths `2h, h`, when requested.
    pub kernel_wide: Option<f64>,
}

#[derive(Clone, Debug)]
pub struct KernelSlice {
    pub p: Vector,
    pub v0: Vector,
    pub q0: Vector,
    pub normal: Vector,
    pub bump_width: f64,
    pub points: Vec<SlicePoint>,
}

impl KernelSlice {
    /// `(z, K)` pairs.
    pub fn pairs(&self) -> Vec<(f64, f64)> {
        self.points.iter().map(|p| (p.z, p.kernel)).collect()
    }
}

struct FoldFrame<'a> {
    model: &'a dyn GeodesicModel,
    p: Vector,
    v0: Vector,
    q0: Vector,
    gp: Matrix,
    gq: Matrix,
    /// Unit kernel vector in `T_pM`.
    kernel: Vector,
    /// `g(p)`-orthonormal basis of `T_vS(p)`.
    /// `g(q)`-unit normal to `Σ(p)` at `q0` and the covector `g(q)·normal`.
    normal: Vector,
    nu: Vector,
    /// `g(q)`-orthonormal tangent basis of `Σ(p)` at `q0`.
    tq: Matrix,
    /// Second fundamental form of `Σ(p)` at `q0` in `tq` coordinates.
    shape: Matrix,
    /// `ν(exp(v0 + aN)) ≈ curvature·a²/2`.
    curvature: f64,
}

impl<'a> FoldFrame<'a> {
    fn new(model: &'a dyn GeodesicModel, p: &Vector, v0: &Vector) -> Result<Self> {
        let opts = ConjugateOptions::default();
        let gp = model.metric(p);
        let t0 = gnorm(&gp, v0);
        let rec = record(model, p, v0, t0, &opts, false)?;
        if rec.classification != Classification::Fold {
            return Err(Error::NotSimpleFold);
        }
        let frozen = Frozen::new(model, p, v0)?;
        let e0 = frozen.exp(v0)?;
        let gq = model.metric(&e0.q);
        let eta = left_null(&e0.dv);
        let mut normal = gq.clone().lu().solve(&eta).expect("metric is invertible");
        normal /= gnorm(&gq, &normal);
        let mut nu = &gq * &normal;
        let eps = 1e-3 * t0;
        let qp = frozen.exp(&(v0 + &rec.normal * eps))?.q;
        let qm = frozen.exp(&(v0 - &rec.normal * eps))?.q;
        let mut curvature = nu.dot(&(qp + qm - &e0.q * 2.0)) / (eps * eps);
        if curvature < 0.0 {
            normal = -normal;
            nu = -nu;
            curvature = -curvature;
        }
        let tq = annihilator_basis(&gq, &nu);
        let mut frame = Self {
            model,
            p: p.clone(),
            v0: v0.clone(),
            q0: e0.q,
            gp,
            gq,
            kernel: rec.normal,
            normal,
            nu,
            tq,
            shape: Matrix::zeros(0, 0),
            curvature,
        };
        frame.shape = frame.fit_shape(t0, &opts)?;
        Ok(frame)
    }

    fn coords(&self, x: &Vector) -> (Vector, f64) {
        let d = x - &self.q0;
        (self.tq.transpose() * &self.gq * &d, self.nu.dot(&d))
    }

    /// Least-squares `ν = ½ yᵀ H y` through nearby points of `Σ(p)`.
    fn fit_shape(&self, t0: f64, opts: &ConjugateOptions) -> Result<Matrix> {
        let theta0 = &self.v0 / t0;
        let dirs = annihilator_basis(&self.gp, &(&self.gp * &theta0));
        let k = dirs.ncols();
        let eps = 0.03;
        let samples: Vec<Vector> = if k == 1 {
            vec![dirs.column(0) * eps, dirs.column(0) * -eps]
        } else {
            (0..8)
                .map(|i| {
                    let a = std::f64::consts::TAU * i as f64 / 8.0;
                    dirs.column(0) * (eps * a.cos()) + dirs.column(1) * (eps * a.sin())
                })
                .collect()
        };
        let unknowns = k * (k + 1) / 2;
        let mut rows = Vec::new();
        let mut rhs = Vec::new();
        for d in samples {
            let inner = ConjugateOptions { neighbours: 0, ..*opts };
            let rec = find_conjugate_in(self.model, &self.p, &(&theta0 + d), 0.8 * t0, 1.2 * t0, &inner)?
                .ok_or(Error::NotSimpleFold)?;
            let q = exp_map(self.model, &self.p, &rec.v)?.q;
            let (y, nu) = self.coords(&q);
            let mut row = Vec::with_capacity(unknowns);
            for i in 0..k {
                for j in i..k {
                    let c = if i == j { 0.5 } else { 1.0 };
                    row.push(c * y[i] * y[j]);
                }
            }
            rows.push(row);
            rhs.push(nu);
        }
        let a = Matrix::from_fn(rows.len(), unknowns, |r, c| rows[r][c]);
        let b = Vector::from_vec(rhs);
        let sol = (a.transpose() * &a).lu().solve(&(a.transpose() * b)).ok_or(Error::NotSimpleFold)?;
        let mut h = Matrix::zeros(k, k);
        let mut idx = 0;
        for i in 0..k {
            for j in i..k {
                h[(i, j)] = sol[idx];
                h[(j, i)] = sol[idx];
                idx += 1;
            }
        }
        Ok(h)
    }

    fn zprime(&self, x: &Vector) -> f64 {
        let (y, nu) = self.coords(x);
        nu - 0.5 * (y.transpose() * &self.shape * &y)[(0, 0)]
    }

    fn weight(&self, v: &Vector, x: &Vector, xdot: &Vector, weights: &Weights) -> f64 {
        let n = self.model.dim() as i32;
        let t = gnorm(&self.gp, v);
        t.powi(1 - n) * (weights.kappa_sharp)(&self.p, &(v / t)) * (weights.kappa)(x, &(-xdot / t))
    }

    /// Unit null vector of the tangential Jacobian `J` at `v` (`n-1` by `n`)
    /// and an orthonormal complement.
    fn split(&self, j: &Matrix) -> (Vector, Matrix) {
        let n = j.ncols();
        let mut sq = Matrix::zeros(n, n);
        sq.view_mut((0, 0), (n - 1, n)).copy_from(j);
        let svd = sq.svd(false, true);
        let vt = svd.v_t.expect("requested");
        let k = svd.singular_values.imin();
        let tau = vt.row(k).transpose();
        let mut comp = Matrix::zeros(n, n - 1);
        let mut c = 0;
        for r in 0..n {
            if r != k {
                comp.set_column(c, &vt.row(r).transpose());
                c += 1;
            }
        }
        (tau, comp)
    }

    fn residual(&self, v: &Vector, yq: &Vector) -> Result<(Vector, Matrix, f64)> {
        let e = exp_map(self.model, &self.p, v)?;
        let (y, nu) = self.coords(&e.q);
        let j = self.tq.transpose() * &self.gq * &e.dv;
        Ok((y - yq, j, nu))
    }

    /// Minimum-norm Newton onto `y(exp v) = yq`.
    fn correct(&self, mut v: Vector, yq: &Vector) -> Result<(Vector, Matrix, f64)> {
        for _ in 0..30 {
            let (r, j, nu) = self.residual(&v, yq)?;
            let jjt = &j * j.transpose();
            let lam = jjt.lu().solve(&r).ok_or(Error::NotSimpleFold)?;
            let step = j.transpose() * lam;
            v -= &step;
            if step.norm() < 1e-13 * (1.0 + v.norm()) {
                let (_, j, nu) = self.residual(&v, yq)?;
                return Ok((v, j, nu));
            }
            if !nu.is_finite() {
                break;
            }
        }
        Err(Error::NotSimpleFold)
    }

    /// Nodes at arclength spacing `h` along `{v : y(exp v) = yq}` through the
    /// fold, each side traced until `z'` clears `z + margin`.
    fn trace(&self, yq: &Vector, z: f64, margin: f64, h: f64, cap: usize) -> Result<Vec<(Vector, Matrix)>> {
        let (v, j, _) = self.correct(self.v0.clone(), yq)?;
        let (tau, _) = self.split(&j);
        let dir0 = if tau.dot(&self.kernel) >= 0.0 { tau } else { -tau };
        let mut sides = Vec::new();
        for sign in [1.0, -1.0] {
            let mut out = Vec::new();
            let mut cur = v.clone();
            let mut jc = j.clone();
            let mut dir = &dir0 * sign;
            for step in 0..cap {
                let (t, _) = self.split(&jc);
                dir = if t.dot(&dir) >= 0.0 { t } else { -t };
                let (next, jn, _) = self.correct(&cur + &dir * h, yq)?;
                let q = exp_map(self.model, &self.p, &next)?.q;
                cur = next;
                jc = jn;
                out.push((cur.clone(), jc.clone()));
                if step >= 4 && self.zprime(&q) - z > margin {
                    break;
                }
            }
            sides.push(out);
        }
        let mut back = sides.pop().expect("two sides");
        back.reverse();
        back.push((v, j));
        back.extend(sides.pop().expect("two sides"));
        Ok(back)
    }

    /// `Nφ(p)/∫φ` for the Gaussian `φ = exp(-|x-q|²_{g(q)}/(2β²))`.
    fn bump(&self, q: &Vector, beta: f64, gh: &(Vec<f64>, Vec<f64>), weights: &Weights) -> Result<f64> {
        let n = self.model.dim();
        let m = n - 1;
        let z = self.zprime(q);
        let c = self.curvature;
        let (yq, _) = self.coords(q);
        let reach = 1.5 * (2.0 * (z.max(0.0) + 10.0 * beta) / c).sqrt();
        let h = (beta / (c * reach)).min((beta / c).sqrt()) / 8.0;
        let cap = (200.0 * reach / h) as usize;
        let nodes_v = self.trace(&yq, z, 10.0 * beta, h, cap)?;
        let gq = self.model.metric(q);
        let (nodes, wts) = gh;
        let mut total = 0.0;
        for (vs, j) in &nodes_v {
            let (_, comp) = self.split(j);
            let mt = j * &comp;
            let (_, inv) = sqrt_pair(&(mt.transpose() * &mt));
            let l = inv * beta;
            let ldet = l.determinant().abs();
            let mut acc = 0.0;
            let mut idx = vec![0usize; m];
            loop {
                let mut u = Vector::zeros(m);
                let mut w = 1.0;
                for (k, &i) in idx.iter().enumerate() {
                    u[k] = nodes[i];
                    w *= wts[i];
                }
                let v = vs + &comp * (&l * &u * 2f64.sqrt());
                let (x, xdot) = flow(self.model, &self.p, &v, 1.0)?;
                let d = &x - q;
                let r2 = (d.transpose() * &gq * &d)[(0, 0)];
                let phi = (-r2 / (2.0 * beta * beta) + u.norm_squared()).exp();
                acc += w * phi * self.weight(&v, &x, &xdot, weights);
                let mut k = 0;
                while k < m {
                    idx[k] += 1;
                    if idx[k] < nodes.len() {
                        break;
                    }
                    idx[k] = 0;
                    k += 1;
                }
                if k == m {
                    break;
                }
            }
            total += h * acc * 2f64.sqrt().powi(m as i32) * ldet;
        }
        let dvol_p = self.gp.determinant().sqrt();
        let mass = (2.0 * std::f64::consts::PI * beta * beta).powf(n as f64 / 2.0);
        Ok(total * dvol_p / mass)
    }
}

/// Gauss–Hermite nodes and weights for `∫ f e^{-x²}` (Golub–Welsch).
pub fn gauss_hermite(m: usize) -> (Vec<f64>, Vec<f64>) {
    let mut j = Matrix::zeros(m, m);
    for k in 1..m {
        let b = (k as f64 / 2.0).sqrt();
        j[(k - 1, k)] = b;
        j[(k, k - 1)] = b;
    }
    let eig = SymmetricEigen::new(j);
    let mut pairs: Vec<(f64, f64)> = (0..m)
        .map(|i| {
            let v0 = eig.eigenvectors[(0, i)];
            (eig.eigenvalues[i], std::f64::consts::PI.sqrt() * v0 * v0)
        })
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    pairs.into_iter().unzip()
}

/// Kernel values along a path crossing `Σ(p)` at `exp_p(v0)`.
pub fn kernel_slice(
    model: &dyn GeodesicModel,
    p: &Vector,
    v0: &Vector,
    path: &SlicePath,
    opts: &SliceOptions,
) -> Result<KernelSlice> {
    if !(opts.bump_width > 0.0) {
        return Err(Error::InvalidArgument("bump width must be positive".into()));
    }
    let frame = FoldFrame::new(model, p, v0)?;
    let dir = match &path.direction {
        None => frame.normal.clone(),
        Some(d) => {
            if d.len() != model.dim() {
                return Err(Error::InvalidArgument("path direction has the wrong dimension".into()));
            }
            let len = gnorm(&frame.gq, d);
            if (frame.nu.dot(d) / len).abs() < 1e-2f64.sin() {
                return Err(Error::Transversality);
            }
            d / len
        }
    };
    let gh = gauss_hermite(opts.hermite_nodes);
    let h = opts.bump_width;
    let widths: Vec<f64> = if opts.convergence { vec![2.0 * h, h, 0.5 * h] } else { vec![h, 0.5 * h] };
    let jobs: Vec<(usize, usize)> = (0..path.offsets.len())
        .flat_map(|i| (0..widths.len()).map(move |w| (i, w)))
        .collect();
    let values = opts.exec.map(jobs.len(), |j| {
        let (i, w) = jobs[j];
        let q = &frame.q0 + &dir * path.offsets[i];
        frame.bump(&q, widths[w], &gh, &opts.weights)
    });
    let mut values = values.into_iter();
    let mut points = Vec::with_capacity(path.offsets.len());
    for &s in &path.offsets {
        let vals: Vec<f64> = (0..widths.len()).map(|_| values.next().expect("one value per job")).collect::<Result<_>>()?;
        let q = &frame.q0 + &dir * s;
        let (coarse, fine, wide) = if opts.convergence {
            (vals[1], vals[2], Some((4.0 * vals[1] - vals[0]) / 3.0))
        } else {
            (vals[0], vals[1], None)
        };
        points.push(SlicePoint {
            s,
            z: frame.zprime(&q),
            q: q.iter().copied().collect(),
            coarse,
            fine,
            kernel: (4.0 * fine - coarse) / 3.0,
            kernel_wide: wide,
        });
    }
    Ok(KernelSlice {
        p: p.clone(),
        v0: v0.clone(),
        q0: frame.q0.clone(),
        normal: frame.normal.clone(),
        bump_width: h,
        points,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct SingularityFit {
    /// Slope of `log K` against `log z′`, with `√z′` and `z′` terms alongside.
    pub exponent: f64,
    /// `lim √z′·K`, from a quadratic fit of `√z′·K` in `√z′`.
    pub coeff: f64,
    pub predicted: Option<f64>,
    /// RMS relative misfit of the quadratic model.
    pub residual: f64,
    pub window: [f64; 2],
    pub samples: usize,
}

impl SingularityFit {
    pub fn ratio(&self) -> Option<f64> {
        self.predicted.map(|p| self.coeff / p)
    }
}

fn least_squares(rows: &[Vec<f64>], rhs: &[f64]) -> Result<Vector> {
    let a = Matrix::from_fn(rows.len(), rows[0].len(), |r, c| rows[r][c]);
    let b = Vector::from_column_slice(rhs);
    a.svd(true, true).solve(&b, 1e-14).map_err(|_| Error::FitWindow)
}

/// Fits `K ≈ coeff·z′^exponent` on `window`.
pub fn fit_sqrt_singularity(points: &[(f64, f64)], window: (f64, f64), predicted: Option<f64>) -> Result<SingularityFit> {
    let (lo, hi) = window;
    if !(lo > 0.0 && hi > lo) {
        return Err(Error::FitWindow);
    }
    let zmin = points.iter().map(|p| p.0).filter(|&z| z > 0.0).fold(f64::INFINITY, f64::min);
    let zmax = points.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max);
    let tol = 1e-9 * hi;
    if lo < zmin - tol || hi > zmax + tol {
        return Err(Error::FitWindow);
    }
    let sel: Vec<(f64, f64)> = points
        .iter()
        .copied()
        .filter(|&(z, k)| z >= lo - tol && z <= hi + tol && k > 0.0)
        .collect();
    if sel.len() < 12 {
        return Err(Error::FitWindow);
    }
    // √z′ and z′ absorb the leading corrections to the power law
    let rows: Vec<Vec<f64>> = sel.iter().map(|&(z, _)| vec![1.0, z.ln(), z.sqrt(), z]).collect();
    let rhs: Vec<f64> = sel.iter().map(|&(_, k)| k.ln()).collect();
    let exponent = least_squares(&rows, &rhs)?[1];
    let rows: Vec<Vec<f64>> = sel.iter().map(|&(z, _)| vec![1.0, z.sqrt(), z]).collect();
    let rhs: Vec<f64> = sel.iter().map(|&(z, k)| k * z.sqrt()).collect();
    let c = least_squares(&rows, &rhs)?;
    let residual = (sel
        .iter()
        .map(|&(z, k)| {
            let s = z.sqrt();
            let model = (c[0] + c[1] * s + c[2] * z) / s;
            ((model - k) / k).powi(2)
        })
        .sum::<f64>()
        / sel.len() as f64)
        .sqrt();
    Ok(SingularityFit {
        exponent,
        coeff: c[0],
        predicted,
        residual,
        window: [lo, hi],
        samples: sel.len(),
    })
}

#[derive(Clone, Debug)]
pub struct DiagonalOptions {
    /// Envelope width of the probing packet.
    pub sigma: f64,
    pub dx: f64,
    pub dt: f64,
    pub theta_nodes: usize,
    /// Curves are cut off smoothly at `|t| = t_cut`.
    pub t_cut: f64,
    pub weights: Weights,
    pub exec: Execution,
}

impl Default for DiagonalOptions {
    fn default() -> Self {
        Self {
            sigma: 0.1,
            dx: 0.05,
            dt: 0.02,
            theta_nodes: 128,
            t_cut: 2.0,
            weights: Weights::default(),
            exec: Execution::default(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SymbolSample {
    pub xi: [f64; 2],
    pub k: f64,
    pub observed: f64,
    pub predicted: f64,
    pub rel_err: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct DiagonalReport {
    pub samples: Vec<SymbolSample>,
    pub max_rel_err: f64,
}

/// `2π Σ κ♯κ(x, θ)/|ξ|` over the two unit `θ` with `ξ(θ) = 0`.
pub fn predicted_symbol(model: &dyn GeodesicModel, x: &Vector, xi: &Vector, weights: &Weights) -> f64 {
    let g = model.metric(x);
    let basis = annihilator_basis(&g, xi);
    let len = conorm(&g, xi);
    let th = basis.column(0).into_owned();
    let w = |t: &Vector| (weights.kappa_sharp)(x, t) * (weights.kappa)(x, t);
    2.0 * std::f64::consts::PI * (w(&th) + w(&-&th)) / len
}

/// Compares `⟨N_χ f, f⟩/‖f‖²` with the principal symbol for packets `f` at
/// `(p, kξ̂)`, where `N_χ` keeps curve segments with `|t| < t_cut`.
pub fn diagonal_symbol_check(
    model: &dyn GeodesicModel,
    p: &Vector,
    xi_samples: &[[f64; 2]],
    ks: &[f64],
    opts: &DiagonalOptions,
) -> Result<DiagonalReport> {
    if model.dim() != 2 || p.len() != 2 {
        return Err(Error::InvalidArgument("the symbol check is planar".into()));
    }
    let copts = ConjugateOptions::default();
    for i in 0..8 {
        let a = std::f64::consts::TAU * i as f64 / 8.0;
        let th = Vector::from_column_slice(&[a.cos(), a.sin()]);
        for dir in [th.clone(), -th] {
            if find_conjugate(model, p, &dir, opts.t_cut, &copts)?.is_some() {
                return Err(Error::Domain("conjugate point inside the truncated curve range".into()));
            }
        }
    }
    let sigma = opts.sigma;
    let half = 5.0 * sigma;
    let nx = (2.0 * half / opts.dx).ceil() as usize + 1;
    let hx = 2.0 * half / (nx - 1) as f64;
    let nt = (2.0 * opts.t_cut / opts.dt).ceil() as usize;
    let ht = 2.0 * opts.t_cut / nt as f64;
    let nth = opts.theta_nodes;
    let hth = std::f64::consts::TAU / nth as f64;
    let mut samples = Vec::new();
    for xi in xi_samples {
        let norm = xi[0].hypot(xi[1]);
        let xh = [xi[0] / norm, xi[1] / norm];
        for &k in ks {
            let packet = |x: &Vector| {
                let d = [x[0] - p[0], x[1] - p[1]];
                let env = (-(d[0] * d[0] + d[1] * d[1]) / (4.0 * sigma * sigma)).exp();
                num_complex::Complex64::from_polar(env, k * (xh[0] * d[0] + xh[1] * d[1]))
            };
            let rows = opts.exec.map(nx, |r| -> Result<(num_complex::Complex64, f64)> {
                let mut acc = num_complex::Complex64::new(0.0, 0.0);
                let mut norm2 = 0.0;
                for c in 0..nx {
                    let x = Vector::from_column_slice(&[p[0] - half + c as f64 * hx, p[1] - half + r as f64 * hx]);
                    let g = model.metric(&x);
                    let dvol = g.determinant().sqrt();
                    let (_, inv) = sqrt_pair(&g);
                    let f0 = packet(&x);
                    norm2 += f0.norm_sqr() * dvol;
                    if f0.norm() < 1e-14 {
                        continue;
                    }
                    let mut nf = num_complex::Complex64::new(0.0, 0.0);
                    for j in 0..nth {
                        let a = j as f64 * hth;
                        let th = &inv * Vector::from_column_slice(&[a.cos(), a.sin()]);
                        let ks = (opts.weights.kappa_sharp)(&x, &th);
                        if ks == 0.0 {
                            continue;
                        }
                        for i in 0..=nt {
                            let t = -opts.t_cut + i as f64 * ht;
                            let chi = crate::cancellation::plateau(t.abs(), 0.5 * opts.t_cut, opts.t_cut);
                            if chi == 0.0 {
                                continue;
                            }
                            let (y, ydot) = flow(model, &x, &th, t)?;
                            let kap = (opts.weights.kappa)(&y, &ydot);
                            nf += packet(&y) * (chi * ks * kap);
                        }
                    }
                    acc += f0.conj() * nf * (ht * hth * dvol);
                }
                Ok((acc * hx * hx, norm2 * hx * hx))
            });
            let mut inner = num_complex::Complex64::new(0.0, 0.0);
            let mut norm2 = 0.0;
            for row in rows {
                let (a, b) = row?;
                inner += a;
                norm2 += b;
            }
            let observed = inner.re / norm2;
            let xv = Vector::from_column_slice(&[xh[0] * k, xh[1] * k]);
            let predicted = predicted_symbol(model, p, &xv, &opts.weights);
            let rel_err = if predicted.abs() > 0.0 {
                (observed - predicted).abs() / predicted.abs()
            } else {
                observed.abs()
            };
            samples.push(SymbolSample {
                xi: *xi,
                k,
                observed,
                predicted,
                rel_err,
            });
        }
    }
    let max_rel_err = samples.iter().map(|s| s.rel_err).fold(0.0, f64::max);
    Ok(DiagonalReport { samples, max_rel_err })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cancellation::plateau;
    use crate::circular::normal_kernel_analytic;
    use crate::geodesic::models::MagneticFlow;
    use std::sync::Arc;

    fn v(x: &[f64]) -> Vector {
        Vector::from_column_slice(x)
    }

    fn circle_fold() -> (MagneticFlow, Vector, Vector) {
        let m = MagneticFlow::circle2d();
        let p = v(&[0.0, 0.0]);
        let c = find_conjugate(&m, &p, &v(&[1.0, 0.0]), 8.0, &ConjugateOptions::default())
            .unwrap()
            .unwrap();
        (m, p, c.v)
    }

    #[test]
    fn hermite_rule_integrates_moments() {
        let (x, w) = gauss_hermite(12);
        let m0: f64 = w.iter().sum();
        let m2: f64 = x.iter().zip(&w).map(|(x, w)| w * x * x).sum();
        let m4: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(4)).sum();
        let rp = std::f64::consts::PI.sqrt();
        assert!((m0 - rp).abs() < 1e-13);
        assert!((m2 - rp / 2.0).abs() < 1e-13);
        assert!((m4 - 0.75 * rp).abs() < 1e-12);
    }

    #[test]
    fn synthetic_inverse_sqrt() {
        let pts: Vec<(f64, f64)> = SlicePath::log_spaced(0.01, 0.25, 20, false)
            .offsets
            .iter()
            .map(|&z| (z, 3.0 / z.sqrt()))
            .collect();
        let fit = fit_sqrt_singularity(&pts, (0.01, 0.25), Some(3.0)).unwrap();
        assert!((fit.exponent + 0.5).abs() < 1e-6, "{}", fit.exponent);
        assert!((fit.coeff - 3.0).abs() < 1e-6, "{}", fit.coeff);
        assert!(fit.residual < 1e-10);
        assert!((fit.ratio().unwrap() - 1.0).abs() < 1e-6);
    }

    #[test]
    fn fit_window_must_lie_in_samples() {
        let pts: Vec<(f64, f64)> = SlicePath::log_spaced(0.02, 0.2, 20, false)
            .offsets
            .iter()
            .map(|&z| (z, 1.0 / z.sqrt()))
            .collect();
        assert!(matches!(fit_sqrt_singularity(&pts, (0.01, 0.2), None), Err(Error::FitWindow)));
        assert!(matches!(fit_sqrt_singularity(&pts, (0.02, 0.3), None), Err(Error::FitWindow)));
        assert!(matches!(fit_sqrt_singularity(&pts, (0.0, 0.2), None), Err(Error::FitWindow)));
        assert!(matches!(fit_sqrt_singularity(&pts[..8], (0.02, 0.2), None), Err(Error::FitWindow)));
    }

    #[test]
    fn circle_slice_matches_closed_form() {
        let (m, p, v0) = circle_fold();
        let mut path = SlicePath::log_spaced(0.01, 0.5, 10, false);
        path.offsets.extend([-0.02, -0.1, -0.3]);
        let opts = SliceOptions {
            convergence: true,
            ..Default::default()
        };
        let s = kernel_slice(&m, &p, &v0, &path, &opts).unwrap();
        let peak = s.points.iter().map(|p| p.kernel).fold(0.0, f64::max);
        for pt in &s.points {
            if pt.s > 0.0 {
                assert!((pt.z - pt.s).abs() < 1e-6);
                let exact = normal_kernel_analytic(2.0 - pt.z).unwrap();
                assert!((pt.kernel / exact - 1.0).abs() < 0.02, "z {} K {} exact {exact}", pt.z, pt.kernel);
                let wide = pt.kernel_wide.unwrap();
                assert!((wide / pt.kernel - 1.0).abs() < 5e-3, "z {}", pt.z);
            } else {
                assert!(pt.kernel.abs() < 1e-3 * peak, "z {} K {}", pt.z, pt.kernel);
            }
        }
    }

    #[test]
    fn exponent_ignores_path_tilt() {
        let (m, p, v0) = circle_fold();
        let n = FoldFrame::new(&m, &p, &v0).unwrap().normal;
        let normal = SlicePath::log_spaced(0.01, 0.3, 14, false);
        let tilted = SlicePath {
            direction: Some(v(&[0.8 * n[0] - 0.6 * n[1], 0.8 * n[1] + 0.6 * n[0]])),
            offsets: SlicePath::log_spaced(0.0125, 0.375, 14, false).offsets,
        };
        let opts = SliceOptions::default();
        let a = kernel_slice(&m, &p, &v0, &normal, &opts).unwrap();
        let b = kernel_slice(&m, &p, &v0, &tilted, &opts).unwrap();
        let fa = fit_sqrt_singularity(&a.pairs(), (0.01, 0.25), None).unwrap();
        let fb = fit_sqrt_singularity(&b.pairs(), (0.01, 0.25), None).unwrap();
        assert!((fa.exponent - fb.exponent).abs() < 0.02, "{} {}", fa.exponent, fb.exponent);
        assert!((fa.exponent + 0.5).abs() < 0.05);
    }

    #[test]
    fn tangent_path_is_rejected() {
        let (m, p, v0) = circle_fold();
        let n = FoldFrame::new(&m, &p, &v0).unwrap().normal;
        let path = SlicePath {
            direction: Some(v(&[-n[1] + 1e-3 * n[0], n[0] + 1e-3 * n[1]])),
            offsets: vec![0.1],
        };
        assert!(matches!(
            kernel_slice(&m, &p, &v0, &path, &SliceOptions::default()),
            Err(Error::Transversality)
        ));
    }

    #[test]
    fn diagonal_symbol_of_circle() {
        let m = MagneticFlow::circle2d();
        let p = v(&[0.0, 0.0]);
        let r = diagonal_symbol_check(&m, &p, &[[1.0, 0.3]], &[32.0, 64.0], &DiagonalOptions::default()).unwrap();
        assert_eq!(r.samples.len(), 2);
        let at64 = &r.samples[1];
        assert!((at64.predicted - 4.0 * std::f64::consts::PI / 64.0).abs() < 1e-12);
        assert!(at64.rel_err < 0.1, "{}", at64.rel_err);
        assert!(r.samples[1].rel_err < r.samples[0].rel_err);
    }

    #[test]
    fn vanishing_weight_kills_the_symbol() {
        let m = MagneticFlow::circle2d();
        let p = v(&[0.0, 0.0]);
        let xi = [1.0f64, 0.3];
        let n = xi[0] * xi[0] + xi[1] * xi[1];
        let xh = v(&[xi[0] / n.sqrt(), xi[1] / n.sqrt()]);
        let opts = DiagonalOptions::default();
        let unit = diagonal_symbol_check(&m, &p, &[xi], &[64.0], &opts).unwrap();
        // zero within 0.6 rad of ±ξ^⊥ at both ends of every curve
        let off = move |th: &Vector| 1.0 - plateau((th.dot(&xh) / th.norm()).abs(), 0.6f64.sin(), 1.0f64.sin());
        let w = Weights {
            kappa_sharp: Arc::new({
                let off = off.clone();
                move |_, th| off(th)
            }),
            kappa: Arc::new(move |_, th| off(th)),
        };
        let zero = diagonal_symbol_check(&m, &p, &[xi], &[64.0], &DiagonalOptions { weights: w, ..opts }).unwrap();
        assert_eq!(zero.samples[0].predicted, 0.0);
        let ratio = zero.samples[0].observed.abs() / unit.samples[0].observed;
        assert!(ratio < 1e-3, "{ratio}");
    }

    #[test]
    fn conjugate_point_in_range_is_an_error() {
        let m = MagneticFlow::circle2d();
        let p = v(&[0.0, 0.0]);
        let opts = DiagonalOptions {
            t_cut: 4.0,
            ..Default::default()
        };
        assert!(matches!(diagonal_symbol_check(&m, &p, &[[1.0, 0.0]], &[32.0], &opts), Err(Error::Domain(_))));
    }
}
