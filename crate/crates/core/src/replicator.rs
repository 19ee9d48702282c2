//! Mean-field dynamics of the urn: the vector field
//! `f_i(p) = 2(1−r) p_i (M̃p)_i + r(1/d − p_i)`, the one-round map
//! `g(p) = p + f(p)/2`, its ODE flow and its unique interior zero.

use nalgebra::{DMatrix, DVector};
use num::{One, Zero};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1};
use rayon::prelude::*;
use serde::Serialize;

use crate::lottery::{l1_distance, margin_payoffs, uniform};
use crate::prefs::MarginMatrix;
use crate::{Error, Rational, Result};

/// Largest tolerated departure from the simplex before a step is retried with half the step size.
pub const ESCAPE_TOLERANCE: f64 = 1e-6;
pub const DEFAULT_STEP: f64 = 0.01;
/// Required `|f(p)|₁` at a reported fixed point.
pub const FIXED_POINT_TOLERANCE: f64 = 1e-10;
const MAX_ODE_STEPS: u64 = 50_000_000;

#[derive(Clone, Debug)]
pub struct VectorField {
    d: usize,
    margins: Vec<f64>,
    rate: f64,
}

impl VectorField {
    pub fn new(m: &MarginMatrix, rate: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&rate) {
            return Err(Error::InvalidArgument(format!("mutation rate {rate} outside [0, 1]")));
        }
        Ok(Self { d: m.d(), margins: m.to_f64(), rate })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn rate(&self) -> f64 {
        self.rate
    }

    pub fn margins(&self) -> &[f64] {
        &self.margins
    }

    pub fn eval_f(&self, p: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.d];
        self.eval_into(p, &mut out);
        out
    }

    fn eval_into(&self, p: &[f64], out: &mut [f64]) {
        let (d, r) = (self.d, self.rate);
        let inv_d = 1.0 / d as f64;
        for i in 0..d {
            let row = &self.margins[i * d..(i + 1) * d];
            let mp: f64 = row.iter().zip(p).map(|(a, b)| a * b).sum();
            out[i] = 2.0 * (1.0 - r) * p[i] * mp + r * (inv_d - p[i]);
        }
    }

    pub fn eval_g(&self, p: &[f64]) -> Vec<f64> {
        let g: Vec<f64> = p.iter().zip(self.eval_f(p)).map(|(pi, fi)| pi + 0.5 * fi).collect();
        debug_assert!(g.iter().all(|&x| x >= -1e-15));
        g
    }

    /// `∂f_i/∂p_j = 2(1−r)(δ_ij (M̃p)_i + p_i M̃_ij) − r δ_ij`, row-major.
    pub fn jacobian(&self, p: &[f64]) -> Vec<f64> {
        let (d, r) = (self.d, self.rate);
        let mp = margin_payoffs(&self.margins, p);
        let mut jac = vec![0.0; d * d];
        for i in 0..d {
            for j in 0..d {
                let mut v = 2.0 * (1.0 - r) * p[i] * self.margins[i * d + j];
                if i == j {
                    v += 2.0 * (1.0 - r) * mp[i] - r;
                }
                jac[i * d + j] = v;
            }
        }
        jac
    }

    /// Componentwise residual of `2(1−r)(M̃p)_i = r(1 − 1/(p_i d))`.
    pub fn stationarity_residual(&self, p: &[f64]) -> f64 {
        let (d, r) = (self.d as f64, self.rate);
        margin_payoffs(&self.margins, p)
            .iter()
            .zip(p)
            .map(|(mp, pi)| (2.0 * (1.0 - r) * mp - r * (1.0 - 1.0 / (pi * d))).abs())
            .fold(0.0, f64::max)
    }

    fn rk4_step(&self, y: &[f64], h: f64, scratch: &mut Rk4Scratch) -> Vec<f64> {
        let d = self.d;
        let Rk4Scratch { k1, k2, k3, k4, tmp } = scratch;
        self.eval_into(y, k1);
        for i in 0..d {
            tmp[i] = y[i] + 0.5 * h * k1[i];
        }
        self.eval_into(tmp, k2);
        for i in 0..d {
            tmp[i] = y[i] + 0.5 * h * k2[i];
        }
        self.eval_into(tmp, k3);
        for i in 0..d {
            tmp[i] = y[i] + h * k3[i];
        }
        self.eval_into(tmp, k4);
        (0..d).map(|i| y[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])).collect()
    }
}

struct Rk4Scratch {
    k1: Vec<f64>,
    k2: Vec<f64>,
    k3: Vec<f64>,
    k4: Vec<f64>,
    tmp: Vec<f64>,
}

impl Rk4Scratch {
    fn new(d: usize) -> Self {
        Self { k1: vec![0.0; d], k2: vec![0.0; d], k3: vec![0.0; d], k4: vec![0.0; d], tmp: vec![0.0; d] }
    }
}

/// Exact evaluation of `f` over the rationals.
pub fn eval_f_exact(m: &MarginMatrix, rate: &Rational, p: &[Rational]) -> Vec<Rational> {
    let d = Rational::from_integer(m.d().into());
    let two = Rational::from_integer(2.into());
    let keep = Rational::one() - rate;
    m.apply(p)
        .iter()
        .zip(p)
        .map(|(mp, pi)| &two * &keep * pi * mp + rate * (Rational::one() / &d - pi))
        .collect()
}

fn check_lottery(p: &[f64], d: usize) -> Result<()> {
    if p.len() != d {
        return Err(Error::DimensionMismatch { expected: d, found: p.len() });
    }
    if p.iter().any(|&x| x.is_nan() || x < -1e-12) || (p.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidArgument(format!("{p:?} is not a lottery")));
    }
    Ok(())
}

fn project(y: &mut [f64]) {
    for x in y.iter_mut() {
        *x = x.max(0.0);
    }
    let s: f64 = y.iter().sum();
    for x in y.iter_mut() {
        *x /= s;
    }
}

/// Escape from the simplex of an unprojected state.
fn escape(y: &[f64]) -> f64 {
    let below = y.iter().fold(0.0f64, |acc, &x| acc.max(-x));
    below.max((y.iter().sum::<f64>() - 1.0).abs())
}

#[derive(Clone, Debug, Serialize)]
pub struct OdeTrajectory {
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
    /// Step size in use when integration finished.
    pub step: f64,
    /// Number of times the step size was halved.
    pub halvings: u32,
}

impl OdeTrajectory {
    pub fn last(&self) -> &[f64] {
        self.states.last().expect("trajectory holds the initial state")
    }

    /// `D(reference | y(t_k))` in nats at every grid point.
    pub fn entropy_series(&self, reference: &[f64]) -> Result<Vec<f64>> {
        self.states.iter().map(|y| relative_entropy(reference, y)).collect()
    }
}

/// Classical RK4 from `p0` to `t_end` with nominal step `h`.
///
/// A step that leaves the simplex by more than [`ESCAPE_TOLERANCE`] is
/// retried with half the step size; accepted states are clipped and
/// renormalized.
pub fn integrate(vf: &VectorField, p0: &[f64], t_end: f64, h: f64) -> Result<OdeTrajectory> {
    check_lottery(p0, vf.d)?;
    if h.is_nan() || h <= 0.0 || !t_end.is_finite() || t_end < 0.0 {
        return Err(Error::InvalidArgument(format!("need h > 0 and finite t_end ≥ 0, got h={h}, t_end={t_end}")));
    }
    let mut y = p0.to_vec();
    project(&mut y);
    let mut traj = OdeTrajectory { times: vec![0.0], states: vec![y.clone()], step: h, halvings: 0 };
    let mut scratch = Rk4Scratch::new(vf.d);
    let mut t = 0.0;
    let mut steps = 0u64;
    let end_slack = 1e-12 * t_end.max(1.0);
    while t < t_end - end_slack {
        let dt = traj.step.min(t_end - t);
        let mut next = vf.rk4_step(&y, dt, &mut scratch);
        if escape(&next) > ESCAPE_TOLERANCE {
            traj.step /= 2.0;
            traj.halvings += 1;
            if traj.halvings > 40 {
                return Err(Error::NonConvergence { what: "ODE integration", detail: format!("step size underflow at t={t}") });
            }
            continue;
        }
        project(&mut next);
        y = next;
        t += dt;
        steps += 1;
        if steps > MAX_ODE_STEPS {
            return Err(Error::NonConvergence { what: "ODE integration", detail: format!("step budget exhausted at t={t}") });
        }
        traj.times.push(t);
        traj.states.push(y.clone());
    }
    Ok(traj)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FixedPoint {
    pub lottery: Vec<f64>,
    pub rate: f64,
    /// `|f(p)|₁`.
    pub residual: f64,
    /// Largest componentwise residual of the stationarity equation.
    pub stationarity_residual: f64,
    /// Largest L1 distance between the answer and polished fixed points
    /// reached from random interior starts, when checked.
    pub start_spread: Option<f64>,
}

fn l1_norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x.abs()).sum()
}

/// Newton iterations on `f` in R^d; since `Σf = r(1 − Σp)`, iterates stay on
/// the affine hull of the simplex. Steps are damped to keep iterates positive
/// and the residual decreasing.
fn newton_polish(vf: &VectorField, p: &[f64]) -> Option<Vec<f64>> {
    let d = vf.d;
    let mut x = p.to_vec();
    let mut res = l1_norm(&vf.eval_f(&x));
    for _ in 0..50 {
        if res <= 1e-15 {
            break;
        }
        let jac = DMatrix::from_row_slice(d, d, &vf.jacobian(&x));
        let rhs = -DVector::from_vec(vf.eval_f(&x));
        let delta = jac.lu().solve(&rhs)?;
        let mut lambda = 1.0;
        let accepted = loop {
            let cand: Vec<f64> = x.iter().zip(delta.iter()).map(|(a, b)| a + lambda * b).collect();
            if cand.iter().all(|&c| c > 0.0) {
                let cand_res = l1_norm(&vf.eval_f(&cand));
                if cand_res < res {
                    break Some((cand, cand_res));
                }
            }
            lambda /= 2.0;
            if lambda < 1e-6 {
                break None;
            }
        };
        match accepted {
            Some((cand, cand_res)) => {
                x = cand;
                res = cand_res;
            }
            None => break,
        }
    }
    Some(x)
}

fn converge_from(vf: &VectorField, p0: &[f64]) -> Result<Vec<f64>> {
    let mut y = p0.to_vec();
    project(&mut y);
    let mut scratch = Rk4Scratch::new(vf.d);
    let mut h = DEFAULT_STEP;
    let mut steps = 0u64;
    let mut best: Option<(Vec<f64>, f64)> = None;
    for gate in [1e-6, 1e-8, 1e-10, 1e-12] {
        while l1_norm(&vf.eval_f(&y)) > gate {
            let mut next = vf.rk4_step(&y, h, &mut scratch);
            if escape(&next) > ESCAPE_TOLERANCE {
                h /= 2.0;
                if h < 1e-12 {
                    return Err(Error::NonConvergence { what: "fixed point", detail: "step size underflow".into() });
                }
                continue;
            }
            project(&mut next);
            y = next;
            steps += 1;
            if steps > MAX_ODE_STEPS {
                return Err(Error::NonConvergence {
                    what: "fixed point",
                    detail: format!("|f|₁ = {:e} after {steps} RK4 steps", l1_norm(&vf.eval_f(&y))),
                });
            }
        }
        if let Some(x) = newton_polish(vf, &y) {
            let res = l1_norm(&vf.eval_f(&x));
            if best.as_ref().is_none_or(|(_, b)| res < *b) {
                best = Some((x, res));
            }
            if res <= 1e-14 {
                break;
            }
        }
    }
    let (x, res) = best.unwrap_or_else(|| {
        let res = l1_norm(&vf.eval_f(&y));
        (y, res)
    });
    if res > FIXED_POINT_TOLERANCE {
        return Err(Error::NonConvergence { what: "fixed point", detail: format!("residual {res:e}") });
    }
    Ok(x)
}

/// The unique zero of `f` for `r > 0`, reached by flowing from the uniform
/// lottery and polishing with Newton's method.
pub fn fixed_point(vf: &VectorField) -> Result<FixedPoint> {
    if vf.rate.is_nan() || vf.rate <= 0.0 {
        return Err(Error::InvalidArgument("fixed point needs a positive mutation rate".into()));
    }
    let p = converge_from(vf, &uniform(vf.d))?;
    let residual = l1_norm(&vf.eval_f(&p));
    let stationarity_residual = vf.stationarity_residual(&p);
    if stationarity_residual > FIXED_POINT_TOLERANCE || p.iter().any(|&x| x <= 0.0) {
        return Err(Error::NonConvergence {
            what: "fixed point",
            detail: format!("stationarity residual {stationarity_residual:e}"),
        });
    }
    Ok(FixedPoint { lottery: p, rate: vf.rate, residual, stationarity_residual, start_spread: None })
}

/// Uniform random interior lottery (flat Dirichlet).
pub fn random_interior<R: rand::Rng + ?Sized>(d: usize, rng: &mut R) -> Vec<f64> {
    let e: Vec<f64> = (0..d).map(|_| Exp1.sample(rng)).map(|x: f64| x.max(f64::MIN_POSITIVE)).collect();
    let s: f64 = e.iter().sum();
    e.into_iter().map(|x| x / s).collect()
}

/// [`fixed_point`], additionally converging from `starts` random interior
/// points and recording the largest disagreement in `start_spread`.
pub fn fixed_point_checked(vf: &VectorField, starts: usize, seed: u64) -> Result<FixedPoint> {
    let mut fp = fixed_point(vf)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let inits: Vec<Vec<f64>> = (0..starts).map(|_| random_interior(vf.d, &mut rng)).collect();
    let ends = inits.par_iter().map(|p0| converge_from(vf, p0)).collect::<Result<Vec<_>>>()?;
    fp.start_spread = Some(ends.iter().map(|e| l1_distance(e, &fp.lottery)).fold(0.0, f64::max));
    Ok(fp)
}

/// Fixed points along a strictly decreasing schedule of positive rates.
pub fn ml_limit_path(m: &MarginMatrix, schedule: &[f64]) -> Result<Vec<FixedPoint>> {
    if schedule.iter().any(|&r| !(r > 0.0 && r <= 1.0)) || schedule.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::InvalidArgument("rate schedule must be strictly decreasing within (0, 1]".into()));
    }
    schedule.par_iter().map(|&r| fixed_point(&VectorField::new(m, r)?)).collect()
}

/// `D(p | q) = Σ p_i ln(p_i / q_i)` in nats, with `0 ln 0 = 0`.
pub fn relative_entropy(p: &[f64], q: &[f64]) -> Result<f64> {
    let mut sum = 0.0;
    for (&pi, &qi) in p.iter().zip(q) {
        if pi > 0.0 {
            if qi <= 0.0 {
                return Err(Error::Numerical(format!("relative entropy undefined: q has a zero where p = {pi}")));
            }
            sum += pi * (pi / qi).ln();
        }
    }
    Ok(sum)
}

/// Relative entropy measured in bits.
pub fn relative_entropy_bits(p: &[f64], q: &[f64]) -> Result<f64> {
    Ok(relative_entropy(p, q)? / std::f64::consts::LN_2)
}

/// Mixes `p` with the uniform lottery at weight `eps`.
pub fn nudge_interior(p: &[f64], eps: f64) -> Vec<f64> {
    let u = 1.0 / p.len() as f64;
    p.iter().map(|x| (1.0 - eps) * x + eps * u).collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct EntropyPoint {
    pub t: f64,
    pub entropy: f64,
    /// Finite-difference estimate of `dD/dt`.
    pub slope: f64,
    /// `−(r/(d√d)) |p* − y|₁²`.
    pub bound: f64,
    pub l1: f64,
    pub l2: f64,
}

/// Entropy series against `p_star` with slope estimates and the descent bound.
pub fn entropy_diagnostics(traj: &OdeTrajectory, p_star: &[f64], rate: f64) -> Result<Vec<EntropyPoint>> {
    let d = p_star.len() as f64;
    let entropy = traj.entropy_series(p_star)?;
    let n = entropy.len();
    let t = &traj.times;
    let slope = |k: usize| -> f64 {
        if n < 2 {
            0.0
        } else if k == 0 {
            (entropy[1] - entropy[0]) / (t[1] - t[0])
        } else if k == n - 1 {
            (entropy[k] - entropy[k - 1]) / (t[k] - t[k - 1])
        } else {
            // second-order divided difference on a possibly uneven grid
            let (h0, h1) = (t[k] - t[k - 1], t[k + 1] - t[k]);
            (h0 * h0 * (entropy[k + 1] - entropy[k]) + h1 * h1 * (entropy[k] - entropy[k - 1])) / (h0 * h1 * (h0 + h1))
        }
    };
    Ok((0..n)
        .map(|k| {
            let y = &traj.states[k];
            let l1 = l1_distance(p_star, y);
            let l2 = p_star.iter().zip(y).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
            EntropyPoint { t: t[k], entropy: entropy[k], slope: slope(k), bound: -rate / (d * d.sqrt()) * l1 * l1, l1, l2 }
        })
        .collect())
}

/// Exact `Σ f` for rational inputs; zero on the simplex.
pub fn exact_divergence_sum(m: &MarginMatrix, rate: &Rational, p: &[Rational]) -> Rational {
    eval_f_exact(m, rate, p).into_iter().fold(Rational::zero(), |a, b| a + b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;
    use crate::lottery::maximal_lottery;
    use crate::rational;

    fn field(profile: crate::prefs::Profile, r: f64) -> VectorField {
        VectorField::new(&profile.margin_matrix(), r).unwrap()
    }

    #[test]
    fn exact_values() {
        let m = catalog::condorcet_cycle().margin_matrix();
        let p = [rational(1, 2), rational(1, 4), rational(1, 4)];
        assert_eq!(eval_f_exact(&m, &rational(0, 1), &p), vec![rational(0, 1), rational(-1, 24), rational(1, 24)]);
        assert!(exact_divergence_sum(&m, &rational(3, 10), &p).is_zero());
        let u = [rational(1, 3), rational(1, 3), rational(1, 3)];
        assert!(eval_f_exact(&m, &rational(1, 7), &u).iter().all(Zero::is_zero));
    }

    #[test]
    fn full_mutation_and_g() {
        let vf = field(catalog::condorcet_winner(), 1.0);
        let f = vf.eval_f(&[0.7, 0.2, 0.1]);
        for (fi, pi) in f.iter().zip([0.7, 0.2, 0.1]) {
            assert!((fi - (1.0 / 3.0 - pi)).abs() < 1e-15);
        }
        let two = VectorField::new(&crate::prefs::parse_profile("d=2\n1: 1 2").unwrap().margin_matrix(), 1.0).unwrap();
        assert_eq!(two.eval_g(&[1.0, 0.0]), vec![0.75, 0.25]);
    }

    #[test]
    fn jacobian_matches_finite_differences() {
        let vf = field(catalog::cycle_with_loser(), 0.07);
        let p = [0.1, 0.4, 0.3, 0.2];
        let jac = vf.jacobian(&p);
        let h = 1e-6;
        for j in 0..4 {
            let mut hi = p;
            let mut lo = p;
            hi[j] += h;
            lo[j] -= h;
            let (fh, fl) = (vf.eval_f(&hi), vf.eval_f(&lo));
            for i in 0..4 {
                let fd = (fh[i] - fl[i]) / (2.0 * h);
                assert!((fd - jac[i * 4 + j]).abs() <= 1e-6 * jac[i * 4 + j].abs().max(1.0));
            }
        }
    }

    #[test]
    fn constant_trajectory_at_fixed_point() {
        let vf = field(catalog::condorcet_cycle(), 0.2);
        let traj = integrate(&vf, &uniform(3), 5.0, 0.01).unwrap();
        assert_eq!(traj.states.len(), 501);
        assert!(traj.states.iter().all(|y| l1_distance(y, &uniform(3)) < 1e-14));
        assert!((traj.times.last().unwrap() - 5.0).abs() < 1e-12);
    }

    #[test]
    fn rk4_order() {
        let vf = field(catalog::cycle_with_loser(), 0.05);
        let p0 = [0.4, 0.3, 0.2, 0.1];
        let end = |h: f64| integrate(&vf, &p0, 10.0, h).unwrap().last().to_vec();
        let (a, b, c) = (end(0.2), end(0.1), end(0.05));
        let ratio = l1_distance(&a, &b) / l1_distance(&b, &c);
        assert!((12.0..20.0).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn boundary_start_and_escape_guard() {
        let vf = field(catalog::condorcet_winner(), 0.3);
        let traj = integrate(&vf, &[0.0, 0.0, 1.0], 3.0, 0.01).unwrap();
        assert!(traj.states.iter().all(|y| y.iter().all(|&x| x >= 0.0) && (y.iter().sum::<f64>() - 1.0).abs() < 1e-12));
        // A huge step overshoots; the guard halves it until RK4 stays inside.
        let big = integrate(&vf, &[0.0, 0.0, 1.0], 10.0, 8.0).unwrap();
        assert!(big.halvings > 0 && big.step < 8.0);
        assert!(integrate(&vf, &[0.5, 0.6, 0.0], 1.0, 0.1).is_err());
    }

    #[test]
    fn fixed_points_of_symmetric_cases() {
        for r in [0.01, 0.3] {
            let fp = fixed_point(&field(catalog::condorcet_cycle(), r)).unwrap();
            assert!(l1_distance(&fp.lottery, &uniform(3)) < 1e-14);
        }
        let fp = fixed_point(&field(catalog::cycle_with_loser(), 1.0)).unwrap();
        assert!(l1_distance(&fp.lottery, &uniform(4)) < 1e-14);
        assert!(fixed_point(&field(catalog::condorcet_cycle(), 0.0)).is_err());
    }

    #[test]
    fn condorcet_fixed_point() {
        let r = 0.02;
        let vf = field(catalog::condorcet_winner(), r);
        let fp = fixed_point_checked(&vf, 10, 1).unwrap();
        assert!(fp.residual <= 1e-10 && fp.stationarity_residual <= 1e-10);
        assert!(fp.start_spread.unwrap() <= 1e-8);
        assert!(l1_distance(&fp.lottery, &[1.0, 0.0, 0.0]) <= 0.1);
        for x in margin_payoffs(vf.margins(), &fp.lottery) {
            assert!(x <= r / (2.0 * (1.0 - r)) + 1e-12);
        }
    }

    #[test]
    fn limit_path_approaches_ml() {
        let m = catalog::cycle_with_loser().margin_matrix();
        let ml = maximal_lottery(&m).unwrap().to_f64();
        let path = ml_limit_path(&m, &[0.1, 0.05, 0.02, 0.01, 0.005]).unwrap();
        let dist: Vec<f64> = path.iter().map(|fp| l1_distance(&fp.lottery, &ml)).collect();
        assert!(dist.windows(2).all(|w| w[1] <= w[0] + 1e-6), "{dist:?}");
        assert!(dist[4] < 0.05 && dist[4] < dist[0]);
        assert!(ml_limit_path(&m, &[0.01, 0.02]).is_err());
    }

    #[test]
    fn interior_floor_after_unit_time() {
        let r = 0.05;
        let vf = field(catalog::condorcet_winner(), r);
        let traj = integrate(&vf, &[1.0, 0.0, 0.0], 30.0, 0.01).unwrap();
        for (t, y) in traj.times.iter().zip(&traj.states) {
            if *t >= 1.0 {
                assert!(y.iter().all(|&x| x >= r / 12.0), "t={t} y={y:?}");
            }
        }
    }

    #[test]
    fn entropy_identities() {
        let p = [0.2, 0.3, 0.5];
        assert_eq!(relative_entropy(&p, &p).unwrap(), 0.0);
        assert!(relative_entropy(&p, &[0.5, 0.5, 0.0]).is_err());
        assert_eq!(relative_entropy(&[1.0, 0.0], &[0.5, 0.5]).unwrap(), std::f64::consts::LN_2);
        assert!((relative_entropy_bits(&[1.0, 0.0], &[0.5, 0.5]).unwrap() - 1.0).abs() < 1e-15);
        let vf = field(catalog::condorcet_cycle(), 0.1);
        let traj = integrate(&vf, &uniform(3), 1.0, 0.1).unwrap();
        let diag = entropy_diagnostics(&traj, &uniform(3), 0.1).unwrap();
        assert!(diag.iter().all(|e| e.entropy == 0.0 && e.slope == 0.0));
        let nudged = nudge_interior(&[1.0, 0.0, 0.0], 1e-9);
        assert!(nudged.iter().all(|&x| x > 0.0) && (nudged.iter().sum::<f64>() - 1.0).abs() < 1e-15);
    }
}
