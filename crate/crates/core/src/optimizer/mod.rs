//! Joint ISL / PAPR / discrete-phase majorization-minimization.
//!
//! Each iteration linearizes the active objective terms around the current
//! design vector and minimizes the linear surrogate over the feasible set:
//! reserved entries are rescaled onto the energy sphere, data entries move
//! inside the convex hull of their pre-chirp alphabet under a concave
//! push toward the vertices, and are snapped to the nearest vertex before a
//! final reserved-only polish.

pub mod accel;
pub mod isl;
pub mod majorize;
pub mod papr;
pub mod projection;

use std::f64::consts::TAU;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::config::AfdmConfig;
use crate::error::{AfdmError, Result};
use crate::metrics::{LazSpec, DEFAULT_CACHE_CAP};
use crate::signal::{effective, DesignVector, ModulationMatrices};

use self::isl::{IslModel, LinearTerm};
use self::papr::{PaprGeometry, PaprPoint};
use self::projection::{nearest_vertex, project_convex_hull};

pub use self::majorize::{lemma1_check, lemma2_coeffs, PowerMajorant};

/// Which objective terms are active.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    AfShape,
    PaprMin,
    Joint,
}

/// Which entries of u are free.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VariableSet {
    RcsOnly,
    RcsPlusPrechirp,
}

/// Penalty-weight continuation for the joint mode.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RhoSchedule {
    pub up: f64,
    pub down: f64,
    /// Bounds relative to the initial weight.
    pub min_ratio: f64,
    pub max_ratio: f64,
    /// Consecutive feasible iterations after which the weight stops shrinking.
    pub hold: usize,
    /// The weight grows while PAPR exceeds the target minus this margin.
    pub margin_db: f64,
}

impl Default for RhoSchedule {
    fn default() -> Self {
        Self { up: 1.5, down: 1.2, min_ratio: 1e-4, max_ratio: 1e16, hold: 20, margin_db: 0.15 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OptimizerOptions {
    pub mode: Mode,
    pub variables: VariableSet,
    /// Target PAPR in dB, used by the joint mode.
    pub gamma_db: f64,
    pub ell: u32,
    pub r_max: usize,
    /// Iteration at which the vertex push starts.
    pub r_nsp: usize,
    /// Reserved-only iterations after snapping the data entries, capped at
    /// half of `r_max`.
    pub polish: usize,
    /// Reruns from randomized reserved entries when a joint run misses the
    /// PAPR target.
    pub restarts: usize,
    pub stop_tol: f64,
    pub rho: RhoSchedule,
    /// Vertex-push weight reached at the snap iteration.
    pub omega_max: f64,
    /// Normalized step length for data entries.
    pub dcs_step: f64,
    pub accelerate: bool,
    /// Use the full majorizing damping for the PAPR term instead of the
    /// first-order one.
    pub strict_papr: bool,
    pub peak_growth: f64,
    pub max_peak_retries: usize,
    pub cache_cap: usize,
}

impl Default for OptimizerOptions {
    fn default() -> Self {
        Self {
            mode: Mode::AfShape,
            variables: VariableSet::RcsPlusPrechirp,
            gamma_db: 5.0,
            ell: 16,
            r_max: 600,
            r_nsp: 0,
            polish: 100,
            restarts: 4,
            stop_tol: 1e-4,
            rho: RhoSchedule::default(),
            omega_max: 0.3,
            dcs_step: 0.1,
            accelerate: false,
            strict_papr: true,
            peak_growth: 1.1,
            max_peak_retries: 50,
            cache_cap: DEFAULT_CACHE_CAP,
        }
    }
}

impl OptimizerOptions {
    pub fn new(mode: Mode, variables: VariableSet) -> Self {
        Self { mode, variables, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.ell < 2 || self.ell % 2 != 0 {
            return Err(AfdmError::Config(format!("ell must be an even integer >= 2, got {}", self.ell)));
        }
        if self.mode == Mode::Joint && !(self.gamma_db > 0.0) {
            return Err(AfdmError::Config("joint mode needs a positive PAPR target".into()));
        }
        if !(self.peak_growth > 1.0) {
            return Err(AfdmError::Config("peak growth factor must exceed 1".into()));
        }
        if !(self.stop_tol >= 0.0) || !(self.dcs_step > 0.0) || !(self.omega_max >= 0.0) {
            return Err(AfdmError::Config("step and tolerance parameters must be non-negative".into()));
        }
        let r = &self.rho;
        if !(r.up >= 1.0 && r.down >= 1.0 && r.min_ratio > 0.0 && r.max_ratio >= r.min_ratio) {
            return Err(AfdmError::Config("invalid penalty-weight schedule".into()));
        }
        Ok(())
    }

    fn uses_isl(&self) -> bool {
        self.mode != Mode::PaprMin
    }

    fn uses_papr(&self) -> bool {
        self.mode != Mode::AfShape
    }

    /// Target used to scale the moment penalty; the PAPR-only mode pins it to 0 dB.
    fn target_db(&self) -> f64 {
        match self.mode {
            Mode::Joint => self.gamma_db,
            _ => 0.0,
        }
    }
}

/// One row of the per-iteration record.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub iter: usize,
    pub isl: f64,
    pub papr_db: f64,
    pub rho: f64,
    pub omega: f64,
    pub t_p: f64,
    pub objective: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DesignResult {
    pub design: DesignVector,
    pub trace: Vec<TraceRow>,
    pub iterations: usize,
    pub converged: bool,
    pub feasible: bool,
    pub initial_isl: f64,
    pub final_isl: f64,
    pub initial_papr_db: f64,
    pub final_papr_db: f64,
}

impl DesignResult {
    /// ISL reduction relative to the initial waveform, in dB.
    pub fn isl_reduction_db(&self) -> f64 {
        10.0 * (self.initial_isl / self.final_isl).log10()
    }

    pub fn trace_csv(&self) -> String {
        let mut out = String::from("iter,isl,papr_db,rho,omega,t_p,objective\n");
        for r in &self.trace {
            out.push_str(&format!(
                "{},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e}\n",
                r.iter, r.isl, r.papr_db, r.rho, r.omega, r.t_p, r.objective
            ));
        }
        out
    }
}

/// Everything fixed for one run.
struct Problem<'a> {
    cfg: &'a AfdmConfig,
    opts: &'a OptimizerOptions,
    mm: ModulationMatrices,
    isl: IslModel,
    geom: Option<PaprGeometry>,
    b: Vec<Complex64>,
    mask: Vec<bool>,
    gamma_p: f64,
    target_energy: f64,
}

/// Metrics at one iterate.
struct Eval {
    isl: f64,
    papr: PaprPoint,
}

impl Problem<'_> {
    fn eval(&self, u: &[Complex64]) -> Result<Eval> {
        let v = effective(&self.b, u);
        let isl = self.isl.kernel().weighted_isl(&self.mm.synthesize(&v)?);
        let papr = PaprPoint::new(&self.mm, &v, self.gamma_p)?;
        Ok(Eval { isl, papr })
    }

    fn isl_term(&self, u: &[Complex64]) -> Result<LinearTerm> {
        let v = effective(&self.b, u);
        let pt = self.isl.point(&self.mm, &v)?;
        self.isl.linearize(&self.mm, &self.b, u, &pt)
    }

    fn papr_term(&self, u: &[Complex64], pt: &PaprPoint, t_p: f64) -> Result<LinearTerm> {
        let geom = self.geom.as_ref().expect("geometry built when the PAPR term is active");
        papr::linearize(&self.mm, geom, &self.b, u, pt, t_p, self.opts.ell, self.opts.strict_papr)
    }

    fn peak(&self, u: &[Complex64]) -> Result<f64> {
        Ok(PaprPoint::new(&self.mm, &effective(&self.b, u), self.gamma_p)?.peak())
    }

    /// Plain reserved-only MM step, used as the base map for extrapolation.
    fn rcs_step(&self, u: &[Complex64]) -> Result<Vec<Complex64>> {
        let mut weight = None;
        let (next, _) = self.step(u, &mut weight, None)?;
        Ok(next)
    }

    /// One surrogate minimization including the adaptive peak bound loop.
    /// Returns the new iterate and the final bound.
    fn step(
        &self,
        u: &[Complex64],
        rho: &mut Option<(f64, f64)>,
        omega: Option<f64>,
    ) -> Result<(Vec<Complex64>, f64)> {
        let opts = self.opts;
        let isl_term = if opts.uses_isl() { Some(self.isl_term(u)?) } else { None };
        if !opts.uses_papr() {
            let term = isl_term.expect("ISL term active");
            return Ok((update_iterate(self.cfg, &self.mask, u, &term, omega, opts.dcs_step, self.target_energy), 0.0));
        }
        let pt = PaprPoint::new(&self.mm, &effective(&self.b, u), self.gamma_p)?;
        let mut t_p = update_tp(pt.peak(), opts.peak_growth);
        for _ in 0..=opts.max_peak_retries {
            let p_term = self.papr_term(u, &pt, t_p)?;
            let term = match &isl_term {
                None => p_term,
                Some(j) => {
                    let (w, _) = *rho.get_or_insert_with(|| {
                        let gj = inf_norm(&j.grad);
                        let gp = inf_norm(&p_term.grad);
                        let w0 = if gp > 0.0 { gj / gp } else { 1.0 };
                        (w0, w0)
                    });
                    j.add_scaled(&p_term, w)
                }
            };
            let next = update_iterate(self.cfg, &self.mask, u, &term, omega, opts.dcs_step, self.target_energy);
            if self.peak(&next)? <= t_p {
                return Ok((next, t_p));
            }
            t_p *= opts.peak_growth;
        }
        Err(AfdmError::PeakBoundRetries(opts.max_peak_retries))
    }
}

/// Peak bound at the start of an iteration.
pub fn update_tp(peak: f64, growth: f64) -> f64 {
    growth * peak
}

/// Vertex-push weight at iteration r for a push phase ending at `snap`.
pub fn nsp_weight(r: usize, r_nsp: usize, snap: usize, omega_max: f64) -> f64 {
    if r < r_nsp || snap <= r_nsp {
        return 0.0;
    }
    omega_max * (r - r_nsp) as f64 / (snap - r_nsp) as f64
}

/// Gradient of the concave vertex penalty: -u on data entries, 0 elsewhere.
pub fn nsp_coeff(u: &[Complex64], mask: &[bool]) -> Vec<Complex64> {
    u.iter().zip(mask).map(|(z, &r)| if r { Complex64::new(0.0, 0.0) } else { -z }).collect()
}

fn inf_norm(x: &[Complex64]) -> f64 {
    x.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Minimize the linear surrogate over the feasible set.
///
/// With `omega = None` data entries stay fixed; otherwise they take a
/// normalized step, get pushed outward by `omega` and are projected onto the
/// alphabet hull. Reserved entries take the closed-form minimizer, rescaled so
/// the total energy equals `target_energy`.
pub fn update_iterate(
    cfg: &AfdmConfig,
    mask: &[bool],
    u: &[Complex64],
    term: &LinearTerm,
    omega: Option<f64>,
    dcs_step: f64,
    target_energy: f64,
) -> Vec<Complex64> {
    let mut next = u.to_vec();
    if let Some(om) = omega {
        let gd = term.grad.iter().zip(mask).filter(|(_, &r)| !r).map(|(g, _)| g.norm()).fold(0.0, f64::max);
        let scale = if gd > 0.0 { dcs_step / gd } else { 0.0 };
        for m in cfg.partition.data() {
            let m = *m;
            let pre = u[m] * (1.0 + om) - term.grad[m] * scale;
            next[m] = project_convex_hull(pre, &cfg.alphabet.points(m));
        }
    }
    let d_energy: f64 = next.iter().zip(mask).filter(|(_, &r)| !r).map(|(z, _)| z.norm_sqr()).sum();
    let reserved = cfg.partition.reserved();
    if reserved.is_empty() {
        return next;
    }
    let cand: Vec<Complex64> = reserved.iter().map(|&m| u[m] * term.damping - term.grad[m]).collect();
    let cand_energy: f64 = cand.iter().map(|z| z.norm_sqr()).sum();
    let room = target_energy - d_energy;
    if room < 0.0 {
        // Cannot happen with unit-bounded data entries; pull data inward and zero R.
        let s = (target_energy / d_energy).sqrt();
        for m in cfg.partition.data() {
            next[*m] *= s;
        }
        for &m in reserved {
            next[m] = Complex64::new(0.0, 0.0);
        }
        return next;
    }
    let (src, src_energy) = if cand_energy < 1e-15 * target_energy {
        let prev: Vec<Complex64> = reserved.iter().map(|&m| u[m]).collect();
        let e = prev.iter().map(|z| z.norm_sqr()).sum();
        (prev, e)
    } else {
        (cand, cand_energy)
    };
    if src_energy <= 0.0 {
        let fill = Complex64::new((room / reserved.len() as f64).sqrt(), 0.0);
        for &m in reserved {
            next[m] = fill;
        }
        return next;
    }
    let eps = (room / src_energy).sqrt();
    for (&m, z) in reserved.iter().zip(&src) {
        next[m] = z * eps;
    }
    next
}

/// Replace data entries by their nearest alphabet point and rescale R.
pub fn snap_discrete(cfg: &AfdmConfig, u: &[Complex64], target_energy: f64) -> Vec<Complex64> {
    let mut next = u.to_vec();
    for &m in cfg.partition.data() {
        next[m] = nearest_vertex(u[m], &cfg.alphabet.points(m)).1;
    }
    let d_energy: f64 = cfg.partition.data().iter().map(|&m| next[m].norm_sqr()).sum();
    let reserved = cfg.partition.reserved();
    let r_energy: f64 = reserved.iter().map(|&m| next[m].norm_sqr()).sum();
    let room = (target_energy - d_energy).max(0.0);
    if !reserved.is_empty() {
        if r_energy > 0.0 {
            let s = (room / r_energy).sqrt();
            for &m in reserved {
                next[m] *= s;
            }
        } else {
            let fill = Complex64::new((room / reserved.len() as f64).sqrt(), 0.0);
            for &m in reserved {
                next[m] = fill;
            }
        }
    }
    next
}

/// Run the majorization-minimization design from `init`.
///
/// In joint mode a run that misses the PAPR target is repeated from reserved
/// entries with fresh random phases, up to `opts.restarts` times. The first
/// feasible result is returned, otherwise the one with the lowest PAPR.
/// Restart phases are seeded from the data symbols, so results stay
/// deterministic.
pub fn run_jipd_mm(cfg: &AfdmConfig, laz: &LazSpec, init: &DesignVector, opts: &OptimizerOptions) -> Result<DesignResult> {
    let first = run_once(cfg, laz, init, opts)?;
    if opts.mode != Mode::Joint || first.feasible || cfg.partition.reserved().is_empty() {
        return Ok(first);
    }
    let seed = init.symbols.iter().fold(0xcbf2_9ce4_8422_2325u64, |h, &k| (h ^ k as u64).wrapping_mul(0x0100_0000_01b3));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut total = first.iterations;
    let (initial_isl, initial_papr_db) = (first.initial_isl, first.initial_papr_db);
    let mut best = first;
    for _ in 0..opts.restarts {
        let mut start = init.clone();
        for &m in cfg.partition.reserved() {
            start.u[m] = Complex64::from_polar(init.u[m].norm(), rng.random_range(0.0..TAU));
        }
        let res = run_once(cfg, laz, &start, opts)?;
        total += res.iterations;
        if res.feasible || res.final_papr_db < best.final_papr_db {
            best = res;
        }
        if best.feasible {
            break;
        }
    }
    best.iterations = total;
    best.initial_isl = initial_isl;
    best.initial_papr_db = initial_papr_db;
    Ok(best)
}

fn run_once(cfg: &AfdmConfig, laz: &LazSpec, init: &DesignVector, opts: &OptimizerOptions) -> Result<DesignResult> {
    cfg.validate()?;
    opts.validate()?;
    let n = cfg.n;
    if init.u.len() != n || init.symbols.len() != n || init.prechirp.len() != n {
        return Err(AfdmError::Dimension { expected: n, got: init.u.len() });
    }
    let target_energy = n as f64;
    let mm = ModulationMatrices::new(cfg)?;
    let isl = IslModel::new(n, laz)?;
    let geom = opts.uses_papr().then(|| PaprGeometry::new(&mm, opts.cache_cap));
    let b = init.b(cfg);
    let mask = cfg.partition.reserved_mask();

    let mut u = init.u.clone();
    let e0 = init.energy();
    if !(e0 > 0.0) {
        return Err(AfdmError::ZeroPower);
    }
    let s = (target_energy / e0).sqrt();
    u.iter_mut().for_each(|z| *z *= s);

    let v0 = effective(&b, &u);
    let p0 = PaprPoint::new(&mm, &v0, 1.0)?;
    let mean0 = p0.x.iter().sum::<f64>() / p0.x.len() as f64;
    if !(mean0 > 0.0) {
        return Err(AfdmError::ZeroPower);
    }
    let rows = (n * cfg.oversampling) as f64;
    let gamma_p = 10f64.powf(opts.target_db() / 10.0) * mean0 / rows.powf(1.0 / opts.ell as f64);

    let prob = Problem { cfg, opts, mm, isl, geom, b, mask, gamma_p, target_energy };
    let start = prob.eval(&u)?;
    let joint_vars = opts.variables == VariableSet::RcsPlusPrechirp && !cfg.partition.data().is_empty();

    let mut trace = vec![TraceRow {
        iter: 0,
        isl: start.isl,
        papr_db: start.papr.papr_db(),
        rho: 0.0,
        omega: 0.0,
        t_p: 0.0,
        objective: tracked(opts, &start, 0.0),
    }];

    let accelerate = opts.accelerate && !joint_vars && opts.mode != Mode::Joint;
    let (u, iterations, converged) = if accelerate {
        run_accelerated(&prob, u, &start, &mut trace)?
    } else {
        run_plain(&prob, u, joint_vars, &mut trace)?
    };

    let fin = prob.eval(&u)?;
    let final_papr_db = fin.papr.papr_db();
    let feasible = opts.mode != Mode::Joint || final_papr_db <= opts.gamma_db + 0.05;
    let mut design = DesignVector { u, symbols: init.symbols.clone(), prechirp: init.prechirp.clone() };
    design.refresh_prechirp(cfg);
    Ok(DesignResult {
        design,
        trace,
        iterations,
        converged,
        feasible,
        initial_isl: start.isl,
        final_isl: fin.isl,
        initial_papr_db: start.papr.papr_db(),
        final_papr_db,
    })
}

/// Objective used for stopping and for the trace.
fn tracked(opts: &OptimizerOptions, ev: &Eval, rho: f64) -> f64 {
    let moment = ev.papr.moment(opts.ell);
    match opts.mode {
        Mode::AfShape => ev.isl,
        Mode::PaprMin => moment,
        Mode::Joint => {
            let e = moment - ev.papr.x.len() as f64;
            ev.isl + rho * e * e
        }
    }
}

fn run_plain(
    prob: &Problem<'_>,
    mut u: Vec<Complex64>,
    joint_vars: bool,
    trace: &mut Vec<TraceRow>,
) -> Result<(Vec<Complex64>, usize, bool)> {
    let opts = prob.opts;
    let snap_at = if joint_vars { opts.r_max - opts.polish.min(opts.r_max / 2) } else { usize::MAX };
    let mut rho: Option<(f64, f64)> = None;
    let mut feasible_run = 0usize;
    let mut prev_obj = trace[0].objective;
    let mut iterations = 0;
    let mut converged = false;
    let mut snapped = !joint_vars;
    for r in 0..opts.r_max {
        if joint_vars && r == snap_at {
            u = snap_discrete(prob.cfg, &u, prob.target_energy);
            snapped = true;
        }
        let omega = if snapped { None } else { Some(nsp_weight(r, opts.r_nsp, snap_at, opts.omega_max)) };
        let (next, t_p) = prob.step(&u, &mut rho, omega)?;
        u = next;
        iterations = r + 1;
        let ev = prob.eval(&u)?;
        let papr_db = ev.papr.papr_db();
        if let Some((w, w0)) = rho.as_mut() {
            let sched = &opts.rho;
            if papr_db > opts.gamma_db - sched.margin_db {
                *w = (*w * sched.up).min(sched.max_ratio * *w0);
                feasible_run = 0;
            } else {
                feasible_run += 1;
                if feasible_run < sched.hold {
                    *w = (*w / sched.down).max(sched.min_ratio * *w0);
                }
            }
        }
        let w = rho.map(|(w, _)| w).unwrap_or(0.0);
        let obj = tracked(opts, &ev, w);
        trace.push(TraceRow {
            iter: iterations,
            isl: ev.isl,
            papr_db,
            rho: w,
            omega: omega.unwrap_or(0.0),
            t_p,
            objective: obj,
        });
        let ok_to_stop = snapped && (opts.mode != Mode::Joint || papr_db <= opts.gamma_db);
        let rel = (obj - prev_obj).abs() / prev_obj.abs().max(f64::MIN_POSITIVE);
        prev_obj = obj;
        if ok_to_stop && rel < opts.stop_tol {
            converged = true;
            break;
        }
    }
    if joint_vars && !snapped {
        u = snap_discrete(prob.cfg, &u, prob.target_energy);
    }
    Ok((u, iterations, converged))
}

fn run_accelerated(
    prob: &Problem<'_>,
    mut u: Vec<Complex64>,
    start: &Eval,
    trace: &mut Vec<TraceRow>,
) -> Result<(Vec<Complex64>, usize, bool)> {
    let opts = prob.opts;
    let merit = |x: &[Complex64]| -> Result<f64> { Ok(tracked(opts, &prob.eval(x)?, 0.0)) };
    let project = |x: &mut [Complex64]| {
        let d: f64 = prob.mask.iter().zip(x.iter()).filter(|(&r, _)| !r).map(|(_, z)| z.norm_sqr()).sum();
        let rs: f64 = prob.mask.iter().zip(x.iter()).filter(|(&r, _)| r).map(|(_, z)| z.norm_sqr()).sum();
        if rs > 0.0 {
            let s = ((prob.target_energy - d).max(0.0) / rs).sqrt();
            for (z, &r) in x.iter_mut().zip(&prob.mask) {
                if r {
                    *z *= s;
                }
            }
        }
    };
    let mut map = |x: &[Complex64]| prob.rcs_step(x);
    let mut f = tracked(opts, start, 0.0);
    let mut evals = 0;
    let mut converged = false;
    while evals < opts.r_max {
        let st = accel::squarem_step(&u, f, &mut map, &merit, &project)?;
        evals += st.evals;
        let rel = (f - st.merit).abs() / f.abs().max(f64::MIN_POSITIVE);
        u = st.u;
        f = st.merit;
        let ev = prob.eval(&u)?;
        trace.push(TraceRow {
            iter: evals,
            isl: ev.isl,
            papr_db: ev.papr.papr_db(),
            rho: 0.0,
            omega: 0.0,
            t_p: 0.0,
            objective: f,
        });
        if rel < opts.stop_tol {
            converged = true;
            break;
        }
    }
    Ok((u, evals, converged))
}
