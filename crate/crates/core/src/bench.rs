//! Experiment drivers: the convection-diffusion test tensor and CSV reports
//! for the Fréchet solvers, condition-number estimators and nuclear-norm
//! descent.
//!
//! Random draws come from ChaCha8 seeded with the configured `u64`
//! ([`crate::random::seeded`]). The solver comparison draws `𝒞` from the
//! stream seeded with `seed + 1` so that it is independent of the `ν` draws.

use std::path::Path;
use std::time::Instant;

use num_complex::Complex;

use crate::conditioning::{power_iteration, PowerOptions};
use crate::error::{Error, Result};
use crate::frechet::{lowrank_factorize, tfrechet, tfrechet_lowrank, FrechetOptions, FrechetResult, Method};
use crate::kron::{kron_efficient, kron_full, KronOptions, MatrixRoute};
use crate::linalg::relative_distance;
use crate::matfun::ScalarFunction;
use crate::nuclear::{nucmin_descent, ArmijoParams, Trajectory};
use crate::random::{random_tensor, seeded, uniform};
use crate::scalar::CMatrix;
use crate::tensor::Tensor3;

pub const FRECHET_HEADER: [&str; 7] = ["solver", "status", "time_s", "speedup_pct", "op_count", "iterations", "rel_error"];
pub const COND_HEADER: [&str; 7] = ["method", "status", "time_s", "calls", "time_per_call_s", "estimate", "accuracy"];
pub const NUCMIN_HEADER: [&str; 4] = ["step", "nuclear_norm", "step_size", "grad_norm"];

/// Upper end of the convection parameter range `[0, NU_MAX]`.
pub const NU_MAX: f64 = 200.0;

fn grid_side(n: usize) -> Result<usize> {
    let g = (n as f64).sqrt().round() as usize;
    if n == 0 || g * g != n {
        return Err(Error::InvalidArgument(format!("n = {n} is not a positive perfect square")));
    }
    Ok(g)
}

/// Scaling of the convection-diffusion faces.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum StencilScaling {
    /// Stencil weights: `−4` on the diagonal and `1 ± νh/2` on neighbours,
    /// i.e. the physical operator times `h²`.
    #[default]
    Stencil,
    /// Physical units: `1/h²` diffusion and `ν/(2h)` convection weights. The
    /// t-exponential of such tensors overflows in double precision for `ν`
    /// in `[0, 200]` because the Laplacian cancels in every transform-domain
    /// face but the first, leaving a strongly growing convection part.
    Physical,
}

impl std::str::FromStr for StencilScaling {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "stencil" => Ok(Self::Stencil),
            "physical" => Ok(Self::Physical),
            other => Err(Error::InvalidArgument(format!("unknown stencil scaling '{other}'"))),
        }
    }
}

/// Centered-difference discretization of `Δu + ν (u_x + u_y)` on the unit
/// square with `g × g` interior points, `h = 1/(g+1)` and homogeneous
/// Dirichlet boundary. Node `(x, y)` has index `x + g y`.
pub fn convection_diffusion_face(g: usize, nu: f64, scaling: StencilScaling) -> CMatrix<f64> {
    let n = g * g;
    let h = 1.0 / (g as f64 + 1.0);
    let (diff, conv) = match scaling {
        StencilScaling::Stencil => (1.0, nu * h / 2.0),
        StencilScaling::Physical => (1.0 / (h * h), nu / (2.0 * h)),
    };
    let mut a = CMatrix::<f64>::zeros(n, n);
    for y in 0..g {
        for x in 0..g {
            let row = x + g * y;
            a[(row, row)] = Complex::new(-4.0 * diff, 0.0);
            let mut link = |col: usize, w: f64| a[(row, col)] += Complex::new(w, 0.0);
            if x + 1 < g {
                link(row + 1, diff + conv);
            }
            if x > 0 {
                link(row - 1, diff - conv);
            }
            if y + 1 < g {
                link(row + g, diff + conv);
            }
            if y > 0 {
                link(row - g, diff - conv);
            }
        }
    }
    a
}

/// One face per entry of `nus`.
pub fn convection_diffusion_with(n: usize, nus: &[f64], scaling: StencilScaling) -> Result<Tensor3<f64>> {
    let g = grid_side(n)?;
    if nus.is_empty() {
        return Err(Error::InvalidArgument("need at least one face".into()));
    }
    let faces: Vec<_> = nus.iter().map(|&nu| convection_diffusion_face(g, nu, scaling)).collect();
    Tensor3::from_faces(&faces)
}

/// The `ν` values drawn for [`gen_convection_diffusion`].
pub fn convection_parameters(p: usize, seed: u64) -> Vec<f64> {
    let mut rng = seeded(seed);
    (0..p).map(|_| uniform(&mut rng, 0.0, NU_MAX)).collect()
}

/// `n × n × p` tensor of convection-diffusion faces in stencil scaling with
/// `ν` drawn uniformly from `[0, 200]` per face.
pub fn gen_convection_diffusion(n: usize, p: usize, seed: u64) -> Result<Tensor3<f64>> {
    gen_convection_diffusion_scaled(n, p, seed, StencilScaling::Stencil)
}

pub fn gen_convection_diffusion_scaled(n: usize, p: usize, seed: u64, scaling: StencilScaling) -> Result<Tensor3<f64>> {
    grid_side(n)?;
    convection_diffusion_with(n, &convection_parameters(p, seed), scaling)
}

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub name: String,
    pub n: usize,
    pub p: usize,
    pub function: ScalarFunction<f64>,
    pub solvers: Vec<Method>,
    pub tol: f64,
    pub repetitions: usize,
    pub seed: u64,
    /// Face scaling of the generated convection-diffusion tensor.
    pub scaling: StencilScaling,
}

impl ExperimentConfig {
    pub fn new(name: &str, n: usize, p: usize) -> Self {
        Self {
            name: name.to_string(),
            n,
            p,
            function: ScalarFunction::Exp,
            solvers: vec![Method::Bcirc, Method::LowRank, Method::Dft],
            tol: 1e-6,
            repetitions: 1,
            seed: 0,
            scaling: StencilScaling::Stencil,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.p == 0 {
            return Err(Error::InvalidArgument(format!("dimensions n = {}, p = {} must be positive", self.n, self.p)));
        }
        if self.repetitions == 0 {
            return Err(Error::InvalidArgument("repetitions must be at least 1".into()));
        }
        if !(self.tol > 0.0) {
            return Err(Error::InvalidArgument(format!("tolerance {} must be positive", self.tol)));
        }
        Ok(())
    }
}

/// A CSV table with a fixed header and optional `#` comment lines above it.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvTable {
    pub comments: Vec<String>,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl CsvTable {
    fn new(header: &[&str]) -> Self {
        Self { comments: Vec::new(), header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut out = String::new();
        for c in &self.comments {
            out.push_str("# ");
            out.push_str(c);
            out.push('\n');
        }
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.header)?;
        for r in &self.rows {
            w.write_record(r)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
        out.push_str(&String::from_utf8(bytes).map_err(|e| Error::Format(e.to_string()))?);
        Ok(out)
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_csv()?)?;
        Ok(())
    }

    /// Column `name` of every row.
    pub fn column(&self, name: &str) -> Option<Vec<&str>> {
        let idx = self.header.iter().position(|h| h == name)?;
        Some(self.rows.iter().map(|r| r[idx].as_str()).collect())
    }
}

fn num(x: f64) -> String {
    x.to_string()
}

fn status_of(e: &Error) -> String {
    format!("error: {e}")
}

#[derive(Debug, Clone)]
pub struct FrechetBenchRow {
    pub solver: Method,
    pub status: String,
    /// Wall time of each repetition in seconds.
    pub times: Vec<f64>,
    pub op_count: usize,
    pub iterations: usize,
    pub rel_error: f64,
    pub converged: bool,
}

impl FrechetBenchRow {
    pub fn mean_time(&self) -> f64 {
        if self.times.is_empty() {
            f64::NAN
        } else {
            self.times.iter().sum::<f64>() / self.times.len() as f64
        }
    }
}

#[derive(Debug, Clone)]
pub struct FrechetBench {
    pub rows: Vec<FrechetBenchRow>,
    /// `‖L‖_F` of the `bcirc` reference, `NaN` if that evaluation failed.
    pub reference_norm: f64,
}

impl FrechetBench {
    pub fn row(&self, solver: Method) -> Option<&FrechetBenchRow> {
        self.rows.iter().find(|r| r.solver == solver)
    }

    pub fn table(&self) -> CsvTable {
        let base = self.row(Method::Bcirc).filter(|r| r.status == "ok").map(|r| r.mean_time());
        let mut t = CsvTable::new(&FRECHET_HEADER);
        for r in &self.rows {
            let ok = r.status == "ok";
            let time = r.mean_time();
            let speedup = match base {
                Some(b) if ok && b > 0.0 => num(100.0 * (b - time) / b),
                _ => String::new(),
            };
            t.rows.push(vec![
                r.solver.as_str().to_string(),
                r.status.clone(),
                if ok { num(time) } else { String::new() },
                speedup,
                r.op_count.to_string(),
                r.iterations.to_string(),
                if ok { num(r.rel_error) } else { String::new() },
            ]);
        }
        t
    }
}

fn run_solver(
    a: &Tensor3<f64>,
    c: &Tensor3<f64>,
    f: &ScalarFunction<f64>,
    method: Method,
    opts: &FrechetOptions,
) -> Result<FrechetResult<f64>> {
    if method == Method::LowRank {
        let factors = lowrank_factorize(c, opts.factor_tol)?;
        tfrechet_lowrank(a, &factors, f, opts.max_d, opts.tol)
    } else {
        tfrechet(a, c, f, method, opts)
    }
}

/// Solver comparison on the convection-diffusion tensor with a dense
/// standard normal direction. Errors are relative to a `bcirc` evaluation
/// computed once outside the timed runs. A solver that fails is reported in
/// its row.
pub fn run_frechet_bench(config: &ExperimentConfig) -> Result<FrechetBench> {
    config.validate()?;
    if config.solvers.is_empty() {
        return Err(Error::InvalidArgument("no solvers selected".into()));
    }
    let a = gen_convection_diffusion_scaled(config.n, config.p, config.seed, config.scaling)?;
    let c: Tensor3<f64> = random_tensor(config.n, config.n, config.p, &mut seeded(config.seed.wrapping_add(1)));
    run_frechet_bench_on(&a, &c, config)
}

/// [`run_frechet_bench`] with caller-supplied `𝒜` and `𝒞`.
pub fn run_frechet_bench_on(a: &Tensor3<f64>, c: &Tensor3<f64>, config: &ExperimentConfig) -> Result<FrechetBench> {
    config.validate()?;
    let opts = FrechetOptions { tol: config.tol, ..FrechetOptions::default() };
    let reference = tfrechet(a, c, &config.function, Method::Bcirc, &opts).map(|r| r.value);
    let mut rows = Vec::with_capacity(config.solvers.len());
    for &solver in &config.solvers {
        let mut row = FrechetBenchRow {
            solver,
            status: "ok".into(),
            times: Vec::new(),
            op_count: 0,
            iterations: 0,
            rel_error: f64::NAN,
            converged: false,
        };
        for _ in 0..config.repetitions {
            let start = Instant::now();
            let outcome = run_solver(a, c, &config.function, solver, &opts);
            let elapsed = start.elapsed().as_secs_f64();
            match outcome {
                Ok(res) => {
                    row.times.push(elapsed);
                    row.op_count = res.operator_applications;
                    row.iterations = res.iterations;
                    row.converged = res.converged;
                    row.rel_error = reference
                        .as_ref()
                        .map_or(f64::NAN, |r| relative_distance(res.value.unfolded(), r.unfolded()));
                }
                Err(e) => {
                    row.status = status_of(&e);
                    break;
                }
            }
        }
        if row.status == "ok" && !row.converged {
            row.status = "not converged".into();
        }
        rows.push(row);
    }
    Ok(FrechetBench { rows, reference_norm: reference.map_or(f64::NAN, |r| r.frobenius_norm()) })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CondMethod {
    Power,
    KronEfficient,
    KronFull,
}

impl CondMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            CondMethod::Power => "power",
            CondMethod::KronEfficient => "kron_efficient",
            CondMethod::KronFull => "kron_full",
        }
    }
}

#[derive(Debug, Clone)]
pub struct CondBenchRow {
    pub method: CondMethod,
    pub status: String,
    pub time: f64,
    pub calls: usize,
    pub estimate: f64,
    /// `|estimate − truth| / truth` against the full Kronecker form.
    pub accuracy: f64,
}

#[derive(Debug, Clone)]
pub struct CondBench {
    pub rows: Vec<CondBenchRow>,
    pub ground_truth: Option<f64>,
}

impl CondBench {
    pub fn row(&self, method: CondMethod) -> Option<&CondBenchRow> {
        self.rows.iter().find(|r| r.method == method)
    }

    pub fn table(&self) -> CsvTable {
        let mut t = CsvTable::new(&COND_HEADER);
        for r in &self.rows {
            let ok = r.status == "ok";
            let opt = |x: f64| if ok && x.is_finite() { num(x) } else { String::new() };
            t.rows.push(vec![
                r.method.as_str().to_string(),
                r.status.clone(),
                opt(r.time),
                if ok { r.calls.to_string() } else { String::new() },
                opt(if r.calls > 0 { r.time / r.calls as f64 } else { f64::NAN }),
                opt(r.estimate),
                opt(r.accuracy),
            ]);
        }
        t
    }
}

/// Condition number of `f` at a standard normal `n × n × p` tensor by power
/// iteration (exact `dft` solver), the efficient Kronecker form and the full
/// Kronecker form, which also serves as ground truth. Kronecker rows beyond
/// the size cap are reported as skipped.
pub fn run_cond_bench(config: &ExperimentConfig) -> Result<CondBench> {
    config.validate()?;
    let a: Tensor3<f64> = random_tensor(config.n, config.n, config.p, &mut seeded(config.seed));
    run_cond_bench_on(&a, config)
}

pub fn run_cond_bench_on(a: &Tensor3<f64>, config: &ExperimentConfig) -> Result<CondBench> {
    config.validate()?;
    let f = &config.function;
    let kopts = KronOptions::default();
    let mut rows = Vec::new();

    let start = Instant::now();
    let full = kron_full(a, f, Method::Dft, &kopts).map(|k| (k.spectral_norm(), k.solver_calls));
    let full_time = start.elapsed().as_secs_f64();
    let truth = full.as_ref().ok().map(|&(s, _)| s);

    let start = Instant::now();
    let opts = PowerOptions { tol: config.tol, seed: config.seed, ..PowerOptions::default() };
    let power = power_iteration(a, f, &opts).map(|r| (r.estimate, r.solver_calls));
    rows.push(cond_row(CondMethod::Power, power, start.elapsed().as_secs_f64(), truth));

    let start = Instant::now();
    let efficient = kron_efficient(a, f, MatrixRoute::Fourier, &kopts).map(|k| (k.spectral_norm(), k.solver_calls));
    rows.push(cond_row(CondMethod::KronEfficient, efficient, start.elapsed().as_secs_f64(), truth));

    rows.push(cond_row(CondMethod::KronFull, full, full_time, truth));
    Ok(CondBench { rows, ground_truth: truth })
}

fn cond_row(method: CondMethod, outcome: Result<(f64, usize)>, time: f64, truth: Option<f64>) -> CondBenchRow {
    match outcome {
        Ok((estimate, calls)) => CondBenchRow {
            method,
            status: "ok".into(),
            time,
            calls,
            estimate,
            accuracy: truth.map_or(f64::NAN, |t| if t > 0.0 { (estimate - t).abs() / t } else { (estimate - t).abs() }),
        },
        Err(e) => CondBenchRow {
            method,
            status: match e {
                Error::DenseLimit { .. } => format!("skipped: {e}"),
                _ => status_of(&e),
            },
            time,
            calls: 0,
            estimate: f64::NAN,
            accuracy: f64::NAN,
        },
    }
}

#[derive(Debug, Clone)]
pub struct NucminReport {
    pub dims: (usize, usize, usize),
    pub trajectory: Trajectory<f64>,
}

impl NucminReport {
    pub fn table(&self) -> CsvTable {
        let (n, m, p) = self.dims;
        let mut t = CsvTable::new(&NUCMIN_HEADER);
        t.comments.push(format!("tensor n={n} m={m} p={p}"));
        for s in &self.trajectory.steps {
            t.rows.push(vec![s.step.to_string(), num(s.nuclear_norm), num(s.step_size), num(s.grad_norm)]);
        }
        t
    }
}

/// Nuclear-norm descent from `start`, or from a standard normal `n × n × p`
/// tensor drawn with the configured seed.
pub fn run_nucmin(config: &ExperimentConfig, start: Option<&Tensor3<f64>>, steps: usize) -> Result<NucminReport> {
    let generated;
    let a0 = match start {
        Some(a) => a,
        None => {
            config.validate()?;
            generated = random_tensor(config.n, config.n, config.p, &mut seeded(config.seed));
            &generated
        }
    };
    let trajectory = nucmin_descent(a0, steps, &ArmijoParams::default())?;
    Ok(NucminReport { dims: a0.dims(), trajectory })
}

/// Convection parameter of a face from [`convection_diffusion_face`], read
/// off the first pair of x-neighbours. Grids with one point carry none.
pub fn recover_convection(face: &CMatrix<f64>, g: usize, scaling: StencilScaling) -> f64 {
    if g < 2 {
        return 0.0;
    }
    let h = 1.0 / (g as f64 + 1.0);
    let gap = (face[(0, 1)] - face[(1, 0)]).re;
    match scaling {
        StencilScaling::Stencil => gap / h,
        StencilScaling::Physical => gap * h,
    }
}
