use std::fs::File;
use std::io::{BufReader, Write};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use eqfrechet::distributions::{
    GibbsConfig, HyperbolicParams, LangevinParams, ModelParams, TorusModelParams, VmfParams, WishartParams,
};
use eqfrechet::estimators::EstimatorOptions;
use eqfrechet::frechet::{sample_frechet_mean, FrechetSolverConfig};
use eqfrechet::harness::{
    default_threads, estimate_point, run_table1, run_table2, write_csv, write_json, EstimatorSpec, KeyValueConfig,
    TableOverrides, DEFAULT_SEED,
};
use eqfrechet::manifolds::{point_to_json, read_data_file, write_data_file, DataHeader, ManifoldKind, Metric};
use eqfrechet::mcmc::{write_steps_csv, McmcConfig, ProposalKind};
use eqfrechet::{
    Error, HyperboloidPoint, ManifoldPoint, Result, SpdMatrix, StiefelFrame, TorusPoint, UnitVector,
};

use crate::args::{Chain, Command, Common, EstimateArgs, FrechetArgs, SampleArgs, TableArgs};

const COMMON_KEYS: [&str; 4] = ["seed", "out", "format", "threads"];
const CHAIN_KEYS: [&str; 5] = ["mcmc-iters", "burn-in", "proposal", "population-draws", "inner-draws"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Format {
    Csv,
    Json,
}

/// Config file values with the command-line flags laid over them.
struct Settings(KeyValueConfig);

impl Settings {
    fn new(common: &Common, flags: Vec<(&str, &Option<String>)>) -> Result<Self> {
        let mut kv = match &common.config {
            Some(path) => KeyValueConfig::load(path)?,
            None => KeyValueConfig::default(),
        };
        let mut allowed: Vec<&str> = COMMON_KEYS.to_vec();
        allowed.extend(flags.iter().map(|(k, _)| *k));
        kv.check_keys(&allowed)?;
        for (k, v) in [
            ("seed", &common.seed),
            ("out", &common.out),
            ("format", &common.format),
            ("threads", &common.threads),
        ]
        .into_iter()
        .chain(flags)
        {
            kv.set_opt(k, v.clone());
        }
        Ok(Self(kv))
    }

    fn get<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>> {
        self.0.get(key)
    }

    fn list<T: std::str::FromStr>(&self, key: &str) -> Result<Option<Vec<T>>> {
        self.0.get_list(key)
    }

    fn required<T: std::str::FromStr>(&self, key: &str) -> Result<T> {
        self.get(key)?.ok_or_else(|| Error::Config(format!("--{key} is required")))
    }

    fn seed(&self) -> Result<u64> {
        Ok(self.get("seed")?.unwrap_or(DEFAULT_SEED))
    }

    fn format(&self) -> Result<Format> {
        match self.0.raw("format") {
            None | Some("csv") => Ok(Format::Csv),
            Some("json") => Ok(Format::Json),
            Some(other) => Err(Error::Config(format!("--format must be csv or json, got {other:?}"))),
        }
    }

    fn init_threads(&self) -> Result<()> {
        let n = match self.get::<usize>("threads")? {
            Some(0) => return Err(Error::Config("--threads must be >= 1".into())),
            Some(n) => Some(n),
            None => default_threads()?,
        };
        if let Some(n) = n {
            rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build_global()
                .map_err(|e| Error::Config(format!("cannot start {n} worker threads: {e}")))?;
        }
        Ok(())
    }

    fn proposal(&self) -> Result<Option<ProposalKind>> {
        let Some(raw) = self.0.raw("proposal") else { return Ok(None) };
        let kind = match raw {
            "haar" => ProposalKind::UniformHaar,
            "auto" => ProposalKind::Auto,
            _ => match raw.strip_prefix("rw:").map(str::parse::<f64>) {
                Some(Ok(s)) => ProposalKind::RandomWalk(s),
                _ => return Err(Error::Config(format!("--proposal must be haar, auto or rw:<scale>, got {raw:?}"))),
            },
        };
        Ok(Some(kind))
    }

    fn mcmc(&self) -> Result<McmcConfig> {
        let d = McmcConfig::default();
        let cfg = McmcConfig {
            iterations: self.get("mcmc-iters")?.unwrap_or(d.iterations),
            burn_in: self.get("burn-in")?.unwrap_or(d.burn_in),
            proposal: self.proposal()?.unwrap_or(ProposalKind::Auto),
            ..d
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn options(&self) -> Result<EstimatorOptions> {
        let d = EstimatorOptions::default();
        Ok(EstimatorOptions {
            population_draws: self.get("population-draws")?.unwrap_or(d.population_draws),
            inner_draws: self.get("inner-draws")?.unwrap_or(d.inner_draws),
            ..d
        })
    }

    /// Writes `bytes` to `--out`, or to stdout.
    fn emit(&self, bytes: &[u8]) -> Result<()> {
        match self.0.raw("out") {
            Some(path) => std::fs::write(path, bytes).map_err(|e| Error::Io(format!("{path}: {e}"))),
            None => {
                let mut out = std::io::stdout().lock();
                out.write_all(bytes)?;
                out.flush()?;
                Ok(())
            }
        }
    }
}

fn chain_flags(c: &Chain) -> Vec<(&'static str, &Option<String>)> {
    let keys = CHAIN_KEYS;
    vec![
        (keys[0], &c.mcmc_iters),
        (keys[1], &c.burn_in),
        (keys[2], &c.proposal),
        (keys[3], &c.population_draws),
        (keys[4], &c.inner_draws),
    ]
}

pub fn run(cmd: Command) -> Result<()> {
    match cmd {
        Command::Table1(a) => table(a, false),
        Command::Table2(a) => table(a, true),
        Command::Estimate(a) => estimate(a),
        Command::Sample(a) => sample(a),
        Command::FrechetMean(a) => frechet_mean(a),
    }
}

fn table(a: TableArgs, torus: bool) -> Result<()> {
    let mut flags = chain_flags(&a.chain);
    flags.extend([
        ("reps", &a.reps),
        ("p", &a.p),
        ("n", &a.n),
        ("kappa", &a.kappa),
        ("lambda", &a.lambda),
        ("estimators", &a.estimators),
        ("gibbs-thin", &a.gibbs_thin),
    ]);
    let s = Settings::new(&a.common, flags)?;
    s.init_threads()?;
    let estimators = s
        .list::<String>("estimators")?
        .map(|ids| ids.iter().map(|id| EstimatorSpec::parse(id)).collect::<Result<Vec<_>>>())
        .transpose()?;
    let mcmc = s.mcmc()?;
    let opts = s.options()?;
    let o = TableOverrides {
        p: s.list("p")?,
        n: s.list("n")?,
        kappa: s.list("kappa")?,
        lambda: s.list("lambda")?,
        reps: s.get("reps")?,
        seed: Some(s.seed()?),
        mcmc_iters: Some(mcmc.iterations),
        burn_in: Some(mcmc.burn_in),
        proposal: Some(mcmc.proposal),
        population_draws: Some(opts.population_draws),
        inner_draws: Some(opts.inner_draws),
        gibbs_thin: s.get("gibbs-thin")?,
        estimators,
    };
    let rows = if torus { run_table2(&o)? } else { run_table1(&o)? };
    let mut buf = Vec::new();
    match s.format()? {
        Format::Csv => write_csv(&mut buf, &rows)?,
        Format::Json => write_json(&mut buf, &rows)?,
    }
    s.emit(&buf)
}

fn load_data(s: &Settings) -> Result<(DataHeader, Vec<ManifoldPoint>)> {
    let path: String = s.required("data")?;
    let file = File::open(&path).map_err(|e| Error::Io(format!("{path}: {e}")))?;
    let (header, points) = read_data_file(BufReader::new(file))?;
    if points.is_empty() {
        return Err(Error::Config(format!("{path} holds no points")));
    }
    Ok((header, points))
}

fn point_output(s: &Settings, x: &ManifoldPoint, extra: Vec<(&str, Value)>) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    match s.format()? {
        Format::Csv => write_data_file(&mut buf, std::slice::from_ref(x))?,
        Format::Json => {
            let mut v = point_to_json(x);
            for (k, val) in extra {
                v[k] = val;
            }
            serde_json::to_writer(&mut buf, &v)?;
            buf.push(b'\n');
        }
    }
    Ok(buf)
}

/// Family template for a data file: the shape comes from the data, the orbit from
/// the flags. Locations are placeholders.
fn template(s: &Settings, kind: ManifoldKind, first: &ManifoldPoint, need_orbit: bool) -> Result<ModelParams> {
    let param = |key: &str, default: f64| -> Result<f64> {
        match s.get::<f64>(key)? {
            Some(v) => Ok(v),
            None if need_orbit => Err(Error::Config(format!("--{key} is required for the mre estimator"))),
            None => Ok(default),
        }
    };
    Ok(match (kind, first) {
        (ManifoldKind::Sphere, ManifoldPoint::Sphere(u)) => ModelParams::Vmf(VmfParams::new(u.clone(), param("kappa", 1.0)?)?),
        (ManifoldKind::Hyperboloid, ManifoldPoint::Hyperboloid(h)) => ModelParams::Hyperbolic(HyperbolicParams::new(
            HyperboloidPoint::apex(h.dim(), h.radius()),
            param("kappa", 1.0)?,
        )?),
        (ManifoldKind::Stiefel, ManifoldPoint::Stiefel(f)) => {
            let (p, k) = f.shape();
            ModelParams::Langevin(LangevinParams::new(StiefelFrame::canonical(p, k), param("lambda", 1.0)?)?)
        }
        (ManifoldKind::Spd, ManifoldPoint::Spd(x)) => {
            let dof: usize = s.required("dof")?;
            let eigs = match s.list::<f64>("sigma-eigs")? {
                Some(e) => e,
                None if need_orbit => return Err(Error::Config("--sigma-eigs is required for the mre estimator".into())),
                None => vec![1.0; x.p()],
            };
            if eigs.len() != x.p() {
                return Err(Error::Config(format!("--sigma-eigs needs {} values, got {}", x.p(), eigs.len())));
            }
            ModelParams::Wishart(WishartParams::new(dof, SpdMatrix::from_diagonal(&eigs)?)?)
        }
        (ManifoldKind::Torus, ManifoldPoint::Torus(t)) => {
            let lambda = if t.p() > 1 { param("lambda", 0.0)? } else { 0.0 };
            ModelParams::Torus(TorusModelParams::homogeneous(
                TorusPoint::from_angles(&vec![0.0; t.p()]),
                param("kappa", 1.0)?,
                lambda,
            )?)
        }
        _ => return Err(Error::VariantMismatch),
    })
}

fn estimate(a: EstimateArgs) -> Result<()> {
    let mut flags = chain_flags(&a.chain);
    flags.extend([
        ("data", &a.data),
        ("estimator", &a.estimator),
        ("kappa", &a.kappa),
        ("lambda", &a.lambda),
        ("dof", &a.dof),
        ("sigma-eigs", &a.sigma_eigs),
        ("trace-out", &a.trace_out),
    ]);
    let s = Settings::new(&a.common, flags)?;
    s.init_threads()?;
    let id: String = s.required("estimator")?;
    let spec = match id.as_str() {
        "mre" => EstimatorSpec::MreTrueOrbit,
        "oracle" | "mre_true_orbit" => {
            return Err(Error::Config(format!("{id:?} needs a known truth; use mre with orbit flags")))
        }
        other => EstimatorSpec::parse(other)?,
    };
    let chain_based = matches!(
        spec,
        EstimatorSpec::MreTrueOrbit | EstimatorSpec::MreMleOrbit | EstimatorSpec::MreMomOrbit
    );
    let trace_out: Option<String> = s.get("trace-out")?;
    if trace_out.is_some() && !chain_based {
        return Err(Error::Config(format!("{id} runs no chain, so there is no trace to write")));
    }
    let (header, data) = load_data(&s)?;
    let model = template(&s, header.kind, &data[0], spec == EstimatorSpec::MreTrueOrbit)?;
    let mut rng = ChaCha8Rng::seed_from_u64(s.seed()?);
    let est = estimate_point(spec, &data, &model, &s.mcmc()?, &s.options()?, &mut rng)?
        .ok_or_else(|| Error::NonConvergence(format!("{id} produced no estimate")))?;
    let mut extra = vec![("estimator", json!(id))];
    if let Some(d) = &est.diagnostics {
        extra.push(("acceptance_rate", json!(d.acceptance_rate)));
        extra.push(("chain_length", json!(d.chain_length)));
        if let Some(path) = &trace_out {
            let mut buf = Vec::new();
            write_steps_csv(&mut buf, &d.steps)?;
            std::fs::write(path, buf).map_err(|e| Error::Io(format!("{path}: {e}")))?;
        }
    }
    s.emit(&point_output(&s, &est.estimate, extra)?)
}

fn sample(a: SampleArgs) -> Result<()> {
    let s = Settings::new(
        &a.common,
        vec![
            ("family", &a.family),
            ("dim", &a.dim),
            ("cols", &a.cols),
            ("n", &a.n),
            ("kappa", &a.kappa),
            ("lambda", &a.lambda),
            ("dof", &a.dof),
            ("radius", &a.radius),
            ("sigma-diag", &a.sigma_diag),
            ("burn-in", &a.burn_in),
            ("gibbs-thin", &a.gibbs_thin),
        ],
    )?;
    s.init_threads()?;
    let family: String = s.required("family")?;
    let dim: usize = s.required("dim")?;
    let n: usize = s.required("n")?;
    if dim == 0 || n == 0 {
        return Err(Error::Config("--dim and --n must be >= 1".into()));
    }
    let model = match family.as_str() {
        "vmf" => ModelParams::Vmf(VmfParams::new(UnitVector::basis(dim + 1, 0), s.required("kappa")?)?),
        "hyperbolic" => ModelParams::Hyperbolic(HyperbolicParams::new(
            HyperboloidPoint::apex(dim, s.get("radius")?.unwrap_or(1.0)),
            s.required("kappa")?,
        )?),
        "langevin" => {
            let k = s.get("cols")?.unwrap_or(1);
            if k == 0 || k > dim {
                return Err(Error::Config(format!("--cols must be in 1..={dim}")));
            }
            ModelParams::Langevin(LangevinParams::new(StiefelFrame::canonical(dim, k), s.required("lambda")?)?)
        }
        "wishart" => {
            let diag = s.list::<f64>("sigma-diag")?.unwrap_or_else(|| vec![1.0; dim]);
            if diag.len() != dim {
                return Err(Error::Config(format!("--sigma-diag needs {dim} values")));
            }
            ModelParams::Wishart(WishartParams::new(s.get("dof")?.unwrap_or(dim), SpdMatrix::from_diagonal(&diag)?)?)
        }
        "torus" => ModelParams::Torus(TorusModelParams::homogeneous(
            TorusPoint::from_angles(&vec![0.0; dim]),
            s.required("kappa")?,
            s.get("lambda")?.unwrap_or(0.0),
        )?),
        other => return Err(Error::Config(format!("unknown family {other:?}"))),
    };
    let d = GibbsConfig::default();
    let gibbs = GibbsConfig {
        burn_in: s.get("burn-in")?.unwrap_or(d.burn_in),
        thin: s.get("gibbs-thin")?.unwrap_or(d.thin),
    };
    if gibbs.thin == 0 {
        return Err(Error::Config("--gibbs-thin must be >= 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(s.seed()?);
    let points = model.sample_n(n, gibbs, &mut rng)?;
    let mut buf = Vec::new();
    match s.format()? {
        Format::Csv => write_data_file(&mut buf, &points)?,
        Format::Json => {
            serde_json::to_writer(&mut buf, &Value::Array(points.iter().map(point_to_json).collect()))?;
            buf.push(b'\n');
        }
    }
    s.emit(&buf)
}

fn frechet_mean(a: FrechetArgs) -> Result<()> {
    let s = Settings::new(&a.common, vec![("data", &a.data)])?;
    s.init_threads()?;
    let (header, data) = load_data(&s)?;
    let fit = sample_frechet_mean(&data, Metric::default_for(header.kind), &FrechetSolverConfig::default())?;
    if !fit.converged {
        return Err(Error::NonConvergence(format!("Fréchet solver stopped after {} iterations", fit.iterations)));
    }
    let extra = vec![("objective", json!(fit.objective)), ("iterations", json!(fit.iterations))];
    s.emit(&point_output(&s, &fit.mean, extra)?)
}
