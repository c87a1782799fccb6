use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;
use sha2::{Digest, Sha256};

use nsi_core::cantor::embed;
use nsi_core::consequence::required_depth;
use nsi_core::error::RequiredDepth;
use nsi_core::fractal::{
    interpolation_error, sample_with, ConvergenceConfig, ConvergenceRow, Reference,
};
use nsi_core::herbrand::enumerate_base_through_size;
use nsi_core::network::{build_core_network, run_core_network, train_ffn};
use nsi_core::{
    attractor_points, build_fif_ifs, check_acyclic, enumerate_base, estimate_lipschitz, eval_fif,
    ground_program, iterate_tp, parse_atom_list, parse_program, AttractorMode, BaseConfig,
    EmbeddedOperator, Error, Interpretation, LevelMapping, Program, SampleSet, TrainConfig,
    DEFAULT_GROUNDING_CAP,
};

use crate::cli::Command;
use crate::config::{Mode, RunConfig};
use crate::error::{CliError, Stage};
use crate::formats::{
    convergence_csv, core_json, levels_csv, points_csv, samples_csv, trace_json, IfsJson,
    NetworkJson, TrainingJson,
};

/// Truncation used when neither `--m` nor a command-specific rule applies.
pub const DEFAULT_M: usize = 12;
/// Sample level of `sample` and `ifs` when `--level` is absent.
pub const DEFAULT_SAMPLE_LEVEL: usize = 4;
/// Extra output digits of `sample`, `ifs` and `train` over the sample level.
pub const SAMPLE_SLACK: usize = 2;
/// Truncation level of the Lipschitz estimate in `report` and `lipschitz`.
pub const REPORT_LIPSCHITZ_M: usize = 10;

type Out = Result<String, CliError>;

pub fn execute(command: &Command, cfg: &RunConfig) -> Out {
    match command {
        Command::Parse(_) => parse(cfg),
        Command::Ground(_) => ground(cfg),
        Command::Levels(_) => levels(cfg),
        Command::Tp(_) => tp(cfg),
        Command::Lipschitz(_) => lipschitz(cfg),
        Command::Embed(_) => embed_cmd(cfg),
        Command::Sample(_) => sample(cfg),
        Command::Ifs(_) => ifs(cfg),
        Command::Attractor(_) => attractor(cfg),
        Command::EvalFif(_) => eval_fif_cmd(cfg),
        Command::Converge(_) => converge(cfg),
        Command::Train(_) => train(cfg),
        Command::Core(_) => core(cfg),
        Command::Report(_) => report(cfg),
    }
}

fn read(path: &Path, stage: &'static str) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|source| CliError::Io {
        stage,
        path: path.display().to_string(),
        source,
    })
}

fn write(dir: &Path, name: &str, contents: &str) -> Result<PathBuf, CliError> {
    let io = |source| CliError::Io { stage: "write", path: dir.join(name).display().to_string(), source };
    std::fs::create_dir_all(dir).map_err(io)?;
    let path = dir.join(name);
    std::fs::write(&path, contents).map_err(io)?;
    Ok(path)
}

/// Writes `contents` to `<out>/<name>` when `--out` is set, and returns what
/// goes to standard output.
fn emit(cfg: &RunConfig, name: &str, contents: String) -> Out {
    match &cfg.out {
        Some(dir) => Ok(format!("{}\n", write(dir, name, &contents)?.display())),
        None => Ok(contents),
    }
}

fn json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("values serialize");
    s.push('\n');
    s
}

fn input(cfg: &RunConfig) -> Result<&Path, CliError> {
    cfg.program
        .as_deref()
        .ok_or_else(|| CliError::Usage("an input file is required".into()))
}

fn load(cfg: &RunConfig) -> Result<(Program, String), CliError> {
    let text = read(input(cfg)?, "parse")?;
    Ok((parse_program(&text).stage("parse")?, text))
}

fn base(cfg: &RunConfig) -> Result<BaseConfig, CliError> {
    cfg.base_config().stage("config")
}

fn mapping(p: &Program, cfg: &RunConfig, needed: usize) -> Result<LevelMapping, CliError> {
    enumerate_base(p, cfg.n.unwrap_or(needed).max(1), DEFAULT_GROUNDING_CAP).stage("levels")
}

/// `--depth`, or the smallest depth that covers levels `1..=m`.
fn depth(p: &Program, l: &LevelMapping, m: usize, cfg: &RunConfig) -> Result<usize, CliError> {
    if let Some(d) = cfg.depth {
        return Ok(d);
    }
    match required_depth(p, l, m) {
        RequiredDepth(Some(d)) => Ok(d),
        required => Err(CliError::Domain {
            stage: "ground",
            source: Error::InsufficientDepth { depth: 0, required },
        }),
    }
}

fn initial(cfg: &RunConfig) -> Result<Interpretation, CliError> {
    Interpretation::from_atoms(parse_atom_list(&cfg.from).stage("parse")?).stage("parse")
}

fn parse(cfg: &RunConfig) -> Out {
    let (p, _) = load(cfg)?;
    emit(cfg, "program.lp", p.to_string())
}

fn ground(cfg: &RunConfig) -> Out {
    let (p, _) = load(cfg)?;
    let m = cfg.m.unwrap_or(DEFAULT_M);
    let d = match cfg.depth {
        Some(d) => d,
        None => depth(&p, &mapping(&p, cfg, m)?, m, cfg)?,
    };
    let g = ground_program(&p, d, DEFAULT_GROUNDING_CAP).stage("ground")?;
    let text: String = g.clauses().map(|c| format!("{c}\n")).collect();
    emit(cfg, "ground.lp", text)
}

fn levels(cfg: &RunConfig) -> Out {
    let (p, _) = load(cfg)?;
    let l = mapping(&p, cfg, cfg.m.unwrap_or(DEFAULT_M))?;
    emit(cfg, "levels.csv", levels_csv(&l)?)
}

fn tp(cfg: &RunConfig) -> Out {
    let (p, _) = load(cfg)?;
    let m = cfg.m.unwrap_or(DEFAULT_M);
    let l = mapping(&p, cfg, m)?;
    let d = depth(&p, &l, m, cfg)?;
    let i0 = initial(cfg)?;
    let trace = iterate_tp(&p, &l, &i0, cfg.steps.unwrap_or(m), m, d).stage("tp")?;
    emit(cfg, "trace.json", json(&trace_json(&trace, &l)))
}

#[derive(Serialize)]
struct FlipJson {
    level: usize,
    ratio: String,
    value: f64,
}

#[derive(Serialize)]
struct LipschitzJson {
    m: usize,
    estimate: f64,
    ratio: String,
    pairs: usize,
    seed: u64,
    maximizing_pair: Option<[String; 2]>,
    flip_ratios: Vec<FlipJson>,
    note: &'static str,
}

fn lipschitz_json(p: &Program, l: &LevelMapping, m: usize, cfg: &RunConfig) -> Result<LipschitzJson, CliError> {
    let d = depth(p, l, m, cfg)?;
    let est = estimate_lipschitz(p, l, cfg.pairs, cfg.seed, m, d, base(cfg)?).stage("lipschitz")?;
    Ok(LipschitzJson {
        m,
        estimate: est.value,
        ratio: est.ratio.to_string(),
        pairs: est.pair_count,
        seed: cfg.seed,
        maximizing_pair: est.maximizing_pair.map(|(x, y)| [x.to_string(), y.to_string()]),
        flip_ratios: est
            .flip_ratios
            .iter()
            .map(|(level, r)| FlipJson {
                level: *level,
                ratio: r.to_string(),
                value: num_traits::ToPrimitive::to_f64(r).unwrap_or(f64::NAN),
            })
            .collect(),
        note: est.note,
    })
}

fn lipschitz(cfg: &RunConfig) -> Out {
    let (p, _) = load(cfg)?;
    let m = cfg.m.unwrap_or(REPORT_LIPSCHITZ_M);
    let l = mapping(&p, cfg, m)?;
    emit(cfg, "lipschitz.json", json(&lipschitz_json(&p, &l, m, cfg)?))
}

fn embed_cmd(cfg: &RunConfig) -> Out {
    let (p, _) = load(cfg)?;
    let atoms = parse_atom_list(&cfg.from).stage("parse")?;
    let max_size = atoms.iter().map(|a| a.size()).max().unwrap_or(1);
    let l = match cfg.n {
        Some(n) => enumerate_base(&p, n.max(1), DEFAULT_GROUNDING_CAP),
        None => enumerate_base_through_size(&p, max_size, DEFAULT_GROUNDING_CAP),
    }
    .stage("levels")?;
    let top = atoms.iter().map(|a| l.level_of(a)).collect::<nsi_core::Result<Vec<_>>>().stage("embed")?;
    let k = cfg.m.unwrap_or_else(|| top.into_iter().max().unwrap_or(0).max(1));
    let i = Interpretation::from_atoms(atoms).stage("parse")?;
    let c = embed(&i, &l, k, base(cfg)?).stage("embed")?;
    let v = c.to_real();
    let exact = match c.exact_value() {
        Some(q) => q.to_string(),
        None => {
            let (lo, hi) = c.interval();
            format!("[{lo}, {hi}]")
        }
    };
    let text = format!(
        "digits: {c}\nexact: {exact}\ndecimal: {:?} in [{:?}, {:?}]\n",
        v.midpoint,
        v.lower(),
        v.upper()
    );
    emit(cfg, "embed.txt", text)
}

fn samples(p: &Program, cfg: &RunConfig, level: usize) -> Result<SampleSet, CliError> {
    let m = cfg.m.unwrap_or(level + SAMPLE_SLACK);
    let l = mapping(p, cfg, m)?;
    let d = depth(p, &l, m, cfg)?;
    let op = EmbeddedOperator::new(p, &l, m, d, base(cfg)?).stage("sample")?;
    sample_with(&op, level).stage("sample")
}

fn sample(cfg: &RunConfig) -> Out {
    let (p, _) = load(cfg)?;
    let s = samples(&p, cfg, cfg.level.unwrap_or(DEFAULT_SAMPLE_LEVEL))?;
    emit(cfg, "samples.csv", samples_csv(&s)?)
}

fn build_ifs(s: &SampleSet, cfg: &RunConfig) -> Result<IfsJson, CliError> {
    let fif = build_fif_ifs(s, cfg.scaling, cfg.augment).stage("ifs")?;
    if !fif.verify_endpoint_conditions() {
        return Err(CliError::Format { stage: "ifs", message: "endpoint conditions fail".into() });
    }
    Ok(IfsJson::from(&fif.to_ifs().stage("ifs")?))
}

fn ifs(cfg: &RunConfig) -> Out {
    let (p, _) = load(cfg)?;
    let s = samples(&p, cfg, cfg.level.unwrap_or(DEFAULT_SAMPLE_LEVEL))?;
    emit(cfg, "ifs.json", json(&build_ifs(&s, cfg)?))
}

fn load_ifs(cfg: &RunConfig) -> Result<nsi_core::Ifs, CliError> {
    let text = read(input(cfg)?, "ifs")?;
    let doc: IfsJson = serde_json::from_str(&text)
        .map_err(|e| CliError::Format { stage: "ifs", message: e.to_string() })?;
    doc.to_ifs().stage("ifs")
}

fn attractor(cfg: &RunConfig) -> Out {
    let ifs = load_ifs(cfg)?;
    let mode = match cfg.mode {
        Mode::Chaos => AttractorMode::Chaos,
        Mode::Deterministic => AttractorMode::Deterministic,
    };
    let cloud = attractor_points(&ifs, mode, cfg.iters, cfg.seed);
    emit(cfg, "attractor.csv", points_csv(&cloud)?)
}

#[derive(Serialize)]
struct EvalJson {
    x: f64,
    y: f64,
    bound: f64,
}

fn eval_fif_cmd(cfg: &RunConfig) -> Out {
    let ifs = load_ifs(cfg)?;
    let x = cfg.x.ok_or_else(|| CliError::Usage("eval-fif needs --x".into()))?;
    let (y, bound) = eval_fif(&ifs, x, cfg.eval_depth).stage("eval-fif")?;
    emit(cfg, "eval.json", json(&EvalJson { x, y, bound }))
}

fn convergence_rows(p: &Program, cfg: &RunConfig) -> Result<Vec<(ConvergenceRow, f64)>, CliError> {
    let m = cfg.m.unwrap_or(cfg.reference + SAMPLE_SLACK);
    let conv = ConvergenceConfig {
        levels: cfg.levels.clone(),
        reference_level: cfg.reference,
        d: cfg.scaling,
        m,
        slack: cfg.slack,
        depth: 0,
        base: base(cfg)?,
    };
    conv.validate().stage("converge")?;
    let l = mapping(p, cfg, conv.needed_levels())?;
    let d = depth(p, &l, conv.needed_levels(), cfg)?;
    let reference = Reference::new(&EmbeddedOperator::new(p, &l, m, d, conv.base).stage("converge")?, cfg.reference)
        .stage("converge")?;
    conv.levels
        .iter()
        .map(|&level| {
            let t = Instant::now();
            let op = EmbeddedOperator::new(p, &l, level + conv.slack, d, conv.base).stage("converge")?;
            let row = interpolation_error(&sample_with(&op, level).stage("converge")?, &reference, conv.d)
                .stage("converge")?;
            let ms = if cfg.canonical { 0.0 } else { t.elapsed().as_secs_f64() * 1e3 };
            Ok((row, ms))
        })
        .collect()
}

fn converge(cfg: &RunConfig) -> Out {
    let (p, _) = load(cfg)?;
    emit(cfg, "convergence.csv", convergence_csv(&convergence_rows(&p, cfg)?)?)
}

fn train_on(s: &SampleSet, cfg: &RunConfig) -> Result<(NetworkJson, TrainingJson), CliError> {
    let tc = TrainConfig { hidden: cfg.hidden, epochs: cfg.epochs, learning_rate: cfg.lr, seed: cfg.seed };
    let (net, report) = train_ffn(&s.midpoints(), &tc).stage("train")?;
    Ok((NetworkJson::from(&net), TrainingJson::from(&report)))
}

fn train(cfg: &RunConfig) -> Out {
    let (p, _) = load(cfg)?;
    let s = samples(&p, cfg, cfg.level.unwrap_or(cfg.train_level))?;
    let (net, report) = train_on(&s, cfg)?;
    match &cfg.out {
        Some(dir) => {
            let a = write(dir, "network.json", &json(&net))?;
            let b = write(dir, "training.json", &json(&report))?;
            Ok(format!("{}\n{}\n", a.display(), b.display()))
        }
        None => Ok(json(&net)),
    }
}

fn core(cfg: &RunConfig) -> Out {
    let (p, _) = load(cfg)?;
    let net = build_core_network(&p).stage("core")?;
    let i0 = net.encode(&initial(cfg)?);
    let t = run_core_network(&net, &i0, cfg.steps.unwrap_or(DEFAULT_M));
    emit(cfg, "core.json", json(&core_json(&net, &t.states, t.fixpoint, t.cycle)))
}

#[derive(Serialize)]
struct LevelsSummary {
    file: &'static str,
    count: usize,
    complete: bool,
    sha256: String,
}

#[derive(Serialize)]
struct AcyclicitySummary {
    acyclic: bool,
    depth: usize,
    witness: Option<String>,
    warning: Option<String>,
}

#[derive(Serialize)]
struct ConvergenceSummary {
    file: &'static str,
    reference_level: usize,
    scaling: f64,
    rows: Vec<ConvergenceJsonRow>,
    strictly_decreasing: bool,
}

#[derive(Serialize)]
struct ConvergenceJsonRow {
    level: usize,
    epsilon: f64,
    reference_radius: f64,
    runtime_ms: f64,
}

#[derive(Serialize)]
struct TrainingSummary {
    network_file: &'static str,
    report_file: &'static str,
    level: usize,
    sup_error: f64,
    mse: f64,
}

#[derive(Serialize)]
struct Report {
    program: String,
    program_sha256: String,
    m: usize,
    depth: usize,
    levels: LevelsSummary,
    acyclicity: AcyclicitySummary,
    lipschitz: LipschitzJson,
    convergence: ConvergenceSummary,
    training: TrainingSummary,
    constant_function: bool,
    artifacts: Vec<&'static str>,
    timings_ms: BTreeMap<&'static str, f64>,
}

fn sha256(text: &str) -> String {
    hex::encode(Sha256::digest(text.as_bytes()))
}

fn report(cfg: &RunConfig) -> Out {
    let dir = cfg.out.clone().unwrap_or_else(|| PathBuf::from("report"));
    let mut timings = BTreeMap::new();
    let mut clock = Instant::now();
    let mut lap = |name: &'static str, timings: &mut BTreeMap<&'static str, f64>| {
        let ms = if cfg.canonical { 0.0 } else { clock.elapsed().as_secs_f64() * 1e3 };
        timings.insert(name, ms);
        clock = Instant::now();
    };

    let (p, text) = load(cfg)?;
    lap("parse", &mut timings);

    let m = cfg.m.unwrap_or(cfg.reference + SAMPLE_SLACK);
    let train_m = cfg.train_level + SAMPLE_SLACK;
    let lip_m = REPORT_LIPSCHITZ_M.min(m);
    let needed = m.max(train_m).max(cfg.levels.iter().max().copied().unwrap_or(0) + cfg.slack);
    let l = mapping(&p, cfg, needed)?;
    let levels_text = levels_csv(&l)?;
    write(&dir, "levels.csv", &levels_text)?;
    let d = depth(&p, &l, needed, cfg)?;
    lap("levels", &mut timings);

    let g = ground_program(&p, d, DEFAULT_GROUNDING_CAP).stage("ground")?;
    let max_size = g
        .clauses()
        .flat_map(|c| core::iter::once(&c.head).chain(c.body.iter().map(|lit| &lit.atom)))
        .map(|a| a.size())
        .max()
        .unwrap_or(1);
    let wide = enumerate_base_through_size(&p, max_size, DEFAULT_GROUNDING_CAP).stage("acyclicity")?;
    let verdict = check_acyclic(&g, &wide).stage("acyclicity")?;
    let acyclicity = AcyclicitySummary {
        acyclic: verdict.acyclic,
        depth: d,
        warning: (!verdict.acyclic).then(|| {
            "program is not acyclic under the canonical level mapping; the Lipschitz and \
             attractor guarantees are not established"
                .to_string()
        }),
        witness: verdict.witness.map(|c| c.to_string()),
    };
    lap("acyclicity", &mut timings);

    let lip = lipschitz_json(&p, &l, lip_m, &RunConfig { depth: Some(d), ..cfg.clone() })?;
    lap("lipschitz", &mut timings);

    let conv_cfg = RunConfig { m: Some(m), depth: Some(d), n: Some(l.len().max(1)), ..cfg.clone() };
    let rows = convergence_rows(&p, &conv_cfg)?;
    write(&dir, "convergence.csv", &convergence_csv(&rows)?)?;
    let strictly_decreasing = rows.windows(2).all(|w| w[1].0.epsilon < w[0].0.epsilon);
    lap("converge", &mut timings);

    let op = EmbeddedOperator::new(&p, &l, train_m, d, base(cfg)?).stage("train")?;
    let s = sample_with(&op, cfg.train_level).stage("train")?;
    let constant_function = s.pairs.windows(2).all(|w| w[0].1.interval() == w[1].1.interval())
        && s.pairs.first().is_none_or(|f| f.1.interval() == s.upper.1.interval());
    let (net, training) = train_on(&s, cfg)?;
    write(&dir, "network.json", &json(&net))?;
    write(&dir, "training.json", &json(&training))?;
    lap("train", &mut timings);

    let ifs_op = EmbeddedOperator::new(&p, &l, m, d, base(cfg)?).stage("ifs")?;
    let ifs_samples = sample_with(&ifs_op, cfg.level.unwrap_or(DEFAULT_SAMPLE_LEVEL)).stage("ifs")?;
    write(&dir, "samples.csv", &samples_csv(&ifs_samples)?)?;
    write(&dir, "ifs.json", &json(&build_ifs(&ifs_samples, cfg)?))?;
    let trace = iterate_tp(&p, &l, &Interpretation::empty(), m, m, d).stage("tp")?;
    write(&dir, "trace.json", &json(&trace_json(&trace, &l)))?;
    write(&dir, "config.txt", &cfg.to_file_string())?;
    lap("artifacts", &mut timings);

    let report = Report {
        program: input(cfg)?.display().to_string(),
        program_sha256: sha256(&text),
        m,
        depth: d,
        levels: LevelsSummary {
            file: "levels.csv",
            count: l.len(),
            complete: l.is_complete(),
            sha256: sha256(&levels_text),
        },
        acyclicity,
        lipschitz: lip,
        convergence: ConvergenceSummary {
            file: "convergence.csv",
            reference_level: cfg.reference,
            scaling: cfg.scaling,
            rows: rows
                .iter()
                .map(|(r, ms)| ConvergenceJsonRow {
                    level: r.level,
                    epsilon: r.epsilon,
                    reference_radius: r.reference_radius,
                    runtime_ms: *ms,
                })
                .collect(),
            strictly_decreasing,
        },
        training: TrainingSummary {
            network_file: "network.json",
            report_file: "training.json",
            level: cfg.train_level,
            sup_error: training.sup_error,
            mse: training.mse,
        },
        constant_function,
        artifacts: vec![
            "levels.csv",
            "convergence.csv",
            "network.json",
            "training.json",
            "samples.csv",
            "ifs.json",
            "trace.json",
            "config.txt",
        ],
        timings_ms: timings,
    };
    let path = write(&dir, "report.json", &json(&report))?;
    Ok(format!("{}\n", path.display()))
}
