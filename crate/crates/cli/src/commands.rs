use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use ppc::affinity::{build_labels, load_dataset, synth_2d, synth_blobs, write_csv, write_raw_f32, BlobSpec, DataFormat};
use ppc::eval::{auc, joint_histogram, precision_recall, write_curve_csv, Summary};
use ppc::mincut::eigen::EigenConfig;
use ppc::mincut::init::{init_fiedler, init_random, init_random_projection, init_signed_laplacian};
use ppc::mincut::{bit_update, read_matrix, vector_update, BitVector, MatrixFormat};
use ppc::oos::{train_with_hashing, HashModel};
use ppc::rng::derive_seed;
use ppc::{AffinityConfig, AffinityMode, Dataset, InitMethod, PackedCodes, Scalar, SignedWeightMatrix, UpdateScheme};

use crate::config::{Precision, RunConfig};
use crate::{
    AffinityArg, AffinityFlags, CliError, CutArgs, EncodeArgs, EvalArgs, InitArg, MatrixFormatArg, QueryArgs,
    SynthArgs, SynthKind, TrainArgs, TrainFlags, UpdateArg,
};

type CliResult<T = ()> = Result<T, CliError>;

fn load<T: Scalar>(path: &Path) -> CliResult<Dataset<T>> {
    if !path.exists() {
        return Err(CliError::io(path, std::io::ErrorKind::NotFound.into()));
    }
    Ok(load_dataset(path, DataFormat::from_path(path))?)
}

fn create(path: &Path) -> CliResult<BufWriter<fs::File>> {
    fs::File::create(path).map(BufWriter::new).map_err(|e| CliError::io(path, e))
}

fn read_codes(path: &Path) -> CliResult<PackedCodes> {
    let file = fs::File::open(path).map_err(|e| CliError::io(path, e))?;
    Ok(PackedCodes::read_from(std::io::BufReader::new(file))?)
}

fn write_codes(codes: &PackedCodes, path: &Path) -> CliResult {
    let mut out = create(path)?;
    codes.write_to(&mut out)?;
    out.flush().map_err(|e| CliError::io(path, e))
}

impl From<UpdateArg> for UpdateScheme {
    fn from(u: UpdateArg) -> Self {
        match u {
            UpdateArg::Bit => UpdateScheme::Bit,
            UpdateArg::Vector => UpdateScheme::Vector,
        }
    }
}

impl From<InitArg> for InitMethod {
    fn from(i: InitArg) -> Self {
        match i {
            InitArg::Random => InitMethod::Random,
            InitArg::Fiedler => InitMethod::Fiedler,
            InitArg::SignedLaplacian => InitMethod::SignedLaplacian,
            InitArg::RandomProjection => InitMethod::RandomProjection,
        }
    }
}

fn apply_affinity(cfg: &mut AffinityConfig, flags: &AffinityFlags) -> CliResult {
    let wants_radius = flags.radius.is_some() || flags.avg_neighbors.is_some();
    match flags.affinity {
        Some(AffinityArg::Class) if wants_radius => {
            return Err(CliError::Usage(
                "--radius/--avg-neighbors only apply with --affinity radius".into(),
            ))
        }
        Some(AffinityArg::Class) => cfg.mode = AffinityMode::ByClass,
        Some(AffinityArg::Radius) => cfg.mode = AffinityMode::ByRadius,
        None if wants_radius => cfg.mode = AffinityMode::ByRadius,
        None => {}
    }
    if flags.radius.is_some() && flags.avg_neighbors.is_some() {
        return Err(CliError::Usage("--radius and --avg-neighbors are mutually exclusive".into()));
    }
    if let Some(r) = flags.radius {
        cfg.radius = Some(r);
        cfg.target_avg_neighbors = None;
    }
    if let Some(t) = flags.avg_neighbors {
        cfg.radius = None;
        cfg.target_avg_neighbors = Some(t);
    }
    Ok(())
}

fn apply_train(cfg: &mut RunConfig, flags: &TrainFlags) {
    let t = &mut cfg.train;
    if let Some(s) = flags.seed {
        t.seed = s;
    }
    if let Some(p) = flags.bits {
        t.max_bits = p;
    }
    if let Some(u) = flags.update {
        t.solver = u.into();
    }
    if let Some(i) = flags.init {
        t.init = i.into();
    }
    if let Some(r) = flags.restarts {
        t.restarts = r;
    }
}

pub fn synth(args: SynthArgs) -> CliResult {
    let data: Dataset = match args.kind {
        SynthKind::Blobs => {
            let spec = BlobSpec {
                n: args.n,
                blobs: args.blobs,
                dim: args.dim,
                center_box: args.center_box,
                spread: args.spread,
            };
            synth_blobs(&spec, args.seed)?
        }
        SynthKind::Plane => synth_2d(args.n, args.seed, args.half_width)?,
    };
    match DataFormat::from_path(&args.out) {
        DataFormat::RawF32 => write_raw_f32(&data, &args.out)?,
        DataFormat::Csv => {
            let mut out = create(&args.out)?;
            write_csv(&data, &mut out)?;
            out.flush().map_err(|e| CliError::io(&args.out, e))?;
        }
    }
    Ok(())
}

struct TrainPaths {
    model: PathBuf,
    codes: PathBuf,
    log: PathBuf,
}

fn train_paths(args: &TrainArgs, cfg: &RunConfig) -> CliResult<TrainPaths> {
    let model = args
        .out
        .clone()
        .or_else(|| cfg.output.model.as_ref().map(PathBuf::from))
        .ok_or_else(|| CliError::Usage("no model path: pass --out or set output.model".into()))?;
    let sibling = |ext: &str| model.with_extension(ext);
    let codes = args
        .codes
        .clone()
        .or_else(|| cfg.output.codes.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| sibling("codes"));
    let log = args
        .log
        .clone()
        .or_else(|| cfg.output.log.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| sibling("log.jsonl"));
    Ok(TrainPaths { model, codes, log })
}

pub fn train(args: TrainArgs) -> CliResult {
    let mut cfg = RunConfig::load(args.config.as_deref())?;
    apply_affinity(&mut cfg.affinity, &args.affinity)?;
    apply_train(&mut cfg, &args.train);
    if let Some(p) = args.precision {
        cfg.precision = p;
    }
    cfg.validate()?;
    let paths = train_paths(&args, &cfg)?;
    match cfg.precision {
        Precision::F64 => train_as::<f64>(&args.data, &cfg, &paths),
        Precision::F32 => train_as::<f32>(&args.data, &cfg, &paths),
    }
}

fn train_as<T: Scalar>(data_path: &Path, cfg: &RunConfig, paths: &TrainPaths) -> CliResult {
    let data: Dataset<T> = load(data_path)?;
    let labels = build_labels(&data, &cfg.affinity)?;
    let out = train_with_hashing(&data, &labels, &cfg.train, &cfg.kernel)?;

    fs::write(&paths.model, out.model.to_json()).map_err(|e| CliError::io(&paths.model, e))?;
    let codes = PackedCodes::pack(&out.codes).with_ids(data.ids().to_vec())?;
    write_codes(&codes, &paths.codes)?;
    let mut log = create(&paths.log)?;
    for line in &out.log {
        let json = serde_json::to_string(line).map_err(ppc::Error::from)?;
        writeln!(log, "{json}").map_err(|e| CliError::io(&paths.log, e))?;
    }
    log.flush().map_err(|e| CliError::io(&paths.log, e))?;

    let last = out.log.last();
    println!(
        "bits {} alpha {} empirical_loss {} pairs {}",
        out.model.p(),
        out.model.alpha(),
        last.map_or(0, |l| l.empirical_loss),
        labels.pair_count()
    );
    Ok(())
}

pub fn encode(args: EncodeArgs) -> CliResult {
    let codes = match args.precision {
        Precision::F64 => encode_as::<f64>(&args)?,
        Precision::F32 => encode_as::<f32>(&args)?,
    };
    write_codes(&codes, &args.out)
}

fn encode_as<T: Scalar>(args: &EncodeArgs) -> CliResult<PackedCodes> {
    if !args.model.exists() {
        return Err(CliError::io(&args.model, std::io::ErrorKind::NotFound.into()));
    }
    let model = HashModel::<T>::load(&args.model)?;
    let data: Dataset<T> = load(&args.data)?;
    let codes = model.encode(data.features())?;
    Ok(PackedCodes::pack(&codes).with_ids(data.ids().to_vec())?)
}

fn id_of(codes: &PackedCodes, i: usize) -> String {
    codes.ids().map_or_else(|| i.to_string(), |ids| ids[i].clone())
}

/// Prints one line per query: its id, a tab, then the matching ids
/// separated by commas (nearest first).
pub fn query(args: QueryArgs) -> CliResult {
    let db = read_codes(&args.codes)?;
    let queries = read_codes(&args.queries)?;
    if queries.p() != db.p() {
        return Err(CliError::Core(ppc::Error::DimensionMismatch {
            what: "query code length",
            expected: db.p(),
            found: queries.p(),
        }));
    }
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    for q in 0..queries.n() {
        let code = queries.code(q);
        let hits = match (args.alpha, args.k) {
            (Some(alpha), _) => db.query_radius(code, alpha)?,
            (None, Some(k)) => db.query_knn(code, k)?,
            (None, None) => unreachable!("clap requires --alpha or --k"),
        };
        let ids: Vec<String> = hits.iter().map(|&i| id_of(&db, i)).collect();
        match writeln!(out, "{}\t{}", id_of(&queries, q), ids.join(",")) {
            Ok(()) => {}
            // Downstream closed early (e.g. piped into `head`): not an error.
            Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => return Ok(()),
            Err(e) => return Err(CliError::io(Path::new("<stdout>"), e)),
        }
    }
    Ok(())
}

pub fn eval(args: EvalArgs) -> CliResult {
    let mut cfg = RunConfig::load(args.config.as_deref())?;
    apply_affinity(&mut cfg.affinity, &args.affinity)?;
    cfg.validate()?;
    if args.bins == 0 {
        return Err(CliError::Usage("--bins must be at least 1".into()));
    }
    let data: Dataset = load(&args.data)?;
    let labels = build_labels(&data, &cfg.affinity)?;
    let codes = read_codes(&args.codes)?;
    if codes.n() != data.n() {
        return Err(CliError::Core(ppc::Error::DimensionMismatch {
            what: "codes for dataset points",
            expected: data.n(),
            found: codes.n(),
        }));
    }
    fs::create_dir_all(&args.out_dir).map_err(|e| CliError::io(&args.out_dir, e))?;

    let curve = precision_recall(&codes, &labels)?;
    let path = args.out_dir.join("pr.csv");
    write_curve_csv(&curve, create(&path)?)?;

    let hist = joint_histogram(&codes, &data, cfg.affinity.metric, args.bins)?;
    let path = args.out_dir.join("histogram.csv");
    hist.write_csv(create(&path)?)?;

    let summary = Summary {
        n: data.n(),
        p: codes.p(),
        near_pairs: labels.near_count(),
        far_pairs: labels.far_count(),
        auc: auc(&curve)?,
    };
    let path = args.out_dir.join("summary.csv");
    summary.write_csv(create(&path)?)?;
    println!("auc {:?}", summary.auc);
    Ok(())
}

fn cut_guess(w: &SignedWeightMatrix, init: InitArg, seed: u64) -> CliResult<BitVector> {
    let eigen = EigenConfig::default();
    Ok(match init {
        InitArg::Random => init_random(w.n(), seed),
        InitArg::Fiedler => init_fiedler(w, &eigen)?.bits,
        InitArg::SignedLaplacian => init_signed_laplacian(w, &eigen)?.bits,
        InitArg::RandomProjection => init_random_projection(w, seed, &eigen)?.bits,
    })
}

/// Best of `restarts` solver runs; prints the objective, the iteration count
/// of the winning run and the assignment.
pub fn cut(args: CutArgs) -> CliResult {
    if args.restarts == 0 {
        return Err(CliError::Usage("--restarts must be at least 1".into()));
    }
    let text = fs::read_to_string(&args.matrix).map_err(|e| CliError::io(&args.matrix, e))?;
    let format = match args.format {
        MatrixFormatArg::Dense => MatrixFormat::Dense,
        MatrixFormatArg::Triples => MatrixFormat::Triples,
    };
    let w: SignedWeightMatrix = read_matrix(&text, format)?;
    // Spectral guesses without a random component give the same start every time.
    let runs = match args.init {
        InitArg::Fiedler | InitArg::SignedLaplacian => 1,
        InitArg::Random | InitArg::RandomProjection => args.restarts,
    };
    let mut best: Option<(BitVector, ppc::SolverReport<f64>)> = None;
    for r in 0..runs {
        let guess = cut_guess(&w, args.init, derive_seed(args.seed, "cut", &[r as u64]))?;
        let (bits, report) = match args.update {
            UpdateArg::Bit => bit_update(&w, &guess)?,
            UpdateArg::Vector => vector_update(&w, &guess)?,
        };
        if best.as_ref().map_or(true, |(_, b)| report.objective > b.objective) {
            best = Some((bits, report));
        }
    }
    let (bits, report) = best.expect("at least one run");
    let assignment: Vec<String> = bits.as_slice().iter().map(|b| b.to_string()).collect();
    println!("objective {:?}", report.objective);
    println!("iterations {}", report.iterations);
    println!("bits {}", assignment.join(","));
    Ok(())
}
