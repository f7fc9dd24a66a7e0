use std::path::{Path, PathBuf};

use anyhow::{bail, ensure, Context, Result};
use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde::Serialize;

use mrlwe::codec::{decode_signal, encode_signal, Layout};
use mrlwe::params::{select_parameters, Variate, DEFAULT_EPSILON};
use mrlwe::relin::{gen_relin_key, gen_structure_key, remap_secret_key, switch_structure};
use mrlwe::ring::{remap, MultiPoly, RingMapping, RingParams};
use mrlwe::she::{decrypt, encrypt, keygen, NoiseParams, SchemeParams};
use mrlwe::tensor::Tensor;

use mrlwe_cli::config::{ExperimentConfig, Scenario};
use mrlwe_cli::experiment::{format_degrees, run_experiment, seeded_rngs, RunRecord};
use mrlwe_cli::ingest::{ingest, write_pgm, write_raw3d, Format};
use mrlwe_cli::report::{params_report, print_params, print_run, write_rows};
use mrlwe_cli::wire::{self, WireObject};

#[derive(Parser)]
#[command(name = "mrlwe", version, about = "Multivariate RLWE encryption for signal processing")]
struct Cli {
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Args)]
struct ConfigArgs {
    /// Configuration file of `key = value` lines.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Overrides one key, e.g. `--set n=32`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    sets: Vec<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Modulus, security and size for all three schemes.
    Params {
        #[command(flatten)]
        cfg: ConfigArgs,
        /// Report file; `.json` for JSON, CSV otherwise.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Generates a key pair and optional evaluation keys.
    Keygen {
        /// Ring shape such as `64x64` or `16x16x4`.
        #[arg(long)]
        degrees: String,
        #[arg(long, default_value_t = 12289)]
        t: u64,
        #[arg(long, default_value_t = 1.0)]
        sigma: f64,
        /// Supported multiplicative depth.
        #[arg(long, default_value_t = 1)]
        depth: u32,
        #[arg(long, default_value_t = 1)]
        adds: u64,
        /// Explicit ciphertext modulus instead of the selected prime.
        #[arg(long)]
        q: Option<u64>,
        /// Also write a relinearization key with this digit base.
        #[arg(long)]
        relin_base: Option<u64>,
        /// Also write a structure key: `row-major:8x8` or `random:SEED:8x8`.
        #[arg(long)]
        structure: Option<String>,
        /// Digit base of the structure key.
        #[arg(long, default_value_t = 16)]
        structure_base: u64,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Encrypts a signal file or a coefficient list.
    Encrypt {
        #[arg(long)]
        pk: PathBuf,
        /// PGM image or raw3d volume.
        #[arg(long, conflicts_with = "values")]
        input: Option<PathBuf>,
        /// Comma-separated row-major coefficients.
        #[arg(long, allow_hyphen_values = true)]
        values: Option<String>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Decrypts a ciphertext and writes or prints the leading block.
    Decrypt {
        #[arg(long)]
        sk: PathBuf,
        #[arg(long)]
        ct: PathBuf,
        /// Output block such as `74x74`; defaults to the whole ring.
        #[arg(long)]
        dims: Option<String>,
        /// Keep residues in [0, t) instead of centering.
        #[arg(long)]
        unsigned: bool,
        /// `.pgm` or `.raw3d` image, anything else gets text.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Encrypted 2-D filtering (also the sobel and blocks scenarios).
    Filter(ConfigArgs),
    /// Encrypted 2-D cross-correlation of image pairs.
    Correlate(ConfigArgs),
    /// Moves a ciphertext to another ring shape with a structure key.
    Switch {
        #[arg(long)]
        ct: PathBuf,
        #[arg(long)]
        key: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Source secret key; checks the switched plaintext.
        #[arg(long)]
        verify_sk: Option<PathBuf>,
    },
    /// Runs the configured experiment under every scheme.
    Bench {
        #[command(flatten)]
        cfg: ConfigArgs,
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 1)]
        reps: u32,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn load_config(args: &ConfigArgs, scenario: Option<Scenario>) -> Result<ExperimentConfig> {
    let mut cfg = ExperimentConfig::default();
    if let Some(s) = scenario {
        cfg.scenario = s;
    }
    let mut errs = Vec::new();
    if let Some(path) = &args.config {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        cfg.apply_text(&text, &mut errs);
    }
    for kv in &args.sets {
        match kv.split_once('=') {
            Some((k, v)) => cfg.set(k.trim(), v, &mut errs),
            None => errs.push(format!("--set {kv:?}: expected KEY=VALUE")),
        }
    }
    if errs.is_empty() {
        Ok(cfg)
    } else {
        Err(mrlwe_cli::config::ConfigErrors(errs).into())
    }
}

fn parse_shape(s: &str) -> Result<Vec<usize>> {
    let dims = s
        .split('x')
        .map(|d| d.trim().parse::<usize>().with_context(|| format!("bad shape {s:?}")))
        .collect::<Result<Vec<_>>>()?;
    ensure!(dims.iter().all(|&d| d > 0), "shape {s:?} has a zero dimension");
    Ok(dims)
}

fn parse_mapping(spec: &str, source: &[usize]) -> Result<RingMapping> {
    let parts: Vec<&str> = spec.split(':').collect();
    Ok(match parts.as_slice() {
        ["row-major", shape] => RingMapping::row_major(source.to_vec(), parse_shape(shape)?)?,
        ["random", seed, shape] => {
            let seed: u64 = seed.parse().context("bad mapping seed")?;
            let mut rng = ChaCha20Rng::seed_from_u64(seed);
            RingMapping::random(source.to_vec(), parse_shape(shape)?, &mut rng)?
        }
        _ => bail!("mapping {spec:?}: expected row-major:SHAPE or random:SEED:SHAPE"),
    })
}

fn crypto_rng(seed: Option<u64>) -> ChaCha20Rng {
    seeded_rngs(seed).0
}

fn write_obj(dir: &Path, name: &str, obj: WireObject) -> Result<()> {
    let path = dir.join(name);
    wire::write_file(&path, &obj)?;
    println!("wrote {}", path.display());
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_keygen(
    degrees: &str,
    t: u64,
    sigma: f64,
    depth: u32,
    adds: u64,
    q: Option<u64>,
    relin_base: Option<u64>,
    structure: Option<&str>,
    structure_base: u64,
    seed: Option<u64>,
    out_dir: &Path,
) -> Result<()> {
    let degrees = parse_shape(degrees)?;
    let q = match q {
        Some(q) => q,
        None => select_parameters(t, sigma, &degrees, depth, adds, DEFAULT_EPSILON)?.q,
    };
    let ring = RingParams::new(degrees.clone(), q, t)?;
    let scheme = SchemeParams::new(ring, NoiseParams::with_sigma(sigma)?, depth);
    let mut rng = crypto_rng(seed);
    let (sk, pk) = keygen(&scheme, &mut rng);
    std::fs::create_dir_all(out_dir).with_context(|| format!("creating {}", out_dir.display()))?;
    println!("ring {} with q = {q}, t = {t}", format_degrees(&degrees));
    if let Some(base) = relin_base {
        write_obj(out_dir, "relin.mrlw", WireObject::RelinKey(gen_relin_key(&sk, base, &mut rng)?))?;
    }
    if let Some(spec) = structure {
        let mapping = parse_mapping(spec, &degrees)?;
        let target_sk = remap_secret_key(&sk, &mapping)?;
        let stk = gen_structure_key(&sk, &target_sk, &mapping, structure_base, &mut rng)?;
        write_obj(out_dir, "structure.mrlw", WireObject::StructureKey(stk))?;
        write_obj(out_dir, "target.sk.mrlw", WireObject::SecretKey(target_sk))?;
    }
    write_obj(out_dir, "sk.mrlw", WireObject::SecretKey(sk))?;
    write_obj(out_dir, "pk.mrlw", WireObject::PublicKey(pk))
}

fn cmd_encrypt(pk: &Path, input: Option<&Path>, values: Option<&str>, seed: Option<u64>, out: &Path) -> Result<()> {
    let pk = wire::read_public_key(pk)?;
    let ring = pk.params().clone();
    let msg = match (input, values) {
        (Some(path), _) => {
            let format = Format::from_path(path).context("input must be .pgm or .raw3d")?;
            let signal = ingest(path, format, ring.t())?;
            encode_signal(&signal, &ring, Layout::Convolution)?
        }
        (None, Some(list)) => {
            let vals = list
                .split(',')
                .map(|v| v.trim().parse::<i64>().with_context(|| format!("bad value {v:?}")))
                .collect::<Result<Vec<_>>>()?;
            ensure!(vals.len() <= ring.n(), "{} values exceed ring size {}", vals.len(), ring.n());
            let mut all = vec![0i64; ring.n()];
            all[..vals.len()].copy_from_slice(&vals);
            MultiPoly::from_signed(ring.degrees(), ring.t(), &all)?
        }
        (None, None) => bail!("pass --input or --values"),
    };
    let ct = encrypt(&pk, &msg, &mut crypto_rng(seed))?;
    wire::write_file(out, &WireObject::Ciphertext(ct))
}

fn write_signal(out: Option<&Path>, x: &Tensor<i64>) -> Result<()> {
    let text = || {
        let w = *x.dims().last().unwrap();
        x.data()
            .chunks(w)
            .map(|r| r.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(" "))
            .collect::<Vec<_>>()
            .join("\n")
            + "\n"
    };
    match out {
        None => print!("{}", text()),
        Some(path) => {
            let bytes = match Format::from_path(path) {
                Some(Format::Pgm) => write_pgm(x)?,
                Some(Format::Raw3d) => write_raw3d(x)?,
                None => text().into_bytes(),
            };
            std::fs::write(path, bytes).with_context(|| format!("writing {}", path.display()))?;
        }
    }
    Ok(())
}

fn cmd_decrypt(sk: &Path, ct: &Path, dims: Option<&str>, unsigned: bool, out: Option<&Path>) -> Result<()> {
    let sk = wire::read_secret_key(sk)?;
    let ct = wire::read_ciphertext(ct)?;
    let m = decrypt(&sk, &ct)?;
    let dims = match dims {
        Some(d) => parse_shape(d)?,
        None => m.shape().to_vec(),
    };
    write_signal(out, &decode_signal(&m, &dims, !unsigned)?)
}

#[derive(Serialize)]
struct OutputTensor<'a> {
    dims: &'a [usize],
    data: &'a [i64],
}

fn cmd_run(args: &ConfigArgs, scenario: Scenario) -> Result<()> {
    let mut cfg = load_config(args, Some(scenario))?;
    if scenario == Scenario::Filter && cfg.scenario == Scenario::Correlate {
        bail!("use the correlate command for correlation");
    }
    if scenario == Scenario::Correlate {
        cfg.scenario = Scenario::Correlate;
    }
    let outcome = run_experiment(&cfg)?;
    print_run(&outcome.record);
    if let Some(path) = &cfg.output {
        let tensors: Vec<_> = outcome
            .outputs
            .iter()
            .map(|t| OutputTensor { dims: t.dims(), data: t.data() })
            .collect();
        std::fs::write(path, serde_json::to_string(&tensors)?).with_context(|| format!("writing {}", path.display()))?;
    }
    if let Some(path) = &cfg.report {
        write_rows(path, std::slice::from_ref(&outcome.record))?;
    }
    ensure!(outcome.exact(), "decryption disagrees with the plaintext reference: {}", outcome.diagnostics());
    Ok(())
}

fn cmd_switch(ct: &Path, key: &Path, out: &Path, verify_sk: Option<&Path>) -> Result<()> {
    let ct = wire::read_ciphertext(ct)?;
    let stk = wire::read_structure_key(key)?;
    let switched = switch_structure(&ct, &stk)?;
    if let Some(path) = verify_sk {
        let sk = wire::read_secret_key(path)?;
        let expected = remap(&decrypt(&sk, &ct)?, stk.mapping())?;
        let got = decrypt(&remap_secret_key(&sk, stk.mapping())?, &switched)?;
        ensure!(got == expected, "switched ciphertext does not decrypt to the remapped message");
        println!("verified: switched plaintext equals the remapped original");
    }
    println!(
        "switched {} -> {}",
        format_degrees(stk.source().degrees()),
        format_degrees(stk.target().degrees())
    );
    wire::write_file(out, &WireObject::Ciphertext(switched))
}

fn cmd_bench(args: &ConfigArgs, seed: u64, reps: u32, out: Option<&Path>) -> Result<()> {
    let mut cfg = load_config(args, None)?;
    cfg.seed = Some(seed);
    let mut records: Vec<RunRecord> = Vec::new();
    for v in Variate::ALL {
        cfg.variate = v;
        if let Err(e) = cfg.validate_run() {
            println!("skipping {}: {}", v.label(), e.to_string().trim_end());
            continue;
        }
        for _ in 0..reps.max(1) {
            let outcome = run_experiment(&cfg)?;
            print_run(&outcome.record);
            ensure!(outcome.exact(), "{}: {}", v.label(), outcome.diagnostics());
            records.push(outcome.record);
        }
    }
    if let Some(path) = out {
        write_rows(path, &records)?;
    }
    Ok(())
}

fn main() -> Result<()> {
    match Cli::parse().cmd {
        Command::Params { cfg, out } => {
            let cfg = load_config(&cfg, None)?;
            let rows = params_report(&cfg)?;
            print_params(&rows);
            if let Some(path) = out.as_deref().or(cfg.report.as_deref()) {
                write_rows(path, &rows)?;
            }
            Ok(())
        }
        Command::Keygen {
            degrees,
            t,
            sigma,
            depth,
            adds,
            q,
            relin_base,
            structure,
            structure_base,
            seed,
            out_dir,
        } => cmd_keygen(
            &degrees,
            t,
            sigma,
            depth,
            adds,
            q,
            relin_base,
            structure.as_deref(),
            structure_base,
            seed,
            &out_dir,
        ),
        Command::Encrypt { pk, input, values, seed, out } => {
            cmd_encrypt(&pk, input.as_deref(), values.as_deref(), seed, &out)
        }
        Command::Decrypt { sk, ct, dims, unsigned, out } => {
            cmd_decrypt(&sk, &ct, dims.as_deref(), unsigned, out.as_deref())
        }
        Command::Filter(args) => cmd_run(&args, Scenario::Filter),
        Command::Correlate(args) => cmd_run(&args, Scenario::Correlate),
        Command::Switch { ct, key, out, verify_sk } => cmd_switch(&ct, &key, &out, verify_sk.as_deref()),
        Command::Bench { cfg, seed, reps, out } => cmd_bench(&cfg, seed, reps, out.as_deref()),
    }
}
