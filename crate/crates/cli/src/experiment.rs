//! Encrypted convolution and correlation runs with plaintext reference checks.
//!
//! One engine serves every scenario. Per image pair it encrypts a signal
//! and a kernel (or keeps the kernel public) and evaluates one of:
//!
//! * RLWE: one ciphertext per row; output row `r` sums the products of
//!   signal row `a` and kernel row `k` over `a + k = r`.
//! * 2-RLWE: one ciphertext per signal, one product per pair.
//! * 3-RLWE: all pairs packed along a third variable, one product in total.

use std::time::{Duration, Instant};

use anyhow::{bail, ensure, Context, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use mrlwe::codec::{decode_signal, encode_signal, sobel_x, sobel_y, Layout};
use mrlwe::pack::{make_layout, pack_blocks, post_process, pre_process, BlockTensor};
use mrlwe::params::{select_parameters, ParameterChoice, Variate};
use mrlwe::ring::{MultiPoly, RingParams};
use mrlwe::she::{decrypt, encrypt, keygen, noise_norm, Ciphertext, NoiseParams, OpCounter, PublicKey, SchemeParams, SecretKey};
use mrlwe::tensor::{linear_convolution, linear_correlation, reversed, Tensor};

use crate::config::{plan_degrees, ExperimentConfig, Scenario};
use crate::ingest::{ingest, Format};

/// Crypto randomness on stream 0, input data on stream 1, so inputs do
/// not depend on which scheme runs.
pub fn seeded_rngs(seed: Option<u64>) -> (ChaCha20Rng, ChaCha20Rng) {
    let base = match seed {
        Some(s) => ChaCha20Rng::seed_from_u64(s),
        None => ChaCha20Rng::from_entropy(),
    };
    let mut data = base.clone();
    data.set_stream(1);
    (base, data)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Op {
    Convolution,
    Correlation,
}

/// Signals and kernels for one run; `signals[i]` pairs with `kernels[i]`.
#[derive(Debug, Clone)]
pub struct Job {
    pub op: Op,
    pub signals: Vec<Tensor<i64>>,
    pub kernels: Vec<Tensor<i64>>,
    pub public_kernel: bool,
}

impl Job {
    fn check(&self) -> Result<([usize; 2], [usize; 2])> {
        ensure!(!self.signals.is_empty(), "no signals to process");
        ensure!(self.signals.len() == self.kernels.len(), "signal and kernel counts differ");
        let sd = self.signals[0].dims();
        let kd = self.kernels[0].dims();
        ensure!(sd.len() == 2 && kd.len() == 2, "signals and kernels must be 2-D");
        ensure!(
            self.signals.iter().all(|s| s.dims() == sd) && self.kernels.iter().all(|k| k.dims() == kd),
            "all signals (and all kernels) must share one shape"
        );
        Ok(([sd[0], sd[1]], [kd[0], kd[1]]))
    }

    pub fn references(&self) -> Result<Vec<Tensor<i64>>> {
        self.signals
            .iter()
            .zip(&self.kernels)
            .map(|(s, k)| match self.op {
                Op::Convolution => linear_convolution(s, k),
                Op::Correlation => linear_correlation(s, k),
            })
            .map(|r| r.map_err(Into::into))
            .collect()
    }
}

/// Scheme settings shared by all runs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Settings {
    pub t: u64,
    pub sigma: f64,
    pub depth: u32,
    pub adds: u64,
    pub epsilon: f64,
}

impl From<&ExperimentConfig> for Settings {
    fn from(c: &ExperimentConfig) -> Self {
        Self {
            t: c.t,
            sigma: c.sigma,
            depth: c.depth,
            adds: c.adds,
            epsilon: c.epsilon,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub scenario: String,
    pub scheme: String,
    pub degrees: String,
    pub n: usize,
    pub q: u64,
    pub log2_q: u32,
    pub delta: f64,
    pub bit_security: f64,
    pub pairs: usize,
    pub ciphertexts: u64,
    pub products: u64,
    pub plain_products: u64,
    pub additions: u64,
    pub max_noise_bits: f64,
    pub noise_budget_bits: f64,
    pub mismatches: usize,
    pub keygen_ms: f64,
    pub encrypt_ms: f64,
    pub eval_ms: f64,
    pub decrypt_ms: f64,
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub record: RunRecord,
    pub outputs: Vec<Tensor<i64>>,
    pub references: Vec<Tensor<i64>>,
}

impl RunOutcome {
    pub fn exact(&self) -> bool {
        self.record.mismatches == 0
    }

    /// Where decryption first disagreed with the plaintext reference.
    pub fn diagnostics(&self) -> String {
        for (k, (o, r)) in self.outputs.iter().zip(&self.references).enumerate() {
            if let Some((i, (a, b))) = o.data().iter().zip(r.data()).enumerate().find(|(_, (a, b))| a != b) {
                return format!(
                    "output {k} differs at flat index {i}: decrypted {a}, reference {b}; \
                     {} mismatching samples, noise {:.1} bits of a {:.1}-bit budget",
                    self.record.mismatches, self.record.max_noise_bits, self.record.noise_budget_bits
                );
            }
        }
        "outputs match the plaintext reference".into()
    }
}

pub fn format_degrees(d: &[usize]) -> String {
    d.iter().map(|x| x.to_string()).collect::<Vec<_>>().join("x")
}

fn ms(d: Duration) -> f64 {
    d.as_secs_f64() * 1e3
}

struct Session {
    choice: ParameterChoice,
    ring: RingParams,
    sk: SecretKey,
    pk: PublicKey,
    counter: OpCounter,
    rng: ChaCha20Rng,
    ciphertexts: u64,
    max_noise: u64,
    keygen: Duration,
    enc: Duration,
    eval: Duration,
    dec: Duration,
}

impl Session {
    fn new(s: &Settings, degrees: &[usize], adds: u64, mut rng: ChaCha20Rng) -> Result<Self> {
        let choice = select_parameters(s.t, s.sigma, degrees, s.depth, adds, s.epsilon)?;
        let ring = RingParams::new(degrees.to_vec(), choice.q, s.t)?;
        let scheme = SchemeParams::new(ring.clone(), NoiseParams::with_sigma(s.sigma)?, s.depth);
        let start = Instant::now();
        let (sk, pk) = keygen(&scheme, &mut rng);
        Ok(Self {
            choice,
            ring,
            sk,
            pk,
            counter: OpCounter::new(),
            rng,
            ciphertexts: 0,
            max_noise: 0,
            keygen: start.elapsed(),
            enc: Duration::ZERO,
            eval: Duration::ZERO,
            dec: Duration::ZERO,
        })
    }

    fn encrypt(&mut self, m: &MultiPoly) -> Result<Ciphertext> {
        let start = Instant::now();
        let ct = encrypt(&self.pk, m, &mut self.rng)?;
        self.enc += start.elapsed();
        self.ciphertexts += 1;
        Ok(ct)
    }

    fn decrypt(&mut self, ct: &Ciphertext) -> Result<MultiPoly> {
        let start = Instant::now();
        let m = decrypt(&self.sk, ct)?;
        self.dec += start.elapsed();
        self.max_noise = self.max_noise.max(noise_norm(&self.sk, ct)?);
        Ok(m)
    }

    fn timed<T>(&mut self, f: impl FnOnce(&OpCounter) -> Result<T>) -> Result<T> {
        let start = Instant::now();
        let out = f(&self.counter);
        self.eval += start.elapsed();
        out
    }

    /// Product with an encrypted or public kernel.
    fn product(&mut self, x: &Ciphertext, k: &MultiPoly, public: bool) -> Result<Ciphertext> {
        if public {
            self.timed(|c| Ok(c.mul_plain(x, k)?))
        } else {
            let ck = self.encrypt(k)?;
            self.timed(|c| Ok(c.mul(x, &ck)?))
        }
    }

    fn record(&self, scenario: &str, variate: Variate, pairs: usize, mismatches: usize) -> RunRecord {
        RunRecord {
            scenario: scenario.into(),
            scheme: variate.label().into(),
            degrees: format_degrees(self.ring.degrees()),
            n: self.ring.n(),
            q: self.choice.q,
            log2_q: self.choice.log2_q,
            delta: self.choice.security.delta,
            bit_security: self.choice.security.bit_sec,
            pairs,
            ciphertexts: self.ciphertexts,
            products: self.counter.products(),
            plain_products: self.counter.plain_products(),
            additions: self.counter.additions(),
            max_noise_bits: (self.max_noise.max(1) as f64).log2(),
            noise_budget_bits: (self.choice.q as f64 / 2.0).log2(),
            mismatches,
            keygen_ms: ms(self.keygen),
            encrypt_ms: ms(self.enc),
            eval_ms: ms(self.eval),
            decrypt_ms: ms(self.dec),
        }
    }
}

fn row(x: &Tensor<i64>, r: usize) -> Tensor<i64> {
    let w = x.dims()[1];
    Tensor::new(vec![w], x.data()[r * w..(r + 1) * w].to_vec()).unwrap()
}

fn kernel_for_convolution(op: Op, k: &Tensor<i64>) -> Tensor<i64> {
    match op {
        Op::Convolution => k.clone(),
        Op::Correlation => reversed(k),
    }
}

fn run_uni(s: &mut Session, job: &Job, out: [usize; 2]) -> Result<Vec<Tensor<i64>>> {
    let ring = s.ring.clone();
    let mut outputs = Vec::new();
    for (x, k) in job.signals.iter().zip(&job.kernels) {
        let k = kernel_for_convolution(job.op, k);
        let x_rows = (0..x.dims()[0])
            .map(|r| s.encrypt(&encode_signal(&row(x, r), &ring, Layout::Convolution)?))
            .collect::<Result<Vec<_>>>()?;
        let k_rows = (0..k.dims()[0])
            .map(|r| Ok(encode_signal(&row(&k, r), &ring, Layout::Convolution)?))
            .collect::<Result<Vec<_>>>()?;
        let k_cts = if job.public_kernel {
            None
        } else {
            Some(k_rows.iter().map(|p| s.encrypt(p)).collect::<Result<Vec<_>>>()?)
        };
        let mut acc: Vec<Option<Ciphertext>> = vec![None; out[0]];
        for (a, cx) in x_rows.iter().enumerate() {
            for (b, pk) in k_rows.iter().enumerate() {
                let prod = match &k_cts {
                    None => s.timed(|c| Ok(c.mul_plain(cx, pk)?))?,
                    Some(cts) => s.timed(|c| Ok(c.mul(cx, &cts[b])?))?,
                };
                acc[a + b] = Some(match acc[a + b].take() {
                    None => prod,
                    Some(prev) => s.timed(|c| Ok(c.add(&prev, &prod)?))?,
                });
            }
        }
        let mut data = Vec::with_capacity(out[0] * out[1]);
        for ct in &acc {
            let m = s.decrypt(ct.as_ref().expect("every output row receives a product"))?;
            data.extend(decode_signal(&m, &[out[1]], true)?.into_data());
        }
        outputs.push(Tensor::new(out.to_vec(), data)?);
    }
    Ok(outputs)
}

fn run_bi(s: &mut Session, job: &Job, out: [usize; 2]) -> Result<Vec<Tensor<i64>>> {
    let ring = s.ring.clone();
    let layout = match job.op {
        Op::Convolution => Layout::Convolution,
        Op::Correlation => Layout::Correlation,
    };
    let mut outputs = Vec::new();
    for (x, k) in job.signals.iter().zip(&job.kernels) {
        let cx = s.encrypt(&encode_signal(x, &ring, Layout::Convolution)?)?;
        let pk = encode_signal(k, &ring, layout)?;
        let y = s.product(&cx, &pk, job.public_kernel)?;
        outputs.push(decode_signal(&s.decrypt(&y)?, &out, true)?);
    }
    Ok(outputs)
}

fn stack_padded(items: &[Tensor<i64>], slots: usize, t: u64) -> Result<BlockTensor> {
    let mut all = items.to_vec();
    all.resize(slots, Tensor::zeros(items[0].dims()));
    Ok(BlockTensor::stack(&all, t)?)
}

fn run_tri(s: &mut Session, job: &Job, out: [usize; 2]) -> Result<Vec<Tensor<i64>>> {
    let degrees = s.ring.degrees().to_vec();
    let (slots, t) = (degrees[2], s.ring.t());
    ensure!(job.signals.len() <= slots, "{} pairs exceed {slots} slots", job.signals.len());
    let layout = make_layout(t, slots, 2)?;
    let kernels: Vec<Tensor<i64>> = job.kernels.iter().map(|k| kernel_for_convolution(job.op, k)).collect();
    let px = pre_process(&stack_padded(&job.signals, slots, t)?, &layout, &degrees)?;
    let pk = pre_process(&stack_padded(&kernels, slots, t)?, &layout, &degrees)?;
    let cx = s.encrypt(&px)?;
    let y = s.product(&cx, &pk, job.public_kernel)?;
    let blocks = post_process(&s.decrypt(&y)?, &layout, &out)?;
    Ok((0..job.signals.len()).map(|k| blocks.block(k)).collect())
}

/// Runs `job` under `variate` and compares with the plaintext reference.
pub fn run_job(
    scenario: &str,
    variate: Variate,
    job: &Job,
    settings: &Settings,
    slack: mrlwe::params::Slack,
    rng: ChaCha20Rng,
) -> Result<RunOutcome> {
    let (sd, kd) = job.check()?;
    let out = [sd[0] + kd[0] - 1, sd[1] + kd[1] - 1];
    let degrees = plan_degrees(variate, out, job.signals.len(), slack);
    let adds = match variate {
        Variate::Uni => settings.adds.max(sd[0].min(kd[0]) as u64),
        _ => settings.adds,
    };
    let mut session = Session::new(settings, &degrees, adds, rng)?;
    let outputs = match variate {
        Variate::Uni => run_uni(&mut session, job, out)?,
        Variate::Bi => run_bi(&mut session, job, out)?,
        Variate::Tri => run_tri(&mut session, job, out)?,
    };
    let references = job.references()?;
    let mismatches = outputs
        .iter()
        .zip(&references)
        .map(|(o, r)| o.data().iter().zip(r.data()).filter(|(a, b)| a != b).count())
        .sum();
    Ok(RunOutcome {
        record: session.record(scenario, variate, job.signals.len(), mismatches),
        outputs,
        references,
    })
}

pub fn random_tensor(dims: &[usize], lo: i64, hi: i64, rng: &mut ChaCha20Rng) -> Tensor<i64> {
    Tensor::from_fn(dims, |_| rng.gen_range(lo..=hi))
}

fn load_or_random(cfg: &ExperimentConfig, rng: &mut ChaCha20Rng) -> Result<Tensor<i64>> {
    match &cfg.input {
        Some(path) => {
            let format = Format::from_path(path).unwrap_or(Format::Pgm);
            let img = ingest(path, format, cfg.t)?;
            ensure!(img.dims().len() == 2, "{} is not a 2-D image", path.display());
            if let Some(v) = img.data().iter().find(|&&v| v > cfg.pixel_max) {
                bail!("{}: sample {v} exceeds pixel_max = {}", path.display(), cfg.pixel_max);
            }
            Ok(img)
        }
        None => Ok(random_tensor(&[cfg.n, cfg.n], 0, cfg.pixel_max, rng)),
    }
}

/// Inputs for the configured scenario, drawn from `rng` or read from disk.
pub fn build_job(cfg: &ExperimentConfig, rng: &mut ChaCha20Rng) -> Result<Job> {
    let km = cfg.kernel_max;
    let kernel = |rng: &mut ChaCha20Rng| random_tensor(&[cfg.f, cfg.f], -km, km, rng);
    Ok(match cfg.scenario {
        Scenario::Filter => {
            let signals = if cfg.input.is_some() {
                vec![load_or_random(cfg, rng)?]
            } else {
                (0..cfg.images).map(|_| random_tensor(&[cfg.n, cfg.n], 0, cfg.pixel_max, rng)).collect()
            };
            let kernels = (0..signals.len()).map(|_| kernel(rng)).collect();
            Job {
                op: Op::Convolution,
                signals,
                kernels,
                public_kernel: cfg.public_kernel,
            }
        }
        Scenario::Correlate => {
            let mut pair = || random_tensor(&[cfg.n, cfg.n], 0, cfg.pixel_max, rng);
            let (signals, kernels) = (0..cfg.images).map(|_| (pair(), pair())).unzip();
            Job {
                op: Op::Correlation,
                signals,
                kernels,
                public_kernel: cfg.public_kernel,
            }
        }
        Scenario::Sobel => {
            let img = load_or_random(cfg, rng)?;
            Job {
                op: Op::Convolution,
                signals: vec![img.clone(), img],
                kernels: vec![sobel_x(), sobel_y()],
                public_kernel: true,
            }
        }
        Scenario::Blocks => {
            let img = load_or_random(cfg, rng)?;
            let packed = pack_blocks(&img, cfg.block, cfg.block, cfg.t, false)?;
            let signals: Vec<_> = (0..packed.slots()).map(|k| packed.block(k).map(|&v| v.rem_euclid(cfg.t as i64))).collect();
            let kernels = (0..signals.len()).map(|_| kernel(rng)).collect();
            Job {
                op: Op::Convolution,
                signals,
                kernels,
                public_kernel: cfg.public_kernel,
            }
        }
        Scenario::Volume => bail!("volume configurations are parameter reports only"),
    })
}

/// Validates `cfg`, builds its inputs and runs the configured scheme.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<RunOutcome> {
    cfg.validate_run()?;
    let (crypto, mut data) = seeded_rngs(cfg.seed);
    let job = build_job(cfg, &mut data).context("building inputs")?;
    run_job(cfg.scenario.name(), cfg.variate, &job, &Settings::from(cfg), cfg.slack, crypto)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(extra: &str) -> ExperimentConfig {
        ExperimentConfig::parse(&format!("n = 12\nf = 3\nimages = 2\nt = 65537\nseed = 11\n{extra}")).unwrap()
    }

    fn without_timings(mut r: RunRecord) -> RunRecord {
        r.keygen_ms = 0.0;
        r.encrypt_ms = 0.0;
        r.eval_ms = 0.0;
        r.decrypt_ms = 0.0;
        r
    }

    #[test]
    fn runs_are_exact_and_deterministic() {
        for v in ["1", "2", "3"] {
            let c = cfg(&format!("variate = {v}"));
            let a = run_experiment(&c).unwrap();
            let b = run_experiment(&c).unwrap();
            assert!(a.exact(), "{}", a.diagnostics());
            assert_eq!(a.outputs, b.outputs);
            assert_eq!(without_timings(a.record), without_timings(b.record));
        }
    }

    #[test]
    fn inputs_do_not_depend_on_the_scheme() {
        let (_, mut d1) = seeded_rngs(Some(5));
        let (_, mut d2) = seeded_rngs(Some(5));
        let a = build_job(&cfg("variate = 1"), &mut d1).unwrap();
        let b = build_job(&cfg("variate = 3"), &mut d2).unwrap();
        assert_eq!(a.signals, b.signals);
        assert_eq!(a.kernels, b.kernels);
    }

    #[test]
    fn public_kernels_use_plain_products() {
        let out = run_experiment(&cfg("variate = 2\npublic_kernel = true")).unwrap();
        assert!(out.exact());
        assert_eq!((out.record.products, out.record.plain_products), (0, 2));
        assert_eq!(out.record.ciphertexts, 2);
    }

    #[test]
    fn sobel_matches_reference() {
        let out = run_experiment(&cfg("scenario = sobel\nvariate = 2\nn = 10")).unwrap();
        assert!(out.exact(), "{}", out.diagnostics());
        assert_eq!(out.outputs.len(), 2);
        assert_eq!(out.outputs[0].dims(), &[12, 12]);
    }
}
