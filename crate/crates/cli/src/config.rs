//! Experiment configuration: a flat `key = value` text file.
//!
//! ```text
//! # comments and blank lines are ignored
//! scenario = filter        # filter | correlate | sobel | blocks | volume
//! variate = 2              # 1 (RLWE rows), 2 (bivariate), 3 (packed trivariate)
//! n = 64                   # image side N
//! f = 11                   # filter side F
//! images = 1               # I, number of image pairs / blocks
//! block = 16               # block side for the blocks scenario
//! nx = 60
//! ny = 60
//! nz = 12                  # volume dims (params reports only)
//! t = 12289
//! sigma = 1.0
//! depth = 1                # D
//! adds = 1                 # A
//! epsilon = 2.3283064365386963e-10
//! seed = 7
//! h1 = 8                   # slack per scheme
//! h2 = 1
//! h3 = 1
//! pixel_max = 255
//! kernel_max = 2
//! public_kernel = false
//! input = img.pgm
//! output = out.csv
//! report = report
//! ```

use std::fmt;
use std::path::{Path, PathBuf};

use mrlwe::pack::make_layout;
use mrlwe::params::{select_parameters, Slack, Variate, DEFAULT_EPSILON};

/// Largest ring degree run at desk scale.
pub const MAX_RING_DEGREE: usize = 1 << 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scenario {
    Filter,
    Correlate,
    Sobel,
    Blocks,
    Volume,
}

impl Scenario {
    pub fn name(self) -> &'static str {
        match self {
            Scenario::Filter => "filter",
            Scenario::Correlate => "correlate",
            Scenario::Sobel => "sobel",
            Scenario::Blocks => "blocks",
            Scenario::Volume => "volume",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "filter" => Scenario::Filter,
            "correlate" => Scenario::Correlate,
            "sobel" => Scenario::Sobel,
            "blocks" => Scenario::Blocks,
            "volume" => Scenario::Volume,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub scenario: Scenario,
    pub variate: Variate,
    pub n: usize,
    pub f: usize,
    pub images: usize,
    pub block: usize,
    pub nx: usize,
    pub ny: usize,
    pub nz: usize,
    pub t: u64,
    pub sigma: f64,
    pub depth: u32,
    pub adds: u64,
    pub epsilon: f64,
    pub seed: Option<u64>,
    pub slack: Slack,
    pub pixel_max: i64,
    pub kernel_max: i64,
    pub public_kernel: bool,
    pub input: Option<PathBuf>,
    pub output: Option<PathBuf>,
    pub report: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            scenario: Scenario::Filter,
            variate: Variate::Bi,
            n: 64,
            f: 11,
            images: 1,
            block: 16,
            nx: 60,
            ny: 60,
            nz: 12,
            t: 12289,
            sigma: 1.0,
            depth: 1,
            adds: 1,
            epsilon: DEFAULT_EPSILON,
            seed: None,
            slack: Slack { uni: 8, bi: 1, tri: 1 },
            pixel_max: 255,
            kernel_max: 2,
            public_kernel: false,
            input: None,
            output: None,
            report: None,
        }
    }
}

/// Every problem found in a configuration.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigErrors(pub Vec<String>);

impl fmt::Display for ConfigErrors {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{} configuration problem(s):", self.0.len())?;
        for e in &self.0 {
            writeln!(f, "  - {e}")?;
        }
        Ok(())
    }
}

impl std::error::Error for ConfigErrors {}

fn num<T: std::str::FromStr>(key: &str, v: &str, errs: &mut Vec<String>) -> Option<T> {
    match v.parse() {
        Ok(x) => Some(x),
        Err(_) => {
            errs.push(format!("{key}: cannot parse {v:?}"));
            None
        }
    }
}

impl ExperimentConfig {
    pub const KEYS: [&'static str; 24] = [
        "scenario", "variate", "n", "f", "images", "block", "nx", "ny", "nz", "t", "sigma", "depth", "adds",
        "epsilon", "seed", "h1", "h2", "h3", "pixel_max", "kernel_max", "public_kernel", "input", "output",
        "report",
    ];

    /// Sets one key; problems are appended to `errs`.
    pub fn set(&mut self, key: &str, value: &str, errs: &mut Vec<String>) {
        let v = value.trim();
        macro_rules! field {
            ($f:expr) => {
                if let Some(x) = num(key, v, errs) {
                    $f = x;
                }
            };
        }
        match key {
            "scenario" => match Scenario::parse(v) {
                Some(s) => self.scenario = s,
                None => errs.push(format!("scenario: unknown value {v:?}")),
            },
            "variate" => match v {
                "1" => self.variate = Variate::Uni,
                "2" => self.variate = Variate::Bi,
                "3" => self.variate = Variate::Tri,
                _ => errs.push(format!("variate: expected 1, 2 or 3, got {v:?}")),
            },
            "n" => field!(self.n),
            "f" => field!(self.f),
            "images" => field!(self.images),
            "block" => field!(self.block),
            "nx" => field!(self.nx),
            "ny" => field!(self.ny),
            "nz" => field!(self.nz),
            "t" => field!(self.t),
            "sigma" => field!(self.sigma),
            "depth" => field!(self.depth),
            "adds" => field!(self.adds),
            "epsilon" => field!(self.epsilon),
            "seed" => {
                if let Some(s) = num(key, v, errs) {
                    self.seed = Some(s);
                }
            }
            "h1" => field!(self.slack.uni),
            "h2" => field!(self.slack.bi),
            "h3" => field!(self.slack.tri),
            "pixel_max" => field!(self.pixel_max),
            "kernel_max" => field!(self.kernel_max),
            "public_kernel" => field!(self.public_kernel),
            "input" => self.input = Some(PathBuf::from(v)),
            "output" => self.output = Some(PathBuf::from(v)),
            "report" => self.report = Some(PathBuf::from(v)),
            _ => errs.push(format!("unknown key {key:?}")),
        }
    }

    /// Applies `key = value` lines on top of `self`.
    pub fn apply_text(&mut self, text: &str, errs: &mut Vec<String>) {
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap().trim();
            if line.is_empty() {
                continue;
            }
            match line.split_once('=') {
                Some((k, v)) => self.set(k.trim(), v, errs),
                None => errs.push(format!("line {}: expected key = value", lineno + 1)),
            }
        }
    }

    pub fn parse(text: &str) -> Result<Self, ConfigErrors> {
        let mut cfg = Self::default();
        let mut errs = Vec::new();
        cfg.apply_text(text, &mut errs);
        errs.extend(cfg.basic_violations());
        if errs.is_empty() {
            Ok(cfg)
        } else {
            Err(ConfigErrors(errs))
        }
    }

    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| anyhow::anyhow!("reading {}: {e}", path.display()))?;
        Ok(Self::parse(&text)?)
    }

    /// Flat text form accepted by [`ExperimentConfig::parse`].
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let mut kv = |k: &str, v: String| s.push_str(&format!("{k} = {v}\n"));
        kv("scenario", self.scenario.name().into());
        kv("variate", self.variate.vars().to_string());
        kv("n", self.n.to_string());
        kv("f", self.f.to_string());
        kv("images", self.images.to_string());
        kv("block", self.block.to_string());
        kv("nx", self.nx.to_string());
        kv("ny", self.ny.to_string());
        kv("nz", self.nz.to_string());
        kv("t", self.t.to_string());
        kv("sigma", format!("{:?}", self.sigma));
        kv("depth", self.depth.to_string());
        kv("adds", self.adds.to_string());
        kv("epsilon", format!("{:?}", self.epsilon));
        if let Some(seed) = self.seed {
            kv("seed", seed.to_string());
        }
        kv("h1", self.slack.uni.to_string());
        kv("h2", self.slack.bi.to_string());
        kv("h3", self.slack.tri.to_string());
        kv("pixel_max", self.pixel_max.to_string());
        kv("kernel_max", self.kernel_max.to_string());
        kv("public_kernel", self.public_kernel.to_string());
        for (k, p) in [("input", &self.input), ("output", &self.output), ("report", &self.report)] {
            if let Some(p) = p {
                kv(k, p.display().to_string());
            }
        }
        s
    }

    /// Number of image pairs (or blocks) processed.
    pub fn pair_count(&self) -> usize {
        match self.scenario {
            Scenario::Blocks if self.block > 0 => (self.n / self.block).pow(2),
            Scenario::Sobel => 2,
            Scenario::Volume => 1,
            _ => self.images,
        }
    }

    /// Side of the (square) kernel.
    pub fn kernel_side(&self) -> usize {
        match self.scenario {
            Scenario::Correlate => self.n,
            Scenario::Sobel => 3,
            _ => self.f,
        }
    }

    /// Side of each convolved signal.
    pub fn signal_side(&self) -> usize {
        match self.scenario {
            Scenario::Blocks => self.block,
            _ => self.n,
        }
    }

    /// Slots on the packing variable for the trivariate scheme.
    pub fn slots(&self) -> usize {
        self.pair_count().max(1).next_power_of_two() * self.slack.tri as usize
    }

    /// Ring degrees used by `variate`.
    pub fn degrees(&self, variate: Variate) -> Vec<usize> {
        let p2 = |x: usize| x.max(1).next_power_of_two();
        let h = self.slack.get(variate) as usize;
        if self.scenario == Scenario::Volume {
            let k = self.f.saturating_sub(1);
            let (x, y, z) = (p2(self.nx + k), p2(self.ny + k), p2(self.nz + k));
            return match variate {
                Variate::Uni => vec![x * h],
                Variate::Bi => vec![x * h, y],
                Variate::Tri => vec![x, y, z * h],
            };
        }
        let span = self.signal_side() + self.kernel_side() - 1;
        plan_degrees(variate, [span, span], self.pair_count(), self.slack)
    }

    /// Additions folded into one decrypted coefficient: the row
    /// decomposition sums `min(N, K)` products per output row.
    pub fn effective_adds(&self, variate: Variate) -> u64 {
        match (variate, self.scenario) {
            (_, Scenario::Volume) => self.adds,
            (Variate::Uni, _) => self.adds.max(self.signal_side().min(self.kernel_side()) as u64),
            _ => self.adds,
        }
    }

    /// Largest plaintext output magnitude for the configured value ranges.
    pub fn output_magnitude(&self) -> u128 {
        let k = self.kernel_side() as u128;
        let px = self.pixel_max.max(0) as u128;
        match self.scenario {
            Scenario::Correlate => px * px * k * k,
            Scenario::Sobel => px * 8,
            _ => px * self.kernel_max.max(0) as u128 * k * k,
        }
    }

    /// Range and shape problems that make the configuration meaningless.
    pub fn basic_violations(&self) -> Vec<String> {
        let mut errs = Vec::new();
        let mut need = |ok: bool, msg: String| {
            if !ok {
                errs.push(msg);
            }
        };
        need(self.t >= 2, format!("t = {} must be at least 2", self.t));
        need(self.sigma.is_finite() && self.sigma > 0.0, format!("sigma = {} must be positive", self.sigma));
        need(
            self.epsilon > 0.0 && self.epsilon < 1.0,
            format!("epsilon = {} must lie in (0, 1)", self.epsilon),
        );
        need(self.depth >= 1, "depth must be at least 1 (one ciphertext product)".into());
        need(self.adds >= 1, "adds must be at least 1".into());
        need(self.n >= 1, "n must be positive".into());
        need(self.f >= 1, "f must be positive".into());
        need(self.images >= 1, "images must be positive".into());
        need(
            self.slack.uni >= 1 && self.slack.bi >= 1 && self.slack.tri >= 1,
            "slack factors h1, h2, h3 must be positive".into(),
        );
        need(self.pixel_max >= 0 && self.kernel_max >= 0, "value ranges must be non-negative".into());
        match self.scenario {
            Scenario::Filter => need(self.f < self.n, format!("filtering needs F < N, got F = {}, N = {}", self.f, self.n)),
            Scenario::Blocks => need(
                self.block >= 1 && self.n % self.block.max(1) == 0 && self.f <= self.block,
                format!("blocks need block | n and F <= block (n = {}, block = {}, F = {})", self.n, self.block, self.f),
            ),
            Scenario::Volume => need(
                self.nx >= 1 && self.ny >= 1 && self.nz >= 1,
                "volume dims must be positive".into(),
            ),
            _ => {}
        }
        errs
    }

    fn selection_violations(&self, variate: Variate, errs: &mut Vec<String>) {
        let degrees = self.degrees(variate);
        let n: usize = degrees.iter().product();
        if n > MAX_RING_DEGREE {
            errs.push(format!(
                "{}: ring degree {n} exceeds the desk-scale limit {MAX_RING_DEGREE}",
                variate.label()
            ));
            return;
        }
        match select_parameters(self.t, self.sigma, &degrees, self.depth, self.effective_adds(variate), self.epsilon) {
            Ok(choice) if choice.q <= self.t => errs.push(format!("q = {} does not exceed t", choice.q)),
            Ok(choice) if mrlwe::arith::gcd(choice.q, self.t) != 1 => {
                errs.push(format!("t = {} shares a factor with q = {}", self.t, choice.q))
            }
            Ok(_) => {}
            Err(e) => errs.push(format!("{} parameter selection for {degrees:?}: {e}", variate.label())),
        }
    }

    fn finish(errs: Vec<String>) -> Result<(), ConfigErrors> {
        if errs.is_empty() {
            Ok(())
        } else {
            Err(ConfigErrors(errs))
        }
    }

    /// Checks for a parameter report over all three schemes.
    pub fn validate_params(&self) -> Result<(), ConfigErrors> {
        let mut errs = self.basic_violations();
        if errs.is_empty() {
            for v in Variate::ALL {
                self.selection_violations(v, &mut errs);
            }
        }
        Self::finish(errs)
    }

    /// Checks for running the configured experiment, before any key exists.
    pub fn validate_run(&self) -> Result<(), ConfigErrors> {
        let mut errs = self.basic_violations();
        if self.scenario == Scenario::Volume {
            errs.push("volume configurations are parameter reports only".into());
        }
        if !errs.is_empty() {
            return Self::finish(errs);
        }
        let half = (self.t as u128 - 1) / 2;
        if self.output_magnitude() > half {
            errs.push(format!(
                "outputs may reach {} in magnitude, above (t-1)/2 = {half}",
                self.output_magnitude()
            ));
        }
        if self.pixel_max as u128 >= self.t as u128 || self.kernel_max as u128 >= self.t as u128 {
            errs.push(format!("input values must stay below t = {}", self.t));
        }
        if self.variate == Variate::Tri {
            if let Err(e) = make_layout(self.t, self.slots(), 2) {
                errs.push(format!("slot layout for t = {}, N = {}: {e}", self.t, self.slots()));
            }
        }
        self.selection_violations(self.variate, &mut errs);
        Self::finish(errs)
    }
}

/// Ring degrees for convolving 2-D signals with output `span` per axis.
pub fn plan_degrees(variate: Variate, span: [usize; 2], pairs: usize, slack: Slack) -> Vec<usize> {
    let p = |x: usize| x.max(1).next_power_of_two();
    match variate {
        Variate::Uni => vec![p(span[1]) * slack.uni as usize],
        Variate::Bi => vec![p(span[0]) * slack.bi as usize, p(span[1])],
        Variate::Tri => vec![p(span[0]), p(span[1]), pairs.max(1).next_power_of_two() * slack.tri as usize],
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_roundtrips() {
        let cfg = ExperimentConfig::parse("scenario = correlate\nvariate = 3 # packed\nn = 8\nimages = 4\nseed = 5\n").unwrap();
        assert_eq!(cfg.scenario, Scenario::Correlate);
        assert_eq!(cfg.variate, Variate::Tri);
        assert_eq!(cfg.degrees(Variate::Tri), vec![16, 16, 4]);
        assert_eq!(cfg.degrees(Variate::Uni), vec![128]);
        assert_eq!(ExperimentConfig::parse(&cfg.to_text()).unwrap(), cfg);
    }

    #[test]
    fn reports_all_violations_together() {
        let err = ExperimentConfig::parse("t = 1\nsigma = -2\nbogus = 3\nn = x\n").unwrap_err();
        assert_eq!(err.0.len(), 4, "{err}");
        let cfg = ExperimentConfig::parse("scenario = filter\nn = 8\nf = 3\npixel_max = 100000\nkernel_max = 20000\n").unwrap();
        let err = cfg.validate_run().unwrap_err();
        assert_eq!(err.0.len(), 2, "{err}");
    }

    #[test]
    fn rejects_missing_slot_roots_and_huge_rings() {
        let cfg = ExperimentConfig::parse("variate = 3\nt = 257\nimages = 256\nn = 8\nf = 2\npixel_max = 1\nkernel_max = 1\n")
            .unwrap();
        let err = cfg.validate_run().unwrap_err();
        assert!(err.0.iter().any(|e| e.contains("slot layout")), "{err}");
        let cfg = ExperimentConfig::parse("n = 2048\nf = 3\nvariate = 2\nh2 = 4\n").unwrap();
        let err = cfg.validate_params().unwrap_err();
        assert!(err.0.iter().any(|e| e.contains("desk-scale")), "{err}");
    }

    #[test]
    fn table_configurations_plan_the_expected_rings() {
        let cfg = ExperimentConfig::parse("n = 246\nf = 11\nimages = 4\nh1 = 8\n").unwrap();
        assert_eq!(cfg.degrees(Variate::Uni), vec![2048]);
        assert_eq!(cfg.degrees(Variate::Bi), vec![256, 256]);
        assert_eq!(cfg.degrees(Variate::Tri), vec![256, 256, 4]);
        cfg.validate_params().unwrap();
        let vol = ExperimentConfig::parse("scenario = volume\nnx = 60\nny = 60\nnz = 12\nf = 5\nh1 = 32\n").unwrap();
        assert_eq!(vol.degrees(Variate::Uni), vec![2048]);
        assert_eq!(vol.degrees(Variate::Bi), vec![64, 64]);
        assert_eq!(vol.degrees(Variate::Tri), vec![64, 64, 16]);
    }
}
