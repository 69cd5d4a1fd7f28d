//! Flat key-value experiment configuration: diff-able text in, typed struct
//! out, with a bit-exact serialization round trip.

use crate::CliError;

/// Experiment configuration shared by the corpus-driven commands.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    /// Domain backend: "mesh" or "chart".
    pub backend: String,
    /// Ambient dimension n (maps S^{n-1} -> R^n).
    pub n: usize,
    /// Mesh subdivision level or chart grid resolution.
    pub resolution: u32,
    /// Corpus families to generate.
    pub families: Vec<String>,
    /// Base RNG seed.
    pub seed: u64,
    /// Perturbation amplitudes for the corpus.
    pub amplitudes: Vec<f64>,
    /// Number of corpus maps per family.
    pub corpus_size: usize,
    pub volume_floor: f64,
    pub degree_tol: f64,
    pub grad_tol: f64,
    pub proj_tol: f64,
    /// Output directory for reports.
    pub out_dir: String,
}

impl Default for ExperimentConfig {
    fn default() -> ExperimentConfig {
        ExperimentConfig {
            backend: "mesh".into(),
            n: 3,
            resolution: 4,
            families: vec![
                "moebius-perturbations".into(),
                "harmonic-perturbations".into(),
                "power-maps".into(),
                "bubbles".into(),
            ],
            seed: 17,
            amplitudes: vec![0.01, 0.02, 0.05, 0.1],
            corpus_size: 20,
            volume_floor: 1e-6,
            degree_tol: 0.05,
            grad_tol: 1e-3,
            proj_tol: 1e-9,
            out_dir: "out".into(),
        }
    }
}

impl ExperimentConfig {
    /// Serialize as "key = value" lines in a fixed key order.
    pub fn to_text(&self) -> String {
        let join_f = |v: &[f64]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",");
        let mut s = String::new();
        s.push_str(&format!("backend = {}\n", self.backend));
        s.push_str(&format!("n = {}\n", self.n));
        s.push_str(&format!("resolution = {}\n", self.resolution));
        s.push_str(&format!("families = {}\n", self.families.join(",")));
        s.push_str(&format!("seed = {}\n", self.seed));
        s.push_str(&format!("amplitudes = {}\n", join_f(&self.amplitudes)));
        s.push_str(&format!("corpus_size = {}\n", self.corpus_size));
        s.push_str(&format!("volume_floor = {}\n", self.volume_floor));
        s.push_str(&format!("degree_tol = {}\n", self.degree_tol));
        s.push_str(&format!("grad_tol = {}\n", self.grad_tol));
        s.push_str(&format!("proj_tol = {}\n", self.proj_tol));
        s.push_str(&format!("out_dir = {}\n", self.out_dir));
        s
    }

    /// Parse "key = value" lines; '#' starts a comment; unknown keys error.
    pub fn from_text(text: &str) -> Result<ExperimentConfig, CliError> {
        let mut cfg = ExperimentConfig::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| CliError::Io(format!("config line {}: missing '='", lineno + 1)))?;
            let (key, value) = (key.trim(), value.trim());
            let bad = |what: &str| CliError::Io(format!("config key {key}: invalid {what}"));
            match key {
                "backend" => {
                    if value != "mesh" && value != "chart" {
                        return Err(CliError::Io(format!("config backend {value:?} unknown")));
                    }
                    cfg.backend = value.into();
                }
                "n" => cfg.n = value.parse().map_err(|_| bad("integer"))?,
                "resolution" => cfg.resolution = value.parse().map_err(|_| bad("integer"))?,
                "families" => {
                    cfg.families = value.split(',').map(|s| s.trim().to_string()).collect()
                }
                "seed" => cfg.seed = value.parse().map_err(|_| bad("integer"))?,
                "amplitudes" => {
                    cfg.amplitudes = value
                        .split(',')
                        .map(|s| s.trim().parse().map_err(|_| bad("float list")))
                        .collect::<Result<_, _>>()?
                }
                "corpus_size" => cfg.corpus_size = value.parse().map_err(|_| bad("integer"))?,
                "volume_floor" => cfg.volume_floor = value.parse().map_err(|_| bad("float"))?,
                "degree_tol" => cfg.degree_tol = value.parse().map_err(|_| bad("float"))?,
                "grad_tol" => cfg.grad_tol = value.parse().map_err(|_| bad("float"))?,
                "proj_tol" => cfg.proj_tol = value.parse().map_err(|_| bad("float"))?,
                "out_dir" => cfg.out_dir = value.into(),
                other => return Err(CliError::Io(format!("config key {other:?} unknown"))),
            }
        }
        for t in [cfg.volume_floor, cfg.degree_tol, cfg.grad_tol, cfg.proj_tol] {
            if !(t > 0.0) {
                return Err(CliError::Io("config tolerances must be positive".into()));
            }
        }
        Ok(cfg)
    }

    pub fn load(path: &std::path::Path) -> Result<ExperimentConfig, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        ExperimentConfig::from_text(&text)
    }
}

/// FNV-1a hash of the serialized config, logged for reproducibility.
pub fn config_hash(text: &str) -> u64 {
    let mut h: u64 = 0xcbf29ce484222325;
    for b in text.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    h
}
