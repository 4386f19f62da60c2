//! Pipeline settings: defaults, then an optional key-value file, then flags.

use std::path::Path;

use clap::Args;
use taxel_bow::pipeline::{KernelChoice, PipelineParams};
use taxel_bow::synth::parse_kv;
use taxel_bow::{Error, OnsetMode};

use crate::CliError;

/// Pipeline flags shared by train, evaluate and sweep. Unset flags fall back
/// to the `--config` file, then to the built-in defaults.
#[derive(Debug, Clone, Default, Args)]
pub struct PipelineArgs {
    /// Codebook size K [default: 10]
    #[arg(long = "k")]
    pub k: Option<usize>,
    /// Window length W, in derivative samples [default: 7]
    #[arg(long = "w")]
    pub w: Option<usize>,
    /// Segment length T, in frames [default: 15]
    #[arg(long = "t")]
    pub t: Option<usize>,
    /// SVM box constraint; the default approximates a hard margin [default: 1e6]
    #[arg(long = "c")]
    pub c: Option<f64>,
    /// SVM kernel: linear or gaussian [default: gaussian]
    #[arg(long)]
    pub kernel: Option<String>,
    /// Gaussian width; omitted = 1 / (K * median squared distance between training features)
    #[arg(long)]
    pub gamma: Option<f64>,
    /// SMO stopping tolerance on the maximal KKT violation [default: 0.001]
    #[arg(long)]
    pub tau: Option<f64>,
    /// Onset threshold as a fraction of the sensor range [default: 0.15]
    #[arg(long = "threshold")]
    pub threshold_fraction: Option<f64>,
    /// Onset rule: all-pads (every pad above threshold) or any-pad [default: all-pads]
    #[arg(long)]
    pub onset: Option<String>,
    /// Use raw window counts instead of normalized histograms
    #[arg(long)]
    pub raw_counts: bool,
    /// Cap on training windows fed to k-means; 0 disables the cap [default: 100000]
    #[arg(long)]
    pub max_codebook_windows: Option<usize>,
}

fn bad(key: &str, value: &str) -> CliError {
    CliError::Usage(format!("invalid value '{value}' for {key}"))
}

fn parse_kernel(name: &str, gamma: Option<f64>) -> Result<KernelChoice, CliError> {
    match name.to_ascii_lowercase().as_str() {
        "linear" => Ok(KernelChoice::Linear),
        "gaussian" | "rbf" => Ok(KernelChoice::Gaussian { gamma }),
        _ => Err(bad("kernel", name)),
    }
}

fn parse_onset(value: &str) -> Result<OnsetMode, CliError> {
    value.parse().map_err(|_| bad("onset", value))
}

/// Applies `key = value` pairs from a run-config file.
fn apply_file(params: &mut PipelineParams, text: &str) -> Result<(), CliError> {
    let pairs = parse_kv(text).map_err(|e: Error| CliError::Usage(e.to_string()))?;
    let mut gamma = None;
    let mut kernel = None;
    for (key, value) in pairs {
        let v = value.as_str();
        match key.as_str() {
            "k" | "K" => params.k = v.parse().map_err(|_| bad(&key, v))?,
            "w" | "W" => params.w = v.parse().map_err(|_| bad(&key, v))?,
            "t" | "T" => params.t = v.parse().map_err(|_| bad(&key, v))?,
            "c" | "C" => params.c = v.parse().map_err(|_| bad(&key, v))?,
            "tau" => params.tau = v.parse().map_err(|_| bad(&key, v))?,
            "kernel" => kernel = Some(value.clone()),
            "gamma" => gamma = Some(v.parse().map_err(|_| bad(&key, v))?),
            "threshold_fraction" => params.threshold_fraction = v.parse().map_err(|_| bad(&key, v))?,
            "onset" => params.onset = parse_onset(v)?,
            "normalize" => params.normalize = v.parse().map_err(|_| bad(&key, v))?,
            "seed" => params.seed = v.parse().map_err(|_| bad(&key, v))?,
            "max_codebook_windows" => {
                let cap: usize = v.parse().map_err(|_| bad(&key, v))?;
                params.max_codebook_windows = (cap > 0).then_some(cap);
            }
            other => return Err(CliError::Usage(format!("unknown run-config key '{other}'"))),
        }
    }
    if kernel.is_some() || gamma.is_some() {
        let name = kernel.unwrap_or_else(|| "gaussian".into());
        params.kernel = parse_kernel(&name, gamma)?;
    }
    Ok(())
}

pub fn resolve(config: Option<&Path>, seed: Option<u64>, args: &PipelineArgs) -> Result<PipelineParams, CliError> {
    let mut params = PipelineParams::default();
    if let Some(path) = config {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        apply_file(&mut params, &text)?;
    }
    if let Some(seed) = seed {
        params.seed = seed;
    }
    if let Some(k) = args.k {
        params.k = k;
    }
    if let Some(w) = args.w {
        params.w = w;
    }
    if let Some(t) = args.t {
        params.t = t;
    }
    if let Some(c) = args.c {
        params.c = c;
    }
    if let Some(tau) = args.tau {
        params.tau = tau;
    }
    if let Some(f) = args.threshold_fraction {
        params.threshold_fraction = f;
    }
    if let Some(onset) = &args.onset {
        params.onset = parse_onset(onset)?;
    }
    if args.raw_counts {
        params.normalize = false;
    }
    if let Some(cap) = args.max_codebook_windows {
        params.max_codebook_windows = (cap > 0).then_some(cap);
    }
    match (&args.kernel, args.gamma) {
        (Some(name), gamma) => params.kernel = parse_kernel(name, gamma)?,
        (None, Some(g)) => params.kernel = KernelChoice::Gaussian { gamma: Some(g) },
        (None, None) => {}
    }
    if let (KernelChoice::Linear, Some(_)) = (params.kernel, args.gamma) {
        return Err(CliError::Usage("--gamma only applies to the gaussian kernel".into()));
    }
    params.validate().map_err(|e| CliError::Usage(e.to_string()))?;
    Ok(params)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_override_file_values() {
        let mut params = PipelineParams::default();
        apply_file(&mut params, "k = 20\nkernel = linear\nnormalize = false\n").unwrap();
        assert_eq!(params.k, 20);
        assert_eq!(params.kernel, KernelChoice::Linear);
        assert!(!params.normalize);

        let dir = std::env::temp_dir().join(format!("taxel-bow-cli-{}", std::process::id()));
        std::fs::write(&dir, "k = 20\nw = 5\n").unwrap();
        let args = PipelineArgs {
            k: Some(3),
            ..PipelineArgs::default()
        };
        let resolved = resolve(Some(&dir), Some(4), &args).unwrap();
        std::fs::remove_file(&dir).unwrap();
        assert_eq!((resolved.k, resolved.w, resolved.seed), (3, 5, 4));
    }

    #[test]
    fn rejects_unknown_keys_and_bad_values() {
        let mut params = PipelineParams::default();
        assert!(apply_file(&mut params, "colour = red").is_err());
        assert!(apply_file(&mut params, "k = many").is_err());
        assert!(apply_file(&mut params, "onset = sometimes").is_err());
        let args = PipelineArgs {
            w: Some(15),
            ..PipelineArgs::default()
        };
        assert!(resolve(None, None, &args).is_err());
    }
}
