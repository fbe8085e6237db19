use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};

use parafree_core::functionals::{ConstantsMode, WeissParams};
use parafree_core::geometry::{GridSpec, TimeSampling};

/// Parsed run configuration: flat key-value sections, unknown keys rejected,
/// errors anchored to the offending line.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub seed: u64,
    pub out: PathBuf,
    pub jobs: usize,
    pub mode: ConstantsMode,
    pub grid: GridSpec,
    pub sampling: TimeSampling,
    pub instance: InstanceConfig,
    pub params: WeissParams,
    pub radii: RadiiConfig,
    pub experiments: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct InstanceConfig {
    pub kind: String,
    pub alpha: f64,
    pub amplitude: f64,
    pub p: f64,
    pub magnitude: f64,
    pub table: Option<PathBuf>,
}

#[derive(Debug, Clone)]
pub struct RadiiConfig {
    pub start: f64,
    pub explicit: Option<Vec<f64>>,
}

pub const KNOWN_EXPERIMENTS: [&str; 7] = [
    "weiss",
    "almgren",
    "growth",
    "epiperimetric",
    "rotation",
    "replacement",
    "blowup",
];

const KNOWN_INSTANCES: [&str; 6] = [
    "exact32",
    "varcoef",
    "drift",
    "heat-positive",
    "perturbed32",
    "custom-table",
];

fn parse_f64(v: &str, line: usize) -> Result<f64> {
    v.parse::<f64>()
        .with_context(|| format!("line {line}: expected a number, got '{v}'"))
}

fn parse_usize(v: &str, line: usize) -> Result<usize> {
    v.parse::<usize>()
        .with_context(|| format!("line {line}: expected an integer, got '{v}'"))
}

impl RunConfig {
    pub fn parse(text: &str, path: &Path) -> Result<RunConfig> {
        // section -> key -> (value, line)
        let mut sections: BTreeMap<String, BTreeMap<String, (String, usize)>> = BTreeMap::new();
        let mut current = String::new();
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if line.starts_with('[') {
                if !line.ends_with(']') {
                    bail!("{}:{line_no}: malformed section header '{raw}'", path.display());
                }
                current = line[1..line.len() - 1].trim().to_string();
                sections.entry(current.clone()).or_default();
                continue;
            }
            let Some((k, v)) = line.split_once('=') else {
                bail!("{}:{line_no}: expected 'key = value', got '{raw}'", path.display());
            };
            if current.is_empty() {
                bail!("{}:{line_no}: key before any [section]", path.display());
            }
            sections
                .get_mut(&current)
                .unwrap()
                .insert(k.trim().to_string(), (v.trim().to_string(), line_no));
        }

        let known: BTreeMap<&str, Vec<&str>> = BTreeMap::from([
            ("run", vec!["seed", "out", "jobs", "mode"]),
            (
                "grid",
                vec!["dim", "half_width", "nodes", "time_steps", "dense_from", "early_stride"],
            ),
            (
                "instance",
                vec!["kind", "alpha", "amplitude", "p", "magnitude", "table", "seed"],
            ),
            (
                "params",
                vec!["kappa", "kappa0", "alpha", "epsilon", "delta"],
            ),
            ("radii", vec!["start", "list"]),
            ("experiments", vec!["list"]),
        ]);
        for (sec, keys) in &sections {
            let Some(allowed) = known.get(sec.as_str()) else {
                bail!("{}: unknown section [{sec}]", path.display());
            };
            for (k, (_, line)) in keys {
                if !allowed.contains(&k.as_str()) {
                    bail!("{}:{line}: unknown key '{k}' in [{sec}]", path.display());
                }
            }
        }

        let get = |sec: &str, key: &str| -> Option<(String, usize)> {
            sections.get(sec).and_then(|s| s.get(key)).cloned()
        };

        let seed = match get("run", "seed") {
            Some((v, l)) => v
                .parse::<u64>()
                .with_context(|| format!("line {l}: bad seed '{v}'"))?,
            None => 0,
        };
        let out = get("run", "out")
            .map(|(v, _)| PathBuf::from(v))
            .unwrap_or_else(|| PathBuf::from("runs/out"));
        let jobs = match get("run", "jobs") {
            Some((v, l)) => parse_usize(&v, l)?.max(1),
            None => 1,
        };
        let mode = match get("run", "mode") {
            Some((v, l)) => match v.as_str() {
                "practical" => ConstantsMode::Practical,
                "exact" => ConstantsMode::TheoremExact,
                other => bail!("line {l}: mode must be 'practical' or 'exact', got '{other}'"),
            },
            None => ConstantsMode::Practical,
        };

        let dim = match get("grid", "dim") {
            Some((v, l)) => parse_usize(&v, l)?,
            None => 2,
        };
        let half_width = match get("grid", "half_width") {
            Some((v, l)) => parse_f64(&v, l)?,
            None => 2.6,
        };
        let nodes = match get("grid", "nodes") {
            Some((v, l)) => parse_usize(&v, l)?,
            None => 417,
        };
        let time_steps = match get("grid", "time_steps") {
            Some((v, l)) => parse_usize(&v, l)?,
            None => 800,
        };
        let grid = GridSpec::new(dim, half_width, nodes, -1.0, time_steps)
            .map_err(|e| anyhow::anyhow!("[grid]: {e}"))?;
        let dense_from = match get("grid", "dense_from") {
            Some((v, l)) => parse_usize(&v, l)?,
            None => (0.8 * time_steps as f64) as usize,
        };
        let early_stride = match get("grid", "early_stride") {
            Some((v, l)) => parse_usize(&v, l)?.max(1),
            None => 16,
        };
        let sampling = TimeSampling::DenseLate {
            dense_from,
            stride: early_stride,
        };

        let kind = get("instance", "kind")
            .map(|(v, _)| v)
            .unwrap_or_else(|| "exact32".into());
        if !KNOWN_INSTANCES.contains(&kind.as_str()) {
            bail!(
                "[instance]: unknown kind '{kind}' (expected one of {KNOWN_INSTANCES:?})"
            );
        }
        let instance = InstanceConfig {
            kind,
            alpha: match get("instance", "alpha") {
                Some((v, l)) => parse_f64(&v, l)?,
                None => 0.5,
            },
            amplitude: match get("instance", "amplitude") {
                Some((v, l)) => parse_f64(&v, l)?,
                None => 0.05,
            },
            p: match get("instance", "p") {
                Some((v, l)) => parse_f64(&v, l)?,
                None => 4.0,
            },
            magnitude: match get("instance", "magnitude") {
                Some((v, l)) => parse_f64(&v, l)?,
                None => 0.5,
            },
            table: get("instance", "table").map(|(v, _)| PathBuf::from(v)),
        };

        let params = WeissParams {
            kappa: match get("params", "kappa") {
                Some((v, l)) => parse_f64(&v, l)?,
                None => 1.5,
            },
            kappa0: match get("params", "kappa0") {
                Some((v, l)) => parse_f64(&v, l)?,
                None => 3.0,
            },
            alpha: match get("params", "alpha") {
                Some((v, l)) => parse_f64(&v, l)?,
                None => 0.5,
            },
            epsilon: match get("params", "epsilon") {
                Some((v, l)) => parse_f64(&v, l)?,
                None => 0.5,
            },
            delta: match get("params", "delta") {
                Some((v, l)) => parse_f64(&v, l)?,
                None => 1.0,
            },
            rho: 0.0,
            mode,
        };
        params
            .validate()
            .map_err(|e| anyhow::anyhow!("[params]: {e}"))?;

        let radii = RadiiConfig {
            start: match get("radii", "start") {
                Some((v, l)) => parse_f64(&v, l)?,
                None => 0.4,
            },
            explicit: match get("radii", "list") {
                Some((v, l)) => {
                    let mut rs = Vec::new();
                    for part in v.split(',') {
                        rs.push(parse_f64(part.trim(), l)?);
                    }
                    Some(rs)
                }
                None => None,
            },
        };

        let experiments = match get("experiments", "list") {
            Some((v, l)) => {
                let list: Vec<String> = v.split(',').map(|s| s.trim().to_string()).collect();
                for e in &list {
                    if !KNOWN_EXPERIMENTS.contains(&e.as_str()) {
                        bail!("line {l}: unknown experiment '{e}' (known: {KNOWN_EXPERIMENTS:?})");
                    }
                }
                list
            }
            None => KNOWN_EXPERIMENTS.iter().map(|s| s.to_string()).collect(),
        };

        Ok(RunConfig {
            seed,
            out,
            jobs,
            mode,
            grid,
            sampling,
            instance,
            params,
            radii,
            experiments,
        })
    }

    pub fn load(path: &Path) -> Result<RunConfig> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read config {}", path.display()))?;
        Self::parse(&text, path)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_minimal_config() {
        let text = "[run]\nseed = 7\nout = runs/x\n[instance]\nkind = exact32\n";
        let cfg = RunConfig::parse(text, Path::new("test.cfg")).unwrap();
        assert_eq!(cfg.seed, 7);
        assert_eq!(cfg.instance.kind, "exact32");
        assert_eq!(cfg.grid.nodes, 417);
    }

    #[test]
    fn rejects_unknown_key_with_line() {
        let text = "[run]\nseed = 7\nbogus = 1\n";
        let err = RunConfig::parse(text, Path::new("test.cfg")).unwrap_err();
        assert!(err.to_string().contains(":3"), "{err}");
        assert!(err.to_string().contains("bogus"));
    }

    #[test]
    fn rejects_unknown_instance() {
        let text = "[instance]\nkind = wavelet\n";
        assert!(RunConfig::parse(text, Path::new("t.cfg")).is_err());
    }

    #[test]
    fn rejects_unknown_experiment() {
        let text = "[experiments]\nlist = weiss, nonsense\n";
        let err = RunConfig::parse(text, Path::new("t.cfg")).unwrap_err();
        assert!(err.to_string().contains("nonsense"));
    }
}
