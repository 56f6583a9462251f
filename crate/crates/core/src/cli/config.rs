//! Flat `section.key = value` run configuration.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use crate::domain::{ExternalPotential, GridSpec, Interaction};
use crate::fock::basis::DEFAULT_CAP;
use crate::hartree::ScfParams;

use super::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ModelKind {
    Trap,
    Torus,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Json,
    Both,
}

impl OutputFormat {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "csv" => Some(Self::Csv),
            "json" => Some(Self::Json),
            "both" => Some(Self::Both),
            _ => None,
        }
    }

    pub fn csv(self) -> bool {
        matches!(self, Self::Csv | Self::Both)
    }

    pub fn json(self) -> bool {
        matches!(self, Self::Json | Self::Both)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub kind: ModelKind,
    pub half_width: f64,
    pub points: usize,
    pub mode_dim: usize,
    pub mode_cutoff: usize,
    pub potential: ExternalPotential,
    pub interaction: Interaction,
    pub scf: ScfParams,
    pub m_modes: usize,
    /// Level cutoff; `None` means four times the lowest excitation.
    pub xi: Option<f64>,
    pub spectrum_n: usize,
    pub ed_modes: usize,
    pub n_list: Vec<usize>,
    pub ed_n: usize,
    pub k_states: usize,
    pub cap: usize,
    pub truncation_check: bool,
    pub out_dir: PathBuf,
    pub format: OutputFormat,
    /// Keys as given in the file, for the output metadata.
    pub echo: BTreeMap<String, String>,
}

const KEYS: &[&str] = &[
    "model.kind",
    "grid.L",
    "grid.n",
    "modes.d",
    "modes.K",
    "potential.kind",
    "potential.omega",
    "potential.kappa",
    "interaction.kind",
    "interaction.g",
    "interaction.s",
    "interaction.coeffs",
    "scf.eta",
    "scf.tol",
    "scf.max_iter",
    "spectrum.m_modes",
    "spectrum.xi",
    "spectrum.N",
    "ed.M",
    "ed.N_list",
    "ed.N",
    "ed.k_states",
    "ed.cap",
    "ed.truncation_check",
    "output.dir",
    "output.format",
];

fn bad(key: &str, msg: impl std::fmt::Display) -> CliError {
    CliError::config(format!("{key}: {msg}"))
}

struct Raw(BTreeMap<String, String>);

impl Raw {
    fn text(&self, key: &str) -> Option<&str> {
        self.0.get(key).map(String::as_str)
    }

    fn float(&self, key: &str, default: f64, ok: impl Fn(f64) -> bool, rule: &str) -> Result<f64, CliError> {
        let v = match self.text(key) {
            None => default,
            Some(s) => s.parse::<f64>().map_err(|_| bad(key, format!("not a number: {s:?}")))?,
        };
        if !v.is_finite() || !ok(v) {
            return Err(bad(key, format!("{v} out of range, must be {rule}")));
        }
        Ok(v)
    }

    fn int(&self, key: &str, default: usize, min: usize) -> Result<usize, CliError> {
        let v = match self.text(key) {
            None => default,
            Some(s) => s.parse::<usize>().map_err(|_| bad(key, format!("not a nonnegative integer: {s:?}")))?,
        };
        if v < min {
            return Err(bad(key, format!("{v} out of range, must be >= {min}")));
        }
        Ok(v)
    }

    fn list(&self, key: &str) -> Option<Vec<String>> {
        self.text(key).map(|s| {
            s.trim()
                .trim_start_matches('[')
                .trim_end_matches(']')
                .split(',')
                .map(|x| x.trim().to_string())
                .filter(|x| !x.is_empty())
                .collect()
        })
    }
}

pub fn parse_config(text: &str) -> Result<RunConfig, CliError> {
    let mut raw = BTreeMap::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| CliError::config(format!("line {}: expected `section.key = value`", lineno + 1)))?;
        let key = key.trim();
        if !KEYS.contains(&key) {
            return Err(CliError::config(format!("line {}: unknown key {key:?}", lineno + 1)));
        }
        if raw.insert(key.to_string(), value.trim().to_string()).is_some() {
            return Err(CliError::config(format!("line {}: duplicate key {key:?}", lineno + 1)));
        }
    }
    let raw = Raw(raw);

    let kind = match raw.text("model.kind") {
        Some("trap") => ModelKind::Trap,
        Some("torus") => ModelKind::Torus,
        Some(other) => return Err(bad("model.kind", format!("unknown kind {other:?}"))),
        None => return Err(bad("model.kind", "required")),
    };
    let torus = kind == ModelKind::Torus;

    let half_width = raw.float("grid.L", 8.0, |x| x > 0.0, "> 0")?;
    let points = raw.int("grid.n", 256, 8)?;
    let mode_dim = raw.int("modes.d", 1, 1)?;
    if mode_dim > 3 {
        return Err(bad("modes.d", format!("{mode_dim} out of range, must be 1, 2 or 3")));
    }
    let mode_cutoff = raw.int("modes.K", 2, 1)?;

    let default_potential = if torus { "none" } else { "harmonic" };
    let potential = match raw.text("potential.kind").unwrap_or(default_potential) {
        "harmonic" => ExternalPotential::Harmonic {
            omega: raw.float("potential.omega", 1.0, |x| x >= 0.0, ">= 0")?,
        },
        "quartic" => ExternalPotential::Quartic {
            kappa: raw.float("potential.kappa", 1.0, |x| x >= 0.0, ">= 0")?,
        },
        "none" => ExternalPotential::None,
        other => return Err(bad("potential.kind", format!("unknown kind {other:?}"))),
    };
    if torus && potential != ExternalPotential::None {
        return Err(bad("potential.kind", "the torus model takes no external potential"));
    }

    let default_interaction = if torus { "cosine_torus" } else { "gaussian" };
    let g = raw.float("interaction.g", 1.0, |x| x >= 0.0, ">= 0")?;
    let interaction = match raw.text("interaction.kind").unwrap_or(default_interaction) {
        "gaussian" => Interaction::Gaussian {
            g,
            s: raw.float("interaction.s", 0.5, |x| x > 0.0, "> 0")?,
        },
        "cosine_torus" => Interaction::cosine_torus(g),
        "cosine" => {
            let coeffs = raw
                .list("interaction.coeffs")
                .ok_or_else(|| bad("interaction.coeffs", "required for kind cosine"))?
                .iter()
                .map(|c| c.parse::<f64>().ok().filter(|x| x.is_finite() && *x >= 0.0))
                .collect::<Option<Vec<f64>>>()
                .ok_or_else(|| bad("interaction.coeffs", "expected nonnegative numbers"))?;
            if coeffs.is_empty() {
                return Err(bad("interaction.coeffs", "empty"));
            }
            Interaction::CosineSeries { coeffs }
        }
        "zero" => Interaction::Zero,
        other => return Err(bad("interaction.kind", format!("unknown kind {other:?}"))),
    };

    let scf = ScfParams {
        mixing: raw.float("scf.eta", 0.5, |x| x > 0.0 && x <= 1.0, "in (0, 1]")?,
        tol: raw.float("scf.tol", 1e-10, |x| x > 0.0, "> 0")?,
        max_iter: raw.int("scf.max_iter", 500, 1)?,
    };

    let default_modes = if torus { 2 * mode_cutoff + 1 } else { 32 };
    let m_modes = raw.int("spectrum.m_modes", default_modes, 2)?;
    let xi = match raw.text("spectrum.xi") {
        None => None,
        Some(_) => Some(raw.float("spectrum.xi", 0.0, |x| x >= 0.0, ">= 0")?),
    };
    let spectrum_n = raw.int("spectrum.N", 100, 2)?;

    let ed_modes = raw.int("ed.M", 4, 1)?;
    let n_list = match raw.list("ed.N_list") {
        None => vec![4, 8, 16, 32],
        Some(items) => items
            .iter()
            .map(|s| s.parse::<usize>().ok())
            .collect::<Option<Vec<usize>>>()
            .ok_or_else(|| bad("ed.N_list", "expected a list of integers"))?,
    };
    if n_list.is_empty() {
        return Err(bad("ed.N_list", "empty"));
    }
    if n_list.iter().any(|&n| n < 2) {
        return Err(bad("ed.N_list", "every N must be >= 2"));
    }
    if n_list.windows(2).any(|w| w[1] <= w[0]) {
        return Err(bad("ed.N_list", format!("{n_list:?} is not ascending")));
    }
    let ed_n = raw.int("ed.N", n_list[0], 2)?;
    let k_states = raw.int("ed.k_states", 5, 1)?;
    let cap = raw.int("ed.cap", DEFAULT_CAP, 1)?;
    let truncation_check = match raw.text("ed.truncation_check").unwrap_or("false") {
        "true" => true,
        "false" => false,
        other => return Err(bad("ed.truncation_check", format!("expected true or false, got {other:?}"))),
    };

    let out_dir = PathBuf::from(raw.text("output.dir").unwrap_or("out"));
    let format = match raw.text("output.format") {
        None => OutputFormat::Csv,
        Some(s) => OutputFormat::parse(s).ok_or_else(|| bad("output.format", format!("expected csv, json or both, got {s:?}")))?,
    };

    let cfg = RunConfig {
        kind,
        half_width,
        points,
        mode_dim,
        mode_cutoff,
        potential,
        interaction,
        scf,
        m_modes,
        xi,
        spectrum_n,
        ed_modes,
        n_list,
        ed_n,
        k_states,
        cap,
        truncation_check,
        out_dir,
        format,
        echo: raw.0,
    };
    // Mode counts must fit the grid.
    let unknowns = cfg.grid().map_err(|e| bad("grid.n", e))?.unknown_count();
    if cfg.m_modes > unknowns {
        return Err(bad("spectrum.m_modes", format!("{} exceeds the {unknowns} grid unknowns", cfg.m_modes)));
    }
    if cfg.ed_modes + 1 > unknowns {
        return Err(bad("ed.M", format!("{} modes exceed the {unknowns} grid unknowns", cfg.ed_modes + 1)));
    }
    Ok(cfg)
}

pub fn load_config(path: &Path) -> Result<RunConfig, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => CliError::missing(format!("config file {} not found", path.display())),
        _ => CliError::config(format!("cannot read {}: {e}", path.display())),
    })?;
    parse_config(&text)
}

impl RunConfig {
    pub fn grid(&self) -> crate::Result<GridSpec> {
        match self.kind {
            ModelKind::Trap => GridSpec::dirichlet_box(self.half_width, self.points),
            ModelKind::Torus => GridSpec::periodic_torus(self.points),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_torus_gets_defaults() {
        let cfg = parse_config("model.kind = torus\nmodes.K = 2\ninteraction.g = 1  # weak\n").unwrap();
        assert_eq!(cfg.scf.tol, 1e-10);
        assert_eq!(cfg.scf.mixing, 0.5);
        assert_eq!(cfg.interaction, Interaction::cosine_torus(1.0));
        assert_eq!(cfg.potential, ExternalPotential::None);
        assert_eq!(cfg.m_modes, 5);
        assert_eq!(cfg.n_list, vec![4, 8, 16, 32]);
    }

    #[test]
    fn negative_g_names_the_key() {
        let err = parse_config("model.kind = trap\ninteraction.g = -1\n").unwrap_err();
        assert_eq!(err.code, 2);
        assert!(err.message.contains("interaction.g"));
    }

    #[test]
    fn unsorted_n_list() {
        let err = parse_config("model.kind = torus\ned.N_list = [8, 4]\n").unwrap_err();
        assert_eq!(err.code, 2);
        assert!(err.message.contains("ed.N_list"));
    }

    #[test]
    fn unknown_and_malformed_keys() {
        assert_eq!(parse_config("model.kind = trap\nmodel.colour = red\n").unwrap_err().code, 2);
        assert_eq!(parse_config("model.kind trap\n").unwrap_err().code, 2);
        assert_eq!(parse_config("model.kind = moon\n").unwrap_err().code, 2);
        assert_eq!(parse_config("model.kind = trap\nscf.eta = 1.5\n").unwrap_err().code, 2);
    }

    #[test]
    fn missing_file() {
        let err = load_config(Path::new("/nonexistent/run.cfg")).unwrap_err();
        assert_eq!(err.code, 66);
    }
}
