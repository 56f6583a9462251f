//! The seven commands. Each builds a [`Bundle`]; verification failures are
//! reported after the tables are complete so the files are still written.

use std::path::PathBuf;
use std::time::Instant;

use crate::bogoliubov::{analyze, bdg_spectrum, enumerate_excitations, predict_ground_energy};
use crate::domain::{validate_positive_type, GridSpec, ModeBasis};
use crate::fock::{sweep_checks, verify_point, verify_theorem, EdConfig, EdModel, TheoremRow};
use crate::hartree::{solve_hartree, HartreeSolution};
use crate::onebody::assemble_onebody;
use crate::torus::{torus_spectrum, Dispersion};

use super::config::{ModelKind, RunConfig};
use super::output::{Bundle, Cell, Table};
use super::CliError;

/// Relative tolerance for the BdG and closed-form cross-checks.
pub const CROSS_CHECK_TOL: f64 = 1e-8;
/// Levels compared by `bdg`.
pub const BDG_LEVELS: usize = 10;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    Validate,
    Hartree,
    Spectrum,
    Bdg,
    TorusOracle,
    EdCompare,
    Sweep,
}

impl Command {
    pub const ALL: [Command; 7] = [
        Command::Validate,
        Command::Hartree,
        Command::Spectrum,
        Command::Bdg,
        Command::TorusOracle,
        Command::EdCompare,
        Command::Sweep,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Command::Validate => "validate",
            Command::Hartree => "hartree",
            Command::Spectrum => "spectrum",
            Command::Bdg => "bdg",
            Command::TorusOracle => "torus-oracle",
            Command::EdCompare => "ed-compare",
            Command::Sweep => "sweep",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|c| c.name() == s)
    }
}

/// A finished command: its tables and, if a check failed, which one.
#[derive(Clone, Debug, PartialEq)]
pub struct Outcome {
    pub bundle: Bundle,
    pub failure: Option<String>,
}

struct Timer {
    label: &'static str,
    start: Instant,
}

impl Timer {
    fn start(label: &'static str) -> Self {
        Self {
            label,
            start: Instant::now(),
        }
    }
}

impl Drop for Timer {
    fn drop(&mut self) {
        eprintln!("[time] {}: {:.3} s", self.label, self.start.elapsed().as_secs_f64());
    }
}

fn kv_table(name: &str, rows: Vec<(&str, Cell)>) -> Table {
    let mut t = Table::new(name, &["quantity", "value"]);
    for (k, v) in rows {
        t.push(vec![Cell::text(k), v]);
    }
    t
}

fn grid_of(cfg: &RunConfig) -> Result<GridSpec, CliError> {
    cfg.grid().map_err(|e| CliError::config(format!("grid.n: {e}")))
}

fn hartree_of(cfg: &RunConfig, grid: &GridSpec) -> Result<HartreeSolution, CliError> {
    let report = validate_positive_type(&cfg.interaction, grid);
    if !report.passed {
        return Err(CliError::verification(format!(
            "interaction is not of positive type: v_hat({:.6e}) = {:.6e}",
            report.argmin_momentum, report.min_coefficient
        )));
    }
    let _t = Timer::start("hartree");
    Ok(solve_hartree(grid, &cfg.potential, &cfg.interaction, &cfg.scf)?)
}

fn ed_model(cfg: &RunConfig, grid: &GridSpec, sol: &HartreeSolution, excited: usize) -> Result<EdModel, CliError> {
    let _t = Timer::start("tensors");
    let ob = assemble_onebody(sol, grid, &cfg.potential, &cfg.interaction, excited + 1)?;
    Ok(EdModel::new(&ob, grid, &cfg.potential, &cfg.interaction, cfg.scf.tol)?)
}

fn ed_config(cfg: &RunConfig) -> EdConfig {
    EdConfig {
        k_states: cfg.k_states,
        cap: cfg.cap,
    }
}

pub fn run_command(cmd: Command, cfg: &RunConfig) -> Result<Outcome, CliError> {
    let mut bundle = Bundle::new(cmd.name(), &cfg.echo);
    let failure = match cmd {
        Command::Validate => validate(cfg, &mut bundle)?,
        Command::Hartree => hartree(cfg, &mut bundle)?,
        Command::Spectrum => spectrum(cfg, &mut bundle)?,
        Command::Bdg => bdg(cfg, &mut bundle)?,
        Command::TorusOracle => torus_oracle(cfg, &mut bundle)?,
        Command::EdCompare => ed_compare(cfg, &mut bundle)?,
        Command::Sweep => sweep(cfg, &mut bundle)?,
    };
    Ok(Outcome { bundle, failure })
}

/// Runs the command and writes its files to `cfg.out_dir`. A failed check
/// becomes an exit-1 error after the files are written.
pub fn execute(cmd: Command, cfg: &RunConfig) -> Result<Vec<PathBuf>, CliError> {
    let _t = Timer::start("total");
    let outcome = run_command(cmd, cfg)?;
    let written = outcome.bundle.write(&cfg.out_dir, cfg.format.csv(), cfg.format.json())?;
    match outcome.failure {
        Some(msg) => Err(CliError::verification(msg)),
        None => Ok(written),
    }
}

fn validate(cfg: &RunConfig, bundle: &mut Bundle) -> Result<Option<String>, CliError> {
    let grid = grid_of(cfg)?;
    let r = validate_positive_type(&cfg.interaction, &grid);
    bundle.tables.push(kv_table(
        "validate",
        vec![
            ("min_coefficient", Cell::float(r.min_coefficient)),
            ("argmin_momentum", Cell::float(r.argmin_momentum)),
            ("threshold", Cell::float(r.threshold)),
            ("samples", Cell::int(r.samples)),
            ("passed", Cell::Bool(r.passed)),
        ],
    ));
    Ok((!r.passed).then(|| {
        format!(
            "positive type: v_hat({:.6e}) = {:.6e} below {:.3e}",
            r.argmin_momentum, r.min_coefficient, -r.threshold
        )
    }))
}

fn hartree(cfg: &RunConfig, bundle: &mut Bundle) -> Result<Option<String>, CliError> {
    let grid = grid_of(cfg)?;
    let sol = hartree_of(cfg, &grid)?;
    bundle.tables.push(kv_table(
        "hartree",
        vec![
            ("eps0", Cell::float(sol.eps0)),
            ("hartree_energy", Cell::float(sol.hartree_energy)),
            ("h00", Cell::float(sol.h00)),
            ("v0000", Cell::float(sol.v0000)),
            ("residual", Cell::float(sol.residual)),
            ("iterations", Cell::int(sol.iterations)),
            ("boundary_amplitude", Cell::float(sol.boundary_amplitude)),
        ],
    ));
    let mut phi = Table::new("condensate", &["x", "phi0"]);
    for (x, p) in grid.points().iter().zip(&sol.phi0) {
        phi.push(vec![Cell::float(*x), Cell::float(*p)]);
    }
    bundle.tables.push(phi);
    Ok(None)
}

fn spectrum(cfg: &RunConfig, bundle: &mut Bundle) -> Result<Option<String>, CliError> {
    let grid = grid_of(cfg)?;
    let sol = hartree_of(cfg, &grid)?;
    let _t = Timer::start("spectrum");
    let ob = assemble_onebody(&sol, &grid, &cfg.potential, &cfg.interaction, cfg.m_modes)?;
    let bog = analyze(&ob, &sol)?;

    let mut e = Table::new("spectrum", &["index", "e_i"]);
    for (i, x) in bog.e.iter().enumerate() {
        e.push(vec![Cell::int(i + 1), Cell::float(*x)]);
    }
    bundle.tables.push(e);

    let n = cfg.spectrum_n;
    bundle.tables.push(kv_table(
        "summary",
        vec![
            ("m_modes", Cell::int(cfg.m_modes)),
            ("trace_correction", Cell::float(bog.trace_correction)),
            ("coefficient_a", Cell::float(bog.coefficients.a)),
            ("coefficient_b", Cell::float(bog.coefficients.b)),
            ("N", Cell::int(n)),
            ("xi", Cell::float(cfg.xi.unwrap_or(4.0 * bog.e[0]))),
            ("E0_predicted", Cell::float(predict_ground_energy(&bog, n)?)),
        ],
    ));

    let xi = cfg.xi.unwrap_or(4.0 * bog.e[0]);
    let mut levels = Table::new("levels", &["index", "level"]);
    for (i, x) in enumerate_excitations(&bog.e, xi, n)?.iter().enumerate() {
        levels.push(vec![Cell::int(i), Cell::float(*x)]);
    }
    bundle.tables.push(levels);
    Ok(None)
}

fn bdg(cfg: &RunConfig, bundle: &mut Bundle) -> Result<Option<String>, CliError> {
    let grid = grid_of(cfg)?;
    let sol = hartree_of(cfg, &grid)?;
    let _t = Timer::start("bdg");
    let ob = assemble_onebody(&sol, &grid, &cfg.potential, &cfg.interaction, cfg.m_modes)?;
    let bog = analyze(&ob, &sol)?;
    let omega = bdg_spectrum(&ob)?;

    let mut t = Table::new("bdg", &["index", "e_i", "omega_i", "rel_diff"]);
    let mut worst: Option<(usize, f64)> = None;
    for (i, (e, w)) in bog.e.iter().zip(&omega).enumerate() {
        let rel = (e - w).abs() / e.abs().max(f64::MIN_POSITIVE);
        t.push(vec![Cell::int(i + 1), Cell::float(*e), Cell::float(*w), Cell::float(rel)]);
        if i < BDG_LEVELS && worst.is_none_or(|(_, r)| rel > r) {
            worst = Some((i + 1, rel));
        }
    }
    bundle.tables.push(t);
    Ok(worst
        .filter(|&(_, r)| r > CROSS_CHECK_TOL)
        .map(|(i, r)| format!("bdg row index={i}: rel_diff {r:.3e} exceeds {CROSS_CHECK_TOL:.0e}")))
}

fn label_text(label: &[i64]) -> String {
    let parts: Vec<String> = label.iter().map(i64::to_string).collect();
    format!("[{}]", parts.join(";"))
}

fn torus_oracle(cfg: &RunConfig, bundle: &mut Bundle) -> Result<Option<String>, CliError> {
    if cfg.kind != ModelKind::Torus {
        return Err(CliError::config("model.kind: torus-oracle needs model.kind = torus"));
    }
    let grid = grid_of(cfg)?;
    let basis = ModeBasis::new(cfg.mode_dim, cfg.mode_cutoff).map_err(|e| CliError::config(format!("modes.K: {e}")))?;
    let exact = torus_spectrum(&basis, &cfg.interaction, Dispersion::Continuum)?;
    let stencil = torus_spectrum(&basis, &cfg.interaction, Dispersion::Stencil { h: grid.spacing() })?;

    let mut t = Table::new("torus_oracle", &["index", "label", "p2", "vhat", "e_p", "p2_stencil", "e_p_stencil"]);
    for (i, (a, b)) in exact.modes.iter().zip(&stencil.modes).enumerate() {
        t.push(vec![
            Cell::int(i),
            Cell::text(label_text(&a.label)),
            Cell::float(a.kinetic),
            Cell::float(a.vhat),
            Cell::float(a.e),
            Cell::float(b.kinetic),
            Cell::float(b.e),
        ]);
    }
    bundle.tables.push(t);

    let mut summary = vec![
        ("trace_sum", Cell::float(exact.trace_sum)),
        ("trace_sum_stencil", Cell::float(stencil.trace_sum)),
    ];
    let mut failure = None;
    // The grid pipeline is one-dimensional; compare it when the basis is too.
    if cfg.mode_dim == 1 {
        let sol = hartree_of(cfg, &grid)?;
        let ob = assemble_onebody(&sol, &grid, &cfg.potential, &cfg.interaction, basis.len())?;
        let bog = analyze(&ob, &sol)?;
        let want = stencil.excitations();
        let max_rel = bog
            .e
            .iter()
            .zip(&want)
            .map(|(a, b)| (a - b).abs() / b)
            .fold(0.0, f64::max);
        let trace_diff = (bog.trace_correction - stencil.trace_sum).abs();
        summary.push(("pipeline_trace", Cell::float(bog.trace_correction)));
        summary.push(("pipeline_max_rel_diff", Cell::float(max_rel)));
        summary.push(("pipeline_trace_diff", Cell::float(trace_diff)));
        if max_rel > CROSS_CHECK_TOL {
            failure = Some(format!("summary row pipeline_max_rel_diff: {max_rel:.3e} exceeds {CROSS_CHECK_TOL:.0e}"));
        } else if trace_diff > CROSS_CHECK_TOL {
            failure = Some(format!("summary row pipeline_trace_diff: {trace_diff:.3e} exceeds {CROSS_CHECK_TOL:.0e}"));
        }
    }
    bundle.tables.push(kv_table("summary", summary));
    Ok(failure)
}

const COMPARE_COLUMNS: [&str; 13] = [
    "N",
    "E0_ed",
    "E0_bog",
    "delta0",
    "delta0_sqrtN",
    "gap1_ed",
    "gap1_bog",
    "depletion",
    "TH_expect",
    "overlap_sq",
    "lemma1_lower_ok",
    "lemma1_upper_ok",
    "lemma3_ok",
];

fn compare_row(r: &TheoremRow) -> Vec<Cell> {
    vec![
        Cell::int(r.particles),
        Cell::float(r.e0_ed),
        Cell::float(r.e0_bog),
        Cell::float(r.delta0),
        Cell::float(r.delta0_sqrt_n),
        Cell::float(r.gap1_ed),
        Cell::float(r.gap1_bog),
        Cell::float(r.depletion),
        Cell::float(r.th_expect),
        Cell::float(r.overlap_sq),
        Cell::Bool(r.lemma1_lower_ok),
        Cell::Bool(r.lemma1_upper_ok),
        Cell::Bool(r.lemma3_ok),
    ]
}

fn compare_table(name: &str, rows: &[TheoremRow]) -> Table {
    let mut t = Table::new(name, &COMPARE_COLUMNS);
    for r in rows {
        t.push(compare_row(r));
    }
    t
}

fn states_table(rows: &[TheoremRow]) -> Table {
    let mut t = Table::new(
        "states",
        &[
            "N",
            "state",
            "energy",
            "level_ed",
            "mu",
            "depletion",
            "TH_expect",
            "TH_bound",
            "product_expect",
            "lemma3_bound",
            "expval_ok",
            "lemma3_ok",
        ],
    );
    for r in rows {
        for (k, s) in r.states.iter().enumerate() {
            t.push(vec![
                Cell::int(r.particles),
                Cell::int(k),
                Cell::float(s.energy),
                Cell::float(r.levels_ed[k]),
                Cell::float(s.mu),
                Cell::float(s.depletion),
                Cell::float(s.th_expect),
                Cell::float(s.th_bound),
                Cell::float(s.product_expect),
                Cell::float(s.lemma3_bound),
                Cell::Bool(s.expval_ok()),
                Cell::Bool(s.lemma3_ok(r.onebody_gap)),
            ]);
        }
    }
    t
}

fn row_failure(r: &TheoremRow) -> Option<String> {
    let checks = [
        ("lemma1_lower_ok", r.lemma1_lower_ok),
        ("lemma1_upper_ok", r.lemma1_upper_ok),
        ("expval_ok", r.expval_ok),
        ("lemma3_ok", r.lemma3_ok),
    ];
    let failed: Vec<&str> = checks.iter().filter(|c| !c.1).map(|c| c.0).collect();
    (!failed.is_empty()).then(|| format!("row N={}: {} false", r.particles, failed.join(", ")))
}

fn truncation_table(cfg: &RunConfig, grid: &GridSpec, sol: &HartreeSolution, particles: &[usize]) -> Result<Table, CliError> {
    let mut t = Table::new("truncation", &["M", "N", "E0_ed", "E0_bog", "gap1_ed", "overlap_sq"]);
    for excited in [cfg.ed_modes, 2 * cfg.ed_modes] {
        let model = ed_model(cfg, grid, sol, excited)?;
        for row in verify_theorem(&model, particles, &ed_config(cfg))? {
            t.push(vec![
                Cell::int(excited),
                Cell::int(row.particles),
                Cell::float(row.e0_ed),
                Cell::float(row.e0_bog),
                Cell::float(row.gap1_ed),
                Cell::float(row.overlap_sq),
            ]);
        }
    }
    Ok(t)
}

fn ed_compare(cfg: &RunConfig, bundle: &mut Bundle) -> Result<Option<String>, CliError> {
    let grid = grid_of(cfg)?;
    let sol = hartree_of(cfg, &grid)?;
    let model = ed_model(cfg, &grid, &sol, cfg.ed_modes)?;
    let row = {
        let _t = Timer::start("ed");
        verify_point(&model, cfg.ed_n, &ed_config(cfg))?
    };
    let rows = [row];
    bundle.tables.push(compare_table("ed_compare", &rows));
    bundle.tables.push(states_table(&rows));
    if cfg.truncation_check {
        bundle.tables.push(truncation_table(cfg, &grid, &sol, &[cfg.ed_n])?);
    }
    Ok(row_failure(&rows[0]))
}

fn sweep(cfg: &RunConfig, bundle: &mut Bundle) -> Result<Option<String>, CliError> {
    let grid = grid_of(cfg)?;
    let sol = hartree_of(cfg, &grid)?;
    let model = ed_model(cfg, &grid, &sol, cfg.ed_modes)?;
    let rows = {
        let _t = Timer::start("ed sweep");
        verify_theorem(&model, &cfg.n_list, &ed_config(cfg))?
    };
    bundle.tables.push(compare_table("sweep", &rows));
    bundle.tables.push(states_table(&rows));

    let checks = sweep_checks(&rows);
    let mut t = Table::new("checks", &["check", "value", "passed"]);
    for c in &checks {
        t.push(vec![Cell::text(c.name.as_str()), Cell::float(c.value), Cell::Bool(c.passed)]);
    }
    bundle.tables.push(t);
    if cfg.truncation_check {
        bundle.tables.push(truncation_table(cfg, &grid, &sol, &cfg.n_list)?);
    }

    let failed: Vec<&str> = checks.iter().filter(|c| !c.passed).map(|c| c.name.as_str()).collect();
    Ok(rows
        .iter()
        .find_map(row_failure)
        .or_else(|| (!failed.is_empty()).then(|| format!("sweep checks failed: {}", failed.join(", ")))))
}
