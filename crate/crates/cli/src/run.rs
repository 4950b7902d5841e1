//! Grid expansion and row evaluation.

use std::sync::{Condvar, Mutex};

use dicke_core::{
    critical_beta, free_energy_per_atom, log_partition_ratio, phi_shift, solve_gap, spectrum,
    spectrum_via_kernel_roots, thermal_observables, DickeError, EdConfig, GapSolution,
    InverseTemperature, ModelParams, Phase, PhiShift,
};
use rayon::prelude::*;

use crate::config::{ConfigError, EdSettings, Fixed, PartitionSettings, SweepSpec, Task};

/// Environment variable overriding the ED basis-dimension cap.
pub const MAX_ED_DIM_ENV: &str = "DICKE_MAX_ED_DIM";

/// One table cell.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(u64),
    Bool(bool),
    Text(String),
    Empty,
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<bool> for Cell {
    fn from(b: bool) -> Self {
        Cell::Bool(b)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_owned())
    }
}

fn beta_c_cell(bc: Option<f64>) -> Cell {
    bc.map_or_else(|| Cell::from("none"), Cell::Num)
}

/// Rows of one task, all sharing `columns`; the last column is `error`.
#[derive(Debug, Clone, PartialEq)]
pub struct TaskTable {
    /// `None` for the header-only table of a sweep without tasks.
    pub task: Option<Task>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl TaskTable {
    pub fn name(&self) -> &'static str {
        self.task.map_or("sweep", |t| t.as_str())
    }

    pub fn error_count(&self) -> usize {
        self.rows
            .iter()
            .filter(|r| !matches!(r.last(), Some(Cell::Empty) | None))
            .count()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub tables: Vec<TaskTable>,
}

impl Table {
    pub fn error_count(&self) -> usize {
        self.tables.iter().map(TaskTable::error_count).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RunOptions {
    /// Worker threads; `None` uses the pool default.
    pub workers: Option<usize>,
    pub max_ed_dim: usize,
}

impl RunOptions {
    /// Options from the sweep config plus the `DICKE_MAX_ED_DIM` override.
    pub fn from_env(spec: &SweepSpec) -> Result<Self, ConfigError> {
        Ok(RunOptions { workers: spec.workers, max_ed_dim: max_ed_dim_from_env()? })
    }
}

pub fn max_ed_dim_from_env() -> Result<usize, ConfigError> {
    match std::env::var(MAX_ED_DIM_ENV) {
        Err(_) => Ok(dicke_core::exact_diag::DEFAULT_MAX_DIM),
        Ok(v) => v.trim().parse::<usize>().ok().filter(|&d| d > 0).ok_or_else(|| {
            ConfigError::Field {
                field: MAX_ED_DIM_ENV.into(),
                msg: format!("expected a positive integer, got {v:?}"),
            }
        }),
    }
}

pub const INPUT_COLUMNS: [&str; 6] = ["point", "omega0", "omega", "g1", "g2", "beta"];

/// Task-specific columns, in output order.
pub fn task_columns(task: Task, ed: &EdSettings) -> Vec<String> {
    let fixed: &[&str] = match task {
        Task::Critical => &["symmetry", "has_transition", "beta_c"],
        Task::Gap => &["phase", "beta_c", "omega_delta", "b0_sq", "gap_residual"],
        Task::Spectrum => &[
            "phase",
            "case_tag",
            "e_minus",
            "e_plus",
            "goldstone",
            "e_minus_kernel",
            "e_plus_kernel",
        ],
        Task::FreeEnergy => &["phase", "beta_c", "free_energy", "phi", "phi_kind"],
        Task::Partition => &[
            "phase",
            "n_atoms",
            "cutoff",
            "phi",
            "zero_mode",
            "multiplicity",
            "matsubara",
            "tail",
            "log_correction",
            "log_ratio",
            "goldstone_case",
        ],
        Task::EdCompare => &[
            "phase",
            "n_atoms",
            "n_max",
            "ed_free_energy",
            "mf_free_energy",
            "free_energy_diff",
            "ed_photon_density",
            "mf_b0_sq",
            "ed_inversion",
            "parity_residual",
            "nsum_residual",
            "ndiff_residual",
            "truncation_shift",
            "mf_e_minus",
            "mf_e_plus",
        ],
    };
    let mut cols: Vec<String> = fixed.iter().map(|s| s.to_string()).collect();
    if task == Task::EdCompare {
        cols.extend((1..=ed.k_gaps).map(|k| format!("ed_gap_{k}")));
    }
    cols
}

fn all_columns(task: Option<Task>, ed: &EdSettings) -> Vec<String> {
    let mut cols: Vec<String> = INPUT_COLUMNS.iter().map(|s| s.to_string()).collect();
    if let Some(t) = task {
        cols.extend(task_columns(t, ed));
    }
    cols.push("error".into());
    cols
}

/// Grid points in row-major order over the axes (first axis outermost).
pub fn grid(spec: &SweepSpec) -> Vec<Fixed> {
    let mut points = vec![spec.fixed];
    for axis in &spec.axes {
        let values = axis.values();
        points = points
            .into_iter()
            .flat_map(|p| {
                values.iter().map(move |&v| {
                    let mut q = p;
                    q.set(axis.name, v);
                    q
                })
            })
            .collect();
    }
    points
}

/// Counting semaphore bounding concurrent ED jobs.
struct Gate {
    free: Mutex<usize>,
    cv: Condvar,
}

struct Pass<'a>(&'a Gate);

impl Gate {
    fn new(n: usize) -> Self {
        Gate { free: Mutex::new(n.max(1)), cv: Condvar::new() }
    }

    fn enter(&self) -> Pass<'_> {
        let mut free = self.free.lock().unwrap_or_else(|e| e.into_inner());
        while *free == 0 {
            free = self.cv.wait(free).unwrap_or_else(|e| e.into_inner());
        }
        *free -= 1;
        Pass(self)
    }
}

impl Drop for Pass<'_> {
    fn drop(&mut self) {
        let mut free = self.0.free.lock().unwrap_or_else(|e| e.into_inner());
        *free += 1;
        self.0.cv.notify_one();
    }
}

/// Evaluation context shared by all rows of a run.
pub struct Evaluator {
    ed: EdSettings,
    partition: PartitionSettings,
    max_ed_dim: usize,
    gate: Gate,
}

impl Evaluator {
    pub fn new(ed: EdSettings, partition: PartitionSettings, max_ed_dim: usize) -> Self {
        Evaluator { ed, partition, max_ed_dim, gate: Gate::new(ed.max_concurrent) }
    }

    /// Full row for `task` at `point` (index `index`), errors captured.
    pub fn row(&self, task: Task, index: usize, point: &Fixed) -> Vec<Cell> {
        let mut row = input_cells(index, point);
        let width = task_columns(task, &self.ed).len();
        match self.task_cells(task, point) {
            Ok(cells) => {
                debug_assert_eq!(cells.len(), width);
                row.extend(cells);
                row.push(Cell::Empty);
            }
            Err(e) => {
                row.extend(std::iter::repeat(Cell::Empty).take(width));
                row.push(Cell::Text(e.to_string()));
            }
        }
        row
    }

    fn task_cells(&self, task: Task, point: &Fixed) -> Result<Vec<Cell>, DickeError> {
        let p = point.params()?;
        let beta = point.inverse_temperature()?;
        match task {
            Task::Critical => critical_cells(&p),
            Task::Gap => gap_cells(&p, beta),
            Task::Spectrum => spectrum_cells(&p, beta),
            Task::FreeEnergy => free_energy_cells(&p, beta),
            Task::Partition => partition_cells(&p, beta, &self.partition),
            Task::EdCompare => {
                let _pass = self.gate.enter();
                ed_cells(&p, beta, &self.ed, self.max_ed_dim)
            }
        }
    }
}

fn input_cells(index: usize, point: &Fixed) -> Vec<Cell> {
    vec![
        Cell::Int(index as u64),
        point.omega0.into(),
        point.omega.into(),
        point.g1.into(),
        point.g2.into(),
        point.beta.into(),
    ]
}

/// Gap solution, with the uncoupled model treated as normal.
fn gap_or_normal(p: &ModelParams<f64>, beta: InverseTemperature<f64>) -> Result<GapSolution<f64>, DickeError> {
    if p.coupling_sum() == 0.0 {
        return Ok(GapSolution { phase: Phase::Normal, omega_delta: p.splitting, b0_sq: 0.0 });
    }
    solve_gap(p, beta)
}

fn critical_cells(p: &ModelParams<f64>) -> Result<Vec<Cell>, DickeError> {
    let bc = critical_beta(p)?;
    Ok(vec![p.symmetry().tag().into(), bc.is_some().into(), beta_c_cell(bc)])
}

fn gap_cells(p: &ModelParams<f64>, beta: InverseTemperature<f64>) -> Result<Vec<Cell>, DickeError> {
    let bc = critical_beta(p)?;
    let gap = solve_gap(p, beta)?;
    let residual = match gap.phase {
        Phase::Superradiant => gap.residual(p, beta),
        _ => 0.0,
    };
    Ok(vec![
        gap.phase.label().into(),
        beta_c_cell(bc),
        gap.omega_delta.into(),
        gap.b0_sq.into(),
        residual.into(),
    ])
}

fn spectrum_cells(p: &ModelParams<f64>, beta: InverseTemperature<f64>) -> Result<Vec<Cell>, DickeError> {
    let gap = gap_or_normal(p, beta)?;
    let closed = spectrum(p, beta)?;
    let roots = spectrum_via_kernel_roots(p, beta)?;
    Ok(vec![
        gap.phase.label().into(),
        closed.case_tag.label().into(),
        closed.energies[0].into(),
        closed.energies[1].into(),
        closed.goldstone.into(),
        roots.energies[0].into(),
        roots.energies[1].into(),
    ])
}

fn free_energy_cells(p: &ModelParams<f64>, beta: InverseTemperature<f64>) -> Result<Vec<Cell>, DickeError> {
    let gap = gap_or_normal(p, beta)?;
    let bc = if p.coupling_sum() > 0.0 { critical_beta(p)? } else { None };
    let f = free_energy_per_atom(p, beta)?;
    let phi = phi_shift(p, beta, &gap)?;
    let kind = match phi {
        PhiShift::Value(_) => "value",
        PhiShift::Rate(_) => "rate",
    };
    Ok(vec![gap.phase.label().into(), beta_c_cell(bc), f.into(), phi.value().into(), kind.into()])
}

fn partition_cells(
    p: &ModelParams<f64>,
    beta: InverseTemperature<f64>,
    s: &PartitionSettings,
) -> Result<Vec<Cell>, DickeError> {
    let gap = gap_or_normal(p, beta)?;
    let z = log_partition_ratio(p, beta, s.n_atoms, s.cutoff)?;
    Ok(vec![
        gap.phase.label().into(),
        Cell::Int(z.n_atoms),
        Cell::Int(z.cutoff as u64),
        z.phi.into(),
        z.zero_mode.into(),
        z.multiplicity.into(),
        z.matsubara.into(),
        z.tail.into(),
        z.log_correction.into(),
        z.log_ratio().into(),
        z.goldstone_case.into(),
    ])
}

fn ed_cells(
    p: &ModelParams<f64>,
    beta: InverseTemperature<f64>,
    s: &EdSettings,
    max_dim: usize,
) -> Result<Vec<Cell>, DickeError> {
    let mut cfg = match s.n_max {
        Some(n_max) => EdConfig::with_cutoff(s.n_atoms, n_max, *p, beta),
        None => EdConfig::new(s.n_atoms, *p, beta)?,
    };
    cfg.max_dim = max_dim;
    let ed = thermal_observables(&cfg, s.k_gaps)?;
    let gap = gap_or_normal(p, beta)?;
    let f = free_energy_per_atom(p, beta)?;
    let mf = spectrum(p, beta)?;
    let mut cells = vec![
        gap.phase.label().into(),
        Cell::Int(s.n_atoms as u64),
        Cell::Int(ed.n_max as u64),
        ed.free_energy_per_atom.into(),
        f.into(),
        (ed.free_energy_per_atom - f).into(),
        ed.photon_density.into(),
        gap.b0_sq.into(),
        ed.inversion.into(),
        ed.parity_residual.into(),
        ed.nsum_residual.into(),
        ed.ndiff_residual.into(),
        ed.truncation_shift.into(),
        mf.energies[0].into(),
        mf.energies[1].into(),
    ];
    cells.extend((0..s.k_gaps).map(|k| ed.gaps.get(k).map_or(Cell::Empty, |&g| Cell::Num(g))));
    Ok(cells)
}

/// Single-point table for `task`, as the scalar subcommands print it.
pub fn evaluate_point(task: Task, point: &Fixed, ed: EdSettings, partition: PartitionSettings, max_ed_dim: usize) -> TaskTable {
    let eval = Evaluator::new(ed, partition, max_ed_dim);
    TaskTable {
        task: Some(task),
        columns: all_columns(Some(task), &ed),
        rows: vec![eval.row(task, 0, point)],
    }
}

/// Evaluates every (task, grid point) pair. Rows come back in task order,
/// then row-major grid order, whatever the number of workers.
pub fn run_sweep(spec: &SweepSpec, opts: &RunOptions) -> Table {
    let points = grid(spec);
    if spec.tasks.is_empty() {
        return Table {
            tables: vec![TaskTable { task: None, columns: all_columns(None, &spec.ed), rows: Vec::new() }],
        };
    }
    let eval = Evaluator::new(spec.ed, spec.partition, opts.max_ed_dim);
    let jobs: Vec<(Task, usize)> = spec
        .tasks
        .iter()
        .flat_map(|&t| (0..points.len()).map(move |i| (t, i)))
        .collect();
    let work = || -> Vec<Vec<Cell>> {
        jobs.par_iter()
            .map(|&(task, i)| eval.row(task, i, &points[i]))
            .collect()
    };
    let rows = match opts.workers {
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(work),
            Err(_) => work(),
        },
        None => work(),
    };

    let mut rows = rows.into_iter();
    let tables = spec
        .tasks
        .iter()
        .map(|&task| TaskTable {
            task: Some(task),
            columns: all_columns(Some(task), &spec.ed),
            rows: rows.by_ref().take(points.len()).collect(),
        })
        .collect();
    Table { tables }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::parse_config;

    fn spec(doc: &str) -> SweepSpec {
        parse_config(doc.as_bytes()).unwrap()
    }

    const OPTS: RunOptions = RunOptions { workers: Some(2), max_ed_dim: 20_000 };

    #[test]
    fn grid_is_row_major() {
        let s = spec(
            r#"{"axes":[{"name":"g1","start":0,"stop":1,"count":2},
                        {"name":"beta","start":1,"stop":3,"count":3}]}"#,
        );
        let pts: Vec<(f64, f64)> = grid(&s).iter().map(|p| (p.g1, p.beta)).collect();
        assert_eq!(pts, vec![(0.0, 1.0), (0.0, 2.0), (0.0, 3.0), (1.0, 1.0), (1.0, 2.0), (1.0, 3.0)]);
    }

    #[test]
    fn no_axes_means_one_point() {
        assert_eq!(grid(&spec(r#"{"fixed":{"g1":0.3}}"#)).len(), 1);
    }

    #[test]
    fn rows_match_columns() {
        let s = spec(
            r#"{"axes":[{"name":"beta","start":0.5,"stop":4,"count":4}],
                "fixed":{"g1":0.6,"g2":0.6},
                "tasks":["critical","gap","spectrum","free-energy","partition","ed-compare"],
                "ed":{"n_atoms":2,"n_max":60,"k_gaps":3}}"#,
        );
        let t = run_sweep(&s, &OPTS);
        assert_eq!(t.tables.len(), 6);
        for table in &t.tables {
            assert_eq!(table.rows.len(), 4);
            for r in &table.rows {
                assert_eq!(r.len(), table.columns.len(), "{}", table.name());
            }
        }
        assert_eq!(t.error_count(), 0, "{:?}", t);
    }

    #[test]
    fn errors_are_captured_per_row() {
        // g1 + g2 = 0 at the first point: no critical temperature is defined
        let s = spec(r#"{"axes":[{"name":"g1","start":0,"stop":1,"count":2}],"tasks":["critical"]}"#);
        let t = run_sweep(&s, &OPTS);
        let rows = &t.tables[0].rows;
        assert!(matches!(rows[0].last(), Some(Cell::Text(m)) if m.contains("domain")));
        assert_eq!(rows[1].last(), Some(&Cell::Empty));
        assert_eq!(t.error_count(), 1);
    }

    #[test]
    fn empty_tasks_give_header_only_table() {
        let t = run_sweep(&spec(r#"{"tasks":[]}"#), &OPTS);
        assert_eq!(t.tables.len(), 1);
        assert!(t.tables[0].rows.is_empty());
        assert_eq!(t.tables[0].name(), "sweep");
    }

    #[test]
    fn worker_count_does_not_change_rows() {
        let s = spec(
            r#"{"axes":[{"name":"g1","start":0.1,"stop":1.5,"count":7},
                        {"name":"beta","start":0.5,"stop":6,"count":5}],
                "fixed":{"g2":0.3},"tasks":["gap","spectrum","free-energy"]}"#,
        );
        let one = run_sweep(&s, &RunOptions { workers: Some(1), ..OPTS });
        let many = run_sweep(&s, &RunOptions { workers: Some(5), ..OPTS });
        assert_eq!(one, many);
    }

    #[test]
    fn ed_dimension_cap_is_enforced() {
        let s = spec(r#"{"fixed":{"g1":0.3},"tasks":["ed-compare"],"ed":{"n_atoms":4,"n_max":30}}"#);
        let t = run_sweep(&s, &RunOptions { max_ed_dim: 100, ..OPTS });
        assert!(matches!(t.tables[0].rows[0].last(), Some(Cell::Text(m)) if m.contains("capacity")));
    }

    #[test]
    fn gate_never_exceeds_its_limit() {
        use std::sync::atomic::{AtomicUsize, Ordering};
        let gate = Gate::new(2);
        let active = AtomicUsize::new(0);
        let peak = AtomicUsize::new(0);
        (0..32).into_par_iter().for_each(|_| {
            let _pass = gate.enter();
            let now = active.fetch_add(1, Ordering::SeqCst) + 1;
            peak.fetch_max(now, Ordering::SeqCst);
            std::thread::sleep(std::time::Duration::from_millis(2));
            active.fetch_sub(1, Ordering::SeqCst);
        });
        assert!(peak.load(Ordering::SeqCst) <= 2);
    }
}
