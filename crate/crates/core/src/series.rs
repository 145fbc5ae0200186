//! Tabular results: simulation runs and the data behind Figures 1–6.

use std::fmt::Write as _;
use std::io;

use serde::Serialize;

use crate::dynamics::{
    concurrence, evolve, f_and_g_series, outer_coherence_ratio, BathType, CouplingScaling, ModelParams, TwoQubitState,
};
use crate::error::{Error, Result};
use crate::limits::{c_infinity, f_infinite_n, gaussian_envelope, QuadratureSpec};

/// Named float columns plus `key = value` metadata.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TimeSeries {
    pub metadata: Vec<(String, String)>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl TimeSeries {
    pub fn new<S: Into<String>>(columns: impl IntoIterator<Item = S>) -> Self {
        TimeSeries { metadata: Vec::new(), columns: columns.into_iter().map(Into::into).collect(), rows: Vec::new() }
    }

    pub fn push_meta(&mut self, key: impl Into<String>, value: impl ToString) {
        self.metadata.push((key.into(), value.to_string()));
    }

    pub fn push_row(&mut self, row: Vec<f64>) -> Result<()> {
        if row.len() != self.columns.len() {
            return Err(Error::LengthMismatch(row.len(), self.columns.len()));
        }
        self.rows.push(row);
        Ok(())
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let idx = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[idx]).collect())
    }

    /// One `#` metadata line, the column names, then rows with 17
    /// significant digits per value.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("#");
        for (k, v) in &self.metadata {
            let _ = write!(out, " {k}={v}");
        }
        out.push('\n');
        out.push_str(&self.columns.join(","));
        out.push('\n');
        for row in &self.rows {
            // + 0.0 folds −0 into 0
            let cells: Vec<String> = row.iter().map(|v| format!("{:.16e}", v + 0.0)).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }

    pub fn write_csv<W: io::Write>(&self, mut w: W) -> io::Result<()> {
        w.write_all(self.to_csv().as_bytes())
    }
}

/// Records every model parameter as metadata.
pub fn push_params_meta(series: &mut TimeSeries, p: &ModelParams) {
    series.push_meta("lambda", p.lambda);
    series.push_meta("delta", p.delta);
    series.push_meta("gamma", p.gamma);
    series.push_meta("mu", p.mu);
    series.push_meta("h", p.h);
    series.push_meta("beta", p.beta);
    series.push_meta("n_bath", p.n_bath);
    series.push_meta("bath", bath_name(p.bath));
    series.push_meta("scaling", scaling_name(p.scaling));
}

pub fn bath_name(b: BathType) -> &'static str {
    match b {
        BathType::DeltaZ => "deltaz",
        BathType::SigmaZ => "sigmaz",
    }
}

pub fn scaling_name(s: CouplingScaling) -> &'static str {
    match s {
        CouplingScaling::SqrtN => "sqrtn",
        CouplingScaling::LinearN => "linearn",
    }
}

/// Evenly spaced grid `start, …, stop` with `steps` points.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Grid {
    pub start: f64,
    pub stop: f64,
    pub steps: usize,
}

impl Grid {
    pub fn new(start: f64, stop: f64, steps: usize) -> Result<Self> {
        let g = Grid { start, stop, steps };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        if self.steps < 2 {
            return Err(Error::Domain(format!("steps must be ≥ 2, got {}", self.steps)));
        }
        if !(self.start >= 0.0 && self.stop > self.start && self.stop.is_finite()) {
            return Err(Error::Domain(format!("need stop > start ≥ 0, got [{}, {}]", self.start, self.stop)));
        }
        Ok(())
    }

    pub fn points(&self) -> Vec<f64> {
        let span = self.stop - self.start;
        let last = (self.steps - 1) as f64;
        (0..self.steps)
            .map(|i| if i + 1 == self.steps { self.stop } else { self.start + span * i as f64 / last })
            .collect()
    }
}

/// Column names of [`simulate`].
pub const SIMULATE_COLUMNS: [&str; 18] = [
    "t",
    "re_rho11",
    "im_rho11",
    "re_rho14",
    "im_rho14",
    "re_rho41",
    "im_rho41",
    "re_rho44",
    "im_rho44",
    "re_rho22",
    "im_rho22",
    "re_rho23",
    "im_rho23",
    "re_rho32",
    "im_rho32",
    "re_rho33",
    "im_rho33",
    "concurrence",
];

/// Evolves `rho0` over `grid` and tabulates the block entries and the
/// concurrence.
pub fn simulate(params: &ModelParams, rho0: &TwoQubitState, grid: &Grid) -> Result<TimeSeries> {
    grid.validate()?;
    let times = grid.points();
    let states = evolve(params, rho0, &times)?;
    let mut series = TimeSeries::new(SIMULATE_COLUMNS);
    push_params_meta(&mut series, params);
    push_grid_meta(&mut series, grid);
    for (t, s) in times.iter().zip(&states) {
        let mut row = vec![*t];
        // BLOCK_PATTERN order: 11, 14, 41, 44, 22, 23, 32, 33
        for (i, j) in crate::dynamics::BLOCK_PATTERN {
            let z = s.get(i, j);
            row.push(z.re);
            row.push(z.im);
        }
        row.push(concurrence(s));
        series.push_row(row)?;
    }
    Ok(series)
}

fn push_grid_meta(series: &mut TimeSeries, grid: &Grid) {
    series.push_meta("start", grid.start);
    series.push_meta("stop", grid.stop);
    series.push_meta("steps", grid.steps);
}

/// Starting state of a run.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum InitialState {
    /// (|−−⟩ + |++⟩)/√2
    BellOuter,
    /// (|−+⟩ + |+−⟩)/√2
    BellInner,
}

impl InitialState {
    pub fn state(self) -> TwoQubitState {
        match self {
            InitialState::BellOuter => TwoQubitState::bell_outer(),
            InitialState::BellInner => TwoQubitState::bell_inner(),
        }
    }
}

/// Parameters and grid that produce one figure. For the sweeps (5 and 6) the
/// grid runs over λ or γ instead of time.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FigureSetup {
    pub id: u8,
    pub params: ModelParams,
    pub grid: Grid,
    pub initial: InitialState,
}

pub const DEFAULT_POINTS: usize = 400;

pub fn figure_defaults(id: u8) -> Result<FigureSetup> {
    let base = ModelParams { n_bath: 100, beta: 1.0, ..Default::default() };
    let grid = |stop: f64| Grid { start: 0.0, stop, steps: DEFAULT_POINTS };
    let (params, grid, initial) = match id {
        1 => (ModelParams { gamma: 2.0, h: 1.0, mu: 4.0, ..base }, grid(2.0), InitialState::BellOuter),
        2 => (ModelParams { gamma: 4.0, h: 4.0, lambda: 2.0, ..base }, grid(5.0), InitialState::BellInner),
        3 => (ModelParams { gamma: 1.0, h: 1.0, lambda: 2.0, ..base }, grid(10.0), InitialState::BellInner),
        4 => (ModelParams { gamma: 1.0, h: 0.0, lambda: 2.0, ..base }, grid(10.0), InitialState::BellInner),
        5 => (ModelParams { gamma: 2.0, h: 0.0, ..base }, grid(4.0), InitialState::BellInner),
        6 => (
            ModelParams { lambda: 2.0, h: 0.0, ..base },
            Grid { start: 0.1, stop: 10.0, steps: DEFAULT_POINTS },
            InitialState::BellInner,
        ),
        _ => return Err(Error::Domain(format!("figure id must be 1..=6, got {id}"))),
    };
    Ok(FigureSetup { id, params, grid, initial })
}

/// Builds the data series for a figure.
///
/// - Figure 1: outer coherence ratio, concurrence, and the N → ∞ Gaussian
///   envelope.
/// - Figures 2 and 3: f, g and the concurrence of the inner Bell state.
/// - Figure 4: as 2 and 3, plus the N → ∞ curves f_inf,
///   concurrence_inf = 1 − f_inf and the constant C(∞).
/// - Figures 5 and 6: C(∞) against λ and against γ.
pub fn figure(setup: &FigureSetup) -> Result<TimeSeries> {
    let p = &setup.params;
    p.validate()?;
    setup.grid.validate()?;
    let xs = setup.grid.points();
    let mut series = match setup.id {
        1 => {
            let mut s = TimeSeries::new([
                "t",
                "re_rho14_ratio",
                "im_rho14_ratio",
                "concurrence",
                "envelope_inf",
                "re_rho14_ratio_inf",
            ]);
            let states = evolve(p, &setup.initial.state(), &xs)?;
            for (&t, state) in xs.iter().zip(&states) {
                let ratio = outer_coherence_ratio(p, t)?;
                let env = gaussian_envelope(p, t)?;
                s.push_row(vec![t, ratio.re, ratio.im, concurrence(state), env, env * (4.0 * p.mu * t).cos()])?;
            }
            s
        }
        2..=4 => {
            let with_limit = setup.id == 4;
            let mut cols = vec!["t", "re_f", "im_f", "g", "concurrence"];
            if with_limit {
                cols.extend(["f_inf", "concurrence_inf", "c_infinity"]);
            }
            let mut s = TimeSeries::new(cols);
            let fg = f_and_g_series(p, &xs)?;
            let states = evolve(p, &setup.initial.state(), &xs)?;
            let c_inf = if with_limit { c_infinity(p.lambda, p.gamma)? } else { 0.0 };
            for ((&t, (f, g)), state) in xs.iter().zip(fg).zip(&states) {
                let mut row = vec![t, f.re, f.im, g, concurrence(state)];
                if with_limit {
                    let f_inf = f_infinite_n(p.lambda, p.gamma, t, QuadratureSpec::for_time(p.gamma, t))?;
                    row.extend([f_inf, 1.0 - f_inf, c_inf]);
                }
                s.push_row(row)?;
            }
            s
        }
        5 => {
            let mut s = TimeSeries::new(["lambda", "c_infinity"]);
            for &l in &xs {
                s.push_row(vec![l, c_infinity(l, p.gamma)?])?;
            }
            s
        }
        6 => {
            let mut s = TimeSeries::new(["gamma", "c_infinity"]);
            for &g in &xs {
                s.push_row(vec![g, c_infinity(p.lambda, g)?])?;
            }
            s
        }
        id => return Err(Error::Domain(format!("figure id must be 1..=6, got {id}"))),
    };
    let mut meta = TimeSeries::new(Vec::<String>::new());
    meta.push_meta("figure", setup.id);
    push_params_meta(&mut meta, p);
    meta.push_meta(
        "initial",
        match setup.initial {
            InitialState::BellOuter => "bell-outer",
            InitialState::BellInner => "bell-inner",
        },
    );
    push_grid_meta(&mut meta, &setup.grid);
    series.metadata = meta.metadata;
    Ok(series)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_points() {
        let g = Grid::new(0.0, 1.0, 5).unwrap();
        assert_eq!(g.points(), vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        assert!(Grid::new(0.0, 1.0, 1).is_err());
        assert!(Grid::new(1.0, 1.0, 3).is_err());
        assert!(Grid::new(-1.0, 1.0, 3).is_err());
    }

    #[test]
    fn csv_layout() {
        let mut s = TimeSeries::new(["a", "b"]);
        s.push_meta("k", 1.5);
        s.push_row(vec![0.1, -2.0]).unwrap();
        assert!(s.push_row(vec![1.0]).is_err());
        let csv = s.to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "# k=1.5");
        assert_eq!(lines[1], "a,b");
        assert_eq!(lines[2], "1.0000000000000001e-1,-2.0000000000000000e0");
        // 17 significant digits round-trip exactly
        let back: f64 = lines[2].split(',').next().unwrap().parse().unwrap();
        assert_eq!(back, 0.1);
    }

    #[test]
    fn simulate_examples() {
        let grid = Grid::new(0.0, 3.0, 7).unwrap();
        let p = ModelParams { mu: 0.7, lambda: 0.3, n_bath: 10, ..Default::default() };
        let s = simulate(&p, &TwoQubitState::bell_outer(), &grid).unwrap();
        assert!(s.column("concurrence").unwrap().iter().all(|&c| (c - 1.0).abs() < 1e-12));

        let p = ModelParams { gamma: 1.0, lambda: 2.0, h: 1.0, beta: 1.0, n_bath: 20, ..Default::default() };
        let s = simulate(&p, &TwoQubitState::bell_inner(), &grid).unwrap();
        assert!((s.column("concurrence").unwrap()[0] - 1.0).abs() < 1e-12);
        let r23 = s.column("re_rho23").unwrap()[0];
        assert!((r23 - 0.5).abs() < 1e-14, "{r23}");
        assert_eq!(s.columns.len(), SIMULATE_COLUMNS.len());

        let mut m = *TwoQubitState::maximally_mixed().matrix();
        m[(0, 1)] = num_complex::Complex64::new(0.1, 0.0);
        m[(1, 0)] = num_complex::Complex64::new(0.1, 0.0);
        let bad = TwoQubitState::from_matrix_unchecked(m);
        assert!(matches!(simulate(&p, &bad, &grid), Err(Error::NotBlockForm(_))));
    }

    #[test]
    fn figure_1_concurrence_is_envelope() {
        let mut setup = figure_defaults(1).unwrap();
        setup.grid.steps = 60;
        let s = figure(&setup).unwrap();
        let re = s.column("re_rho14_ratio").unwrap();
        let im = s.column("im_rho14_ratio").unwrap();
        let c = s.column("concurrence").unwrap();
        for i in 0..re.len() {
            assert!((re[i].hypot(im[i]) - c[i]).abs() < 1e-12);
            assert!(re[i].abs() <= c[i] + 1e-12);
        }
    }

    #[test]
    fn figure_sweeps() {
        let s = figure(&figure_defaults(5).unwrap()).unwrap();
        assert_eq!(s.rows[0], vec![0.0, 0.0]);
        let c = s.column("c_infinity").unwrap();
        assert!(c.windows(2).all(|w| w[1] > w[0]));

        let s = figure(&figure_defaults(6).unwrap()).unwrap();
        let c = s.column("c_infinity").unwrap();
        assert!(c.windows(2).all(|w| w[1] < w[0]));
        assert!(figure_defaults(7).is_err());
    }

    #[test]
    fn figure_4_tends_to_asymptote() {
        let mut setup = figure_defaults(4).unwrap();
        setup.grid = Grid::new(0.0, 10.0, 41).unwrap();
        let s = figure(&setup).unwrap();
        let c_inf = s.column("c_infinity").unwrap()[0];
        assert!((c_inf - 0.971300865).abs() < 1e-8);
        let tail = s.column("concurrence_inf").unwrap();
        assert!((tail.last().unwrap() - c_inf).abs() < 0.01);
    }

    #[test]
    fn csv_is_deterministic() {
        let mut setup = figure_defaults(3).unwrap();
        setup.grid.steps = 25;
        assert_eq!(figure(&setup).unwrap().to_csv(), figure(&setup).unwrap().to_csv());
    }
}
