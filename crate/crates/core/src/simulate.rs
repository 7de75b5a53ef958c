//! Semi-implicit time integration of the shadow system
//! `u_t = ε²u_xx + u - u³ - αξ`, `τξ_t = ∫₀¹(βu - γξ)dx` with Neumann ends.
//!
//! Diffusion is backward Euler, reaction and the `ξ` equation are forward
//! Euler, and `ξ` is advanced from the pre-step `u`.

use std::io::{BufRead, Write};

use crate::analyze::{layer_positions, sign_changes};
use crate::error::{Error, Result};
use crate::oracle::trapezoid;
use crate::stationary::{build_profile, Params, Sign};
use crate::tridiag::TridiagonalLu;

pub const DEFAULT_NODES: usize = 201;
pub const DEFAULT_DT: f64 = 0.01;
pub const MAX_DT: f64 = 0.1;
pub const DEFAULT_XI0: f64 = 0.03;

/// Equispaced nodes on `[0, 1]`, both ends included.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Grid {
    nodes: usize,
}

impl Grid {
    pub fn new(nodes: usize) -> Result<Self> {
        if nodes < 3 {
            return Err(Error::InvalidParams(format!(
                "grid needs at least 3 nodes, got {nodes}"
            )));
        }
        Ok(Self { nodes })
    }

    pub fn nodes(&self) -> usize {
        self.nodes
    }

    pub fn dx(&self) -> f64 {
        1.0 / (self.nodes - 1) as f64
    }

    pub fn x(&self, i: usize) -> f64 {
        i as f64 / (self.nodes - 1) as f64
    }

    pub fn coordinates(&self) -> Vec<f64> {
        (0..self.nodes).map(|i| self.x(i)).collect()
    }

    /// `∫₀¹ v dx` by the trapezoid rule.
    pub fn integrate(&self, values: &[f64]) -> f64 {
        trapezoid(values, self.dx())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct State {
    pub u: Vec<f64>,
    pub xi: f64,
    pub t: f64,
}

/// A Gaussian `height·exp(-((x-center)/width)²)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Bump {
    pub height: f64,
    pub center: f64,
    pub width: f64,
}

impl Bump {
    pub const SINGLE_LAYER_DEFAULT: Bump = Bump {
        height: 0.35,
        center: 0.5,
        width: 0.1,
    };
    pub const TWO_LAYER_DEFAULT: Bump = Bump {
        height: 0.1,
        center: 0.5,
        width: 0.1,
    };

    pub fn eval(&self, x: f64) -> f64 {
        self.height * (-((x - self.center) / self.width).powi(2)).exp()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum InitialKind {
    /// `u_1^-` plus a bump.
    PerturbedSingleLayer(Bump),
    /// `u_2^-` plus a bump.
    NearTwoLayer(Bump),
    /// Node values supplied directly.
    Custom(Vec<f64>),
}

impl InitialKind {
    pub fn label(&self) -> &'static str {
        match self {
            InitialKind::PerturbedSingleLayer(_) => "perturbed-single-layer",
            InitialKind::NearTwoLayer(_) => "near-two-layer",
            InitialKind::Custom(_) => "custom",
        }
    }
}

pub fn make_initial(kind: &InitialKind, eps: f64, grid: &Grid, xi0: f64) -> Result<State> {
    if !xi0.is_finite() {
        return Err(Error::InvalidParams(format!("xi0 = {xi0} must be finite")));
    }
    let perturbed = |n: u32, bump: &Bump| -> Result<Vec<f64>> {
        if !(bump.width > 0.0 && bump.height.is_finite() && bump.center.is_finite()) {
            return Err(Error::InvalidParams(format!(
                "bump needs finite height/center and positive width, got {bump:?}"
            )));
        }
        let p = build_profile(eps, n, Sign::Minus)?;
        Ok((0..grid.nodes())
            .map(|i| {
                let x = grid.x(i);
                p.eval(x) + bump.eval(x)
            })
            .collect())
    };
    let u = match kind {
        InitialKind::PerturbedSingleLayer(b) => perturbed(1, b)?,
        InitialKind::NearTwoLayer(b) => perturbed(2, b)?,
        InitialKind::Custom(samples) => {
            if samples.len() != grid.nodes() {
                return Err(Error::InvalidParams(format!(
                    "custom initial data has {} samples, grid has {} nodes",
                    samples.len(),
                    grid.nodes()
                )));
            }
            if samples.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidParams(
                    "custom initial data is not finite".into(),
                ));
            }
            samples.clone()
        }
    };
    Ok(State { u, xi: xi0, t: 0.0 })
}

/// One time step of the scheme, with the implicit diffusion matrix factored once.
#[derive(Clone, Debug)]
pub struct Stepper {
    params: Params,
    grid: Grid,
    dt: f64,
    lu: TridiagonalLu,
}

impl Stepper {
    pub fn new(params: Params, grid: Grid, dt: f64) -> Result<Self> {
        if !(dt > 0.0 && dt <= MAX_DT) {
            return Err(Error::InvalidParams(format!(
                "dt = {dt} must lie in (0, {MAX_DT}]"
            )));
        }
        let n = grid.nodes();
        let a = dt * params.eps().powi(2) / grid.dx().powi(2);
        let mut lower = vec![-a; n];
        let mut upper = vec![-a; n];
        upper[0] = -2.0 * a;
        lower[n - 1] = -2.0 * a;
        let diag = vec![1.0 + 2.0 * a; n];
        let lu = TridiagonalLu::new(&lower, &diag, &upper)?;
        Ok(Self {
            params,
            grid,
            dt,
            lu,
        })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// Advances `state` in place to time `t_next`.
    pub fn advance(&self, state: &mut State, t_next: f64) -> Result<()> {
        let p = &self.params;
        let mean = self.grid.integrate(&state.u);
        let forcing = p.alpha() * state.xi;
        for v in state.u.iter_mut() {
            *v += self.dt * (*v - *v * *v * *v - forcing);
        }
        self.lu.solve_in_place(&mut state.u);
        state.xi += self.dt / p.tau() * (p.beta() * mean - p.gamma() * state.xi);
        if !state.xi.is_finite() || state.u.iter().any(|v| !v.is_finite()) {
            return Err(Error::BlowUp {
                last_finite_t: state.t,
            });
        }
        state.t = t_next;
        Ok(())
    }
}

/// A single step from `state`.
pub fn step(state: &State, params: &Params, grid: &Grid, dt: f64) -> Result<State> {
    let mut next = state.clone();
    Stepper::new(*params, *grid, dt)?.advance(&mut next, state.t + dt)?;
    Ok(next)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RunOptions {
    pub dt: f64,
    pub t_end: f64,
    /// Record every this many steps.
    pub record_stride: usize,
    /// Keep a full `u` snapshot every this many steps.
    pub snapshot_stride: Option<usize>,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            dt: DEFAULT_DT,
            t_end: 100.0,
            record_stride: 10,
            snapshot_stride: None,
        }
    }
}

/// Recorded time series of one run.
#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub mean_u: Vec<f64>,
    pub xi: Vec<f64>,
    /// `layers[l][k]`: position of layer `l` at record `k`, `None` once it is gone.
    pub layers: Vec<Vec<Option<f64>>>,
    pub snapshots: Vec<(f64, Vec<f64>)>,
    pub final_state: Option<State>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// CSV with header `t,mean_u,xi,layer_0,...`; a missing layer is an empty field.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        write!(w, "t,mean_u,xi")?;
        for l in 0..self.layers.len() {
            write!(w, ",layer_{l}")?;
        }
        writeln!(w)?;
        for k in 0..self.len() {
            write!(w, "{},{},{}", self.times[k], self.mean_u[k], self.xi[k])?;
            for layer in &self.layers {
                match layer[k] {
                    Some(x) => write!(w, ",{x}")?,
                    None => write!(w, ",")?,
                }
            }
            writeln!(w)?;
        }
        Ok(())
    }

    pub fn read_csv<R: BufRead>(r: R) -> Result<Self> {
        let mut lines = r.lines().enumerate();
        let header = match lines.next() {
            Some((_, line)) => line?,
            None => {
                return Err(Error::Parse {
                    line: 1,
                    msg: "empty trajectory file".into(),
                })
            }
        };
        let cols: Vec<&str> = header.trim().split(',').collect();
        if cols.len() < 3 || cols[..3] != ["t", "mean_u", "xi"] {
            return Err(Error::Parse {
                line: 1,
                msg: format!("expected header starting t,mean_u,xi, got {header:?}"),
            });
        }
        let n_layers = cols.len() - 3;
        let mut traj = Trajectory {
            times: Vec::new(),
            mean_u: Vec::new(),
            xi: Vec::new(),
            layers: vec![Vec::new(); n_layers],
            snapshots: Vec::new(),
            final_state: None,
        };
        for (idx, line) in lines {
            let line = line?;
            let line_no = idx + 1;
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.trim().split(',').collect();
            if fields.len() != cols.len() {
                return Err(Error::Parse {
                    line: line_no,
                    msg: format!("expected {} fields, got {}", cols.len(), fields.len()),
                });
            }
            let num = |s: &str| -> Result<f64> {
                s.trim().parse::<f64>().map_err(|e| Error::Parse {
                    line: line_no,
                    msg: format!("{s:?}: {e}"),
                })
            };
            let t = num(fields[0])?;
            if traj.times.last().is_some_and(|&prev| t <= prev) {
                return Err(Error::Parse {
                    line: line_no,
                    msg: "times must be strictly increasing".into(),
                });
            }
            traj.times.push(t);
            traj.mean_u.push(num(fields[1])?);
            traj.xi.push(num(fields[2])?);
            for (l, f) in fields[3..].iter().enumerate() {
                traj.layers[l].push(if f.trim().is_empty() {
                    None
                } else {
                    Some(num(f)?)
                });
            }
        }
        Ok(traj)
    }

    /// Snapshot matrix: first row `x` then the node coordinates, then one
    /// row per snapshot, `t` followed by the node values.
    pub fn write_snapshots_csv<W: Write>(&self, grid: &Grid, mut w: W) -> Result<()> {
        write!(w, "x")?;
        for x in grid.coordinates() {
            write!(w, ",{x}")?;
        }
        writeln!(w)?;
        for (t, u) in &self.snapshots {
            write!(w, "{t}")?;
            for v in u {
                write!(w, ",{v}")?;
            }
            writeln!(w)?;
        }
        Ok(())
    }
}

/// Integrates from `initial` to `t_end`, recording every `record_stride`
/// steps (and always the first and last step).
pub fn run(initial: &State, params: &Params, grid: &Grid, opts: &RunOptions) -> Result<Trajectory> {
    if !(opts.t_end > 0.0 && opts.t_end.is_finite()) {
        return Err(Error::InvalidParams(format!(
            "t_end = {} must be positive: nothing to run",
            opts.t_end
        )));
    }
    if opts.record_stride == 0 || opts.snapshot_stride == Some(0) {
        return Err(Error::InvalidParams("strides must be positive".into()));
    }
    if initial.u.len() != grid.nodes() {
        return Err(Error::InvalidParams(format!(
            "initial state has {} values, grid has {} nodes",
            initial.u.len(),
            grid.nodes()
        )));
    }
    let stepper = Stepper::new(*params, *grid, opts.dt)?;
    let steps = (opts.t_end / opts.dt).round().max(1.0) as usize;
    let t0 = initial.t;

    let mut state = initial.clone();
    let mut reference: Vec<f64> = sign_changes(&state.u, grid);
    let mut traj = Trajectory {
        times: Vec::new(),
        mean_u: Vec::new(),
        xi: Vec::new(),
        layers: vec![Vec::new(); reference.len()],
        snapshots: Vec::new(),
        final_state: None,
    };

    let record = |state: &State, traj: &mut Trajectory, reference: &mut Vec<f64>| {
        traj.times.push(state.t);
        traj.mean_u.push(grid.integrate(&state.u));
        traj.xi.push(state.xi);
        let found = layer_positions(&state.u, grid, reference);
        for (l, pos) in found.iter().enumerate() {
            traj.layers[l].push(*pos);
            if let Some(x) = pos {
                reference[l] = *x;
            }
        }
    };

    record(&state, &mut traj, &mut reference);
    if opts.snapshot_stride.is_some() {
        traj.snapshots.push((state.t, state.u.clone()));
    }
    for k in 1..=steps {
        stepper.advance(&mut state, t0 + k as f64 * opts.dt)?;
        if k % opts.record_stride == 0 || k == steps {
            record(&state, &mut traj, &mut reference);
        }
        if let Some(s) = opts.snapshot_stride {
            if k % s == 0 || k == steps {
                traj.snapshots.push((state.t, state.u.clone()));
            }
        }
    }
    traj.final_state = Some(state);
    Ok(traj)
}
