//! Explicit Runge–Kutta integration of hierarchy flows with monitors.

use serde::Serialize;

use crate::error::{check_dim, Error, Result};
use crate::geometry::{Chart, ScalarField, VectorFieldHandle};
use crate::linalg::Mat;
use crate::systems::{LaxBuilder, LaxStructure};

/// Adaptive steps below this length abort the integration.
pub const DT_MIN: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Rk4,
    Rkf45,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct IntegratorConfig {
    pub method: Method,
    /// Fixed step for RK4, initial step for RKF45.
    pub dt: f64,
    pub atol: f64,
    pub rtol: f64,
    pub t_end: f64,
    pub record_every: usize,
}

impl IntegratorConfig {
    pub fn rk4(dt: f64, t_end: f64) -> Self {
        IntegratorConfig {
            method: Method::Rk4,
            dt,
            atol: 1e-10,
            rtol: 1e-10,
            t_end,
            record_every: 1,
        }
    }

    pub fn rkf45(atol: f64, rtol: f64, t_end: f64) -> Self {
        IntegratorConfig {
            method: Method::Rkf45,
            dt: t_end / 100.0,
            atol,
            rtol,
            t_end,
            record_every: 1,
        }
    }

    pub fn recording_every(mut self, k: usize) -> Self {
        self.record_every = k;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if !(self.dt > 0.0) {
            return bad(format!("dt must be positive, got {}", self.dt));
        }
        if !(self.t_end > 0.0) {
            return bad(format!("t_end must be positive, got {}", self.t_end));
        }
        if self.record_every == 0 {
            return bad("record_every must be at least 1".into());
        }
        if self.method == Method::Rkf45 {
            for (name, v) in [("atol", self.atol), ("rtol", self.rtol)] {
                if !(v > 0.0 && v <= 1e-2) {
                    return bad(format!("{name} must lie in (0, 1e-2], got {v}"));
                }
            }
        }
        Ok(())
    }
}

/// A quantity recorded along a trajectory.
#[derive(Clone, Debug)]
pub enum Monitor {
    Scalar(String, ScalarField),
    /// Sorted Lax eigenvalues, one column each.
    Spectrum(String, LaxBuilder),
}

impl Monitor {
    pub fn name(&self) -> &str {
        match self {
            Monitor::Scalar(n, _) | Monitor::Spectrum(n, _) => n,
        }
    }

    fn eval(&self, x: &[f64]) -> Result<Vec<f64>> {
        match self {
            Monitor::Scalar(_, f) => Ok(vec![f.value(x)?]),
            Monitor::Spectrum(_, l) => lax_eigenvalues(&l.matrix(x)?, l.structure),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MonitorSeries {
    pub name: String,
    /// One row per recorded time.
    pub values: Vec<Vec<f64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Truncation {
    pub t: f64,
    pub exclusion: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
    pub monitors: Vec<MonitorSeries>,
    pub truncated: Option<Truncation>,
    pub steps: usize,
}

impl Trajectory {
    pub fn last(&self) -> &[f64] {
        self.states.last().map(Vec::as_slice).unwrap_or(&[])
    }
}

fn axpy(x: &[f64], h: f64, k: &[f64]) -> Vec<f64> {
    x.iter().zip(k).map(|(a, b)| a + h * b).collect()
}

fn combo(x: &[f64], h: f64, terms: &[(f64, &[f64])]) -> Vec<f64> {
    let mut y = x.to_vec();
    for (c, k) in terms {
        for (yi, ki) in y.iter_mut().zip(k.iter()) {
            *yi += h * c * ki;
        }
    }
    y
}

fn rk4_step(f: &dyn Fn(&[f64]) -> Result<Vec<f64>>, x: &[f64], h: f64) -> Result<Vec<f64>> {
    let k1 = f(x)?;
    let k2 = f(&axpy(x, 0.5 * h, &k1))?;
    let k3 = f(&axpy(x, 0.5 * h, &k2))?;
    let k4 = f(&axpy(x, h, &k3))?;
    Ok(combo(x, h, &[(1.0 / 6.0, &k1), (1.0 / 3.0, &k2), (1.0 / 3.0, &k3), (1.0 / 6.0, &k4)]))
}

/// One Fehlberg step: the fifth-order solution and the scaled error norm.
fn rkf45_step(
    f: &dyn Fn(&[f64]) -> Result<Vec<f64>>,
    x: &[f64],
    h: f64,
    atol: f64,
    rtol: f64,
) -> Result<(Vec<f64>, f64)> {
    let k1 = f(x)?;
    let k2 = f(&combo(x, h, &[(0.25, &k1)]))?;
    let k3 = f(&combo(x, h, &[(3.0 / 32.0, &k1), (9.0 / 32.0, &k2)]))?;
    let k4 = f(&combo(
        x,
        h,
        &[(1932.0 / 2197.0, &k1), (-7200.0 / 2197.0, &k2), (7296.0 / 2197.0, &k3)],
    ))?;
    let k5 = f(&combo(
        x,
        h,
        &[(439.0 / 216.0, &k1), (-8.0, &k2), (3680.0 / 513.0, &k3), (-845.0 / 4104.0, &k4)],
    ))?;
    let k6 = f(&combo(
        x,
        h,
        &[
            (-8.0 / 27.0, &k1),
            (2.0, &k2),
            (-3544.0 / 2565.0, &k3),
            (1859.0 / 4104.0, &k4),
            (-11.0 / 40.0, &k5),
        ],
    ))?;
    let y4 = combo(
        x,
        h,
        &[(25.0 / 216.0, &k1), (1408.0 / 2565.0, &k3), (2197.0 / 4104.0, &k4), (-0.2, &k5)],
    );
    let y5 = combo(
        x,
        h,
        &[
            (16.0 / 135.0, &k1),
            (6656.0 / 12825.0, &k3),
            (28561.0 / 56430.0, &k4),
            (-9.0 / 50.0, &k5),
            (2.0 / 55.0, &k6),
        ],
    );
    let err = y4
        .iter()
        .zip(&y5)
        .zip(x)
        .map(|((a, b), x0)| (a - b).abs() / (atol + rtol * x0.abs().max(b.abs())))
        .fold(0.0, f64::max);
    Ok((y5, err))
}

struct Recorder<'a> {
    chart: &'a Chart,
    monitors: &'a [Monitor],
    traj: Trajectory,
}

impl Recorder<'_> {
    fn record(&mut self, t: f64, x: &[f64]) -> Result<()> {
        self.traj.times.push(t);
        self.traj.states.push(x.to_vec());
        for (series, m) in self.traj.monitors.iter_mut().zip(self.monitors) {
            series.values.push(m.eval(x)?);
        }
        Ok(())
    }

    /// Flags and stops when `x` leaves the admissible region.
    fn breached(&mut self, t: f64, x: &[f64]) -> bool {
        if let Some(name) = self.chart.violated(x) {
            log::warn!("trajectory left the chart at t = {t}: {name}");
            self.traj.truncated = Some(Truncation {
                t,
                exclusion: name.to_string(),
            });
            return true;
        }
        false
    }
}

/// Integrates `flow` from `x0` on `chart`. Leaving the admissible region ends
/// the trajectory early with [`Trajectory::truncated`] set.
pub fn integrate(
    flow: &VectorFieldHandle,
    chart: &Chart,
    x0: &[f64],
    cfg: &IntegratorConfig,
    monitors: &[Monitor],
) -> Result<Trajectory> {
    cfg.validate()?;
    check_dim(chart.dim(), x0.len())?;
    check_dim(chart.dim(), flow.dim())?;
    if let Some(name) = chart.violated(x0) {
        return Err(Error::ExclusionBreach {
            exclusion: name.to_string(),
            t: 0.0,
        });
    }
    let f = |x: &[f64]| flow.values(x);
    let mut rec = Recorder {
        chart,
        monitors,
        traj: Trajectory {
            times: Vec::new(),
            states: Vec::new(),
            monitors: monitors
                .iter()
                .map(|m| MonitorSeries {
                    name: m.name().to_string(),
                    values: Vec::new(),
                })
                .collect(),
            truncated: None,
            steps: 0,
        },
    };
    rec.record(0.0, x0)?;
    let mut x = x0.to_vec();
    let mut t = 0.0;
    match cfg.method {
        Method::Rk4 => {
            let steps = (cfg.t_end / cfg.dt).round().max(1.0) as usize;
            for s in 1..=steps {
                let h = if s == steps { cfg.t_end - t } else { cfg.dt };
                x = rk4_step(&f, &x, h)?;
                t = if s == steps { cfg.t_end } else { s as f64 * cfg.dt };
                rec.traj.steps = s;
                if rec.breached(t, &x) {
                    break;
                }
                if s % cfg.record_every == 0 || s == steps {
                    rec.record(t, &x)?;
                }
            }
        }
        Method::Rkf45 => {
            let mut h = cfg.dt.min(cfg.t_end);
            let mut accepted = 0usize;
            while t < cfg.t_end {
                let last = t + h >= cfg.t_end;
                if last {
                    h = cfg.t_end - t;
                }
                let (y, err) = rkf45_step(&f, &x, h, cfg.atol, cfg.rtol)?;
                if err <= 1.0 {
                    x = y;
                    t = if last { cfg.t_end } else { t + h };
                    accepted += 1;
                    rec.traj.steps = accepted;
                    if rec.breached(t, &x) {
                        break;
                    }
                    if accepted.is_multiple_of(cfg.record_every) || last {
                        rec.record(t, &x)?;
                    }
                }
                let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
                h *= factor;
                if h < DT_MIN && t < cfg.t_end {
                    return Err(Error::StepUnderflow { t, dt_min: DT_MIN });
                }
            }
        }
    }
    Ok(rec.traj)
}

/// Sorted eigenvalues of a symmetric Lax matrix.
pub fn lax_eigenvalues(l: &Mat<f64>, structure: LaxStructure) -> Result<Vec<f64>> {
    check_dim(l.rows, l.cols)?;
    for i in 0..l.rows {
        for j in 0..i {
            if l.get(i, j) != l.get(j, i) {
                return Err(Error::Domain(format!("{structure:?} Lax matrix is not symmetric at ({i}, {j})")));
            }
        }
    }
    crate::eigen::symmetric_eigenvalues(l)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Drift {
    pub name: String,
    pub max_drift: f64,
}

/// `max_t |Q(x(t)) − Q(x(0))|` for every monitored column, maximised per monitor.
pub fn conservation_report(traj: &Trajectory) -> Vec<Drift> {
    traj.monitors
        .iter()
        .map(|s| {
            let first = s.values.first().cloned().unwrap_or_default();
            let max_drift = s
                .values
                .iter()
                .flat_map(|row| row.iter().zip(&first).map(|(a, b)| (a - b).abs()))
                .fold(0.0, f64::max);
            Drift {
                name: s.name.clone(),
                max_drift,
            }
        })
        .collect()
}

/// Column names of a recorded trajectory: time, coordinates, then one per
/// monitor column.
pub fn trajectory_header(chart: &Chart, traj: &Trajectory) -> Vec<String> {
    let mut h = vec!["t".to_string()];
    h.extend(chart.coord_names.iter().cloned());
    for s in &traj.monitors {
        let width = s.values.first().map_or(0, Vec::len);
        if width == 1 {
            h.push(s.name.clone());
        } else {
            h.extend((0..width).map(|k| format!("{}_{k}", s.name)));
        }
    }
    h
}

/// Writes `traj` as CSV with [`trajectory_header`] columns.
pub fn write_trajectory_csv<W: std::io::Write>(w: W, chart: &Chart, traj: &Trajectory) -> Result<()> {
    let io = |e: csv::Error| Error::Io(e.to_string());
    let mut out = csv::Writer::from_writer(w);
    out.write_record(trajectory_header(chart, traj)).map_err(io)?;
    for (k, (t, x)) in traj.times.iter().zip(&traj.states).enumerate() {
        let mut row = vec![format!("{t:e}")];
        row.extend(x.iter().map(|v| format!("{v:e}")));
        for s in &traj.monitors {
            row.extend(s.values[k].iter().map(|v| format!("{v:e}")));
        }
        out.write_record(&row).map_err(io)?;
    }
    out.flush()?;
    Ok(())
}
