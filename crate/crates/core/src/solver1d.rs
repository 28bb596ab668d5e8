//! First-order finite-volume shock tube driven by the wave-speed estimator.
//!
//! Interfaces use the local Lax-Friedrichs (Rusanov) flux with the certified
//! `lambda_max` as dissipation coefficient; time integration is the
//! three-stage strong-stability-preserving Runge-Kutta scheme. Every stage
//! records how many estimator calls it made and how many bracket updates
//! they needed, so the cost of the iterative part can be tracked over time.

use std::io::{self, Write};
use std::ops::AddAssign;

use crate::eos::{GasParams, PrimitiveState};
use crate::error::{Error, Result};
use crate::estimator::{estimate_lambda_max, EstimatorConfig};
use crate::fmt::g17;
use crate::scalar::Real;

/// Density, momentum and total energy per unit volume.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ConservedState<T> {
    pub rho: T,
    pub m: T,
    pub energy: T,
}

impl<T: Real> ConservedState<T> {
    pub fn new(rho: T, m: T, energy: T) -> Self {
        Self { rho, m, energy }
    }

    pub fn from_primitive(s: &PrimitiveState<T>, gas: &GasParams<T>) -> Self {
        let half = T::lit(0.5);
        let rho_e = s.p * (T::one() - gas.b * s.rho) / (gas.gamma - T::one());
        Self {
            rho: s.rho,
            m: s.rho * s.u,
            energy: rho_e + half * s.rho * s.u * s.u,
        }
    }

    /// `rho e = E - m^2 / (2 rho)`.
    pub fn internal_energy_density(&self) -> T {
        self.energy - T::lit(0.5) * self.m * self.m / self.rho
    }

    /// Specific internal energy `e`.
    pub fn internal_energy(&self) -> T {
        self.internal_energy_density() / self.rho
    }

    pub fn to_primitive(&self, gas: &GasParams<T>) -> PrimitiveState<T> {
        let p =
            (gas.gamma - T::one()) * self.internal_energy_density() / (T::one() - gas.b * self.rho);
        PrimitiveState::new(self.rho, self.m / self.rho, p)
    }

    /// Physical flux `(m, m u + p, u (E + p))`.
    pub fn flux(&self, gas: &GasParams<T>) -> [T; 3] {
        let s = self.to_primitive(gas);
        [self.m, self.m * s.u + s.p, s.u * (self.energy + s.p)]
    }

    /// `None` when the state is physical, otherwise a short reason.
    pub fn violation(&self, gas: &GasParams<T>) -> Option<String> {
        if !(self.rho.is_finite() && self.m.is_finite() && self.energy.is_finite()) {
            return Some("non-finite state".into());
        }
        if self.rho <= T::zero() {
            return Some(format!("density {} <= 0", self.rho));
        }
        if T::one() - gas.b * self.rho <= T::zero() {
            return Some(format!("1 - b rho = {} <= 0", T::one() - gas.b * self.rho));
        }
        let e = self.internal_energy();
        if e < T::zero() {
            return Some(format!("internal energy {e} < 0"));
        }
        None
    }

    fn axpy(&self, a: T, d: &[T; 3]) -> Self {
        Self::new(
            self.rho + a * d[0],
            self.m + a * d[1],
            self.energy + a * d[2],
        )
    }

    fn blend(&self, wa: T, other: &Self, wb: T) -> Self {
        Self::new(
            wa * self.rho + wb * other.rho,
            wa * self.m + wb * other.m,
            wa * self.energy + wb * other.energy,
        )
    }
}

/// Uniform grid on `[x_lo, x_hi]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid1D<T> {
    pub dx: T,
    pub x_lo: T,
    pub x_hi: T,
    pub field: Vec<ConservedState<T>>,
}

impl<T: Real> Grid1D<T> {
    pub fn new(x_lo: T, x_hi: T, cells: usize) -> Result<Self> {
        if cells < 2 {
            return Err(Error::InvalidArgument(format!(
                "need at least 2 cells, got {cells}"
            )));
        }
        if !(x_hi > x_lo) {
            return Err(Error::InvalidArgument("empty domain".into()));
        }
        Ok(Self {
            dx: (x_hi - x_lo) / T::from_usize(cells).unwrap(),
            x_lo,
            x_hi,
            field: vec![ConservedState::default(); cells],
        })
    }

    pub fn cells(&self) -> usize {
        self.field.len()
    }

    pub fn center(&self, i: usize) -> T {
        self.x_lo + (T::from_usize(i).unwrap() + T::lit(0.5)) * self.dx
    }

    /// Sum of each conserved component times `dx`.
    pub fn totals(&self) -> [T; 3] {
        let mut t = [T::zero(); 3];
        for c in &self.field {
            t[0] = t[0] + c.rho * self.dx;
            t[1] = t[1] + c.m * self.dx;
            t[2] = t[2] + c.energy * self.dx;
        }
        t
    }
}

/// Estimator usage over one Runge-Kutta stage.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct OverheadCounters {
    /// Estimator calls.
    pub n_tot: usize,
    /// Bracket updates performed past initialization.
    pub n_iter: usize,
}

impl OverheadCounters {
    pub fn overhead(&self) -> f64 {
        if self.n_tot == 0 {
            0.0
        } else {
            self.n_iter as f64 / self.n_tot as f64
        }
    }
}

impl AddAssign for OverheadCounters {
    fn add_assign(&mut self, rhs: Self) {
        self.n_tot += rhs.n_tot;
        self.n_iter += rhs.n_iter;
    }
}

/// Local Lax-Friedrichs flux between two cells. Returns the flux, the
/// dissipation coefficient used and the estimator counters of this call.
pub fn llf_flux<T: Real>(
    left: &ConservedState<T>,
    right: &ConservedState<T>,
    gas: &GasParams<T>,
    cfg: &EstimatorConfig<T>,
) -> Result<([T; 3], T, OverheadCounters)> {
    let (pl, pr) = (left.to_primitive(gas), right.to_primitive(gas));
    let est = estimate_lambda_max(&pl, &pr, gas, cfg)?;
    let lambda = est.lambda_max_upper();
    let (fl, fr) = (left.flux(gas), right.flux(gas));
    let half = T::lit(0.5);
    let jump = [
        right.rho - left.rho,
        right.m - left.m,
        right.energy - left.energy,
    ];
    let mut f = [T::zero(); 3];
    for k in 0..3 {
        f[k] = half * (fl[k] + fr[k]) - half * lambda * jump[k];
    }
    Ok((
        f,
        lambda,
        OverheadCounters {
            n_tot: 1,
            n_iter: est.iterations,
        },
    ))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ShockTubeCase<T> {
    /// `(1, 0, 1 | 0.125, 0, 0.1)`, `gamma = 7/5`.
    Sod,
    /// `(1, 0, 0.1 | 0.001, 0, 1e-10)`, `gamma = 5/3`.
    Leblanc,
    Custom {
        left: PrimitiveState<T>,
        right: PrimitiveState<T>,
        gas: GasParams<T>,
    },
}

impl<T: Real> ShockTubeCase<T> {
    pub fn name(&self) -> &'static str {
        match self {
            ShockTubeCase::Sod => "sod",
            ShockTubeCase::Leblanc => "leblanc",
            ShockTubeCase::Custom { .. } => "custom",
        }
    }

    /// Left state, right state and gas.
    pub fn data(&self) -> (PrimitiveState<T>, PrimitiveState<T>, GasParams<T>) {
        let l = T::lit;
        match *self {
            ShockTubeCase::Sod => (
                PrimitiveState::new(l(1.0), l(0.0), l(1.0)),
                PrimitiveState::new(l(0.125), l(0.0), l(0.1)),
                GasParams {
                    gamma: l(1.4),
                    b: l(0.0),
                },
            ),
            ShockTubeCase::Leblanc => (
                PrimitiveState::new(l(1.0), l(0.0), l(0.1)),
                PrimitiveState::new(l(0.001), l(0.0), l(1e-10)),
                GasParams {
                    gamma: l(5.0) / l(3.0),
                    b: l(0.0),
                },
            ),
            ShockTubeCase::Custom { left, right, gas } => (left, right, gas),
        }
    }

    pub fn default_cfl(&self) -> T {
        match self {
            ShockTubeCase::Leblanc => T::lit(0.25),
            _ => T::lit(0.5),
        }
    }

    pub fn default_t_end(&self) -> T {
        match self {
            ShockTubeCase::Leblanc => T::lit(0.4),
            _ => T::lit(0.2),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShockTubeConfig<T> {
    pub case: ShockTubeCase<T>,
    pub cells: usize,
    pub cfl: T,
    pub t_end: T,
    pub estimator: EstimatorConfig<T>,
    /// Stop after this many time steps even if `t_end` is not reached.
    pub max_steps: usize,
}

impl<T: Real> ShockTubeConfig<T> {
    pub fn new(case: ShockTubeCase<T>, cells: usize) -> Self {
        Self {
            case,
            cells,
            cfl: case.default_cfl(),
            t_end: case.default_t_end(),
            estimator: EstimatorConfig::default(),
            max_steps: 1_000_000,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.cells < 10 {
            return Err(Error::InvalidArgument(format!(
                "need at least 10 cells, got {}",
                self.cells
            )));
        }
        if !(self.cfl > T::zero() && self.cfl <= T::one()) {
            return Err(Error::InvalidArgument(format!(
                "cfl must lie in (0, 1], got {}",
                self.cfl
            )));
        }
        if !(self.t_end > T::zero() && self.t_end.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "t_end must be positive, got {}",
                self.t_end
            )));
        }
        self.estimator.validate()
    }
}

/// One Runge-Kutta stage of the run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SubstepRecord<T> {
    /// 1-based stage counter over the whole run.
    pub substep: usize,
    /// Time at the start of the enclosing step.
    pub t: T,
    pub dt: T,
    pub counters: OverheadCounters,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ShockTubeRun<T> {
    pub grid: Grid1D<T>,
    pub gas: GasParams<T>,
    pub t: T,
    pub steps: usize,
    pub series: Vec<SubstepRecord<T>>,
}

impl<T: Real> ShockTubeRun<T> {
    /// Mean overhead over the 1-based sub-step range `[first, last]`.
    pub fn mean_overhead(&self, first: usize, last: usize) -> Option<f64> {
        let sel: Vec<f64> = self
            .series
            .iter()
            .filter(|r| r.substep >= first && r.substep <= last)
            .map(|r| r.counters.overhead())
            .collect();
        if sel.is_empty() {
            None
        } else {
            Some(sel.iter().sum::<f64>() / sel.len() as f64)
        }
    }

    pub fn total_counters(&self) -> OverheadCounters {
        let mut c = OverheadCounters::default();
        for r in &self.series {
            c += r.counters;
        }
        c
    }
}

fn check_cells<T: Real>(
    field: &[ConservedState<T>],
    gas: &GasParams<T>,
    substep: usize,
) -> Result<()> {
    for (cell, c) in field.iter().enumerate() {
        if let Some(reason) = c.violation(gas) {
            return Err(Error::CellInvariant {
                cell,
                substep,
                reason,
            });
        }
    }
    Ok(())
}

/// `-dF/dx` with transmissive boundaries, plus the largest interface speed.
fn residual<T: Real>(
    field: &[ConservedState<T>],
    dx: T,
    gas: &GasParams<T>,
    cfg: &EstimatorConfig<T>,
    out: &mut Vec<[T; 3]>,
    fluxes: &mut Vec<[T; 3]>,
) -> Result<(T, OverheadCounters)> {
    let n = field.len();
    let mut counters = OverheadCounters::default();
    let mut speed = T::zero();
    fluxes.clear();
    for i in 0..=n {
        let l = &field[i.saturating_sub(1)];
        let r = &field[i.min(n - 1)];
        let (f, lambda, c) = llf_flux(l, r, gas, cfg)?;
        counters += c;
        speed = speed.max(lambda);
        fluxes.push(f);
    }
    out.clear();
    for i in 0..n {
        let (a, b) = (fluxes[i], fluxes[i + 1]);
        out.push([(a[0] - b[0]) / dx, (a[1] - b[1]) / dx, (a[2] - b[2]) / dx]);
    }
    Ok((speed, counters))
}

/// Sets the initial discontinuity at the middle of the grid.
pub fn initial_grid<T: Real>(
    left: &PrimitiveState<T>,
    right: &PrimitiveState<T>,
    gas: &GasParams<T>,
    cells: usize,
) -> Result<Grid1D<T>> {
    let mut grid = Grid1D::new(T::zero(), T::one(), cells)?;
    let mid = T::lit(0.5);
    let (ul, ur) = (
        ConservedState::from_primitive(left, gas),
        ConservedState::from_primitive(right, gas),
    );
    for i in 0..cells {
        grid.field[i] = if grid.center(i) < mid { ul } else { ur };
    }
    Ok(grid)
}

/// Runs the shock tube to `t_end` on `[0, 1]` with the interface at 0.5.
/// Any cell leaving the admissible set aborts the run.
pub fn run_shocktube<T: Real>(cfg: &ShockTubeConfig<T>) -> Result<ShockTubeRun<T>> {
    cfg.validate()?;
    let (left, right, gas) = cfg.case.data();
    let gas = GasParams::new(gas.gamma, gas.b)?;
    let mut grid = initial_grid(&left, &right, &gas, cfg.cells)?;
    check_cells(&grid.field, &gas, 0)?;

    let est = &cfg.estimator;
    let dx = grid.dx;
    let (third, two_thirds, quarter, three_quarters) = (
        T::lit(1.0 / 3.0),
        T::lit(2.0 / 3.0),
        T::lit(0.25),
        T::lit(0.75),
    );
    let mut series = Vec::new();
    let mut t = T::zero();
    let mut steps = 0;
    let mut substep = 0;
    let mut rhs = Vec::with_capacity(cfg.cells);
    let mut fluxes = Vec::with_capacity(cfg.cells + 1);

    while t < cfg.t_end && steps < cfg.max_steps {
        let u0 = grid.field.clone();

        let (speed, c1) = residual(&u0, dx, &gas, est, &mut rhs, &mut fluxes)?;
        if !(speed > T::zero()) {
            return Err(Error::InvalidArgument("all interface speeds vanish".into()));
        }
        let dt = (cfg.cfl * dx / speed).min(cfg.t_end - t);
        let u1: Vec<_> = u0.iter().zip(&rhs).map(|(u, r)| u.axpy(dt, r)).collect();
        substep += 1;
        series.push(SubstepRecord {
            substep,
            t,
            dt,
            counters: c1,
        });
        check_cells(&u1, &gas, substep)?;

        let (_, c2) = residual(&u1, dx, &gas, est, &mut rhs, &mut fluxes)?;
        let u2: Vec<_> = u0
            .iter()
            .zip(&u1)
            .zip(&rhs)
            .map(|((a, b), r)| a.blend(three_quarters, &b.axpy(dt, r), quarter))
            .collect();
        substep += 1;
        series.push(SubstepRecord {
            substep,
            t,
            dt,
            counters: c2,
        });
        check_cells(&u2, &gas, substep)?;

        let (_, c3) = residual(&u2, dx, &gas, est, &mut rhs, &mut fluxes)?;
        let u3: Vec<_> = u0
            .iter()
            .zip(&u2)
            .zip(&rhs)
            .map(|((a, b), r)| a.blend(third, &b.axpy(dt, r), two_thirds))
            .collect();
        substep += 1;
        series.push(SubstepRecord {
            substep,
            t,
            dt,
            counters: c3,
        });
        check_cells(&u3, &gas, substep)?;

        grid.field = u3;
        t = t + dt;
        steps += 1;
    }

    Ok(ShockTubeRun {
        grid,
        gas,
        t,
        steps,
        series,
    })
}

/// `x,rho,u,p` rows of the final state, preceded by `#` comments.
pub fn write_profile_csv<T: Real, W: Write>(
    mut w: W,
    run: &ShockTubeRun<T>,
    label: &str,
) -> io::Result<()> {
    writeln!(
        w,
        "# shock tube {label}, cells={}, t={}",
        run.grid.cells(),
        g17(run.t.as_f64())
    )?;
    writeln!(w, "x,rho,u,p")?;
    for (i, c) in run.grid.field.iter().enumerate() {
        let s = c.to_primitive(&run.gas);
        writeln!(
            w,
            "{},{},{},{}",
            g17(run.grid.center(i).as_f64()),
            g17(s.rho.as_f64()),
            g17(s.u.as_f64()),
            g17(s.p.as_f64())
        )?;
    }
    Ok(())
}

/// `step,t,dt,n_tot,n_iter,overhead` rows, one per Runge-Kutta stage.
pub fn write_overhead_csv<T: Real, W: Write>(
    mut w: W,
    run: &ShockTubeRun<T>,
    label: &str,
) -> io::Result<()> {
    writeln!(w, "# estimator overhead per stage, shock tube {label}")?;
    writeln!(w, "step,t,dt,n_tot,n_iter,overhead")?;
    for r in &run.series {
        writeln!(
            w,
            "{},{},{},{},{},{}",
            r.substep,
            g17(r.t.as_f64()),
            g17(r.dt.as_f64()),
            r.counters.n_tot,
            r.counters.n_iter,
            g17(r.counters.overhead())
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::solve_exact;
    use approx::assert_relative_eq;

    fn air() -> GasParams<f64> {
        GasParams::ideal(1.4).unwrap()
    }

    #[test]
    fn primitive_round_trip() {
        let gas = GasParams::new(1.4, 0.3).unwrap();
        let s = PrimitiveState::new(0.8, -1.25, 3.0);
        let c = ConservedState::from_primitive(&s, &gas);
        let back = c.to_primitive(&gas);
        assert_relative_eq!(back.rho, s.rho);
        assert_relative_eq!(back.u, s.u, max_relative = 1e-15);
        assert_relative_eq!(back.p, s.p, max_relative = 1e-15);
        assert!(c.violation(&gas).is_none());
    }

    #[test]
    fn identical_states_give_physical_flux() {
        let s = PrimitiveState::new(1.0, 2.0, 1.0);
        let c = ConservedState::from_primitive(&s, &air());
        let (f, lambda, counters) = llf_flux(&c, &c, &air(), &EstimatorConfig::default()).unwrap();
        assert_eq!(f, c.flux(&air()));
        assert_relative_eq!(lambda, 2.0 + 1.4f64.sqrt(), max_relative = 1e-15);
        assert_eq!(
            counters,
            OverheadCounters {
                n_tot: 1,
                n_iter: 0
            }
        );
    }

    #[test]
    fn sod_interface_speed_matches_oracle() {
        let (l, r, gas) = ShockTubeCase::<f64>::Sod.data();
        let cfg = EstimatorConfig::with_eps(1e-12);
        let (_, lambda, _) = llf_flux(
            &ConservedState::from_primitive(&l, &gas),
            &ConservedState::from_primitive(&r, &gas),
            &gas,
            &cfg,
        )
        .unwrap();
        let exact = solve_exact(&l, &r, &gas).unwrap().lambda_max;
        assert!(lambda >= exact);
        assert!(lambda <= exact * (1.0 + 1e-12));
    }

    #[test]
    fn leblanc_interface_flux_is_finite() {
        let (l, r, gas) = ShockTubeCase::<f64>::Leblanc.data();
        let (f, lambda, _) = llf_flux(
            &ConservedState::from_primitive(&l, &gas),
            &ConservedState::from_primitive(&r, &gas),
            &gas,
            &EstimatorConfig::default(),
        )
        .unwrap();
        assert!(f.iter().all(|x| x.is_finite()));
        let exact = solve_exact(&l, &r, &gas).unwrap().lambda_max;
        assert!(lambda >= exact && lambda <= exact * (1.0 + 1e-9));
    }

    #[test]
    fn overhead_ratio() {
        let c = OverheadCounters {
            n_tot: 4,
            n_iter: 3,
        };
        assert_eq!(c.overhead(), 0.75);
        assert_eq!(OverheadCounters::default().overhead(), 0.0);
    }

    #[test]
    fn rejects_bad_configuration() {
        let mut cfg = ShockTubeConfig::<f64>::new(ShockTubeCase::Sod, 5);
        assert!(run_shocktube(&cfg).is_err());
        cfg.cells = 20;
        cfg.cfl = 1.5;
        assert!(run_shocktube(&cfg).is_err());
        cfg.cfl = 0.5;
        cfg.t_end = 0.0;
        assert!(run_shocktube(&cfg).is_err());
    }

    #[test]
    fn short_sod_run_conserves_mass_and_energy() {
        let mut cfg = ShockTubeConfig::new(ShockTubeCase::<f64>::Sod, 100);
        cfg.t_end = 0.05;
        let (l, r, gas) = cfg.case.data();
        let before = initial_grid(&l, &r, &gas, 100).unwrap().totals();
        let run = run_shocktube(&cfg).unwrap();
        let after = run.grid.totals();
        assert_relative_eq!(after[0], before[0], max_relative = 1e-13);
        assert_relative_eq!(after[2], before[2], max_relative = 1e-13);
        assert_eq!(run.series.len(), 3 * run.steps);
        assert!(run.series.iter().all(|s| s.counters.n_tot == 101));
    }

    #[test]
    fn csv_layout() {
        let mut cfg = ShockTubeConfig::new(ShockTubeCase::<f64>::Sod, 10);
        cfg.max_steps = 2;
        let run = run_shocktube(&cfg).unwrap();
        let mut buf = Vec::new();
        write_profile_csv(&mut buf, &run, "sod").unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<_> = text.lines().collect();
        assert!(lines[0].starts_with('#'));
        assert_eq!(lines[1], "x,rho,u,p");
        assert_eq!(lines.len(), 12);

        let mut buf = Vec::new();
        write_overhead_csv(&mut buf, &run, "sod").unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().nth(1), Some("step,t,dt,n_tot,n_iter,overhead"));
        assert_eq!(text.lines().count(), 2 + 6);
    }
}
