//! Co-volume (Noble-Abel) equation of state and the pressure wave curves of
//! the one-dimensional Riemann problem.
//!
//! The gas obeys `p (1 - b rho) = (gamma - 1) e rho`; `b = 0` is the ideal
//! gas. For each side `Z` of the Riemann problem the wave curve
//! `f(p, Z)` gives the velocity jump across the 1- or 3-wave connecting the
//! side state to an intermediate state at pressure `p` (shock branch for
//! `p >= p_Z`, rarefaction branch otherwise). The star pressure `p*` is the
//! root of `phi(p) = f(p, L) + f(p, R) + u_R - u_L`.

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Heat-capacity ratio and co-volume.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GasParams<T> {
    pub gamma: T,
    pub b: T,
}

impl<T: Real> GasParams<T> {
    pub fn new(gamma: T, b: T) -> Result<Self> {
        if !gamma.is_finite() {
            return Err(Error::NonFinite { field: "gamma" });
        }
        if !b.is_finite() {
            return Err(Error::NonFinite { field: "b" });
        }
        if gamma <= T::one() {
            return Err(Error::InvalidGamma(gamma.as_f64()));
        }
        if b < T::zero() {
            return Err(Error::NegativeCovolume(b.as_f64()));
        }
        Ok(Self { gamma, b })
    }

    /// Ideal gas (`b = 0`).
    pub fn ideal(gamma: T) -> Result<Self> {
        Self::new(gamma, T::zero())
    }

    /// True when `gamma <= 5/3`, the range in which the two-rarefaction
    /// pressure is a proven upper bound on `p*`.
    pub fn is_guaranteed(&self) -> bool {
        self.gamma <= T::lit(5.0) / T::lit(3.0)
    }
}

/// Which side of the Riemann problem a state sits on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    Left,
    Right,
}

impl Side {
    pub fn name(self) -> &'static str {
        match self {
            Side::Left => "left",
            Side::Right => "right",
        }
    }
}

/// Density, velocity and pressure of one side of the Riemann problem.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrimitiveState<T> {
    pub rho: T,
    pub u: T,
    pub p: T,
}

/// Outcome of validating a [`PrimitiveState`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    Vacuum,
    NonVacuum,
}

impl<T: Real> PrimitiveState<T> {
    pub fn new(rho: T, u: T, p: T) -> Self {
        Self { rho, u, p }
    }

    pub fn vacuum(u: T) -> Self {
        Self {
            rho: T::zero(),
            u,
            p: T::zero(),
        }
    }

    pub fn is_vacuum(&self) -> bool {
        self.rho == T::zero() && self.p == T::zero()
    }

    /// `1 - b rho`.
    pub fn covolume_factor(&self, gas: &GasParams<T>) -> T {
        T::one() - gas.b * self.rho
    }

    /// Checks finiteness, signs and admissibility. A state is either vacuum
    /// (`rho = p = 0`) or fully non-vacuum (`rho > 0`, `p >= 0`,
    /// `1 - b rho > 0`).
    pub fn classify(&self, gas: &GasParams<T>, side: Side) -> Result<Phase> {
        let name = side.name();
        if !self.rho.is_finite() {
            return Err(Error::NonFinite {
                field: rho_field(side),
            });
        }
        if !self.u.is_finite() {
            return Err(Error::NonFinite {
                field: u_field(side),
            });
        }
        if !self.p.is_finite() {
            return Err(Error::NonFinite {
                field: p_field(side),
            });
        }
        if self.rho < T::zero() {
            return Err(Error::NegativeDensity {
                side: name,
                value: self.rho.as_f64(),
            });
        }
        if self.p < T::zero() {
            return Err(Error::NegativePressure {
                side: name,
                value: self.p.as_f64(),
            });
        }
        if self.rho == T::zero() {
            if self.p == T::zero() {
                return Ok(Phase::Vacuum);
            }
            return Err(Error::PartialVacuum {
                side: name,
                value: self.p.as_f64(),
            });
        }
        let covol = self.covolume_factor(gas);
        if covol <= T::zero() {
            return Err(Error::Inadmissible {
                side: name,
                covol: covol.as_f64(),
            });
        }
        Ok(Phase::NonVacuum)
    }
}

fn rho_field(side: Side) -> &'static str {
    match side {
        Side::Left => "rho_l",
        Side::Right => "rho_r",
    }
}

fn u_field(side: Side) -> &'static str {
    match side {
        Side::Left => "u_l",
        Side::Right => "u_r",
    }
}

fn p_field(side: Side) -> &'static str {
    match side {
        Side::Left => "p_l",
        Side::Right => "p_r",
    }
}

/// Sound speed and shock-curve coefficients of a non-vacuum state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WaveCurveCoeffs<T> {
    /// `a = sqrt(gamma p / (rho (1 - b rho)))`.
    pub sound_speed: T,
    /// `A = 2 (1 - b rho) / ((gamma + 1) rho)`.
    pub cap_a: T,
    /// `B = (gamma - 1) / (gamma + 1) p`.
    pub cap_b: T,
    /// `1 - b rho`.
    pub covol: T,
}

pub fn wave_coeffs<T: Real>(
    state: &PrimitiveState<T>,
    gas: &GasParams<T>,
) -> Result<WaveCurveCoeffs<T>> {
    if state.rho == T::zero() {
        return Err(Error::VacuumState);
    }
    let covol = state.covolume_factor(gas);
    if covol <= T::zero() {
        return Err(Error::Inadmissible {
            side: "given",
            covol: covol.as_f64(),
        });
    }
    let g = gas.gamma;
    let one = T::one();
    Ok(WaveCurveCoeffs {
        sound_speed: (g * state.p / (state.rho * covol)).sqrt(),
        cap_a: T::lit(2.0) * covol / ((g + one) * state.rho),
        cap_b: (g - one) / (g + one) * state.p,
        covol,
    })
}

/// Wave curve of one non-vacuum side, with everything that does not depend
/// on the trial pressure precomputed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WaveCurve<T> {
    pub state: PrimitiveState<T>,
    pub coeffs: WaveCurveCoeffs<T>,
    gamma: T,
    /// `(gamma - 1) / (2 gamma)`
    expo: T,
    /// `2 a (1 - b rho) / (gamma - 1)`
    raref_scale: T,
    /// `gamma p / (rho (1 - b rho))`, i.e. `a^2`
    a_sq: T,
    /// `(gamma + 1) / (2 rho (1 - b rho))`
    speed_slope: T,
}

impl<T: Real> WaveCurve<T> {
    pub fn new(state: &PrimitiveState<T>, gas: &GasParams<T>) -> Result<Self> {
        let coeffs = wave_coeffs(state, gas)?;
        let g = gas.gamma;
        let one = T::one();
        let two = T::lit(2.0);
        let rho_cv = state.rho * coeffs.covol;
        Ok(Self {
            state: *state,
            coeffs,
            gamma: g,
            expo: (g - one) / (two * g),
            raref_scale: two * coeffs.sound_speed * coeffs.covol / (g - one),
            a_sq: g * state.p / rho_cv,
            speed_slope: (g + one) / (two * rho_cv),
        })
    }

    /// `f(p, Z)`. For `p_Z = 0` the shock branch is always taken.
    #[inline]
    pub fn f(&self, p: T) -> T {
        let pz = self.state.p;
        if p >= pz {
            self.f_shock(p)
        } else {
            self.f_rarefaction(p)
        }
    }

    #[inline]
    pub fn f_shock(&self, p: T) -> T {
        if p == self.state.p {
            return T::zero();
        }
        (p - self.state.p) * (self.coeffs.cap_a / (p + self.coeffs.cap_b)).sqrt()
    }

    /// Rarefaction branch, evaluated for any `p >= 0`. With `p_Z = 0` the
    /// branch degenerates to the constant 0.
    #[inline]
    pub fn f_rarefaction(&self, p: T) -> T {
        let pz = self.state.p;
        if pz == T::zero() {
            return T::zero();
        }
        self.raref_scale * ((p / pz).powf(self.expo) - T::one())
    }

    /// `df/dp`.
    #[inline]
    pub fn df(&self, p: T) -> T {
        let pz = self.state.p;
        if p >= pz {
            let pb = p + self.coeffs.cap_b;
            (self.coeffs.cap_a / pb).sqrt() * (T::one() - (p - pz) / (T::lit(2.0) * pb))
        } else {
            let a_cv = self.coeffs.sound_speed * self.coeffs.covol;
            let g = self.gamma;
            a_cv / (g * pz) * (p / pz).powf(-(g + T::one()) / (T::lit(2.0) * g))
        }
    }

    /// Sum of the magnitudes of the terms combined in the shock branch; its
    /// rounding error is a few `epsilon` times this.
    pub fn shock_magnitude(&self, p: T) -> T {
        let s = p + self.state.p;
        if s == T::zero() {
            return T::zero();
        }
        s * (self.coeffs.cap_a / (p + self.coeffs.cap_b)).sqrt()
    }

    /// Same as [`shock_magnitude`](Self::shock_magnitude) for the
    /// rarefaction branch, which cancels near `p_Z`.
    pub fn rarefaction_magnitude(&self, p: T) -> T {
        let pz = self.state.p;
        if pz == T::zero() {
            return T::zero();
        }
        self.raref_scale * ((p / pz).powf(self.expo) + T::one())
    }

    /// Magnitude scale of the branch `f` evaluates at `p`.
    pub fn f_magnitude(&self, p: T) -> T {
        if p >= self.state.p {
            self.shock_magnitude(p)
        } else {
            self.rarefaction_magnitude(p)
        }
    }

    /// `a_Z sqrt(1 + (gamma+1)/(2 gamma) ((p - p_Z)/p_Z)_+)`, written as
    /// `sqrt(a_Z^2 + (gamma+1)/(2 rho_Z (1 - b rho_Z)) (p - p_Z)_+)` so that
    /// `p_Z = 0` is not singular.
    #[inline]
    pub fn speed_magnitude(&self, p: T) -> T {
        (self.a_sq + self.speed_slope * (p - self.state.p).pos()).sqrt()
    }

    /// `a_Z (1 - b rho_Z) p_Z^{-(gamma-1)/(2 gamma)}`; finite limit 0 at `p_Z = 0`.
    fn two_rarefaction_weight(&self) -> T {
        let pz = self.state.p;
        if pz == T::zero() {
            return T::zero();
        }
        self.coeffs.sound_speed * self.coeffs.covol * pz.powf(-self.expo)
    }
}

/// The pair of wave curves of a non-vacuum Riemann problem.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RiemannProblem<T> {
    pub gas: GasParams<T>,
    pub left: WaveCurve<T>,
    pub right: WaveCurve<T>,
    du: T,
}

impl<T: Real> RiemannProblem<T> {
    /// Both states must be non-vacuum and admissible.
    pub fn new(
        left: &PrimitiveState<T>,
        right: &PrimitiveState<T>,
        gas: &GasParams<T>,
    ) -> Result<Self> {
        GasParams::new(gas.gamma, gas.b)?;
        for (s, side) in [(left, Side::Left), (right, Side::Right)] {
            if s.classify(gas, side)? == Phase::Vacuum {
                return Err(Error::VacuumState);
            }
        }
        Ok(Self {
            gas: *gas,
            left: WaveCurve::new(left, gas)?,
            right: WaveCurve::new(right, gas)?,
            du: right.u - left.u,
        })
    }

    pub fn p_min(&self) -> T {
        self.left.state.p.min(self.right.state.p)
    }

    pub fn p_max(&self) -> T {
        self.left.state.p.max(self.right.state.p)
    }

    #[inline]
    pub fn phi(&self, p: T) -> T {
        let fl = self.left.f(p);
        let fr = self.right.f(p);
        fl + fr + self.du
    }

    #[inline]
    pub fn phi_prime(&self, p: T) -> T {
        self.left.df(p) + self.right.df(p)
    }

    /// Bound on the rounding error of [`phi`](Self::phi) at `p`: a small
    /// multiple of `epsilon` times the magnitudes of everything summed.
    pub fn phi_rounding(&self, p: T) -> T {
        let mag = self.left.f_magnitude(p)
            + self.right.f_magnitude(p)
            + self.left.state.u.abs()
            + self.right.state.u.abs();
        T::lit(16.0) * T::epsilon() * mag
    }

    /// `phi` with the rarefaction branch used on both sides.
    pub fn phi_two_rarefaction(&self, p: T) -> T {
        self.left.f_rarefaction(p) + self.right.f_rarefaction(p) + self.du
    }

    /// `phi(0) = u_R - u_L - 2 (a_L (1 - b rho_L) + a_R (1 - b rho_R)) / (gamma - 1)`.
    pub fn phi_at_zero(&self) -> T {
        self.du - self.left.raref_scale - self.right.raref_scale
    }

    /// True when the velocity jump is large enough for a vacuum to open
    /// between two rarefactions, i.e. `phi(0) >= 0`.
    pub fn forms_vacuum(&self) -> bool {
        self.phi_at_zero() >= T::zero()
    }

    /// Closed-form root of [`phi_two_rarefaction`](Self::phi_two_rarefaction).
    ///
    /// Returns `+inf` when both side pressures vanish (the rarefaction curves
    /// are then flat) and [`Error::VacuumFormation`] when `phi(0) >= 0`.
    pub fn p_tilde_star(&self) -> Result<T> {
        let g = self.gas.gamma;
        let one = T::one();
        let two = T::lit(2.0);
        let wl = self.left.coeffs.sound_speed * self.left.coeffs.covol;
        let wr = self.right.coeffs.sound_speed * self.right.coeffs.covol;
        let num = wl + wr - (g - one) / two * self.du;
        if num <= T::zero() {
            return Err(Error::VacuumFormation);
        }
        let den = self.left.two_rarefaction_weight() + self.right.two_rarefaction_weight();
        if den == T::zero() {
            return Ok(T::infinity());
        }
        Ok((num / den).powf(two * g / (g - one)))
    }
}

/// `f(p, Z)` for a single non-vacuum admissible side.
pub fn f_wave<T: Real>(p: T, side: &PrimitiveState<T>, gas: &GasParams<T>) -> Result<T> {
    Ok(WaveCurve::new(side, gas)?.f(p))
}

/// Analytic derivative of [`f_wave`] with respect to `p`.
pub fn f_wave_prime<T: Real>(p: T, side: &PrimitiveState<T>, gas: &GasParams<T>) -> Result<T> {
    Ok(WaveCurve::new(side, gas)?.df(p))
}

pub fn phi<T: Real>(
    p: T,
    left: &PrimitiveState<T>,
    right: &PrimitiveState<T>,
    gas: &GasParams<T>,
) -> Result<T> {
    Ok(RiemannProblem::new(left, right, gas)?.phi(p))
}

pub fn phi_two_rarefaction<T: Real>(
    p: T,
    left: &PrimitiveState<T>,
    right: &PrimitiveState<T>,
    gas: &GasParams<T>,
) -> Result<T> {
    Ok(RiemannProblem::new(left, right, gas)?.phi_two_rarefaction(p))
}

pub fn p_tilde_star<T: Real>(
    left: &PrimitiveState<T>,
    right: &PrimitiveState<T>,
    gas: &GasParams<T>,
) -> Result<T> {
    RiemannProblem::new(left, right, gas)?.p_tilde_star()
}
