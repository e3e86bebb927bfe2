//! Model parameters, unit conversion and the η-reflection symmetry.

use crate::{Error, Result};

/// Sign η of the nonlinearity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn value(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }

    pub fn flip(self) -> Sign {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }

    pub fn from_value(v: i64) -> Option<Sign> {
        match v {
            1 => Some(Sign::Plus),
            -1 => Some(Sign::Minus),
            _ => None,
        }
    }
}

/// Maker–Terhune coefficients of isotropic liquids.
pub const LIQUID_A: f64 = 0.25;
pub const LIQUID_B: f64 = 1.5;

/// Parameters in laboratory units (rates in rad/s).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalParams {
    pub gamma: f64,
    pub g: f64,
    pub omega_c: f64,
    pub omega_0: f64,
    pub e0: f64,
    pub eta: Sign,
    pub a_mt: f64,
    pub b_mt: f64,
}

impl PhysicalParams {
    /// Cavity frequency shifted by the vacuum self-interaction.
    pub fn shifted_cavity_frequency(&self) -> f64 {
        self.omega_c - self.eta.value() * self.g * (1.0 + self.a_mt / 2.0)
    }
}

/// Normalized parameters: detuning Δ, sign η, Maker–Terhune 𝒜 and ℬ, and
/// the pump amplitude E.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    pub delta: f64,
    pub eta: Sign,
    pub a_mt: f64,
    pub b_mt: f64,
    pub pump: f64,
}

impl ModelParams {
    /// Liquid coefficients at detuning `delta` and pump intensity `e2`.
    pub fn liquid(delta: f64, e2: f64) -> Self {
        ModelParams {
            delta,
            eta: Sign::Plus,
            a_mt: LIQUID_A,
            b_mt: LIQUID_B,
            pump: libm::sqrt(e2.max(0.0)),
        }
    }

    pub fn pump_e2(&self) -> f64 {
        self.pump * self.pump
    }

    pub fn with_pump_e2(&self, e2: f64) -> Self {
        ModelParams {
            pump: libm::sqrt(e2.max(0.0)),
            ..*self
        }
    }

    pub fn with_delta(&self, delta: f64) -> Self {
        ModelParams { delta, ..*self }
    }

    pub fn eta(&self) -> f64 {
        self.eta.value()
    }

    pub fn is_isotropic(&self) -> bool {
        (self.a_mt + self.b_mt / 2.0 - 1.0).abs() < 1e-12
    }

    pub fn is_liquid(&self) -> bool {
        (self.a_mt - LIQUID_A).abs() < 1e-12 && (self.b_mt - LIQUID_B).abs() < 1e-12
    }

    pub fn validate(&self) -> Result<()> {
        if !self.delta.is_finite() {
            return Err(Error::InvalidParameter("detuning must be finite"));
        }
        if !(self.pump.is_finite() && self.pump >= 0.0) {
            return Err(Error::InvalidParameter("pump amplitude must be finite and non-negative"));
        }
        if !(self.a_mt.is_finite() && self.b_mt.is_finite()) {
            return Err(Error::InvalidParameter("Maker-Terhune coefficients must be finite"));
        }
        Ok(())
    }
}

pub fn normalize(p: &PhysicalParams) -> Result<ModelParams> {
    check_rates(p.gamma, p.g)?;
    if !(p.e0.is_finite() && p.e0 >= 0.0) {
        return Err(Error::InvalidParameter("pump amplitude must be finite and non-negative"));
    }
    let delta = (p.shifted_cavity_frequency() - p.omega_0) / (p.eta.value() * p.gamma);
    Ok(ModelParams {
        delta,
        eta: p.eta,
        a_mt: p.a_mt,
        b_mt: p.b_mt,
        pump: p.e0 * libm::sqrt(p.g / (p.gamma * p.gamma * p.gamma)),
    })
}

/// Inverse of [`normalize`] with the pump frequency placed at zero.
pub fn denormalize(m: &ModelParams, gamma: f64, g: f64) -> Result<PhysicalParams> {
    check_rates(gamma, g)?;
    let eta = m.eta.value();
    Ok(PhysicalParams {
        gamma,
        g,
        omega_c: eta * gamma * m.delta + eta * g * (1.0 + m.a_mt / 2.0),
        omega_0: 0.0,
        e0: m.pump * libm::sqrt(gamma * gamma * gamma / g),
        eta: m.eta,
        a_mt: m.a_mt,
        b_mt: m.b_mt,
    })
}

/// Reflection η → −η at fixed Δ. Steady amplitudes map to their complex
/// conjugates, so intensities are unchanged and phases change sign.
pub fn mirror(m: &ModelParams) -> ModelParams {
    ModelParams {
        eta: m.eta.flip(),
        ..*m
    }
}

fn check_rates(gamma: f64, g: f64) -> Result<()> {
    if !(gamma > 0.0 && gamma.is_finite()) {
        return Err(Error::InvalidParameter("gamma must be positive"));
    }
    if !(g > 0.0 && g.is_finite()) {
        return Err(Error::InvalidParameter("g must be positive"));
    }
    Ok(())
}
