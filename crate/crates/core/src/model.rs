//! Physical parameters of the driven V-type atom in a deformed cavity, the
//! f-deformation algebra, and the per-photon-sector coefficients that drive
//! the amplitude equations.
//!
//! All frequencies are dimensionless. Time is stored as raw `t`; the scaled
//! time `tau = omega_cavity * t` is only produced at output boundaries.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Choice of the deformation function `f(n)` entering `A = a f(n)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum DeformationKind {
    /// `f(n) = 1`: ordinary bosonic operators.
    Identity,
    /// `f(n) = sqrt(1 + chi n^2)`, a Kerr-like intensity-dependent coupling.
    Kerr { chi: f64 },
}

impl DeformationKind {
    /// Builds the deformation from a Kerr constant, mapping `chi == 0` to
    /// [`DeformationKind::Identity`].
    pub fn from_chi(chi: f64) -> Self {
        if chi == 0.0 {
            DeformationKind::Identity
        } else {
            DeformationKind::Kerr { chi }
        }
    }

    /// The Kerr constant, zero for the identity deformation.
    pub fn chi(&self) -> f64 {
        match *self {
            DeformationKind::Identity => 0.0,
            DeformationKind::Kerr { chi } => chi,
        }
    }

    /// `f(n)`.
    pub fn f_value(&self, n: u32) -> f64 {
        match *self {
            DeformationKind::Identity => 1.0,
            DeformationKind::Kerr { chi } => {
                let n = n as f64;
                (1.0 + chi * n * n).sqrt()
            }
        }
    }

    /// `f(n)^2`, evaluated without the square root round trip.
    pub fn f_squared(&self, n: u32) -> f64 {
        match *self {
            DeformationKind::Identity => 1.0,
            DeformationKind::Kerr { chi } => {
                let n = n as f64;
                1.0 + chi * n * n
            }
        }
    }

    /// Deformed commutator `[A, A^dagger]` on `|n>`:
    /// `(n+1) f^2(n+1) - n f^2(n)`.
    pub fn k_value(&self, n: u32) -> f64 {
        let np1 = (n + 1) as f64;
        np1 * self.f_squared(n + 1) - (n as f64) * self.f_squared(n)
    }
}

/// Free function form of [`DeformationKind::f_value`].
pub fn f_value(d: DeformationKind, n: u32) -> f64 {
    d.f_value(n)
}

/// Free function form of [`DeformationKind::k_value`].
pub fn k_value(d: DeformationKind, n: u32) -> f64 {
    d.k_value(n)
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ParamsError {
    #[error("parameter `{field}` must be finite, got {value}")]
    NotFinite { field: &'static str, value: f64 },
    #[error("parameter `{field}` must be non-negative, got {value}")]
    Negative { field: &'static str, value: f64 },
    #[error("cavity frequency must be positive (tau = omega * t), got {0}")]
    NonPositiveCavity(f64),
    #[error("atomic levels must satisfy w3 > w2 > w1, got ({0}, {1}, {2})")]
    LevelOrdering(f64, f64, f64),
}

/// Every physical constant of the model plus the photon sector being solved.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelParams {
    /// Cavity frequency `Omega`.
    pub omega_cavity: f64,
    /// Atomic level frequencies `(w1, w2, w3)`.
    pub omega_levels: [f64; 3],
    /// Coupling of the `|1> <-> |3>` transition.
    pub g1: f64,
    /// Coupling of the `|1> <-> |2>` transition.
    pub g2: f64,
    /// Microwave Rabi frequency between `|2>` and `|3>`.
    pub omega_e: f64,
    pub deformation: DeformationKind,
    /// Photon sector `n`: the span of `|1,n+1>, |2,n>, |3,n>`.
    pub sector_n: u32,
}

impl ModelParams {
    /// Common cavity and level frequencies of every published parameter row
    /// with the given drive, couplings and Kerr constant (sector `n = 1`).
    pub fn reference_row(omega_e: f64, g1: f64, g2: f64, chi: f64) -> Self {
        ModelParams {
            omega_cavity: 0.2,
            omega_levels: [0.3, 0.4, 0.5],
            g1,
            g2,
            omega_e,
            deformation: DeformationKind::from_chi(chi),
            sector_n: 1,
        }
    }

    pub fn validate(&self) -> Result<(), ParamsError> {
        let finite = [
            ("omega_cavity", self.omega_cavity),
            ("omega_levels[0]", self.omega_levels[0]),
            ("omega_levels[1]", self.omega_levels[1]),
            ("omega_levels[2]", self.omega_levels[2]),
            ("g1", self.g1),
            ("g2", self.g2),
            ("omega_e", self.omega_e),
            ("chi", self.deformation.chi()),
        ];
        for (field, value) in finite {
            if !value.is_finite() {
                return Err(ParamsError::NotFinite { field, value });
            }
        }
        for (field, value) in [
            ("g1", self.g1),
            ("g2", self.g2),
            ("omega_e", self.omega_e),
            ("chi", self.deformation.chi()),
        ] {
            if value < 0.0 {
                return Err(ParamsError::Negative { field, value });
            }
        }
        if self.omega_cavity <= 0.0 {
            return Err(ParamsError::NonPositiveCavity(self.omega_cavity));
        }
        let [w1, w2, w3] = self.omega_levels;
        if !(w3 > w2 && w2 > w1) {
            return Err(ParamsError::LevelOrdering(w1, w2, w3));
        }
        Ok(())
    }

    /// Converts scaled time `tau` to raw time.
    pub fn t_of_tau(&self, tau: f64) -> f64 {
        tau / self.omega_cavity
    }

    /// Converts raw time to scaled time `tau = omega_cavity * t`.
    pub fn tau_of_t(&self, t: f64) -> f64 {
        self.omega_cavity * t
    }

    /// The same parameters restricted to another photon sector.
    pub fn with_sector(&self, n: u32) -> Self {
        ModelParams {
            sector_n: n,
            ..*self
        }
    }
}

/// Detunings and effective couplings of one invariant sector.
///
/// `h = s - nu` is kept exact by storing `s` and `nu` and deriving `h` from
/// them in every constructor.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SectorCoefficients {
    /// Detuning multiplying the `|3>` phase, `Omega k(n) - (w3 - w1)`.
    pub h: f64,
    /// Detuning multiplying the `|2>` phase, `Omega k(n) - (w2 - w1)`.
    pub s: f64,
    /// Upper-level splitting `w3 - w2`.
    pub nu: f64,
    /// Effective `|1,n+1> <-> |3,n>` coupling `g1 f(n+1) sqrt(n+1)`.
    pub v1: f64,
    /// Effective `|1,n+1> <-> |2,n>` coupling `g2 f(n+1) sqrt(n+1)`.
    pub v2: f64,
    pub n: u32,
}

impl SectorCoefficients {
    /// Builds coefficients directly from `s`, `nu` and the couplings, with
    /// `h = s - nu`. Used for synthetic limits that do not correspond to an
    /// ordered level scheme.
    pub fn from_parts(s: f64, nu: f64, v1: f64, v2: f64, n: u32) -> Self {
        SectorCoefficients {
            h: s - nu,
            s,
            nu,
            v1,
            v2,
            n,
        }
    }
}

/// Derives the sector coefficients for `p.sector_n`.
pub fn sector_coefficients(p: &ModelParams) -> SectorCoefficients {
    let n = p.sector_n;
    let [w1, w2, w3] = p.omega_levels;
    let s = p.omega_cavity * p.deformation.k_value(n) - (w2 - w1);
    let nu = w3 - w2;
    let root = p.deformation.f_value(n + 1) * ((n + 1) as f64).sqrt();
    SectorCoefficients::from_parts(s, nu, p.g1 * root, p.g2 * root, n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn f_value_examples() {
        assert_eq!(f_value(DeformationKind::Identity, 5), 1.0);
        let v = f_value(DeformationKind::Kerr { chi: 0.2 }, 1);
        assert!(close(v, 1.2f64.sqrt(), 1e-15));
        assert!(close(v, 1.095445, 1e-6));
        assert_eq!(f_value(DeformationKind::Kerr { chi: 0.0 }, 7), 1.0);
    }

    #[test]
    fn k_value_examples() {
        for n in [0, 1, 7, 100] {
            assert_eq!(k_value(DeformationKind::Identity, n), 1.0);
        }
        assert!(close(k_value(DeformationKind::Kerr { chi: 0.2 }, 0), 1.2, 1e-15));
        assert!(close(k_value(DeformationKind::Kerr { chi: 0.2 }, 1), 2.4, 1e-15));
    }

    #[test]
    fn sector_coefficients_top_row() {
        let p = ModelParams::reference_row(0.04, 0.04, 0.06, 0.0);
        let c = sector_coefficients(&p);
        assert!(close(c.h, 0.0, 1e-15));
        assert!(close(c.s, 0.1, 1e-15));
        assert!(close(c.v1, 0.04 * 2f64.sqrt(), 1e-16));
        assert!(close(c.v1, 0.056569, 1e-6));
        assert!(close(c.v2, 0.084853, 1e-6));
    }

    #[test]
    fn sector_coefficients_middle_row() {
        let p = ModelParams::reference_row(0.04, 0.06, 0.08, 0.2);
        let c = sector_coefficients(&p);
        assert!(close(c.h, 0.28, 1e-15));
        assert!(close(c.s, 0.38, 1e-15));
        assert!(close(c.v1, 0.06 * 1.8f64.sqrt() * 2f64.sqrt(), 1e-16));
        assert!(close(c.v1, 0.113842, 1e-6));
    }

    #[test]
    fn validation_rejects_bad_levels_and_signs() {
        let mut p = ModelParams::reference_row(0.04, 0.04, 0.06, 0.0);
        assert!(p.validate().is_ok());
        p.omega_levels = [0.3, 0.5, 0.4];
        assert!(matches!(p.validate(), Err(ParamsError::LevelOrdering(..))));
        let mut p = ModelParams::reference_row(0.04, -0.1, 0.06, 0.0);
        assert!(matches!(p.validate(), Err(ParamsError::Negative { field: "g1", .. })));
        p.g1 = f64::NAN;
        assert!(matches!(p.validate(), Err(ParamsError::NotFinite { field: "g1", .. })));
        let mut p = ModelParams::reference_row(0.04, 0.04, 0.06, 0.0);
        p.omega_cavity = 0.0;
        assert!(p.validate().is_err());
    }

    #[test]
    fn deformation_serde_shape() {
        let json = serde_json::to_string(&DeformationKind::Kerr { chi: 0.2 }).unwrap();
        assert_eq!(json, r#"{"kind":"kerr","chi":0.2}"#);
        let d: DeformationKind = serde_json::from_str(r#"{"kind":"identity"}"#).unwrap();
        assert_eq!(d, DeformationKind::Identity);
    }

    proptest! {
        #[test]
        fn deformation_bounds(chi in 0.0f64..5.0, n in 0u32..1000) {
            let d = DeformationKind::Kerr { chi };
            prop_assert!(d.f_value(n) >= 1.0);
            prop_assert!(d.k_value(n) >= 1.0 - 1e-9 * (n as f64 + 1.0).powi(2) * chi);
            if chi > 0.0 {
                prop_assert!(d.f_value(n + 1) > d.f_value(n));
            }
        }

        #[test]
        fn h_equals_s_minus_nu(
            omega in 0.01f64..1.0,
            w1 in 0.0f64..0.3, d2 in 0.001f64..0.3, d3 in 0.001f64..0.3,
            chi in 0.0f64..0.5, n in 0u32..20,
        ) {
            let p = ModelParams {
                omega_cavity: omega,
                omega_levels: [w1, w1 + d2, w1 + d2 + d3],
                g1: 0.1, g2: 0.1, omega_e: 0.1,
                deformation: DeformationKind::from_chi(chi),
                sector_n: n,
            };
            let c = sector_coefficients(&p);
            prop_assert_eq!(c.h, c.s - c.nu);
            let direct = omega * p.deformation.k_value(n) - (p.omega_levels[2] - w1);
            prop_assert!((c.h - direct).abs() <= 1e-15 * (1.0 + direct.abs()) * 4.0);
        }
    }
}
