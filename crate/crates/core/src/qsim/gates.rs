//! The fixed gate set: Pauli gates, Hadamard, the two parametrised
//! rotations of the ansatz, controlled-Z, and generic controlled unitaries.

use num_complex::Complex64;

use super::state::{Unitary, C_ONE, C_ZERO};
use crate::{Error, Result};

/// Gate names accepted by [`standard_gate`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GateName {
    X,
    Y,
    Z,
    H,
    Rx,
    Rz,
    Cz,
    Cu,
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// X rotation in the standard unitary form with `-i sin(theta/2)` on both
/// off-diagonal entries.
pub fn rx(theta: f64) -> Unitary {
    let (s, co) = (theta / 2.0).sin_cos();
    Unitary {
        dim: 2,
        data: vec![c(co, 0.0), c(0.0, -s), c(0.0, -s), c(co, 0.0)],
    }
}

/// Z rotation `diag(1, e^{i theta})`.
pub fn rz(theta: f64) -> Unitary {
    Unitary {
        dim: 2,
        data: vec![C_ONE, C_ZERO, C_ZERO, Complex64::from_polar(1.0, theta)],
    }
}

pub fn pauli_x() -> Unitary {
    Unitary {
        dim: 2,
        data: vec![C_ZERO, C_ONE, C_ONE, C_ZERO],
    }
}

pub fn pauli_y() -> Unitary {
    Unitary {
        dim: 2,
        data: vec![C_ZERO, c(0.0, -1.0), c(0.0, 1.0), C_ZERO],
    }
}

pub fn pauli_z() -> Unitary {
    Unitary {
        dim: 2,
        data: vec![C_ONE, C_ZERO, C_ZERO, c(-1.0, 0.0)],
    }
}

pub fn hadamard() -> Unitary {
    let r = std::f64::consts::FRAC_1_SQRT_2;
    Unitary {
        dim: 2,
        data: vec![c(r, 0.0), c(r, 0.0), c(r, 0.0), c(-r, 0.0)],
    }
}

/// Controlled-Z: `diag(1, 1, 1, -1)`.
pub fn cz() -> Unitary {
    let mut u = Unitary::identity(4);
    u.set(3, 3, c(-1.0, 0.0));
    u
}

/// Controlled version of a single-qubit unitary, control on the first qubit.
pub fn controlled(inner: &Unitary) -> Result<Unitary> {
    if inner.dim != 2 {
        return Err(Error::InvalidArgument(
            "controlled gate needs a 2x2 inner unitary".into(),
        ));
    }
    let mut u = Unitary::identity(4);
    for r in 0..2 {
        for col in 0..2 {
            u.set(2 + r, 2 + col, inner.at(r, col));
        }
    }
    Ok(u)
}

/// Builds a gate by name. `Rx`/`Rz` require an angle, `Cu` an inner unitary.
pub fn standard_gate(
    name: GateName,
    angle: Option<f64>,
    inner: Option<&Unitary>,
) -> Result<Unitary> {
    match name {
        GateName::X => Ok(pauli_x()),
        GateName::Y => Ok(pauli_y()),
        GateName::Z => Ok(pauli_z()),
        GateName::H => Ok(hadamard()),
        GateName::Cz => Ok(cz()),
        GateName::Rx => {
            let theta = angle.ok_or_else(|| Error::InvalidArgument("RX needs an angle".into()))?;
            Ok(rx(theta))
        }
        GateName::Rz => {
            let theta = angle.ok_or_else(|| Error::InvalidArgument("RZ needs an angle".into()))?;
            Ok(rz(theta))
        }
        GateName::Cu => {
            let inner =
                inner.ok_or_else(|| Error::InvalidArgument("CU needs an inner unitary".into()))?;
            controlled(inner)
        }
    }
}
