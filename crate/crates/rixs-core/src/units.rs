//! Unit conversions. All internal energies are Hartree; user-facing spectra,
//! broadenings and accuracies are eV. This is the only place the conversion
//! factor is defined.

/// Hartree in electronvolt (CODATA 2018).
pub const HARTREE_EV: f64 = 27.211386245988;

/// Converts an energy in eV to Hartree.
#[inline]
pub fn ev_to_hartree(ev: f64) -> f64 {
    ev / HARTREE_EV
}

/// Converts an energy in Hartree to eV.
#[inline]
pub fn hartree_to_ev(ha: f64) -> f64 {
    ha * HARTREE_EV
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let x = 0.3;
        assert!((hartree_to_ev(ev_to_hartree(x)) - x).abs() < 1e-15);
    }

    #[test]
    fn one_hartree() {
        assert!((hartree_to_ev(1.0) - 27.211386245988).abs() < 1e-12);
    }
}
