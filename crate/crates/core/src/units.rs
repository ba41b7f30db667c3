//! Physical constants for the eV / fs / Å / atomic-unit mix used throughout.

/// Reduced Planck constant in eV·fs.
pub const HBAR_EV_FS: f64 = 0.6582119569;

/// Hartree energy in eV.
pub const HARTREE_EV: f64 = 27.211386245988;

/// Bohr radius in Å.
pub const BOHR_ANG: f64 = 0.529177210903;

/// Energy of two unit (e·a₀) dipoles at 1 Å, in eV: E_h · a₀³ / Å³ ≈ 4.0324 eV.
///
/// Multiplying `μa·μb / r³` (dipoles in a.u., `r` in Å) by this gives eV.
pub const DIPOLE_AU2_PER_ANG3_EV: f64 = HARTREE_EV * BOHR_ANG * BOHR_ANG * BOHR_ANG;
