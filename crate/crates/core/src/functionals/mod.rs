//! Scalar fields and the integral functionals built on them.

mod energies;
mod fields;

pub use energies::{
    gagliardo_energy, gagliardo_energy_with, horizontal_gradient, local_energy, luxemburg_norm,
    phi_energy, translation_gap, EnergyBreakdown, GagliardoOptions, LuxemburgNorm, DEFAULT_STEP,
};
pub use fields::{
    builtin, bump, constant, coordinate, cutoff_profile, from_fn, gauss, indicator, mollifier_density,
    mollifier_mass, mollify, scaled, scaled_mollifier, translated, truncate, zero, Field,
    ScalarField, Smoothness, BUILTIN_FIELDS, MOLLIFIER_NODES,
};
