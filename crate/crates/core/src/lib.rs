//! Generalized (q-deformed) maximum-entropy distributions over discrete
//! energy spectra, their temperatures, and the limits of long truncations.

pub mod acceptance;
pub mod error;
pub mod figures;
pub mod hydrogen_saha;
pub mod limits;
pub mod numeric;
pub mod oracle;
pub mod output;
pub mod qmath;
pub mod solver;
pub mod spectra;

pub use error::{Error, Result};
pub use qmath::EntropicParams;
pub use spectra::{
    EnergySplit, Family, Level, LevelSource, Spectrum, SpectrumSpec, UnboundedSpectrum,
};
