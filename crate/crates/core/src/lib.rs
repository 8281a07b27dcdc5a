//! Constructive inversion of the twisted convolution with rational parameter.
//!
//! The pipeline splits a sequence on `Z^{2d}` into coset pieces, maps it into
//! a matrix algebra with sequence entries, inverts the determinant with an
//! FFT-based convolution inverse and reads the twisted inverse back off the
//! first Cramer column. Alongside sit the fully finite `Z_p x Z_p` case
//! (block-circulant diagonalization) and a Gabor layer computing canonical
//! dual windows on `Z_L`.

pub mod cli;
pub mod conv_inverse;
pub mod coset_algebra;
pub mod error;
pub mod finite;
pub mod gabor;
pub mod io;
pub mod params;
pub mod sequence;
pub mod twisted_inverse;

pub use error::{Error, Result};
pub use params::TwistParams;
pub use sequence::{SeqIndex, Sequence};
