use core::fmt;

use num_complex::Complex64;

use crate::params::Violation;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Parameters fail the admissibility conditions.
    Inadmissible(alloc::vec::Vec<Violation>),
    /// A scalar argument is outside its allowed range.
    InvalidArgument { name: &'static str, value: f64, reason: &'static str },
    /// Mesh sizes below the supported minimum.
    DegenerateGrid { what: &'static str, value: usize, min: usize },
    /// Sampled initial data produced a NaN or infinity.
    NonFiniteInitialData { component: &'static str, index: usize },
    /// Time step violates `dt <= cfl * dx`.
    Cfl { dt: f64, dx: f64, cfl: f64 },
    /// Delay line advanced with a step other than `tau / M`.
    CharacteristicLock { dt: f64, expected: f64 },
    /// Solution left the finite range.
    BlowUp { step: usize, t: f64 },
    /// History lookup outside of the buffered span.
    OutOfSpan { t: f64, start: f64, end: f64 },
    /// History samples must be pushed with strictly increasing times.
    NonMonotoneTime { last: f64, t: f64 },
    /// Conserved functional vanishes, nothing to deflate.
    ZeroFunctional,
    /// Dense eigensolver did not converge.
    EigenFailure,
    /// `i gamma I - A` (or `lambda I - A`) is numerically singular.
    SingularShift { shift: Complex64, nearest: Option<Complex64> },
    /// Matrix larger than the dense budget.
    TooLarge { dim: usize, max: usize },
    /// Not enough or unusable data for a computation.
    InsufficientData(&'static str),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Inadmissible(v) => {
                write!(f, "inadmissible parameters:")?;
                for item in v {
                    write!(f, " [{item}]")?;
                }
                Ok(())
            }
            Error::InvalidArgument { name, value, reason } => {
                write!(f, "invalid {name} = {value}: {reason}")
            }
            Error::DegenerateGrid { what, value, min } => {
                write!(f, "{what} = {value} is below the minimum {min}")
            }
            Error::NonFiniteInitialData { component, index } => {
                write!(f, "non-finite initial sample in {component} at index {index}")
            }
            Error::Cfl { dt, dx, cfl } => {
                write!(f, "CFL violated: dt = {dt} > cfl * dx = {}", cfl * dx)
            }
            Error::CharacteristicLock { dt, expected } => {
                write!(f, "delay line requires dt = tau/M = {expected}, got {dt}")
            }
            Error::BlowUp { step, t } => write!(f, "blow-up detected at step {step} (t = {t})"),
            Error::OutOfSpan { t, start, end } => {
                write!(f, "history query t = {t} outside buffered span [{start}, {end}]")
            }
            Error::NonMonotoneTime { last, t } => {
                write!(f, "history time {t} does not exceed previous sample {last}")
            }
            Error::ZeroFunctional => write!(f, "conserved functional is numerically zero"),
            Error::EigenFailure => write!(f, "eigensolver failed to converge"),
            Error::SingularShift { shift, nearest } => match nearest {
                Some(ev) => write!(
                    f,
                    "shift {} {:+}i is singular; nearest eigenvalue {} {:+}i",
                    shift.re, shift.im, ev.re, ev.im
                ),
                None => write!(f, "shift {} {:+}i is singular", shift.re, shift.im),
            },
            Error::TooLarge { dim, max } => {
                write!(f, "matrix dimension {dim} exceeds dense budget {max}")
            }
            Error::InsufficientData(what) => write!(f, "insufficient data: {what}"),
        }
    }
}

impl core::error::Error for Error {}
