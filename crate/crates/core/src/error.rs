use crate::affine_data::{AffineType, HalfInt};

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("rank {n} is below the minimum {min} for family {family}")]
    RankTooSmall { family: &'static str, n: usize, min: usize },
    #[error("index {k} outside 1..={n}")]
    IndexOutOfRange { k: usize, n: usize },
    #[error("level {t} is outside the domain of the color map for {ty}")]
    Domain { ty: AffineType, t: HalfInt },
    #[error("shift value P_{origin}({t}) is undefined")]
    ShiftUndefined { origin: HalfInt, t: HalfInt },
    #[error("order {0:?} is not a permutation of the index set")]
    NotAPermutation(Vec<usize>),
    #[error("sequence is not adapted at the pair ({0}, {1})")]
    NotAdapted(usize, usize),
    #[error("p_{{{0},{1}}} is undefined: the indices are not adjacent")]
    UndefinedPair(usize, usize),
    #[error("walls of type {0} are not supported")]
    UnsupportedWallType(AffineType),
    #[error("operator S' expects a form without constant term")]
    ConstantPresent,
    #[error("index {k} has class {class} for {ty}, which does not fit this ground state")]
    ClassMismatch { ty: AffineType, k: usize, class: u8 },
    #[error("wall is not proper")]
    NotProper,
    #[error("wall is malformed: {0}")]
    Malformed(String),
    #[error("site is not present in the wall")]
    SiteNotPresent,
    #[error("operation produced an improper wall")]
    ResultImproper,
    #[error("site does not belong to a wall with this ground")]
    HostMismatch,
    #[error("box parameters out of range: {0}")]
    OutOfRange(String),
    #[error("no closed form is available for {0}")]
    Unsupported(String),
    #[error("epsilon* did not stabilize within the horizon cap")]
    NotStabilized,
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
