use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("position {pos} out of range 1..={len}")]
    PositionOutOfRange { pos: usize, len: usize },

    #[error("rank argument {pos} exceeds length {len}")]
    RankOutOfRange { pos: usize, len: usize },

    #[error("select ordinal {ordinal} invalid; bitvector has {ones} ones")]
    SelectOutOfRange { ordinal: usize, ones: usize },

    #[error("invalid range [{start}, {end}] over length {len}")]
    InvalidRange { start: usize, end: usize, len: usize },

    #[error("cannot build from empty input: {0}")]
    EmptyInput(&'static str),

    #[error("malformed region [{x1},{x2}]x[{y1},{y2}]")]
    MalformedRegion { x1: i64, y1: i64, x2: i64, y2: i64 },

    #[error("object {id} at t={t}: point ({x}, {y}) outside grid [0,{max_x}]x[0,{max_y}]")]
    OutOfGrid {
        id: u64,
        t: u64,
        x: i64,
        y: i64,
        max_x: i64,
        max_y: i64,
    },

    #[error("duplicate object id {0}")]
    DuplicateObject(u64),

    #[error("symbol at source offset {offset} does not occur in the reference")]
    SymbolNotInReference { offset: usize },

    #[error("phrase ({p}, {l}) exceeds reference length {m}")]
    PhraseOutOfBounds { p: usize, l: usize, m: usize },

    #[error("object {id}: timestamps not consecutive at t={t}")]
    TimestampGap { id: u64, t: u64 },

    #[error("invalid time interval [{from}, {to}]")]
    InvalidInterval { from: u64, to: u64 },

    #[error("unknown object id {0}")]
    UnknownObject(u64),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("row {row}: {msg}")]
    BadRow { row: u64, msg: String },

    #[error("index file: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
