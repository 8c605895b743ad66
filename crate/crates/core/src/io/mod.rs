//! Game files and result files.

pub mod emit;
pub mod format;

pub use emit::{entries, to_csv, to_svg, Entry, ResultFile};
pub use format::{parse_game, print_game, ParseError, ParseErrors};
