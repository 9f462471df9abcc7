//! The order-4, 3-dimensional example matrix with permanent 74 and every
//! hyperplane sum equal to 8.
//!
//! The four displayed 4x4 blocks are laid out along axis 0; block rows run
//! along axis 1 and block columns along axis 2.

use crate::tensor::MultiMatrix;

#[rustfmt::skip]
pub const PAPER_EXAMPLE_ENTRIES: [u8; 64] = [
    1, 1, 1, 1,
    1, 1, 0, 0,
    1, 0, 0, 0,
    1, 0, 0, 0,

    0, 0, 1, 1,
    1, 1, 1, 1,
    0, 0, 1, 0,
    0, 0, 1, 0,

    0, 1, 0, 0,
    0, 1, 0, 0,
    1, 1, 1, 1,
    1, 1, 0, 0,

    0, 0, 0, 1,
    0, 0, 0, 1,
    0, 0, 1, 1,
    1, 1, 1, 1,
];

pub fn paper_example() -> MultiMatrix {
    let entries = PAPER_EXAMPLE_ENTRIES.iter().map(|&e| f64::from(e)).collect();
    MultiMatrix::from_entries(3, 4, entries).expect("built-in example is well formed")
}
