//! Printed reference matrices.

/// Nonzero entries of the printed `D(A_7)_6` as `(row, col, t-power, [c0, c1])`
/// with coefficient `c0 + c1·α7` (both indices from 0).
pub const PRINTED_D7: &[(usize, usize, u32, [i64; 2])] = &[
    (0, 0, 0, [0, 1]),
    (1, 1, 0, [0, 1]),
    (2, 0, 1, [-3, -6]),
    (2, 2, 0, [-1, -1]),
    (3, 0, 1, [-16, -4]),
    (3, 1, 1, [-16, -4]),
    (3, 3, 0, [0, 1]),
    (4, 0, 2, [70, 35]),
    (4, 1, 1, [-5, -10]),
    (4, 2, 1, [15, -5]),
    (4, 4, 0, [-1, -1]),
    (5, 0, 2, [126, -42]),
    (5, 1, 2, [63, -42]),
    (5, 2, 1, [18, -6]),
    (5, 3, 1, [-6, -12]),
    (5, 5, 0, [-1, -1]),
];
