//! Fixed workloads shared by the benchmarks.

use decluster::{generate_scheme, Mode, Scheme};

/// `(label, scheme, extent)` cases for the exact evaluator.
pub fn evaluation_cases() -> Vec<(String, Scheme, u64)> {
    [(16, 2, Mode::Cyclic, 32), (16, 2, Mode::Smallbase, 32), (8, 3, Mode::Smallbase, 8), (5, 3, Mode::Paper, 10)]
        .into_iter()
        .map(|(m, d, mode, n)| {
            let s = generate_scheme(m, d, mode, None).expect("fixture parameters are valid");
            (format!("M{m}_d{d}_{mode}_N{n}"), s, n)
        })
        .collect()
}

/// `(b, m, d)` net parameters for construction and verification.
pub const NET_CASES: [(u32, usize, usize); 4] = [(2, 12, 3), (9, 3, 10), (12, 3, 4), (16, 2, 17)];
