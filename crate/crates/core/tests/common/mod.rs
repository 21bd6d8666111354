//! Slow, obviously-correct reference implementations used as oracles.
#![allow(dead_code)]

/// Extreme deviations found by scanning every nonempty box of `[n]^d`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Naive {
    pub disc_num: i64,
    pub disc_box: (Vec<u64>, Vec<u64>, u32),
    pub plus_num: i64,
    pub plus_box: (Vec<u64>, Vec<u64>, u32),
}

/// Every point of `[lo..hi]` (inclusive) in lexicographic order.
pub fn lattice(lo: &[u64], hi: &[u64]) -> Vec<Vec<u64>> {
    let mut out = vec![Vec::new()];
    for (&l, &h) in lo.iter().zip(hi) {
        out = out
            .into_iter()
            .flat_map(|p| {
                (l..=h).map(move |x| {
                    let mut q = p.clone();
                    q.push(x);
                    q
                })
            })
            .collect();
    }
    out
}

/// Colors of `[n]^d` in a flat array, lexicographic order.
pub fn materialize(d: usize, n: u64, color: &dyn Fn(&[u64]) -> u32) -> Vec<u32> {
    lattice(&vec![1; d], &vec![n; d]).iter().map(|x| color(x)).collect()
}

fn flat(x: &[u64], n: u64) -> usize {
    x.iter().fold(0usize, |acc, &v| acc * n as usize + (v - 1) as usize)
}

/// Counts by walking every cell of the box.
pub fn direct_count(grid: &[u32], n: u64, lo: &[u64], hi: &[u64], color: u32) -> u64 {
    lattice(lo, hi).iter().filter(|x| grid[flat(x, n)] == color).count() as u64
}

/// Cumulative counts `cum[c][y] = #{x <= y : color(x) = c}` over `[0..n]^d`,
/// filled point by point from the definition via a recursive sum over axes.
struct Cumulative {
    n: u64,
    d: usize,
    table: Vec<Vec<u64>>,
}

impl Cumulative {
    fn new(grid: &[u32], d: usize, n: u64, m: u32) -> Self {
        let side = n as usize + 1;
        let size = side.pow(d as u32);
        let mut table = vec![vec![0u64; size]; m as usize];
        // walk [0..n]^d lexicographically; every earlier point along an axis is already final
        for y in lattice(&vec![0; d], &vec![n; d]) {
            if y.contains(&0) {
                continue;
            }
            let idx = y.iter().fold(0usize, |a, &v| a * side + v as usize);
            let own = grid[flat(&y, n)] as usize - 1;
            for (c, t) in table.iter_mut().enumerate() {
                // inclusion-exclusion over the 2^d - 1 lower neighbours
                let mut v: i64 = if c == own { 1 } else { 0 };
                for mask in 1u32..(1 << d) {
                    let j = y
                        .iter()
                        .enumerate()
                        .fold(0usize, |a, (k, &yk)| a * side + (yk - (mask >> k & 1) as u64) as usize);
                    let sign = if mask.count_ones() % 2 == 1 { 1 } else { -1 };
                    v += sign * t[j] as i64;
                }
                t[idx] = v as u64;
            }
        }
        Cumulative { n, d, table }
    }

    fn count(&self, lo: &[u64], hi: &[u64], color: u32) -> u64 {
        let side = self.n as usize + 1;
        let t = &self.table[color as usize - 1];
        let mut total = 0i64;
        for mask in 0u32..(1 << self.d) {
            let idx = (0..self.d).fold(0usize, |a, k| {
                let v = if mask >> k & 1 == 1 { lo[k] - 1 } else { hi[k] };
                a * side + v as usize
            });
            total += if mask.count_ones() % 2 == 0 { 1 } else { -1 } * t[idx] as i64;
        }
        total as u64
    }
}

/// Scans boxes in lexicographic `(lo, hi)` order, colors ascending, and keeps
/// the first strict maximum: the lexicographically smallest witness.
pub fn naive_disc(d: usize, m: u32, n: u64, color: &dyn Fn(&[u64]) -> u32) -> Naive {
    let grid = materialize(d, n, color);
    let cum = Cumulative::new(&grid, d, n, m);
    let corners = lattice(&vec![1; d], &vec![n; d]);
    let mut best =
        Naive { disc_num: i64::MIN, disc_box: (vec![], vec![], 0), plus_num: i64::MIN, plus_box: (vec![], vec![], 0) };
    for lo in &corners {
        for hi in lattice(lo, &vec![n; d]) {
            let card: i64 = lo.iter().zip(&hi).map(|(&l, &h)| (h - l + 1) as i64).product();
            for c in 1..=m {
                let dev = m as i64 * cum.count(lo, &hi, c) as i64 - card;
                if dev > best.plus_num {
                    best.plus_num = dev;
                    best.plus_box = (lo.clone(), hi.clone(), c);
                }
                if dev.abs() > best.disc_num {
                    best.disc_num = dev.abs();
                    best.disc_box = (lo.clone(), hi.clone(), c);
                }
            }
        }
    }
    best
}

/// Same scan with direct cell counting; only for tiny grids.
pub fn naive_disc_direct(d: usize, m: u32, n: u64, color: &dyn Fn(&[u64]) -> u32) -> (i64, i64) {
    let grid = materialize(d, n, color);
    let mut plus = i64::MIN;
    let mut abs = i64::MIN;
    for lo in lattice(&vec![1; d], &vec![n; d]) {
        for hi in lattice(&lo, &vec![n; d]) {
            let card: i64 = lo.iter().zip(&hi).map(|(&l, &h)| (h - l + 1) as i64).product();
            for c in 1..=m {
                let dev = m as i64 * direct_count(&grid, n, &lo, &hi, c) as i64 - card;
                plus = plus.max(dev);
                abs = abs.max(dev.abs());
            }
        }
    }
    (abs, plus)
}

/// Checks each axis-parallel row of `[m]^d` by enumeration.
pub fn rows_are_latin(d: usize, m: u32, color: &dyn Fn(&[u64]) -> u32) -> bool {
    let mm = m as u64;
    for axis in 0..d {
        for x in lattice(&vec![1; d], &vec![mm; d]) {
            if x[axis] != 1 {
                continue;
            }
            let mut seen = vec![false; m as usize];
            let mut y = x.clone();
            for v in 1..=mm {
                y[axis] = v;
                let c = color(&y) as usize - 1;
                if seen[c] {
                    return false;
                }
                seen[c] = true;
            }
        }
    }
    true
}
