//! Exact discrepancy of colorings over all range queries.
//!
//! All deviations are carried as integers scaled by `M`: for a box `B` and a
//! color `i`, `M * |chi^-1(i) ∩ B| - |B|` is an integer and the deviation is
//! that integer over `M`. No floating point enters a verdict.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use num_rational::Ratio;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::coloring::{LatinColoring, Scheme};
use crate::error::{Error, Result};

/// Default bound on `N^d * M` for exact evaluation.
pub const DEFAULT_MAX_CELLS: u64 = 100_000_000;

/// Memory/time guard for the exact evaluators.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Budget {
    pub max_cells: u64,
}

impl Default for Budget {
    fn default() -> Self {
        Budget { max_cells: DEFAULT_MAX_CELLS }
    }
}

impl Budget {
    /// Reads `DECLUSTER_MAX_CELLS`, falling back to the default.
    pub fn from_env() -> Result<Self> {
        match std::env::var("DECLUSTER_MAX_CELLS") {
            Ok(v) => v
                .trim()
                .parse()
                .map(|max_cells| Budget { max_cells })
                .map_err(|_| Error::invalid(format!("DECLUSTER_MAX_CELLS={v:?} is not an integer"))),
            Err(_) => Ok(Budget::default()),
        }
    }

    pub fn check(&self, n: u64, d: usize, m: u32) -> Result<()> {
        let cells = (n as u128).checked_pow(d as u32).and_then(|c| c.checked_mul(m as u128)).unwrap_or(u128::MAX);
        if cells > self.max_cells as u128 {
            return Err(Error::BudgetExceeded { cells, budget: self.max_cells });
        }
        Ok(())
    }
}

/// Integer box `prod [lo_i..hi_i]`, 1-indexed and inclusive.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct GridBox {
    lo: Vec<u64>,
    hi: Vec<u64>,
}

impl GridBox {
    /// A box from corners; any axis with `lo > hi` yields the canonical empty box.
    pub fn new(lo: Vec<u64>, hi: Vec<u64>) -> Result<Self> {
        if lo.len() != hi.len() || lo.is_empty() {
            return Err(Error::invalid("box corners must have the same nonzero dimension"));
        }
        if lo.iter().any(|&x| x < 1) {
            return Err(Error::OutOfRange("box coordinates are 1-indexed".into()));
        }
        if lo.iter().zip(&hi).any(|(l, h)| l > h) {
            return Ok(Self::empty(lo.len()));
        }
        Ok(GridBox { lo, hi })
    }

    pub fn empty(d: usize) -> Self {
        GridBox { lo: vec![1; d], hi: vec![0; d] }
    }

    /// The whole grid `[n]^d`.
    pub fn full(n: u64, d: usize) -> Self {
        if n == 0 {
            return Self::empty(d);
        }
        GridBox { lo: vec![1; d], hi: vec![n; d] }
    }

    pub fn is_empty(&self) -> bool {
        self.lo.iter().zip(&self.hi).any(|(l, h)| l > h)
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn lo(&self) -> &[u64] {
        &self.lo
    }

    pub fn hi(&self) -> &[u64] {
        &self.hi
    }

    pub fn cardinality(&self) -> u128 {
        if self.is_empty() {
            return 0;
        }
        self.lo.iter().zip(&self.hi).map(|(&l, &h)| (h - l + 1) as u128).product()
    }

    pub fn within(&self, n: u64) -> bool {
        self.is_empty() || self.hi.iter().all(|&h| h <= n)
    }

    /// Cells of the box in lexicographic order.
    pub fn cells(&self) -> impl Iterator<Item = Vec<u64>> + '_ {
        let total = self.cardinality();
        let mut cur = self.lo.clone();
        (0..total).map(move |i| {
            if i > 0 {
                for j in (0..cur.len()).rev() {
                    if cur[j] < self.hi[j] {
                        cur[j] += 1;
                        break;
                    }
                    cur[j] = self.lo[j];
                }
            }
            cur.clone()
        })
    }
}

impl fmt::Display for GridBox {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_empty() {
            return f.write_str("(empty)");
        }
        for (i, (l, h)) in self.lo.iter().zip(&self.hi).enumerate() {
            if i > 0 {
                f.write_str("x")?;
            }
            write!(f, "[{l}..{h}]")?;
        }
        Ok(())
    }
}

/// Parses `"l1:h1,l2:h2,..."`.
impl FromStr for GridBox {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut lo = Vec::new();
        let mut hi = Vec::new();
        for part in s.split(',') {
            let (l, h) = part
                .trim()
                .split_once(':')
                .ok_or_else(|| Error::invalid(format!("range {part:?} is not of the form lo:hi")))?;
            let parse =
                |v: &str| v.trim().parse::<u64>().map_err(|_| Error::invalid(format!("{v:?} is not a coordinate")));
            lo.push(parse(l)?);
            hi.push(parse(h)?);
        }
        GridBox::new(lo, hi)
    }
}

/// Exact multiple of `1/den`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ScaledValue {
    pub num: i64,
    pub den: u64,
}

impl ScaledValue {
    pub fn new(num: i64, den: u64) -> Self {
        ScaledValue { num, den }
    }

    pub fn ratio(&self) -> Ratio<i128> {
        Ratio::new(self.num as i128, self.den as i128)
    }
}

impl PartialOrd for ScaledValue {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.ratio().cmp(&other.ratio()))
    }
}

impl fmt::Display for ScaledValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.ratio())
    }
}

/// Per-color prefix sums of a tiled coloring over `[N]^d`.
///
/// Axes before `first_prefix_axis` are stored plainly (index `x - 1`), the
/// rest as prefix sums (index `0..=N`). Colors are innermost.
struct PrefixGrid {
    n: usize,
    d: usize,
    m: usize,
    strides: Vec<usize>,
    data: Vec<u32>,
}

impl PrefixGrid {
    fn build(d: usize, m: usize, n: usize, first_prefix_axis: usize, color: &dyn Fn(&[u64]) -> u32) -> Result<Self> {
        let sizes: Vec<usize> = (0..d).map(|j| if j < first_prefix_axis { n } else { n + 1 }).collect();
        let mut strides = vec![m; d];
        for j in (0..d.saturating_sub(1)).rev() {
            strides[j] = strides[j + 1] * sizes[j + 1];
        }
        let len = strides[0] * sizes[0];
        let mut data = vec![0u32; len];

        let total = n.pow(d as u32);
        let mut x = vec![1u64; d];
        for step in 0..total {
            if step > 0 {
                for j in (0..d).rev() {
                    if x[j] < n as u64 {
                        x[j] += 1;
                        break;
                    }
                    x[j] = 1;
                }
            }
            let c = color(&x);
            if c < 1 || c as usize > m {
                return Err(Error::OutOfRange(format!("block {x:?} has color {c} outside [1..{m}]")));
            }
            let idx: usize = (0..d)
                .map(|j| {
                    let xj = x[j] as usize;
                    if j < first_prefix_axis {
                        (xj - 1) * strides[j]
                    } else {
                        xj * strides[j]
                    }
                })
                .sum();
            data[idx + c as usize - 1] = 1;
        }
        for j in first_prefix_axis..d {
            let (stride, size) = (strides[j], sizes[j]);
            for idx in 0..len {
                if (idx / stride) % size >= 1 {
                    data[idx] += data[idx - stride];
                }
            }
        }
        Ok(PrefixGrid { n, d, m, strides, data })
    }

    fn tiled(c: &LatinColoring, n: usize, first_prefix_axis: usize) -> Result<Self> {
        let m = c.disks() as u64;
        let color = |x: &[u64]| {
            let cell: Vec<u32> = x.iter().map(|&v| ((v - 1) % m + 1) as u32).collect();
            c.color_unchecked(&cell)
        };
        Self::build(c.dim(), c.disks() as usize, n, first_prefix_axis, &color)
    }

    /// Inclusion-exclusion corners `(offset, sign)` for ranges on the prefix
    /// axes `first..d`.
    fn corners(&self, first: usize, ranges: &[(u64, u64)]) -> Vec<(usize, i64)> {
        let k = ranges.len();
        (0..1usize << k)
            .map(|mask| {
                let mut offset = 0;
                for (bit, &(lo, hi)) in ranges.iter().enumerate() {
                    let coord = if mask >> bit & 1 == 1 { lo - 1 } else { hi };
                    offset += coord as usize * self.strides[first + bit];
                }
                let sign = if mask.count_ones() % 2 == 0 { 1 } else { -1 };
                (offset, sign)
            })
            .collect()
    }
}

/// Per-color box counts over `[N]^d` answered by `2^d`-term inclusion-exclusion.
pub struct PrefixTable {
    grid: PrefixGrid,
}

impl PrefixTable {
    pub fn build(s: &Scheme, n: u64, budget: &Budget) -> Result<Self> {
        budget.check(n, s.dim(), s.disks())?;
        Ok(PrefixTable { grid: PrefixGrid::tiled(&s.coloring, n as usize, 0)? })
    }

    pub fn extent(&self) -> u64 {
        self.grid.n as u64
    }

    fn check_box(&self, b: &GridBox) -> Result<()> {
        if b.dim() != self.grid.d {
            return Err(Error::invalid(format!("box has dimension {}, grid has {}", b.dim(), self.grid.d)));
        }
        if !b.within(self.grid.n as u64) {
            return Err(Error::OutOfRange(format!("box {b} is not inside [{}]^{}", self.grid.n, self.grid.d)));
        }
        Ok(())
    }

    /// Counts of every color (index `i - 1` for color `i`) inside `b`.
    pub fn counts(&self, b: &GridBox) -> Result<Vec<u64>> {
        self.check_box(b)?;
        let m = self.grid.m;
        if b.is_empty() {
            return Ok(vec![0; m]);
        }
        let ranges: Vec<(u64, u64)> = b.lo.iter().copied().zip(b.hi.iter().copied()).collect();
        let mut acc = vec![0i64; m];
        for (offset, sign) in self.grid.corners(0, &ranges) {
            for (a, &v) in acc.iter_mut().zip(&self.grid.data[offset..offset + m]) {
                *a += sign * v as i64;
            }
        }
        Ok(acc.into_iter().map(|v| v as u64).collect())
    }

    pub fn count(&self, b: &GridBox, color: u32) -> Result<u64> {
        if color < 1 || color as usize > self.grid.m {
            return Err(Error::OutOfRange(format!("color {color} not in [1..{}]", self.grid.m)));
        }
        Ok(self.counts(b)?[color as usize - 1])
    }
}

/// Number of blocks of `b` stored on disk `color`, over the grid `[n]^d`.
pub fn count_in_box(s: &Scheme, n: u64, b: &GridBox, color: u32, budget: &Budget) -> Result<u64> {
    PrefixTable::build(s, n, budget)?.count(b, color)
}

/// Response time of a query: the largest per-disk share of its blocks.
pub fn response_time(s: &Scheme, n: u64, b: &GridBox, budget: &Budget) -> Result<u64> {
    let counts = PrefixTable::build(s, n, budget)?.counts(b)?;
    Ok(counts.into_iter().max().unwrap_or(0))
}

/// Box with the color that attains an extremal deviation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Witness {
    pub lo: Vec<u64>,
    pub hi: Vec<u64>,
    pub color: u32,
}

impl Witness {
    pub fn grid_box(&self) -> GridBox {
        GridBox { lo: self.lo.clone(), hi: self.hi.clone() }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColorMaxima {
    pub color: u32,
    pub disc_plus_num: i64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub disc_num: Option<i64>,
}

/// Exact disc and disc+ of a tiled scheme over `[N]^d`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DiscReport {
    pub disks: u32,
    pub dim: usize,
    pub extent: u64,
    /// Absent in positive-only mode.
    pub disc: Option<ScaledValue>,
    pub disc_plus: ScaledValue,
    pub disc_witness: Option<Witness>,
    pub disc_plus_witness: Witness,
    pub per_color: Vec<ColorMaxima>,
    /// Per-color counts inside the disc+ witness box.
    pub witness_counts: Vec<u64>,
    pub elapsed_ms: u128,
}

impl DiscReport {
    /// Sandwich `disc/(M-1) <= disc+ <= disc` and the sum-zero identity on
    /// the witness box.
    pub fn check_invariants(&self) -> std::result::Result<(), String> {
        let m = self.disks as i128;
        let card = self.disc_plus_witness.grid_box().cardinality() as i128;
        let total: i128 = self.witness_counts.iter().map(|&c| m * c as i128 - card).sum();
        if total != 0 {
            return Err(format!("sum of scaled deviations on the witness box is {total}, not 0"));
        }
        if let Some(disc) = self.disc {
            if self.disc_plus.num > disc.num {
                return Err(format!("disc+ {} exceeds disc {}", self.disc_plus, disc));
            }
            if m >= 2 && (m - 1) * (self.disc_plus.num as i128) < disc.num as i128 {
                return Err(format!("(M-1) disc+ < disc: {} vs {}", self.disc_plus, disc));
            }
        }
        Ok(())
    }

    pub fn to_file(&self) -> ReportFile {
        ReportFile {
            m: self.disks,
            d: self.dim,
            n: self.extent,
            disc_num: self.disc.map(|v| v.num),
            disc_plus_num: self.disc_plus.num,
            denominator: self.disc_plus.den,
            witness: self.disc_plus_witness.clone(),
            disc_witness: self.disc_witness.clone(),
            per_color: self.per_color.clone(),
            elapsed_ms: self.elapsed_ms,
        }
    }
}

/// `report.json` layout.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReportFile {
    #[serde(rename = "M")]
    pub m: u32,
    pub d: usize,
    #[serde(rename = "N")]
    pub n: u64,
    pub disc_num: Option<i64>,
    pub disc_plus_num: i64,
    pub denominator: u64,
    pub witness: Witness,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub disc_witness: Option<Witness>,
    pub per_color: Vec<ColorMaxima>,
    pub elapsed_ms: u128,
}

/// Best candidate seen so far: scaled value and lexicographic key.
#[derive(Debug, Clone)]
struct Best {
    value: i64,
    lo: Vec<u64>,
    hi: Vec<u64>,
    color: u32,
}

impl Best {
    fn none() -> Self {
        Best { value: i64::MIN, lo: Vec::new(), hi: Vec::new(), color: 0 }
    }

    /// Is `(value, a + outer_lo, b + outer_hi, color)` better than `self`?
    fn beaten_by(&self, value: i64, a: u64, b: u64, outer: &[(u64, u64)], color: u32) -> bool {
        match value.cmp(&self.value) {
            Ordering::Greater => return true,
            Ordering::Less => return false,
            Ordering::Equal => {}
        }
        let lo = std::iter::once(a).chain(outer.iter().map(|r| r.0));
        let hi = std::iter::once(b).chain(outer.iter().map(|r| r.1));
        let key = lo.cmp(self.lo.iter().copied()).then_with(|| hi.cmp(self.hi.iter().copied()));
        key.then(color.cmp(&self.color)) == Ordering::Less
    }

    fn set(&mut self, value: i64, a: u64, b: u64, outer: &[(u64, u64)], color: u32) {
        self.value = value;
        self.lo = std::iter::once(a).chain(outer.iter().map(|r| r.0)).collect();
        self.hi = std::iter::once(b).chain(outer.iter().map(|r| r.1)).collect();
        self.color = color;
    }

    fn merge(self, other: Best) -> Best {
        if other.value == i64::MIN {
            return self;
        }
        if self.value == i64::MIN {
            return other;
        }
        let key = |x: &Best| (std::cmp::Reverse(x.value), x.lo.clone(), x.hi.clone(), x.color);
        if key(&other) < key(&self) {
            other
        } else {
            self
        }
    }
}

struct SweepState {
    plus: Best,
    abs: Best,
    color_plus: Vec<i64>,
    color_abs: Vec<i64>,
}

impl SweepState {
    fn new(m: usize) -> Self {
        SweepState {
            plus: Best::none(),
            abs: Best::none(),
            color_plus: vec![i64::MIN; m],
            color_abs: vec![i64::MIN; m],
        }
    }

    fn merge(mut self, other: SweepState) -> SweepState {
        self.plus = self.plus.merge(other.plus);
        self.abs = self.abs.merge(other.abs);
        for (a, b) in self.color_plus.iter_mut().zip(other.color_plus) {
            *a = (*a).max(b);
        }
        for (a, b) in self.color_abs.iter_mut().zip(other.color_abs) {
            *a = (*a).max(b);
        }
        self
    }
}

/// Candidate run found by the per-color scan.
#[derive(Clone, Copy)]
struct Run {
    value: i64,
    a: u64,
    b: u64,
}

/// Exact disc+ (and disc unless `positive_only`) of `s` tiled over `[n]^d`.
///
/// Every range of axes `2..d` is enumerated; for each, one sweep along axis 1
/// maintains per-color line counts and runs a maximum-subarray scan on
/// `M * count - length` per color. Witnesses are the lexicographically
/// smallest `(lo, hi, color)` attaining each maximum.
pub fn disc_report(s: &Scheme, n: u64, positive_only: bool, budget: &Budget) -> Result<DiscReport> {
    let start = Instant::now();
    if n < 1 {
        return Err(Error::invalid("extent N must be >= 1"));
    }
    budget.check(n, s.dim(), s.disks())?;
    let grid = PrefixGrid::tiled(&s.coloring, n as usize, 1)?;
    Ok(sweep(grid, positive_only, start))
}

/// [`disc_report`] for an arbitrary coloring `color: [N]^d -> [1..M]`, latin
/// or not (diagnostics and oracles).
pub fn disc_report_fn(
    d: usize,
    disks: u32,
    n: u64,
    color: &dyn Fn(&[u64]) -> u32,
    positive_only: bool,
    budget: &Budget,
) -> Result<DiscReport> {
    let start = Instant::now();
    if n < 1 || d < 1 || disks < 1 {
        return Err(Error::invalid("extent, dimension and disk count must be >= 1"));
    }
    budget.check(n, d, disks)?;
    let grid = PrefixGrid::build(d, disks as usize, n as usize, 1, color)?;
    Ok(sweep(grid, positive_only, start))
}

fn sweep(grid: PrefixGrid, positive_only: bool, start: Instant) -> DiscReport {
    let (d, m, n) = (grid.d, grid.m, grid.n as u64);
    let outers = outer_ranges(n, d - 1);
    let mm = m as i64;

    let state = outers
        .par_iter()
        .fold(
            || {
                (
                    SweepState::new(m),
                    vec![0i64; m],
                    vec![Run { value: 0, a: 0, b: 0 }; 4 * m],
                    vec![(0i64, 0u64); 2 * m],
                )
            },
            |(mut st, mut line, mut runs, mut prefix), outer| {
                let len: i64 = outer.iter().map(|&(lo, hi)| (hi - lo + 1) as i64).product();
                let corners = grid.corners(1, outer);
                // runs[4c..4c+4] = best positive, best negative, (unused) per color
                for c in 0..m {
                    runs[4 * c] = Run { value: i64::MIN, a: 0, b: 0 };
                    runs[4 * c + 1] = Run { value: i64::MAX, a: 0, b: 0 };
                    // running prefix sum, then min prefix / max prefix with index
                    runs[4 * c + 2] = Run { value: 0, a: 0, b: 0 };
                    prefix[2 * c] = (0, 0);
                    prefix[2 * c + 1] = (0, 0);
                }
                for x1 in 1..=n {
                    let base = (x1 as usize - 1) * grid.strides[0];
                    line.iter_mut().for_each(|v| *v = 0);
                    for &(offset, sign) in &corners {
                        let slice = &grid.data[base + offset..base + offset + m];
                        for (l, &v) in line.iter_mut().zip(slice) {
                            *l += sign * v as i64;
                        }
                    }
                    for c in 0..m {
                        let sum = runs[4 * c + 2].value + mm * line[c] - len;
                        runs[4 * c + 2].value = sum;
                        let (min_p, min_at) = prefix[2 * c];
                        let (max_p, max_at) = prefix[2 * c + 1];
                        let up = sum - min_p;
                        let pos = &mut runs[4 * c];
                        if up > pos.value || (up == pos.value && min_at + 1 < pos.a) {
                            *pos = Run { value: up, a: min_at + 1, b: x1 };
                        }
                        let down = sum - max_p;
                        let neg = &mut runs[4 * c + 1];
                        if down < neg.value || (down == neg.value && max_at + 1 < neg.a) {
                            *neg = Run { value: down, a: max_at + 1, b: x1 };
                        }
                        if sum < min_p {
                            prefix[2 * c] = (sum, x1);
                        }
                        if sum > max_p {
                            prefix[2 * c + 1] = (sum, x1);
                        }
                    }
                }
                for c in 0..m {
                    let color = c as u32 + 1;
                    let pos = runs[4 * c];
                    let neg = runs[4 * c + 1];
                    st.color_plus[c] = st.color_plus[c].max(pos.value);
                    if st.plus.beaten_by(pos.value, pos.a, pos.b, outer, color) {
                        st.plus.set(pos.value, pos.a, pos.b, outer, color);
                    }
                    if !positive_only {
                        let mag = pos.value.max(-neg.value);
                        st.color_abs[c] = st.color_abs[c].max(mag);
                        for run in [pos, Run { value: -neg.value, ..neg }] {
                            if run.value == mag && st.abs.beaten_by(mag, run.a, run.b, outer, color) {
                                st.abs.set(mag, run.a, run.b, outer, color);
                            }
                        }
                    }
                }
                (st, line, runs, prefix)
            },
        )
        .map(|(st, ..)| st)
        .reduce(|| SweepState::new(m), SweepState::merge);

    let den = m as u64;
    let plus_witness = Witness { lo: state.plus.lo.clone(), hi: state.plus.hi.clone(), color: state.plus.color };
    let witness_box = plus_witness.grid_box();
    let witness_counts = box_counts_from_lines(&grid, &witness_box);
    let per_color = (0..m)
        .map(|c| ColorMaxima {
            color: c as u32 + 1,
            disc_plus_num: state.color_plus[c],
            disc_num: (!positive_only).then(|| state.color_abs[c]),
        })
        .collect();
    DiscReport {
        disks: m as u32,
        dim: d,
        extent: n,
        disc: (!positive_only).then(|| ScaledValue::new(state.abs.value, den)),
        disc_plus: ScaledValue::new(state.plus.value, den),
        disc_witness: (!positive_only).then(|| Witness {
            lo: state.abs.lo.clone(),
            hi: state.abs.hi.clone(),
            color: state.abs.color,
        }),
        disc_plus_witness: plus_witness,
        per_color,
        witness_counts,
        elapsed_ms: start.elapsed().as_millis(),
    }
}

fn outer_ranges(n: u64, k: usize) -> Vec<Vec<(u64, u64)>> {
    let ranges: Vec<(u64, u64)> = (1..=n).flat_map(|lo| (lo..=n).map(move |hi| (lo, hi))).collect();
    let mut out = vec![Vec::with_capacity(k)];
    for _ in 0..k {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                ranges.iter().map(move |&r| {
                    let mut v = prefix.clone();
                    v.push(r);
                    v
                })
            })
            .collect();
    }
    out
}

fn box_counts_from_lines(grid: &PrefixGrid, b: &GridBox) -> Vec<u64> {
    let m = grid.m;
    let outer: Vec<(u64, u64)> = b.lo[1..].iter().copied().zip(b.hi[1..].iter().copied()).collect();
    let corners = grid.corners(1, &outer);
    let mut acc = vec![0i64; m];
    for x1 in b.lo[0]..=b.hi[0] {
        let base = (x1 as usize - 1) * grid.strides[0];
        for &(offset, sign) in &corners {
            for (a, &v) in acc.iter_mut().zip(&grid.data[base + offset..base + offset + m]) {
                *a += sign * v as i64;
            }
        }
    }
    acc.into_iter().map(|v| v as u64).collect()
}

/// Reduces a box of the tiled grid `[N]^d` to `[M]^d`: per axis, representatives
/// `x~ <= y~` keep `[x~..y~]`, otherwise the complement segment `[y~+1..x~-1]`
/// (possibly empty). For latin colorings the per-color absolute deviation is
/// unchanged.
pub fn reduce_box_to_period(b: &GridBox, m: u32) -> Result<GridBox> {
    Ok(reduce_with_sign(b, m)?.0)
}

/// Reduced box plus whether an odd number of axes were complemented (each
/// complemented axis flips the sign of the deviation).
fn reduce_with_sign(b: &GridBox, m: u32) -> Result<(GridBox, bool)> {
    if b.is_empty() {
        return Err(Error::invalid("cannot reduce an empty box"));
    }
    let m = m as u64;
    let mut lo = Vec::with_capacity(b.dim());
    let mut hi = Vec::with_capacity(b.dim());
    let mut flipped = false;
    for (&x, &y) in b.lo.iter().zip(&b.hi) {
        let (xr, yr) = ((x - 1) % m + 1, (y - 1) % m + 1);
        if xr <= yr {
            lo.push(xr);
            hi.push(yr);
        } else {
            flipped = !flipped;
            lo.push(yr + 1);
            hi.push(xr - 1);
        }
    }
    Ok((GridBox::new(lo, hi)?, flipped))
}

/// Per-disk counts of an arbitrary box of a tiled latin scheme, computed from
/// the reduced box in `[M]^d` (no grid of extent N is materialized).
pub fn tiled_box_counts(s: &Scheme, b: &GridBox) -> Result<Vec<u64>> {
    let (m, d) = (s.disks(), s.dim());
    if b.dim() != d {
        return Err(Error::invalid(format!("box has dimension {}, scheme has {d}", b.dim())));
    }
    if b.is_empty() {
        return Ok(vec![0; m as usize]);
    }
    let (reduced, flipped) = reduce_with_sign(b, m)?;
    let mut local = vec![0i128; m as usize];
    let mut cell = vec![0u32; d];
    for x in reduced.cells() {
        for (c, &v) in cell.iter_mut().zip(&x) {
            *c = v as u32;
        }
        local[s.coloring.color_unchecked(&cell) as usize - 1] += 1;
    }
    let card = b.cardinality() as i128;
    let reduced_card = reduced.cardinality() as i128;
    let mm = m as i128;
    local
        .into_iter()
        .map(|c| {
            let dev = mm * c - reduced_card;
            let scaled = card + if flipped { -dev } else { dev };
            if scaled < 0 || scaled % mm != 0 {
                return Err(Error::NotLatin("box counts are inconsistent with a latin coloring".into()));
            }
            Ok((scaled / mm) as u64)
        })
        .collect()
}

/// Boxes partitioning `[L]^d \ B`, peeled axis by axis: for axis `i`, the
/// slabs below and above `B` with earlier axes narrowed to `B` and later axes
/// full. Empty slabs are omitted.
pub fn complement_decompose(b: &GridBox, extent: u64) -> Result<Vec<GridBox>> {
    if b.is_empty() || !b.within(extent) {
        return Err(Error::OutOfRange(format!("box {b} is not a nonempty box inside [{extent}]^{}", b.dim())));
    }
    let d = b.dim();
    let mut out = Vec::with_capacity(2 * d);
    for i in 0..d {
        let frame = |axis_lo: u64, axis_hi: u64| {
            let lo: Vec<u64> = (0..d)
                .map(|j| {
                    if j < i {
                        b.lo[j]
                    } else if j == i {
                        axis_lo
                    } else {
                        1
                    }
                })
                .collect();
            let hi: Vec<u64> = (0..d)
                .map(|j| {
                    if j < i {
                        b.hi[j]
                    } else if j == i {
                        axis_hi
                    } else {
                        extent
                    }
                })
                .collect();
            GridBox { lo, hi }
        };
        if b.lo[i] > 1 {
            out.push(frame(1, b.lo[i] - 1));
        }
        if b.hi[i] < extent {
            out.push(frame(b.hi[i] + 1, extent));
        }
    }
    Ok(out)
}

/// Counts of a point set over half-open boxes with corners at multiples of `1/G`.
pub struct PointGrid {
    g: u64,
    d: usize,
    n: u64,
    strides: Vec<usize>,
    prefix: Vec<u64>,
}

impl PointGrid {
    /// Points as exact fractions in `[0,1]^d`.
    pub fn new(points: &[Vec<Ratio<u64>>], d: usize, g: u64) -> Result<Self> {
        if g < 1 {
            return Err(Error::invalid("grid resolution G must be a positive integer"));
        }
        if d < 1 {
            return Err(Error::invalid("dimension must be >= 1"));
        }
        let size = g as usize + 1;
        let cells = size
            .checked_pow(d as u32)
            .filter(|&c| c <= DEFAULT_MAX_CELLS as usize)
            .ok_or_else(|| Error::invalid(format!("grid ({g}+1)^{d} is too large")))?;
        let mut strides = vec![1usize; d];
        for j in (0..d - 1).rev() {
            strides[j] = strides[j + 1] * size;
        }
        let mut prefix = vec![0u64; cells];
        for p in points {
            if p.len() != d {
                return Err(Error::invalid("point dimension mismatch"));
            }
            let mut idx = 0;
            let mut inside = true;
            for (j, x) in p.iter().enumerate() {
                if *x > Ratio::from_integer(1) {
                    return Err(Error::OutOfRange(format!("coordinate {x} outside [0,1]")));
                }
                // floor(x * G); a point at 1 lies in no half-open box
                let cell = ((*x.numer() as u128 * g as u128) / *x.denom() as u128) as u64;
                if cell >= g {
                    inside = false;
                }
                idx += (cell as usize + 1).min(g as usize) * strides[j];
            }
            if inside {
                prefix[idx] += 1;
            }
        }
        for j in 0..d {
            for idx in 0..cells {
                if (idx / strides[j]) % size >= 1 {
                    prefix[idx] += prefix[idx - strides[j]];
                }
            }
        }
        Ok(PointGrid { g, d, n: points.len() as u64, strides, prefix })
    }

    /// Points in `prod [lo_i/G, hi_i/G)`.
    pub fn count(&self, lo: &[u64], hi: &[u64]) -> u64 {
        if lo.iter().zip(hi).any(|(a, c)| a >= c) {
            return 0;
        }
        let mut total = 0i64;
        for mask in 0..1usize << self.d {
            let mut idx = 0;
            for j in 0..self.d {
                let coord = if mask >> j & 1 == 1 { lo[j] } else { hi[j] };
                idx += coord as usize * self.strides[j];
            }
            let sign = if mask.count_ones() % 2 == 0 { 1 } else { -1 };
            total += sign * self.prefix[idx] as i64;
        }
        total as u64
    }

    /// `G^d * (|P ∩ R| - n vol(R))` for `R = prod [lo_i/G, hi_i/G)`.
    pub fn scaled_deviation(&self, lo: &[u64], hi: &[u64]) -> i128 {
        let count = self.count(lo, hi) as i128;
        let vol: i128 = lo.iter().zip(hi).map(|(&a, &c)| c.saturating_sub(a) as i128).product();
        count * (self.g as i128).pow(self.d as u32) - self.n as i128 * vol
    }
}

/// Geometric discrepancy restricted to boxes with corners on the `1/G` grid.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GeometricReport {
    pub value: Ratio<i128>,
    pub grid: u64,
    /// Witness `prod [lo_i/G, hi_i/G)`.
    pub lo: Vec<u64>,
    pub hi: Vec<u64>,
}

/// `max_R | |P ∩ R| - n vol(R) |` over half-open boxes `prod [a_i/G, c_i/G)`
/// with `0 <= a_i < c_i <= G`; the witness is the lexicographically smallest
/// `(a, c)` attaining it.
pub fn geometric_discrepancy(points: &[Vec<Ratio<u64>>], d: usize, g: u64) -> Result<GeometricReport> {
    let pg = PointGrid::new(points, d, g)?;
    let ranges: Vec<(u64, u64)> = (0..g).flat_map(|a| (a + 1..=g).map(move |c| (a, c))).collect();
    let total = ranges.len().pow(d as u32);
    let mut best: Option<(i128, Vec<u64>, Vec<u64>)> = None;
    let mut lo = vec![0u64; d];
    let mut hi = vec![0u64; d];
    for i in 0..total {
        let mut rest = i;
        for j in (0..d).rev() {
            let (a, c) = ranges[rest % ranges.len()];
            rest /= ranges.len();
            lo[j] = a;
            hi[j] = c;
        }
        let dev = pg.scaled_deviation(&lo, &hi).abs();
        let better = match &best {
            None => true,
            Some((v, blo, bhi)) => dev > *v || (dev == *v && (&lo, &hi) < (blo, bhi)),
        };
        if better {
            best = Some((dev, lo.clone(), hi.clone()));
        }
    }
    let (dev, lo, hi) = best.expect("G >= 1 gives at least one box");
    Ok(GeometricReport { value: Ratio::new(dev, (g as i128).pow(d as u32)), grid: g, lo, hi })
}

/// Explicit positive-deviation certificate from the lower-bound construction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WitnessCertificate {
    /// Side of the examined subgrid, `s * M`.
    pub subgrid: u64,
    pub color: u32,
    pub grid_box: GridBox,
    /// Positive deviation of `grid_box` in `color`.
    pub value: ScaledValue,
    /// Extremal box found in the subgrid and its signed deviation.
    pub extremal_box: GridBox,
    pub extremal_value: ScaledValue,
    pub complemented: bool,
}

/// Smallest `j` with `j^(d-1) >= M`, i.e. `s = j/M` is the least multiple of
/// `1/M` not below `M^(-(d-2)/(d-1))`. For `d = 2` this is `j = M` (s = 1).
pub fn subgrid_side(m: u32, d: usize) -> Result<u64> {
    if d < 2 {
        return Err(Error::invalid("the witness construction needs d >= 2"));
    }
    let mut j = 1u64;
    while (j as u128).pow(d as u32 - 1) < m as u128 {
        j += 1;
    }
    Ok(j)
}

/// Finds a box with strictly positive deviation in some color.
///
/// 1. subgrid side `sM` from [`subgrid_side`];
/// 2. the smallest color with at least `s^d M^(d-1)` cells in `[sM]^d`;
/// 3. its cells `z` become points `(2z - 1) / (2sM)`;
/// 4. every box with corners on the `1/(sM)` grid is scored by the deviation
///    of its grid counterpart, `|P ∩ R| - |R^|/M`, keeping the largest absolute
///    value (positive before negative on ties, then lexicographically smallest);
/// 5. if that deviation is negative, the complement of the box in `[sM]^d`
///    (at most `2d` boxes) holds a box with positive deviation of at least
///    `1/(2d)` of its magnitude, and the best such box is returned.
pub fn witness_pipeline(c: &LatinColoring) -> Result<WitnessCertificate> {
    let (m, d) = (c.disks(), c.dim());
    if d >= 3 && m < 3 {
        return Err(Error::invalid("the witness construction needs M >= 3 for d >= 3"));
    }
    let j = subgrid_side(m, d)?;
    if j < 1 {
        return Err(Error::invalid("degenerate subgrid s*M < 1"));
    }
    let sub = GridBox::full(j, d);
    let mut class_sizes = vec![0u64; m as usize];
    let mut cell = vec![0u32; d];
    for x in sub.cells() {
        for (c_, &v) in cell.iter_mut().zip(&x) {
            *c_ = v as u32;
        }
        class_sizes[c.color_unchecked(&cell) as usize - 1] += 1;
    }
    let target = (j as u128).pow(d as u32);
    let color = (1..=m)
        .find(|&i| class_sizes[i as usize - 1] as u128 * m as u128 >= target)
        .expect("some class reaches the average");

    let two_j = 2 * j;
    let points: Vec<Vec<Ratio<u64>>> = sub
        .cells()
        .filter(|x| {
            let cell: Vec<u32> = x.iter().map(|&v| v as u32).collect();
            c.color_unchecked(&cell) == color
        })
        .map(|z| z.iter().map(|&zi| Ratio::new(2 * zi - 1, two_j)).collect())
        .collect();
    let pg = PointGrid::new(&points, d, j)?;
    let mm = m as i64;
    // scaled combinatorial deviation of the grid box matching [lo/j, hi/j)
    let deviation = |lo: &[u64], hi: &[u64]| -> i64 {
        let card: u64 = lo.iter().zip(hi).map(|(&a, &c)| c - a).product();
        mm * pg.count(lo, hi) as i64 - card as i64
    };

    let ranges: Vec<(u64, u64)> = (0..j).flat_map(|a| (a + 1..=j).map(move |c| (a, c))).collect();
    let total = ranges.len().pow(d as u32);
    let mut best: Option<(i64, GridBox)> = None;
    let mut lo = vec![0u64; d];
    let mut hi = vec![0u64; d];
    for i in 0..total {
        let mut rest = i;
        for k in (0..d).rev() {
            let (a, c_) = ranges[rest % ranges.len()];
            rest /= ranges.len();
            lo[k] = a;
            hi[k] = c_;
        }
        let dev = deviation(&lo, &hi);
        // corners a/j, c/j correspond to grid cells a+1..c
        let gb = GridBox { lo: lo.iter().map(|a| a + 1).collect(), hi: hi.clone() };
        let better = match &best {
            None => true,
            Some((v, b)) => (dev.abs(), dev > 0, std::cmp::Reverse(&gb)) > (v.abs(), *v > 0, std::cmp::Reverse(b)),
        };
        if better {
            best = Some((dev, gb));
        }
    }
    let (dev, extremal) = best.expect("subgrid has at least one box");
    if dev == 0 {
        return Err(Error::ConditionViolated(format!("color {color} has zero discrepancy on [{j}]^{d}")));
    }
    let extremal_value = ScaledValue::new(dev, m as u64);
    if dev > 0 {
        return Ok(WitnessCertificate {
            subgrid: j,
            color,
            grid_box: extremal.clone(),
            value: extremal_value,
            extremal_box: extremal,
            extremal_value,
            complemented: false,
        });
    }
    let mut pick: Option<(i64, GridBox)> = None;
    for piece in complement_decompose(&extremal, j)? {
        let lo: Vec<u64> = piece.lo.iter().map(|x| x - 1).collect();
        let v = deviation(&lo, &piece.hi);
        if pick.as_ref().is_none_or(|(best, _)| v > *best) {
            pick = Some((v, piece));
        }
    }
    match pick {
        Some((v, piece)) if v > 0 => Ok(WitnessCertificate {
            subgrid: j,
            color,
            grid_box: piece,
            value: ScaledValue::new(v, m as u64),
            extremal_box: extremal,
            extremal_value,
            complemented: true,
        }),
        _ => Err(Error::ConditionViolated("complement of the extremal box holds no positive deviation".into())),
    }
}
