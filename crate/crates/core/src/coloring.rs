//! Latin-hypercube M-colorings of `[M]^d` and their tiling to `[N]^d`.
//!
//! A coloring is stored as its anchor map: for every line `u = (x_2..x_d)` along
//! axis 1, the `x_1` of the single color-1 cell on that line. Color `i` is color
//! class 1 shifted by `i - 1` along axis 1 (mod M), so
//! `color(x) = ((x_1 - anchor(u)) mod M) + 1`. Coordinates are 1-indexed.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nets::{checked_pow, DigitalNet, NetProvenance};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LatinColoring {
    disks: u32,
    dim: usize,
    anchor: Vec<u32>,
}

impl LatinColoring {
    /// Coloring from an anchor list indexed lexicographically by `(x_2..x_d)`.
    /// Only shape and range are checked here; see [`verify_latin`].
    pub fn from_anchor(disks: u32, dim: usize, anchor: Vec<u32>) -> Result<Self> {
        if disks < 1 {
            return Err(Error::invalid("disk count must be >= 1"));
        }
        if dim < 1 {
            return Err(Error::invalid("dimension must be >= 1"));
        }
        let lines = checked_pow(disks, dim - 1)
            .filter(|&n| n <= u32::MAX as u64)
            .ok_or_else(|| Error::invalid(format!("{disks}^{} anchor entries is too many", dim - 1)))?;
        if anchor.len() as u64 != lines {
            return Err(Error::invalid(format!("anchor has {} entries, expected {lines}", anchor.len())));
        }
        if let Some(bad) = anchor.iter().find(|&&a| a < 1 || a > disks) {
            return Err(Error::OutOfRange(format!("anchor value {bad} not in [1..{disks}]")));
        }
        Ok(LatinColoring { disks, dim, anchor })
    }

    pub fn disks(&self) -> u32 {
        self.disks
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn anchor(&self) -> &[u32] {
        &self.anchor
    }

    fn line_index(&self, u: &[u32]) -> usize {
        u.iter().fold(0usize, |acc, &x| acc * self.disks as usize + (x - 1) as usize)
    }

    /// `x_1` of the color-1 cell on the axis-1 line through `u = (x_2..x_d)`.
    pub fn anchor_at(&self, u: &[u32]) -> Result<u32> {
        if u.len() != self.dim - 1 || u.iter().any(|&x| x < 1 || x > self.disks) {
            return Err(Error::OutOfRange(format!("{u:?} is not a line of [{}]^{}", self.disks, self.dim)));
        }
        Ok(self.anchor[self.line_index(u)])
    }

    pub fn color_of(&self, x: &[u32]) -> Result<u32> {
        if x.len() != self.dim || x.iter().any(|&c| c < 1 || c > self.disks) {
            return Err(Error::OutOfRange(format!("{x:?} is not a cell of [{}]^{}", self.disks, self.dim)));
        }
        Ok(self.color_unchecked(x))
    }

    /// Color of a cell already known to lie in `[M]^d`.
    #[inline]
    pub fn color_unchecked(&self, x: &[u32]) -> u32 {
        let a = self.anchor[self.line_index(&x[1..])];
        (x[0] + self.disks - a) % self.disks + 1
    }

    /// Color of an arbitrary block `x >= 1` of the tiled coloring.
    pub fn tiled_color(&self, x: &[u64]) -> Result<u32> {
        if x.len() != self.dim {
            return Err(Error::invalid(format!("block has {} coordinates, expected {}", x.len(), self.dim)));
        }
        if let Some(bad) = x.iter().find(|&&c| c < 1) {
            return Err(Error::OutOfRange(format!("block coordinate {bad} < 1")));
        }
        let m = self.disks as u64;
        let reduced: Vec<u32> = x.iter().map(|&c| ((c - 1) % m + 1) as u32).collect();
        Ok(self.color_unchecked(&reduced))
    }
}

/// Colors `[M]^d` from a (0, k(d-1), d)-net in base `b` with `b^k = M`: every
/// point marks the cell given by the first `k` digits of each coordinate and
/// those cells form color class 1.
pub fn coloring_from_net(net: &DigitalNet, disks: u32) -> Result<LatinColoring> {
    let params = net.params();
    let (b, m, d) = (params.b, params.m, params.d);
    let k = (1..=32u32)
        .find(|&k| checked_pow(b, k as usize) == Some(disks as u64))
        .ok_or_else(|| Error::IncompatibleParameters(format!("M = {disks} is not a power of the net base {b}")))?
        as usize;
    if m != k * (d - 1) {
        return Err(Error::IncompatibleParameters(format!(
            "net depth m = {m} must equal k(d-1) = {} for M = {b}^{k}",
            k * (d - 1)
        )));
    }
    let lines = (disks as usize).pow(d as u32 - 1);
    let mut anchor = vec![0u32; lines];
    for p in 0..net.len() {
        let cell: Vec<u64> = (0..d).map(|j| net.prefix(p, j, k) + 1).collect();
        let line = cell[1..].iter().fold(0usize, |acc, &x| acc * disks as usize + (x - 1) as usize);
        if anchor[line] != 0 {
            return Err(Error::InvalidNet(format!("two points fall on the axis-1 line {:?}", &cell[1..])));
        }
        anchor[line] = cell[0] as u32;
    }
    LatinColoring::from_anchor(disks, d, anchor)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RowViolation {
    /// 1-based axis along which the row runs.
    pub axis: usize,
    /// First cell of the row (its `axis` coordinate is 1).
    pub start: Vec<u32>,
    pub colors: Vec<u32>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LatinReport {
    pub rows_checked: u64,
    pub violation: Option<RowViolation>,
}

impl LatinReport {
    pub fn passed(&self) -> bool {
        self.violation.is_none()
    }
}

/// Checks that every row of `[M]^d`, along every axis, carries all `M` colors.
/// Rows are scanned by axis, then by the fixed coordinates in lexicographic
/// order; the first bad row is reported.
pub fn verify_latin(c: &LatinColoring) -> LatinReport {
    let (m, d) = (c.disks, c.dim);
    let per_axis = (m as u64).pow(d as u32 - 1);
    let mut seen = vec![false; m as usize + 1];
    let mut cell = vec![1u32; d];
    let mut rows_checked = 0;
    for axis in 0..d {
        for fixed in 0..per_axis {
            // decode the other d-1 coordinates, first free axis most significant
            let mut rest = fixed;
            for j in (0..d).rev().filter(|&j| j != axis) {
                cell[j] = (rest % m as u64) as u32 + 1;
                rest /= m as u64;
            }
            seen.iter_mut().for_each(|s| *s = false);
            let mut ok = true;
            for x in 1..=m {
                cell[axis] = x;
                let color = c.color_unchecked(&cell) as usize;
                ok &= !std::mem::replace(&mut seen[color], true);
            }
            rows_checked += 1;
            if !ok {
                let colors = (1..=m)
                    .map(|x| {
                        cell[axis] = x;
                        c.color_unchecked(&cell)
                    })
                    .collect();
                cell[axis] = 1;
                return LatinReport {
                    rows_checked,
                    violation: Some(RowViolation { axis: axis + 1, start: cell.clone(), colors }),
                };
            }
        }
    }
    LatinReport { rows_checked, violation: None }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Paper,
    Smallbase,
    Cyclic,
    Random,
    Checkerboard,
}

impl Mode {
    pub const ALL: [Mode; 5] = [Mode::Paper, Mode::Smallbase, Mode::Cyclic, Mode::Random, Mode::Checkerboard];

    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Paper => "paper",
            Mode::Smallbase => "smallbase",
            Mode::Cyclic => "cyclic",
            Mode::Random => "random",
            Mode::Checkerboard => "checkerboard",
        }
    }
}

impl std::fmt::Display for Mode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Mode::ALL.into_iter().find(|m| m.as_str() == s).ok_or_else(|| Error::invalid(format!("unknown mode {s:?}")))
    }
}

/// Construction parameters, enough to regenerate a scheme bit for bit.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub requested_mode: Option<Mode>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub base: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub net: Option<NetProvenance>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub skews: Option<Vec<u32>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

/// A complete block-to-disk mapping for any `[N]^d`, by tiling a latin coloring.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Scheme {
    pub coloring: LatinColoring,
    pub mode: Mode,
    pub provenance: Provenance,
    pub warnings: Vec<String>,
}

impl Scheme {
    pub fn disks(&self) -> u32 {
        self.coloring.disks
    }

    pub fn dim(&self) -> usize {
        self.coloring.dim
    }
}

/// Disk of block `x` (coordinates >= 1, unbounded).
pub fn disk_of(s: &Scheme, block: &[u64]) -> Result<u32> {
    s.coloring.tiled_color(block)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BaselineKind {
    Checkerboard,
    Cyclic,
    Random,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct BaselineParams {
    /// Cyclic skews `(s_2..s_d)`, each coprime to M; all ones when absent.
    pub skews: Option<Vec<u32>>,
    pub seed: Option<u64>,
}

pub(crate) const SINGLE_DISK_WARNING: &str = "M = 1: single disk, every deviation is 0";

fn trivial(d: usize, mode: Mode) -> Result<Scheme> {
    Ok(Scheme {
        coloring: LatinColoring::from_anchor(1, d, vec![1])?,
        mode,
        provenance: Provenance::default(),
        warnings: vec![SINGLE_DISK_WARNING.to_string()],
    })
}

fn for_each_line(m: u32, d: usize, mut f: impl FnMut(&[u32]) -> u32) -> Vec<u32> {
    let lines = (m as usize).pow(d as u32 - 1);
    let mut u = vec![1u32; d - 1];
    let mut out = Vec::with_capacity(lines);
    for _ in 0..lines {
        out.push(f(&u));
        // increment lexicographically, last coordinate fastest
        for x in u.iter_mut().rev() {
            if *x < m {
                *x += 1;
                break;
            }
            *x = 1;
        }
    }
    out
}

fn cyclic_anchor(m: u32, d: usize, skews: &[u32]) -> Vec<u32> {
    for_each_line(m, d, |u| {
        let s: u64 = u.iter().zip(skews).map(|(&x, &s)| x as u64 * s as u64).sum();
        (s % m as u64) as u32 + 1
    })
}

/// Baseline schemes used for comparison.
///
/// * checkerboard: M = 2, cell parity; `color(1,..,1) = 1`.
/// * cyclic: `anchor(u) = ((sum s_i u_i) mod M) + 1` (disk modulo allocation).
/// * random: the unit-skew cyclic coloring with each of axes 2..d relabeled by
///   a uniform permutation and axis 1 rotated uniformly, from a seeded ChaCha8.
pub fn make_baseline(kind: BaselineKind, disks: u32, d: usize, params: &BaselineParams) -> Result<Scheme> {
    if d < 1 {
        return Err(Error::invalid("dimension must be >= 1"));
    }
    if disks < 1 {
        return Err(Error::invalid("disk count must be >= 1"));
    }
    match kind {
        BaselineKind::Checkerboard => {
            if disks != 2 {
                return Err(Error::ConditionViolated(format!("checkerboard requires M = 2, got M = {disks}")));
            }
            let anchor = for_each_line(2, d, |u| u.iter().map(|&x| x - 1).sum::<u32>() % 2 + 1);
            Ok(Scheme {
                coloring: LatinColoring::from_anchor(2, d, anchor)?,
                mode: Mode::Checkerboard,
                provenance: Provenance::default(),
                warnings: Vec::new(),
            })
        }
        BaselineKind::Cyclic => {
            if disks == 1 {
                return trivial(d, Mode::Cyclic);
            }
            let skews = params.skews.clone().unwrap_or_else(|| vec![1; d - 1]);
            if skews.len() != d - 1 {
                return Err(Error::invalid(format!("expected {} skews, got {}", d - 1, skews.len())));
            }
            if let Some(bad) = skews.iter().find(|&&s| num_integer::gcd(s, disks) != 1) {
                return Err(Error::ConditionViolated(format!(
                    "skew {bad} shares a factor with M = {disks}; rows would repeat colors"
                )));
            }
            let anchor = cyclic_anchor(disks, d, &skews);
            Ok(Scheme {
                coloring: LatinColoring::from_anchor(disks, d, anchor)?,
                mode: Mode::Cyclic,
                provenance: Provenance { skews: Some(skews), ..Provenance::default() },
                warnings: Vec::new(),
            })
        }
        BaselineKind::Random => {
            let seed = params.seed.unwrap_or(0);
            if disks == 1 {
                let mut s = trivial(d, Mode::Random)?;
                s.provenance.seed = Some(seed);
                return Ok(s);
            }
            let base = LatinColoring::from_anchor(disks, d, cyclic_anchor(disks, d, &vec![1; d - 1]))?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let perms: Vec<Vec<u32>> = (1..d)
                .map(|_| {
                    let mut p: Vec<u32> = (1..=disks).collect();
                    p.shuffle(&mut rng);
                    p
                })
                .collect();
            let rotation = rng.gen_range(0..disks);
            let anchor = for_each_line(disks, d, |u| {
                let relabeled: Vec<u32> = u.iter().zip(&perms).map(|(&x, p)| p[x as usize - 1]).collect();
                let a = base.anchor[base.line_index(&relabeled)];
                (a - 1 + rotation) % disks + 1
            });
            Ok(Scheme {
                coloring: LatinColoring::from_anchor(disks, d, anchor)?,
                mode: Mode::Random,
                provenance: Provenance { seed: Some(seed), ..Provenance::default() },
                warnings: Vec::new(),
            })
        }
    }
}
