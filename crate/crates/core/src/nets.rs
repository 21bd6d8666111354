//! Digital (t,m,d)-nets in base b.
//!
//! Points are kept as exact base-`b` digit arrays end to end. Coordinate `j` of
//! a point is `sum_r digit_r * b^-(r+1)`, most significant digit first.
//!
//! Prime-power bases are built from generalized Pascal generator matrices over
//! GF(q); composite bases combine one net per prime-power factor digitwise
//! through the Chinese remainder bijection. Every constructed net must pass
//! [`verify_net`] before it is handed out.

use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gf::{GaloisField, PrimePowerBase};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct NetParams {
    pub b: u32,
    pub m: usize,
    pub d: usize,
    pub t: usize,
}

impl NetParams {
    pub fn new(b: u32, m: usize, d: usize, t: usize) -> Result<Self> {
        if b < 2 {
            return Err(Error::invalid(format!("base must be >= 2, got {b}")));
        }
        if d < 1 {
            return Err(Error::invalid("dimension must be >= 1"));
        }
        if t > m {
            return Err(Error::invalid(format!("t = {t} exceeds m = {m}")));
        }
        checked_pow(b, m)
            .filter(|&n| n <= u32::MAX as u64)
            .ok_or_else(|| Error::invalid(format!("{b}^{m} points exceed the supported net size")))?;
        Ok(NetParams { b, m, d, t })
    }

    /// Number of points, `b^m`.
    pub fn len(&self) -> usize {
        (self.b as usize).pow(self.m as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

pub(crate) fn checked_pow(b: u32, e: usize) -> Option<u64> {
    (b as u64).checked_pow(u32::try_from(e).ok()?)
}

/// Box `prod [a_i b^-l_i, (a_i + 1) b^-l_i)` with levels `l_i` and offsets `a_i`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ElementaryInterval {
    pub levels: Vec<u32>,
    pub offsets: Vec<u64>,
}

impl ElementaryInterval {
    pub fn level_sum(&self) -> u64 {
        self.levels.iter().map(|&l| l as u64).sum()
    }
}

impl fmt::Display for ElementaryInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "levels {:?} offsets {:?}", self.levels, self.offsets)
    }
}

/// Where a net came from; serialized alongside its points.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum NetProvenance {
    Generators { field: PrimePowerBase, matrices: Vec<Vec<Vec<u32>>> },
    Crt { components: Vec<NetProvenance> },
}

/// `d` generator matrices of size `m x m` over GF(q), entries as field indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GeneratorSet {
    pub field: GaloisField,
    pub m: usize,
    pub d: usize,
    pub matrices: Vec<Vec<Vec<u32>>>,
}

impl GeneratorSet {
    /// Validates shapes and entries of externally supplied matrices.
    pub fn new(field: GaloisField, m: usize, matrices: Vec<Vec<Vec<u32>>>) -> Result<Self> {
        let d = matrices.len();
        if d == 0 {
            return Err(Error::invalid("at least one generator matrix is required"));
        }
        let q = field.order();
        for (j, mat) in matrices.iter().enumerate() {
            if mat.len() != m || mat.iter().any(|row| row.len() != m) {
                return Err(Error::invalid(format!("matrix {} is not {m}x{m}", j + 1)));
            }
            if mat.iter().flatten().any(|&v| v >= q) {
                return Err(Error::invalid(format!("matrix {} has entries outside GF({q})", j + 1)));
            }
        }
        Ok(GeneratorSet { field, m, d, matrices })
    }

    pub fn provenance(&self) -> NetProvenance {
        NetProvenance::Generators { field: self.field.base().clone(), matrices: self.matrices.clone() }
    }
}

/// Generalized Pascal generators over GF(q).
///
/// For `j = 1..=min(d, q)`, `C^(j)[r][c] = binom(c, r) * alpha_j^(c - r)` on and
/// above the diagonal, with `alpha_j` the field element of index `j - 1`
/// (so `C^(1)` is the identity). When `d = q + 1` the last matrix is the
/// anti-diagonal reversal.
pub fn pascal_power_generators(q: u32, d: usize, m: usize) -> Result<GeneratorSet> {
    let field = GaloisField::of_order(q)?;
    pascal_generators_in(field, d, m)
}

pub(crate) fn pascal_generators_in(field: GaloisField, d: usize, m: usize) -> Result<GeneratorSet> {
    let q = field.order() as usize;
    if d == 0 {
        return Err(Error::invalid("dimension must be >= 1"));
    }
    if d > q + 1 {
        return Err(Error::DimensionUnsupported { d, max: q + 1 });
    }
    let p = field.characteristic() as usize;
    // binomials mod p, as prime-subfield elements (index == value)
    let mut binom = vec![vec![0u32; m.max(1)]; m.max(1)];
    for c in 0..m {
        binom[c][0] = 1 % p as u32;
        for r in 1..=c {
            let above = if r < c { binom[c - 1][r] } else { 0 };
            binom[c][r] = ((binom[c - 1][r - 1] + above) as usize % p) as u32;
        }
    }
    let mut matrices = Vec::with_capacity(d);
    for j in 0..d.min(q) {
        let alpha = j as u32;
        let mut mat = vec![vec![0u32; m]; m];
        for (r, row) in mat.iter_mut().enumerate() {
            for (c, entry) in row.iter_mut().enumerate().skip(r) {
                let power = field.pow_idx(alpha, (c - r) as u64);
                *entry = field.mul_idx(binom[c][r], power);
            }
        }
        matrices.push(mat);
    }
    if d == q + 1 {
        let mut mat = vec![vec![0u32; m]; m];
        for (r, row) in mat.iter_mut().enumerate() {
            row[m - 1 - r] = 1;
        }
        matrices.push(mat);
    }
    Ok(GeneratorSet { field, m, d, matrices })
}

/// `b^m` points in `[0,1)^d` stored as digit arrays.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DigitalNet {
    params: NetParams,
    /// Flat `[point][coordinate][digit]`.
    digits: Vec<u32>,
    provenance: Option<NetProvenance>,
}

impl DigitalNet {
    /// Net from explicit digits, laid out `[point][coordinate][digit]`.
    pub fn from_digits(params: NetParams, digits: Vec<u32>) -> Result<Self> {
        let n = params.len();
        if digits.len() != n * params.d * params.m {
            return Err(Error::InvalidNet(format!(
                "expected {} digits for {n} points, got {}",
                n * params.d * params.m,
                digits.len()
            )));
        }
        if let Some(bad) = digits.iter().find(|&&v| v >= params.b) {
            return Err(Error::InvalidNet(format!("digit {bad} is not below base {}", params.b)));
        }
        Ok(DigitalNet { params, digits, provenance: None })
    }

    /// Two-dimensional point set `{(k/b, perm[k]/b)}` with one digit per coordinate.
    pub fn from_permutation(b: u32, perm: &[u32]) -> Result<Self> {
        if perm.len() != b as usize {
            return Err(Error::invalid("permutation length must equal the base"));
        }
        let params = NetParams::new(b, 1, 2, 0)?;
        let digits = perm.iter().enumerate().flat_map(|(k, &v)| [k as u32, v]).collect();
        Self::from_digits(params, digits)
    }

    pub fn params(&self) -> NetParams {
        self.params
    }

    pub fn len(&self) -> usize {
        self.params.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn provenance(&self) -> Option<&NetProvenance> {
        self.provenance.as_ref()
    }

    pub fn with_provenance(mut self, provenance: NetProvenance) -> Self {
        self.provenance = Some(provenance);
        self
    }

    /// Digits of coordinate `j` of point `k`, most significant first.
    pub fn coordinate(&self, k: usize, j: usize) -> &[u32] {
        let m = self.params.m;
        let start = (k * self.params.d + j) * m;
        &self.digits[start..start + m]
    }

    /// Integer formed by the first `level` digits of coordinate `j` of point `k`
    /// (digits beyond `m` are zero).
    pub fn prefix(&self, k: usize, j: usize, level: usize) -> u64 {
        let b = self.params.b as u64;
        let digits = self.coordinate(k, j);
        (0..level).fold(0u64, |acc, r| acc * b + digits.get(r).copied().unwrap_or(0) as u64)
    }

    /// Coordinate as an exact fraction `(numerator, b^m)`.
    pub fn coordinate_fraction(&self, k: usize, j: usize) -> (u64, u64) {
        let m = self.params.m;
        (self.prefix(k, j, m), checked_pow(self.params.b, m).unwrap())
    }

    pub fn contains(&self, k: usize, interval: &ElementaryInterval) -> bool {
        interval
            .levels
            .iter()
            .zip(&interval.offsets)
            .enumerate()
            .all(|(j, (&l, &a))| self.prefix(k, j, l as usize) == a)
    }

    pub fn to_file(&self) -> NetFile {
        let points =
            (0..self.len()).map(|k| (0..self.params.d).map(|j| self.coordinate(k, j).to_vec()).collect()).collect();
        NetFile {
            b: self.params.b,
            m: self.params.m,
            d: self.params.d,
            t: self.params.t,
            points,
            provenance: self.provenance.clone(),
        }
    }

    pub fn from_file(file: NetFile) -> Result<Self> {
        let params = NetParams::new(file.b, file.m, file.d, file.t)?;
        if file.points.len() != params.len() {
            return Err(Error::InvalidNet(format!("expected {} points, got {}", params.len(), file.points.len())));
        }
        let mut digits = Vec::with_capacity(params.len() * params.d * params.m);
        for point in &file.points {
            if point.len() != params.d || point.iter().any(|c| c.len() != params.m) {
                return Err(Error::InvalidNet("point shape does not match (d, m)".into()));
            }
            digits.extend(point.iter().flatten());
        }
        let net = Self::from_digits(params, digits)?;
        Ok(match file.provenance {
            Some(p) => net.with_provenance(p),
            None => net,
        })
    }
}

/// JSON layout of a net.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NetFile {
    pub b: u32,
    pub m: usize,
    pub d: usize,
    pub t: usize,
    pub points: Vec<Vec<Vec<u32>>>,
    pub provenance: Option<NetProvenance>,
}

/// Builds the net of a generator set and rejects it unless it is a (0,m,d)-net.
pub fn net_from_generators(gens: &GeneratorSet) -> Result<DigitalNet> {
    let field = &gens.field;
    let q = field.order();
    let (m, d) = (gens.m, gens.d);
    let params = NetParams::new(q, m, d, 0)?;
    let n = params.len();
    let mut digits = vec![0u32; n * d * m];
    let mut index_digits = vec![0u32; m];
    for k in 0..n {
        let mut rest = k as u64;
        for slot in index_digits.iter_mut() {
            *slot = (rest % q as u64) as u32;
            rest /= q as u64;
        }
        for (j, mat) in gens.matrices.iter().enumerate() {
            let out = &mut digits[(k * d + j) * m..(k * d + j + 1) * m];
            for (r, row) in mat.iter().enumerate() {
                out[r] = row.iter().zip(&index_digits).fold(0, |acc, (&c, &a)| field.add_idx(acc, field.mul_idx(c, a)));
            }
        }
    }
    let net = DigitalNet::from_digits(params, digits)?.with_provenance(gens.provenance());
    ensure_net(net)
}

fn ensure_net(net: DigitalNet) -> Result<DigitalNet> {
    let report = verify_net(&net, 0)?;
    match report.violation {
        None => Ok(net),
        Some(v) => {
            let p = net.params();
            Err(Error::ConstructionInvalid { b: p.b, m: p.m, d: p.d, interval: v.interval, count: v.count })
        }
    }
}

fn gcd(a: u32, b: u32) -> u32 {
    num_integer::gcd(a, b)
}

/// Digitwise CRT composition of nets in pairwise coprime bases into a net in
/// base `b = prod q_i`. Components must share `m` and `d`.
pub fn crt_compose(components: &[DigitalNet], b: u32) -> Result<DigitalNet> {
    let first = components.first().ok_or_else(|| Error::invalid("at least one component net is required"))?;
    let (m, d) = (first.params.m, first.params.d);
    if components.iter().any(|c| c.params.m != m || c.params.d != d) {
        return Err(Error::IncompatibleParameters("component nets differ in m or d".into()));
    }
    let bases: Vec<u32> = components.iter().map(|c| c.params.b).collect();
    for (i, &x) in bases.iter().enumerate() {
        for &y in &bases[i + 1..] {
            if gcd(x, y) != 1 {
                return Err(Error::IncompatibleParameters(format!("component bases {x} and {y} are not coprime")));
            }
        }
    }
    let product: u64 = bases.iter().map(|&q| q as u64).product();
    if product != b as u64 {
        return Err(Error::IncompatibleParameters(format!("component bases {bases:?} multiply to {product}, not {b}")));
    }
    if components.len() == 1 {
        return Ok(first.clone());
    }
    let params = NetParams::new(b, m, d, 0)?;
    let n = params.len();
    let residues = CrtBasis::new(&bases);
    let mut digits = vec![0u32; n * d * m];
    let mut comp_index = vec![0usize; bases.len()];
    let mut parts = vec![0u32; bases.len()];
    for k in 0..n {
        // split each base-b digit of k into its residues
        comp_index.iter_mut().for_each(|c| *c = 0);
        let mut rest = k;
        let mut scale = vec![1usize; bases.len()];
        for _ in 0..m {
            let digit = (rest % b as usize) as u32;
            rest /= b as usize;
            for (i, &q) in bases.iter().enumerate() {
                comp_index[i] += (digit % q) as usize * scale[i];
                scale[i] *= q as usize;
            }
        }
        for j in 0..d {
            for r in 0..m {
                for (i, comp) in components.iter().enumerate() {
                    parts[i] = comp.coordinate(comp_index[i], j)[r];
                }
                digits[(k * d + j) * m + r] = residues.combine(&parts);
            }
        }
    }
    let provenance =
        NetProvenance::Crt { components: components.iter().filter_map(|c| c.provenance.clone()).collect() };
    let net = DigitalNet::from_digits(params, digits)?.with_provenance(provenance);
    ensure_net(net)
}

/// CRT recombination for pairwise coprime moduli.
#[derive(Debug, Clone)]
pub struct CrtBasis {
    modulus: u64,
    /// `e_i` with `e_i = 1 mod q_i`, `e_i = 0 mod q_j` for `j != i`.
    idempotents: Vec<u64>,
}

impl CrtBasis {
    pub fn new(moduli: &[u32]) -> Self {
        let modulus: u64 = moduli.iter().map(|&q| q as u64).product();
        let idempotents = moduli
            .iter()
            .map(|&q| {
                let q = q as u64;
                let rest = modulus / q;
                // rest^-1 mod q by search; moduli are small
                let inv = (0..q).find(|&x| (rest % q) * x % q == 1 % q).unwrap_or(0);
                rest * inv % modulus
            })
            .collect();
        CrtBasis { modulus, idempotents }
    }

    pub fn combine(&self, residues: &[u32]) -> u32 {
        let v = residues.iter().zip(&self.idempotents).fold(0u64, |acc, (&r, &e)| (acc + r as u64 * e) % self.modulus);
        v as u32
    }
}

/// All level vectors of length `d` with entries summing to `s`, in
/// lexicographic order.
pub fn level_vectors(d: usize, s: u32) -> Vec<Vec<u32>> {
    fn rec(prefix: &mut Vec<u32>, remaining: u32, slots: usize, out: &mut Vec<Vec<u32>>) {
        if slots == 1 {
            prefix.push(remaining);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for l in 0..=remaining {
            prefix.push(l);
            rec(prefix, remaining - l, slots - 1, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    if d > 0 {
        rec(&mut Vec::with_capacity(d), s, d, &mut out);
    }
    out
}

/// Every elementary interval in base `b` and dimension `d` whose levels sum
/// to `s`, ordered lexicographically by (levels, offsets).
pub fn enumerate_elementary_intervals(b: u32, m: usize, d: usize, s: u32) -> Result<Vec<ElementaryInterval>> {
    if s as usize > m * d {
        return Err(Error::invalid(format!("level sum {s} exceeds m*d = {}", m * d)));
    }
    let mut out = Vec::new();
    for levels in level_vectors(d, s) {
        let sizes: Vec<u64> = levels.iter().map(|&l| (b as u64).pow(l)).collect();
        let total: u64 = sizes.iter().product();
        for cell in 0..total {
            let mut offsets = vec![0u64; d];
            let mut rest = cell;
            for j in (0..d).rev() {
                offsets[j] = rest % sizes[j];
                rest /= sizes[j];
            }
            out.push(ElementaryInterval { levels: levels.clone(), offsets });
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NetViolation {
    pub interval: ElementaryInterval,
    pub count: u64,
    pub expected: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NetReport {
    pub params: NetParams,
    pub t: usize,
    pub intervals_checked: u64,
    /// Lexicographically first violating interval, if any.
    pub violation: Option<NetViolation>,
}

impl NetReport {
    pub fn passed(&self) -> bool {
        self.violation.is_none()
    }
}

/// Checks that every elementary interval of volume `b^(t-m)` holds exactly
/// `b^t` points, using digit prefixes only.
pub fn verify_net(net: &DigitalNet, t: usize) -> Result<NetReport> {
    let params = net.params;
    if t > params.m {
        return Err(Error::invalid(format!("t = {t} exceeds m = {}", params.m)));
    }
    let (b, m, d) = (params.b as u64, params.m, params.d);
    let n = net.len();
    let s = (m - t) as u32;
    let expected = b.pow(t as u32);

    // prefixes[j][l][k]: first l digits of coordinate j of point k
    let prefixes: Vec<Vec<Vec<u32>>> = (0..d)
        .map(|j| (0..=s as usize).map(|l| (0..n).map(|k| net.prefix(k, j, l) as u32).collect()).collect())
        .collect();
    let pow: Vec<u64> = (0..=s).map(|l| b.pow(l)).collect();
    let cells = pow[s as usize] as usize;
    let shapes = level_vectors(d, s);
    let intervals_checked = shapes.len() as u64 * cells as u64;

    let violation = shapes
        .par_iter()
        .map_init(
            || (vec![0u64; n], vec![0u64; cells]),
            |(index, counts), levels| {
                index.iter_mut().for_each(|x| *x = 0);
                for (j, &l) in levels.iter().enumerate() {
                    let scale = pow[l as usize];
                    for (x, &pre) in index.iter_mut().zip(&prefixes[j][l as usize]) {
                        *x = *x * scale + pre as u64;
                    }
                }
                counts.iter_mut().for_each(|c| *c = 0);
                for &x in index.iter() {
                    counts[x as usize] += 1;
                }
                let bad = counts.iter().position(|&c| c != expected)?;
                let mut offsets = vec![0u64; d];
                let mut rest = bad as u64;
                for j in (0..d).rev() {
                    let size = pow[levels[j] as usize];
                    offsets[j] = rest % size;
                    rest /= size;
                }
                Some(NetViolation {
                    interval: ElementaryInterval { levels: levels.clone(), offsets },
                    count: counts[bad],
                    expected,
                })
            },
        )
        .find_map_first(|v| v);

    Ok(NetReport { params, t, intervals_checked, violation })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn values(net: &DigitalNet) -> Vec<Vec<(u64, u64)>> {
        (0..net.len()).map(|k| (0..net.params().d).map(|j| net.coordinate_fraction(k, j)).collect()).collect()
    }

    #[test]
    fn pascal_over_z3() {
        let g = pascal_power_generators(3, 3, 2).unwrap();
        assert_eq!(g.matrices[0], vec![vec![1, 0], vec![0, 1]]);
        assert_eq!(g.matrices[1], vec![vec![1, 1], vec![0, 1]]);
        assert_eq!(g.matrices[2], vec![vec![1, 2], vec![0, 1]]);
    }

    #[test]
    fn reversal_for_q_plus_one() {
        let g = pascal_power_generators(2, 3, 2).unwrap();
        assert_eq!(g.matrices[2], vec![vec![0, 1], vec![1, 0]]);
        let g = pascal_power_generators(5, 1, 3).unwrap();
        assert_eq!(g.matrices.len(), 1);
        assert_eq!(g.matrices[0], vec![vec![1, 0, 0], vec![0, 1, 0], vec![0, 0, 1]]);
        assert!(matches!(pascal_power_generators(2, 4, 2), Err(Error::DimensionUnsupported { d: 4, max: 3 })));
    }

    #[test]
    fn binary_two_by_two_net() {
        let net = net_from_generators(&pascal_power_generators(2, 2, 2).unwrap()).unwrap();
        assert_eq!(
            values(&net),
            vec![vec![(0, 4), (0, 4)], vec![(2, 4), (2, 4)], vec![(1, 4), (3, 4)], vec![(3, 4), (1, 4)],]
        );
        assert!(verify_net(&net, 0).unwrap().passed());
    }

    #[test]
    fn zero_depth_is_single_origin() {
        let net = net_from_generators(&pascal_power_generators(5, 3, 0).unwrap()).unwrap();
        assert_eq!(net.len(), 1);
        assert!(net.coordinate(0, 2).is_empty());
        assert_eq!(net.coordinate_fraction(0, 1), (0, 1));
    }

    #[test]
    fn identity_gives_radical_inverse() {
        let net = net_from_generators(&pascal_power_generators(2, 1, 3).unwrap()).unwrap();
        let got: Vec<_> = (1..4).map(|k| net.coordinate_fraction(k, 0)).collect();
        assert_eq!(got, vec![(4, 8), (2, 8), (6, 8)]);
    }

    #[test]
    fn crt_of_residues() {
        let basis = CrtBasis::new(&[2, 3]);
        assert_eq!(basis.combine(&[1, 2]), 5);
        for v in 0..6u32 {
            assert_eq!(basis.combine(&[v % 2, v % 3]), v);
        }
    }

    #[test]
    fn crt_of_identity_permutations() {
        let id2 = net_from_generators(&pascal_power_generators(2, 2, 1).unwrap()).unwrap();
        let id3 = net_from_generators(&pascal_power_generators(3, 2, 1).unwrap()).unwrap();
        let net = crt_compose(&[id2.clone(), id3], 6).unwrap();
        for k in 0..6 {
            assert_eq!(net.coordinate(k, 0), &[k as u32]);
            assert_eq!(net.coordinate(k, 1), &[k as u32]);
        }
        let alone = crt_compose(std::slice::from_ref(&id2), 2).unwrap();
        assert_eq!(alone, id2);
    }

    #[test]
    fn crt_rejects_bad_components() {
        let a = net_from_generators(&pascal_power_generators(2, 2, 1).unwrap()).unwrap();
        let b = net_from_generators(&pascal_power_generators(4, 2, 1).unwrap()).unwrap();
        let c = net_from_generators(&pascal_power_generators(3, 2, 2).unwrap()).unwrap();
        assert!(matches!(crt_compose(&[a.clone(), b], 8), Err(Error::IncompatibleParameters(_))));
        assert!(matches!(crt_compose(&[a.clone(), c], 6), Err(Error::IncompatibleParameters(_))));
        assert!(crt_compose(&[a], 6).is_err());
    }

    #[test]
    fn interval_enumeration_counts() {
        assert_eq!(enumerate_elementary_intervals(2, 2, 2, 2).unwrap().len(), 12);
        let cols_rows = enumerate_elementary_intervals(3, 1, 2, 1).unwrap();
        assert_eq!(cols_rows.len(), 6);
        assert_eq!(cols_rows[0], ElementaryInterval { levels: vec![0, 1], offsets: vec![0, 0] });
        assert_eq!(cols_rows[5], ElementaryInterval { levels: vec![1, 0], offsets: vec![2, 0] });
        let unit = enumerate_elementary_intervals(2, 1, 3, 0).unwrap();
        assert_eq!(unit, vec![ElementaryInterval { levels: vec![0; 3], offsets: vec![0; 3] }]);
        assert!(enumerate_elementary_intervals(2, 1, 2, 3).is_err());
    }

    #[test]
    fn verify_permutations() {
        let id = DigitalNet::from_permutation(4, &[0, 1, 2, 3]).unwrap();
        let report = verify_net(&id, 0).unwrap();
        assert!(report.passed());
        assert_eq!(report.intervals_checked, 8);

        let params = NetParams::new(2, 1, 2, 0).unwrap();
        let dup = DigitalNet::from_digits(params, vec![0; 4]).unwrap();
        let report = verify_net(&dup, 0).unwrap();
        let v = report.violation.unwrap();
        // first shape is levels (0,1): the lower row holds both points
        assert_eq!(v.interval, ElementaryInterval { levels: vec![0, 1], offsets: vec![0, 0] });
        assert_eq!(v.count, 2);
        assert!(verify_net(&dup, 1).unwrap().passed());
        assert!(verify_net(&dup, 2).is_err());
    }

    #[test]
    fn construction_gate_rejects_bad_generators() {
        let field = GaloisField::of_order(2).unwrap();
        let same = vec![vec![vec![1, 0], vec![0, 1]]; 2];
        let gens = GeneratorSet::new(field, 2, same).unwrap();
        match net_from_generators(&gens) {
            Err(Error::ConstructionInvalid { interval, count, .. }) => {
                assert_eq!(interval.levels, vec![1, 1]);
                assert_eq!(count, 2);
            }
            other => panic!("expected construction failure, got {other:?}"),
        }
    }

    #[test]
    fn file_roundtrip() {
        let net = net_from_generators(&pascal_power_generators(3, 3, 2).unwrap()).unwrap();
        let json = serde_json::to_string(&net.to_file()).unwrap();
        let back = DigitalNet::from_file(serde_json::from_str(&json).unwrap()).unwrap();
        assert_eq!(back, net);
    }
}
