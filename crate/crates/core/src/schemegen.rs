//! End-to-end scheme generation, scheme/map/sweep files.

use std::fs::{File, OpenOptions};
use std::io::Write;
use std::ops::RangeInclusive;
use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::coloring::{
    coloring_from_net, make_baseline, verify_latin, BaselineKind, BaselineParams, LatinColoring, LatinReport, Mode,
    Provenance, Scheme, SINGLE_DISK_WARNING,
};
use crate::discrepancy::{disc_report, Budget};
use crate::error::{Error, Result};
use crate::gf::{prime_power, GaloisField};
use crate::nets::{crt_compose, net_from_generators, pascal_power_generators, DigitalNet, GeneratorSet, NetProvenance};

pub const SCHEME_VERSION: u64 = 1;

pub const DEGENERATE_WARNING: &str =
    "paper mode with d = 2 uses a base-M net with m = 1: the identity permutation, whose error grows like M";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrimePowerFactor {
    pub p: u64,
    pub e: u32,
}

impl PrimePowerFactor {
    pub fn q(&self) -> u64 {
        self.p.pow(self.e)
    }
}

/// Canonical prime-power factorization, factors sorted by `q` ascending.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Factorization {
    pub n: u64,
    pub factors: Vec<PrimePowerFactor>,
}

impl Factorization {
    /// Smallest prime-power factor.
    pub fn q1(&self) -> u64 {
        self.factors[0].q()
    }

    pub fn qs(&self) -> Vec<u64> {
        self.factors.iter().map(|f| f.q()).collect()
    }
}

pub fn factorize_canonical(n: u64) -> Result<Factorization> {
    if n < 2 {
        return Err(Error::invalid(format!("cannot factor {n}: need n >= 2")));
    }
    let mut factors = Vec::new();
    let mut rest = n;
    let mut p = 2u64;
    while p.saturating_mul(p) <= rest {
        if rest.is_multiple_of(p) {
            let mut e = 0;
            while rest.is_multiple_of(p) {
                rest /= p;
                e += 1;
            }
            factors.push(PrimePowerFactor { p, e });
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if rest > 1 {
        factors.push(PrimePowerFactor { p: rest, e: 1 });
    }
    factors.sort_by_key(|f| f.q());
    Ok(Factorization { n, factors })
}

/// (0, m, d)-net in base `b`: a Pascal-generator net over GF(q) per prime-power
/// factor `q` of `b`, composed digitwise by CRT. Needs `d <= q1 + 1`.
pub fn build_net(b: u32, m: usize, d: usize) -> Result<DigitalNet> {
    let f = factorize_canonical(b as u64)?;
    if d as u64 > f.q1() + 1 {
        return Err(Error::ConditionViolated(format!("d={d} > q1+1={} for b={b}", f.q1() + 1)));
    }
    let components = f
        .factors
        .iter()
        .map(|fac| net_from_generators(&pascal_power_generators(fac.q() as u32, d, m)?))
        .collect::<Result<Vec<_>>>()?;
    crt_compose(&components, b)
}

/// Smallest prime power `p` with `p^k = M` and `d <= p + 1`.
fn small_base(disks: u32, d: usize) -> Result<(u32, u32)> {
    let (prime, e) = prime_power(disks as u64)
        .ok_or_else(|| Error::ConditionViolated(format!("M={disks} is not a prime power; smallbase needs M = p^k")))?;
    (1..=e)
        .filter(|k| e % k == 0)
        .map(|k| ((prime as u32).pow(k), e / k))
        .find(|&(p, _)| d as u64 <= p as u64 + 1)
        .ok_or_else(|| {
            Error::ConditionViolated(format!(
                "d={d} > p+1={} for M={disks}: no base p with p^k = M and d <= p+1",
                prime + 1
            ))
        })
}

/// Builds a scheme in the requested mode.
///
/// * paper: base-M (0, d-1, d)-net, needs `d <= q1 + 1`;
/// * smallbase: `M = p^k`, base-p (0, k(d-1), d)-net, needs `d <= p + 1`;
/// * cyclic, random, checkerboard: see [`make_baseline`].
///
/// M = 2 routes paper and smallbase to the checkerboard.
pub fn generate_scheme(disks: u32, d: usize, mode: Mode, seed: Option<u64>) -> Result<Scheme> {
    if d < 1 {
        return Err(Error::invalid("dimension must be >= 1"));
    }
    if disks < 1 {
        return Err(Error::invalid("disk count must be >= 1"));
    }
    let scheme = match mode {
        Mode::Cyclic => make_baseline(BaselineKind::Cyclic, disks, d, &BaselineParams::default())?,
        Mode::Random => make_baseline(BaselineKind::Random, disks, d, &BaselineParams { skews: None, seed })?,
        Mode::Checkerboard => make_baseline(BaselineKind::Checkerboard, disks, d, &BaselineParams::default())?,
        Mode::Paper | Mode::Smallbase if disks == 2 => {
            let mut s = make_baseline(BaselineKind::Checkerboard, 2, d, &BaselineParams::default())?;
            s.provenance.requested_mode = Some(mode);
            s
        }
        Mode::Paper | Mode::Smallbase if disks == 1 || d == 1 => {
            let anchor = vec![1; (disks as usize).pow(d as u32 - 1)];
            let warnings = if disks == 1 { vec![SINGLE_DISK_WARNING.to_string()] } else { Vec::new() };
            Scheme {
                coloring: LatinColoring::from_anchor(disks, d, anchor)?,
                mode,
                provenance: Provenance::default(),
                warnings,
            }
        }
        Mode::Paper => {
            let f = factorize_canonical(disks as u64)?;
            if d as u64 > f.q1() + 1 {
                return Err(Error::ConditionViolated(format!("d={d} > q1+1={} for M={disks}", f.q1() + 1)));
            }
            let net = build_net(disks, d - 1, d)?;
            let warnings = if d == 2 { vec![DEGENERATE_WARNING.to_string()] } else { Vec::new() };
            from_net(&net, disks, mode, 1, warnings)?
        }
        Mode::Smallbase => {
            let (p, k) = small_base(disks, d)?;
            let net = build_net(p, k as usize * (d - 1), d)?;
            from_net(&net, disks, mode, k, Vec::new())?
        }
    };
    let report = verify_latin(&scheme.coloring);
    if let Some(v) = report.violation {
        return Err(Error::NotLatin(format!("generated coloring repeats a color on axis {} at {:?}", v.axis, v.start)));
    }
    Ok(scheme)
}

fn from_net(net: &DigitalNet, disks: u32, mode: Mode, k: u32, warnings: Vec<String>) -> Result<Scheme> {
    let params = net.params();
    Ok(Scheme {
        coloring: coloring_from_net(net, disks)?,
        mode,
        provenance: Provenance {
            base: Some(params.b),
            m: Some(params.m),
            k: Some(k),
            net: net.provenance().cloned(),
            ..Provenance::default()
        },
        warnings,
    })
}

/// `scheme.json` layout.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SchemeFile {
    pub version: u64,
    #[serde(rename = "M")]
    pub m: u32,
    pub d: usize,
    pub mode: Mode,
    pub anchor: Vec<u32>,
    pub provenance: Provenance,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

impl From<&Scheme> for SchemeFile {
    fn from(s: &Scheme) -> Self {
        SchemeFile {
            version: SCHEME_VERSION,
            m: s.disks(),
            d: s.dim(),
            mode: s.mode,
            anchor: s.coloring.anchor().to_vec(),
            provenance: s.provenance.clone(),
            warnings: s.warnings.clone(),
        }
    }
}

/// Deterministic serialization (one line, trailing newline).
pub fn scheme_to_json(s: &Scheme) -> String {
    let mut out = serde_json::to_string(&SchemeFile::from(s)).expect("scheme serializes");
    out.push('\n');
    out
}

/// Parses and validates a scheme; rejects unknown versions and non-latin anchors.
pub fn scheme_from_json(text: &str) -> Result<Scheme> {
    let value: serde_json::Value = serde_json::from_str(text)?;
    match value.get("version").and_then(|v| v.as_u64()) {
        Some(SCHEME_VERSION) => {}
        Some(v) => return Err(Error::UnsupportedVersion(v)),
        None => return Err(Error::invalid("scheme file has no integer version field")),
    }
    let file: SchemeFile = serde_json::from_value(value)?;
    let coloring = LatinColoring::from_anchor(file.m, file.d, file.anchor)?;
    if let Some(v) = verify_latin(&coloring).violation {
        return Err(Error::NotLatin(format!(
            "axis-{} row starting at {:?} has colors {:?}",
            v.axis, v.start, v.colors
        )));
    }
    Ok(Scheme { coloring, mode: file.mode, provenance: file.provenance, warnings: file.warnings })
}

pub fn write_scheme(s: &Scheme, path: &Path) -> Result<()> {
    std::fs::write(path, scheme_to_json(s))?;
    Ok(())
}

pub fn read_scheme(path: &Path) -> Result<Scheme> {
    scheme_from_json(&std::fs::read_to_string(path)?)
}

/// Rebuilds a net from its recorded generators (or CRT components).
pub fn rebuild_net(prov: &NetProvenance, m: usize) -> Result<DigitalNet> {
    match prov {
        NetProvenance::Generators { field, matrices } => {
            let gf = GaloisField::with_modulus(field.p, field.modulus.clone())?;
            if gf.order() != field.q() {
                return Err(Error::InvalidNet(format!("recorded field GF({}) is inconsistent", field.q())));
            }
            net_from_generators(&GeneratorSet::new(gf, m, matrices.clone())?)
        }
        NetProvenance::Crt { components } => {
            let nets = components.iter().map(|c| rebuild_net(c, m)).collect::<Result<Vec<_>>>()?;
            let b = nets.iter().map(|n| n.params().b as u64).product::<u64>();
            let b = u32::try_from(b).map_err(|_| Error::InvalidNet("composite base overflows".into()))?;
            crt_compose(&nets, b)
        }
    }
}

/// Outcome of [`verify_scheme`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SchemeCheck {
    pub latin: LatinReport,
    /// `None` when the scheme records no net.
    pub net: Option<std::result::Result<(), String>>,
    /// Whether regenerating from the provenance reproduces the anchor map.
    pub reproducible: Option<bool>,
}

impl SchemeCheck {
    pub fn passed(&self) -> bool {
        self.latin.passed() && self.net.as_ref().is_none_or(|r| r.is_ok()) && self.reproducible.unwrap_or(true)
    }
}

/// Latin check plus re-verification of the recorded net: the net is rebuilt
/// from its generators, must be a (0,m,d)-net, and must induce the stored
/// anchor map.
pub fn verify_scheme(s: &Scheme) -> SchemeCheck {
    let latin = verify_latin(&s.coloring);
    let prov = &s.provenance;
    let net =
        match (&prov.net, prov.m) {
            (Some(np), Some(m)) => Some(rebuild_net(np, m).map_err(|e| e.to_string()).and_then(|net| {
                match coloring_from_net(&net, s.disks()) {
                    Ok(c) if c == s.coloring => Ok(()),
                    Ok(_) => Err("recorded net induces a different anchor map".to_string()),
                    Err(e) => Err(e.to_string()),
                }
            })),
            (Some(_), None) => Some(Err("provenance records a net but no depth m".to_string())),
            _ => None,
        };
    let reproducible = match s.mode {
        Mode::Cyclic => {
            let params = BaselineParams { skews: prov.skews.clone(), seed: None };
            Some(
                make_baseline(BaselineKind::Cyclic, s.disks(), s.dim(), &params)
                    .is_ok_and(|r| r.coloring == s.coloring),
            )
        }
        Mode::Random => {
            Some(generate_scheme(s.disks(), s.dim(), Mode::Random, prov.seed).is_ok_and(|r| r.coloring == s.coloring))
        }
        Mode::Checkerboard => {
            Some(generate_scheme(s.disks(), s.dim(), Mode::Checkerboard, None).is_ok_and(|r| r.coloring == s.coloring))
        }
        Mode::Paper | Mode::Smallbase => None,
    };
    SchemeCheck { latin, net, reproducible }
}

/// Writes the block-to-disk map of `[n]^d` as CSV `x1,...,xd,disk`, rows in
/// lexicographic block order.
pub fn export_map<W: Write>(s: &Scheme, n: u64, budget: &Budget, out: W) -> Result<()> {
    budget.check(n, s.dim(), 1)?;
    let d = s.dim();
    let mut w = csv::Writer::from_writer(out);
    let mut header: Vec<String> = (1..=d).map(|i| format!("x{i}")).collect();
    header.push("disk".into());
    w.write_record(&header).map_err(csv_err)?;
    if n > 0 {
        let full = crate::discrepancy::GridBox::full(n, d);
        let mut row = Vec::with_capacity(d + 1);
        for x in full.cells() {
            row.clear();
            row.extend(x.iter().map(|v| v.to_string()));
            row.push(s.coloring.tiled_color(&x)?.to_string());
            w.write_record(&row).map_err(csv_err)?;
        }
    }
    w.flush()?;
    Ok(())
}

fn csv_err(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::invalid(format!("csv: {other:?}")),
    }
}

/// One evaluated `(M, d, N, mode)` cell of a sweep.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SweepRow {
    #[serde(rename = "M")]
    pub m: u32,
    pub d: usize,
    #[serde(rename = "N")]
    pub n: u64,
    pub mode: Mode,
    pub disc_num: i64,
    pub disc_plus_num: i64,
    #[serde(skip)]
    pub runtime_ms: u128,
}

#[derive(Debug, Clone)]
pub struct SweepConfig {
    pub dims: Vec<usize>,
    pub disks: RangeInclusive<u32>,
    pub modes: Vec<Mode>,
    pub extent_multiplier: u64,
    pub seed: Option<u64>,
}

/// A cell that was not evaluated and why.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Skipped {
    pub m: u32,
    pub d: usize,
    pub mode: Mode,
    pub reason: String,
}

/// Evaluates every `(M, d, mode)` cell at `N = k M`; cells run in parallel and
/// come back in `(d, M, mode)` order. Cells whose construction preconditions
/// fail are skipped, not errors.
pub fn run_sweep(cfg: &SweepConfig, budget: &Budget) -> Result<(Vec<SweepRow>, Vec<Skipped>)> {
    if cfg.extent_multiplier < 1 {
        return Err(Error::invalid("extent multiplier must be >= 1"));
    }
    let cells: Vec<(usize, u32, Mode)> = cfg
        .dims
        .iter()
        .flat_map(|&d| cfg.disks.clone().flat_map(move |m| cfg.modes.iter().map(move |&mode| (d, m, mode))))
        .collect();
    let results: Vec<std::result::Result<SweepRow, Skipped>> = cells
        .par_iter()
        .map(|&(d, m, mode)| {
            let skip = |reason: String| Skipped { m, d, mode, reason };
            let start = Instant::now();
            let scheme = generate_scheme(m, d, mode, cfg.seed).map_err(|e| skip(e.to_string()))?;
            let n = m as u64 * cfg.extent_multiplier;
            let r = disc_report(&scheme, n, false, budget).map_err(|e| skip(e.to_string()))?;
            Ok(SweepRow {
                m,
                d,
                n,
                mode,
                disc_num: r.disc.map_or(0, |v| v.num),
                disc_plus_num: r.disc_plus.num,
                runtime_ms: start.elapsed().as_millis(),
            })
        })
        .collect();
    let mut rows = Vec::new();
    let mut skipped = Vec::new();
    for r in results {
        match r {
            Ok(row) => rows.push(row),
            Err(s) => skipped.push(s),
        }
    }
    Ok((rows, skipped))
}

/// Appends rows to a sweep CSV, writing the header only when the file is new
/// or empty.
pub fn append_sweep_csv(path: &Path, rows: &[SweepRow]) -> Result<()> {
    let fresh = std::fs::metadata(path).map_or(true, |m| m.len() == 0);
    let file: File = OpenOptions::new().create(true).append(true).open(path)?;
    let mut w = csv::WriterBuilder::new().has_headers(fresh).from_writer(file);
    for row in rows {
        w.serialize(row).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}
