//! Finite ground sets inside abelian groups.
//!
//! Every ground set lives in an ambient group `Z^a x Z_{m_1} x ...`, stored as
//! one modulus per coordinate with `0` meaning the integers. Elements are
//! coordinate vectors with residues reduced into `[0, m)`.

use std::collections::HashMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;
use std::sync::{Arc, OnceLock};

use num_bigint::BigUint;
use num_traits::One;

use crate::error::{Error, Result};
use crate::group::{FiniteAbelianGroup, DEFAULT_ENUMERATION_LIMIT};
use crate::matrix::RankProvider;
use crate::primes::sieve_primes;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum GroundKind {
    /// `[n] = {1, ..., n}`.
    Interval { n: u64 },
    /// `[n]^d`.
    Lattice { n: u64, d: u32 },
    Cyclic { n: u64 },
    /// `G^n`.
    GroupPower { base: FiniteAbelianGroup, n: u32 },
    /// Primes up to `n`.
    Primes { n: u64 },
    Explicit,
}

/// A materialized list of elements with coordinate arithmetic.
#[derive(Clone, Debug)]
pub struct Elements {
    moduli: Vec<u64>,
    coords: Vec<i64>,
    index: OnceLock<HashMap<Box<[i64]>, u32>>,
}

impl Elements {
    pub fn new(moduli: Vec<u64>, coords: Vec<i64>) -> Self {
        debug_assert!(moduli.is_empty() || coords.len().is_multiple_of(moduli.len()));
        Elements {
            moduli,
            coords,
            index: OnceLock::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.moduli.len()
    }

    pub fn moduli(&self) -> &[u64] {
        &self.moduli
    }

    pub fn len(&self) -> usize {
        if self.moduli.is_empty() {
            0
        } else {
            self.coords.len() / self.moduli.len()
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn get(&self, i: usize) -> &[i64] {
        let d = self.dim();
        &self.coords[i * d..(i + 1) * d]
    }

    pub fn iter(&self) -> impl Iterator<Item = &[i64]> {
        self.coords.chunks(self.dim().max(1))
    }

    /// Reduces a raw value into the canonical range of coordinate `c`.
    #[inline]
    pub fn reduce(&self, c: usize, v: i128) -> i64 {
        reduce(self.moduli[c], v)
    }

    pub fn position(&self, x: &[i64]) -> Option<u32> {
        self.index
            .get_or_init(|| {
                self.iter()
                    .enumerate()
                    .map(|(i, x)| (x.to_vec().into_boxed_slice(), i as u32))
                    .collect()
            })
            .get(x)
            .copied()
    }

    pub fn subset(&self, indices: &[u32]) -> Elements {
        let mut coords = Vec::with_capacity(indices.len() * self.dim());
        for &i in indices {
            coords.extend_from_slice(self.get(i as usize));
        }
        Elements::new(self.moduli.clone(), coords)
    }

    pub fn format(&self, i: usize) -> String {
        format_element(self.get(i))
    }
}

#[inline]
pub(crate) fn reduce(m: u64, v: i128) -> i64 {
    if m == 0 {
        v as i64
    } else {
        v.rem_euclid(m as i128) as i64
    }
}

pub fn format_element(x: &[i64]) -> String {
    if x.len() == 1 {
        x[0].to_string()
    } else {
        let parts: Vec<String> = x.iter().map(|v| v.to_string()).collect();
        format!("({})", parts.join(","))
    }
}

/// A finite subset of an abelian group.
#[derive(Clone, Debug)]
pub struct GroundSet {
    kind: GroundKind,
    moduli: Vec<u64>,
    exclude_identity: bool,
    limit: u64,
    explicit: Option<Arc<Elements>>,
    cache: OnceLock<Arc<Elements>>,
}

impl PartialEq for GroundSet {
    fn eq(&self, other: &Self) -> bool {
        self.kind == other.kind
            && self.moduli == other.moduli
            && self.exclude_identity == other.exclude_identity
            && match (&self.explicit, &other.explicit) {
                (Some(a), Some(b)) => a.coords == b.coords,
                (None, None) => true,
                _ => false,
            }
    }
}

impl GroundSet {
    fn with_kind(kind: GroundKind, moduli: Vec<u64>) -> Self {
        GroundSet {
            kind,
            moduli,
            exclude_identity: false,
            limit: DEFAULT_ENUMERATION_LIMIT,
            explicit: None,
            cache: OnceLock::new(),
        }
    }

    pub fn interval(n: u64) -> Result<Self> {
        if n == 0 {
            return Err(Error::Invalid("interval needs n >= 1".into()));
        }
        Ok(Self::with_kind(GroundKind::Interval { n }, vec![0]))
    }

    pub fn lattice(n: u64, d: u32) -> Result<Self> {
        if n == 0 || d == 0 {
            return Err(Error::Invalid("lattice needs n >= 1 and d >= 1".into()));
        }
        Ok(Self::with_kind(GroundKind::Lattice { n, d }, vec![0; d as usize]))
    }

    pub fn cyclic(n: u64) -> Result<Self> {
        if n == 0 {
            return Err(Error::Invalid("cyclic group needs n >= 1".into()));
        }
        Ok(Self::with_kind(GroundKind::Cyclic { n }, vec![n]))
    }

    pub fn group_power(base: FiniteAbelianGroup, n: u32) -> Result<Self> {
        if n == 0 {
            return Err(Error::Invalid("group power needs n >= 1".into()));
        }
        let moduli = base.pow(n).moduli();
        Ok(Self::with_kind(GroundKind::GroupPower { base, n }, moduli))
    }

    pub fn group(g: &FiniteAbelianGroup) -> Self {
        Self::group_power(FiniteAbelianGroup::power_of(g.base_moduli().to_vec(), 1).unwrap(), g.power())
            .expect("groups have power >= 1")
    }

    pub fn primes(n: u64) -> Result<Self> {
        if n < 2 {
            return Err(Error::Invalid("primes need n >= 2".into()));
        }
        Ok(Self::with_kind(GroundKind::Primes { n }, vec![0]))
    }

    /// An explicit list of distinct elements in the ambient group given by `moduli`.
    pub fn explicit(moduli: Vec<u64>, elements: Vec<Vec<i64>>) -> Result<Self> {
        if moduli.is_empty() {
            return Err(Error::Invalid("explicit ground set needs a dimension".into()));
        }
        let mut coords = Vec::with_capacity(elements.len() * moduli.len());
        for e in &elements {
            if e.len() != moduli.len() {
                return Err(Error::Invalid(format!(
                    "element {} has {} coordinates, expected {}",
                    format_element(e),
                    e.len(),
                    moduli.len()
                )));
            }
            for (c, &v) in e.iter().enumerate() {
                coords.push(reduce(moduli[c], v as i128));
            }
        }
        let els = Elements::new(moduli.clone(), coords);
        let mut seen = std::collections::HashSet::new();
        for x in els.iter() {
            if !seen.insert(x) {
                return Err(Error::Invalid(format!("duplicate element {}", format_element(x))));
            }
        }
        let mut gs = Self::with_kind(GroundKind::Explicit, moduli);
        gs.explicit = Some(Arc::new(els));
        Ok(gs)
    }

    /// Wraps already-validated distinct elements.
    pub fn from_elements(els: Elements) -> Self {
        let mut gs = Self::with_kind(GroundKind::Explicit, els.moduli.clone());
        gs.explicit = Some(Arc::new(els));
        gs
    }

    pub fn excluding_identity(mut self) -> Self {
        self.exclude_identity = true;
        self.cache = OnceLock::new();
        self
    }

    pub fn with_limit(mut self, limit: u64) -> Self {
        self.limit = limit;
        self
    }

    pub fn kind(&self) -> &GroundKind {
        &self.kind
    }

    pub fn moduli(&self) -> &[u64] {
        &self.moduli
    }

    pub fn excludes_identity(&self) -> bool {
        self.exclude_identity
    }

    pub fn limit(&self) -> u64 {
        self.limit
    }

    /// The ambient finite group, for cyclic groups and group powers.
    pub fn ambient_group(&self) -> Option<FiniteAbelianGroup> {
        match &self.kind {
            GroundKind::Cyclic { n } => FiniteAbelianGroup::cyclic(*n).ok(),
            GroundKind::GroupPower { base, n } => Some(base.pow(*n)),
            _ => None,
        }
    }

    /// True when the set is a whole finite abelian group.
    pub fn is_full_group(&self) -> bool {
        self.ambient_group().is_some() && !self.exclude_identity
    }

    /// Whether the set sits inside a torsion-free ambient `Z^d`.
    pub fn is_integral(&self) -> bool {
        self.moduli.iter().all(|&m| m == 0)
    }

    pub fn size(&self) -> Result<BigUint> {
        let raw = match &self.kind {
            GroundKind::Interval { n } => BigUint::from(*n),
            GroundKind::Lattice { n, d } => BigUint::from(*n).pow(*d),
            GroundKind::Cyclic { n } => BigUint::from(*n),
            GroundKind::GroupPower { base, n } => base.order().pow(*n),
            GroundKind::Primes { .. } | GroundKind::Explicit => {
                return Ok(BigUint::from(self.elements()?.len()));
            }
        };
        let drop = self.exclude_identity && self.ambient_group().is_some();
        Ok(if drop { raw - BigUint::one() } else { raw })
    }

    /// The rank notion for this set: group rank for cyclic groups and group
    /// powers (the ambient group when the identity is excluded), rational
    /// rank for subsets of `Z^d`.
    pub fn rank_provider(&self) -> Result<RankProvider> {
        if let Some(g) = self.ambient_group() {
            return Ok(RankProvider::Group(g));
        }
        if self.is_integral() {
            return Ok(RankProvider::Rational);
        }
        Err(Error::RankUndefined(self.to_string()))
    }

    pub fn elements(&self) -> Result<Arc<Elements>> {
        if let Some(e) = &self.explicit {
            return Ok(self.filter_identity(e.clone()));
        }
        if let Some(e) = self.cache.get() {
            return Ok(e.clone());
        }
        let els = Arc::new(self.materialize()?);
        let _ = self.cache.set(els.clone());
        Ok(els)
    }

    fn filter_identity(&self, e: Arc<Elements>) -> Arc<Elements> {
        if !self.exclude_identity || e.iter().all(|x| x.iter().any(|&v| v != 0)) {
            return e;
        }
        let keep: Vec<u32> = (0..e.len() as u32)
            .filter(|&i| e.get(i as usize).iter().any(|&v| v != 0))
            .collect();
        Arc::new(e.subset(&keep))
    }

    fn materialize(&self) -> Result<Elements> {
        let check = |size: BigUint| -> Result<()> {
            if size > BigUint::from(self.limit) {
                return Err(Error::LimitExceeded {
                    needed: size.to_string(),
                    limit: self.limit,
                });
            }
            Ok(())
        };
        let mut coords = Vec::new();
        match &self.kind {
            GroundKind::Interval { n } => {
                check(BigUint::from(*n))?;
                coords.extend(1..=*n as i64);
            }
            GroundKind::Lattice { n, d } => {
                check(BigUint::from(*n).pow(*d))?;
                let d = *d as usize;
                let mut cur = vec![1i64; d];
                loop {
                    coords.extend_from_slice(&cur);
                    let mut i = d;
                    loop {
                        if i == 0 {
                            return Ok(Elements::new(self.moduli.clone(), coords));
                        }
                        i -= 1;
                        if cur[i] < *n as i64 {
                            cur[i] += 1;
                            break;
                        }
                        cur[i] = 1;
                    }
                }
            }
            GroundKind::Cyclic { .. } | GroundKind::GroupPower { .. } => {
                let g = self.ambient_group().expect("group kinds have a group");
                for e in g.enumerate_elements(self.limit)? {
                    if self.exclude_identity && e.residues.iter().all(|&r| r == 0) {
                        continue;
                    }
                    coords.extend(e.residues.iter().map(|&r| r as i64));
                }
            }
            GroundKind::Primes { n } => {
                let table = sieve_primes(*n)?;
                check(BigUint::from(table.count()))?;
                coords.extend(table.primes().into_iter().map(|p| p as i64));
            }
            GroundKind::Explicit => unreachable!("explicit sets are stored"),
        }
        Ok(Elements::new(self.moduli.clone(), coords))
    }

    /// Reads an explicit ground set: one element per line, coordinates separated by
    /// whitespace or commas, `#` comments. `ambient` gives the moduli (`None` = `Z^d`).
    pub fn read_explicit(path: &Path, ambient: Option<&FiniteAbelianGroup>) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
        let mut elements = Vec::new();
        for (no, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let e = line
                .split(|c: char| c.is_whitespace() || c == ',')
                .filter(|t| !t.is_empty())
                .map(|t| {
                    t.parse::<i64>().map_err(|_| {
                        Error::Parse(format!("{}:{}: bad integer {t:?}", path.display(), no + 1))
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            elements.push(e);
        }
        let moduli = match ambient {
            Some(g) => g.moduli(),
            None => vec![0; elements.first().map_or(1, |e| e.len())],
        };
        Self::explicit(moduli, elements)
    }
}

impl fmt::Display for GroundSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            GroundKind::Interval { n } => write!(f, "interval:{n}")?,
            GroundKind::Lattice { n, d } => write!(f, "lattice:{n}:{d}")?,
            GroundKind::Cyclic { n } => write!(f, "cyclic:{n}")?,
            GroundKind::GroupPower { base, n } => write!(f, "power:{base}:{n}")?,
            GroundKind::Primes { n } => write!(f, "primes:{n}")?,
            GroundKind::Explicit => {
                let size = self.explicit.as_ref().map_or(0, |e| e.len());
                write!(f, "explicit[{size}]")?
            }
        }
        if self.exclude_identity {
            write!(f, "-0")?;
        }
        Ok(())
    }
}

fn parse_u64(s: &str, what: &str) -> Result<u64> {
    s.parse::<u64>()
        .map_err(|_| Error::Parse(format!("bad {what} {s:?}")))
}

/// Parses `interval:100`, `lattice:10:2`, `cyclic:36`, `power:Z4:3`,
/// `primes:100000`, `explicit:@file` or `explicit:Z4^3:@file`, each optionally
/// followed by `-0` to exclude the identity.
impl FromStr for GroundSet {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (body, exclude) = match s.strip_suffix("-0") {
            Some(b) => (b, true),
            None => (s, false),
        };
        let parts: Vec<&str> = body.split(':').collect();
        let bad = || Error::Parse(format!("unrecognized ground set {s:?}"));
        let gs = match parts.as_slice() {
            ["interval", n] => {
                let n = parse_u64(n, "interval size")?;
                if n == 0 {
                    return Err(Error::Parse("interval size must be at least 1".into()));
                }
                GroundSet::interval(n)?
            }
            ["lattice", n, d] => {
                let n = parse_u64(n, "lattice side")?;
                let d = parse_u64(d, "lattice dimension")?;
                if n == 0 || d == 0 || d > 16 {
                    return Err(Error::Parse(format!("bad lattice {s:?}")));
                }
                GroundSet::lattice(n, d as u32)?
            }
            ["cyclic", n] => {
                let n = parse_u64(n, "modulus")?;
                if n == 0 {
                    return Err(Error::Parse("cyclic modulus must be at least 1".into()));
                }
                GroundSet::cyclic(n)?
            }
            ["power", g, n] => {
                let g: FiniteAbelianGroup = g.parse()?;
                let n = parse_u64(n, "power")?;
                let n = u32::try_from(n).ok().filter(|&n| n >= 1).ok_or_else(bad)?;
                GroundSet::group_power(g, n)?
            }
            ["primes", n] => {
                let n = parse_u64(n, "prime bound")?;
                if n < 2 {
                    return Err(Error::Parse("prime bound must be at least 2".into()));
                }
                GroundSet::primes(n)?
            }
            ["explicit", file] => {
                let path = file.strip_prefix('@').ok_or_else(bad)?;
                GroundSet::read_explicit(Path::new(path), None)?
            }
            ["explicit", g, file] => {
                let g: FiniteAbelianGroup = g.parse()?;
                let path = file.strip_prefix('@').ok_or_else(bad)?;
                GroundSet::read_explicit(Path::new(path), Some(&g))?
            }
            _ => return Err(bad()),
        };
        Ok(if exclude { gs.excluding_identity() } else { gs })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    #[test]
    fn parse_specs() {
        let cases = [
            ("interval:100", 100u64),
            ("lattice:10:2", 100),
            ("cyclic:36", 36),
            ("power:Z4:3", 64),
            ("primes:100000", 9592),
            ("power:Z4:3-0", 63),
            ("cyclic:36-0", 35),
        ];
        for (spec, size) in cases {
            let g: GroundSet = spec.parse().unwrap();
            assert_eq!(g.size().unwrap(), BigUint::from(size), "{spec}");
            assert_eq!(g.elements().unwrap().len() as u64, size, "{spec}");
            assert_eq!(g.to_string(), spec);
        }
        for bad in ["cyclic:0", "interval:x", "power:Z0:2", "nope:3", "lattice:3", "explicit:file"] {
            assert!(bad.parse::<GroundSet>().is_err(), "{bad}");
        }
    }

    #[test]
    fn interval_and_lattice_elements() {
        let i = GroundSet::interval(3).unwrap().elements().unwrap();
        assert_eq!(i.iter().collect::<Vec<_>>(), vec![&[1][..], &[2], &[3]]);
        let l = GroundSet::lattice(2, 2).unwrap().elements().unwrap();
        assert_eq!(l.len(), 4);
        assert_eq!(l.get(1), &[1, 2]);
        assert_eq!(l.position(&[2, 1]), Some(2));
    }

    #[test]
    fn explicit_from_file() {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        writeln!(f, "# some elements\n1 2\n3,0\n").unwrap();
        let spec = format!("explicit:Z4^2:@{}", f.path().display());
        let g: GroundSet = spec.parse().unwrap();
        assert_eq!(g.size().unwrap(), BigUint::from(2u32));
        assert!(g.rank_provider().is_err());
        let spec = format!("explicit:@{}", f.path().display());
        let g: GroundSet = spec.parse().unwrap();
        assert_eq!(g.rank_provider().unwrap(), RankProvider::Rational);
        assert!(GroundSet::explicit(vec![4], vec![vec![1], vec![5]]).is_err());
    }

    #[test]
    fn limits_are_enforced() {
        let g = GroundSet::interval(1000).unwrap().with_limit(10);
        assert!(matches!(g.elements(), Err(Error::LimitExceeded { .. })));
        assert_eq!(g.size().unwrap(), BigUint::from(1000u32));
    }

    #[test]
    fn providers() {
        let z: GroundSet = "cyclic:6".parse().unwrap();
        assert_eq!(
            z.rank_provider().unwrap(),
            RankProvider::Group(FiniteAbelianGroup::cyclic(6).unwrap())
        );
        assert!(z.is_full_group());
        assert!(!"cyclic:6-0".parse::<GroundSet>().unwrap().is_full_group());
        assert_eq!(
            GroundSet::primes(50).unwrap().rank_provider().unwrap(),
            RankProvider::Rational
        );
    }
}
