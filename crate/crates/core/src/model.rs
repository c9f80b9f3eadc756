//! Domain types shared by every other module: valuations, couples,
//! instances, allocations, set families and colorings.
//!
//! Every type here is valid by construction. The `*File` structs mirror the
//! JSON schemas and may hold invalid data; [`Validate`] reports the first
//! violated invariant and the `TryFrom` conversions refuse invalid input.

use fixedbitset::FixedBitSet;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Violation};
use crate::rational::Rational;

/// Bitset over the items `0..m`.
pub type ItemBits = FixedBitSet;

/// Builds an [`ItemBits`] of width `m` from item indices. Indices must be `< m`.
pub fn bits_from(m: usize, items: impl IntoIterator<Item = usize>) -> ItemBits {
    let mut bits = FixedBitSet::with_capacity(m);
    for x in items {
        bits.insert(x);
    }
    bits
}

pub trait Validate {
    /// Checks every invariant of the value and names the first one violated.
    fn validate(&self) -> Result<(), Violation>;
}

/// Free-function form of [`Validate::validate`].
pub fn validate<T: Validate + ?Sized>(x: &T) -> Result<(), Violation> {
    x.validate()
}

/// Additive valuation: one non-negative exact value per item.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Valuation {
    values: Vec<Rational>,
}

impl Valuation {
    pub fn new(values: Vec<Rational>) -> Result<Self, Violation> {
        if let Some(item) = values.iter().position(Rational::is_negative) {
            return Err(Violation::NegativeValue {
                couple: None,
                agent: None,
                item,
            });
        }
        Ok(Valuation { values })
    }

    pub fn from_integers(values: &[i64]) -> Result<Self, Violation> {
        Self::new(values.iter().map(|&v| Rational::from_integer(v)).collect())
    }

    /// 0/1 valuation that values exactly the items in `set`.
    pub fn indicator(set: &ItemBits, m: usize) -> Self {
        let values = (0..m)
            .map(|x| {
                if set.contains(x) {
                    Rational::ONE
                } else {
                    Rational::ZERO
                }
            })
            .collect();
        Valuation { values }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[Rational] {
        &self.values
    }

    pub fn get(&self, item: usize) -> Rational {
        self.values[item]
    }

    pub fn is_binary(&self) -> bool {
        self.values.iter().all(|v| v.is_zero() || v.is_one())
    }

    pub fn total(&self) -> Rational {
        self.values.iter().sum()
    }

    /// Additive value of a bundle.
    pub fn value(&self, bundle: &ItemBits) -> Rational {
        bundle.ones().map(|x| self.values[x]).sum()
    }
}

/// Additive value of `bundle` under `v`.
pub fn value(v: &Valuation, bundle: &ItemBits) -> Rational {
    v.value(bundle)
}

/// Two agents sharing one bundle.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Couple {
    pub agent1: Valuation,
    pub agent2: Valuation,
}

impl Couple {
    pub fn new(agent1: Valuation, agent2: Valuation) -> Self {
        Couple { agent1, agent2 }
    }

    /// `r` is 0 for the first agent and 1 for the second.
    pub fn agent(&self, r: usize) -> &Valuation {
        match r {
            0 => &self.agent1,
            1 => &self.agent2,
            _ => panic!("a couple has exactly two agents, got agent index {r}"),
        }
    }
}

/// `n` couples with valuations over the items `0..m`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "InstanceFile", into = "InstanceFile")]
pub struct Instance {
    m: usize,
    couples: Vec<Couple>,
    binary: bool,
}

impl Instance {
    pub fn new(m: usize, couples: Vec<Couple>) -> Result<Self, Violation> {
        let binary = couples
            .iter()
            .all(|c| c.agent1.is_binary() && c.agent2.is_binary());
        let inst = Instance { m, couples, binary };
        inst.validate()?;
        Ok(inst)
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.couples.len()
    }

    pub fn couples(&self) -> &[Couple] {
        &self.couples
    }

    pub fn couple(&self, i: usize) -> &Couple {
        &self.couples[i]
    }

    /// True iff every valuation entry is 0 or 1.
    pub fn is_binary(&self) -> bool {
        self.binary
    }
}

impl Validate for Instance {
    fn validate(&self) -> Result<(), Violation> {
        check_instance(
            self.m,
            self.couples
                .iter()
                .map(|c| (c.agent1.values(), c.agent2.values())),
            Some(self.binary),
        )
    }
}

fn check_instance<'a>(
    m: usize,
    couples: impl ExactSizeIterator<Item = (&'a [Rational], &'a [Rational])>,
    binary_flag: Option<bool>,
) -> Result<(), Violation> {
    if couples.len() == 0 {
        return Err(Violation::NoCouples);
    }
    let mut all_binary = true;
    let mut first_non_binary = None;
    for (couple, (a1, a2)) in couples.enumerate() {
        for (agent, values) in [a1, a2].into_iter().enumerate() {
            if values.len() != m {
                return Err(Violation::ValuationLength {
                    couple,
                    agent,
                    len: values.len(),
                    m,
                });
            }
            for (item, v) in values.iter().enumerate() {
                if v.is_negative() {
                    return Err(Violation::NegativeValue {
                        couple: Some(couple),
                        agent: Some(agent),
                        item,
                    });
                }
                if !(v.is_zero() || v.is_one()) && all_binary {
                    all_binary = false;
                    first_non_binary = Some((couple, agent, item));
                }
            }
        }
    }
    match (binary_flag, first_non_binary) {
        (Some(true), Some((couple, agent, item))) => Err(Violation::NonBinaryEntry {
            couple,
            agent,
            item,
        }),
        (Some(false), None) => Err(Violation::BinaryFlagMismatch),
        _ => Ok(()),
    }
}

/// Item-to-couple map; the bundles it induces always partition the items.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "AllocationFile", into = "AllocationFile")]
pub struct Allocation {
    n: usize,
    owner: Vec<usize>,
}

impl Allocation {
    pub fn new(n: usize, owner: Vec<usize>) -> Result<Self, Violation> {
        let alloc = Allocation { n, owner };
        alloc.validate()?;
        Ok(alloc)
    }

    /// Every item to couple 0.
    pub fn single(n: usize, m: usize) -> Self {
        Allocation {
            n: n.max(1),
            owner: vec![0; m],
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.owner.len()
    }

    pub fn owner(&self) -> &[usize] {
        &self.owner
    }

    pub fn owner_of(&self, item: usize) -> usize {
        self.owner[item]
    }

    /// The bundle `S_i` of couple `i`.
    pub fn bundle_of(&self, i: usize) -> Result<ItemBits, Error> {
        if i >= self.n {
            return Err(Error::IndexOutOfRange {
                what: "couple",
                index: i,
                len: self.n,
            });
        }
        Ok(bits_from(
            self.m(),
            self.owner
                .iter()
                .enumerate()
                .filter(|&(_, &o)| o == i)
                .map(|(x, _)| x),
        ))
    }

    pub fn bundles(&self) -> Vec<ItemBits> {
        let mut out = vec![FixedBitSet::with_capacity(self.m()); self.n];
        for (x, &o) in self.owner.iter().enumerate() {
            out[o].insert(x);
        }
        out
    }

    pub fn bundle_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.n];
        for &o in &self.owner {
            sizes[o] += 1;
        }
        sizes
    }
}

impl Validate for Allocation {
    fn validate(&self) -> Result<(), Violation> {
        check_owner(Some(self.n), &self.owner)
    }
}

fn check_owner(n: Option<usize>, owner: &[usize]) -> Result<(), Violation> {
    match n {
        Some(0) => Err(Violation::NoCouples),
        Some(n) => match owner.iter().position(|&o| o >= n) {
            Some(item) => Err(Violation::OwnerOutOfRange {
                item,
                owner: owner[item],
                n,
            }),
            None => Ok(()),
        },
        None => Ok(()),
    }
}

/// `n` subsets of the items `0..m`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "FamilyFile", into = "FamilyFile")]
pub struct SetFamily {
    m: usize,
    sets: Vec<ItemBits>,
}

impl SetFamily {
    pub fn new(m: usize, sets: &[Vec<usize>]) -> Result<Self, Violation> {
        FamilyFile {
            m,
            sets: sets.to_vec(),
        }
        .try_into()
    }

    pub fn from_bits(m: usize, sets: Vec<ItemBits>) -> Result<Self, Violation> {
        if sets.is_empty() {
            return Err(Violation::EmptyFamily);
        }
        for (set, bits) in sets.iter().enumerate() {
            if let Some(item) = bits.ones().find(|&x| x >= m) {
                return Err(Violation::SetItemOutOfRange { set, item, m });
            }
        }
        let sets = sets
            .into_iter()
            .map(|mut b| {
                b.grow(m);
                b
            })
            .collect();
        Ok(SetFamily { m, sets })
    }

    /// Decodes family number `code`: bit `i * m + x` says whether item `x` is in set `i`.
    pub fn from_code(n: usize, m: usize, code: u64) -> Self {
        let sets = (0..n)
            .map(|i| bits_from(m, (0..m).filter(|x| code >> (i * m + x) & 1 == 1)))
            .collect();
        SetFamily { m, sets }
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.sets.len()
    }

    pub fn set(&self, i: usize) -> &ItemBits {
        &self.sets[i]
    }

    pub fn sets(&self) -> &[ItemBits] {
        &self.sets
    }

    pub fn size(&self, i: usize) -> usize {
        self.sets[i].count_ones(..)
    }

    pub fn contains(&self, i: usize, item: usize) -> bool {
        self.sets[i].contains(item)
    }

    /// `M \ A_i`.
    pub fn complement(&self, i: usize) -> ItemBits {
        let mut c = self.sets[i].clone();
        c.toggle_range(..);
        c
    }

    /// For each item, the indices of the sets containing it.
    pub fn incidence(&self) -> Vec<Vec<usize>> {
        (0..self.m)
            .map(|x| {
                (0..self.n())
                    .filter(|&i| self.sets[i].contains(x))
                    .collect()
            })
            .collect()
    }
}

impl Validate for SetFamily {
    fn validate(&self) -> Result<(), Violation> {
        if self.sets.is_empty() {
            return Err(Violation::EmptyFamily);
        }
        for (set, bits) in self.sets.iter().enumerate() {
            if let Some(item) = bits.ones().find(|&x| x >= self.m) {
                return Err(Violation::SetItemOutOfRange {
                    set,
                    item,
                    m: self.m,
                });
            }
        }
        Ok(())
    }
}

/// Map from items to colors `0..k`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "ColoringFile", into = "ColoringFile")]
pub struct Coloring {
    k: usize,
    color: Vec<usize>,
}

impl Coloring {
    pub fn new(k: usize, color: Vec<usize>) -> Result<Self, Violation> {
        let c = Coloring { k, color };
        c.validate()?;
        Ok(c)
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn m(&self) -> usize {
        self.color.len()
    }

    pub fn colors(&self) -> &[usize] {
        &self.color
    }

    pub fn color_of(&self, item: usize) -> usize {
        self.color[item]
    }

    /// The color class of `l`.
    pub fn class(&self, l: usize) -> ItemBits {
        bits_from(
            self.m(),
            self.color
                .iter()
                .enumerate()
                .filter(|&(_, &c)| c == l)
                .map(|(x, _)| x),
        )
    }
}

impl Validate for Coloring {
    fn validate(&self) -> Result<(), Violation> {
        check_colors(self.k, &self.color)
    }
}

fn check_colors(k: usize, color: &[usize]) -> Result<(), Violation> {
    if k == 0 {
        return Err(Violation::NoColors);
    }
    match color.iter().position(|&c| c >= k) {
        Some(item) => Err(Violation::ColorOutOfRange {
            item,
            color: color[item],
            k,
        }),
        None => Ok(()),
    }
}

// ---------------------------------------------------------------------------
// JSON file schemas

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoupleFile {
    pub agent1: Vec<Rational>,
    pub agent2: Vec<Rational>,
}

/// `{"m": int, "couples": [{"agent1": [...], "agent2": [...]}, ...]}`
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceFile {
    pub m: usize,
    pub couples: Vec<CoupleFile>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub binary: Option<bool>,
}

impl Validate for InstanceFile {
    fn validate(&self) -> Result<(), Violation> {
        check_instance(
            self.m,
            self.couples
                .iter()
                .map(|c| (c.agent1.as_slice(), c.agent2.as_slice())),
            self.binary,
        )
    }
}

impl TryFrom<InstanceFile> for Instance {
    type Error = Violation;

    fn try_from(file: InstanceFile) -> Result<Self, Violation> {
        file.validate()?;
        let couples = file
            .couples
            .into_iter()
            .map(|c| {
                Couple::new(
                    Valuation { values: c.agent1 },
                    Valuation { values: c.agent2 },
                )
            })
            .collect();
        Instance::new(file.m, couples)
    }
}

impl From<Instance> for InstanceFile {
    fn from(inst: Instance) -> Self {
        InstanceFile {
            m: inst.m,
            couples: inst
                .couples
                .into_iter()
                .map(|c| CoupleFile {
                    agent1: c.agent1.values,
                    agent2: c.agent2.values,
                })
                .collect(),
            binary: None,
        }
    }
}

/// `{"m": int, "sets": [[item, ...], ...]}`
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilyFile {
    pub m: usize,
    pub sets: Vec<Vec<usize>>,
}

impl Validate for FamilyFile {
    fn validate(&self) -> Result<(), Violation> {
        if self.sets.is_empty() {
            return Err(Violation::EmptyFamily);
        }
        for (set, items) in self.sets.iter().enumerate() {
            let mut seen = FixedBitSet::with_capacity(self.m);
            for &item in items {
                if item >= self.m {
                    return Err(Violation::SetItemOutOfRange {
                        set,
                        item,
                        m: self.m,
                    });
                }
                if seen.put(item) {
                    return Err(Violation::DuplicateItem { set, item });
                }
            }
        }
        Ok(())
    }
}

impl TryFrom<FamilyFile> for SetFamily {
    type Error = Violation;

    fn try_from(file: FamilyFile) -> Result<Self, Violation> {
        file.validate()?;
        let sets = file
            .sets
            .iter()
            .map(|s| bits_from(file.m, s.iter().copied()))
            .collect();
        Ok(SetFamily { m: file.m, sets })
    }
}

impl From<SetFamily> for FamilyFile {
    fn from(fam: SetFamily) -> Self {
        FamilyFile {
            m: fam.m,
            sets: fam.sets.iter().map(|s| s.ones().collect()).collect(),
        }
    }
}

/// `{"owner": [couple, ...]}`, optionally with the couple count `"n"`.
///
/// Without `"n"` the couple count comes from context (the instance or
/// family the allocation is used with), or defaults to `max(owner) + 1`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AllocationFile {
    pub owner: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
}

impl AllocationFile {
    /// Binds the allocation to `n` couples.
    pub fn with_couples(self, n: usize) -> Result<Allocation, Error> {
        if let Some(declared) = self.n {
            if declared != n {
                return Err(Error::DimensionMismatch(format!(
                    "allocation declares {declared} couples but the context has {n}"
                )));
            }
        }
        Ok(Allocation::new(n, self.owner)?)
    }
}

impl Validate for AllocationFile {
    fn validate(&self) -> Result<(), Violation> {
        check_owner(self.n, &self.owner)
    }
}

impl TryFrom<AllocationFile> for Allocation {
    type Error = Violation;

    fn try_from(file: AllocationFile) -> Result<Self, Violation> {
        let n = file
            .n
            .unwrap_or_else(|| file.owner.iter().max().map_or(1, |&o| o + 1));
        Allocation::new(n, file.owner)
    }
}

impl From<Allocation> for AllocationFile {
    fn from(alloc: Allocation) -> Self {
        AllocationFile {
            owner: alloc.owner,
            n: None,
        }
    }
}

/// `{"k": int, "color": [color, ...]}` with zero-based colors.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ColoringFile {
    pub k: usize,
    pub color: Vec<usize>,
}

impl Validate for ColoringFile {
    fn validate(&self) -> Result<(), Violation> {
        check_colors(self.k, &self.color)
    }
}

impl TryFrom<ColoringFile> for Coloring {
    type Error = Violation;

    fn try_from(file: ColoringFile) -> Result<Self, Violation> {
        Coloring::new(file.k, file.color)
    }
}

impl From<Coloring> for ColoringFile {
    fn from(c: Coloring) -> Self {
        ColoringFile {
            k: c.k,
            color: c.color,
        }
    }
}
