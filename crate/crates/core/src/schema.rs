//! JSON formats for instances, policies and lottery menus.
//!
//! Rationals are `[numerator, denominator]` pairs and elements are referred
//! to by their string ids.

use std::collections::HashMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::caps::Caps;
use crate::delegation::Policy;
use crate::error::{Error, Result};
use crate::instance::{Element, Instance, Outcome, OutcomeSet, UtilityAtom};
use crate::lottery::{Lottery, LotteryMenu};
use crate::rational::{from_pair, to_pair, Rational};
use crate::set_system::{ElementSet, Kind, SetSystem};

pub type Fraction = [i64; 2];

fn frac(q: &Rational) -> Result<Fraction> {
    let (n, d) = to_pair(q)?;
    Ok([n, d])
}

fn rational(f: &Fraction) -> Result<Rational> {
    from_pair(f[0], f[1])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceFile {
    pub elements: Vec<ElementEntry>,
    pub outer: SetSystemEntry,
    pub inner: SetSystemEntry,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ElementEntry {
    pub id: String,
    pub support: Vec<AtomEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AtomEntry {
    pub x: Fraction,
    pub y: Fraction,
    pub p: Fraction,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum SetSystemEntry {
    Free,
    Uniform { k: usize },
    Partition { blocks: Vec<Vec<String>>, caps: Vec<usize> },
    Explicit { maximal: Vec<Vec<String>> },
    Intersection { parts: Vec<SetSystemEntry> },
}

struct Ids<'a> {
    index: HashMap<&'a str, usize>,
    names: Vec<&'a str>,
}

impl<'a> Ids<'a> {
    fn set(&self, ids: &[String]) -> Result<ElementSet> {
        let mut out = ElementSet::EMPTY;
        for id in ids {
            let e = *self
                .index
                .get(id.as_str())
                .ok_or_else(|| Error::input(format!("unknown element id {id:?}")))?;
            if out.contains(e) {
                return Err(Error::input(format!("element id {id:?} repeated in a set")));
            }
            out = out.with(e);
        }
        Ok(out)
    }

    fn names(&self, set: ElementSet) -> Vec<String> {
        set.iter().map(|e| self.names[e].to_string()).collect()
    }
}

fn build_system(entry: &SetSystemEntry, ids: &Ids<'_>, ground: ElementSet) -> Result<SetSystem> {
    match entry {
        SetSystemEntry::Free => Ok(SetSystem::free(ground)),
        SetSystemEntry::Uniform { k } => Ok(SetSystem::uniform(ground, *k)),
        SetSystemEntry::Partition { blocks, caps } => {
            let blocks = blocks.iter().map(|b| ids.set(b)).collect::<Result<_>>()?;
            SetSystem::partition(ground, blocks, caps.clone())
        }
        SetSystemEntry::Explicit { maximal } => {
            let sets = maximal.iter().map(|s| ids.set(s)).collect::<Result<Vec<_>>>()?;
            SetSystem::explicit(ground, sets)
        }
        SetSystemEntry::Intersection { parts } => {
            let parts = parts.iter().map(|p| build_system(p, ids, ground)).collect::<Result<_>>()?;
            SetSystem::intersection(parts)
        }
    }
}

fn system_entry(system: &SetSystem, ids: &Ids<'_>) -> SetSystemEntry {
    match system.kind() {
        Kind::Free => SetSystemEntry::Free,
        Kind::Uniform { k } => SetSystemEntry::Uniform { k: *k },
        Kind::Partition { blocks, caps } => SetSystemEntry::Partition {
            blocks: blocks.iter().map(|b| ids.names(*b)).collect(),
            caps: caps.clone(),
        },
        Kind::Explicit { maximal } => SetSystemEntry::Explicit {
            maximal: maximal.iter().map(|m| ids.names(*m)).collect(),
        },
        Kind::Intersection(parts) => SetSystemEntry::Intersection {
            parts: parts.iter().map(|p| system_entry(p, ids)).collect(),
        },
    }
}

impl InstanceFile {
    pub fn to_instance(&self) -> Result<Instance> {
        let elements = self
            .elements
            .iter()
            .map(|e| {
                let support = e
                    .support
                    .iter()
                    .map(|a| Ok(UtilityAtom::new(rational(&a.x)?, rational(&a.y)?, rational(&a.p)?)))
                    .collect::<Result<_>>()?;
                Ok(Element::new(e.id.clone(), support))
            })
            .collect::<Result<Vec<_>>>()?;
        let ids = Ids {
            index: self.elements.iter().enumerate().map(|(i, e)| (e.id.as_str(), i)).collect(),
            names: self.elements.iter().map(|e| e.id.as_str()).collect(),
        };
        if ids.index.len() != self.elements.len() {
            return Err(Error::input("element ids are not unique"));
        }
        let ground = ElementSet::full(elements.len());
        let outer = build_system(&self.outer, &ids, ground)?;
        let inner = build_system(&self.inner, &ids, ground)?;
        Instance::new(elements, outer, inner)
    }

    pub fn from_instance(instance: &Instance) -> Result<InstanceFile> {
        let ids = Ids {
            index: HashMap::new(),
            names: instance.elements().iter().map(|e| e.id.as_str()).collect(),
        };
        let elements = instance
            .elements()
            .iter()
            .map(|e| {
                let support = e
                    .support
                    .iter()
                    .map(|a| Ok(AtomEntry { x: frac(&a.x)?, y: frac(&a.y)?, p: frac(&a.prob)? }))
                    .collect::<Result<_>>()?;
                Ok(ElementEntry { id: e.id.clone(), support })
            })
            .collect::<Result<_>>()?;
        Ok(InstanceFile {
            elements,
            outer: system_entry(instance.outer(), &ids),
            inner: system_entry(instance.inner(), &ids),
        })
    }
}

pub fn parse_instance(json: &str) -> Result<Instance> {
    serde_json::from_str::<InstanceFile>(json)?.to_instance()
}

pub fn load_instance(path: &Path) -> Result<Instance> {
    parse_instance(&std::fs::read_to_string(path)?)
}

pub fn instance_to_json(instance: &Instance) -> Result<String> {
    Ok(serde_json::to_string_pretty(&InstanceFile::from_instance(instance)?)?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutcomeEntry {
    pub element: String,
    pub x: Fraction,
    pub y: Fraction,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum PolicyFile {
    Explicit { acceptable: Vec<Vec<OutcomeEntry>> },
    XThreshold { tau: Fraction },
}

fn outcome_set(instance: &Instance, entries: &[OutcomeEntry]) -> Result<OutcomeSet> {
    let set: OutcomeSet = entries
        .iter()
        .map(|o| {
            Ok(Outcome {
                element: instance.index_of(&o.element)?,
                x: rational(&o.x)?,
                y: rational(&o.y)?,
            })
        })
        .collect::<Result<_>>()?;
    if set.len() != entries.len() {
        return Err(Error::input("an outcome set lists the same outcome twice"));
    }
    Ok(set)
}

fn outcome_entries(instance: &Instance, set: &OutcomeSet) -> Result<Vec<OutcomeEntry>> {
    set.iter()
        .map(|o| {
            Ok(OutcomeEntry {
                element: instance.id(o.element).to_string(),
                x: frac(&o.x)?,
                y: frac(&o.y)?,
            })
        })
        .collect()
}

impl PolicyFile {
    pub fn to_policy(&self, instance: &Instance) -> Result<Policy> {
        match self {
            PolicyFile::Explicit { acceptable } => Policy::explicit(
                instance,
                acceptable
                    .iter()
                    .map(|s| outcome_set(instance, s))
                    .collect::<Result<Vec<_>>>()?,
            ),
            PolicyFile::XThreshold { tau } => Ok(Policy::XThreshold { tau: rational(tau)? }),
        }
    }

    /// Threshold policies keep their form; anything else is written as the
    /// explicit family it accepts on `instance`.
    pub fn from_policy(instance: &Instance, policy: &Policy, caps: &Caps) -> Result<PolicyFile> {
        let explicit = match policy {
            Policy::XThreshold { tau } => return Ok(PolicyFile::XThreshold { tau: frac(tau)? }),
            Policy::Explicit(_) => policy.clone(),
            Policy::Greedy(_) => policy.materialize(instance, caps)?,
        };
        let Policy::Explicit(sets) = explicit else { unreachable!("materialized policies are explicit") };
        Ok(PolicyFile::Explicit {
            acceptable: sets.iter().map(|s| outcome_entries(instance, s)).collect::<Result<_>>()?,
        })
    }
}

/// Single-line form for embedding in reports.
pub fn policy_to_compact_json(instance: &Instance, policy: &Policy, caps: &Caps) -> Result<String> {
    Ok(serde_json::to_string(&PolicyFile::from_policy(instance, policy, caps)?)?)
}

pub fn parse_policy(instance: &Instance, json: &str) -> Result<Policy> {
    serde_json::from_str::<PolicyFile>(json)?.to_policy(instance)
}

pub fn policy_to_json(instance: &Instance, policy: &Policy, caps: &Caps) -> Result<String> {
    Ok(serde_json::to_string_pretty(&PolicyFile::from_policy(instance, policy, caps)?)?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MenuFile {
    pub lotteries: Vec<LotteryEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LotteryEntry {
    pub atoms: Vec<LotteryAtomEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LotteryAtomEntry {
    pub set: Vec<OutcomeEntry>,
    pub p: Fraction,
}

impl MenuFile {
    pub fn to_menu(&self, instance: &Instance) -> Result<LotteryMenu> {
        let lotteries = self
            .lotteries
            .iter()
            .map(|l| {
                Lottery::new(
                    l.atoms
                        .iter()
                        .map(|a| Ok((outcome_set(instance, &a.set)?, rational(&a.p)?)))
                        .collect::<Result<Vec<_>>>()?,
                )
            })
            .collect::<Result<Vec<_>>>()?;
        let menu = LotteryMenu::new(lotteries)?;
        menu.validate(instance)?;
        Ok(menu)
    }

    pub fn from_menu(instance: &Instance, menu: &LotteryMenu) -> Result<MenuFile> {
        let lotteries = menu
            .lotteries()
            .iter()
            .map(|l| {
                let atoms = l
                    .atoms()
                    .iter()
                    .map(|(set, p)| Ok(LotteryAtomEntry { set: outcome_entries(instance, set)?, p: frac(p)? }))
                    .collect::<Result<_>>()?;
                Ok(LotteryEntry { atoms })
            })
            .collect::<Result<_>>()?;
        Ok(MenuFile { lotteries })
    }
}

/// Single-line form for embedding in reports.
pub fn menu_to_compact_json(instance: &Instance, menu: &LotteryMenu) -> Result<String> {
    Ok(serde_json::to_string(&MenuFile::from_menu(instance, menu)?)?)
}

pub fn parse_menu(instance: &Instance, json: &str) -> Result<LotteryMenu> {
    serde_json::from_str::<MenuFile>(json)?.to_menu(instance)
}

pub fn menu_to_json(instance: &Instance, menu: &LotteryMenu) -> Result<String> {
    Ok(serde_json::to_string_pretty(&MenuFile::from_menu(instance, menu)?)?)
}
