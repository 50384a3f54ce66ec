use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::kb::KnowledgeBase;
use crate::rdf::Iri;

/// A service that accepts instances of `input_class` and attaches
/// `attached_properties` to them.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RegistryService {
    pub iri: Iri,
    pub input_class: Iri,
    pub attached_properties: BTreeSet<Iri>,
    pub label: Option<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Registry {
    services: Vec<RegistryService>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RegistryError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("duplicate service {0}")]
    DuplicateService(Iri),
    #[error("service {0} attaches no properties")]
    NoProperties(Iri),
}

impl Registry {
    pub fn new(services: Vec<RegistryService>) -> Result<Self, RegistryError> {
        let mut seen = BTreeSet::new();
        for s in &services {
            if s.attached_properties.is_empty() {
                return Err(RegistryError::NoProperties(s.iri.clone()));
            }
            if !seen.insert(&s.iri) {
                return Err(RegistryError::DuplicateService(s.iri.clone()));
            }
        }
        Ok(Registry { services })
    }

    pub fn services(&self) -> &[RegistryService] {
        &self.services
    }

    pub fn len(&self) -> usize {
        self.services.len()
    }

    pub fn is_empty(&self) -> bool {
        self.services.is_empty()
    }

    /// Parses the tab-separated registry format:
    /// `service <TAB> input-class <TAB> prop1,prop2 [<TAB> label]`.
    /// Blank lines and lines starting with `#` are ignored.
    pub fn parse(text: &str) -> Result<Self, RegistryError> {
        let text = text.strip_prefix('\u{feff}').unwrap_or(text);
        let mut services = Vec::new();
        for (n, raw) in text.lines().enumerate() {
            let line = n + 1;
            let trimmed = raw.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let err = |message: &str| RegistryError::Syntax {
                line,
                message: message.to_string(),
            };
            let fields: Vec<&str> = raw.trim_end_matches(['\r', '\n']).split('\t').collect();
            if !(3..=4).contains(&fields.len()) {
                return Err(err("expected 3 or 4 tab-separated fields"));
            }
            let parse_iri = |s: &str, what: &str| {
                Iri::new(s.trim()).map_err(|_| RegistryError::Syntax {
                    line,
                    message: alloc::format!("invalid {what} IRI {:?}", s.trim()),
                })
            };
            let iri = parse_iri(fields[0], "service")?;
            let input_class = parse_iri(fields[1], "input class")?;
            let mut attached_properties = BTreeSet::new();
            for p in fields[2].split(',').map(str::trim).filter(|p| !p.is_empty()) {
                attached_properties.insert(parse_iri(p, "property")?);
            }
            if attached_properties.is_empty() {
                return Err(err("no attached properties"));
            }
            let label = fields.get(3).map(|l| l.trim()).filter(|l| !l.is_empty()).map(String::from);
            services.push(RegistryService {
                iri,
                input_class,
                attached_properties,
                label,
            });
        }
        Registry::new(services)
    }
}

/// Services able to accept an individual with the given types: those whose
/// input class is a (reflexive, transitive) superclass of some focus type.
/// With no focus types nothing is filtered out.
pub fn accepted_services<'r>(
    registry: &'r Registry,
    focus_types: &BTreeSet<Iri>,
    kb: &KnowledgeBase,
) -> Vec<&'r RegistryService> {
    if focus_types.is_empty() {
        return registry.services.iter().collect();
    }
    let closure: BTreeSet<Iri> = focus_types.iter().flat_map(|t| kb.superclasses(t)).collect();
    registry
        .services
        .iter()
        .filter(|s| closure.contains(&s.input_class))
        .collect()
}

/// Properties attached by the accepted services.
pub fn registry_filter(registry: &Registry, focus_types: &BTreeSet<Iri>, kb: &KnowledgeBase) -> BTreeSet<Iri> {
    accepted_services(registry, focus_types, kb)
        .into_iter()
        .flat_map(|s| s.attached_properties.iter().cloned())
        .collect()
}

/// Property to the smallest accepted service IRI attaching it.
pub(crate) fn registry_properties(
    registry: &Registry,
    focus_types: &BTreeSet<Iri>,
    kb: &KnowledgeBase,
) -> BTreeMap<Iri, Iri> {
    let mut out: BTreeMap<Iri, Iri> = BTreeMap::new();
    for s in accepted_services(registry, focus_types, kb) {
        for p in &s.attached_properties {
            match out.get_mut(p) {
                Some(best) if *best <= s.iri => {}
                Some(best) => *best = s.iri.clone(),
                None => {
                    out.insert(p.clone(), s.iri.clone());
                }
            }
        }
    }
    out
}
