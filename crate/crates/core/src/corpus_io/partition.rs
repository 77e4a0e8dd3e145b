use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::{ClassLabel, CorpusError, DomainLabel, TextRecord};

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SubsetKey {
    pub subdomain: String,
    pub generator: String,
}

impl SubsetKey {
    pub fn new(subdomain: impl Into<String>, generator: impl Into<String>) -> Self {
        Self {
            subdomain: subdomain.into(),
            generator: generator.into(),
        }
    }
}

impl fmt::Display for SubsetKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.subdomain, self.generator)
    }
}

/// All HWTs of a subdomain plus the MGTs of one generator in that subdomain.
#[derive(Debug, Clone, PartialEq)]
pub struct Subset {
    pub key: SubsetKey,
    pub domain: DomainLabel,
    pub hwt: Vec<TextRecord>,
    pub mgt: Vec<TextRecord>,
}

impl Subset {
    pub fn len(&self) -> usize {
        self.hwt.len() + self.mgt.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// MGTs first, then HWTs.
    pub fn texts(&self) -> impl Iterator<Item = &TextRecord> {
        self.mgt.iter().chain(&self.hwt)
    }
}

/// Partitions a corpus by unique (subdomain, generator) combinations.
///
/// HWTs are shared by every generator subset of their subdomain, so each HWT
/// appears once per generator while every MGT appears exactly once. A
/// subdomain without HWTs, or with HWTs but no MGTs, is an error.
pub fn partition_subsets(corpus: &[TextRecord]) -> Result<BTreeMap<SubsetKey, Subset>, CorpusError> {
    if corpus.is_empty() {
        return Err(CorpusError::EmptyCorpus);
    }
    struct Group<'a> {
        domain: DomainLabel,
        hwt: Vec<&'a TextRecord>,
        mgt: BTreeMap<&'a str, Vec<&'a TextRecord>>,
    }
    let mut groups: BTreeMap<&str, Group> = BTreeMap::new();
    for r in corpus {
        let g = groups.entry(&r.subdomain).or_insert_with(|| Group {
            domain: r.domain_label,
            hwt: vec![],
            mgt: BTreeMap::new(),
        });
        if g.domain != r.domain_label {
            return Err(CorpusError::MixedDomain {
                subdomain: r.subdomain.clone(),
            });
        }
        match r.class_label {
            ClassLabel::Hwt => g.hwt.push(r),
            ClassLabel::Mgt => g.mgt.entry(&r.generator).or_default().push(r),
        }
    }

    let mut out = BTreeMap::new();
    for (subdomain, g) in groups {
        if g.mgt.is_empty() {
            return Err(CorpusError::EmptySubset {
                key: format!("{subdomain}/*"),
                missing: "MGT",
            });
        }
        for (generator, mgt) in g.mgt {
            let key = SubsetKey::new(subdomain, generator);
            if g.hwt.is_empty() {
                return Err(CorpusError::EmptySubset {
                    key: key.to_string(),
                    missing: "HWT",
                });
            }
            out.insert(
                key.clone(),
                Subset {
                    key,
                    domain: g.domain,
                    hwt: g.hwt.iter().map(|&r| r.clone()).collect(),
                    mgt: mgt.into_iter().cloned().collect(),
                },
            );
        }
    }
    Ok(out)
}
