use std::collections::{BTreeMap, BTreeSet};
use std::io::BufRead;

use super::title::normalize_title;
use super::IngestError;

/// Many-to-one alias to canonical title mapping.
///
/// Chains (`a -> b -> c`) are collapsed when the map is built, so a single
/// lookup always lands on a canonical title and `resolve(resolve(t)) ==
/// resolve(t)` holds for every title.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RedirectMap {
    targets: BTreeMap<String, String>,
}

impl RedirectMap {
    pub fn new() -> Self {
        Self::default()
    }

    /// Build from `(alias, target)` pairs. Titles are normalized first.
    /// Self-redirects are ignored; cycles are an error.
    pub fn from_pairs<I, A, B>(pairs: I) -> Result<Self, IngestError>
    where
        I: IntoIterator<Item = (A, B)>,
        A: AsRef<str>,
        B: AsRef<str>,
    {
        let mut raw: BTreeMap<String, String> = BTreeMap::new();
        for (alias, target) in pairs {
            let alias = normalize_title(alias.as_ref());
            let target = normalize_title(target.as_ref());
            if alias.is_empty() || target.is_empty() || alias == target {
                continue;
            }
            if let Some(prev) = raw.get(&alias) {
                if *prev != target {
                    return Err(IngestError::ConflictingRedirect {
                        alias,
                        first: prev.clone(),
                        second: target,
                    });
                }
            }
            raw.insert(alias, target);
        }

        let mut targets = BTreeMap::new();
        for alias in raw.keys() {
            let mut seen = BTreeSet::new();
            let mut cur = alias.as_str();
            seen.insert(cur);
            while let Some(next) = raw.get(cur) {
                if !seen.insert(next.as_str()) {
                    return Err(IngestError::RedirectCycle(alias.clone()));
                }
                cur = next;
            }
            targets.insert(alias.clone(), cur.to_string());
        }
        Ok(Self { targets })
    }

    /// Parse `alias<TAB>canonical` lines. Blank lines and `#` comments are
    /// skipped; a line without a tab is an error.
    pub fn parse_tsv<R: BufRead>(reader: R) -> Result<Self, IngestError> {
        let mut pairs = Vec::new();
        for (lineno, line) in reader.lines().enumerate() {
            let line = line?;
            let line = line.trim_end_matches(['\r', '\n']);
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let (alias, target) = line.split_once('\t').ok_or(IngestError::Malformed {
                what: "redirect map",
                line: lineno + 1,
                reason: "expected alias<TAB>canonical".into(),
            })?;
            if target.contains('\t') {
                return Err(IngestError::Malformed {
                    what: "redirect map",
                    line: lineno + 1,
                    reason: "too many columns".into(),
                });
            }
            pairs.push((alias.to_string(), target.to_string()));
        }
        Self::from_pairs(pairs)
    }

    /// Canonical form of an already-normalized title.
    pub fn resolve<'a>(&'a self, title: &'a str) -> &'a str {
        self.targets.get(title).map(String::as_str).unwrap_or(title)
    }

    /// Normalize and resolve a raw title.
    pub fn canonical(&self, raw: &str) -> String {
        let t = normalize_title(raw);
        match self.targets.get(&t) {
            Some(c) => c.clone(),
            None => t,
        }
    }

    /// All aliases that resolve to `canonical` (excluding itself).
    pub fn aliases_of(&self, canonical: &str) -> Vec<&str> {
        self.targets
            .iter()
            .filter(|(_, t)| t.as_str() == canonical)
            .map(|(a, _)| a.as_str())
            .collect()
    }

    pub fn len(&self) -> usize {
        self.targets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.targets.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &str)> {
        self.targets.iter().map(|(a, t)| (a.as_str(), t.as_str()))
    }

    /// Serialize back to TSV with dump-style underscores.
    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        for (a, t) in &self.targets {
            out.push_str(&super::title::dump_title(a));
            out.push('\t');
            out.push_str(&super::title::dump_title(t));
            out.push('\n');
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chains_collapse() {
        let m = RedirectMap::from_pairs([("USA", "U.S."), ("U.S.", "United_States")]).unwrap();
        assert_eq!(m.resolve("USA"), "United States");
        assert_eq!(m.resolve("U.S."), "United States");
        assert_eq!(m.resolve("United States"), "United States");
        let mut al = m.aliases_of("United States");
        al.sort();
        assert_eq!(al, vec!["U.S.", "USA"]);
    }

    #[test]
    fn cycle_rejected() {
        let err = RedirectMap::from_pairs([("A", "B"), ("B", "C"), ("C", "A")]).unwrap_err();
        assert!(matches!(err, IngestError::RedirectCycle(_)));
    }

    #[test]
    fn conflicting_targets_rejected() {
        let err = RedirectMap::from_pairs([("A", "B"), ("A", "C")]).unwrap_err();
        assert!(matches!(err, IngestError::ConflictingRedirect { .. }));
    }

    #[test]
    fn tsv_parse() {
        let text = "# comment\nmagnitude\tMoment_magnitude_scale\nAnchorage\tAnchorage,_Alaska\n\n";
        let m = RedirectMap::parse_tsv(text.as_bytes()).unwrap();
        assert_eq!(m.canonical("magnitude"), "Moment magnitude scale");
        assert_eq!(m.canonical("Anchorage"), "Anchorage, Alaska");
        assert_eq!(m.canonical("Alaska"), "Alaska");
        let back = RedirectMap::parse_tsv(m.to_tsv().as_bytes()).unwrap();
        assert_eq!(back, m);
        assert!(RedirectMap::parse_tsv("no tab here\n".as_bytes()).is_err());
    }

    #[test]
    fn idempotence_over_fixture() {
        let m = RedirectMap::from_pairs([
            ("USA", "United States"),
            ("US", "USA"),
            ("America", "US"),
            ("UK", "United Kingdom"),
        ])
        .unwrap();
        for t in ["USA", "US", "America", "UK", "United States", "Other"] {
            let once = m.resolve(t);
            assert_eq!(m.resolve(once), once);
        }
    }
}
