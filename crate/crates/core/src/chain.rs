//! Binary substitution chains over `{A, B}` and their link to the linear case.
//!
//! Abelianizing a rule gives the count map
//! `(n_A, n_B) ↦ M (n_A, n_B)` with
//! `M = [[#A in img A, #A in img B], [#B in img A, #B in img B]]`. When
//! `M = [[r, 1], [s, 0]]` this is the ladder map of `f(x) = r x`, `g(x) = s x`,
//! so the counts after `n` inflations are the eigenvalues `(α_n, β_n)` grown
//! from the seed's counts.

use std::fmt::Write as _;
use std::str::FromStr;

use serde::Serialize;

use crate::algebra::{CharacteristicFunctions, LinearParams, VacuumState};
use crate::error::{GhaError, Result};
use crate::rep_builder::iterate_eigenvalues;

/// Default cap on the length of a stored word.
pub const DEFAULT_WORD_CAP: usize = 1_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SubstitutionRule {
    image_a: String,
    image_b: String,
}

impl SubstitutionRule {
    pub fn new(image_a: &str, image_b: &str) -> Result<Self> {
        for (symbol, image) in [('A', image_a), ('B', image_b)] {
            if image.is_empty() {
                return Err(GhaError::InvalidRule(format!("image of {symbol} is empty")));
            }
            check_word(image)?;
        }
        Ok(Self {
            image_a: image_a.to_owned(),
            image_b: image_b.to_owned(),
        })
    }

    pub fn fibonacci() -> Self {
        Self::new("AB", "A").expect("valid rule")
    }

    pub fn image_a(&self) -> &str {
        &self.image_a
    }

    pub fn image_b(&self) -> &str {
        &self.image_b
    }

    fn image(&self, symbol: u8) -> &str {
        if symbol == b'A' {
            &self.image_a
        } else {
            &self.image_b
        }
    }
}

/// Parses `"A:<word>,B:<word>"`; the two entries may come in either order.
impl FromStr for SubstitutionRule {
    type Err = GhaError;

    fn from_str(text: &str) -> Result<Self> {
        let (mut image_a, mut image_b) = (None, None);
        for part in text.split(',') {
            let (symbol, image) = part.split_once(':').ok_or_else(|| {
                GhaError::InvalidRule(format!("expected SYMBOL:WORD, got {part:?}"))
            })?;
            let slot = match symbol.trim() {
                "A" => &mut image_a,
                "B" => &mut image_b,
                other => return Err(GhaError::InvalidRule(format!("unknown symbol {other:?}"))),
            };
            if slot.replace(image.trim()).is_some() {
                return Err(GhaError::InvalidRule(format!(
                    "symbol {} given twice",
                    symbol.trim()
                )));
            }
        }
        match (image_a, image_b) {
            (Some(a), Some(b)) => Self::new(a, b),
            _ => Err(GhaError::InvalidRule(
                "both A and B images are required".into(),
            )),
        }
    }
}

fn check_word(word: &str) -> Result<()> {
    match word.chars().find(|c| !matches!(c, 'A' | 'B')) {
        Some(c) => Err(GhaError::InvalidRule(format!(
            "symbol {c:?} is outside the alphabet {{A, B}}"
        ))),
        None => Ok(()),
    }
}

/// `(n_A, n_B)`.
pub fn count_symbols(word: &str) -> (u64, u64) {
    let a = word.bytes().filter(|&b| b == b'A').count() as u64;
    (a, word.len() as u64 - a)
}

/// Abelianization matrix, column `j` being the counts in the image of symbol `j`.
pub fn rule_matrix(rule: &SubstitutionRule) -> [[u64; 2]; 2] {
    let (aa, ba) = count_symbols(&rule.image_a);
    let (ab, bb) = count_symbols(&rule.image_b);
    [[aa, ab], [ba, bb]]
}

/// `(r, s)` when the rule matrix has the ladder-map shape `[[r, 1], [s, 0]]`.
pub fn algebra_params(rule: &SubstitutionRule) -> Option<LinearParams> {
    let m = rule_matrix(rule);
    (m[0][1] == 1 && m[1][1] == 0).then(|| LinearParams {
        r: m[0][0] as f64,
        s: m[1][0] as f64,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct InflationTrace {
    pub words: Vec<String>,
    pub counts: Vec<(u64, u64)>,
}

impl InflationTrace {
    /// Words, one per line.
    pub fn words_text(&self) -> String {
        self.words.iter().fold(String::new(), |mut out, w| {
            out.push_str(w);
            out.push('\n');
            out
        })
    }

    pub fn counts_csv(&self) -> String {
        counts_csv(&self.counts)
    }
}

/// `step,nA,nB` rows.
pub fn counts_csv(counts: &[(u64, u64)]) -> String {
    let mut out = String::from("step,nA,nB\n");
    for (k, (a, b)) in counts.iter().enumerate() {
        let _ = writeln!(out, "{k},{a},{b}");
    }
    out
}

pub fn inflate(rule: &SubstitutionRule, seed: &str, steps: usize) -> Result<InflationTrace> {
    inflate_capped(rule, seed, steps, DEFAULT_WORD_CAP)
}

/// `words[k+1]` is `words[k]` with every symbol replaced by its image.
/// Fails with [`GhaError::CapExceeded`] before building a word longer than `cap`.
pub fn inflate_capped(
    rule: &SubstitutionRule,
    seed: &str,
    steps: usize,
    cap: usize,
) -> Result<InflationTrace> {
    if seed.is_empty() {
        return Err(GhaError::InvalidArgument("seed word is empty".into()));
    }
    check_word(seed)?;
    if seed.len() > cap {
        return Err(GhaError::CapExceeded {
            cap,
            last_completed: 0,
        });
    }
    let (len_a, len_b) = (rule.image_a.len() as u64, rule.image_b.len() as u64);
    let mut words = vec![seed.to_owned()];
    let mut counts = vec![count_symbols(seed)];
    for step in 1..=steps {
        let (na, nb) = counts[step - 1];
        let next_len = na
            .checked_mul(len_a)
            .and_then(|x| nb.checked_mul(len_b).and_then(|y| x.checked_add(y)));
        if !next_len.is_some_and(|len| len <= cap as u64) {
            return Err(GhaError::CapExceeded {
                cap,
                last_completed: step - 1,
            });
        }
        let prev = &words[step - 1];
        let mut next = String::with_capacity(next_len.unwrap_or(0) as usize);
        for symbol in prev.bytes() {
            next.push_str(rule.image(symbol));
        }
        counts.push(count_symbols(&next));
        words.push(next);
    }
    Ok(InflationTrace { words, counts })
}

/// Counts only, propagated exactly by the rule matrix; no words are built.
pub fn inflate_counts(
    rule: &SubstitutionRule,
    seed_counts: (u64, u64),
    steps: usize,
) -> Result<Vec<(u64, u64)>> {
    let m = rule_matrix(rule);
    let mut counts = vec![seed_counts];
    for step in 1..=steps {
        let (a, b) = counts[step - 1];
        let row = |i: usize| {
            m[i][0]
                .checked_mul(a)
                .and_then(|x| m[i][1].checked_mul(b).and_then(|y| x.checked_add(y)))
        };
        match (row(0), row(1)) {
            (Some(na), Some(nb)) => counts.push((na, nb)),
            _ => return Err(GhaError::Truncation { index: step }),
        }
    }
    Ok(counts)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorrespondenceReport {
    pub matrix: [[u64; 2]; 2],
    pub algebra_params: Option<LinearParams>,
    pub seed_counts: (u64, u64),
    pub counts: Vec<(u64, u64)>,
    /// `counts[k+1] == M counts[k]` for every step.
    pub matrix_propagation_ok: bool,
    /// Counts equal `(α_n, β_n)`; `None` when the rule is not a ladder map.
    pub eigenvalues_ok: Option<bool>,
    pub first_mismatch: Option<usize>,
}

impl CorrespondenceReport {
    pub fn passed(&self) -> bool {
        self.matrix_propagation_ok && self.eigenvalues_ok != Some(false)
    }
}

/// Inflates `seed` and compares the tallies with the rule-matrix propagation
/// and, for ladder-shaped rules, with the eigenvalue recursion started from
/// the seed's counts.
pub fn verify_count_correspondence(
    rule: &SubstitutionRule,
    seed: &str,
    steps: usize,
) -> Result<CorrespondenceReport> {
    let trace = inflate(rule, seed, steps)?;
    let seed_counts = trace.counts[0];
    let propagated = inflate_counts(rule, seed_counts, steps)?;
    let mut first_mismatch = trace
        .counts
        .iter()
        .zip(&propagated)
        .position(|(x, y)| x != y);
    let matrix_propagation_ok = first_mismatch.is_none();

    let params = algebra_params(rule);
    let eigenvalues_ok = match params {
        Some(p) if steps > 0 => {
            let vacuum = VacuumState::new(seed_counts.0 as f64, seed_counts.1 as f64)?;
            let seq = iterate_eigenvalues(&CharacteristicFunctions::linear(p), vacuum, steps)?;
            let bad =
                trace.counts.iter().enumerate().position(|(n, &(a, b))| {
                    seq.alphas()[n] != a as f64 || seq.betas()[n] != b as f64
                });
            if first_mismatch.is_none() {
                first_mismatch = bad;
            }
            Some(bad.is_none())
        }
        Some(_) => Some(true),
        None => None,
    };

    Ok(CorrespondenceReport {
        matrix: rule_matrix(rule),
        algebra_params: params,
        seed_counts,
        counts: trace.counts,
        matrix_propagation_ok,
        eigenvalues_ok,
        first_mismatch,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fig2() -> SubstitutionRule {
        SubstitutionRule::new("ABA", "A").unwrap()
    }

    #[test]
    fn parse_rules() {
        let rule: SubstitutionRule = "A:AB,B:A".parse().unwrap();
        assert_eq!(rule, SubstitutionRule::fibonacci());
        let rule: SubstitutionRule = " B:A , A:ABA ".parse().unwrap();
        assert_eq!(rule, fig2());
        for bad in ["A:AB", "A:AB,B:", "A:AC,B:A", "A:AB,A:B", "C:A,B:A", "AB"] {
            assert!(bad.parse::<SubstitutionRule>().is_err(), "{bad}");
        }
    }

    #[test]
    fn fibonacci_words() {
        let trace = inflate(&SubstitutionRule::fibonacci(), "A", 4).unwrap();
        assert_eq!(trace.words, ["A", "AB", "ABA", "ABAAB", "ABAABABA"]);
        assert_eq!(trace.counts, [(1, 0), (1, 1), (2, 1), (3, 2), (5, 3)]);
    }

    #[test]
    fn figure_two_words() {
        let trace = inflate(&fig2(), "A", 2).unwrap();
        assert_eq!(trace.words, ["A", "ABA", "ABAAABA"]);
    }

    #[test]
    fn identity_rule_is_constant() {
        let id = SubstitutionRule::new("A", "B").unwrap();
        let trace = inflate(&id, "ABBA", 5).unwrap();
        assert!(trace.words.iter().all(|w| w == "ABBA"));
        assert_eq!(rule_matrix(&id), [[1, 0], [0, 1]]);
        let report = verify_count_correspondence(&id, "ABBA", 5).unwrap();
        assert_eq!(report.eigenvalues_ok, None);
        assert!(report.passed());
    }

    #[test]
    fn matrices() {
        assert_eq!(
            rule_matrix(&SubstitutionRule::fibonacci()),
            [[1, 1], [1, 0]]
        );
        assert_eq!(rule_matrix(&fig2()), [[2, 1], [1, 0]]);
        assert_eq!(
            algebra_params(&fig2()),
            Some(LinearParams { r: 2.0, s: 1.0 })
        );
    }

    #[test]
    fn cap_reports_last_completed_step() {
        let err = inflate_capped(&SubstitutionRule::fibonacci(), "A", 10, 20).unwrap_err();
        // lengths 1, 2, 3, 5, 8, 13, 21
        assert_eq!(
            err,
            GhaError::CapExceeded {
                cap: 20,
                last_completed: 5
            }
        );
    }

    #[test]
    fn correspondence_fibonacci_and_fig2() {
        let report = verify_count_correspondence(&SubstitutionRule::fibonacci(), "A", 10).unwrap();
        assert!(report.passed());
        assert_eq!(report.eigenvalues_ok, Some(true));
        assert_eq!(report.counts[10], (89, 55));
        let report = verify_count_correspondence(&fig2(), "A", 4).unwrap();
        assert!(report.passed());
        assert_eq!(report.counts[2], (5, 2));
    }

    #[test]
    fn csv_and_text_exports() {
        let trace = inflate(&SubstitutionRule::fibonacci(), "A", 2).unwrap();
        assert_eq!(trace.words_text(), "A\nAB\nABA\n");
        assert_eq!(trace.counts_csv(), "step,nA,nB\n0,1,0\n1,1,1\n2,2,1\n");
    }
}
