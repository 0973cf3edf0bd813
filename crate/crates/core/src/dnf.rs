//! DNF formulas over a small Boolean vocabulary: evaluation, exhaustive
//! equivalence checking, exact two-level minimization, and a text grammar
//! for rendering and parsing.
//!
//! Formulas are kept in a canonical form (literals sorted within each
//! conjunction, conjunctions sorted and deduplicated) so that structural
//! equality doubles as a reproducible fixture format.

use std::collections::{HashMap, HashSet};

use crate::error::{Error, Result};

/// Sign of a literal. `Positive` sorts before `Negative`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Polarity {
    Positive,
    Negative,
}

/// A single proposition or its negation, identified by position in the
/// vocabulary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Literal {
    pub feature_index: usize,
    pub polarity: Polarity,
}

impl Literal {
    pub fn positive(feature_index: usize) -> Self {
        Literal {
            feature_index,
            polarity: Polarity::Positive,
        }
    }

    pub fn negative(feature_index: usize) -> Self {
        Literal {
            feature_index,
            polarity: Polarity::Negative,
        }
    }

    fn satisfied_by(&self, assignment: &[bool]) -> bool {
        assignment[self.feature_index] == (self.polarity == Polarity::Positive)
    }
}

/// A conjunction of literals over distinct features. The empty conjunction
/// is the always-true formula.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Conjunction {
    literals: Vec<Literal>,
}

impl Conjunction {
    /// Builds a conjunction, sorting literals by feature index and removing
    /// exact duplicates. A feature appearing with both polarities is
    /// rejected: such a conjunction is unsatisfiable and never part of a
    /// DNF in this crate.
    pub fn new(mut literals: Vec<Literal>) -> Result<Self> {
        literals.sort();
        literals.dedup();
        for pair in literals.windows(2) {
            if pair[0].feature_index == pair[1].feature_index {
                return Err(Error::FormulaParse(format!(
                    "conjunction contains feature {} with both polarities",
                    pair[0].feature_index
                )));
            }
        }
        Ok(Conjunction { literals })
    }

    /// The empty conjunction, true under every assignment.
    pub fn always_true() -> Self {
        Conjunction {
            literals: Vec::new(),
        }
    }

    pub fn literals(&self) -> &[Literal] {
        &self.literals
    }

    pub fn is_empty(&self) -> bool {
        self.literals.is_empty()
    }

    pub fn matches(&self, assignment: &[bool]) -> bool {
        self.literals.iter().all(|l| l.satisfied_by(assignment))
    }

    /// Fast evaluation on a packed assignment (bit i = feature i).
    fn matches_bits(&self, bits: u32) -> bool {
        self.literals.iter().all(|l| {
            let on = bits >> l.feature_index & 1 == 1;
            on == (l.polarity == Polarity::Positive)
        })
    }
}

/// A disjunction of conjunctions in canonical order. The empty disjunction
/// denotes the always-false formula.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DnfFormula {
    conjunctions: Vec<Conjunction>,
    vocabulary_size: usize,
}

impl DnfFormula {
    /// Builds a formula, checking literal indices against the vocabulary
    /// and canonicalizing (sorted, deduplicated conjunctions).
    pub fn new(mut conjunctions: Vec<Conjunction>, vocabulary_size: usize) -> Result<Self> {
        for c in &conjunctions {
            for l in c.literals() {
                if l.feature_index >= vocabulary_size {
                    return Err(Error::InvalidParam(format!(
                        "literal index {} out of range for vocabulary of size {}",
                        l.feature_index, vocabulary_size
                    )));
                }
            }
        }
        conjunctions.sort();
        conjunctions.dedup();
        Ok(DnfFormula {
            conjunctions,
            vocabulary_size,
        })
    }

    /// The always-false formula (empty disjunction).
    pub fn bottom(vocabulary_size: usize) -> Self {
        DnfFormula {
            conjunctions: Vec::new(),
            vocabulary_size,
        }
    }

    /// The always-true formula (single empty conjunction).
    pub fn top(vocabulary_size: usize) -> Self {
        DnfFormula {
            conjunctions: vec![Conjunction::always_true()],
            vocabulary_size,
        }
    }

    pub fn conjunctions(&self) -> &[Conjunction] {
        &self.conjunctions
    }

    pub fn vocabulary_size(&self) -> usize {
        self.vocabulary_size
    }

    pub fn is_bottom(&self) -> bool {
        self.conjunctions.is_empty()
    }

    /// True iff some conjunction has all its literals satisfied.
    pub fn evaluate(&self, assignment: &[bool]) -> Result<bool> {
        if assignment.len() != self.vocabulary_size {
            return Err(Error::LengthMismatch {
                left: assignment.len(),
                right: self.vocabulary_size,
            });
        }
        Ok(self.conjunctions.iter().any(|c| c.matches(assignment)))
    }

    /// Evaluation on a packed assignment; requires vocabulary_size <= 32.
    pub(crate) fn evaluate_bits(&self, bits: u32) -> bool {
        self.conjunctions.iter().any(|c| c.matches_bits(bits))
    }
}

/// Exhaustive equivalence over all `2^n` assignments; limited to
/// vocabularies of at most 24 propositions.
pub fn equivalent(f: &DnfFormula, g: &DnfFormula) -> Result<bool> {
    if f.vocabulary_size != g.vocabulary_size {
        return Err(Error::SchemaMismatch(format!(
            "vocabulary sizes differ: {} vs {}",
            f.vocabulary_size, g.vocabulary_size
        )));
    }
    let n = f.vocabulary_size;
    if n > 24 {
        return Err(Error::VocabularyTooLarge { size: n, limit: 24 });
    }
    for bits in 0u32..(1u32 << n) {
        if f.evaluate_bits(bits) != g.evaluate_bits(bits) {
            return Ok(false);
        }
    }
    Ok(true)
}

// --- exact two-level minimization ------------------------------------------

/// A cube: `mask` marks the fixed variables, `val` their values
/// (val is always a subset of mask). The universe cube is (0, 0).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
struct Cube {
    mask: u32,
    val: u32,
}

impl Cube {
    fn literal_count(&self) -> u32 {
        self.mask.count_ones()
    }

    fn covers(&self, minterm: u32) -> bool {
        minterm & self.mask == self.val
    }

    fn to_conjunction(self, n: usize) -> Conjunction {
        let mut lits = Vec::with_capacity(self.literal_count() as usize);
        for i in 0..n {
            if self.mask >> i & 1 == 1 {
                lits.push(if self.val >> i & 1 == 1 {
                    Literal::positive(i)
                } else {
                    Literal::negative(i)
                });
            }
        }
        Conjunction { literals: lits }
    }
}

/// All prime implicants of the function given by its on-set, via
/// Quine-McCluskey merging. Implicants with equal masks are bucketed by
/// popcount so only adjacent buckets are compared.
fn prime_implicants(minterms: &[u32], n: usize) -> Vec<Cube> {
    let full: u32 = if n == 32 { u32::MAX } else { (1u32 << n) - 1 };
    let mut current: HashSet<Cube> = minterms
        .iter()
        .map(|&m| Cube { mask: full, val: m })
        .collect();
    let mut primes: HashSet<Cube> = HashSet::new();

    while !current.is_empty() {
        let mut merged: HashSet<Cube> = HashSet::new();
        let mut next: HashSet<Cube> = HashSet::new();

        let mut by_mask: HashMap<u32, Vec<u32>> = HashMap::new();
        for cube in &current {
            by_mask.entry(cube.mask).or_default().push(cube.val);
        }
        for (&mask, vals) in &by_mask {
            let mut buckets: HashMap<u32, Vec<u32>> = HashMap::new();
            for &v in vals {
                buckets.entry(v.count_ones()).or_default().push(v);
            }
            for (&pc, lower) in &buckets {
                let Some(upper) = buckets.get(&(pc + 1)) else {
                    continue;
                };
                for &a in lower {
                    for &b in upper {
                        let d = a ^ b;
                        if d.count_ones() == 1 {
                            next.insert(Cube {
                                mask: mask & !d,
                                val: a & !d,
                            });
                            merged.insert(Cube { mask, val: a });
                            merged.insert(Cube { mask, val: b });
                        }
                    }
                }
            }
        }

        for cube in current {
            if !merged.contains(&cube) {
                primes.insert(cube);
            }
        }
        current = next;
    }

    let mut out: Vec<Cube> = primes.into_iter().collect();
    // Deterministic order: fewer literals first, then by conjunction order.
    out.sort_by_key(|c| (c.literal_count(), c.to_conjunction(n)));
    out
}

/// Branch-and-bound exact cover over prime implicants, minimizing
/// (conjunction count, total literal count) and breaking remaining ties by
/// the lexicographically smallest sorted conjunction list.
struct CoverSearch<'a> {
    primes: &'a [Cube],
    /// per prime: covered minterm positions (indices into the minterm list)
    covers: Vec<Vec<usize>>,
    /// per minterm position: primes covering it
    covered_by: Vec<Vec<usize>>,
    n: usize,
    best: Option<(usize, u32, Vec<Conjunction>)>,
}

impl<'a> CoverSearch<'a> {
    fn solution_key(&self, chosen: &[usize]) -> (usize, u32, Vec<Conjunction>) {
        let count = chosen.len();
        let lits = chosen
            .iter()
            .map(|&p| self.primes[p].literal_count())
            .sum();
        let mut conjs: Vec<Conjunction> = chosen
            .iter()
            .map(|&p| self.primes[p].to_conjunction(self.n))
            .collect();
        conjs.sort();
        (count, lits, conjs)
    }

    fn search(&mut self, uncovered: &mut Vec<bool>, remaining: usize, chosen: &mut Vec<usize>, literals: u32) {
        if remaining == 0 {
            let cand = self.solution_key(chosen);
            match &self.best {
                Some(best) if *best <= cand => {}
                _ => self.best = Some(cand),
            }
            return;
        }
        // Any completion needs at least one more cube.
        if let Some((bc, bl, _)) = &self.best {
            let count = chosen.len() + 1;
            if count > *bc || (count == *bc && literals + 1 > *bl) {
                return;
            }
        }
        // Branch on the uncovered minterm with the fewest live choices.
        let mut pick = usize::MAX;
        let mut pick_choices = usize::MAX;
        for (m, open) in uncovered.iter().enumerate() {
            if !open {
                continue;
            }
            let choices = self.covered_by[m]
                .iter()
                .filter(|&&p| self.covers[p].iter().any(|&mm| uncovered[mm]))
                .count();
            if choices < pick_choices {
                pick_choices = choices;
                pick = m;
            }
        }
        let candidates = self.covered_by[pick].clone();
        for p in candidates {
            let newly: Vec<usize> = self.covers[p]
                .iter()
                .copied()
                .filter(|&m| uncovered[m])
                .collect();
            if newly.is_empty() {
                continue;
            }
            for &m in &newly {
                uncovered[m] = false;
            }
            chosen.push(p);
            self.search(
                uncovered,
                remaining - newly.len(),
                chosen,
                literals + self.primes[p].literal_count(),
            );
            chosen.pop();
            for &m in &newly {
                uncovered[m] = true;
            }
        }
    }
}

fn minimum_cover(primes: &[Cube], minterms: &[u32], n: usize) -> Vec<Conjunction> {
    let mut covers: Vec<Vec<usize>> = vec![Vec::new(); primes.len()];
    let mut covered_by: Vec<Vec<usize>> = vec![Vec::new(); minterms.len()];
    for (p, cube) in primes.iter().enumerate() {
        for (m, &minterm) in minterms.iter().enumerate() {
            if cube.covers(minterm) {
                covers[p].push(m);
                covered_by[m].push(p);
            }
        }
    }

    // Essential extraction: a prime that is the only cover of some minterm
    // belongs to every cover of the function, so selecting it preserves all
    // optima (count, literal total, lexicographic choice).
    let mut essential: Vec<usize> = Vec::new();
    let mut uncovered: Vec<bool> = vec![true; minterms.len()];
    let mut remaining = minterms.len();
    for m in 0..minterms.len() {
        if uncovered[m] && covered_by[m].len() == 1 {
            let p = covered_by[m][0];
            essential.push(p);
            for &mm in &covers[p] {
                if uncovered[mm] {
                    uncovered[mm] = false;
                    remaining -= 1;
                }
            }
        }
    }

    let mut chosen_conjs: Vec<Conjunction> = essential
        .iter()
        .map(|&p| primes[p].to_conjunction(n))
        .collect();

    if remaining > 0 {
        let mut search = CoverSearch {
            primes,
            covers,
            covered_by,
            n,
            best: None,
        };
        let mut chosen = Vec::new();
        search.search(&mut uncovered, remaining, &mut chosen, 0);
        let (_, _, extra) = search.best.expect("primes cover every minterm");
        chosen_conjs.extend(extra);
    }
    chosen_conjs
}

/// Exact DNF minimization. The result is logically equivalent to the input,
/// has the minimum number of conjunctions among equivalent DNFs, and among
/// those the minimum total literal count; remaining ties in the cover search
/// are broken lexicographically. Limited to 16 propositions.
pub fn simplify(f: &DnfFormula) -> Result<DnfFormula> {
    let n = f.vocabulary_size;
    if n > 16 {
        return Err(Error::VocabularyTooLarge { size: n, limit: 16 });
    }
    let minterms: Vec<u32> = (0u32..(1u32 << n)).filter(|&m| f.evaluate_bits(m)).collect();
    if minterms.is_empty() {
        return Ok(DnfFormula::bottom(n));
    }
    if minterms.len() == 1usize << n {
        return Ok(DnfFormula::top(n));
    }
    let primes = prime_implicants(&minterms, n);
    let cover = minimum_cover(&primes, &minterms, n);
    DnfFormula::new(cover, n)
}

// --- text rendering and parsing ---------------------------------------------

/// Renders a formula with feature names substituted. Conjunctions are joined
/// by `" | "`, literals by `" & "`, negation is `"~"`. A conjunction of two
/// or more literals is parenthesized when the formula has several
/// conjunctions. The constants render as `"TRUE"` and `"FALSE"`.
pub fn render(f: &DnfFormula, names: &[String]) -> Result<String> {
    if names.len() != f.vocabulary_size {
        return Err(Error::LengthMismatch {
            left: names.len(),
            right: f.vocabulary_size,
        });
    }
    if f.conjunctions.is_empty() {
        return Ok("FALSE".to_string());
    }
    let many = f.conjunctions.len() > 1;
    let parts: Vec<String> = f
        .conjunctions
        .iter()
        .map(|c| {
            if c.is_empty() {
                return "TRUE".to_string();
            }
            let lits: Vec<String> = c
                .literals()
                .iter()
                .map(|l| match l.polarity {
                    Polarity::Positive => names[l.feature_index].clone(),
                    Polarity::Negative => format!("~{}", names[l.feature_index]),
                })
                .collect();
            let body = lits.join(" & ");
            if many && c.literals().len() > 1 {
                format!("({body})")
            } else {
                body
            }
        })
        .collect();
    Ok(parts.join(" | "))
}

#[derive(Debug, PartialEq)]
enum Token {
    Name(String),
    Not,
    And,
    Or,
    Open,
    Close,
}

fn tokenize(text: &str) -> Result<Vec<Token>> {
    let mut tokens = Vec::new();
    let mut chars = text.chars().peekable();
    while let Some(&ch) = chars.peek() {
        match ch {
            c if c.is_whitespace() => {
                chars.next();
            }
            '~' | '!' => {
                chars.next();
                tokens.push(Token::Not);
            }
            '&' => {
                chars.next();
                tokens.push(Token::And);
            }
            '|' => {
                chars.next();
                tokens.push(Token::Or);
            }
            '(' => {
                chars.next();
                tokens.push(Token::Open);
            }
            ')' => {
                chars.next();
                tokens.push(Token::Close);
            }
            _ => {
                let mut name = String::new();
                while let Some(&c) = chars.peek() {
                    if c.is_whitespace() || "~!&|()".contains(c) {
                        break;
                    }
                    name.push(c);
                    chars.next();
                }
                tokens.push(Token::Name(name));
            }
        }
    }
    Ok(tokens)
}

/// Parses the grammar produced by [`render`]. `names` supplies the
/// vocabulary; every identifier in the text must appear in it.
pub fn parse(text: &str, names: &[String]) -> Result<DnfFormula> {
    let index: HashMap<&str, usize> = names
        .iter()
        .enumerate()
        .map(|(i, n)| (n.as_str(), i))
        .collect();
    if index.len() != names.len() {
        return Err(Error::FormulaParse("duplicate feature names".into()));
    }

    let trimmed = text.trim();
    if trimmed == "FALSE" {
        return Ok(DnfFormula::bottom(names.len()));
    }

    let tokens = tokenize(trimmed)?;
    if tokens.is_empty() {
        return Err(Error::FormulaParse("empty formula text".into()));
    }

    // Split on Or at paren depth zero, then parse each conjunction.
    let mut groups: Vec<Vec<&Token>> = vec![Vec::new()];
    let mut depth = 0i32;
    for t in &tokens {
        match t {
            Token::Open => {
                depth += 1;
                groups.last_mut().unwrap().push(t);
            }
            Token::Close => {
                depth -= 1;
                if depth < 0 {
                    return Err(Error::FormulaParse("unbalanced parentheses".into()));
                }
                groups.last_mut().unwrap().push(t);
            }
            Token::Or if depth == 0 => groups.push(Vec::new()),
            _ => groups.last_mut().unwrap().push(t),
        }
    }
    if depth != 0 {
        return Err(Error::FormulaParse("unbalanced parentheses".into()));
    }

    let mut conjunctions = Vec::new();
    for mut group in groups {
        // Strip one optional layer of parentheses around the conjunction.
        if group.len() >= 2
            && matches!(group.first(), Some(Token::Open))
            && matches!(group.last(), Some(Token::Close))
        {
            let inner = &group[1..group.len() - 1];
            if !inner
                .iter()
                .any(|t| matches!(t, Token::Open | Token::Close))
            {
                group = inner.to_vec();
            }
        }
        if group.iter().any(|t| matches!(t, Token::Open | Token::Close | Token::Or)) {
            return Err(Error::FormulaParse(
                "nested or mixed grouping is not part of the DNF grammar".into(),
            ));
        }
        if group.len() == 1 {
            if let Token::Name(n) = group[0] {
                if n == "TRUE" {
                    conjunctions.push(Conjunction::always_true());
                    continue;
                }
                if n == "FALSE" {
                    // A FALSE disjunct contributes nothing.
                    continue;
                }
            }
        }
        let mut literals = Vec::new();
        let mut expect_literal = true;
        let mut negate = false;
        for t in group {
            match t {
                Token::Not => {
                    if !expect_literal {
                        return Err(Error::FormulaParse("misplaced '~'".into()));
                    }
                    negate = !negate;
                }
                Token::Name(n) => {
                    if !expect_literal {
                        return Err(Error::FormulaParse(format!(
                            "missing '&' before '{n}'"
                        )));
                    }
                    let Some(&i) = index.get(n.as_str()) else {
                        return Err(Error::FormulaParse(format!(
                            "unknown feature name '{n}'"
                        )));
                    };
                    literals.push(if negate {
                        Literal::negative(i)
                    } else {
                        Literal::positive(i)
                    });
                    negate = false;
                    expect_literal = false;
                }
                Token::And => {
                    if expect_literal {
                        return Err(Error::FormulaParse("misplaced '&'".into()));
                    }
                    expect_literal = true;
                }
                _ => unreachable!(),
            }
        }
        if expect_literal {
            return Err(Error::FormulaParse("conjunction ends with an operator".into()));
        }
        conjunctions.push(Conjunction::new(literals)?);
    }
    DnfFormula::new(conjunctions, names.len())
}
