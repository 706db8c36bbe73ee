//! Presentations, reduced words, ball enumeration, and evaluation.
//!
//! The group zoo is deliberately small: free groups, finite cyclic groups,
//! free products of those, and one level of amalgam/HNN gluing along a cyclic
//! edge group. That covers every construction the rest of the crate performs,
//! while keeping the word problem decidable by elementary means.
//!
//! Words are stored freely reduced. For amalgams and HNN extensions,
//! `enumerate_ball` returns pinch-free representative words; these hit every
//! group element of the requested length but may occasionally list one
//! element twice (coset representatives modulo the edge group are not
//! selected). Downstream consumers treat balls as word lists, not as exact
//! element counts, except over the factor kinds where counts are exact.

use crate::moebius::{MoebiusElement, MoebiusError};
use serde_json::{json, Value};
use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum WordError {
    #[error("unknown generator {0:?}")]
    UnknownGenerator(String),
    #[error("ball of radius {radius} exceeds the cap of {cap} words")]
    BallTooLarge { radius: u32, cap: usize },
    #[error("unsupported vertex group: {0}")]
    UnsupportedVertexGroup(String),
    #[error("malformed word: {0}")]
    BadWord(String),
    #[error("presentation is malformed: {0}")]
    BadPresentation(String),
    #[error("relation violated: {0}")]
    RelationViolated(String),
    #[error(transparent)]
    Moebius(#[from] MoebiusError),
}

// ---------------------------------------------------------------------------
// Words.
// ---------------------------------------------------------------------------

/// A freely reduced word: adjacent syllables use distinct generators and all
/// exponents are nonzero.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug, Default)]
pub struct Word {
    syllables: Vec<(String, i64)>,
}

impl Word {
    pub fn identity() -> Self {
        Word::default()
    }

    /// Build from raw syllables, freely reducing.
    pub fn new<I, S>(parts: I) -> Self
    where
        I: IntoIterator<Item = (S, i64)>,
        S: Into<String>,
    {
        let mut w = Word::identity();
        for (g, e) in parts {
            w.push(g.into(), e);
        }
        w
    }

    pub fn gen(g: &str) -> Self {
        Word::new([(g, 1)])
    }

    pub fn syllables(&self) -> &[(String, i64)] {
        &self.syllables
    }

    pub fn is_identity(&self) -> bool {
        self.syllables.is_empty()
    }

    /// Word length: total number of letters Σ|eᵢ|.
    pub fn len(&self) -> u64 {
        self.syllables.iter().map(|(_, e)| e.unsigned_abs()).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.syllables.is_empty()
    }

    fn push(&mut self, g: String, e: i64) {
        if e == 0 {
            return;
        }
        if let Some(last) = self.syllables.last_mut() {
            if last.0 == g {
                last.1 += e;
                if last.1 == 0 {
                    self.syllables.pop();
                }
                return;
            }
        }
        self.syllables.push((g, e));
    }

    pub fn concat(&self, o: &Word) -> Word {
        let mut w = self.clone();
        for (g, e) in &o.syllables {
            w.push(g.clone(), *e);
        }
        w
    }

    pub fn inverse(&self) -> Word {
        Word {
            syllables: self
                .syllables
                .iter()
                .rev()
                .map(|(g, e)| (g.clone(), -e))
                .collect(),
        }
    }

    pub fn pow(&self, n: i64) -> Word {
        let base = if n < 0 { self.inverse() } else { self.clone() };
        let mut w = Word::identity();
        for _ in 0..n.unsigned_abs() {
            w = w.concat(&base);
        }
        w
    }

    /// u w u⁻¹.
    pub fn conjugated_by(&self, u: &Word) -> Word {
        u.concat(self).concat(&u.inverse())
    }

    /// Generators appearing in the word.
    pub fn support(&self) -> impl Iterator<Item = &str> {
        self.syllables.iter().map(|(g, _)| g.as_str())
    }

    /// If `self` = `base`^k (syntactically, in the free group over its
    /// support), return k. `base` must be nontrivial.
    pub fn power_of(&self, base: &Word) -> Option<i64> {
        if self.is_identity() {
            return Some(0);
        }
        if base.is_identity() || base.len() == 0 {
            return None;
        }
        // |base^k| ≤ k·|base|, so only a few candidates need checking; the
        // cheap filter below settles nearly all calls.
        let max_k = (self.len() / 1.max(base.len() / 2) + 2) as i64;
        for k in 1..=max_k {
            for s in [k, -k] {
                if base.pow(s) == *self {
                    return Some(s);
                }
            }
            if base.pow(k).len() > self.len() && base.pow(-k).len() > self.len() {
                break;
            }
        }
        None
    }
}

/// Free reduction (words are kept reduced, so this is a re-normalization
/// entry point for externally assembled syllable lists).
pub fn freely_reduce(w: &Word) -> Word {
    Word::new(w.syllables.iter().map(|(g, e)| (g.clone(), *e)))
}

/// Cyclic reduction: returns (w′, u) with w = u · w′ · u⁻¹ and w′ cyclically
/// reduced.
pub fn cyclically_reduce(w: &Word) -> (Word, Word) {
    let mut core = w.clone();
    let mut conj = Word::identity();
    loop {
        let n = core.syllables.len();
        if n < 2 {
            return (core, conj);
        }
        let (g0, e0) = core.syllables[0].clone();
        let (g1, e1) = core.syllables[n - 1].clone();
        if g0 != g1 || (e0 > 0) == (e1 > 0) {
            return (core, conj);
        }
        // Peel one letter from each end.
        let s = if e0 > 0 { 1 } else { -1 };
        conj = conj.concat(&Word::new([(g0.clone(), s)]));
        let mut inner = Word::new([(g0, -s)]);
        inner = inner.concat(&core);
        inner.push(g1, -(e1.signum()));
        core = inner;
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.syllables.is_empty() {
            return write!(f, "1");
        }
        let mut first = true;
        for (g, e) in &self.syllables {
            if !first {
                write!(f, " ")?;
            }
            first = false;
            if *e == 1 {
                write!(f, "{g}")?;
            } else {
                write!(f, "{g}^{e}")?;
            }
        }
        Ok(())
    }
}

impl FromStr for Word {
    type Err = WordError;

    /// Parses the whitespace-separated syllable format, e.g. `"a b^-2 s"`.
    /// `"1"` and the empty string denote the identity.
    fn from_str(s: &str) -> Result<Self, WordError> {
        let s = s.trim();
        if s.is_empty() || s == "1" {
            return Ok(Word::identity());
        }
        let mut parts = vec![];
        for tok in s.split_whitespace() {
            let (g, e) = match tok.split_once('^') {
                None => (tok, 1),
                Some((g, exp)) => (
                    g,
                    exp.parse::<i64>()
                        .map_err(|_| WordError::BadWord(format!("bad exponent in {tok:?}")))?,
                ),
            };
            if g.is_empty() || g.contains('^') {
                return Err(WordError::BadWord(format!("bad syllable {tok:?}")));
            }
            parts.push((g.to_string(), e));
        }
        Ok(Word::new(parts))
    }
}

impl serde::Serialize for Word {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> serde::Deserialize<'de> for Word {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

// ---------------------------------------------------------------------------
// Presentations.
// ---------------------------------------------------------------------------

/// The supported presentation zoo. Edge groups of amalgams and HNN extensions
/// are infinite cyclic with a distinguished generator word.
#[derive(Clone, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Presentation {
    Free {
        gens: Vec<String>,
    },
    FiniteCyclic {
        gen: String,
        order: u32,
    },
    FreeProduct {
        left: Box<Presentation>,
        right: Box<Presentation>,
    },
    /// A ∗_C B with C = ⟨c⟩ embedded by the given words.
    Amalgam {
        a: Box<Presentation>,
        b: Box<Presentation>,
        c_in_a: Word,
        c_in_b: Word,
    },
    /// HNN extension A∗_φ with stable letter s and s·c·s⁻¹ = φ(c).
    Hnn {
        base: Box<Presentation>,
        c: Word,
        c_image: Word,
        stable: String,
    },
}

impl Presentation {
    pub fn free(gens: &[&str]) -> Self {
        Presentation::Free {
            gens: gens.iter().map(|s| s.to_string()).collect(),
        }
    }

    pub fn finite_cyclic(g: &str, order: u32) -> Self {
        Presentation::FiniteCyclic {
            gen: g.to_string(),
            order,
        }
    }

    pub fn free_product(left: Presentation, right: Presentation) -> Self {
        Presentation::FreeProduct {
            left: Box::new(left),
            right: Box::new(right),
        }
    }

    /// All generator names, stable letters included, in declaration order.
    pub fn generators(&self) -> Vec<String> {
        match self {
            Presentation::Free { gens } => gens.clone(),
            Presentation::FiniteCyclic { gen, .. } => vec![gen.clone()],
            Presentation::FreeProduct { left, right } => {
                let mut g = left.generators();
                g.extend(right.generators());
                g
            }
            Presentation::Amalgam { a, b, .. } => {
                let mut g = a.generators();
                g.extend(b.generators());
                g
            }
            Presentation::Hnn { base, stable, .. } => {
                let mut g = base.generators();
                g.push(stable.clone());
                g
            }
        }
    }

    pub fn validate(&self) -> Result<(), WordError> {
        let gens = self.generators();
        let mut seen = std::collections::BTreeSet::new();
        for g in &gens {
            if !seen.insert(g.clone()) {
                return Err(WordError::BadPresentation(format!(
                    "duplicate generator {g:?}"
                )));
            }
        }
        let check_word = |w: &Word, p: &Presentation, what: &str| -> Result<(), WordError> {
            let names: std::collections::BTreeSet<_> = p.generators().into_iter().collect();
            if w.is_identity() {
                return Err(WordError::BadPresentation(format!(
                    "{what} must be nontrivial"
                )));
            }
            for g in w.support() {
                if !names.contains(g) {
                    return Err(WordError::BadPresentation(format!(
                        "{what} uses unknown generator {g:?}"
                    )));
                }
            }
            Ok(())
        };
        match self {
            Presentation::FiniteCyclic { order, .. } if *order < 2 => Err(
                WordError::BadPresentation("finite cyclic order must be ≥ 2".into()),
            ),
            Presentation::FreeProduct { left, right } => {
                left.validate()?;
                right.validate()
            }
            Presentation::Amalgam { a, b, c_in_a, c_in_b } => {
                a.validate()?;
                b.validate()?;
                check_word(c_in_a, a, "edge word in A")?;
                check_word(c_in_b, b, "edge word in B")
            }
            Presentation::Hnn { base, c, c_image, stable } => {
                base.validate()?;
                check_word(c, base, "edge word")?;
                check_word(c_image, base, "edge image word")?;
                if base.generators().contains(stable) {
                    return Err(WordError::BadPresentation(format!(
                        "stable letter {stable:?} collides with a base generator"
                    )));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    /// The vertex factor (if any) a generator belongs to, as an index into
    /// a left-to-right list of vertex groups. Stable letters return None.
    fn factor_of(&self, g: &str) -> Option<usize> {
        fn walk(p: &Presentation, g: &str, next: &mut usize) -> Option<usize> {
            match p {
                Presentation::Free { gens } => {
                    let id = *next;
                    *next += 1;
                    gens.iter().any(|x| x == g).then_some(id)
                }
                Presentation::FiniteCyclic { gen, .. } => {
                    let id = *next;
                    *next += 1;
                    (gen == g).then_some(id)
                }
                Presentation::FreeProduct { left, right }
                | Presentation::Amalgam { a: left, b: right, .. } => {
                    walk(left, g, next).or_else(|| walk(right, g, next))
                }
                Presentation::Hnn { base, .. } => walk(base, g, next),
            }
        }
        walk(self, g, &mut 0)
    }

    /// Index of the top-level side (0 = A/left, 1 = B/right) a generator
    /// belongs to, for two-factor presentations.
    fn side_of(&self, g: &str) -> Option<usize> {
        match self {
            Presentation::FreeProduct { left, right }
            | Presentation::Amalgam { a: left, b: right, .. } => {
                if left.generators().iter().any(|x| x == g) {
                    Some(0)
                } else if right.generators().iter().any(|x| x == g) {
                    Some(1)
                } else {
                    None
                }
            }
            _ => None,
        }
    }
}

// ---------------------------------------------------------------------------
// Normal forms.
// ---------------------------------------------------------------------------

/// Britton reduction: repeatedly replace s·c^k·s⁻¹ by φ(c)^k and
/// s⁻¹·φ(c)^k·s by c^k until no pinch remains.
pub fn hnn_normal_form(w: &Word, pres: &Presentation) -> Result<Word, WordError> {
    let Presentation::Hnn { base, c, c_image, stable } = pres else {
        return Err(WordError::UnsupportedVertexGroup(
            "hnn_normal_form needs an HNN presentation".into(),
        ));
    };
    if !matches!(
        **base,
        Presentation::Free { .. } | Presentation::FiniteCyclic { .. } | Presentation::FreeProduct { .. }
    ) {
        return Err(WordError::UnsupportedVertexGroup(
            "base group must be free, finite cyclic, or a free product".into(),
        ));
    }
    let mut cur = freely_reduce(w);
    'outer: loop {
        // Split into maximal s-free segments separated by single s-letters.
        let letters = expand_stable(&cur, stable);
        for i in 0..letters.len() {
            let SegOrS::S(e1) = &letters[i] else { continue };
            // Find the next stable letter; the segment between must be s-free.
            for j in i + 1..letters.len() {
                match &letters[j] {
                    SegOrS::Seg(_) => continue,
                    SegOrS::S(e2) => {
                        if *e1 == -*e2 {
                            let mid = letters[i + 1..j]
                                .iter()
                                .filter_map(|l| match l {
                                    SegOrS::Seg(s) => Some(s.clone()),
                                    _ => None,
                                })
                                .fold(Word::identity(), |acc, s| acc.concat(&s));
                            let (from, to) = if *e1 > 0 { (c, c_image) } else { (c_image, c) };
                            if let Some(k) = mid.power_of(from) {
                                // Rebuild: prefix + to^k + suffix.
                                let mut nw = Word::identity();
                                for l in &letters[..i] {
                                    nw = nw.concat(&l.as_word(stable));
                                }
                                nw = nw.concat(&to.pow(k));
                                for l in &letters[j + 1..] {
                                    nw = nw.concat(&l.as_word(stable));
                                }
                                cur = nw;
                                continue 'outer;
                            }
                        }
                        break;
                    }
                }
            }
        }
        return Ok(cur);
    }
}

enum SegOrS {
    Seg(Word),
    S(i64), // single stable letter with sign ±1
}

impl SegOrS {
    fn as_word(&self, stable: &str) -> Word {
        match self {
            SegOrS::Seg(w) => w.clone(),
            SegOrS::S(e) => Word::new([(stable, *e)]),
        }
    }
}

/// Expand a word into s-free segments and single stable letters.
fn expand_stable(w: &Word, stable: &str) -> Vec<SegOrS> {
    let mut out = vec![];
    let mut seg = Word::identity();
    for (g, e) in w.syllables() {
        if g == stable {
            if !seg.is_identity() {
                out.push(SegOrS::Seg(std::mem::take(&mut seg)));
            }
            for _ in 0..e.unsigned_abs() {
                out.push(SegOrS::S(e.signum()));
            }
        } else {
            seg = seg.concat(&Word::new([(g.clone(), *e)]));
        }
    }
    if !seg.is_identity() {
        out.push(SegOrS::Seg(seg));
    }
    out
}

/// True iff the cyclic reduction of `w` lies inside a single vertex factor —
/// the syntactic test for membership in the set of elliptic (vertex-group)
/// conjugacy classes.
pub fn in_elliptic_conjugacy_set(w: &Word, pres: &Presentation) -> bool {
    let reduced = match pres {
        Presentation::Hnn { .. } => hnn_normal_form(w, pres).unwrap_or_else(|_| w.clone()),
        _ => w.clone(),
    };
    let (core, _) = cyclically_reduce(&reduced);
    if core.is_identity() {
        return true;
    }
    match pres {
        Presentation::Free { .. } | Presentation::FiniteCyclic { .. } => true,
        Presentation::Hnn { stable, .. } => core.support().all(|g| g != stable),
        Presentation::FreeProduct { .. } | Presentation::Amalgam { .. } => {
            let mut sides = core.support().map(|g| pres.side_of(g));
            let first = match sides.next() {
                Some(s) => s,
                None => return true,
            };
            sides.all(|s| s == first) && first.is_some()
        }
    }
}

// ---------------------------------------------------------------------------
// Ball enumeration.
// ---------------------------------------------------------------------------

/// Hard cap on enumerated words, to keep runaway radii honest.
pub const BALL_CAP: usize = 2_000_000;

/// Length of a vertex-group element in its normal form; finite cyclic
/// factors measure g^i as min(i, q−i).
pub fn element_length(pres: &Presentation, w: &Word) -> u64 {
    match pres {
        Presentation::FiniteCyclic { order, .. } => {
            let q = *order as i64;
            let e: i64 = w.syllables().iter().map(|(_, e)| *e).sum();
            let i = e.rem_euclid(q);
            i.min(q - i) as u64
        }
        _ => w.len(),
    }
}

/// One representative word per element of length ≤ `radius`, deterministic
/// order (by length, then display string). Exact for free, finite cyclic, and
/// free products; pinch-free representatives for amalgams and HNN extensions.
pub fn enumerate_ball(pres: &Presentation, radius: u32) -> Result<Vec<Word>, WordError> {
    let mut out = ball_words(pres, radius)?;
    out.sort_by_key(|w| (element_length(pres, w), w.to_string()));
    out.dedup();
    Ok(out)
}

fn too_large(radius: u32) -> WordError {
    WordError::BallTooLarge {
        radius,
        cap: BALL_CAP,
    }
}

fn ball_words(pres: &Presentation, radius: u32) -> Result<Vec<Word>, WordError> {
    match pres {
        Presentation::Free { gens } => {
            let mut out = vec![Word::identity()];
            let mut frontier = vec![Word::identity()];
            for _ in 0..radius {
                let mut next = vec![];
                for w in &frontier {
                    let last = w.syllables().last().cloned();
                    for g in gens {
                        for s in [1i64, -1] {
                            if let Some((lg, le)) = &last {
                                if lg == g && (*le > 0) != (s > 0) {
                                    continue; // would cancel
                                }
                            }
                            next.push(w.concat(&Word::new([(g.clone(), s)])));
                        }
                    }
                }
                out.extend(next.iter().cloned());
                if out.len() > BALL_CAP {
                    return Err(too_large(radius));
                }
                frontier = next;
            }
            Ok(out)
        }
        Presentation::FiniteCyclic { gen, order } => {
            let q = *order;
            let mut out = vec![];
            for i in 0..q {
                let l = i.min(q - i);
                if l as u32 <= radius.min(q) {
                    out.push(Word::new([(gen.clone(), i as i64)]));
                }
            }
            Ok(out)
        }
        Presentation::FreeProduct { left, right } => {
            let factors: [&Presentation; 2] = [left, right];
            alternating_products(&factors, |_| true, radius)
        }
        Presentation::Amalgam { a, b, .. } => {
            // Alternating products of vertex elements; after the first
            // factor, exclude elements of the edge group C (they belong to
            // the previous factor's run).
            let factors: [&Presentation; 2] = [a, b];
            let c_words = edge_words(pres);
            alternating_products(
                &factors,
                move |w| c_words.iter().all(|c| w.power_of(c).is_none() || w.is_identity()),
                radius,
            )
        }
        Presentation::Hnn { base, c, c_image, stable } => {
            // Britton-reduced chains w₀ s^{e₁} w₁ ⋯ s^{e_k} w_k.
            let base_ball = enumerate_ball(base, radius)?;
            let by_len: Vec<(Word, u64)> = base_ball
                .iter()
                .map(|w| (w.clone(), element_length(base, w)))
                .collect();
            let mut out = vec![];
            // state: word, cost, sign of the most recent stable letter (0 if
            // none yet), base segment accumulated since then, and whether a
            // base block may still be appended before the next stable letter.
            let mut stack = vec![(Word::identity(), 0u64, 0i64, Word::identity(), true)];
            while let Some((w, cost, prev_s, seg, can_base)) = stack.pop() {
                out.push(w.clone());
                if out.len() > BALL_CAP {
                    return Err(too_large(radius));
                }
                // extend with a stable letter
                for s in [1i64, -1] {
                    if cost + 1 > radius as u64 {
                        continue;
                    }
                    if prev_s == -s {
                        // potential pinch: s…s⁻¹ with C-power segment, or the
                        // plain free cancellation when the segment is empty.
                        let from = if prev_s > 0 { c } else { c_image };
                        if seg.is_identity() || seg.power_of(from).is_some() {
                            continue;
                        }
                    }
                    stack.push((
                        w.concat(&Word::new([(stable.clone(), s)])),
                        cost + 1,
                        s,
                        Word::identity(),
                        true,
                    ));
                }
                // extend with one nontrivial base block (at most one per
                // stretch between stable letters, so segments stay maximal)
                if can_base {
                    for (v, vl) in &by_len {
                        if v.is_identity() || cost + vl > radius as u64 {
                            continue;
                        }
                        stack.push((w.concat(v), cost + vl, prev_s, seg.concat(v), false));
                    }
                }
            }
            Ok(out)
        }
    }
}

/// Shared edge words of an amalgam, for the C-membership filter.
fn edge_words(pres: &Presentation) -> Vec<Word> {
    match pres {
        Presentation::Amalgam { c_in_a, c_in_b, .. } => vec![c_in_a.clone(), c_in_b.clone()],
        _ => vec![],
    }
}

/// Words v₁v₂⋯v_m with the vᵢ nontrivial vertex elements from alternating
/// factors, each passing `keep` (applied from the second syllable group on).
fn alternating_products(
    factors: &[&Presentation; 2],
    keep: impl Fn(&Word) -> bool,
    radius: u32,
) -> Result<Vec<Word>, WordError> {
    let balls: Vec<Vec<(Word, u64)>> = factors
        .iter()
        .map(|p| {
            enumerate_ball(p, radius).map(|b| {
                b.into_iter()
                    .map(|w| {
                        let l = element_length(p, &w);
                        (w, l)
                    })
                    .filter(|(w, _)| !w.is_identity())
                    .collect()
            })
        })
        .collect::<Result<_, _>>()?;
    let mut out = vec![Word::identity()];
    // state: (word, cost, last factor (2 = none), is_first_block)
    let mut stack = vec![(Word::identity(), 0u64, 2usize, true)];
    while let Some((w, cost, last, first)) = stack.pop() {
        for side in 0..2 {
            if side == last {
                continue;
            }
            for (v, vl) in &balls[side] {
                if cost + vl > radius as u64 {
                    continue;
                }
                if !first && !keep(v) {
                    continue;
                }
                let nw = w.concat(v);
                out.push(nw.clone());
                if out.len() > BALL_CAP {
                    return Err(too_large(radius));
                }
                stack.push((nw, cost + vl, side, false));
            }
        }
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Representations.
// ---------------------------------------------------------------------------

/// Assignment of generators to Möbius elements.
#[derive(Clone, Debug)]
pub struct Representation {
    pub presentation: Presentation,
    pub images: BTreeMap<String, MoebiusElement>,
}

impl Representation {
    pub fn new(
        presentation: Presentation,
        images: impl IntoIterator<Item = (String, MoebiusElement)>,
    ) -> Self {
        Representation {
            presentation,
            images: images.into_iter().collect(),
        }
    }

    pub fn image(&self, g: &str) -> Result<&MoebiusElement, WordError> {
        self.images
            .get(g)
            .ok_or_else(|| WordError::UnknownGenerator(g.to_string()))
    }

    /// Product of generator images; exact when all images are exact.
    pub fn evaluate(&self, w: &Word) -> Result<MoebiusElement, WordError> {
        let mut acc = MoebiusElement::identity();
        for (g, e) in w.syllables() {
            acc = acc.compose(&self.image(g)?.powi(*e));
        }
        Ok(acc)
    }

    /// Check presentation relations on the images.
    ///
    /// Exact images give hard errors on violated relations; floating images
    /// produce warnings instead (a float can witness failure but not certify
    /// success).
    pub fn validate(&self) -> Result<Vec<String>, WordError> {
        self.presentation.validate()?;
        for g in self.presentation.generators() {
            self.image(&g)?;
        }
        let mut warnings = vec![];
        let mut check = |lhs: MoebiusElement,
                         rhs: MoebiusElement,
                         what: String|
         -> Result<(), WordError> {
            if lhs.is_exact() && rhs.is_exact() {
                if lhs != rhs {
                    return Err(WordError::RelationViolated(what));
                }
            } else {
                let d = lhs.approx_dist(&rhs);
                if d > 1e-6 {
                    return Err(WordError::RelationViolated(format!(
                        "{what} (floating residual {d:.2e})"
                    )));
                }
                warnings.push(format!("{what}: checked in floating arithmetic only"));
            }
            Ok(())
        };
        match &self.presentation {
            Presentation::Hnn { c, c_image, stable, .. } => {
                let s = self.image(stable)?.clone();
                let lhs = s
                    .compose(&self.evaluate(c)?)
                    .compose(&s.inverse());
                let rhs = self.evaluate(c_image)?;
                check(lhs, rhs, format!("s·c·s⁻¹ = φ(c) for c = {c}"))?;
            }
            Presentation::Amalgam { c_in_a, c_in_b, .. } => {
                check(
                    self.evaluate(c_in_a)?,
                    self.evaluate(c_in_b)?,
                    format!("edge identification {c_in_a} = {c_in_b}"),
                )?;
            }
            _ => {}
        }
        // Finite cyclic factors need images of exact order.
        fn cyclic_factors(p: &Presentation, out: &mut Vec<(String, u32)>) {
            match p {
                Presentation::FiniteCyclic { gen, order } => out.push((gen.clone(), *order)),
                Presentation::FreeProduct { left, right }
                | Presentation::Amalgam { a: left, b: right, .. } => {
                    cyclic_factors(left, out);
                    cyclic_factors(right, out);
                }
                Presentation::Hnn { base, .. } => cyclic_factors(base, out),
                Presentation::Free { .. } => {}
            }
        }
        let mut cyc = vec![];
        cyclic_factors(&self.presentation, &mut cyc);
        for (g, q) in cyc {
            let img = self.image(&g)?;
            let p = img.powi(q as i64);
            check(
                p,
                MoebiusElement::identity(),
                format!("{g}^{q} = 1"),
            )?;
            // No proper divisor order (otherwise the factor is a quotient).
            for d in 1..q {
                if q % d == 0 && img.powi(d as i64).is_identity() {
                    return Err(WordError::RelationViolated(format!(
                        "{g} has order {d}, expected {q}"
                    )));
                }
            }
        }
        Ok(warnings)
    }

    pub fn to_json(&self) -> Value {
        let images: serde_json::Map<String, Value> = self
            .images
            .iter()
            .map(|(g, m)| (g.clone(), m.to_json()))
            .collect();
        json!({
            "presentation": serde_json::to_value(&self.presentation).unwrap(),
            "images": images,
        })
    }

    pub fn from_json(v: &Value) -> Result<Self, WordError> {
        let pres: Presentation =
            serde_json::from_value(v.get("presentation").cloned().ok_or_else(|| {
                WordError::BadPresentation("missing \"presentation\"".into())
            })?)
            .map_err(|e| WordError::BadPresentation(e.to_string()))?;
        let images = v
            .get("images")
            .and_then(Value::as_object)
            .ok_or_else(|| WordError::BadPresentation("missing \"images\"".into()))?;
        let mut map = BTreeMap::new();
        for (g, mv) in images {
            map.insert(g.clone(), MoebiusElement::from_json(mv)?);
        }
        Ok(Representation {
            presentation: pres,
            images: map,
        })
    }
}
