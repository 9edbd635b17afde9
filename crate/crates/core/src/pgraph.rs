//! Finite Poincaré graphs on Ω and the association scheme they form.
//!
//! `P_q(γ)` has vertex set Ω and an edge between distinct points `u, v`
//! whenever their projective quadrance is `γ`.  On fixed-norm
//! representatives (`U·U = V·V = σ`) the quadrance is `1 − (U·V)²/σ²`, so
//! everything reduces to the value `t = (U·V)²`, which is independent of the
//! `±` sign ambiguity.  A single `n × n` table of those `t`-values (the
//! [`PairTable`]) is therefore the universal ingredient: every `P_q(γ)`, the
//! scheme relations, and the shared-basis eigensolver all read from it.
//!
//! On the unit-norm class (σ = 1) the `t`-values stratify the pairs into
//! `(q+1)/2` relations:
//!
//! * `R_1`: `t = 1`,
//! * `R_i`: `t = ν^{2−2i}` for `2 ≤ i ≤ (q−1)/2` (ν a primitive element),
//! * `R_{(q+1)/2}`: `t = 0` (perpendicular pairs).
//!
//! These are exactly the Poincaré graphs in disguise — `R_i = P_q(1 −
//! ν^{2−2i})` and `R_{(q+1)/2} = P_q(1)` — and together they form a
//! symmetric association scheme, which [`verify_scheme`] checks from the
//! definitions.  Eigenvalue work lives in the [`spectrum`] /
//! [`scheme_spectra`] pair: a dense symmetric solver for single graphs and a
//! certified shared-eigenbasis path for whole families.

mod eigen;

pub use eigen::{scheme_spectra, spectrum, SpectrumMethod, SpectrumReport};

use std::fmt;
use std::sync::Arc;

use serde::Serialize;
use thiserror::Error;

use crate::ffield::{FieldElement, FieldError};
use crate::projective::{OmegaSet, PointClass, ProjectiveError};
use crate::seeded;

/// Hard cap on |Ω|: the pair table is dense (`2n²` bytes).
pub const MAX_VERTICES: usize = 16_384;

#[derive(Error, Debug, Clone, PartialEq)]
pub enum GraphError {
    #[error("association-scheme relations live on the unit-norm class (σ = 1); this Ω has σ = ν")]
    NonUnitClass,
    #[error("relation index {index} outside 1..={max}")]
    RelationIndex { index: usize, max: usize },
    #[error("graph on {n} vertices exceeds the supported maximum {max}")]
    TooLarge { n: usize, max: usize },
    #[error("all graphs must be built on the same Ω")]
    MixedOmega,
    #[error("scheme violation ({property}): {detail}")]
    SchemeViolation { property: &'static str, detail: String },
    #[error("shared-basis spectra failed certification: {reason}")]
    Certification { reason: String },
    #[error(transparent)]
    Projective(#[from] ProjectiveError),
    #[error(transparent)]
    Trig(#[from] crate::trig::TrigError),
    #[error(transparent)]
    Field(#[from] FieldError),
}

/// Row-major packed symmetric adjacency: bit `j` of row `i` lives in word
/// `j / 64` at bit `j % 64` (LSB-first), rows padded to whole words.
#[derive(Clone, PartialEq, Eq)]
pub struct BitMatrix {
    n: usize,
    wpr: usize,
    bits: Vec<u64>,
}

impl BitMatrix {
    pub fn new(n: usize) -> BitMatrix {
        let wpr = n.div_ceil(64);
        BitMatrix { n, wpr, bits: vec![0; wpr * n] }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn words_per_row(&self) -> usize {
        self.wpr
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> bool {
        (self.bits[i * self.wpr + j / 64] >> (j % 64)) & 1 == 1
    }

    #[inline]
    fn set(&mut self, i: usize, j: usize) {
        self.bits[i * self.wpr + j / 64] |= 1u64 << (j % 64);
    }

    pub fn set_pair(&mut self, i: usize, j: usize) {
        debug_assert_ne!(i, j, "no loops");
        self.set(i, j);
        self.set(j, i);
    }

    pub fn row(&self, i: usize) -> &[u64] {
        &self.bits[i * self.wpr..(i + 1) * self.wpr]
    }

    pub fn row_count(&self, i: usize) -> u64 {
        self.row(i).iter().map(|w| w.count_ones() as u64).sum()
    }
}

/// The `n × n` table of `t = (U·V)²` over fixed-norm representatives.
/// Entries are canonical integer encodings (`t < q ≤ 65521` fits `u16`);
/// the diagonal holds `σ²`.
pub struct PairTable {
    n: usize,
    t: Vec<u16>,
}

impl PairTable {
    pub fn build(omega: &OmegaSet) -> Result<PairTable, GraphError> {
        let n = omega.len();
        if n > MAX_VERTICES {
            return Err(GraphError::TooLarge { n, max: MAX_VERTICES });
        }
        let f = &**omega.field();
        let form = omega.form();
        let units = omega.unit_reps();
        let diag = f.encode_el(f.raw_mul(omega.sigma(), omega.sigma())) as u16;
        let mut t = vec![0u16; n * n];
        for i in 0..n {
            t[i * n + i] = diag;
            for j in (i + 1)..n {
                let d = form.raw_dot(&units[i], &units[j]);
                let enc = f.encode_el(f.raw_mul(d, d)) as u16;
                t[i * n + j] = enc;
                t[j * n + i] = enc;
            }
        }
        Ok(PairTable { n, t })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> u16 {
        self.t[i * self.n + j]
    }

    pub(crate) fn row(&self, i: usize) -> &[u16] {
        &self.t[i * self.n..(i + 1) * self.n]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GraphKind {
    /// `P_q(γ)`.
    Poincare { gamma: FieldElement },
    /// Scheme relation `R_index`, `1 ≤ index ≤ (q+1)/2`.
    Relation { index: usize },
}

/// A graph on Ω defined by a quadrance condition.
pub struct SpreadGraph {
    omega: Arc<OmegaSet>,
    kind: GraphKind,
    adj: BitMatrix,
    edges: u64,
    degree: Option<u64>,
}

impl SpreadGraph {
    pub fn omega(&self) -> &Arc<OmegaSet> {
        &self.omega
    }

    pub fn kind(&self) -> GraphKind {
        self.kind
    }

    /// The γ this graph was built from (`None` for relation graphs; use
    /// [`relation_gamma`] to translate).
    pub fn gamma(&self) -> Option<FieldElement> {
        match self.kind {
            GraphKind::Poincare { gamma } => Some(gamma),
            GraphKind::Relation { .. } => None,
        }
    }

    pub fn n(&self) -> usize {
        self.adj.n()
    }

    pub fn edge_count(&self) -> u64 {
        self.edges
    }

    /// `Some(d)` when every vertex has degree `d`.
    pub fn is_regular(&self) -> Option<u64> {
        self.degree
    }

    pub fn adjacent(&self, i: usize, j: usize) -> bool {
        self.adj.get(i, j)
    }

    pub fn adjacency(&self) -> &BitMatrix {
        &self.adj
    }

    pub fn same_edges(&self, other: &SpreadGraph) -> bool {
        self.adj == other.adj
    }

    /// Reassembles a graph from externally stored adjacency bits (a cache
    /// or a wire format), revalidating the structural invariants —
    /// dimensions, zero diagonal, symmetry, padding — and recomputing the
    /// edge count and degree rather than trusting the source.
    pub fn from_adjacency(
        omega: Arc<OmegaSet>,
        kind: GraphKind,
        adj: BitMatrix,
    ) -> Result<SpreadGraph, GraphError> {
        let n = omega.len();
        if adj.n() != n {
            return Err(GraphError::SchemeViolation {
                property: "adjacency dimensions",
                detail: format!("matrix is {}×{} but |Ω| = {n}", adj.n(), adj.n()),
            });
        }
        if let GraphKind::Poincare { gamma } = kind {
            omega.field().sub(omega.field().one(), gamma)?;
        }
        let wpr = adj.words_per_row();
        let tail_bits = n % 64;
        let mut twice_edges = 0u64;
        let mut degree = None;
        let mut regular = true;
        for i in 0..n {
            if adj.get(i, i) {
                return Err(GraphError::SchemeViolation {
                    property: "loop-free",
                    detail: format!("diagonal bit set at vertex {i}"),
                });
            }
            let row = adj.row(i);
            if tail_bits != 0 && row[wpr - 1] >> tail_bits != 0 {
                return Err(GraphError::SchemeViolation {
                    property: "padding",
                    detail: format!("bits set beyond column {n} in row {i}"),
                });
            }
            let d = adj.row_count(i);
            twice_edges += d;
            match degree {
                None => degree = Some(d),
                Some(prev) if prev != d => regular = false,
                _ => {}
            }
            for j in (i + 1)..n {
                if adj.get(i, j) != adj.get(j, i) {
                    return Err(GraphError::SchemeViolation {
                        property: "symmetry",
                        detail: format!("asymmetric pair ({i}, {j})"),
                    });
                }
            }
        }
        Ok(SpreadGraph {
            omega,
            kind,
            adj,
            edges: twice_edges / 2,
            degree: if regular { degree } else { None },
        })
    }
}

impl fmt::Debug for SpreadGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "SpreadGraph({:?}, n={}, edges={}, degree={:?})",
            self.kind,
            self.n(),
            self.edges,
            self.degree
        )
    }
}

/// Builds graphs on one Ω, paying the `O(n²)` pair-table cost once.
pub struct GraphBuilder {
    omega: Arc<OmegaSet>,
    table: PairTable,
}

impl GraphBuilder {
    pub fn new(omega: Arc<OmegaSet>) -> Result<GraphBuilder, GraphError> {
        let table = PairTable::build(&omega)?;
        Ok(GraphBuilder { omega, table })
    }

    pub fn omega(&self) -> &Arc<OmegaSet> {
        &self.omega
    }

    pub fn table(&self) -> &PairTable {
        &self.table
    }

    /// Edge target for `P_q(γ)`: pairs with `t = (1−γ)σ²`.
    pub(crate) fn target_of_gamma(&self, gamma: FieldElement) -> Result<u16, GraphError> {
        let f = &**self.omega.field();
        let one_minus = f.sub(f.one(), gamma)?; // checks γ lives in this field
        let sigma_sq = f.raw_mul(self.omega.sigma(), self.omega.sigma());
        Ok(f.encode_el(f.raw_mul(one_minus, sigma_sq)) as u16)
    }

    pub fn poincare(&self, gamma: FieldElement) -> Result<SpreadGraph, GraphError> {
        let target = self.target_of_gamma(gamma)?;
        Ok(self.graph_from_target(target, GraphKind::Poincare { gamma }))
    }

    pub fn relation(&self, index: usize) -> Result<SpreadGraph, GraphError> {
        let t = relation_target(&self.omega, index)?;
        let enc = self.omega.field().encode_el(t) as u16;
        Ok(self.graph_from_target(enc, GraphKind::Relation { index }))
    }

    fn graph_from_target(&self, target: u16, kind: GraphKind) -> SpreadGraph {
        let n = self.table.n();
        let mut adj = BitMatrix::new(n);
        let mut edges = 0u64;
        for i in 0..n {
            let row = self.table.row(i);
            for (j, &t) in row.iter().enumerate().skip(i + 1) {
                if t == target {
                    adj.set_pair(i, j);
                    edges += 1;
                }
            }
        }
        let d0 = adj.row_count(0);
        let degree = (1..n).all(|i| adj.row_count(i) == d0).then_some(d0);
        SpreadGraph { omega: self.omega.clone(), kind, adj, edges, degree }
    }
}

/// One-shot `P_q(γ)`; building several graphs on one Ω is cheaper through
/// [`GraphBuilder`].
pub fn build_poincare(omega: &Arc<OmegaSet>, gamma: FieldElement) -> Result<SpreadGraph, GraphError> {
    GraphBuilder::new(omega.clone())?.poincare(gamma)
}

pub fn build_relation(omega: &Arc<OmegaSet>, index: usize) -> Result<SpreadGraph, GraphError> {
    GraphBuilder::new(omega.clone())?.relation(index)
}

/// The independent slow route: evaluates the projective quadrance of every
/// pair of canonical representatives literally, field inversions and all.
/// Exists so the fast `t`-table path has something honest to be checked
/// against.
pub fn build_poincare_by_definition(
    omega: &Arc<OmegaSet>,
    gamma: FieldElement,
) -> Result<SpreadGraph, GraphError> {
    let n = omega.len();
    if n > MAX_VERTICES {
        return Err(GraphError::TooLarge { n, max: MAX_VERTICES });
    }
    let f = &**omega.field();
    f.sub(f.one(), gamma)?; // γ must live in this field
    let form = omega.form();
    let mut adj = BitMatrix::new(n);
    let mut edges = 0u64;
    for i in 0..n {
        for j in (i + 1)..n {
            if form.proj_quadrance(omega.point(i), omega.point(j))? == gamma {
                adj.set_pair(i, j);
                edges += 1;
            }
        }
    }
    let d0 = adj.row_count(0);
    let degree = (1..n).all(|i| adj.row_count(i) == d0).then_some(d0);
    Ok(SpreadGraph {
        omega: omega.clone(),
        kind: GraphKind::Poincare { gamma },
        adj,
        edges,
        degree,
    })
}

pub fn relation_count(q: u64) -> usize {
    q.div_ceil(2) as usize
}

/// The `t`-value defining `R_index` (unit-norm class only).
pub fn relation_target(omega: &OmegaSet, index: usize) -> Result<FieldElement, GraphError> {
    if omega.class() != PointClass::Square {
        return Err(GraphError::NonUnitClass);
    }
    let f = &**omega.field();
    let max = relation_count(f.q());
    if index == 0 || index > max {
        return Err(GraphError::RelationIndex { index, max });
    }
    Ok(if index == 1 {
        f.one()
    } else if index == max {
        f.zero()
    } else {
        // ν^{2−2i}
        f.raw_pow(f.raw_inv(f.primitive_element()), (2 * index - 2) as u64)
    })
}

/// The γ with `R_index = P_q(γ)`, namely `1 − t_index`.
pub fn relation_gamma(omega: &OmegaSet, index: usize) -> Result<FieldElement, GraphError> {
    let t = relation_target(omega, index)?;
    let f = &**omega.field();
    Ok(f.raw_sub(f.one(), t))
}

/// The `(q+1)/2` values of γ whose graph is nonempty — exactly those with
/// `1 − γ` a square (zero included) — in field order.
pub fn active_gammas(omega: &OmegaSet) -> Vec<FieldElement> {
    let f = &**omega.field();
    f.elements().filter(|&g| f.raw_is_square(f.raw_sub(f.one(), g))).collect()
}

/// Options for [`verify_scheme`]; defaults spot-check 32 sampled pairs per
/// relation for intersection-number constancy.
#[derive(Debug, Clone)]
pub struct SchemeOptions {
    pub pairs_per_class: usize,
    /// Check every pair instead of sampling (use on small q).
    pub full_triples: bool,
    pub seed: u64,
}

impl Default for SchemeOptions {
    fn default() -> Self {
        SchemeOptions { pairs_per_class: 32, full_triples: false, seed: 0x5EED }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SchemeReport {
    pub q: u64,
    pub n: usize,
    pub class_count: usize,
    /// Valency of each relation, `R_1` first.
    pub valencies: Vec<u64>,
    /// Integer encoding of the γ with `P_q(γ) = R_i`, aligned with
    /// `valencies`.
    pub relation_gammas: Vec<u64>,
    pub symmetric: bool,
    pub partition: bool,
    pub poincare_match: bool,
    pub intersection_pairs_checked: usize,
    pub intersection_full: bool,
}

/// Verifies from the definitions that the relations form a symmetric
/// association scheme whose classes are the Poincaré graphs: symmetry,
/// partition of the off-diagonal pairs, regularity, the `P_q(γ)`
/// identifications, and constancy of the intersection numbers
/// `p^k_{rs} = #{z : (x,z) ∈ R_r, (z,y) ∈ R_s}` over `(x,y) ∈ R_k`.
/// The first violated property is reported as
/// [`GraphError::SchemeViolation`].
pub fn verify_scheme(omega: &Arc<OmegaSet>, opts: &SchemeOptions) -> Result<SchemeReport, GraphError> {
    let f = &**omega.field();
    let q = f.q();
    let n = omega.len();
    let classes = relation_count(q);
    let builder = GraphBuilder::new(omega.clone())?;
    let relations: Vec<SpreadGraph> =
        (1..=classes).map(|i| builder.relation(i)).collect::<Result<_, _>>()?;

    let violation = |property: &'static str, detail: String| {
        Err(GraphError::SchemeViolation { property, detail })
    };

    // symmetry, straight off the bits
    for (r, rel) in relations.iter().enumerate() {
        for i in 0..n {
            for j in (i + 1)..n {
                if rel.adjacent(i, j) != rel.adjacent(j, i) {
                    return violation("symmetry", format!("R_{} at pair ({i}, {j})", r + 1));
                }
            }
        }
    }

    // the relations partition the off-diagonal pairs
    let wpr = relations[0].adj.words_per_row();
    for i in 0..n {
        let mut acc = vec![0u64; wpr];
        for (r, rel) in relations.iter().enumerate() {
            for (w, (&word, slot)) in rel.adj.row(i).iter().zip(acc.iter_mut()).enumerate() {
                if word & *slot != 0 {
                    let j = w * 64 + (word & *slot).trailing_zeros() as usize;
                    return violation(
                        "disjointness",
                        format!("pair ({i}, {j}) lies in R_{} and an earlier relation", r + 1),
                    );
                }
                *slot |= word;
            }
        }
        let mut expect = vec![u64::MAX; wpr];
        if !n.is_multiple_of(64) {
            expect[wpr - 1] = (1u64 << (n % 64)) - 1;
        }
        expect[i / 64] &= !(1u64 << (i % 64));
        if acc != expect {
            let w = (0..wpr).find(|&w| acc[w] != expect[w]).unwrap();
            let j = w * 64 + (acc[w] ^ expect[w]).trailing_zeros() as usize;
            return violation("cover", format!("pair ({i}, {j}) lies in no relation"));
        }
    }

    // regularity (constant valency per relation)
    let mut valencies = Vec::with_capacity(classes);
    for (r, rel) in relations.iter().enumerate() {
        match rel.is_regular() {
            Some(d) => valencies.push(d),
            None => {
                return violation("regularity", format!("R_{} is not regular", r + 1));
            }
        }
    }

    // each relation is the Poincaré graph of its γ
    let mut relation_gammas = Vec::with_capacity(classes);
    for (r, rel) in relations.iter().enumerate() {
        let gamma = relation_gamma(omega, r + 1)?;
        relation_gammas.push(f.index_of(gamma)?);
        let p = builder.poincare(gamma)?;
        if !p.same_edges(rel) {
            return violation(
                "poincare-match",
                format!("P_q(γ) with γ = {gamma} differs from R_{}", r + 1),
            );
        }
    }

    // map t-value → relation index for the triple counts
    let mut class_of_t = vec![u8::MAX; q as usize];
    for r in 1..=classes {
        let t = relation_target(omega, r)?;
        class_of_t[f.encode_el(t) as usize] = (r - 1) as u8;
    }

    // intersection numbers: p^k_{rs} must not depend on the chosen pair
    let table = builder.table();
    let mut pairs_checked = 0usize;
    for (k, rel) in relations.iter().enumerate() {
        let mut edges: Vec<(u32, u32)> = Vec::new();
        for i in 0..n {
            for (w, &word) in rel.adj.row(i).iter().enumerate() {
                let mut bits = word;
                while bits != 0 {
                    let j = w * 64 + bits.trailing_zeros() as usize;
                    bits &= bits - 1;
                    if j > i {
                        edges.push((i as u32, j as u32));
                    }
                }
            }
        }
        let chosen: Vec<(u32, u32)> = if opts.full_triples || edges.len() <= opts.pairs_per_class {
            edges
        } else {
            let mut rng = seeded::chacha(opts.seed, k as u64);
            (0..opts.pairs_per_class)
                .map(|_| edges[seeded::uniform_below(&mut rng, edges.len() as u64) as usize])
                .collect()
        };
        let mut reference: Option<Vec<u32>> = None;
        for &(x, y) in &chosen {
            let (x, y) = (x as usize, y as usize);
            let mut counts = vec![0u32; classes * classes];
            let row_x = table.row(x);
            let row_y = table.row(y);
            for z in 0..n {
                if z == x || z == y {
                    continue;
                }
                let cr = class_of_t[row_x[z] as usize];
                let cs = class_of_t[row_y[z] as usize];
                if cr == u8::MAX || cs == u8::MAX {
                    return violation(
                        "classification",
                        format!("t-value at ({x}, {z}) or ({z}, {y}) belongs to no relation"),
                    );
                }
                counts[cr as usize * classes + cs as usize] += 1;
            }
            pairs_checked += 1;
            match &reference {
                None => reference = Some(counts),
                Some(base) => {
                    if *base != counts {
                        let at = (0..counts.len()).find(|&i| base[i] != counts[i]).unwrap();
                        return violation(
                            "intersection",
                            format!(
                                "p^{}_{{{},{}}} differs between pairs of R_{}: {} vs {} at ({x}, {y})",
                                k + 1,
                                at / classes + 1,
                                at % classes + 1,
                                k + 1,
                                base[at],
                                counts[at]
                            ),
                        );
                    }
                }
            }
        }
    }

    Ok(SchemeReport {
        q,
        n,
        class_count: classes,
        valencies,
        relation_gammas,
        symmetric: true,
        partition: true,
        poincare_match: true,
        intersection_pairs_checked: pairs_checked,
        intersection_full: opts.full_triples,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ffield::Field;
    use crate::projective::{build_omega, ClassSelector};
    use crate::trig::BilinearForm;

    fn omega(q: u64, selector: ClassSelector) -> Arc<OmegaSet> {
        let f = Arc::new(Field::from_order(q).unwrap());
        Arc::new(build_omega(BilinearForm::identity(f), selector).unwrap())
    }

    #[test]
    fn q3_square_class_gamma_one_is_k3() {
        // The three unit points e₁, e₂, e₃ are mutually perpendicular, so
        // γ = 1 links them all: K₃.
        let om = omega(3, ClassSelector::Square);
        assert_eq!(om.len(), 3);
        let g = build_poincare(&om, om.field().one()).unwrap();
        assert_eq!(g.edge_count(), 3);
        assert_eq!(g.is_regular(), Some(2));
        let report = spectrum(&g);
        let expect = [-1.0, -1.0, 2.0];
        for (got, want) in report.eigenvalues.iter().zip(expect) {
            assert!((got - want).abs() < 1e-9, "{got} vs {want}");
        }
        assert!((report.second - 1.0).abs() < 1e-9);
    }

    #[test]
    fn q3_square_class_gamma_zero_is_empty() {
        let om = omega(3, ClassSelector::Square);
        let g = build_poincare(&om, om.field().zero()).unwrap();
        assert_eq!(g.edge_count(), 0);
        assert_eq!(g.is_regular(), Some(0));
        assert!(spectrum(&g).eigenvalues.iter().all(|&l| l.abs() < 1e-12));
    }

    #[test]
    fn fast_path_matches_definition() {
        for (q, selector) in [
            (5, ClassSelector::Paper),
            (7, ClassSelector::Paper),
            (9, ClassSelector::Square),
            (9, ClassSelector::NonSquare),
            (13, ClassSelector::Paper),
        ] {
            let om = omega(q, selector);
            let builder = GraphBuilder::new(om.clone()).unwrap();
            for gamma in om.field().elements() {
                let fast = builder.poincare(gamma).unwrap();
                let slow = build_poincare_by_definition(&om, gamma).unwrap();
                assert!(fast.same_edges(&slow), "q={q} γ={gamma}");
                assert_eq!(fast.edge_count(), slow.edge_count());
            }
        }
    }

    #[test]
    fn dichotomy_nonsquare_one_minus_gamma_gives_empty() {
        for q in [5u64, 7, 9, 11, 13] {
            let om = omega(q, ClassSelector::Paper);
            let f = om.field().clone();
            let builder = GraphBuilder::new(om.clone()).unwrap();
            for gamma in f.elements() {
                let active = f.is_square(f.sub(f.one(), gamma).unwrap()).unwrap();
                let g = builder.poincare(gamma).unwrap();
                if active {
                    if q >= 9 {
                        assert!(g.edge_count() > 0, "q={q} γ={gamma} should be populated");
                    }
                } else {
                    assert_eq!(g.edge_count(), 0, "q={q} γ={gamma} should be empty");
                }
            }
            assert_eq!(active_gammas(&om).len(), relation_count(q));
        }
    }

    #[test]
    fn valency_matches_vertex_zero_pair_loop() {
        // Independent oracle: count neighbours of vertex 0 by evaluating the
        // projective quadrance definition directly.
        for q in [9u64, 13] {
            let om = omega(q, ClassSelector::Paper);
            let form = om.form();
            let builder = GraphBuilder::new(om.clone()).unwrap();
            for gamma in active_gammas(&om) {
                let g = builder.poincare(gamma).unwrap();
                let by_def = (1..om.len())
                    .filter(|&j| form.proj_quadrance(om.point(0), om.point(j)).unwrap() == gamma)
                    .count() as u64;
                assert_eq!(g.adjacency().row_count(0), by_def, "q={q} γ={gamma}");
                assert_eq!(g.is_regular(), Some(by_def), "q={q} γ={gamma}");
            }
        }
    }

    #[test]
    fn relations_match_their_poincare_graphs() {
        for q in [5u64, 9, 13] {
            let om = omega(q, ClassSelector::Square);
            let builder = GraphBuilder::new(om.clone()).unwrap();
            let classes = relation_count(q);
            let mut total = 0u64;
            for i in 1..=classes {
                let rel = builder.relation(i).unwrap();
                let gamma = relation_gamma(&om, i).unwrap();
                let p = builder.poincare(gamma).unwrap();
                assert!(rel.same_edges(&p), "q={q} R_{i}");
                total += rel.edge_count();
            }
            let n = om.len() as u64;
            assert_eq!(total, n * (n - 1) / 2, "q={q}: relations partition all pairs");
            // the named endpoints of the family
            assert_eq!(relation_gamma(&om, 1).unwrap(), om.field().zero());
            assert_eq!(relation_gamma(&om, classes).unwrap(), om.field().one());
        }
    }

    #[test]
    fn relations_need_the_unit_class() {
        // q = 7 ≡ 3 (mod 4): the paper class is the non-square one, σ = ν.
        let om = omega(7, ClassSelector::Paper);
        assert_eq!(om.class(), PointClass::NonSquare);
        assert!(matches!(build_relation(&om, 1).unwrap_err(), GraphError::NonUnitClass));
        let om = omega(9, ClassSelector::Square);
        assert!(matches!(
            build_relation(&om, 6).unwrap_err(),
            GraphError::RelationIndex { index: 6, max: 5 }
        ));
    }

    #[test]
    fn scheme_verifies_fully_on_small_q() {
        for (q, full) in [(5u64, true), (9, true), (13, true)] {
            let om = omega(q, ClassSelector::Square);
            let opts = SchemeOptions { full_triples: full, ..Default::default() };
            let report = verify_scheme(&om, &opts).unwrap();
            assert_eq!(report.class_count, relation_count(q), "q={q}");
            assert_eq!(report.valencies.len(), report.class_count);
            let n = om.len() as u64;
            assert_eq!(report.valencies.iter().sum::<u64>(), n - 1, "q={q}");
            assert!(report.poincare_match && report.partition && report.symmetric);
        }
    }

    #[test]
    fn spectral_envelopes_by_gamma_family() {
        // The three valency/eigenvalue regimes, frozen from dense oracle
        // runs: P(0) is the triangular graph T(q+1) (valency 2(q−1), second
        // eigenvalue exactly q−3); P(1) is the perpendicularity graph
        // (valency (q−1)/2, second ≤ √q); every other populated γ gives a
        // (q−1)-valent graph with second ≤ 2√q, the Weil bound for the
        // underlying character sums.
        for q in [9u64, 13, 17, 25] {
            let om = omega(q, ClassSelector::Paper);
            let f = om.field().clone();
            let builder = GraphBuilder::new(om.clone()).unwrap();
            for gamma in active_gammas(&om) {
                let g = builder.poincare(gamma).unwrap();
                let report = spectrum(&g);
                let tol = report.tolerance;
                assert!((report.valency - g.is_regular().unwrap() as f64).abs() <= tol);
                if gamma == f.zero() {
                    assert_eq!(g.is_regular(), Some(2 * (q - 1)), "q={q} γ=0");
                    assert!(
                        (report.second - (q as f64 - 3.0)).abs() <= tol,
                        "q={q} γ=0: second {} ≠ q−3",
                        report.second
                    );
                } else if gamma == f.one() {
                    assert_eq!(g.is_regular(), Some((q - 1) / 2), "q={q} γ=1");
                    assert!(
                        report.second <= (q as f64).sqrt() + tol,
                        "q={q} γ=1: second {} > √q",
                        report.second
                    );
                } else {
                    assert_eq!(g.is_regular(), Some(q - 1), "q={q} γ={gamma}");
                    assert!(
                        report.second <= 2.0 * (q as f64).sqrt() + tol,
                        "q={q} γ={gamma}: second {} > 2√q",
                        report.second
                    );
                }
            }
        }
    }

    #[test]
    fn shared_basis_agrees_with_dense() {
        for q in [9u64, 13, 17] {
            let om = omega(q, ClassSelector::Square);
            let builder = GraphBuilder::new(om.clone()).unwrap();
            let gammas = active_gammas(&om);
            let batch = scheme_spectra(&builder, &gammas).unwrap();
            for (gamma, fast) in gammas.iter().zip(&batch) {
                let dense = spectrum(&builder.poincare(*gamma).unwrap());
                assert_eq!(fast.eigenvalues.len(), dense.eigenvalues.len());
                let worst = fast
                    .eigenvalues
                    .iter()
                    .zip(&dense.eigenvalues)
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0f64, f64::max);
                assert!(worst < 1e-6, "q={q} γ={gamma}: eigenvalues differ by {worst}");
                assert_eq!(fast.method, SpectrumMethod::Scheme);
            }
        }
    }

    #[test]
    fn gamma_from_the_wrong_field_is_rejected() {
        let om = omega(5, ClassSelector::Paper);
        let foreign = Field::from_order(7).unwrap().from_int(1);
        assert!(matches!(
            build_poincare(&om, foreign).unwrap_err(),
            GraphError::Field(FieldError::FieldMismatch)
        ));
    }

    #[test]
    fn oversized_omega_is_rejected() {
        let f = Arc::new(Field::from_order(257).unwrap());
        let om = Arc::new(build_omega(BilinearForm::identity(f), ClassSelector::Paper).unwrap());
        assert_eq!(om.len(), 257 * 258 / 2);
        let err = GraphBuilder::new(om).map(|_| ()).unwrap_err();
        assert!(matches!(err, GraphError::TooLarge { n: 33153, max: MAX_VERTICES }));
    }

    #[test]
    fn adjacency_round_trips_through_from_adjacency() {
        let om = omega(13, ClassSelector::Paper);
        let g = build_poincare(&om, om.field().one()).unwrap();
        let rebuilt =
            SpreadGraph::from_adjacency(om.clone(), g.kind(), g.adjacency().clone()).unwrap();
        assert!(rebuilt.same_edges(&g));
        assert_eq!(rebuilt.edge_count(), g.edge_count());
        assert_eq!(rebuilt.is_regular(), g.is_regular());

        // wrong dimensions
        let err = SpreadGraph::from_adjacency(om.clone(), g.kind(), BitMatrix::new(5))
            .map(|_| ())
            .unwrap_err();
        assert!(matches!(err, GraphError::SchemeViolation { property: "adjacency dimensions", .. }));

        // an irregular matrix is accepted but reports no common degree
        let mut sparse = BitMatrix::new(om.len());
        sparse.set_pair(0, 1);
        let lopsided = SpreadGraph::from_adjacency(om.clone(), g.kind(), sparse).unwrap();
        assert_eq!(lopsided.edge_count(), 1);
        assert_eq!(lopsided.is_regular(), None);
    }
}
