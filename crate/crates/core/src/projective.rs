//! The projective plane `PG(2, q)` and the point set Ω.
//!
//! Projective points are stored through their canonical representative: the
//! first nonzero coordinate is scaled to 1, so the `q² + q + 1` points are
//! exactly `(0,0,1)`, `(0,1,z)` and `(1,y,z)`, enumerated here in ascending
//! lexicographic order.  Each point is classified by the quadratic character
//! of `U·U` (invariant under rescaling, since norms scale by squares):
//! isotropic, square, or non-square norm.
//!
//! For any non-degenerate symmetric form there are `q + 1` isotropic points
//! and the remaining `q²` split between the two non-isotropic classes as
//! `q(q+1)/2` and `q(q−1)/2`.  Ω is one non-isotropic class; the `Paper`
//! selector picks whichever class has `q(q+1)/2` points.  Every point of Ω
//! also gets a *fixed-norm representative*: the rescaling `V` of its
//! representative with `V·V = σ` (σ = 1 on the square class, σ = ν on the
//! non-square class), the sign ambiguity broken by taking the
//! lexicographically smaller of `±V`.  Fixed-norm representatives make the
//! projective quadrance a function of `(U·V)²` alone, which is what the
//! graph layer exploits.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ffield::{Field, FieldElement, FieldSpec};
use crate::trig::{BilinearForm, TrigError, Vec3};

#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum ProjectiveError {
    #[error(
        "no norm class has q(q+1)/2 = {expected} points \
         (isotropic {isotropic}, square {square}, nonsquare {nonsquare})"
    )]
    NeitherClassMatches { isotropic: usize, square: usize, nonsquare: usize, expected: usize },
    #[error("the zero vector does not represent a projective point")]
    ZeroVector,
    #[error("the point is isotropic; fixed-norm representatives need U·U ≠ 0")]
    IsotropicPoint,
    #[error("the point's norm class does not match this Ω")]
    ClassMismatch,
    #[error("bad Ω serialization: {reason}")]
    Format { reason: String },
    #[error(transparent)]
    Trig(#[from] TrigError),
    #[error(transparent)]
    Field(#[from] crate::ffield::FieldError),
}

/// Norm class of a projective point, invariant under rescaling.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PointClass {
    Isotropic,
    Square,
    NonSquare,
}

/// Which non-isotropic class Ω should be.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ClassSelector {
    Square,
    NonSquare,
    /// Whichever class has `q(q+1)/2` points.
    Paper,
}

impl fmt::Display for ClassSelector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ClassSelector::Square => "square",
            ClassSelector::NonSquare => "nonsquare",
            ClassSelector::Paper => "paper",
        })
    }
}

impl FromStr for ClassSelector {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "square" => Ok(ClassSelector::Square),
            "nonsquare" => Ok(ClassSelector::NonSquare),
            "paper" => Ok(ClassSelector::Paper),
            other => Err(format!("unknown class selector {other:?} (square|nonsquare|paper)")),
        }
    }
}

/// A point of `PG(2, q)` with its canonical representative and norm class.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ProjPoint {
    rep: Vec3,
    class: PointClass,
}

impl ProjPoint {
    /// Canonicalizes an arbitrary nonzero vector: scale so the first nonzero
    /// coordinate becomes 1, then classify by the quadratic character of the
    /// norm.
    pub fn from_vec(form: &BilinearForm, v: &Vec3) -> Result<ProjPoint, ProjectiveError> {
        let f = form.field();
        let lead = [v.x, v.y, v.z].into_iter().find(|c| !c.is_zero());
        let Some(lead) = lead else {
            return Err(ProjectiveError::ZeroVector);
        };
        let rep = v.scale(f, f.inv(lead)?)?;
        let norm = form.dot(&rep, &rep)?;
        let class = if norm.is_zero() {
            PointClass::Isotropic
        } else if f.is_square(norm)? {
            PointClass::Square
        } else {
            PointClass::NonSquare
        };
        Ok(ProjPoint { rep, class })
    }

    pub fn rep(&self) -> &Vec3 {
        &self.rep
    }

    pub fn class(&self) -> PointClass {
        self.class
    }
}

impl fmt::Display for ProjPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{} : {} : {}]", self.rep.x, self.rep.y, self.rep.z)
    }
}

impl fmt::Debug for ProjPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ProjPoint({self}, {:?})", self.class)
    }
}

/// All `q² + q + 1` points of `PG(2, q)`, classified, in the canonical
/// lexicographic order `(0,0,1) < (0,1,*) < (1,*,*)`.
pub fn enumerate_proj_points(form: &BilinearForm) -> Vec<ProjPoint> {
    let f = form.field();
    let q = f.q() as usize;
    let (zero, one) = (f.zero(), f.one());
    let mut pts = Vec::with_capacity(q * q + q + 1);
    let mut push = |rep: Vec3| {
        let norm = form.raw_dot(&rep, &rep);
        let class = if norm.is_zero() {
            PointClass::Isotropic
        } else if f.raw_is_square(norm) {
            PointClass::Square
        } else {
            PointClass::NonSquare
        };
        pts.push(ProjPoint { rep, class });
    };
    push(Vec3::new(zero, zero, one));
    for z in f.elements() {
        push(Vec3::new(zero, one, z));
    }
    for y in f.elements() {
        for z in f.elements() {
            push(Vec3::new(one, y, z));
        }
    }
    pts
}

/// Point counts of `PG(2, q)` by norm class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassCounts {
    pub isotropic: usize,
    pub square: usize,
    pub nonsquare: usize,
}

impl ClassCounts {
    pub fn total(&self) -> usize {
        self.isotropic + self.square + self.nonsquare
    }
}

pub fn classify_counts(form: &BilinearForm) -> ClassCounts {
    let mut counts = ClassCounts { isotropic: 0, square: 0, nonsquare: 0 };
    for p in enumerate_proj_points(form) {
        match p.class() {
            PointClass::Isotropic => counts.isotropic += 1,
            PointClass::Square => counts.square += 1,
            PointClass::NonSquare => counts.nonsquare += 1,
        }
    }
    counts
}

/// One non-isotropic norm class of `PG(2, q)`, with fixed-norm
/// representatives precomputed for every point.
pub struct OmegaSet {
    form: BilinearForm,
    selector: ClassSelector,
    class: PointClass,
    sigma: FieldElement,
    points: Vec<ProjPoint>,
    units: Vec<Vec3>,
}

/// Builds Ω.  `Paper` resolves to whichever class has `q(q+1)/2` points and
/// fails with [`ProjectiveError::NeitherClassMatches`] if there is none
/// (which would falsify the counting theorem for this form).
pub fn build_omega(form: BilinearForm, selector: ClassSelector) -> Result<OmegaSet, ProjectiveError> {
    let f = form.field().clone();
    let q = f.q() as usize;
    let all = enumerate_proj_points(&form);
    let counts = ClassCounts {
        isotropic: all.iter().filter(|p| p.class == PointClass::Isotropic).count(),
        square: all.iter().filter(|p| p.class == PointClass::Square).count(),
        nonsquare: all.iter().filter(|p| p.class == PointClass::NonSquare).count(),
    };
    let expected = q * (q + 1) / 2;
    let class = match selector {
        ClassSelector::Square => PointClass::Square,
        ClassSelector::NonSquare => PointClass::NonSquare,
        ClassSelector::Paper => {
            if counts.square == expected {
                PointClass::Square
            } else if counts.nonsquare == expected {
                PointClass::NonSquare
            } else {
                return Err(ProjectiveError::NeitherClassMatches {
                    isotropic: counts.isotropic,
                    square: counts.square,
                    nonsquare: counts.nonsquare,
                    expected,
                });
            }
        }
    };
    let sigma = match class {
        PointClass::Square => f.one(),
        PointClass::NonSquare => f.primitive_element(),
        PointClass::Isotropic => unreachable!(),
    };
    let points: Vec<ProjPoint> = all.into_iter().filter(|p| p.class == class).collect();
    let mut omega =
        OmegaSet { form, selector, class, sigma, points, units: Vec::new() };
    omega.units = omega.points.iter().map(|p| omega.fixed_norm_rep(p)).collect::<Result<_, _>>()?;
    Ok(omega)
}

impl OmegaSet {
    pub fn field(&self) -> &Arc<Field> {
        self.form.field()
    }

    pub fn form(&self) -> &BilinearForm {
        &self.form
    }

    pub fn selector(&self) -> ClassSelector {
        self.selector
    }

    pub fn class(&self) -> PointClass {
        self.class
    }

    /// The common norm of the fixed representatives: 1 on the square class,
    /// ν on the non-square class.
    pub fn sigma(&self) -> FieldElement {
        self.sigma
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Points in ascending lexicographic order of canonical representatives.
    pub fn points(&self) -> &[ProjPoint] {
        &self.points
    }

    pub fn point(&self, i: usize) -> &ProjPoint {
        &self.points[i]
    }

    /// The precomputed fixed-norm representative of the `i`-th point.
    pub fn unit_rep(&self, i: usize) -> &Vec3 {
        &self.units[i]
    }

    pub fn unit_reps(&self) -> &[Vec3] {
        &self.units
    }

    /// Position of a point within Ω, by binary search on the canonical order.
    pub fn index_of(&self, p: &ProjPoint) -> Option<usize> {
        self.points.binary_search(p).ok()
    }

    /// Whether two handles describe the same Ω (same field, form, and
    /// class), so indices into one are valid in the other.
    pub fn same_set(&self, other: &OmegaSet) -> bool {
        self.field().id() == other.field().id()
            && self.class == other.class
            && self.sigma == other.sigma
            && self.form.entries() == other.form.entries()
    }

    /// The representative `V ~ p` with `V·V = σ`, sign-canonicalized to the
    /// lexicographically smaller of `±V`.  Works for any point of Ω's norm
    /// class, whether or not it was enumerated by this set.
    pub fn fixed_norm_rep(&self, p: &ProjPoint) -> Result<Vec3, ProjectiveError> {
        if p.class == PointClass::Isotropic {
            return Err(ProjectiveError::IsotropicPoint);
        }
        if p.class != self.class {
            return Err(ProjectiveError::ClassMismatch);
        }
        let f = &**self.form.field();
        let norm = self.form.dot(&p.rep, &p.rep)?;
        // σ/norm is a square exactly because norm and σ share a class
        let c = f.sqrt(f.mul(self.sigma, f.inv(norm)?)?)?;
        let v = p.rep.scale(f, c)?;
        let neg = v.neg(f)?;
        Ok(if neg < v { neg } else { v })
    }

    /// Self-contained JSON description: field, form, resolved class, σ, and
    /// the canonical representatives in order.
    pub fn to_json(&self) -> serde_json::Value {
        let f = &**self.form.field();
        let enc = |e: FieldElement| f.index_of(e).expect("own element");
        let form: Vec<Vec<u64>> = self
            .form
            .entries()
            .iter()
            .map(|row| row.iter().map(|&e| enc(e)).collect())
            .collect();
        let points: Vec<[u64; 3]> = self
            .points
            .iter()
            .map(|p| [enc(p.rep.x), enc(p.rep.y), enc(p.rep.z)])
            .collect();
        serde_json::json!({
            "format_version": 1,
            "q": f.q(),
            "field": f.spec(),
            "form": form,
            "selector": self.selector,
            "class": match self.class {
                PointClass::Square => "square",
                PointClass::NonSquare => "nonsquare",
                PointClass::Isotropic => unreachable!(),
            },
            "sigma": enc(self.sigma),
            "size": self.points.len(),
            "points": points,
        })
    }

    /// Rebuilds Ω from [`to_json`](Self::to_json) output and verifies the
    /// recorded class, σ, and point list against the reconstruction.
    pub fn from_json(value: &serde_json::Value) -> Result<OmegaSet, ProjectiveError> {
        let bad = |reason: &str| ProjectiveError::Format { reason: reason.to_string() };
        let spec: FieldSpec = serde_json::from_value(
            value.get("field").cloned().ok_or_else(|| bad("missing field"))?,
        )
        .map_err(|e| bad(&format!("field spec: {e}")))?;
        let field = Arc::new(Field::from_spec(&spec)?);
        let form_ints: Vec<Vec<u64>> = serde_json::from_value(
            value.get("form").cloned().ok_or_else(|| bad("missing form"))?,
        )
        .map_err(|e| bad(&format!("form: {e}")))?;
        if form_ints.len() != 3 || form_ints.iter().any(|r| r.len() != 3) {
            return Err(bad("form must be 3×3"));
        }
        let mut entries = [[field.zero(); 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                entries[i][j] = field.from_index(form_ints[i][j])?;
            }
        }
        let form = BilinearForm::new(field.clone(), entries)?;
        let selector: ClassSelector = serde_json::from_value(
            value.get("selector").cloned().ok_or_else(|| bad("missing selector"))?,
        )
        .map_err(|e| bad(&format!("selector: {e}")))?;
        let omega = build_omega(form, selector)?;
        let expected = omega.to_json();
        for key in ["class", "sigma", "points", "q"] {
            if value.get(key) != expected.get(key) {
                return Err(bad(&format!("stored {key} disagrees with reconstruction")));
            }
        }
        Ok(omega)
    }
}

impl fmt::Debug for OmegaSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "OmegaSet(q={}, class={:?}, |Ω|={})",
            self.form.field().q(),
            self.class,
            self.points.len()
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn identity_form(q: u64) -> BilinearForm {
        BilinearForm::identity(Arc::new(Field::from_order(q).unwrap()))
    }

    #[test]
    fn q3_counts_and_paper_class() {
        let counts = classify_counts(&identity_form(3));
        assert_eq!(counts, ClassCounts { isotropic: 4, square: 3, nonsquare: 6 });
        let omega = build_omega(identity_form(3), ClassSelector::Paper).unwrap();
        assert_eq!(omega.class(), PointClass::NonSquare);
        assert_eq!(omega.len(), 6);
        // σ = ν = 2 in F_3
        assert_eq!(omega.sigma(), omega.field().from_int(2));
    }

    #[test]
    fn q5_counts_and_paper_class() {
        let counts = classify_counts(&identity_form(5));
        assert_eq!(counts, ClassCounts { isotropic: 6, square: 15, nonsquare: 10 });
        let omega = build_omega(identity_form(5), ClassSelector::Paper).unwrap();
        assert_eq!(omega.class(), PointClass::Square);
        assert_eq!(omega.len(), 15);
        assert_eq!(omega.sigma(), omega.field().one());
    }

    #[test]
    fn counts_sweep_matches_theory() {
        for q in [3u64, 5, 7, 9, 11, 13, 25, 27] {
            let counts = classify_counts(&identity_form(q));
            let qu = q as usize;
            assert_eq!(counts.isotropic, qu + 1, "q={q}");
            assert_eq!(counts.square + counts.nonsquare, qu * qu, "q={q}");
            assert_eq!(counts.total(), qu * qu + qu + 1, "q={q}");
            let omega = build_omega(identity_form(q), ClassSelector::Paper).unwrap();
            assert_eq!(omega.len(), qu * (qu + 1) / 2, "q={q}");
            // identity form: the big class is the square one iff −1 is a
            // square, i.e. iff q ≡ 1 (mod 4)
            let expect_square = q % 4 == 1;
            assert_eq!(omega.class() == PointClass::Square, expect_square, "q={q}");
        }
    }

    #[test]
    fn enumeration_is_canonical_sorted_and_complete() {
        let form = identity_form(7);
        let pts = enumerate_proj_points(&form);
        assert_eq!(pts.len(), 57);
        let f = form.field();
        for w in pts.windows(2) {
            assert!(w[0] < w[1], "strictly ascending, no duplicates");
        }
        for p in &pts {
            let lead = [p.rep().x, p.rep().y, p.rep().z]
                .into_iter()
                .find(|c| !c.is_zero())
                .unwrap();
            assert_eq!(lead, f.one(), "first nonzero coordinate scaled to 1");
        }
    }

    #[test]
    fn from_vec_is_scaling_invariant() {
        let form = identity_form(7);
        let f = form.field().clone();
        let base = Vec3::new(f.from_int(3), f.from_int(2), f.from_int(6));
        let p = ProjPoint::from_vec(&form, &base).unwrap();
        for c in 1..7 {
            let scaled = base.scale(&f, f.from_int(c)).unwrap();
            assert_eq!(ProjPoint::from_vec(&form, &scaled).unwrap(), p);
        }
        let zero = Vec3::new(f.zero(), f.zero(), f.zero());
        assert_eq!(
            ProjPoint::from_vec(&form, &zero).unwrap_err(),
            ProjectiveError::ZeroVector
        );
    }

    #[test]
    fn fixed_norm_reps_have_norm_sigma_and_canonical_sign() {
        for q in [3u64, 5, 7, 9, 13] {
            for selector in [ClassSelector::Square, ClassSelector::NonSquare] {
                let omega = build_omega(identity_form(q), selector).unwrap();
                let f = omega.field().clone();
                for i in 0..omega.len() {
                    let u = omega.unit_rep(i);
                    assert_eq!(omega.form().dot(u, u).unwrap(), omega.sigma(), "q={q} i={i}");
                    let neg = u.neg(&f).unwrap();
                    assert!(*u <= neg, "sign canonicalization q={q} i={i}");
                    // still the same projective point
                    let back = ProjPoint::from_vec(omega.form(), u).unwrap();
                    assert_eq!(back, *omega.point(i));
                }
            }
        }
    }

    #[test]
    fn fixed_norm_rep_rejects_wrong_class() {
        let omega = build_omega(identity_form(5), ClassSelector::Square).unwrap();
        let form = identity_form(5);
        let f = form.field().clone();
        // (0,1,2): norm 1 + 4 = 5 ≡ 0 → isotropic
        let iso =
            ProjPoint::from_vec(&form, &Vec3::new(f.zero(), f.one(), f.from_int(2))).unwrap();
        assert_eq!(omega.fixed_norm_rep(&iso).unwrap_err(), ProjectiveError::IsotropicPoint);
        // (0,1,1): norm 2, a non-square mod 5
        let ns = ProjPoint::from_vec(&form, &Vec3::new(f.zero(), f.one(), f.one())).unwrap();
        assert_eq!(omega.fixed_norm_rep(&ns).unwrap_err(), ProjectiveError::ClassMismatch);
    }

    #[test]
    fn index_of_round_trips() {
        let omega = build_omega(identity_form(9), ClassSelector::Paper).unwrap();
        for (i, p) in omega.points().iter().enumerate() {
            assert_eq!(omega.index_of(p), Some(i));
        }
    }

    #[test]
    fn non_identity_form_still_has_a_paper_class() {
        for q in [5u64, 7, 9] {
            let f = Arc::new(Field::from_order(q).unwrap());
            let nu = f.primitive_element();
            let form = BilinearForm::diagonal(f.clone(), [f.one(), f.one(), nu]).unwrap();
            let counts = classify_counts(&form);
            assert_eq!(counts.isotropic, q as usize + 1, "q={q}");
            let omega = build_omega(form, ClassSelector::Paper).unwrap();
            assert_eq!(omega.len(), (q * (q + 1) / 2) as usize, "q={q}");
        }
    }

    #[test]
    fn json_round_trip() {
        for (q, selector) in [(5u64, ClassSelector::Paper), (9, ClassSelector::NonSquare)] {
            let omega = build_omega(identity_form(q), selector).unwrap();
            let json = omega.to_json();
            let back = OmegaSet::from_json(&json).unwrap();
            assert_eq!(back.len(), omega.len());
            assert_eq!(back.class(), omega.class());
            assert_eq!(back.sigma(), omega.sigma());
            assert_eq!(back.points(), omega.points());
            // tampering is caught
            let mut bad = json.clone();
            bad["sigma"] = serde_json::json!(0);
            assert!(matches!(
                OmegaSet::from_json(&bad).unwrap_err(),
                ProjectiveError::Format { .. }
            ));
        }
    }
}
