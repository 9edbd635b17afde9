//! Arithmetic in `F_q = F_p[x]/(m(x))` for an odd prime `p` and `1 ≤ k ≤ 8`.
//!
//! Elements are residue-class polynomials of degree `< k`, stored as
//! little-endian digit arrays (`digits[i]` is the coefficient of `x^i`).  Two
//! integer views of an element matter elsewhere:
//!
//! * the *canonical encoding* `Σ cᵢ pⁱ`, used whenever an element is written
//!   to JSON or CSV, and
//! * the *lexicographic order* on coefficient lists `(c₀, c₁, …)`, which is
//!   the derived `Ord` on [`FieldElement`] and settles every "smallest" or
//!   "first" choice in this crate: canonical square roots, primitive
//!   elements, and the automatic modulus search.
//!
//! The implementation is deliberately elementary and exhaustive.  Squareness
//! is Euler's criterion `a^{(q−1)/2} ∈ {0, 1}`; square roots come from one
//! squaring pass over the whole field at construction time; inverses from a
//! single walk along the powers of a primitive element; irreducibility from
//! trial division by every monic polynomial of degree `≤ k/2`.  Fields are
//! desk-scale (`q ≤ 65536`) and construction is `O(q log q)`; the graph
//! layers above dominate the running time at every size this crate targets.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Largest supported extension degree.
pub const MAX_K: usize = 8;
/// Largest supported field order.
pub const MAX_ORDER: u64 = 65_536;

const NO_ENTRY: u32 = u32::MAX;

type Digits = [u16; MAX_K];

#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum FieldError {
    #[error("characteristic two is outside the rational-trigonometry setting")]
    CharacteristicTwo,
    #[error("{p} is not prime")]
    NotPrime { p: u64 },
    #[error("modulus is not irreducible over F_{p}")]
    NotIrreducible { p: u64 },
    #[error("modulus rejected: {reason}")]
    InvalidModulus { reason: String },
    #[error("extension degree {k} outside 1..=8")]
    InvalidDegree { k: usize },
    #[error("field order {q} exceeds the supported maximum 65536")]
    TooLarge { q: u64 },
    #[error("{q} is not an odd prime power")]
    NotPrimePower { q: u64 },
    #[error("division by zero")]
    DivisionByZero,
    #[error("element is not a square")]
    NotASquare,
    #[error("element does not belong to this field")]
    FieldMismatch,
    #[error("bad element: {reason}")]
    InvalidElement { reason: String },
}

/// An element of a specific [`Field`].
///
/// Elements remember (a hash of) the field that made them; mixing elements
/// from different fields is reported as [`FieldError::FieldMismatch`] rather
/// than silently computing garbage.  The derived `Ord` is the lexicographic
/// order on coefficient lists with `c₀` most significant.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FieldElement {
    digits: Digits,
    fid: u32,
}

impl FieldElement {
    pub fn is_zero(&self) -> bool {
        self.digits == [0; MAX_K]
    }
}

impl fmt::Display for FieldElement {
    /// Renders as a polynomial in `x`, e.g. `0`, `5`, `2+x`, `1+2x^2`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut wrote = false;
        for (i, &c) in self.digits.iter().enumerate() {
            if c == 0 {
                continue;
            }
            if wrote {
                write!(f, "+")?;
            }
            match (i, c) {
                (0, c) => write!(f, "{c}")?,
                (1, 1) => write!(f, "x")?,
                (1, c) => write!(f, "{c}x")?,
                (i, 1) => write!(f, "x^{i}")?,
                (i, c) => write!(f, "{c}x^{i}")?,
            }
            wrote = true;
        }
        if !wrote {
            write!(f, "0")?;
        }
        Ok(())
    }
}

impl fmt::Debug for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FieldElement({self} @{:08x})", self.fid)
    }
}

/// Serializable description of a field: `p`, `k`, and the modulus as a
/// little-endian coefficient list of length `k + 1`.  For prime fields the
/// modulus is the trivial `x`, recorded as `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FieldSpec {
    pub p: u64,
    pub k: usize,
    pub modulus: Vec<u64>,
}

/// A concrete `F_q` with its reduction and lookup tables.
pub struct Field {
    p: u64,
    k: usize,
    q: u64,
    modulus: Vec<u64>,
    /// `xpow[j]` is `x^{k+j} mod m`, for `j < k − 1`.
    xpow: [Digits; MAX_K],
    /// Inverse table indexed by canonical encoding; `NO_ENTRY` at zero.
    inv_tab: Vec<u32>,
    /// Canonical square roots indexed by canonical encoding, `NO_ENTRY` for
    /// non-squares.  Filled by squaring every element in lexicographic
    /// order and keeping the first writer, so the stored root is the
    /// lexicographically smaller of the two.
    sqrt_tab: Vec<u32>,
    primitive: Digits,
    id: u32,
}

impl fmt::Debug for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Field(q={} = {}^{}, m={:?})", self.q, self.p, self.k, self.modulus)
    }
}

impl Field {
    /// Builds `F_{p^k}`.  With `modulus: None` and `k > 1`, picks the
    /// lexicographically first monic irreducible polynomial of degree `k`
    /// (ordering the lower coefficient lists `(c₀, …, c_{k−1})`).  A supplied
    /// modulus must be monic of degree exactly `k`; it is reduced mod `p` and
    /// checked for irreducibility.  For `k = 1` the modulus is ignored and
    /// recorded as the trivial `x`.
    pub fn new(p: u64, k: usize, modulus: Option<&[u64]>) -> Result<Field, FieldError> {
        if p == 2 {
            return Err(FieldError::CharacteristicTwo);
        }
        if !is_prime(p) {
            return Err(FieldError::NotPrime { p });
        }
        if k == 0 || k > MAX_K {
            return Err(FieldError::InvalidDegree { k });
        }
        let q_wide = (p as u128).pow(k as u32);
        if q_wide > MAX_ORDER as u128 {
            return Err(FieldError::TooLarge { q: q_wide.min(u64::MAX as u128) as u64 });
        }
        let q = q_wide as u64;

        let modulus = if k == 1 {
            vec![0, 1]
        } else {
            match modulus {
                Some(m) => {
                    let m = normalize_modulus(p, k, m)?;
                    if !is_irreducible(p, &m) {
                        return Err(FieldError::NotIrreducible { p });
                    }
                    m
                }
                None => find_modulus(p, k),
            }
        };

        let mut field = Field {
            p,
            k,
            q,
            xpow: [[0; MAX_K]; MAX_K],
            inv_tab: Vec::new(),
            sqrt_tab: Vec::new(),
            primitive: [0; MAX_K],
            id: 0,
            modulus,
        };
        field.id = fid_of(p, k, &field.modulus);
        field.build_reduction_rows();
        field.build_sqrt_table();
        field.find_primitive();
        field.build_inv_table();
        Ok(field)
    }

    /// Convenience constructor for a prime field.
    pub fn prime(p: u64) -> Result<Field, FieldError> {
        Field::new(p, 1, None)
    }

    /// Builds the field of order `q`, factoring `q = p^k`.
    pub fn from_order(q: u64) -> Result<Field, FieldError> {
        if q < 3 {
            return Err(FieldError::NotPrimePower { q });
        }
        if q.is_multiple_of(2) {
            // A power of two is specifically char-2; anything else even is
            // not a prime power at all.
            let pow2 = q & (q - 1) == 0;
            return Err(if pow2 { FieldError::CharacteristicTwo } else { FieldError::NotPrimePower { q } });
        }
        let mut p = 0;
        let mut d = 3;
        while d * d <= q {
            if q.is_multiple_of(d) {
                p = d;
                break;
            }
            d += 2;
        }
        if p == 0 {
            return Field::prime(q);
        }
        let mut rest = q;
        let mut k = 0;
        while rest.is_multiple_of(p) {
            rest /= p;
            k += 1;
        }
        if rest != 1 {
            return Err(FieldError::NotPrimePower { q });
        }
        Field::new(p, k, None)
    }

    pub fn from_spec(spec: &FieldSpec) -> Result<Field, FieldError> {
        if spec.k == 1 {
            Field::new(spec.p, 1, None)
        } else {
            Field::new(spec.p, spec.k, Some(&spec.modulus))
        }
    }

    pub fn spec(&self) -> FieldSpec {
        FieldSpec { p: self.p, k: self.k, modulus: self.modulus.clone() }
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn q(&self) -> u64 {
        self.q
    }

    /// The reduction modulus as a little-endian coefficient list of length
    /// `k + 1`; `[0, 1]` for prime fields.
    pub fn modulus(&self) -> &[u64] {
        &self.modulus
    }

    /// Hash identifying this field; equal specs give equal ids.
    pub fn id(&self) -> u32 {
        self.id
    }

    pub fn zero(&self) -> FieldElement {
        self.wrap([0; MAX_K])
    }

    pub fn one(&self) -> FieldElement {
        self.from_int(1)
    }

    /// The image of an integer under the prime-subfield embedding `n ↦ n·1`.
    pub fn from_int(&self, n: i64) -> FieldElement {
        let mut d = [0u16; MAX_K];
        d[0] = n.rem_euclid(self.p as i64) as u16;
        self.wrap(d)
    }

    /// The element with canonical encoding `idx = Σ cᵢ pⁱ`.
    pub fn from_index(&self, idx: u64) -> Result<FieldElement, FieldError> {
        if idx >= self.q {
            return Err(FieldError::InvalidElement {
                reason: format!("encoding {idx} out of range for q = {}", self.q),
            });
        }
        Ok(self.wrap(self.decode(idx)))
    }

    /// Builds an element from little-endian coefficients (negatives allowed).
    /// The list may be shorter than `k`; longer lists are rejected rather
    /// than reduced so that typos do not silently vanish.
    pub fn element(&self, coeffs: &[i64]) -> Result<FieldElement, FieldError> {
        if coeffs.len() > self.k {
            return Err(FieldError::InvalidElement {
                reason: format!("{} coefficients for extension degree {}", coeffs.len(), self.k),
            });
        }
        let mut d = [0u16; MAX_K];
        for (i, &c) in coeffs.iter().enumerate() {
            d[i] = c.rem_euclid(self.p as i64) as u16;
        }
        Ok(self.wrap(d))
    }

    /// Canonical integer encoding `Σ cᵢ pⁱ`, the form used in files.
    pub fn index_of(&self, a: FieldElement) -> Result<u64, FieldError> {
        self.check(a)?;
        Ok(self.encode(&a.digits))
    }

    /// Little-endian coefficient list of length `k`.
    pub fn coeffs_of(&self, a: FieldElement) -> Result<Vec<u64>, FieldError> {
        self.check(a)?;
        Ok(a.digits[..self.k].iter().map(|&c| c as u64).collect())
    }

    /// All `q` elements in lexicographic order of coefficient lists.
    pub fn elements(&self) -> impl Iterator<Item = FieldElement> + '_ {
        (0..self.q).map(move |r| self.wrap(self.digits_at_rank(r)))
    }

    pub fn add(&self, a: FieldElement, b: FieldElement) -> Result<FieldElement, FieldError> {
        self.check2(a, b)?;
        Ok(self.raw_add(a, b))
    }

    pub fn sub(&self, a: FieldElement, b: FieldElement) -> Result<FieldElement, FieldError> {
        self.check2(a, b)?;
        Ok(self.raw_sub(a, b))
    }

    pub fn mul(&self, a: FieldElement, b: FieldElement) -> Result<FieldElement, FieldError> {
        self.check2(a, b)?;
        Ok(self.raw_mul(a, b))
    }

    pub fn neg(&self, a: FieldElement) -> Result<FieldElement, FieldError> {
        self.check(a)?;
        Ok(self.raw_neg(a))
    }

    pub fn inv(&self, a: FieldElement) -> Result<FieldElement, FieldError> {
        self.check(a)?;
        if a.is_zero() {
            return Err(FieldError::DivisionByZero);
        }
        Ok(self.raw_inv(a))
    }

    /// `a^e` by square-and-multiply; `0^0 = 1` by the empty-product rule.
    pub fn pow(&self, a: FieldElement, e: u64) -> Result<FieldElement, FieldError> {
        self.check(a)?;
        Ok(self.raw_pow(a, e))
    }

    /// Euler's criterion: `a` is a square iff `a^{(q−1)/2} ∈ {0, 1}`.
    /// Zero counts as a square.  Cross-checked in tests against the
    /// exhaustive set `{e² : e ∈ F_q}`.
    pub fn is_square(&self, a: FieldElement) -> Result<bool, FieldError> {
        self.check(a)?;
        Ok(self.raw_is_square(a))
    }

    /// The canonical square root: the lexicographically smaller of the two
    /// roots (they are negatives of each other, so exactly one choice is
    /// canonical; `sqrt(0) = 0`).
    pub fn sqrt(&self, a: FieldElement) -> Result<FieldElement, FieldError> {
        self.check(a)?;
        let entry = self.sqrt_tab[self.encode(&a.digits) as usize];
        if entry == NO_ENTRY {
            return Err(FieldError::NotASquare);
        }
        Ok(self.wrap(self.decode(entry as u64)))
    }

    /// The lexicographically first element of multiplicative order `q − 1`,
    /// found by computing orders directly.
    pub fn primitive_element(&self) -> FieldElement {
        self.wrap(self.primitive)
    }

    // ----- unchecked internals, for hot loops inside the crate -----

    pub(crate) fn wrap(&self, digits: Digits) -> FieldElement {
        FieldElement { digits, fid: self.id }
    }

    pub(crate) fn encode_el(&self, a: FieldElement) -> u64 {
        debug_assert_eq!(a.fid, self.id);
        self.encode(&a.digits)
    }

    fn check(&self, a: FieldElement) -> Result<(), FieldError> {
        if a.fid != self.id {
            return Err(FieldError::FieldMismatch);
        }
        Ok(())
    }

    fn check2(&self, a: FieldElement, b: FieldElement) -> Result<(), FieldError> {
        self.check(a)?;
        self.check(b)
    }

    pub(crate) fn raw_add(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        debug_assert!(a.fid == self.id && b.fid == self.id);
        let p = self.p as u32;
        let mut d = [0u16; MAX_K];
        for i in 0..self.k {
            let s = a.digits[i] as u32 + b.digits[i] as u32;
            d[i] = if s >= p { (s - p) as u16 } else { s as u16 };
        }
        self.wrap(d)
    }

    pub(crate) fn raw_sub(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        debug_assert!(a.fid == self.id && b.fid == self.id);
        let p = self.p as u32;
        let mut d = [0u16; MAX_K];
        for i in 0..self.k {
            let s = a.digits[i] as u32 + p - b.digits[i] as u32;
            d[i] = if s >= p { (s - p) as u16 } else { s as u16 };
        }
        self.wrap(d)
    }

    pub(crate) fn raw_neg(&self, a: FieldElement) -> FieldElement {
        self.raw_sub(self.wrap([0; MAX_K]), a)
    }

    pub(crate) fn raw_mul(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        debug_assert!(a.fid == self.id && b.fid == self.id);
        self.wrap(self.mul_digits(&a.digits, &b.digits))
    }

    pub(crate) fn raw_inv(&self, a: FieldElement) -> FieldElement {
        debug_assert!(!a.is_zero());
        let entry = self.inv_tab[self.encode(&a.digits) as usize];
        debug_assert!(entry != NO_ENTRY);
        self.wrap(self.decode(entry as u64))
    }

    pub(crate) fn raw_pow(&self, a: FieldElement, mut e: u64) -> FieldElement {
        let mut base = a.digits;
        let mut acc = [0u16; MAX_K];
        acc[0] = 1;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul_digits(&acc, &base);
            }
            e >>= 1;
            if e > 0 {
                base = self.mul_digits(&base, &base);
            }
        }
        self.wrap(acc)
    }

    pub(crate) fn raw_is_square(&self, a: FieldElement) -> bool {
        if a.is_zero() {
            return true;
        }
        self.raw_pow(a, (self.q - 1) / 2) == self.one()
    }

    fn mul_digits(&self, a: &Digits, b: &Digits) -> Digits {
        let k = self.k;
        let p = self.p;
        if k == 1 {
            let mut d = [0u16; MAX_K];
            d[0] = ((a[0] as u64 * b[0] as u64) % p) as u16;
            return d;
        }
        // Schoolbook product; every u64 accumulator below stays under
        // 8·65535² + 65535 < 2^36.
        let mut wide = [0u64; 2 * MAX_K];
        for i in 0..k {
            if a[i] == 0 {
                continue;
            }
            let ai = a[i] as u64;
            for j in 0..k {
                wide[i + j] += ai * b[j] as u64;
            }
        }
        let mut acc = [0u64; MAX_K];
        acc[..k].copy_from_slice(&wide[..k]);
        for j in 0..k - 1 {
            let t = wide[k + j] % p;
            if t == 0 {
                continue;
            }
            let row = &self.xpow[j];
            for i in 0..k {
                acc[i] += t * row[i] as u64;
            }
        }
        let mut out = [0u16; MAX_K];
        for i in 0..k {
            out[i] = (acc[i] % p) as u16;
        }
        out
    }

    /// Canonical encoding `Σ cᵢ pⁱ`.
    fn encode(&self, d: &Digits) -> u64 {
        let mut v = 0u64;
        for i in (0..self.k).rev() {
            v = v * self.p + d[i] as u64;
        }
        v
    }

    fn decode(&self, mut idx: u64) -> Digits {
        let mut d = [0u16; MAX_K];
        for slot in d.iter_mut().take(self.k) {
            *slot = (idx % self.p) as u16;
            idx /= self.p;
        }
        d
    }

    /// Maps `r ∈ 0..q` to the `r`-th coefficient list in lexicographic order
    /// (`c₀` most significant, so `c_{k−1}` cycles fastest).
    fn digits_at_rank(&self, mut r: u64) -> Digits {
        let mut d = [0u16; MAX_K];
        for i in (0..self.k).rev() {
            d[i] = (r % self.p) as u16;
            r /= self.p;
        }
        d
    }

    fn build_reduction_rows(&mut self) {
        let k = self.k;
        if k == 1 {
            return;
        }
        let p = self.p;
        // x^k ≡ −(m₀ + m₁x + … + m_{k−1}x^{k−1})
        let mut cur = [0u16; MAX_K];
        for i in 0..k {
            cur[i] = ((p - self.modulus[i]) % p) as u16;
        }
        self.xpow[0] = cur;
        for j in 1..k - 1 {
            let prev = self.xpow[j - 1];
            let top = prev[k - 1] as u64;
            let mut next = [0u64; MAX_K];
            for i in 1..k {
                next[i] = prev[i - 1] as u64;
            }
            if top != 0 {
                for i in 0..k {
                    next[i] += top * self.xpow[0][i] as u64;
                }
            }
            let mut row = [0u16; MAX_K];
            for i in 0..k {
                row[i] = (next[i] % p) as u16;
            }
            self.xpow[j] = row;
        }
    }

    fn build_sqrt_table(&mut self) {
        self.sqrt_tab = vec![NO_ENTRY; self.q as usize];
        for r in 0..self.q {
            let d = self.digits_at_rank(r);
            let sq = self.mul_digits(&d, &d);
            let at = self.encode(&sq) as usize;
            if self.sqrt_tab[at] == NO_ENTRY {
                self.sqrt_tab[at] = self.encode(&d) as u32;
            }
        }
    }

    fn find_primitive(&mut self) {
        let one = {
            let mut d = [0u16; MAX_K];
            d[0] = 1;
            d
        };
        for r in 1..self.q {
            let cand = self.digits_at_rank(r);
            let mut cur = cand;
            let mut order = 1u64;
            while cur != one {
                cur = self.mul_digits(&cur, &cand);
                order += 1;
                if order > self.q {
                    break; // not a unit: impossible here, but stay finite
                }
            }
            if order == self.q - 1 {
                self.primitive = cand;
                return;
            }
        }
        unreachable!("the multiplicative group of a finite field is cyclic");
    }

    fn build_inv_table(&mut self) {
        // inv(ν^i) = ν^{q−1−i}: one walk along the powers of ν covers all
        // q − 1 units.
        self.inv_tab = vec![NO_ENTRY; self.q as usize];
        let ord = (self.q - 1) as usize;
        let mut powers = Vec::with_capacity(ord);
        let mut cur = [0u16; MAX_K];
        cur[0] = 1;
        for _ in 0..ord {
            powers.push(self.encode(&cur) as u32);
            cur = self.mul_digits(&cur, &self.primitive);
        }
        debug_assert_eq!(cur, {
            let mut one = [0u16; MAX_K];
            one[0] = 1;
            one
        });
        for i in 0..ord {
            self.inv_tab[powers[i] as usize] = powers[(ord - i) % ord];
        }
    }
}

/// Deterministic field id: FNV-1a over `(p, k, modulus)` folded to 32 bits.
fn fid_of(p: u64, k: usize, modulus: &[u64]) -> u32 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    let eat = |h: u64, v: u64| {
        let mut h = h;
        for b in v.to_le_bytes() {
            h ^= b as u64;
            h = h.wrapping_mul(0x0100_0000_01b3);
        }
        h
    };
    h = eat(h, p);
    h = eat(h, k as u64);
    for &c in modulus {
        h = eat(h, c);
    }
    ((h >> 32) ^ (h & 0xffff_ffff)) as u32
}

fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n.is_multiple_of(2) {
        return n == 2;
    }
    let mut d = 3;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 2;
    }
    true
}

fn normalize_modulus(p: u64, k: usize, m: &[u64]) -> Result<Vec<u64>, FieldError> {
    if m.len() != k + 1 {
        return Err(FieldError::InvalidModulus {
            reason: format!("expected {} coefficients for degree {k}, got {}", k + 1, m.len()),
        });
    }
    let m: Vec<u64> = m.iter().map(|&c| c % p).collect();
    if m[k] != 1 {
        return Err(FieldError::InvalidModulus { reason: "modulus must be monic".into() });
    }
    Ok(m)
}

/// Lexicographically first monic irreducible polynomial of degree `k` over
/// `F_p`, ordering candidates by their lower coefficient lists
/// `(c₀, …, c_{k−1})`.
fn find_modulus(p: u64, k: usize) -> Vec<u64> {
    let total = p.pow(k as u32);
    for rank in 0..total {
        let mut m = vec![0u64; k + 1];
        m[k] = 1;
        let mut r = rank;
        for i in (0..k).rev() {
            // rank is read with c₀ most significant, matching the element order
            m[k - 1 - i] = r / p.pow(i as u32);
            r %= p.pow(i as u32);
        }
        if is_irreducible(p, &m) {
            return m;
        }
    }
    unreachable!("irreducible polynomials of degree k exist over every F_p");
}

/// Trial division by every monic polynomial of degree `1..=k/2`.
fn is_irreducible(p: u64, m: &[u64]) -> bool {
    let k = m.len() - 1;
    debug_assert!(k >= 2 && m[k] == 1);
    for d in 1..=k / 2 {
        let count = p.pow(d as u32);
        for idx in 0..count {
            let mut g = vec![0u64; d + 1];
            g[d] = 1;
            let mut r = idx;
            for slot in g.iter_mut().take(d) {
                *slot = r % p;
                r /= p;
            }
            if poly_rem(m, &g, p).iter().all(|&c| c == 0) {
                return false;
            }
        }
    }
    true
}

/// Remainder of `num` divided by the monic `den`, coefficients mod `p`.
fn poly_rem(num: &[u64], den: &[u64], p: u64) -> Vec<u64> {
    let d = den.len() - 1;
    debug_assert_eq!(den[d], 1);
    let mut rem: Vec<u64> = num.to_vec();
    while rem.len() > d {
        let lead = rem[rem.len() - 1] % p;
        let shift = rem.len() - 1 - d;
        if lead != 0 {
            for i in 0..d {
                let sub = lead * den[i] % p;
                rem[shift + i] = (rem[shift + i] + p - sub) % p;
            }
        }
        rem.pop();
    }
    rem.iter_mut().for_each(|c| *c %= p);
    rem
}
