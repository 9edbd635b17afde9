//! Spectra of spread graphs: a dense symmetric solver for single graphs and
//! a certified scheme-algebra path for whole families.
//!
//! The batch path never touches an `n × n` eigenproblem.  In an association
//! scheme the adjacency matrices satisfy `A_r A_s = Σ_k p^k_{rs} A_k`, so
//! left-multiplication by `A_r` acts on the Bose–Mesner algebra itself as
//! the `(D+1) × (D+1)` integer matrix `M_r = (p^k_{rs})_{k,s}` — and this
//! regular representation is faithful, so `A_r` and `M_r` have the same
//! eigenvalues.  The intersection numbers come from literal counting around
//! witness pairs (two independent witnesses per class must agree), a random
//! weighted combination `Σ_r w_r M_r` splits the joint eigenvectors, and
//! the eigenspace dimensions follow from the standard orthogonality
//! relation `m_j · Σ_r P_r(j)²/k_r = n`.
//!
//! Everything is then *certified* against exact integer data: each joint
//! eigenvector must satisfy `M_r v = P_r(j) v` for every relation, the
//! multiplicities must round to positive integers summing to `n`, and the
//! first two spectral moments must reproduce `tr A_r = 0` and `tr A_r² =
//! 2|E_r|` with the exact edge counts.  Any failure surfaces as
//! [`GraphError::Certification`] rather than silently wrong output, so
//! callers can fall back to the dense path.

use nalgebra::{DMatrix, DVector};

use serde::Serialize;

use super::{relation_count, GraphBuilder, GraphError, SpreadGraph};
use crate::ffield::FieldElement;
use crate::projective::PointClass;
use crate::seeded;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SpectrumMethod {
    /// Full `n × n` symmetric eigendecomposition.
    Dense,
    /// Eigenvalues of the scheme's regular representation, certified.
    Scheme,
}

/// Eigenvalue summary of one spread graph.
#[derive(Debug, Clone, Serialize)]
pub struct SpectrumReport {
    pub n: usize,
    /// All `n` adjacency eigenvalues, ascending.
    pub eigenvalues: Vec<f64>,
    /// The Perron value (equals the valency for a regular graph).
    pub valency: f64,
    /// Largest |λ| after removing one copy of the Perron value.
    pub second: f64,
    /// `second / √q`, the quantity whose growth law is at issue.
    pub ratio_to_sqrt_q: f64,
    /// Slack used when comparing eigenvalues against exact statements.
    pub tolerance: f64,
    pub method: SpectrumMethod,
}

fn assemble(q: u64, n: usize, eigenvalues: Vec<f64>, method: SpectrumMethod) -> SpectrumReport {
    debug_assert_eq!(eigenvalues.len(), n);
    let valency = *eigenvalues.last().unwrap();
    let second = if n >= 2 {
        eigenvalues[0].abs().max(eigenvalues[n - 2].abs())
    } else {
        0.0
    };
    SpectrumReport {
        n,
        eigenvalues,
        valency,
        second,
        ratio_to_sqrt_q: second / (q as f64).sqrt(),
        tolerance: 1e-8 * n as f64,
        method,
    }
}

/// Dense spectrum; fine up to a few thousand vertices.
pub fn spectrum(g: &SpreadGraph) -> SpectrumReport {
    let n = g.n();
    let mut a = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        for (w, &word) in g.adjacency().row(i).iter().enumerate() {
            let mut bits = word;
            while bits != 0 {
                let j = w * 64 + bits.trailing_zeros() as usize;
                bits &= bits - 1;
                a[(i, j)] = 1.0;
            }
        }
    }
    let mut eigenvalues: Vec<f64> = a.symmetric_eigenvalues().iter().copied().collect();
    eigenvalues.sort_by(f64::total_cmp);
    assemble(g.omega().field().q(), n, eigenvalues, SpectrumMethod::Dense)
}

/// Eigenvector residuals against the exact intersection matrices.
const RESIDUAL_TOL: f64 = 1e-8;
/// Largest allowed distance from a recovered multiplicity to an integer.
const INTEGRALITY_TOL: f64 = 1e-3;
/// Moment identities must be reproduced to `MOMENT_TOL · n · (1 + k_r)^ord`.
const MOMENT_TOL: f64 = 1e-8;

struct SchemeData {
    /// Number of non-identity relations, `(q+1)/2`.
    classes: usize,
    /// Relation of each `t`-encoding (`u8::MAX` off the square locus).
    class_of_t: Vec<u8>,
    /// Exact edge counts per relation.
    edges: Vec<u64>,
    /// Exact valencies per relation.
    valencies: Vec<u64>,
}

fn scheme_data(builder: &GraphBuilder) -> Result<SchemeData, GraphError> {
    let omega = builder.omega();
    if omega.class() != PointClass::Square {
        return Err(GraphError::NonUnitClass);
    }
    let f = &**omega.field();
    let q = f.q();
    let n = omega.len();
    let classes = relation_count(q);
    let mut class_of_t = vec![u8::MAX; q as usize];
    for r in 1..=classes {
        let t = super::relation_target(omega, r)?;
        class_of_t[f.encode_el(t) as usize] = (r - 1) as u8;
    }
    let table = builder.table();
    debug_assert_eq!(class_of_t[table.at(0, 0) as usize], 0, "the diagonal carries the R_1 value σ²");

    // Exact per-relation edge counts; regularity gives the valencies.
    let mut edges = vec![0u64; classes];
    for i in 0..n {
        let row = table.row(i);
        for &t in &row[i + 1..] {
            let c = class_of_t[t as usize];
            if c == u8::MAX {
                return Err(GraphError::Certification {
                    reason: "off-diagonal t-value outside every relation".into(),
                });
            }
            edges[c as usize] += 1;
        }
    }
    let mut valencies = vec![0u64; classes];
    for r in 0..classes {
        if !(2 * edges[r]).is_multiple_of(n as u64) || edges[r] == 0 {
            return Err(GraphError::Certification {
                reason: format!("relation R_{} is empty or cannot be regular", r + 1),
            });
        }
        valencies[r] = 2 * edges[r] / n as u64;
    }
    if valencies.iter().sum::<u64>() != (n - 1) as u64 {
        return Err(GraphError::Certification {
            reason: "relation valencies do not sum to n − 1".into(),
        });
    }
    Ok(SchemeData { classes, class_of_t, edges, valencies })
}

/// Intersection numbers `p^k_{rs}` counted around a witness pair of each
/// class (`k = 0` is the identity class, counted around a diagonal pair).
/// Returns a `(D+1)³` tensor indexed `[k][r][s]`.
fn intersection_tensor(builder: &GraphBuilder, data: &SchemeData) -> Result<Vec<u32>, GraphError> {
    let table = builder.table();
    let n = table.n();
    let d1 = data.classes + 1;
    let class_at = |i: usize, j: usize| -> usize {
        if i == j {
            0
        } else {
            data.class_of_t[table.at(i, j) as usize] as usize + 1
        }
    };
    // Two independent witness pairs per class; their counts must agree
    // exactly, which guards against a miscounted or non-constant tensor.
    let witnesses = |k: usize| -> [(usize, usize); 2] {
        if k == 0 {
            return [(0, 0), (n / 2, n / 2)];
        }
        let mut found = [(0, 0); 2];
        let mut got = 0;
        'rows: for i in 0..n {
            for j in 0..n {
                if j != i && class_at(i, j) == k && (got == 0 || (i, j) != found[0]) {
                    found[got] = (i, j);
                    got += 1;
                    if got == 2 {
                        break 'rows;
                    }
                }
            }
        }
        debug_assert_eq!(got, 2, "every relation has at least two ordered pairs");
        found
    };
    let count_around = |(x, y): (usize, usize)| -> Vec<u32> {
        let mut counts = vec![0u32; d1 * d1];
        for z in 0..n {
            counts[class_at(x, z) * d1 + class_at(z, y)] += 1;
        }
        counts
    };
    let mut tensor = vec![0u32; d1 * d1 * d1];
    for k in 0..d1 {
        let [w1, w2] = witnesses(k);
        let c1 = count_around(w1);
        if c1 != count_around(w2) {
            return Err(GraphError::Certification {
                reason: format!("intersection numbers differ between witnesses of class {k}"),
            });
        }
        tensor[k * d1 * d1..(k + 1) * d1 * d1].copy_from_slice(&c1);
    }
    Ok(tensor)
}

struct SchemeEigen {
    /// `p_matrix[j * (classes + 1) + r]` = eigenvalue of `A_r` on joint
    /// eigenspace `j` (`r = 0` is the identity, always 1).
    p_matrix: Vec<f64>,
    /// Dimension of each joint eigenspace, summing to `n`.
    mult: Vec<usize>,
}

/// Joint eigenvalues and multiplicities from the regular representation.
fn scheme_eigen(
    data: &SchemeData,
    tensor: &[u32],
    n: usize,
    attempt: u64,
) -> Result<SchemeEigen, GraphError> {
    let d1 = data.classes + 1;
    let certify = |reason: String| Err(GraphError::Certification { reason });
    // (M_r)_{k,s} = p^k_{rs}: the matrix of multiplication by A_r on the
    // basis {A_0, …, A_D} of the Bose–Mesner algebra.
    let m_r = |r: usize| -> DMatrix<f64> {
        DMatrix::from_fn(d1, d1, |k, s| tensor[(k * d1 + r) * d1 + s] as f64)
    };
    let matrices: Vec<DMatrix<f64>> = (1..d1).map(m_r).collect();

    let mut rng = seeded::chacha(0xE16E_BA51, attempt);
    let weights: Vec<f64> = (0..data.classes).map(|_| seeded::unit_f64(&mut rng)).collect();
    let mut b_w = DMatrix::<f64>::zeros(d1, d1);
    for (m, &w) in matrices.iter().zip(&weights) {
        b_w += m * w;
    }
    let scale: f64 = weights
        .iter()
        .zip(&data.valencies)
        .map(|(w, &k)| w.abs() * k as f64)
        .sum::<f64>()
        .max(1.0);

    let thetas = b_w.complex_eigenvalues();
    let mut spaces: Vec<f64> = Vec::with_capacity(d1);
    for theta in thetas.iter() {
        if theta.im.abs() > 1e-8 * scale {
            return certify(format!("complex scheme eigenvalue {theta}"));
        }
        spaces.push(theta.re);
    }
    spaces.sort_by(f64::total_cmp);

    // One joint eigenvector per distinct θ, via the null space of B_w − θI.
    let mut p_rows: Vec<Vec<f64>> = Vec::new();
    let mut last = f64::INFINITY;
    for &theta in &spaces {
        if (theta - last).abs() <= 1e-9 * scale {
            continue; // same eigenspace seen twice
        }
        last = theta;
        let shifted = &b_w - DMatrix::<f64>::identity(d1, d1) * theta;
        let svd = shifted.svd(false, true);
        let v_t = svd.v_t.as_ref().expect("requested V^T");
        let (min_idx, _) = svd
            .singular_values
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(b.1))
            .unwrap();
        let v = DVector::<f64>::from_iterator(d1, v_t.row(min_idx).iter().copied());

        // Rayleigh quotients against every M_r, each certified by its
        // residual: v must be a joint eigenvector of the whole algebra.
        let mut row = vec![0.0f64; d1];
        row[0] = 1.0;
        for (r, m) in matrices.iter().enumerate() {
            let mv = m * &v;
            let lambda = v.dot(&mv) / v.dot(&v);
            let residual = (&mv - &v * lambda).norm();
            if residual > RESIDUAL_TOL * (1.0 + data.valencies[r] as f64) {
                return certify(format!(
                    "candidate eigenvector at θ = {theta:.6} fails R_{}: residual {residual:.3e}",
                    r + 1
                ));
            }
            row[r + 1] = lambda;
        }
        p_rows.push(row);
    }

    // Distinct θ of a generic combination ↔ distinct eigenvalue tuples;
    // merge any duplicates that survived (they describe one eigenspace).
    let tuple_eq = |a: &[f64], b: &[f64]| {
        a.iter().zip(b).zip(&data.valencies).all(|((x, y), &k)| {
            (x - y).abs() <= 1e-6 * (1.0 + k as f64)
        })
    };
    let mut distinct: Vec<Vec<f64>> = Vec::new();
    for row in p_rows {
        if !distinct.iter().any(|seen| tuple_eq(&seen[1..], &row[1..])) {
            distinct.push(row);
        }
    }
    if distinct.len() != d1 {
        return certify(format!(
            "found {} joint eigenspaces, the scheme has {d1}",
            distinct.len()
        ));
    }

    // Orthogonality relation: m_j · Σ_r P_r(j)²/k_r = n  (k_0 = 1).
    let mut mult = vec![0usize; d1];
    let mut total = 0usize;
    for (j, row) in distinct.iter().enumerate() {
        let mut denom = row[0] * row[0];
        for r in 0..data.classes {
            denom += row[r + 1] * row[r + 1] / data.valencies[r] as f64;
        }
        let m_hat = n as f64 / denom;
        let rounded = m_hat.round();
        if (m_hat - rounded).abs() > INTEGRALITY_TOL || rounded < 1.0 {
            return certify(format!("multiplicity {m_hat:.6} at eigenspace {j} is not a positive integer"));
        }
        mult[j] = rounded as usize;
        total += mult[j];
    }
    if total != n {
        return certify(format!("multiplicities sum to {total}, expected {n}"));
    }

    // Exact moment identities close the certificate: tr A_r = 0 and
    // tr A_r² = 2|E_r| with the exactly counted |E_r|.
    for r in 0..data.classes {
        let k = 1.0 + data.valencies[r] as f64;
        let mut m1 = 0.0;
        let mut m2 = 0.0;
        for (j, row) in distinct.iter().enumerate() {
            let l = row[r + 1];
            m1 += mult[j] as f64 * l;
            m2 += mult[j] as f64 * l * l;
        }
        if m1.abs() > MOMENT_TOL * n as f64 * k {
            return certify(format!("trace of R_{} off by {m1:.3e}", r + 1));
        }
        if (m2 - 2.0 * data.edges[r] as f64).abs() > MOMENT_TOL * n as f64 * k * k {
            return certify(format!(
                "second moment of R_{} off by {:.3e}",
                r + 1,
                m2 - 2.0 * data.edges[r] as f64
            ));
        }
    }

    let p_matrix = distinct.into_iter().flatten().collect();
    Ok(SchemeEigen { p_matrix, mult })
}

/// Spectra of `P_q(γ)` for every requested γ from the association scheme's
/// character table, without any `n × n` eigenproblem.
///
/// Requires the unit-norm class (σ = 1), where the relations form the
/// scheme the method relies on.  γ values whose graph is empty (1 − γ a
/// non-square) yield an all-zero spectrum.  The eigenvalues, eigenvectors
/// of the regular representation, and multiplicities are all certified
/// against exact counts; any doubt is reported as
/// [`GraphError::Certification`] so the caller can fall back to
/// [`spectrum`].
pub fn scheme_spectra(
    builder: &GraphBuilder,
    gammas: &[FieldElement],
) -> Result<Vec<SpectrumReport>, GraphError> {
    let data = scheme_data(builder)?;
    let n = builder.table().n();
    let tensor = intersection_tensor(builder, &data)?;
    let mut eigen = None;
    let mut last_err = None;
    for attempt in 0..3 {
        match scheme_eigen(&data, &tensor, n, attempt) {
            Ok(e) => {
                eigen = Some(e);
                break;
            }
            Err(e @ GraphError::Certification { .. }) => last_err = Some(e),
            Err(e) => return Err(e),
        }
    }
    let Some(eigen) = eigen else {
        return Err(last_err.unwrap());
    };

    let omega = builder.omega();
    let q = omega.field().q();
    let d1 = data.classes + 1;
    let mut reports = Vec::with_capacity(gammas.len());
    for &gamma in gammas {
        let target = builder.target_of_gamma(gamma)? as usize;
        let class = data.class_of_t[target];
        let eigenvalues = if class == u8::MAX {
            // 1 − γ is a non-square: the graph has no edges at all.
            vec![0.0; n]
        } else {
            let r = class as usize + 1;
            let mut evs = Vec::with_capacity(n);
            for (j, &m) in eigen.mult.iter().enumerate() {
                evs.extend(std::iter::repeat_n(eigen.p_matrix[j * d1 + r], m));
            }
            evs.sort_by(f64::total_cmp);
            evs
        };
        reports.push(assemble(q, n, eigenvalues, SpectrumMethod::Scheme));
    }
    Ok(reports)
}
