//! Browser bindings for the Poincaré-graph toolkit.
//!
//! Every export returns a JSON **string**: on success the payload described
//! below, on failure `{"error": "<message>"}`.  Keeping the error channel
//! inside the JSON (instead of throwing through `JsValue`) gives the page a
//! single decoding path and lets the same functions run natively in tests.
//!
//! The inputs are capped so each call stays interactive (well under a second
//! of single-threaded work); the CLI is the tool for larger runs.

use std::collections::BTreeSet;
use std::sync::Arc;

use serde::Serialize;
use wasm_bindgen::prelude::*;

use poincare::census::theorem1_experiment;
use poincare::ffield::Field;
use poincare::pgraph::{
    active_gammas, build_poincare, scheme_spectra, spectrum, GraphBuilder, GraphError,
    SpectrumMethod,
};
use poincare::projective::{build_omega, classify_counts, ClassSelector, OmegaSet, PointClass};
use poincare::trig::BilinearForm;

/// Largest `q` the point-classification view accepts (the plane has
/// `q² + q + 1` points, so this stays around a million field evaluations).
const CLASSIFY_MAX_Q: u64 = 1024;
/// Below this vertex count the dense eigensolver is used unconditionally,
/// mirroring the CLI's policy.
const DENSE_LIMIT: usize = 512;
/// Largest vertex count allowed on the dense-eigensolver path.
const SPECTRUM_DENSE_MAX_N: usize = 1024;
/// Largest `q` allowed on the association-scheme eigensolver path.
const SPECTRUM_SCHEME_MAX_Q: u64 = 128;
/// Largest `q` for the census: keeps the sampled subset inside the range
/// where the quadratic pair-counting cross-check runs, without letting that
/// cross-check dominate the page.
const CENSUS_MAX_Q: u64 = 31;
const CENSUS_MAX_TRIALS: u32 = 50;

fn json_or_error(result: Result<String, String>) -> String {
    match result {
        Ok(payload) => payload,
        Err(message) => serde_json::json!({ "error": message }).to_string(),
    }
}

fn encode<T: Serialize>(view: &T) -> Result<String, String> {
    serde_json::to_string(view).map_err(|e| e.to_string())
}

/// Ω over `F_q` with the identity form and the paper's class selection.
fn paper_omega(q: u64) -> Result<Arc<OmegaSet>, String> {
    let field = Arc::new(Field::from_order(q).map_err(|e| e.to_string())?);
    let form = BilinearForm::identity(field);
    let omega = build_omega(form, ClassSelector::Paper).map_err(|e| e.to_string())?;
    Ok(Arc::new(omega))
}

fn class_name(class: PointClass) -> &'static str {
    match class {
        PointClass::Isotropic => "isotropic",
        PointClass::Square => "square",
        PointClass::NonSquare => "nonsquare",
    }
}

#[derive(Serialize)]
struct ClassificationView {
    q: u64,
    p: u64,
    k: usize,
    isotropic: usize,
    square: usize,
    nonsquare: usize,
    total: usize,
    omega_class: String,
    omega_size: usize,
    /// `q(q+1)/2`, which Ω must equal.
    expected_omega_size: u64,
}

fn omega_classification_impl(q: u64) -> Result<String, String> {
    if q > CLASSIFY_MAX_Q {
        return Err(format!(
            "q={q} exceeds the page limit of {CLASSIFY_MAX_Q} for classification"
        ));
    }
    let omega = paper_omega(q)?;
    let field = omega.field();
    let counts = classify_counts(omega.form());
    let view = ClassificationView {
        q: field.q(),
        p: field.p(),
        k: field.k(),
        isotropic: counts.isotropic,
        square: counts.square,
        nonsquare: counts.nonsquare,
        total: counts.total(),
        omega_class: class_name(omega.class()).to_string(),
        omega_size: omega.len(),
        expected_omega_size: field.q() * (field.q() + 1) / 2,
    };
    encode(&view)
}

/// Classifies the projective plane over `F_q` and reports Ω.
///
/// JSON payload: `q`, `p`, `k`, the three class counts, `total`,
/// `omega_class`, `omega_size`, and `expected_omega_size = q(q+1)/2`.
#[wasm_bindgen]
pub fn omega_classification(q: u32) -> String {
    json_or_error(omega_classification_impl(q as u64))
}

#[derive(Serialize)]
struct GammaEntry {
    /// Integer encoding accepted by the other calls.
    enc: u64,
    /// Human-readable polynomial form, e.g. `0`, `2`, `1+2x`.
    label: String,
    /// Whether the Poincaré graph at this γ has any edges.
    active: bool,
}

#[derive(Serialize)]
struct GammaCatalogView {
    q: u64,
    n: usize,
    active_count: usize,
    gammas: Vec<GammaEntry>,
}

fn gamma_catalog_impl(q: u64) -> Result<String, String> {
    if q > CLASSIFY_MAX_Q {
        return Err(format!(
            "q={q} exceeds the page limit of {CLASSIFY_MAX_Q} for the γ catalog"
        ));
    }
    let omega = paper_omega(q)?;
    let field = omega.field();
    let active: BTreeSet<u64> = active_gammas(&omega)
        .into_iter()
        .map(|g| field.index_of(g).map_err(|e| e.to_string()))
        .collect::<Result<_, _>>()?;
    let gammas = field
        .elements()
        .map(|el| {
            let enc = field.index_of(el).map_err(|e| e.to_string())?;
            Ok(GammaEntry {
                enc,
                label: el.to_string(),
                active: active.contains(&enc),
            })
        })
        .collect::<Result<Vec<_>, String>>()?;
    let view = GammaCatalogView {
        q: field.q(),
        n: omega.len(),
        active_count: active.len(),
        gammas,
    };
    encode(&view)
}

/// Lists every γ in `F_q` with its integer encoding, display label, and
/// whether the Poincaré graph at that γ has edges.  Meant for populating
/// the page's γ selector.
#[wasm_bindgen]
pub fn gamma_catalog(q: u32) -> String {
    json_or_error(gamma_catalog_impl(q as u64))
}

#[derive(Serialize)]
struct SpectrumView {
    q: u64,
    gamma: u64,
    gamma_label: String,
    n: usize,
    edges: u64,
    degree: Option<u64>,
    empty: bool,
    valency: f64,
    second: f64,
    sqrt_q: f64,
    ratio_to_sqrt_q: f64,
    method: &'static str,
    /// All `n` adjacency eigenvalues, ascending.
    eigenvalues: Vec<f64>,
}

fn poincare_spectrum_impl(q: u64, gamma_enc: u64) -> Result<String, String> {
    let omega = paper_omega(q)?;
    let field = omega.field().clone();
    let gamma = field.from_index(gamma_enc).map_err(|e| e.to_string())?;
    let n = omega.len();
    let scheme_route = n > DENSE_LIMIT && omega.class() == PointClass::Square;
    if scheme_route {
        if q > SPECTRUM_SCHEME_MAX_Q {
            return Err(format!(
                "q={q} exceeds the page limit of {SPECTRUM_SCHEME_MAX_Q} for scheme spectra"
            ));
        }
    } else if n > SPECTRUM_DENSE_MAX_N {
        return Err(format!(
            "q={q} needs a dense solve on {n} vertices; the page caps that at {SPECTRUM_DENSE_MAX_N}"
        ));
    }
    let graph = build_poincare(&omega, gamma).map_err(|e| e.to_string())?;
    let report = if scheme_route {
        let builder = GraphBuilder::new(omega.clone()).map_err(|e| e.to_string())?;
        match scheme_spectra(&builder, &[gamma]) {
            Ok(mut reports) => reports.pop().expect("one report per γ"),
            // The CLI falls back to the dense solver here; on the page that
            // could mean minutes of jank, so refuse instead.
            Err(GraphError::Certification { reason }) if n > SPECTRUM_DENSE_MAX_N => {
                return Err(format!(
                    "scheme certification failed ({reason}) and n={n} is too large for the dense fallback here"
                ));
            }
            Err(GraphError::Certification { .. }) => spectrum(&graph),
            Err(e) => return Err(e.to_string()),
        }
    } else {
        spectrum(&graph)
    };
    let view = SpectrumView {
        q: field.q(),
        gamma: gamma_enc,
        gamma_label: gamma.to_string(),
        n,
        edges: graph.edge_count(),
        degree: graph.is_regular(),
        empty: graph.edge_count() == 0,
        valency: report.valency,
        second: report.second,
        sqrt_q: (field.q() as f64).sqrt(),
        ratio_to_sqrt_q: report.ratio_to_sqrt_q,
        method: match report.method {
            SpectrumMethod::Dense => "dense",
            SpectrumMethod::Scheme => "scheme",
        },
        eigenvalues: report.eigenvalues,
    };
    encode(&view)
}

/// Builds `P_q(γ)` for the given γ encoding and returns its spectrum.
///
/// JSON payload: graph shape (`n`, `edges`, `degree`, `empty`), the spectral
/// summary (`valency`, `second`, `sqrt_q`, `ratio_to_sqrt_q`, `method`),
/// and the full ascending `eigenvalues` array for plotting.
#[wasm_bindgen]
pub fn poincare_spectrum(q: u32, gamma_enc: u32) -> String {
    json_or_error(poincare_spectrum_impl(q as u64, gamma_enc as u64))
}

#[derive(Serialize)]
struct TrialRow {
    trial: u32,
    f: u64,
    ratio: f64,
    deviation: f64,
    within_certificate: bool,
}

#[derive(Serialize)]
struct CensusView {
    q: u64,
    gamma: u64,
    gamma_label: String,
    n: usize,
    m: u64,
    exponent: f64,
    trials: u32,
    seed: u64,
    lambda2: f64,
    epsilon: f64,
    expected_num: u64,
    expected_den: u64,
    /// `d·m² / 2n` as a float, for plotting next to the observed counts.
    expected: f64,
    within_count: usize,
    all_within: bool,
    rows: Vec<TrialRow>,
}

fn spread_census_impl(
    q: u64,
    gamma_enc: u64,
    exponent: f64,
    trials: u32,
    seed: u64,
) -> Result<String, String> {
    if q > CENSUS_MAX_Q {
        return Err(format!(
            "q={q} exceeds the page limit of {CENSUS_MAX_Q} for the census"
        ));
    }
    if trials == 0 || trials > CENSUS_MAX_TRIALS {
        return Err(format!(
            "trials must be between 1 and {CENSUS_MAX_TRIALS}, got {trials}"
        ));
    }
    let omega = paper_omega(q)?;
    let field = omega.field().clone();
    let gamma = field.from_index(gamma_enc).map_err(|e| e.to_string())?;
    let reports =
        theorem1_experiment(&omega, gamma, exponent, trials, seed).map_err(|e| e.to_string())?;
    let first = reports.first().ok_or("experiment produced no trials")?;
    let rows: Vec<TrialRow> = reports
        .iter()
        .map(|r| TrialRow {
            trial: r.trial,
            f: r.f,
            ratio: r.ratio,
            deviation: r.deviation,
            within_certificate: r.within_certificate,
        })
        .collect();
    let within_count = rows.iter().filter(|r| r.within_certificate).count();
    let view = CensusView {
        q: field.q(),
        gamma: gamma_enc,
        gamma_label: gamma.to_string(),
        n: omega.len(),
        m: first.m,
        exponent,
        trials,
        seed,
        lambda2: first.lambda2,
        epsilon: first.epsilon,
        expected_num: first.expected_num,
        expected_den: first.expected_den,
        expected: first.expected_num as f64 / first.expected_den as f64,
        within_count,
        all_within: within_count == rows.len(),
        rows,
    };
    encode(&view)
}

/// Runs the seeded counting experiment: samples `m = ⌈q^exponent⌉`
/// directions per trial, counts γ-quadrance pairs inside the sample, and
/// checks each count against the mixing-lemma certificate.
///
/// JSON payload: run parameters, the certificate (`lambda2`, `epsilon`,
/// exact `expected_num/expected_den`), per-trial rows, and the
/// `within_count`/`all_within` verdict.
#[wasm_bindgen]
pub fn spread_census(q: u32, gamma_enc: u32, exponent: f64, trials: u32, seed: u32) -> String {
    json_or_error(spread_census_impl(
        q as u64,
        gamma_enc as u64,
        exponent,
        trials,
        seed as u64,
    ))
}
