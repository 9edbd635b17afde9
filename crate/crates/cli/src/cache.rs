//! Content-hash cache for graph and spectrum artifacts.
//!
//! Graphs are keyed by FNV-1a of the serialized Ω plus the γ encoding; a
//! spectrum is keyed by the hash of the graph artifact bytes it was
//! computed from.  Artifacts are self-describing text: a one-line JSON
//! header followed by one lowercase-hex adjacency row per vertex.  A file
//! that fails any validation — header mismatch, undecodable hex, bits that
//! do not re-render byte-identically, or a definitional spot-check of
//! three rows — is treated as corrupt: the caller warns and recomputes.

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use poincare::ffield::FieldElement;
use poincare::pgraph::{BitMatrix, GraphKind, SpreadGraph};
use poincare::projective::OmegaSet;

pub const FORMAT_VERSION: u32 = 1;

/// 64-bit FNV-1a.
pub fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut h = 0xcbf2_9ce4_8422_2325u64;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

pub fn graph_key(omega: &OmegaSet, gamma_enc: u64) -> u64 {
    let mut bytes = omega.to_json().to_string().into_bytes();
    bytes.push(0x1f);
    bytes.extend_from_slice(gamma_enc.to_string().as_bytes());
    fnv1a64(&bytes)
}

pub fn graph_path(dir: &Path, key: u64) -> PathBuf {
    dir.join(format!("graph-{key:016x}.txt"))
}

pub fn spectrum_path(dir: &Path, graph_hash: u64) -> PathBuf {
    dir.join(format!("spectrum-{graph_hash:016x}.json"))
}

/// The graph artifact: header line, then one hex row per vertex.  The
/// header's `config` is canonicalized to the `graph` command so the same
/// graph renders byte-identically no matter which command materialized it.
pub fn render_graph_artifact(config_line: &str, g: &SpreadGraph, gamma_enc: u64) -> String {
    let n = g.n();
    let mut out = String::with_capacity(n * (g.adjacency().words_per_row() * 16 + 1) + 256);
    out.push_str(&format!(
        "{{\"format_version\":{FORMAT_VERSION},\"config\":{config_line},\"q\":{},\"n\":{n},\"gamma\":{gamma_enc},\"edges\":{},\"degree\":{}}}\n",
        g.omega().field().q(),
        g.edge_count(),
        g.is_regular().map_or("null".to_string(), |d| d.to_string()),
    ));
    for i in 0..n {
        let mut bytes = Vec::with_capacity(g.adjacency().words_per_row() * 8);
        for w in g.adjacency().row(i) {
            bytes.extend_from_slice(&w.to_le_bytes());
        }
        out.push_str(&hex::encode(bytes));
        out.push('\n');
    }
    out
}

/// Parses and fully revalidates a stored graph artifact.  Any deviation is
/// an `Err` with a human-readable reason.
pub fn parse_graph_artifact(
    text: &str,
    omega: &Arc<OmegaSet>,
    gamma: FieldElement,
    gamma_enc: u64,
) -> Result<SpreadGraph, String> {
    let mut lines = text.lines();
    let header = lines.next().ok_or("empty file")?;
    let header_json: serde_json::Value =
        serde_json::from_str(header).map_err(|e| format!("header is not JSON: {e}"))?;
    let field = |k: &str| header_json.get(k).and_then(|v| v.as_u64());
    if field("format_version") != Some(FORMAT_VERSION as u64) {
        return Err("unknown format version".into());
    }
    let n = omega.len();
    if field("q") != Some(omega.field().q()) || field("n") != Some(n as u64) {
        return Err("header (q, n) does not match the requested Ω".into());
    }
    if field("gamma") != Some(gamma_enc) {
        return Err("header γ does not match the requested γ".into());
    }

    let mut adj = BitMatrix::new(n);
    let wpr = adj.words_per_row();
    let mut row_texts = Vec::with_capacity(n);
    for i in 0..n {
        let line = lines.next().ok_or_else(|| format!("missing row {i}"))?;
        let bytes = hex::decode(line).map_err(|e| format!("row {i}: bad hex: {e}"))?;
        if bytes.len() != wpr * 8 {
            return Err(format!("row {i}: {} bytes, expected {}", bytes.len(), wpr * 8));
        }
        for (w, chunk) in bytes.chunks_exact(8).enumerate() {
            let word = u64::from_le_bytes(chunk.try_into().unwrap());
            for b in 0..64 {
                if word >> b & 1 == 1 {
                    let j = w * 64 + b;
                    if j == i {
                        return Err(format!("row {i}: diagonal bit"));
                    }
                    if j >= n {
                        return Err(format!("row {i}: bit beyond column {n}"));
                    }
                    if j > i {
                        adj.set_pair(i, j);
                    }
                }
            }
        }
        row_texts.push(line);
    }
    if lines.next().is_some() {
        return Err("trailing data after the last row".into());
    }
    // Re-render: catches asymmetric bits exactly (a bit present only below
    // the diagonal, or absent above it, changes some row's bytes).
    for (i, original) in row_texts.iter().enumerate() {
        let mut bytes = Vec::with_capacity(wpr * 8);
        for w in adj.row(i) {
            bytes.extend_from_slice(&w.to_le_bytes());
        }
        if hex::encode(bytes) != *original {
            return Err(format!("row {i}: not symmetric under re-rendering"));
        }
    }
    let g = SpreadGraph::from_adjacency(omega.clone(), GraphKind::Poincare { gamma }, adj)
        .map_err(|e| format!("structural validation: {e}"))?;
    if Some(g.edge_count()) != field("edges") {
        return Err("header edge count disagrees with the bits".into());
    }
    // Definitional spot-check: three rows straight from the quadrance.
    let form = omega.form();
    for v in [0usize, n / 2, n - 1] {
        for u in 0..n {
            let edge = u != v
                && form
                    .proj_quadrance(omega.point(v), omega.point(u))
                    .map_err(|e| e.to_string())?
                    == gamma;
            if edge != g.adjacent(v, u) {
                return Err(format!("row {v}: adjacency to {u} contradicts the definition"));
            }
        }
    }
    Ok(g)
}

pub enum CacheOutcome {
    Hit,
    Miss,
    Corrupt(String),
}

/// Loads the graph from the cache if an intact artifact exists, otherwise
/// builds it (and stores the artifact when a cache directory is given).
/// Returns the graph, its canonical artifact text, and what happened.
pub fn load_or_build_graph(
    cache_dir: Option<&Path>,
    omega: &Arc<OmegaSet>,
    gamma: FieldElement,
    gamma_enc: u64,
    canonical_config_line: &str,
    build: impl FnOnce() -> Result<SpreadGraph, poincare::pgraph::GraphError>,
) -> Result<(SpreadGraph, String, CacheOutcome), poincare::pgraph::GraphError> {
    let path = cache_dir.map(|d| graph_path(d, graph_key(omega, gamma_enc)));
    let mut outcome = CacheOutcome::Miss;
    if let Some(p) = &path {
        if let Ok(text) = fs::read_to_string(p) {
            match parse_graph_artifact(&text, omega, gamma, gamma_enc) {
                Ok(g) => return Ok((g, text, CacheOutcome::Hit)),
                Err(reason) => outcome = CacheOutcome::Corrupt(reason),
            }
        }
    }
    let g = build()?;
    let text = render_graph_artifact(canonical_config_line, &g, gamma_enc);
    if let Some(p) = &path {
        if let Some(parent) = p.parent() {
            let _ = fs::create_dir_all(parent);
        }
        let _ = fs::write(p, &text);
    }
    Ok((g, text, outcome))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fnv_matches_reference_vectors() {
        // published FNV-1a test vectors
        assert_eq!(fnv1a64(b""), 0xcbf29ce484222325);
        assert_eq!(fnv1a64(b"a"), 0xaf63dc4c8601ec8c);
        assert_eq!(fnv1a64(b"foobar"), 0x85944171f73967e8);
    }
}
