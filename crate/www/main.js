// Wiring for the three demo operations.  Everything returned by the wasm
// module is a JSON string; errors arrive as {"error": "..."} so decoding is
// one code path.  Build the module with
//   wasm-pack build crates/wasm --target web --out-dir ../../www/pkg
// and serve this directory over HTTP.

import init, {
  omega_classification,
  gamma_catalog,
  poincare_spectrum,
  spread_census,
} from "./pkg/poincare_wasm.js";

const $ = (id) => document.getElementById(id);

function decode(payload) {
  const value = JSON.parse(payload);
  if (value.error) throw new Error(value.error);
  return value;
}

function showError(container, err) {
  container.innerHTML = "";
  const p = document.createElement("p");
  p.className = "error";
  p.textContent = String(err.message || err);
  container.appendChild(p);
}

function table(rows) {
  const t = document.createElement("table");
  for (const [label, value] of rows) {
    const tr = t.insertRow();
    const th = document.createElement("th");
    th.textContent = label;
    tr.appendChild(th);
    const td = tr.insertCell();
    td.className = "num";
    if (value instanceof Node) td.appendChild(value);
    else td.textContent = String(value);
  }
  return t;
}

function verdict(ok, text) {
  const span = document.createElement("span");
  span.className = ok ? "verdict-ok" : "verdict-bad";
  span.textContent = text;
  return span;
}

const fmt = (x, digits = 4) => Number(x).toFixed(digits);

// Run an action on submit, disabling the button while it works.
function onSubmit(formId, action) {
  $(formId).addEventListener("submit", (event) => {
    event.preventDefault();
    const button = event.target.querySelector("button");
    button.disabled = true;
    // Let the disabled state paint before the (synchronous) wasm call.
    setTimeout(() => {
      try {
        action();
      } finally {
        button.disabled = false;
      }
    }, 10);
  });
}

// ---------------------------------------------------------------- section 1

function runClassification() {
  const out = $("out-classify");
  try {
    const v = decode(omega_classification(Number($("classify-q").value)));
    out.innerHTML = "";
    out.appendChild(
      table([
        ["field", `F_${v.q} = F_${v.p}^${v.k}`],
        ["isotropic points", v.isotropic],
        ["square-norm points", v.square],
        ["non-square-norm points", v.nonsquare],
        ["total (q²+q+1)", v.total],
        ["Ω class", v.omega_class],
        [
          "|Ω| vs q(q+1)/2",
          verdict(
            v.omega_size === v.expected_omega_size,
            `${v.omega_size} = ${v.expected_omega_size}`
          ),
        ],
      ])
    );
  } catch (err) {
    showError(out, err);
  }
}

// ---------------------------------------------------------------- γ selects

// Fill a <select> with every γ of F_q, marking the dead ones (empty graph).
function fillGammaSelect(select, q) {
  const v = decode(gamma_catalog(q));
  select.innerHTML = "";
  for (const g of v.gammas) {
    const option = document.createElement("option");
    option.value = g.enc;
    option.textContent = `γ = ${g.label}${g.active ? "" : "  (empty graph)"}`;
    select.appendChild(option);
  }
  return v;
}

function bindGammaSelect(qInputId, selectId) {
  const refresh = () => {
    try {
      fillGammaSelect($(selectId), Number($(qInputId).value));
    } catch {
      $(selectId).innerHTML = ""; // bad q: the run button will surface the error
    }
  };
  $(qInputId).addEventListener("change", refresh);
  refresh();
}

// ---------------------------------------------------------------- section 2

function drawSpectrum(canvas, v) {
  const ctx = canvas.getContext("2d");
  const W = canvas.width, H = canvas.height;
  const padL = 40, padR = 12, padT = 10, padB = 24;
  ctx.clearRect(0, 0, W, H);

  const lo = Math.min(...v.eigenvalues, -2 * v.sqrt_q);
  const hi = Math.max(...v.eigenvalues, v.valency, 2 * v.sqrt_q);
  const span = hi - lo || 1;
  const x = (t) => padL + ((t - lo) / span) * (W - padL - padR);

  // Bin the eigenvalues.
  const bins = 64;
  const counts = new Array(bins).fill(0);
  for (const ev of v.eigenvalues) {
    const b = Math.min(bins - 1, Math.floor(((ev - lo) / span) * bins));
    counts[b] += 1;
  }
  const peak = Math.max(...counts, 1);
  const y = (c) => H - padB - (c / peak) * (H - padT - padB);

  // ±2√q band.
  ctx.fillStyle = "rgba(36, 87, 168, 0.08)";
  ctx.fillRect(x(-2 * v.sqrt_q), padT, x(2 * v.sqrt_q) - x(-2 * v.sqrt_q), H - padT - padB);

  // Bars.
  ctx.fillStyle = "#2457a8";
  const barW = (W - padL - padR) / bins;
  counts.forEach((c, b) => {
    if (c > 0) ctx.fillRect(padL + b * barW, y(c), Math.max(1, barW - 1), H - padB - y(c));
  });

  // Markers: ±second (dashed red), valency (dashed green).
  const marker = (t, color) => {
    ctx.strokeStyle = color;
    ctx.setLineDash([4, 3]);
    ctx.beginPath();
    ctx.moveTo(x(t), padT);
    ctx.lineTo(x(t), H - padB);
    ctx.stroke();
    ctx.setLineDash([]);
  };
  if (v.second > 0) {
    marker(v.second, "#b03030");
    marker(-v.second, "#b03030");
  }
  marker(v.valency, "#1d7a3a");

  // Axis.
  ctx.strokeStyle = "#8a8f98";
  ctx.beginPath();
  ctx.moveTo(padL, H - padB);
  ctx.lineTo(W - padR, H - padB);
  ctx.stroke();
  ctx.fillStyle = "#5c6370";
  ctx.font = "12px ui-monospace, monospace";
  for (const t of [lo, 0, hi]) {
    ctx.fillText(fmt(t, 1), x(t) - 10, H - 8);
  }
}

function runSpectrum() {
  const out = $("out-spectrum");
  const canvas = $("chart-spectrum");
  try {
    const q = Number($("spectrum-q").value);
    const gamma = Number($("spectrum-gamma").value);
    const v = decode(poincare_spectrum(q, gamma));
    out.innerHTML = "";
    const rows = [
      ["graph", `P_${v.q}(${v.gamma_label}) on n = ${v.n} vertices`],
      ["edges", v.edges],
      ["degree", v.degree === null ? "irregular" : v.degree],
      ["method", v.method],
      ["valency λ₁", fmt(v.valency)],
      ["second |λ₂|", fmt(v.second)],
      ["√q", fmt(v.sqrt_q)],
      [
        "λ₂ / √q",
        verdict(v.ratio_to_sqrt_q <= 2 + 1e-9, fmt(v.ratio_to_sqrt_q)),
      ],
    ];
    if (v.empty) rows.splice(1, 0, ["note", "1 − γ is a non-square: no edges"]);
    out.appendChild(table(rows));
    canvas.hidden = false;
    drawSpectrum(canvas, v);
  } catch (err) {
    canvas.hidden = true;
    showError(out, err);
  }
}

// ---------------------------------------------------------------- section 3

function drawCensus(canvas, v) {
  const ctx = canvas.getContext("2d");
  const W = canvas.width, H = canvas.height;
  const padL = 48, padR = 12, padT = 10, padB = 24;
  ctx.clearRect(0, 0, W, H);

  const ratios = v.rows.map((r) => r.ratio).filter((r) => Number.isFinite(r));
  const lo = Math.min(1 - v.epsilon, ...ratios) - 0.05;
  const hi = Math.max(1 + v.epsilon, ...ratios) + 0.05;
  const y = (r) => padT + ((hi - r) / (hi - lo)) * (H - padT - padB);
  const x = (i) => padL + ((i + 0.5) / v.rows.length) * (W - padL - padR);

  // Certificate band 1 ± ε.
  ctx.fillStyle = "rgba(29, 122, 58, 0.10)";
  ctx.fillRect(padL, y(1 + v.epsilon), W - padL - padR, y(1 - v.epsilon) - y(1 + v.epsilon));
  ctx.strokeStyle = "#8a8f98";
  ctx.setLineDash([4, 3]);
  for (const level of [1 - v.epsilon, 1, 1 + v.epsilon]) {
    ctx.beginPath();
    ctx.moveTo(padL, y(level));
    ctx.lineTo(W - padR, y(level));
    ctx.stroke();
  }
  ctx.setLineDash([]);
  ctx.fillStyle = "#5c6370";
  ctx.font = "12px ui-monospace, monospace";
  ctx.fillText(fmt(1 + v.epsilon, 3), 4, y(1 + v.epsilon) + 4);
  ctx.fillText("1.000", 4, y(1) + 4);
  ctx.fillText(fmt(1 - v.epsilon, 3), 4, y(1 - v.epsilon) + 4);

  // Trial dots.
  for (const [i, r] of v.rows.entries()) {
    if (!Number.isFinite(r.ratio)) continue;
    ctx.fillStyle = r.within_certificate ? "#1d7a3a" : "#b03030";
    ctx.beginPath();
    ctx.arc(x(i), y(r.ratio), 4, 0, 2 * Math.PI);
    ctx.fill();
  }
}

function runCensus() {
  const out = $("out-census");
  const canvas = $("chart-census");
  try {
    const v = decode(
      spread_census(
        Number($("census-q").value),
        Number($("census-gamma").value),
        Number($("census-exponent").value),
        Number($("census-trials").value),
        Number($("census-seed").value)
      )
    );
    out.innerHTML = "";
    out.appendChild(
      table([
        ["run", `q = ${v.q}, γ = ${v.gamma_label}, m = ${v.m}, ${v.trials} trials, seed ${v.seed}`],
        ["expected pairs d·m²/2n", `${v.expected_num}/${v.expected_den} ≈ ${fmt(v.expected, 2)}`],
        ["λ₂", fmt(v.lambda2)],
        ["certificate ε", fmt(v.epsilon)],
        [
          "trials inside 1 ± ε",
          verdict(v.all_within, `${v.within_count} / ${v.rows.length}`),
        ],
      ])
    );
    canvas.hidden = false;
    drawCensus(canvas, v);
  } catch (err) {
    canvas.hidden = true;
    showError(out, err);
  }
}

// ---------------------------------------------------------------- bootstrap

init()
  .then(() => {
    $("status").textContent = "";
    $("status").hidden = true;
    for (const id of ["sec-classify", "sec-spectrum", "sec-census"]) {
      $(id).hidden = false;
    }
    bindGammaSelect("spectrum-q", "spectrum-gamma");
    bindGammaSelect("census-q", "census-gamma");
    onSubmit("form-classify", runClassification);
    onSubmit("form-spectrum", runSpectrum);
    onSubmit("form-census", runCensus);
    runClassification();
  })
  .catch((err) => {
    $("status").innerHTML = "";
    showError($("status"), err);
  });
