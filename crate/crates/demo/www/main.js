import init, { phaseProfile, numberPhase, fieldScaling } from "./pkg/holevo_limits_demo.js";

const fmt = (x) => (Math.abs(x) < 1e-12 ? "0" : Math.abs(x) >= 1e4 || (Math.abs(x) < 1e-3 && x !== 0) ? x.toExponential(3) : x.toFixed(4));

function inputs(section) {
  const v = {};
  for (const el of section.querySelectorAll("input, select")) {
    v[el.name] = el.type === "number" || el.type === "range" ? Number(el.value) : el.value;
  }
  return v;
}

function table(rows, header) {
  const head = header ? `<tr>${header.map((h) => `<th>${h}</th>`).join("")}</tr>` : "";
  return `<table>${head}${rows.map((r) => `<tr>${r.map((c) => `<td>${c}</td>`).join("")}</tr>`).join("")}</table>`;
}

// Plots each series as [xs, ys, color, bars?] on a shared box.
function plot(canvas, series, { logx = false, logy = false, xlabel = "", ylabel = "" } = {}) {
  const ctx = canvas.getContext("2d");
  const W = canvas.width, H = canvas.height, pad = 40;
  ctx.clearRect(0, 0, W, H);
  const tx = logx ? Math.log10 : (x) => x;
  const ty = logy ? Math.log10 : (y) => y;
  const xs = series.flatMap((s) => s[0].map(tx));
  const ys = series.flatMap((s) => s[1].map(ty));
  const x0 = Math.min(...xs), x1 = Math.max(...xs);
  const y0 = logy ? Math.min(...ys) : Math.min(0, ...ys), y1 = Math.max(...ys);
  const sx = (x) => pad + ((tx(x) - x0) / (x1 - x0 || 1)) * (W - 2 * pad);
  const sy = (y) => H - pad + ((ty(y) - y0) / (y1 - y0 || 1)) * (2 * pad - H);
  ctx.strokeStyle = "#888";
  ctx.strokeRect(pad, pad, W - 2 * pad, H - 2 * pad);
  ctx.fillStyle = "#444";
  ctx.font = "11px sans-serif";
  ctx.fillText(xlabel, W / 2, H - 8);
  ctx.fillText(ylabel, 4, pad - 8);
  ctx.fillText(fmt(logx ? 10 ** x0 : x0), pad, H - pad + 14);
  ctx.fillText(fmt(logx ? 10 ** x1 : x1), W - pad - 30, H - pad + 14);
  ctx.fillText(fmt(logy ? 10 ** y1 : y1), 2, pad + 4);
  for (const [sxs, sys, color, bars] of series) {
    ctx.strokeStyle = ctx.fillStyle = color;
    if (bars) {
      const w = Math.max(1, (W - 2 * pad) / sxs.length - 1);
      sxs.forEach((x, i) => ctx.fillRect(sx(x) - w / 2, sy(sys[i]), w, sy(0) - sy(sys[i])));
    } else {
      ctx.beginPath();
      sxs.forEach((x, i) => (i ? ctx.lineTo(sx(x), sy(sys[i])) : ctx.moveTo(sx(x), sy(sys[i]))));
      ctx.stroke();
    }
  }
}

function guarded(section, f) {
  const out = section.querySelector(".out");
  return () => {
    try {
      f(inputs(section), section.querySelector("canvas"), out);
    } catch (e) {
      out.innerHTML = `<p class="err">${e.message ?? e}</p>`;
    }
  };
}

function phase(v, canvas, out) {
  const r = JSON.parse(phaseProfile(v.kind, v.dim, v.alpha, v.mix, BigInt(v.seed), v.grid, v.estimator, v.sigma));
  const order = r.phases.map((_, i) => i).sort((a, b) => r.phases[a] - r.phases[b]);
  plot(canvas, [[order.map((i) => r.phases[i]), order.map((i) => r.density[i]), "#2a6"]], {
    xlabel: "outcome phase", ylabel: "density",
  });
  const rep = r.report;
  const chain = rep.bound_chain.map((l) => [
    l.name.replaceAll("<", "&lt;").replaceAll(">", "&gt;"), fmt(l.lhs), fmt(l.rhs),
    `<span class="${l.slack < -l.tolerance ? "bad" : ""}">${fmt(l.slack)}</span>`,
  ]);
  out.innerHTML =
    table([
      ["asymmetry", fmt(rep.asymmetry)], ["H(N)", fmt(rep.number_entropy)], ["⟨N⟩", fmt(rep.mean_number)],
      ["H(error)", fmt(rep.h_err)], ["error length", fmt(rep.error_length)],
      ["rmse", fmt(rep.rmse)], ["rmse bound from H(N)", fmt(r.rms_entropy_bound)], ["rmse bound from ⟨N⟩", fmt(r.rms_mean_bound)],
    ]) + table(chain, ["link", "lhs", "rhs", "slack"]);
}

function eur(v, canvas, out) {
  const r = JSON.parse(numberPhase(v.kind, v.dim, v.alpha, v.mix, BigInt(v.seed), v.grid));
  const g = r.phase_density.length;
  const phases = r.phase_density.map((_, k) => (2 * Math.PI * k) / g);
  const n = r.number.map((_, k) => k);
  // Number distribution on the left half, phase density on the right half.
  const scale = (2 * Math.PI) / Math.max(1, n.length);
  plot(canvas, [
    [n.map((k) => -2 * Math.PI + k * scale), r.number, "#36c", true],
    [phases, r.phase_density, "#c63"],
  ], { xlabel: "p(n) left, phase density right", ylabel: "" });
  out.innerHTML = table([
    ["H(N)", fmt(r.number_entropy)], ["H(Φ)", fmt(r.phase_entropy)], ["S(ρ)", fmt(r.state_entropy)],
    ["log2 2π + S(ρ)", fmt(r.bound)], ["slack", fmt(r.slack)], ["asymmetry", fmt(r.asymmetry)],
  ]);
}

function field(v, canvas, out) {
  const r = JSON.parse(fieldScaling(v.twoj, v.mmax, v.mu, v.t));
  const f = r.fit;
  plot(canvas, [
    [f.ms, f.volume_bounds, "#36c"],
    [f.ms, f.t_err_bounds, "#c63"],
  ], { logx: true, logy: true, xlabel: "M", ylabel: "volume (blue), time (orange)" });
  out.innerHTML = table([
    ["B_π", fmt(r.b_pi)], ["volume slope", fmt(f.volume_slope)], ["time slope", fmt(f.t_err_slope)],
    ["asymmetry at M max", fmt(f.asymmetries[f.asymmetries.length - 1])],
  ]);
}

await init();
for (const [id, f] of [["phase", phase], ["eur", eur], ["field", field]]) {
  const section = document.getElementById(id);
  const run = guarded(section, f);
  section.addEventListener("input", run);
  run();
}
