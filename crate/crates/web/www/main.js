import init, { param_keys, default_params, spectra, photon_distribution, mean_photon_sweep } from "./pkg/polaron_lasing_web.js";

const $ = (id) => document.getElementById(id);
const status = (msg) => { $("status").textContent = msg; };

function readParams(keys) {
  return Float64Array.from(keys, (k) => Number($(`p-${k}`).value));
}

// series: [{ xs, ys, color }]; log axes take positive values only.
function plot(canvas, series, { logX = false, logY = false, bars = false } = {}) {
  const ctx = canvas.getContext("2d");
  const { width: w, height: h } = canvas;
  const pad = 48;
  ctx.clearRect(0, 0, w, h);
  const tx = (v) => (logX ? Math.log10(v) : v);
  const ty = (v) => (logY ? Math.log10(v) : v);
  const pts = series.flatMap((s) => s.xs.map((x, i) => [tx(x), ty(s.ys[i])])).filter(([x, y]) => isFinite(x) && isFinite(y));
  if (pts.length === 0) return;
  let [x0, x1] = [Math.min(...pts.map((p) => p[0])), Math.max(...pts.map((p) => p[0]))];
  let [y0, y1] = [Math.min(...pts.map((p) => p[1])), Math.max(...pts.map((p) => p[1]))];
  if (!logY) y0 = Math.min(0, y0);
  if (x1 === x0) x1 = x0 + 1;
  if (y1 === y0) y1 = y0 + 1;
  const px = (x) => pad + ((x - x0) / (x1 - x0)) * (w - 2 * pad);
  const py = (y) => h - pad + ((y0 - y) / (y1 - y0)) * (h - 2 * pad);

  ctx.strokeStyle = "#888";
  ctx.fillStyle = "#333";
  ctx.font = "12px sans-serif";
  ctx.strokeRect(pad, pad, w - 2 * pad, h - 2 * pad);
  const tick = (v, log) => (log ? `1e${v.toFixed(1)}` : v.toPrecision(3));
  ctx.fillText(tick(x0, logX), pad, h - pad + 16);
  ctx.fillText(tick(x1, logX), w - pad - 40, h - pad + 16);
  ctx.fillText(tick(y1, logY), 2, pad + 4);
  ctx.fillText(tick(y0, logY), 2, h - pad);

  for (const s of series) {
    ctx.strokeStyle = ctx.fillStyle = s.color;
    ctx.beginPath();
    s.xs.forEach((x, i) => {
      const [X, Y] = [tx(x), ty(s.ys[i])];
      if (!isFinite(X) || !isFinite(Y)) return;
      if (bars) ctx.fillRect(px(X), py(Y), Math.max(1, (w - 2 * pad) / s.xs.length), h - pad - py(Y));
      else i === 0 ? ctx.moveTo(px(X), py(Y)) : ctx.lineTo(px(X), py(Y));
    });
    if (!bars) ctx.stroke();
  }
}

function deinterleave(flat, stride) {
  const cols = Array.from({ length: stride }, () => []);
  flat.forEach((v, i) => cols[i % stride].push(v));
  return cols;
}

function guarded(fn) {
  return () => {
    status("");
    try { fn(); } catch (e) { status(e.message ?? String(e)); }
  };
}

async function main() {
  await init();
  const keys = param_keys();
  const defaults = default_params();
  const fields = $("params");
  keys.forEach((k, i) => {
    fields.insertAdjacentHTML("beforeend", `<label for="p-${k}">${k}</label><input id="p-${k}" type="number" step="any" value="${defaults[i]}">`);
    $("sweep-key").insertAdjacentHTML("beforeend", `<option${k === "kappa" ? " selected" : ""}>${k}</option>`);
  });

  $("run-spectra").onclick = guarded(() => {
    const flat = spectra(readParams(keys), Number($("w-min").value), Number($("w-max").value), 1200);
    const [w, sp, sd] = deinterleave(flat, 3);
    plot($("spectra"), [{ xs: w, ys: sp, color: "#1f5fbf" }, { xs: w, ys: sd, color: "#c0392b" }], { logY: true });
  });

  $("run-steady").onclick = guarded(() => {
    const steady = photon_distribution(readParams(keys));
    const rho = Array.from(steady.rho);
    $("steady-summary").textContent =
      `<n> = ${steady.mean_n.toPrecision(6)}   Fano = ${steady.fano.toPrecision(4)}   semiclassical = ${steady.semiclassical_n.toPrecision(6)}`;
    plot($("distribution"), [{ xs: rho.map((_, n) => n), ys: rho, color: "#2e7d32" }], { bars: true });
    steady.free();
  });

  $("run-sweep").onclick = guarded(() => {
    const flat = mean_photon_sweep(readParams(keys), $("sweep-key").value,
      Number($("s-min").value), Number($("s-max").value), Number($("s-points").value));
    const [x, n] = deinterleave(flat, 2);
    plot($("sweep"), [{ xs: x, ys: n.map((v) => Math.max(v, 1e-12)), color: "#6a1b9a" }], { logX: true, logY: true });
  });

  $("run-spectra").click();
  $("run-steady").click();
}

main().catch((e) => status(e.message ?? String(e)));
