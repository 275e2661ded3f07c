import init, { transmission, polariton_curves, dipole_image, version } from "./pkg/cavelim_wasm.js";

const $ = (id) => document.getElementById(id);
const num = (id) => parseFloat($(id).value);

function showValues() {
  for (const input of document.querySelectorAll("input[type=range]")) {
    input.nextElementSibling.textContent = input.value;
  }
}

function axes(ctx, w, h, pad, xr, yr, xlabel) {
  ctx.clearRect(0, 0, w, h);
  ctx.strokeStyle = "#888";
  ctx.strokeRect(pad, 4, w - pad - 4, h - pad - 4);
  ctx.fillStyle = "#444";
  ctx.font = "11px sans-serif";
  ctx.fillText(xr[0].toFixed(1), pad, h - pad + 14);
  ctx.fillText(xr[1].toFixed(1), w - 28, h - pad + 14);
  ctx.fillText(xlabel, w / 2, h - 4);
  ctx.fillText(yr[1].toPrecision(2), 2, 14);
  ctx.fillText(yr[0].toPrecision(2), 2, h - pad);
  return {
    x: (v) => pad + ((v - xr[0]) / (xr[1] - xr[0])) * (w - pad - 4),
    y: (v) => 4 + (1 - (v - yr[0]) / (yr[1] - yr[0])) * (h - pad - 8),
  };
}

function line(ctx, map, xs, ys, color) {
  ctx.strokeStyle = color;
  ctx.lineWidth = 1.5;
  ctx.beginPath();
  xs.forEach((x, i) => (i ? ctx.lineTo(map.x(x), map.y(ys[i])) : ctx.moveTo(map.x(x), map.y(ys[i]))));
  ctx.stroke();
}

function drawSpectrum() {
  const canvas = $("spec");
  const ctx = canvas.getContext("2d");
  const [lo, hi, n] = [-6, 6, 601];
  const kappa = num("spec-kappa");
  const t = transmission(num("spec-g"), num("spec-mu"), kappa, 1.0, 0.1, lo, hi, n, $("spec-poles").checked);
  const xs = Array.from({ length: n }, (_, i) => lo + ((hi - lo) * i) / (n - 1));
  const top = Math.max(...t) * 1.05 || 1;
  const map = axes(ctx, canvas.width, canvas.height, 40, [lo, hi], [0, top], "ω_L");
  line(ctx, map, xs, Array.from(t), "#1f5fbf");
}

function drawPolaritons() {
  const n = 201;
  const gMax = 4;
  const rows = polariton_curves(num("pol-mu"), num("pol-kappa"), 1.0, gMax, n);
  const col = (k) => Array.from({ length: n }, (_, i) => rows[5 * i + k]);
  const g = col(0);
  const rates = $("pol-rates").getContext("2d");
  const rmax = Math.max(...col(1)) * 1.1;
  let map = axes(rates, 320, 260, 40, [0, gMax], [0, rmax], "g  (Γ+ red, Γ- blue)");
  line(rates, map, g, col(1), "#c0392b");
  line(rates, map, g, col(2), "#1f5fbf");
  const freqs = $("pol-freqs").getContext("2d");
  const fmax = Math.max(1, ...col(3).map(Math.abs), ...col(4).map(Math.abs)) * 1.1;
  map = axes(freqs, 320, 260, 40, [0, gMax], [-fmax, fmax], "g  (ω+ red, ω- blue)");
  line(freqs, map, g, col(3), "#c0392b");
  line(freqs, map, g, col(4), "#1f5fbf");
}

function color(v, lo, hi) {
  // blue for negative, red for positive
  const s = Math.max(-1, Math.min(1, v / Math.max(Math.abs(lo), Math.abs(hi))));
  const a = Math.round(255 * (1 - Math.abs(s)));
  return s >= 0 ? [255, a, a] : [a, a, 255];
}

function drawDipole() {
  const canvas = $("dip");
  const ctx = canvas.getContext("2d");
  const { width: w, height: h } = canvas;
  const dissipative = document.querySelector("input[name=dip-q]:checked").value === "f";
  const xiMax = 2 * Math.PI * num("dip-r");
  const img = dipole_image(w, h, xiMax, dissipative, true);
  const range = dissipative ? [-1, 1] : [-2, 2];
  const data = ctx.createImageData(w, h);
  for (let i = 0; i < w * h; i++) {
    const v = img[i];
    const [r, g, b] = Number.isNaN(v) ? [240, 240, 240] : color(v, range[0], range[1]);
    data.data.set([r, g, b, 255], 4 * i);
  }
  ctx.putImageData(data, 0, 0);
}

function guarded(f) {
  return () => {
    showValues();
    try {
      f();
      $("status").textContent = "";
    } catch (e) {
      $("status").textContent = String(e);
    }
  };
}

async function main() {
  await init();
  const spec = guarded(drawSpectrum);
  const pol = guarded(drawPolaritons);
  const dip = guarded(drawDipole);
  for (const id of ["spec-g", "spec-mu", "spec-kappa", "spec-poles"]) $(id).addEventListener("input", spec);
  for (const id of ["pol-mu", "pol-kappa"]) $(id).addEventListener("input", pol);
  for (const el of document.querySelectorAll("input[name=dip-q], #dip-r")) el.addEventListener("input", dip);
  spec();
  pol();
  dip();
  document.title = `cavelim ${version()} demo`;
}

main().catch((e) => ($("status").textContent = String(e)));
