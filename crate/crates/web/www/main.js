import init, { transfer, hopping, werner } from "./pkg/spinwire_web.js";

const COLORS = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd"];
const NAMES = ["concurrence", "purity", "werner p", "avg fidelity"];
const $ = (id) => document.getElementById(id);

function params() {
  return {
    nch: Number($("nch").value),
    j: Number(document.querySelector("input[name=sign]:checked").value),
    tmax: Number($("tmax").value),
    dt: Number($("dt").value),
  };
}

function guard(fn) {
  return () => {
    $("error").textContent = "";
    try {
      fn();
    } catch (e) {
      $("error").textContent = String(e.message || e);
    }
  };
}

function axes(ctx, w, h, pad, tmax) {
  ctx.clearRect(0, 0, w, h);
  ctx.strokeStyle = "#999";
  ctx.fillStyle = "#555";
  ctx.beginPath();
  ctx.moveTo(pad, 8);
  ctx.lineTo(pad, h - pad);
  ctx.lineTo(w - 8, h - pad);
  ctx.stroke();
  ctx.fillText("0", pad - 14, h - pad + 4);
  ctx.fillText("1", pad - 14, 12);
  ctx.fillText("t = " + tmax, w - 60, h - pad + 16);
}

function drawTransfer() {
  const p = params();
  const res = transfer(p.nch, p.j, p.tmax, p.dt);
  const t = res.times();
  const canvas = $("transfer");
  const ctx = canvas.getContext("2d");
  const pad = 30, w = canvas.width, h = canvas.height;
  axes(ctx, w, h, pad, p.tmax);
  const x = (v) => pad + (v / p.tmax) * (w - pad - 8);
  const y = (v) => h - pad - v * (h - pad - 8);
  for (let k = 0; k < res.channel_count(); k++) {
    const v = res.channel(k);
    ctx.strokeStyle = COLORS[k];
    ctx.beginPath();
    v.forEach((val, i) => (i ? ctx.lineTo(x(t[i]), y(val)) : ctx.moveTo(x(t[i]), y(val))));
    ctx.stroke();
  }
  res.free();
  $("transfer-legend").innerHTML = NAMES.map((n, k) => `<span style="color:${COLORS[k]}">${n}</span>`).join("");
}

function drawHopping() {
  const p = params();
  const res = hopping(p.nch, p.j, p.tmax, p.dt);
  const t = res.times(), labels = res.labels(), vals = res.values();
  const m = res.pair_count();
  res.free();
  const canvas = $("hopping");
  const ctx = canvas.getContext("2d");
  const left = 50, w = canvas.width - left, h = canvas.height;
  ctx.clearRect(0, 0, canvas.width, h);
  const rowH = h / m, colW = w / t.length;
  for (let i = 0; i < t.length; i++) {
    for (let k = 0; k < m; k++) {
      const c = vals[i * m + k];
      const shade = Math.round(255 * (1 - c));
      ctx.fillStyle = `rgb(${shade},${shade},255)`;
      ctx.fillRect(left + i * colW, k * rowH, Math.ceil(colW), Math.ceil(rowH));
    }
  }
  ctx.fillStyle = "#333";
  labels.forEach((l, k) => ctx.fillText(l, 4, k * rowH + rowH / 2 + 4));
}

function showWerner() {
  const p = Number($("p").value);
  const [c, purity, fav, fs] = werner(p);
  const rows = [["p", p], ["concurrence", c], ["purity", purity], ["average fidelity", fav], ["singlet fraction", fs]];
  $("werner").innerHTML = rows.map(([n, v]) => `<tr><td>${n}</td><td>${v.toFixed(4)}</td></tr>`).join("");
}

await init();
$("run-transfer").addEventListener("click", guard(drawTransfer));
$("run-hopping").addEventListener("click", guard(drawHopping));
$("p").addEventListener("input", guard(showWerner));
guard(showWerner)();
