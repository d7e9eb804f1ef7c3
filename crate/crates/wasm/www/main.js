import init, { ruin_curve, k_iterates, dk3_bound } from "./pkg/ruin_wasm.js";

const POINTS = 200;
const COLORS = ["#999", "#6a9fd4", "#3f7fbf", "#2d5f99", "#1f4273", "#132a4d"];

const num = (form, name) => Number(form.querySelector(`[name=${name}]`).value);
const list = (form, name) =>
  Float64Array.from(form.querySelector(`[name=${name}]`).value.split(",").map(Number));

function plot(canvas, curves, uMax) {
  const ctx = canvas.getContext("2d");
  const { width: w, height: h } = canvas;
  const pad = 30;
  const top = Math.max(...curves.flatMap((c) => Array.from(c.values)), 1e-12);
  ctx.clearRect(0, 0, w, h);
  ctx.strokeStyle = "#444";
  ctx.strokeRect(pad, 5, w - pad - 5, h - pad - 5);
  ctx.fillStyle = "#444";
  ctx.fillText(top.toFixed(3), 2, 12);
  ctx.fillText("0", pad - 10, h - pad + 12);
  ctx.fillText(`u = ${uMax}`, w - 60, h - pad + 20);
  for (const { values, color, dash } of curves) {
    ctx.beginPath();
    ctx.setLineDash(dash ? [5, 4] : []);
    ctx.strokeStyle = color;
    values.forEach((v, i) => {
      const x = pad + (i / (values.length - 1)) * (w - pad - 5);
      const y = h - pad - (v / top) * (h - pad - 10);
      i ? ctx.lineTo(x, y) : ctx.moveTo(x, y);
    });
    ctx.stroke();
  }
  ctx.setLineDash([]);
}

function guard(form, action) {
  const err = form.querySelector(".err");
  form.querySelector("button").onclick = () => {
    err.textContent = "";
    try {
      action();
    } catch (e) {
      err.textContent = e.message ?? String(e);
    }
  };
}

await init();

const ruin = document.getElementById("ruin");
guard(ruin, () => {
  const uMax = num(ruin, "umax");
  const v = ruin_curve(num(ruin, "lambda"), num(ruin, "c"), list(ruin, "weights"), list(ruin, "rates"), uMax, POINTS);
  plot(ruin.querySelector("canvas"), [{ values: v, color: "#1f4273" }], uMax);
});

const iter = document.getElementById("iter");
guard(iter, () => {
  const n = num(iter, "n");
  const uMax = 6;
  const v = k_iterates(num(iter, "lambda"), num(iter, "c"), num(iter, "rate"), num(iter, "d"), num(iter, "k0"), n, uMax, POINTS);
  const curves = [];
  for (let i = 0; i <= n; i++) {
    curves.push({ values: v.subarray(i * POINTS, (i + 1) * POINTS), color: COLORS[Math.min(i, COLORS.length - 1)] });
  }
  curves.push({ values: v.subarray((n + 1) * POINTS), color: "#c33", dash: true });
  plot(iter.querySelector("canvas"), curves, uMax);
});

const bound = document.getElementById("bound");
guard(bound, () => {
  const v = dk3_bound(
    num(bound, "lambda"), num(bound, "c"), num(bound, "rate"), num(bound, "d"),
    list(bound, "weights"), list(bound, "rates"), num(bound, "dt"),
  );
  const names = ["bound", "oscillation law", "diffusion", "claim law", "claim mean", "intensity"];
  bound.querySelector("table").innerHTML = names
    .map((n, i) => `<tr><th>${n}</th><td>${v[i].toFixed(6)}</td></tr>`)
    .join("");
});

for (const f of [ruin, iter, bound]) f.querySelector("button").click();
