import init, { booleanOps, outlierFences, plantedDebias } from "./pkg/conceptor_debias_demo.js";

const $ = (id) => document.getElementById(id);

function mulberry32(seed) {
  return () => {
    seed |= 0;
    seed = (seed + 0x6d2b79f5) | 0;
    let t = Math.imul(seed ^ (seed >>> 15), 1 | seed);
    t = (t + Math.imul(t ^ (t >>> 7), 61 | t)) ^ t;
    return ((t ^ (t >>> 14)) >>> 0) / 4294967296;
  };
}

function gaussian(rand) {
  const u = 1 - rand();
  return Math.sqrt(-2 * Math.log(u)) * Math.cos(2 * Math.PI * rand());
}

function cloud(rand, n, sx, sy, degrees) {
  const a = (degrees * Math.PI) / 180;
  const out = new Float64Array(2 * n);
  for (let i = 0; i < n; i++) {
    const x = sx * gaussian(rand), y = sy * gaussian(rand);
    out[2 * i] = Math.cos(a) * x - Math.sin(a) * y;
    out[2 * i + 1] = Math.sin(a) * x + Math.cos(a) * y;
  }
  return out;
}

const aperture = (id) => Math.pow(10, Number($(id).value));

const OPS = [
  ["A", "#1f77b4"],
  ["B", "#ff7f0e"],
  ["A ∧ B", "#2ca02c"],
  ["A ∨ B", "#d62728"],
  ["¬A", "#9467bd"],
];

function drawOps() {
  const alpha = aperture("ops-aperture");
  const angA = Number($("ops-angle-a").value), angB = Number($("ops-angle-b").value);
  $("ops-aperture-v").textContent = alpha.toFixed(2);
  $("ops-angle-a-v").textContent = angA + "°";
  $("ops-angle-b-v").textContent = angB + "°";

  const rand = mulberry32(1);
  const a = cloud(rand, 60, 1.6, 0.25, angA);
  const b = cloud(rand, 60, 1.2, 0.35, angB);
  const m = booleanOps(a, b, alpha);

  const cv = $("ops"), ctx = cv.getContext("2d");
  const scale = cv.width / 2.6, cx = cv.width / 2, cy = cv.height / 2;
  ctx.clearRect(0, 0, cv.width, cv.height);
  ctx.strokeStyle = "#eee";
  ctx.beginPath();
  ctx.arc(cx, cy, scale, 0, 2 * Math.PI);
  ctx.stroke();

  for (const [pts, color] of [[a, OPS[0][1]], [b, OPS[1][1]]]) {
    ctx.fillStyle = color + "55";
    for (let i = 0; i < pts.length; i += 2) {
      ctx.fillRect(cx + (pts[i] * scale) / 3 - 1.5, cy - (pts[i + 1] * scale) / 3 - 1.5, 3, 3);
    }
  }
  OPS.forEach(([, color], k) => {
    const [c00, c01, c10, c11] = m.slice(4 * k, 4 * k + 4);
    ctx.strokeStyle = color;
    ctx.lineWidth = 2;
    ctx.beginPath();
    for (let s = 0; s <= 128; s++) {
      const t = (s / 128) * 2 * Math.PI, ux = Math.cos(t), uy = Math.sin(t);
      const x = cx + (c00 * ux + c01 * uy) * scale, y = cy - (c10 * ux + c11 * uy) * scale;
      s === 0 ? ctx.moveTo(x, y) : ctx.lineTo(x, y);
    }
    ctx.stroke();
  });
  $("ops-legend").innerHTML = OPS.map(([n, c]) => `<div><span class="swatch" style="background:${c}"></span>${n}</div>`).join("");
}

function drawFences() {
  const p = Number($("fence-p").value);
  $("fence-p-v").textContent = p.toFixed(1);
  const rand = mulberry32(Number($("fence-seed").value));
  const pts = [];
  for (let i = 0; i < 120; i++) {
    const spread = rand() < 0.08 ? 5 : 1;
    pts.push(spread * gaussian(rand), 0.6 * spread * gaussian(rand));
  }
  const out = outlierFences(new Float64Array(pts), p);
  const [xl, xh, yl, yh] = out;

  let lim = 1;
  for (let i = 4; i < out.length; i += 3) lim = Math.max(lim, Math.abs(out[i]), Math.abs(out[i + 1]));
  const cv = $("fences"), ctx = cv.getContext("2d");
  const scale = (cv.width / 2 - 10) / lim, cx = cv.width / 2, cy = cv.height / 2;
  const clamp = (v) => Math.max(-lim * 1.2, Math.min(lim * 1.2, v));
  ctx.clearRect(0, 0, cv.width, cv.height);
  ctx.strokeStyle = "#888";
  ctx.setLineDash([4, 4]);
  ctx.strokeRect(cx + clamp(xl) * scale, cy - clamp(yh) * scale, (clamp(xh) - clamp(xl)) * scale, (clamp(yh) - clamp(yl)) * scale);
  ctx.setLineDash([]);
  let kept = 0;
  for (let i = 4; i < out.length; i += 3) {
    const ok = out[i + 2] === 1;
    kept += ok;
    ctx.fillStyle = ok ? "#1f77b4" : "#d62728";
    ctx.beginPath();
    ctx.arc(cx + out[i] * scale, cy - out[i + 1] * scale, ok ? 2.5 : 4, 0, 2 * Math.PI);
    ctx.fill();
  }
  $("fence-count").textContent = `kept ${kept} of ${(out.length - 4) / 3} words`;
}

function runPlanted() {
  const alpha = aperture("pb-aperture"), bias = Number($("pb-bias").value);
  $("pb-aperture-v").textContent = alpha.toFixed(2);
  $("pb-bias-v").textContent = bias.toFixed(1);
  const [d0, p0, d1, p1] = plantedDebias(alpha, bias, Number($("pb-seed").value) >>> 0);
  $("pb-d0").textContent = d0.toFixed(3);
  $("pb-p0").textContent = p0.toFixed(4);
  $("pb-d1").textContent = d1.toFixed(3);
  $("pb-p1").textContent = p1.toFixed(4);
}

function guard(f) {
  return () => {
    try {
      f();
      $("status").textContent = "";
    } catch (e) {
      $("status").textContent = String(e);
    }
  };
}

await init();
for (const id of ["ops-aperture", "ops-angle-a", "ops-angle-b"]) $(id).addEventListener("input", guard(drawOps));
for (const id of ["fence-p", "fence-seed"]) $(id).addEventListener("input", guard(drawFences));
for (const id of ["pb-aperture", "pb-bias"]) $(id).addEventListener("input", () => {
  $("pb-aperture-v").textContent = aperture("pb-aperture").toFixed(2);
  $("pb-bias-v").textContent = Number($("pb-bias").value).toFixed(1);
});
$("pb-run").addEventListener("click", guard(runPlanted));
guard(drawOps)();
guard(drawFences)();
guard(runPlanted)();
