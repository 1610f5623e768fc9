import init, {
  two_state_summary,
  simulate_price_path,
  probup_surface,
} from "./pkg/lobdiff_web.js";

const $ = (id) => document.getElementById(id);
const TICK = 0.01; // dollars per tick

function params() {
  return {
    p: Number($("pc").value),
    q: Number($("pq").value),
    a1: Number($("a1").value) * TICK,
    a2: Number($("a2").value) * TICK,
    m1: Number($("m1").value),
    m2: Number($("m2").value),
    tau: Number($("tau").value),
    rate: Number($("rate").value),
    nJumps: Math.round(10 ** Number($("njumps").value)),
    seed: BigInt(Math.max(0, Math.round(Number($("seed").value)))),
  };
}

const fmt = (x, d = 5) =>
  Number.isFinite(x) ? x.toPrecision(d) : String(x);

function setupCanvas(canvas) {
  const dpr = window.devicePixelRatio || 1;
  const w = canvas.clientWidth || canvas.width;
  const h = canvas.height / (canvas.width / w);
  canvas.width = w * dpr;
  canvas.height = h * dpr;
  const ctx = canvas.getContext("2d");
  ctx.scale(dpr, dpr);
  return [ctx, w, h];
}

// ---- panel 1: coefficient explorer ------------------------------------

function renderSummary() {
  const { p, q, a1, a2, m1, m2, tau } = params();
  $("pc-v").textContent = p.toFixed(3);
  $("pq-v").textContent = q.toFixed(3);
  $("a1-v").textContent = (a1 / TICK).toFixed(1);
  $("a2-v").textContent = (a2 / TICK).toFixed(1);
  let s;
  try {
    s = two_state_summary(p, q, a1, a2, m1, m2, tau);
  } catch (e) {
    $("out-pi").textContent = String(e);
    return;
  }
  $("out-pi").textContent = `(${fmt(s[0])}, ${fmt(s[1])})`;
  $("out-astar").textContent = fmt(s[2]);
  $("out-s2").textContent = fmt(s[3]);
  $("out-mtau").textContent = fmt(s[4]);
  $("out-cb").textContent = fmt(s[5]);
  $("out-cu").textContent = fmt(s[6]);
  renderCurve();
}

function renderCurve() {
  const { p, q, a1, a2, m1, m2, tau } = params();
  const [ctx, W, H] = setupCanvas($("curve"));
  ctx.clearRect(0, 0, W, H);
  const N = 197;
  const xs = [];
  const ys = [];
  for (let i = 0; i <= N; i++) {
    const pi = (0.98 * i) / N;
    try {
      xs.push(pi);
      ys.push(two_state_summary(pi, q, a1, a2, m1, m2, tau)[3]);
    } catch { /* skip singular points */ }
  }
  const ymax = Math.max(...ys) * 1.05 || 1;
  const X = (v) => 40 + (v / 0.98) * (W - 55);
  const Y = (v) => H - 22 - (v / ymax) * (H - 34);
  ctx.strokeStyle = "#8884";
  ctx.strokeRect(40, 8, W - 55, H - 30);
  ctx.fillStyle = "#888";
  ctx.font = "11px system-ui";
  ctx.fillText("0", 38, H - 8);
  ctx.fillText("0.98", W - 32, H - 8);
  ctx.fillText(ymax.toPrecision(3), 2, 16);
  ctx.beginPath();
  xs.forEach((x, i) => (i ? ctx.lineTo(X(x), Y(ys[i])) : ctx.moveTo(X(x), Y(ys[i]))));
  ctx.strokeStyle = "#4a90d9";
  ctx.lineWidth = 1.6;
  ctx.stroke();
  try {
    const cur = two_state_summary(p, q, a1, a2, m1, m2, tau)[3];
    ctx.fillStyle = "#d9534f";
    ctx.beginPath();
    ctx.arc(X(p), Y(cur), 4, 0, 2 * Math.PI);
    ctx.fill();
  } catch { /* singular at the current point */ }
}

// ---- panel 2: path simulator -------------------------------------------

function renderPath() {
  const { p, q, a1, a2, m1, m2, tau, rate, nJumps, seed } = params();
  $("njumps-v").textContent = String(nJumps);
  const [ctx, W, H] = setupCanvas($("path"));
  ctx.clearRect(0, 0, W, H);
  let pts, s;
  try {
    pts = simulate_price_path(p, q, a1, a2, rate, nJumps, seed);
    s = two_state_summary(p, q, a1, a2, 1 / rate, 1 / rate, tau);
  } catch (e) {
    ctx.fillText(String(e), 10, 20);
    return;
  }
  const aStar = s[2], sigma = Math.sqrt(s[3]), mTau = s[4];
  const tMax = pts[pts.length - 2];
  let lo = 0, hi = 0;
  for (let i = 0; i < pts.length; i += 2) {
    lo = Math.min(lo, pts[i + 1]);
    hi = Math.max(hi, pts[i + 1]);
  }
  const envHi = (t) => (aStar * t) / mTau + 2 * sigma * Math.sqrt(t / mTau);
  const envLo = (t) => (aStar * t) / mTau - 2 * sigma * Math.sqrt(t / mTau);
  lo = Math.min(lo, envLo(tMax)) * 1.05 - 1e-9;
  hi = Math.max(hi, envHi(tMax)) * 1.05 + 1e-9;
  const X = (t) => 46 + (t / tMax) * (W - 60);
  const Y = (v) => 10 + ((hi - v) / (hi - lo)) * (H - 40);

  // envelope band
  ctx.beginPath();
  const STEPS = 160;
  for (let i = 0; i <= STEPS; i++) {
    const t = (tMax * i) / STEPS;
    i ? ctx.lineTo(X(t), Y(envHi(t))) : ctx.moveTo(X(t), Y(envHi(t)));
  }
  for (let i = STEPS; i >= 0; i--) {
    const t = (tMax * i) / STEPS;
    ctx.lineTo(X(t), Y(envLo(t)));
  }
  ctx.closePath();
  ctx.fillStyle = "rgba(74, 144, 217, 0.15)";
  ctx.fill();

  // drift
  ctx.beginPath();
  ctx.moveTo(X(0), Y(0));
  ctx.lineTo(X(tMax), Y((aStar * tMax) / mTau));
  ctx.strokeStyle = "rgba(74, 144, 217, 0.8)";
  ctx.setLineDash([5, 4]);
  ctx.stroke();
  ctx.setLineDash([]);

  // the path itself (step function)
  ctx.beginPath();
  ctx.moveTo(X(0), Y(0));
  let prev = 0;
  for (let i = 0; i < pts.length; i += 2) {
    ctx.lineTo(X(pts[i]), Y(prev));
    ctx.lineTo(X(pts[i]), Y(pts[i + 1]));
    prev = pts[i + 1];
  }
  ctx.strokeStyle = "#d9534f";
  ctx.lineWidth = 1.1;
  ctx.stroke();

  ctx.fillStyle = "#888";
  ctx.font = "11px system-ui";
  ctx.fillText(`t = 0 … ${tMax.toFixed(1)} s, ${nJumps} jumps`, 46, H - 8);
  ctx.fillText(hi.toPrecision(3), 2, 16);
  ctx.fillText(lo.toPrecision(3), 2, H - 28);
}

// ---- panel 3: probability surface ---------------------------------------

let surfaceCache = { max: 0, grid: null };

function renderSurface() {
  const max = Number($("gridmax").value);
  $("gridmax-v").textContent = `${max} × ${max}`;
  if (surfaceCache.max !== max) {
    surfaceCache = { max, grid: probup_surface(max, max) };
  }
  const grid = surfaceCache.grid;
  const [ctx, W, H] = setupCanvas($("surface"));
  ctx.clearRect(0, 0, W, H);
  const cw = (W - 70) / max;
  const ch = (H - 50) / max;
  for (let n = 1; n <= max; n++) {
    for (let p = 1; p <= max; p++) {
      const v = grid[(n - 1) * max + (p - 1)];
      // blue (down-likely) to red (up-likely)
      const r = Math.round(255 * v);
      const b = Math.round(255 * (1 - v));
      ctx.fillStyle = `rgb(${r}, ${Math.round(90 + 60 * (1 - Math.abs(v - 0.5) * 2))}, ${b})`;
      ctx.fillRect(50 + (p - 1) * cw, 10 + (max - n) * ch, cw + 0.5, ch + 0.5);
    }
  }
  ctx.fillStyle = "#888";
  ctx.font = "12px system-ui";
  ctx.fillText("ask queue p →", W / 2 - 30, H - 14);
  ctx.save();
  ctx.translate(14, H / 2 + 30);
  ctx.rotate(-Math.PI / 2);
  ctx.fillText("bid queue n →", 0, 0);
  ctx.restore();

  $("surface").onmousemove = (ev) => {
    const rect = ev.target.getBoundingClientRect();
    const x = ev.clientX - rect.left;
    const y = ev.clientY - rect.top;
    const p = Math.floor((x - 50) / cw) + 1;
    const n = max - Math.floor((y - 10) / ch);
    if (p >= 1 && p <= max && n >= 1 && n <= max) {
      const v = grid[(n - 1) * max + (p - 1)];
      $("surface-readout").textContent =
        `p_up(n = ${n}, p = ${p}) = ${v.toFixed(6)}`;
    }
  };
}

// ---- wiring ---------------------------------------------------------------

async function main() {
  await init();
  for (const id of ["pc", "pq", "a1", "a2", "m1", "m2", "tau"]) {
    $(id).addEventListener("input", () => { renderSummary(); renderPath(); });
  }
  for (const id of ["njumps", "rate", "seed"]) {
    $(id).addEventListener("input", renderPath);
  }
  $("reseed").addEventListener("click", () => {
    $("seed").value = String(Math.floor(Math.random() * 1e6));
    renderPath();
  });
  $("gridmax").addEventListener("input", renderSurface);
  renderSummary();
  renderPath();
  renderSurface();
}

main();
