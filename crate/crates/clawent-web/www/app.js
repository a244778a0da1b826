import init, { riemann_fan, evolve_frames, entropy_curve } from "./pkg/clawent_web.js";

const $ = (id) => document.getElementById(id);

const INK = "#1c2330";
const MUTED = "#66707f";
const GRID = "#eceff3";
const ACCENT = "#1565c0";
const SHOCK = "#c62828";
const RARE = "#2e7d32";
const WITNESS = "#ef6c00";

function plane(canvas, x0, x1, y0, y1, pad = 34) {
  const ctx = canvas.getContext("2d");
  const W = canvas.width;
  const H = canvas.height;
  const X = (x) => pad + ((x - x0) / (x1 - x0)) * (W - 2 * pad);
  const Y = (y) => H - pad - ((y - y0) / (y1 - y0)) * (H - 2 * pad);
  ctx.clearRect(0, 0, W, H);
  return { ctx, X, Y, W, H, pad, x0, x1, y0, y1 };
}

function ticks(a, b, n = 5) {
  const raw = (b - a) / n;
  const mag = Math.pow(10, Math.floor(Math.log10(raw)));
  const step = [1, 2, 2.5, 5, 10].map((s) => s * mag).find((s) => (b - a) / s <= n + 1);
  const out = [];
  for (let v = Math.ceil(a / step) * step; v <= b + 1e-12; v += step) out.push(+v.toFixed(12));
  return out;
}

function axes(p, xlabel, ylabel) {
  const { ctx, X, Y } = p;
  ctx.font = "11px ui-monospace, monospace";
  ctx.strokeStyle = GRID;
  ctx.fillStyle = MUTED;
  ctx.lineWidth = 1;
  for (const v of ticks(p.x0, p.x1)) {
    ctx.beginPath();
    ctx.moveTo(X(v), Y(p.y0));
    ctx.lineTo(X(v), Y(p.y1));
    ctx.stroke();
    ctx.textAlign = "center";
    ctx.fillText(String(v), X(v), p.H - p.pad + 14);
  }
  for (const v of ticks(p.y0, p.y1)) {
    ctx.beginPath();
    ctx.moveTo(X(p.x0), Y(v));
    ctx.lineTo(X(p.x1), Y(v));
    ctx.stroke();
    ctx.textAlign = "right";
    ctx.fillText(String(v), p.pad - 5, Y(v) + 4);
  }
  ctx.strokeStyle = MUTED;
  ctx.strokeRect(X(p.x0), Y(p.y1), X(p.x1) - X(p.x0), Y(p.y0) - Y(p.y1));
  ctx.fillStyle = INK;
  ctx.textAlign = "right";
  ctx.fillText(xlabel, p.W - 6, p.H - 6);
  ctx.textAlign = "left";
  ctx.fillText(ylabel, 4, 12);
}

function polyline(p, pts, color, width = 1.6, dash = []) {
  const { ctx, X, Y } = p;
  if (!pts.length) return;
  ctx.strokeStyle = color;
  ctx.lineWidth = width;
  ctx.setLineDash(dash);
  ctx.beginPath();
  ctx.moveTo(X(pts[0][0]), Y(pts[0][1]));
  for (const [x, y] of pts.slice(1)) ctx.lineTo(X(x), Y(y));
  ctx.stroke();
  ctx.setLineDash([]);
}

function stepPoints(profile, xmin, xmax) {
  const bx = profile.breakpoints;
  const vs = profile.values;
  const pts = [[xmin, 0]];
  if (bx.length >= 2) {
    pts.push([bx[0], 0]);
    for (let i = 0; i < vs.length; i++) {
      pts.push([bx[i], vs[i]], [bx[i + 1], vs[i]]);
    }
    pts.push([bx[bx.length - 1], 0]);
  }
  pts.push([xmax, 0]);
  return pts;
}

function fmt(x, d = 4) {
  return x == null ? "n/a" : (+x).toFixed(d);
}

/* Riemann section */

function drawFan(view) {
  const fvals = view.flux_curve.map(([, f]) => f);
  const fpad = 0.15 * (Math.max(...fvals) - Math.min(...fvals) || 1);
  const fp = plane(
    $("fan-flux-canvas"),
    -view.m_bound,
    view.m_bound,
    Math.min(...fvals) - fpad,
    Math.max(...fvals) + fpad
  );
  axes(fp, "u", "f(u)");
  polyline(fp, view.flux_curve, INK, 1.4);
  const f = (u) => {
    const c = view.flux_curve;
    let lo = 0;
    let hi = c.length - 1;
    while (hi - lo > 1) {
      const mid = (lo + hi) >> 1;
      if (c[mid][0] <= u) lo = mid;
      else hi = mid;
    }
    const [ua, fa] = c[lo];
    const [ub, fb] = c[hi];
    return ub === ua ? fa : fa + ((fb - fa) * (u - ua)) / (ub - ua);
  };
  for (const w of view.fan.waves) {
    const color = w.kind === "shock" ? SHOCK : RARE;
    polyline(fp, [[w.left, f(w.left)], [w.right, f(w.right)]], color, w.kind === "shock" ? 2 : 1);
  }
  for (const [u, label] of [[view.left, "uL"], [view.right, "uR"]]) {
    fp.ctx.fillStyle = ACCENT;
    fp.ctx.beginPath();
    fp.ctx.arc(fp.X(u), fp.Y(f(u)), 3.5, 0, 2 * Math.PI);
    fp.ctx.fill();
    fp.ctx.fillText(label, fp.X(u) + 6, fp.Y(f(u)) - 6);
  }

  const speeds = view.fan.waves.map((w) => w.speed);
  const span = Math.max(0.5, ...speeds.map(Math.abs)) * 1.25;
  const xt = plane($("fan-xt-canvas"), -span, span, 0, 1);
  axes(xt, "x", "t");
  for (const w of view.fan.waves) {
    const color = w.kind === "shock" ? SHOCK : RARE;
    polyline(xt, [[0, 0], [w.speed, 1]], color, w.kind === "shock" ? 2.2 : 1);
  }
  xt.ctx.fillStyle = MUTED;
  xt.ctx.textAlign = "left";
  xt.ctx.fillText(`uL = ${fmt(view.left, 2)}`, xt.pad + 6, xt.Y(0.06));
  xt.ctx.textAlign = "right";
  xt.ctx.fillText(`uR = ${fmt(view.right, 2)}`, xt.W - xt.pad - 6, xt.Y(0.06));

  const shocks = view.fan.waves.filter((w) => w.kind === "shock");
  const pieces = view.fan.waves.length - shocks.length;
  const lines = shocks
    .slice(0, 8)
    .map((w) => `shock ${fmt(w.left)} → ${fmt(w.right)}  speed ${fmt(w.speed)}`);
  if (shocks.length > 8) lines.push(`… ${shocks.length - 8} more shocks`);
  lines.push(`${pieces} rarefaction pieces (green), speeds nondecreasing: ${view.speeds_sorted}`);
  lines.push(
    view.admissibility_slack == null
      ? "no shocks, nothing to test for admissibility"
      : `worst admissibility slack: ${view.admissibility_slack.toExponential(2)} (≥ 0 is admissible)`
  );
  $("fan-info").textContent = lines.join("\n");
}

function refreshFan() {
  const left = +$("fan-left").value;
  const right = +$("fan-right").value;
  $("fan-left-val").textContent = fmt(left, 2);
  $("fan-right-val").textContent = fmt(right, 2);
  try {
    drawFan(JSON.parse(riemann_fan($("fan-flux").value, 1.0, left, right, 1e-3)));
  } catch (e) {
    $("fan-info").textContent = `error: ${e}`;
  }
}

/* Front-tracking section */

const PRESETS = {
  nwave: { breakpoints: [-0.6, 0.0, 0.6], values: [0.9, -0.9] },
  staircase: {
    breakpoints: [-0.8, -0.6, -0.4, -0.2, 0.0, 0.2, 0.4, 0.6, 0.8],
    values: [0.8, 0.55, 0.35, 0.2, 0.05, -0.25, -0.45, -0.7],
  },
  bumps: { breakpoints: [-0.9, -0.45, -0.15, 0.25, 0.7], values: [0.8, 0, -0.75, 0.45] },
  saw: {
    breakpoints: [-0.9, -0.75, -0.6, -0.45, -0.3, -0.15, 0, 0.15, 0.3, 0.45, 0.6, 0.75, 0.9],
    values: [0.3, 0.6, 0.9, -0.2, 0.3, 0.6, 0.9, -0.2, 0.3, 0.6, 0.9, -0.2],
  },
};
const EVO_T = 1.2;
const EVO_FRAMES = 60;
let evoData = null;

function drawFrame() {
  if (!evoData) return;
  const i = Math.min(+$("evo-time").value, evoData.frames.length - 1);
  const frame = evoData.frames[i];
  $("evo-time-val").textContent = fmt(frame.t, 2);
  const speedSpan = EVO_T * 1.1;
  const xmin = -1 - speedSpan;
  const xmax = 1 + speedSpan;
  const p = plane($("evo-canvas"), xmin, xmax, -1.15, 1.15);
  axes(p, "x", "u");
  polyline(p, stepPoints(evoData.frames[0].profile, xmin, xmax), "#b8c0cb", 1.2);
  polyline(p, stepPoints(frame.profile, xmin, xmax), ACCENT, 2);
  $("evo-info").textContent =
    `t = ${fmt(frame.t, 3)}   mass = ${fmt(frame.mass, 6)}   ` +
    `TV = ${fmt(frame.tv, 4)}   sup = ${fmt(frame.sup_norm, 4)}   ` +
    `fronts = ${frame.profile.breakpoints.length}`;
}

function refreshEvolution() {
  const datum = PRESETS[$("evo-preset").value];
  try {
    evoData = JSON.parse(
      evolve_frames($("evo-flux").value, 1.0, JSON.stringify(datum), EVO_T, EVO_FRAMES, 2e-3)
    );
    $("evo-time").max = String(evoData.frames.length - 1);
    drawFrame();
  } catch (e) {
    evoData = null;
    $("evo-info").textContent = `error: ${e}`;
  }
}

/* Entropy section */

const SCAN_RADII = {
  burgers: "0.10,0.08,0.06,0.05",
  cubic: "0.90,0.82,0.75,0.68",
  quartic: "0.40,0.30,0.22,0.16",
  mixed_quartic: "1.10,1.00,0.90,0.82",
};

function drawScan(report) {
  const series = [
    ["cover", (r) => r.cover_log2, ACCENT, []],
    ["packing", (r) => r.packing_log2, RARE, []],
    ["witness", (r) => r.witness_log2, WITNESS, [6, 4]],
    ["analytic upper", (r) => r.analytic_upper, MUTED, [2, 3]],
    ["analytic lower", (r) => r.analytic_lower, MUTED, [8, 3]],
  ];
  const xs = report.rows.map((r) => Math.log2(1 / r.eps));
  const ys = report.rows.flatMap((r) => series.map(([, pick]) => pick(r)).filter((v) => v != null));
  const p = plane(
    $("scan-canvas"),
    Math.min(...xs) - 0.15,
    Math.max(...xs) + 0.15,
    0,
    Math.max(...ys, 1) * 1.15
  );
  axes(p, "log2(1/eps)", "log2 count");
  for (const [label, pick, color, dash] of series) {
    const pts = report.rows
      .map((r) => [Math.log2(1 / r.eps), pick(r)])
      .filter(([, v]) => v != null);
    polyline(p, pts, color, 1.8, dash);
    for (const [x, y] of pts) {
      p.ctx.fillStyle = color;
      p.ctx.beginPath();
      p.ctx.arc(p.X(x), p.Y(y), 2.6, 0, 2 * Math.PI);
      p.ctx.fill();
    }
  }
  let ly = 20;
  for (const [label, , color, dash] of series) {
    p.ctx.strokeStyle = color;
    p.ctx.lineWidth = 2;
    p.ctx.setLineDash(dash);
    p.ctx.beginPath();
    p.ctx.moveTo(p.pad + 10, ly);
    p.ctx.lineTo(p.pad + 40, ly);
    p.ctx.stroke();
    p.ctx.setLineDash([]);
    p.ctx.fillStyle = INK;
    p.ctx.textAlign = "left";
    p.ctx.fillText(label, p.pad + 46, ly + 4);
    ly += 15;
  }
  const s = report.slopes;
  $("scan-info").textContent =
    `fitted log-log slopes   cover ${fmt(s.cover, 2)}   packing ${fmt(s.packing, 2)}   ` +
    `witness ${fmt(s.witness_realized, 2)}   analytic upper ${fmt(s.analytic_upper, 2)}   ` +
    `analytic lower ${fmt(s.analytic_lower, 2)}\n` +
    `${report.samples} samples, seed ${report.seed}, delta ${report.delta}, ` +
    `L = ${report.l_dom}, T = ${report.t_final}`;
}

async function runScan() {
  const btn = $("scan-run");
  btn.disabled = true;
  $("scan-info").textContent = "running…";
  await new Promise((r) => requestAnimationFrame(() => setTimeout(r, 0)));
  try {
    const flux = $("scan-flux").value;
    drawScan(JSON.parse(entropy_curve(flux, 1.0, 1.0, 0.5, SCAN_RADII[flux], 8, 11, 5e-3)));
  } catch (e) {
    $("scan-info").textContent = `error: ${e}`;
  } finally {
    btn.disabled = false;
  }
}

await init();
for (const id of ["fan-flux", "fan-left", "fan-right"]) $(id).addEventListener("input", refreshFan);
for (const id of ["evo-flux", "evo-preset"]) $(id).addEventListener("input", refreshEvolution);
$("evo-time").addEventListener("input", drawFrame);
$("scan-run").addEventListener("click", runScan);
refreshFan();
refreshEvolution();
