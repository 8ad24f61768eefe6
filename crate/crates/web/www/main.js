import init, { distribution, mgf_curve, convergence } from "./pkg/qmaj_web.js";

const BLUE = "#1f5fbf";
const ORANGE = "#e07b00";
const PAD = 40;

const $ = (id) => document.getElementById(id);

function frame(canvas, xs, ys) {
  const ctx = canvas.getContext("2d");
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  const xmin = Math.min(...xs), xmax = Math.max(...xs);
  const ymin = Math.min(0, ...ys), ymax = Math.max(...ys);
  const sx = (x) => PAD + ((x - xmin) / (xmax - xmin || 1)) * (canvas.width - 2 * PAD);
  const sy = (y) => canvas.height - PAD - ((y - ymin) / (ymax - ymin || 1)) * (canvas.height - 2 * PAD);
  ctx.strokeStyle = "#999";
  ctx.strokeRect(PAD, PAD, canvas.width - 2 * PAD, canvas.height - 2 * PAD);
  ctx.fillStyle = "#444";
  ctx.font = "12px sans-serif";
  ctx.fillText(xmin.toPrecision(3), PAD, canvas.height - PAD + 15);
  ctx.fillText(xmax.toPrecision(3), canvas.width - PAD - 30, canvas.height - PAD + 15);
  ctx.fillText(ymax.toPrecision(3), 2, PAD + 4);
  ctx.fillText(ymin.toPrecision(3), 2, canvas.height - PAD);
  return { ctx, sx, sy };
}

function line(g, xs, ys, color) {
  g.ctx.strokeStyle = color;
  g.ctx.beginPath();
  xs.forEach((x, i) => (i ? g.ctx.lineTo(g.sx(x), g.sy(ys[i])) : g.ctx.moveTo(g.sx(x), g.sy(ys[i]))));
  g.ctx.stroke();
}

function legend(g, entries) {
  entries.forEach(([text, color], i) => {
    g.ctx.fillStyle = color;
    g.ctx.fillText(text, PAD + 8, PAD + 16 + 14 * i);
  });
}

function normalDensity(x) {
  return Math.exp(-x * x / 2) / Math.sqrt(2 * Math.PI);
}

function plotDistribution() {
  const d = JSON.parse(distribution($("dist-family").value, Number($("dist-n").value)));
  const xs = d.points.map((p) => p.x);
  // mass times sigma is a density on the lattice of spacing 1/sigma
  const dens = d.points.map((p) => p.pmf * d.sigma);
  const grid = Array.from({ length: 200 }, (_, i) => xs[0] + ((xs[xs.length - 1] - xs[0]) * i) / 199);
  const g = frame($("dist-pmf"), xs, dens.concat(grid.map(normalDensity)));
  g.ctx.fillStyle = BLUE;
  xs.forEach((x, i) => g.ctx.fillRect(g.sx(x) - 1.5, g.sy(dens[i]), 3, g.sy(0) - g.sy(dens[i])));
  line(g, grid, grid.map(normalDensity), ORANGE);
  legend(g, [["sigma * P(xi = x)", BLUE], ["normal density", ORANGE]]);

  const c = frame($("dist-cdf"), xs, [0, 1]);
  c.ctx.strokeStyle = BLUE;
  c.ctx.beginPath();
  c.ctx.moveTo(c.sx(xs[0]), c.sy(0));
  d.points.forEach((p, i) => {
    c.ctx.lineTo(c.sx(p.x), c.sy(i ? d.points[i - 1].cdf : 0));
    c.ctx.lineTo(c.sx(p.x), c.sy(p.cdf));
  });
  c.ctx.stroke();
  line(c, xs, d.points.map((p) => p.phi), ORANGE);
  legend(c, [["empirical CDF", BLUE], ["Phi", ORANGE]]);

  $("dist-info").textContent =
    `type ${d.family}, n = ${d.n}: mean ${d.mean}, variance ${d.variance}, ` +
    `sigma ${d.sigma.toPrecision(8)}, KS distance ${d.ks.toPrecision(6)}`;
}

function plotMgf() {
  const m = JSON.parse(mgf_curve($("mgf-family").value, Number($("mgf-n").value), Number($("mgf-t").value), 120));
  const g = frame($("mgf"), m.t, m.mgf.concat(m.limit));
  line(g, m.t, m.mgf, BLUE);
  line(g, m.t, m.limit, ORANGE);
  legend(g, [[`M(t), n = ${m.n}`, BLUE], ["exp(t^2 / 2)", ORANGE]]);
}

function plotConvergence() {
  const c = JSON.parse(convergence($("conv-family").value, Number($("conv-n").value)));
  const logKs = c.ks.map(Math.log10);
  const g = frame($("conv"), c.n, logKs);
  line(g, c.n, logKs, BLUE);
  legend(g, [["log10 KS distance to the normal law", BLUE]]);
}

function guarded(fn) {
  return () => {
    $("err").textContent = "";
    try {
      fn();
    } catch (e) {
      $("err").textContent = String(e);
    }
  };
}

await init();
$("dist-go").onclick = guarded(plotDistribution);
$("mgf-go").onclick = guarded(plotMgf);
$("conv-go").onclick = guarded(plotConvergence);
guarded(plotDistribution)();
guarded(plotMgf)();
guarded(plotConvergence)();
