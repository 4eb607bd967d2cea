// Plain-JS driver for the demo page. Expects the wasm-bindgen bundle in
// ../pkg (see the repository README for the build command).
import init, {
  builtin_problem,
  policy_heatmap,
  value_curves,
  shaping_search,
} from "../pkg/survival_mdp_wasm.js";

const PALETTE = ["#2b6cb0", "#dd6b20", "#38a169", "#805ad5", "#d53f8c", "#718096"];

const $ = (id) => document.getElementById(id);
const status = (msg) => { $("status").textContent = msg || ""; };

function call(fn, ...args) {
  const out = JSON.parse(fn(...args));
  if (out.error) throw new Error(out.error);
  return out;
}

function currentProblem() {
  const budget = Number($("maxBudget").value);
  const horizon = Number($("maxHorizon").value);
  return call(builtin_problem, $("preset").value, budget, horizon);
}

function drawHeatmap(problem) {
  const maxBudget = Number($("maxBudget").value);
  const maxHorizon = Number($("maxHorizon").value);
  const grid = call(policy_heatmap, JSON.stringify(problem), maxBudget, maxHorizon);

  const canvas = $("heatmap");
  const ctx = canvas.getContext("2d");
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  const left = 45, bottom = 30;
  const w = (canvas.width - left) / grid.horizons.length;
  const h = (canvas.height - bottom) / grid.budgets.length;
  grid.cells.forEach((row, hi) => {
    row.forEach((action, bi) => {
      ctx.fillStyle = PALETTE[action % PALETTE.length];
      ctx.fillRect(
        left + hi * w,
        canvas.height - bottom - (bi + 1) * h,
        Math.ceil(w),
        Math.ceil(h),
      );
    });
  });
  ctx.fillStyle = "#222";
  ctx.font = "12px sans-serif";
  ctx.fillText("horizon →", canvas.width / 2, canvas.height - 8);
  ctx.save();
  ctx.translate(12, canvas.height / 2);
  ctx.rotate(-Math.PI / 2);
  ctx.fillText("starting budget →", 0, 0);
  ctx.restore();

  const legend = $("legend");
  legend.innerHTML = "";
  grid.action_labels.forEach((label, i) => {
    const tags = [];
    if (i === grid.risk_neutral_action) tags.push("best expected reward");
    if (i === grid.optimistic_action) tags.push("best optimistic reward");
    const span = document.createElement("span");
    const chip = document.createElement("i");
    chip.style.background = PALETTE[i % PALETTE.length];
    span.appendChild(chip);
    span.appendChild(
      document.createTextNode(label + (tags.length ? ` (${tags.join(", ")})` : "")),
    );
    legend.appendChild(span);
  });
}

function drawCurves(problem) {
  const maxBudget = Number($("maxBudget").value);
  const horizon = Number($("curveHorizon").value);
  const data = call(value_curves, JSON.stringify(problem), maxBudget, horizon);

  const canvas = $("curves");
  const ctx = canvas.getContext("2d");
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  const left = 45, bottom = 30, top = 10;
  const plotW = canvas.width - left - 10;
  const plotH = canvas.height - bottom - top;
  const n = data.budgets.length;
  const vMax = Math.max(...data.value, 1e-9);
  const x = (i) => left + (i / Math.max(1, n - 1)) * plotW;

  // per-budget first action as a strip along the bottom
  data.first_action.forEach((action, i) => {
    ctx.fillStyle = PALETTE[action % PALETTE.length];
    ctx.fillRect(x(i), canvas.height - bottom + 4, plotW / n + 1, 6);
  });

  const trace = (values, scale, color) => {
    ctx.strokeStyle = color;
    ctx.lineWidth = 2;
    ctx.beginPath();
    values.forEach((v, i) => {
      const y = top + plotH * (1 - v / scale);
      if (i === 0) ctx.moveTo(x(i), y); else ctx.lineTo(x(i), y);
    });
    ctx.stroke();
  };
  trace(data.value, vMax, "#2b6cb0");
  trace(data.survival, 1, "#38a169");

  ctx.fillStyle = "#222";
  ctx.font = "12px sans-serif";
  ctx.fillText("budget →", canvas.width / 2, canvas.height - 16);
  ctx.fillStyle = "#2b6cb0";
  ctx.fillText(`value (max ${vMax.toFixed(2)})`, left + 6, top + 14);
  ctx.fillStyle = "#38a169";
  ctx.fillText("survival probability", left + 6, top + 30);
}

function fillOutcomeSelect(problem) {
  const select = $("avoidOutcome");
  select.innerHTML = "";
  problem.outcomes.forEach((o) => {
    const opt = document.createElement("option");
    opt.value = o.label;
    opt.textContent = `${o.label} (reward ${o.reward})`;
    select.appendChild(opt);
  });
  // default to the worst outcome
  const worst = [...problem.outcomes].sort((a, b) => a.reward - b.reward)[0];
  if (worst) select.value = worst.label;
}

function runShaping(problem) {
  const report = call(
    shaping_search,
    JSON.stringify(problem),
    $("avoidOutcome").value,
    Number($("shapeT").value),
    Number($("shapeBudget").value),
  );
  $("shapeOut").textContent = JSON.stringify(report, null, 2);
}

function refresh() {
  try {
    status("");
    const problem = currentProblem();
    drawHeatmap(problem);
    drawCurves(problem);
    fillOutcomeSelect(problem);
  } catch (e) {
    status(e.message);
  }
}

await init();
$("run").addEventListener("click", refresh);
$("curveHorizon").addEventListener("change", refresh);
$("preset").addEventListener("change", refresh);
$("shapeRun").addEventListener("click", () => {
  try {
    status("");
    runShaping(currentProblem());
  } catch (e) {
    status(e.message);
  }
});
refresh();
