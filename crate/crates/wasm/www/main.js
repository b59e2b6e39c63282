import init, { channel_capacity, ulam_sweep, classify_simulated_triad } from "./pkg/tensor_te_wasm.js";

const $ = (id) => document.getElementById(id);
const num = (id) => Number($(id).value);

function show(id, f) {
  const out = $(id);
  out.classList.remove("err");
  out.textContent = "working...";
  // let the browser paint before the blocking call
  setTimeout(() => {
    try {
      out.textContent = f();
    } catch (e) {
      out.classList.add("err");
      out.textContent = String(e.message ?? e);
    }
  }, 10);
}

function plotSweep(points) {
  const c = $("sweep-plot");
  const g = c.getContext("2d");
  const pad = 30;
  const w = c.width - 2 * pad;
  const h = c.height - 2 * pad;
  const top = Math.max(1e-3, ...points.map((p) => Math.max(p.forward_bits, p.reverse_bits)));
  g.clearRect(0, 0, c.width, c.height);
  g.strokeStyle = "#999";
  g.strokeRect(pad, pad, w, h);
  g.fillStyle = "#444";
  g.fillText("0", pad - 12, pad + h);
  g.fillText(top.toFixed(3), 2, pad + 4);
  g.fillText("coupling", pad + w / 2 - 20, c.height - 8);
  const line = (key, dash) => {
    g.setLineDash(dash);
    g.strokeStyle = "#15c";
    g.beginPath();
    points.forEach((p, k) => {
      const x = pad + p.epsilon * w;
      const y = pad + h - (p[key] / top) * h;
      k ? g.lineTo(x, y) : g.moveTo(x, y);
    });
    g.stroke();
  };
  line("forward_bits", []);
  line("reverse_bits", [4, 4]);
  g.setLineDash([]);
}

function capacity() {
  const r = JSON.parse(channel_capacity($("matrix").value));
  const p = r.optimal_input.probs.map((v) => v.toFixed(4)).join(" ");
  return `capacity  ${r.capacity_bits.toFixed(6)} bits\ninput     ${p}\niterations ${r.iterations} (gap <= ${r.gap_bound.toExponential(2)})`;
}

function sweep() {
  const points = JSON.parse(
    ulam_sweep(num("sweep-maps"), num("sweep-n"), num("sweep-step"), num("sweep-tau"), BigInt(num("sweep-seed"))),
  );
  plotSweep(points);
  const rows = points.map(
    (p) =>
      `${p.epsilon.toFixed(2)}  ${p.forward_bits.toFixed(4)} (p=${p.forward_p.toFixed(2)}, tau=${p.forward_tau})  ${p.reverse_bits.toFixed(4)} (p=${p.reverse_p.toFixed(2)})`,
  );
  return ["eps   forward                  reverse", ...rows].join("\n");
}

function triad() {
  const r = JSON.parse(
    classify_simulated_triad($("triad-structure").value, num("triad-noise"), num("triad-n"), BigInt(num("triad-seed"))),
  );
  const v = r.analysis.verdict;
  const rel = r.analysis.relations.map(
    (x) => `  ${x.source}->${x.destination}  ${x.capacity_bound_bits.toFixed(4)} bits  p=${x.p_value.toFixed(3)}  tau=${x.tau_star}`,
  );
  const roles = Object.entries(v.ordered_roles).map(([k, n]) => `${k}=${n}`).join(" ");
  return [
    `truth:    ${r.truth.structure}`,
    `verdict:  ${v.classification} (${v.qualifier}) ${roles}`,
    "relations:",
    ...rel,
    ...v.notes.map((n) => `note: ${n}`),
  ].join("\n");
}

await init();
$("status").textContent = "Ready.";
$("capacity-run").onclick = () => show("capacity-out", capacity);
$("sweep-run").onclick = () => show("sweep-out", sweep);
$("triad-run").onclick = () => show("triad-out", triad);
