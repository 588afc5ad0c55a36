import init, { scenarios, scenario, analyze, mutate } from "./pkg/tstack_demo.js";

const $ = (id) => document.getElementById(id);
const SVG = "http://www.w3.org/2000/svg";

function el(tag, attrs, text) {
  const n = document.createElementNS(SVG, tag);
  for (const [k, v] of Object.entries(attrs)) n.setAttribute(k, v);
  if (text !== undefined) n.textContent = text;
  return n;
}

function label(ev) {
  const out = ev.output === null ? "…" : ev.output === "unit" ? "" : `⟨${fmtOut(ev.output)}⟩`;
  const arg = ev.input === null ? "" : ev.input;
  return `${ev.eid}: ${ev.kind}(${arg})${out}`;
}

function fmtOut(o) {
  if (o === null) return "pending";
  if (typeof o === "string") return o;
  return o.value;
}

function draw(a) {
  const svg = $("timeline");
  svg.replaceChildren();
  const width = svg.clientWidth || 1000;
  const threads = Math.max(1, ...a.events.map((e) => e.thread + 1));
  const lane = 44, top = 20, left = 40, right = 20;
  svg.setAttribute("height", top + threads * lane + 10);
  const end = Math.max(a.end, 1) + 1;
  const x = (t) => left + (t / end) * (width - left - right);
  const y = (th) => top + th * lane;
  const order = new Map();
  (a.linearization?.sequence ?? []).forEach((e, i) => order.set(e, i + 1));

  for (let t = 0; t < threads; t++) {
    svg.append(el("text", { x: 4, y: y(t) + 18, "font-size": 12, fill: "#666" }, `t${t}`));
    svg.append(el("line", { x1: left, x2: width - right, y1: y(t) + 14, y2: y(t) + 14, stroke: "#eee" }));
  }
  const centre = new Map();
  for (const ev of a.events) {
    const x0 = x(ev.stime), x1 = x(ev.etime ?? end);
    const yy = y(ev.thread);
    const fill = ev.kind === "pop" || ev.kind === "deq" ? "#dbe7f7" : "#f3e6cf";
    svg.append(el("rect", {
      x: x0, y: yy + 4, width: Math.max(2, x1 - x0), height: 20, fill, stroke: "#999",
      "stroke-dasharray": ev.etime === null ? "4 3" : "none",
    }));
    if (ev.span) {
      svg.append(el("rect", { x: x(ev.span[0]), y: yy + 10, width: Math.max(2, x(ev.span[1]) - x(ev.span[0])), height: 8, fill: "#555" }));
    }
    const n = order.get(ev.eid);
    svg.append(el("text", { x: x0 + 3, y: yy + 36, "font-size": 11 }, label(ev) + (n ? `  #${n}` : "")));
    centre.set(ev.eid, [(x0 + x1) / 2, yy + 4]);
  }
  for (const [u, o] of a.relations.vis) {
    const [ux, uy] = centre.get(u), [ox, oy] = centre.get(o);
    const mid = Math.min(uy, oy) - 14;
    svg.append(el("path", { d: `M${ux},${uy} Q${(ux + ox) / 2},${mid} ${ox},${oy}`, fill: "none", stroke: "#c33", "stroke-width": 1.5 }));
  }
}

function table(rows, head) {
  const t = document.createElement("table");
  t.innerHTML = `<tr>${head.map((h) => `<th>${h}</th>`).join("")}</tr>` +
    rows.map((r) => `<tr>${r.map((c) => `<td>${c}</td>`).join("")}</tr>`).join("");
  return t;
}

function show(a) {
  const v = $("verdict");
  v.textContent = a.passed ? "PASS" : "FAIL";
  v.className = a.passed ? "pass" : "fail";
  const oracle = "refused" in a.oracle ? `oracle: ${a.oracle.refused}`
    : `oracle: ${a.oracle.linearizable ? "linearizable" : "not linearizable"} (${a.oracle.explored} states)`;
  $("summary").textContent = `${a.spec} history, ${a.events.length} events; ${oracle}`;
  draw(a);
  const d = $("details");
  d.replaceChildren();
  const h = (s) => { const n = document.createElement("h3"); n.textContent = s; return n; };
  d.append(h("Linearization"));
  const p = document.createElement("p");
  p.textContent = a.linearization
    ? a.linearization.sequence.map((e, i) => `${e}⟨${fmtOut(a.linearization.outputs[i])}⟩`).join("  ")
    : a.failure;
  d.append(p);
  d.append(h("Axioms and invariants"));
  d.append(table(a.reports.map((r) => [r.axiom, r.title, r.verdict, r.witnesses.map((w) => `(${w.join(",")})`).join(" ")]),
    ["id", "name", "verdict", "witnesses"]));
  d.append(h("Relations"));
  const fmt = (ps) => ps.map(([x, y]) => `${x}→${y}`).join(" ") || "none";
  d.append(table([
    ["visibility", fmt(a.relations.vis)],
    ["separation", fmt(a.relations.sep)],
    ["elimination", a.relations.elim ? fmt(a.relations.elim) : "n/a"],
    ["closure", a.relations.closure ? a.relations.closure.join(" ") : "n/a"],
  ], ["relation", "pairs"]));
}

function guarded(f) {
  return () => {
    $("error").textContent = "";
    try { f(); } catch (e) { $("error").textContent = e.message ?? String(e); }
  };
}

const check = guarded(() => show(JSON.parse(analyze($("history").value))));

await init();
for (const name of JSON.parse(scenarios())) {
  const o = document.createElement("option");
  o.textContent = name;
  $("scenario").append(o);
}
$("load").onclick = guarded(() => { $("history").value = scenario($("scenario").value); check(); });
$("analyze").onclick = check;
$("mutate").onclick = guarded(() => {
  $("history").value = mutate($("history").value, $("op").value, +$("a").value, +$("b").value);
  check();
});
$("load").click();
