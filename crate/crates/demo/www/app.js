import init, { colorGraph, partitionLevel, hashCensus } from "./pkg/detcolor_demo.js";

const $ = (id) => document.getElementById(id);
const out = $("out");
const canvas = $("view");
const ctx = canvas.getContext("2d");

function num(id) {
  return Number($(id).value);
}

function hue(i, k) {
  return `hsl(${Math.round((360 * i) / Math.max(k, 1)) % 360} 70% 50%)`;
}

function draw(n, edges, fill) {
  const w = canvas.width;
  const r = w / 2 - 14;
  const pos = Array.from({ length: n }, (_, i) => {
    const t = (2 * Math.PI * i) / n;
    return [w / 2 + r * Math.cos(t), w / 2 + r * Math.sin(t)];
  });
  ctx.clearRect(0, 0, w, w);
  ctx.strokeStyle = "rgba(0,0,0,0.08)";
  ctx.beginPath();
  for (const [u, v] of edges) {
    ctx.moveTo(...pos[u]);
    ctx.lineTo(...pos[v]);
  }
  ctx.stroke();
  const dot = n > 400 ? 2 : 4;
  pos.forEach(([x, y], i) => {
    ctx.fillStyle = fill(i);
    ctx.beginPath();
    ctx.arc(x, y, dot, 0, 2 * Math.PI);
    ctx.fill();
  });
}

function show(text) {
  out.classList.remove("err");
  out.textContent = text;
}

function fail(e) {
  out.classList.add("err");
  out.textContent = String(e);
}

function instanceArgs() {
  return [$("kind").value, num("n"), num("param")];
}

function color(regime) {
  try {
    const [kind, n, param] = instanceArgs();
    const res = JSON.parse(
      colorGraph(kind, n, param, $("variant").value, num("seed"), regime, num("bins"), num("threshold")),
    );
    const used = Math.max(...res.colors.map((c) => c ?? 0)) + 1;
    draw(res.n, res.edges, (i) => hue(res.colors[i], used));
    const s = res.stats;
    show(
      `valid: ${s.valid}\nrounds: ${s.rounds}\nby phase: ${JSON.stringify(s.rounds_by_phase)}\n` +
        `recursion depth: ${s.recursion_depth}\nmax machine words: ${s.max_machine_words}\n` +
        `global words: ${s.global_words}\n\n${JSON.stringify(s, null, 2)}`,
    );
  } catch (e) {
    fail(e);
  }
}

function partition() {
  try {
    const [kind, n, param] = instanceArgs();
    const res = JSON.parse(partitionLevel(kind, n, param, num("seed"), num("bins"), num("threshold")));
    draw(res.n, res.edges, (i) => (res.high[i] ? hue(res.bins[i] - 1, res.bin_count) : "#bbb"));
    show(
      `bins: ${res.bin_count} (grey nodes are below the threshold)\n` +
        `machines: ${res.machines}  good ${res.good}  bad ${res.bad}  inactive ${res.inactive}\n` +
        `selected seed cost: ${res.cost}\ncolor margin feasible: ${res.color_margin_ok}\n\n` +
        JSON.stringify(res.certificate, null, 2),
    );
  } catch (e) {
    fail(e);
  }
}

function census() {
  try {
    const res = JSON.parse(hashCensus(num("ha"), num("hb"), num("hc"), 32));
    const uniform = res.tuples.filter((t) => t.uniform).length;
    ctx.clearRect(0, 0, canvas.width, canvas.height);
    const dist = res.distribution;
    const top = Math.max(...dist);
    const bw = canvas.width / dist.length;
    ctx.fillStyle = "#4a7";
    dist.forEach((k, z) => {
      const h = ((canvas.height - 20) * k) / top;
      ctx.fillRect(z * bw + 1, canvas.height - h, bw - 2, h);
    });
    const rows = res.tails
      .map((t) => `  ${String(t.lambda).padStart(3)}  ${t.empirical.toFixed(5)}  ${t.bound.toPrecision(4)}`)
      .join("\n");
    show(
      `seed bits: ${res.seed_bits}\nuniform tuples: ${uniform}/${res.tuples.length}\n\n` +
        `hit-count distribution (bars), tails vs bound:\nlambda  empirical  bound\n${rows}`,
    );
  } catch (e) {
    fail(e);
  }
}

await init();
show("Ready.");
$("color-linear").onclick = () => color("linear");
$("color-low").onclick = () => color("low-space");
$("partition").onclick = partition;
$("census").onclick = census;
