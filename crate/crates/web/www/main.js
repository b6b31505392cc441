import init, { align, bounded_sweep, partition } from "./pkg/dtw_sketch_web.js";

const $ = (id) => document.getElementById(id);

function run(out, f) {
  try {
    f();
  } catch (e) {
    $(out).innerHTML = `<span class="error">${e.message ?? e}</span>`;
  }
}

function showAlign() {
  run("align-out", () => {
    const x = $("ax").value, y = $("ay").value;
    const r = JSON.parse(align(x, y, $("am").value));
    $("align-out").textContent = `dtw ${r.dtw}   dtw0 ${r.dtw0}   edit distance ${r.edit_distance}`;
    const n = x.trim().split(/[\s,]+/).length, m = y.trim().split(/[\s,]+/).length;
    const grid = $("grid");
    grid.style.gridTemplateColumns = `repeat(${m}, 14px)`;
    grid.innerHTML = "";
    const on = new Set(r.path.map(([i, j]) => `${i},${j}`));
    for (let i = 0; i < n; i++) {
      for (let j = 0; j < m; j++) {
        const cell = document.createElement("div");
        if (on.has(`${i},${j}`)) cell.className = "on";
        grid.appendChild(cell);
      }
    }
  });
}

function randomPair() {
  const size = 8, n = 64;
  const x = [];
  while (x.length < n) {
    const letter = Math.floor(Math.random() * size);
    const len = 1 + Math.floor(Math.random() * 6);
    for (let k = 0; k < len && x.length < n; k++) x.push(letter);
  }
  const y = x.slice();
  for (let k = 0; k < 4; k++) {
    const p = 1 + Math.floor(Math.random() * (n - 1));
    y[p] = y[p - 1];
    y[Math.floor(Math.random() * n)] = Math.floor(Math.random() * size);
  }
  $("sx").value = x.join(" ");
  $("sy").value = y.join(" ");
}

function showSweep() {
  run("sweep-out", () => {
    const r = JSON.parse(bounded_sweep($("sx").value, $("sy").value, $("sm").value, Number($("ss").value)));
    const rows = r.rows
      .map((row) => `<tr><td>${row.alpha}</td><td>${row.bits}</td><td>${row.outcome}</td><td>${row.ratio?.toFixed(2) ?? "-"}</td></tr>`)
      .join("");
    $("sweep-out").innerHTML =
      `<p>n = ${r.n}, exact dtw = ${r.dtw}, sending x verbatim costs ${r.verbatim_bits} bits</p>` +
      `<table><tr><th>α</th><th>bits</th><th>outcome</th><th>t / dtw</th></tr>${rows}</table>`;
  });
}

function showPartition() {
  run("part-out", () => {
    const r = JSON.parse(partition($("pm").value, Number($("pd").value), Number($("ps").value)));
    $("part-out").textContent = `${r.num_parts} parts, largest part diameter ${r.max_diameter}`;
    const strip = $("strip");
    strip.innerHTML = "";
    r.parts.forEach((part, point) => {
      const s = document.createElement("span");
      s.textContent = point;
      s.title = `part ${part}, representative ${r.representatives[point]}`;
      s.style.background = `hsl(${(part * 137.5) % 360} 55% 45%)`;
      strip.appendChild(s);
    });
  });
}

await init();
$("align").onclick = showAlign;
$("random").onclick = () => { randomPair(); showSweep(); };
$("sweep").onclick = showSweep;
$("part").onclick = showPartition;
$("reseed").onclick = () => { $("ps").value = Number($("ps").value) + 1; showPartition(); };
randomPair();
showAlign();
showSweep();
showPartition();
