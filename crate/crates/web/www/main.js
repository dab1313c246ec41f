import init, { Demo } from "./pkg/surfhap_web.js";

const $ = (id) => document.getElementById(id);
const NX = 144, NY = 80, LO = -20, HI = 40;

let demo, ext, picks = [], lastPlan = null;

function color(db) {
  if (!Number.isFinite(db)) return [0, 0, 0];
  const t = Math.min(1, Math.max(0, (db - LO) / (HI - LO)));
  // dark blue through teal to yellow
  const r = Math.round(255 * Math.min(1, Math.max(0, 1.6 * t - 0.5)));
  const g = Math.round(255 * Math.min(1, 0.15 + 0.95 * t));
  const b = Math.round(255 * Math.max(0, 0.55 - 0.6 * t + 0.3 * Math.sin(Math.PI * t)));
  return [r, g, b];
}

function toCanvas(x, y, c) {
  return [((x - ext.x0) / (ext.x1 - ext.x0)) * c.width, ((y - ext.y0) / (ext.y1 - ext.y0)) * c.height];
}

function toPlate(px, py, c) {
  return [ext.x0 + (px / c.width) * (ext.x1 - ext.x0), ext.y0 + (py / c.height) * (ext.y1 - ext.y0)];
}

function drawField() {
  const c = $("field"), ctx = c.getContext("2d");
  const freq = +$("freq").value, drive = +$("drive").value;
  $("freqv").textContent = freq;
  $("drivev").textContent = drive;
  const levels = demo.sensation_field($("act").value, freq, drive, NX, NY);
  const img = ctx.createImageData(NX, NY);
  levels.forEach((db, i) => {
    const [r, g, b] = color(db);
    img.data.set([r, g, b, 255], 4 * i);
  });
  const off = new OffscreenCanvas(NX, NY);
  off.getContext("2d").putImageData(img, 0, 0);
  ctx.imageSmoothingEnabled = true;
  ctx.drawImage(off, 0, 0, c.width, c.height);

  ctx.fillStyle = "rgba(255,255,255,0.6)";
  for (let r = 0; r < ext.rows; r++) {
    for (let k = 0; k < ext.cols; k++) {
      const [x, y] = toCanvas(ext.x0 + k * ext.spacing, ext.y0 + r * ext.spacing, c);
      ctx.fillRect(x - 1.5, y - 1.5, 3, 3);
    }
  }
  picks.forEach(([x, y], i) => {
    const [cx, cy] = toCanvas(x, y, c);
    ctx.beginPath();
    ctx.arc(cx, cy, 7, 0, 2 * Math.PI);
    ctx.strokeStyle = i === 0 ? "#fff" : "#f33";
    ctx.lineWidth = 3;
    ctx.stroke();
  });
  $("legend").textContent = `colour: ${LO} dB (dark) to ${HI} dB (yellow) above detection threshold`;
}

function drawWave(canvas, preview, opts = {}) {
  const ctx = canvas.getContext("2d");
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  if (!preview || !preview.length) return;
  const peak = Math.max(1e-9, ...preview.map(([a, b]) => Math.max(Math.abs(a), Math.abs(b))));
  const mid = canvas.height / 2, s = (mid - 6) / peak;
  ctx.strokeStyle = "#ccc";
  ctx.beginPath();
  ctx.moveTo(0, mid);
  ctx.lineTo(canvas.width, mid);
  ctx.stroke();
  ctx.strokeStyle = opts.color || "#246";
  ctx.beginPath();
  preview.forEach(([lo, hi], i) => {
    const x = (i / preview.length) * canvas.width;
    ctx.moveTo(x, mid - hi * s);
    ctx.lineTo(x, mid - lo * s + 0.5);
  });
  ctx.stroke();
  if (opts.marks) {
    ctx.fillStyle = "#c33";
    opts.marks.forEach((t) => ctx.fillRect((t / opts.duration) * canvas.width - 1, 0, 2, 8));
  }
}

function showError(el, msg) {
  el.innerHTML = "";
  const span = document.createElement("span");
  span.className = "err";
  span.textContent = msg;
  el.appendChild(span);
}

function runFlow() {
  const [[fx, fy], [tx, ty]] = picks;
  const res = JSON.parse(demo.flow(fx, fy, tx, ty, +$("drive").value));
  if (res.error) {
    lastPlan = null;
    $("play").disabled = true;
    showError($("flowout"), res.error);
    drawWave($("flowwave"), []);
    return;
  }
  lastPlan = res.plan;
  $("play").disabled = false;
  const p = res.plan;
  $("flowout").textContent = p.parts
    .map((part, i) => `part ${i + 1}  ${part.actuator.padEnd(4)} ${part.freq_hz} Hz  ${part.amplitude_v.toFixed(1)} Vp  ${p.sensation_db[i].toFixed(1)} dB`)
    .join("\n") + `\nfrom (${fx.toFixed(0)}, ${fy.toFixed(0)}) mm to (${tx.toFixed(0)}, ${ty.toFixed(0)}) mm`;
  drawWave($("flowwave"), res.preview);
}

function playPlan() {
  if (!lastPlan) return;
  const ac = new AudioContext();
  let t = ac.currentTime + 0.05;
  const peak = Math.max(...lastPlan.parts.map((p) => p.amplitude_v));
  for (const part of lastPlan.parts) {
    const osc = ac.createOscillator(), gain = ac.createGain();
    osc.frequency.value = part.freq_hz;
    const a = 0.3 * part.amplitude_v / peak;
    gain.gain.setValueAtTime(0, t);
    gain.gain.linearRampToValueAtTime(a, t + part.ramp_s);
    gain.gain.setValueAtTime(a, t + part.duration_s - part.ramp_s);
    gain.gain.linearRampToValueAtTime(0, t + part.duration_s);
    osc.connect(gain).connect(ac.destination);
    osc.start(t);
    osc.stop(t + part.duration_s);
    t += part.duration_s;
  }
}

function runKnob() {
  const res = JSON.parse(
    demo.knob($("cond").value, +$("sectors").value, +$("dist").value, +$("speed").value, +$("over").value),
  );
  if (res.error) {
    showError($("knobout"), res.error);
    drawWave($("knobwave"), []);
    return;
  }
  const m = res.metrics;
  const freqs = res.carrier.map(([, f]) => f);
  const carrier = freqs.length ? `carrier ${Math.min(...freqs).toFixed(0)} to ${Math.max(...freqs).toFixed(0)} Hz` : "no carrier";
  $("knobout").textContent =
    `target sector ${res.target}, final ${m.final_sector}; ${m.crossings} detents; ${carrier}\n` +
    `completion ${m.completion_time_s.toFixed(3)} s, overshoots ${m.overshoots}, recovery ${m.recovery_time_s.toFixed(3)} s`;
  drawWave($("knobwave"), res.preview, { color: "#652", marks: res.crossings.map((c) => c.time_s), duration: res.duration_s });
}

function rebuild() {
  $("status").textContent = "building plate model…";
  setTimeout(() => {
    const t0 = performance.now();
    demo = new Demo(Math.max(1, +$("seed").value | 0));
    ext = JSON.parse(demo.extent());
    picks = [];
    lastPlan = null;
    $("play").disabled = true;
    $("flowout").textContent = "no points chosen";
    drawWave($("flowwave"), []);
    drawField();
    $("status").textContent = `plate ${$("seed").value} ready in ${(performance.now() - t0).toFixed(0)} ms`;
  }, 10);
}

await init();
rebuild();
runKnob();

$("seed").addEventListener("change", rebuild);
for (const id of ["act", "freq", "drive"]) $(id).addEventListener("input", drawField);
$("field").addEventListener("click", (e) => {
  const c = $("field"), r = c.getBoundingClientRect();
  const p = toPlate(((e.clientX - r.left) / r.width) * c.width, ((e.clientY - r.top) / r.height) * c.height, c);
  picks = picks.length === 2 ? [p] : [...picks, p];
  drawField();
  if (picks.length === 2) runFlow();
  else $("flowout").textContent = "now click the end point";
});
$("play").addEventListener("click", playPlan);
$("runknob").addEventListener("click", runKnob);
