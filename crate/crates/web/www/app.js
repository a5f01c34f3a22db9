import init, { euler_series, fixed_locus_profile, charge_report, fixture_list } from "./pkg/mukai_web.js";

const $ = (id) => document.getElementById(id);

function show(el, text, isError) {
  el.textContent = text;
  el.className = isError ? "err" : "";
}

function rational([n, d]) {
  return d === 1 ? String(n) : `${n}/${d}`;
}

function censusText(c) {
  const parts = Object.entries(c).map(([k, n]) => `${n}x[${k}]`);
  return parts.length ? parts.join(" ") : "-";
}

function locusTable(r) {
  const head = ["class", "square", "dim", "count", "census", "sym power", "div=1", "ns-div=1"];
  const rows = r.classes.map((c) => [
    `(${c.label})`, c.square, c.dimension, c.count, censusText(c.census),
    c.sym_power ? `${c.sym_power.multiplicity}w, w²=${c.sym_power.part_square}` : "-",
    c.divisibility_one, c.ns_divisibility_one ?? "-",
  ]);
  const cell = (tag, v) => `<${tag}>${String(v).replace(/</g, "&lt;")}</${tag}>`;
  const html = [
    `<p>${r.support_size} support vectors, ${r.orbit_count} orbits under the dual group of order ${r.dual_group_order}</p>`,
    "<table><tr>", head.map((h) => cell("th", h)).join(""), "</tr>",
    ...rows.map((row) => "<tr>" + row.map((v) => cell("td", v)).join("") + "</tr>"),
    "</table>",
    ...r.notes.map((n) => `<p><small>${n}</small></p>`),
  ];
  return html.join("");
}

function runEuler() {
  const r = JSON.parse(euler_series($("fs").value, Number($("terms").value), $("vsq").value));
  if (r.error) return show($("euler-out"), r.error, true);
  let text = `1/η_g = ${r.display}`;
  if (r.euler_characteristic !== undefined) text += `\nEuler characteristic at v² = ${r.v_square}: ${r.euler_characteristic}`;
  if (r.oracle) text += `\nproduct-form cross-check: ${r.oracle.eigenvalue_product_agrees ? "agrees" : "DISAGREES"}`;
  show($("euler-out"), text, false);
}

function runLocus() {
  const out = $("locus-out");
  const r = JSON.parse(fixed_locus_profile($("fixture").value, $("vec").value));
  if (r.error) {
    out.innerHTML = "";
    const p = document.createElement("pre");
    show(p, r.error, true);
    out.appendChild(p);
    return;
  }
  out.innerHTML = locusTable(r);
}

function runCharge() {
  const r = JSON.parse(charge_report($("cfixture").value, $("clat").value, $("omega").value, $("beta").value, $("cvec").value, $("allc").checked));
  if (r.error) return show($("charge-out"), r.error, true);
  const z = r.charge.values[0];
  const g = r.genericity;
  const lines = [
    `Z(${z.vector}) = ${rational(z.re)} + ${rational(z.im)} i`,
    `positive plane: ${r.charge.positive_plane}`,
  ];
  if (r.charge.distinguished_domain) {
    const d = r.charge.distinguished_domain;
    lines.push(`distinguished domain: ${d.inside ? "inside" : `outside, witness ${d.witness}`}`);
  }
  lines.push(`generic (${g.mode}): ${g.generic}` + (g.witness ? `, splits as ${g.witness[0]} + ${g.witness[1]}` : ""));
  show($("charge-out"), lines.join("\n"), false);
}

async function main() {
  await init();
  for (const sel of [$("fixture"), $("cfixture")]) {
    for (const name of JSON.parse(fixture_list())) {
      const o = document.createElement("option");
      o.value = o.textContent = name;
      sel.appendChild(o);
    }
  }
  $("run-euler").onclick = runEuler;
  $("run-locus").onclick = runLocus;
  $("run-charge").onclick = runCharge;
  $("status").textContent = "Ready.";
}

main().catch((e) => show($("status"), `failed to load: ${e}`, true));
