/** DOM builders for the result view, records table, and error banner. */

import {
  formatTimestamp,
  overlayModel,
  voteBarModel,
  voteTotal,
} from "./state.js";
import { CLASS_COLORS, CLASS_NAMES, type DiagnosisRecord } from "./types.js";

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

export function renderBadge(record: DiagnosisRecord): HTMLElement {
  const badge = el("span", "class-badge", record.predicted);
  badge.dataset.class = record.predicted;
  badge.style.backgroundColor = CLASS_COLORS[record.predicted];
  return badge;
}

export function renderVoteBars(record: DiagnosisRecord): HTMLElement {
  const wrap = el("div", "vote-bars");
  wrap.dataset.total = String(voteTotal(record));
  for (const bar of voteBarModel(record)) {
    const row = el("div", "vote-bar-row");
    row.appendChild(el("span", "vote-bar-label", bar.label));
    const track = el("div", "vote-bar-track");
    const fill = el("div", "vote-bar-fill");
    fill.style.width = `${(bar.fraction * 100).toFixed(1)}%`;
    fill.style.backgroundColor = bar.color;
    fill.dataset.count = String(bar.count);
    track.appendChild(fill);
    row.appendChild(track);
    row.appendChild(el("span", "vote-bar-count", String(bar.count)));
    wrap.appendChild(row);
  }
  return wrap;
}

export function renderOverlay(record: DiagnosisRecord): HTMLElement {
  const { rows, cols } = record.grid;
  const grid = el("div", "patch-grid");
  grid.style.gridTemplateColumns = `repeat(${cols}, 1fr)`;
  grid.dataset.rows = String(rows);
  grid.dataset.cols = String(cols);
  grid.setAttribute("role", "img");
  grid.setAttribute(
    "aria-label",
    `Patch classification grid, ${rows} rows by ${cols} columns`,
  );
  for (const cell of overlayModel(record)) {
    const div = el("div", "patch-cell");
    div.style.backgroundColor = cell.color;
    div.dataset.class = cell.className;
    div.title = `row ${cell.row}, col ${cell.col}: ${cell.className}`;
    grid.appendChild(div);
  }
  return grid;
}

export function renderLegend(): HTMLElement {
  const legend = el("div", "legend");
  for (const name of CLASS_NAMES) {
    const item = el("span", "legend-item");
    const swatch = el("span", "legend-swatch");
    swatch.style.backgroundColor = CLASS_COLORS[name];
    item.appendChild(swatch);
    item.appendChild(document.createTextNode(name));
    legend.appendChild(item);
  }
  return legend;
}

export function renderResultView(record: DiagnosisRecord): HTMLElement {
  const view = el("section", "result-view");
  const heading = el("div", "result-heading");
  heading.appendChild(el("span", undefined, "Diagnosis: "));
  heading.appendChild(renderBadge(record));
  view.appendChild(heading);

  const meta = el("dl", "result-meta");
  const pairs: Array<[string, string]> = [
    ["Patient", record.patient_name],
    ["Birth year", String(record.birth_year)],
    ["Recorded", formatTimestamp(record.created_at)],
    ["Record id", record.record_id],
    ["Model", record.model_id],
    ["Patches", String(voteTotal(record))],
  ];
  for (const [key, value] of pairs) {
    meta.appendChild(el("dt", undefined, key));
    meta.appendChild(el("dd", undefined, value));
  }
  view.appendChild(meta);

  view.appendChild(el("h3", undefined, "Patch votes"));
  view.appendChild(renderVoteBars(record));
  view.appendChild(el("h3", undefined, "Patch map"));
  view.appendChild(renderLegend());
  view.appendChild(renderOverlay(record));
  return view;
}

export function renderErrorBanner(message: string, onDismiss: () => void): HTMLElement {
  const banner = el("div", "error-banner");
  banner.setAttribute("role", "alert");
  banner.appendChild(el("span", "error-message", message));
  const button = el("button", "error-dismiss", "Dismiss");
  button.type = "button";
  button.addEventListener("click", () => {
    banner.remove();
    onDismiss();
  });
  banner.appendChild(button);
  return banner;
}

export function renderRecordsTable(
  records: DiagnosisRecord[],
  onOpen: (record: DiagnosisRecord) => void,
): HTMLElement {
  if (records.length === 0) {
    return el("p", "empty-state", "No diagnoses recorded yet.");
  }
  const table = el("table", "records-table");
  const head = el("thead");
  const headRow = el("tr");
  for (const title of ["Recorded", "Patient", "Birth year", "Diagnosis"]) {
    headRow.appendChild(el("th", undefined, title));
  }
  head.appendChild(headRow);
  table.appendChild(head);

  const body = el("tbody");
  for (const record of records) {
    const row = el("tr", "record-row");
    row.dataset.recordId = record.record_id;
    row.tabIndex = 0;
    row.appendChild(el("td", undefined, formatTimestamp(record.created_at)));
    row.appendChild(el("td", undefined, record.patient_name));
    row.appendChild(el("td", undefined, String(record.birth_year)));
    const cell = el("td");
    cell.appendChild(renderBadge(record));
    row.appendChild(cell);
    row.addEventListener("click", () => onOpen(record));
    row.addEventListener("keydown", (event) => {
      if (event.key === "Enter") onOpen(record);
    });
    body.appendChild(row);
  }
  table.appendChild(body);
  return table;
}
