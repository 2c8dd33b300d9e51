// Detail panel (left of the map) and the bottom result list.

import type { QueryResponse } from "./api.js";
import { findMarker } from "./state.js";

export const FILTERED_OUT_EXPLANATION = "Retrieved by embedding similarity, filtered out by the LLM.";

export function renderDetail(
  container: HTMLElement,
  response: QueryResponse | null,
  selectedMarkerId: string | null,
): void {
  container.replaceChildren();
  if (!response) {
    container.appendChild(paragraph("Submit a query to see details here.", "detail-empty"));
    return;
  }

  const selected = findMarker(response, selectedMarkerId);
  if (selected) {
    const heading = document.createElement("h3");
    heading.textContent = selected.poi.name;
    container.appendChild(heading);
    if (selected.kind === "recommended") {
      container.appendChild(paragraph(selected.poi.reason, "detail-reason"));
    } else {
      container.appendChild(paragraph(FILTERED_OUT_EXPLANATION, "detail-filtered"));
      container.appendChild(
        paragraph(`Similarity: ${selected.poi.similarity.toFixed(4)}`, "detail-similarity"),
      );
    }
    return;
  }

  const top = response.recommended.find((poi) => poi.rank === 0);
  if (!top) {
    container.appendChild(paragraph("No results in this region.", "detail-no-results"));
    return;
  }
  const heading = document.createElement("h3");
  heading.textContent = `Top recommendation: ${top.name}`;
  container.appendChild(heading);
  container.appendChild(paragraph(top.reason, "detail-reason"));
}

export function renderResults(
  container: HTMLElement,
  response: QueryResponse | null,
  onSelect: (id: string) => void,
): void {
  container.replaceChildren();
  if (!response) return;
  if (response.recommended.length === 0 && response.filtered_out.length === 0) {
    container.appendChild(paragraph("No results in this region.", "results-empty"));
    return;
  }
  const list = document.createElement("ol");
  list.className = "results-list";
  for (const poi of response.recommended) {
    list.appendChild(resultItem(poi.id, poi.name, `#${poi.rank} recommended`, onSelect));
  }
  for (const poi of response.filtered_out) {
    list.appendChild(
      resultItem(poi.id, poi.name, `similarity ${poi.similarity.toFixed(3)}`, onSelect),
    );
  }
  container.appendChild(list);
}

function resultItem(
  id: string,
  name: string,
  note: string,
  onSelect: (id: string) => void,
): HTMLLIElement {
  const item = document.createElement("li");
  item.dataset.id = id;
  const button = document.createElement("button");
  button.type = "button";
  button.className = "result-link";
  button.textContent = `${name} (${note})`;
  button.addEventListener("click", () => onSelect(id));
  item.appendChild(button);
  return item;
}

function paragraph(text: string, className: string): HTMLParagraphElement {
  const p = document.createElement("p");
  p.className = className;
  p.textContent = text;
  return p;
}
