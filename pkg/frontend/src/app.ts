// Application wiring: input panel at the top, detail panel left of the map,
// map at the middle right, result list at the bottom.

import { ApiClient, ApiError } from "./api.js";
import { MapView } from "./map.js";
import { FILTERED_OUT_EXPLANATION, renderDetail, renderResults } from "./panels.js";
import {
  clearSelection,
  createState,
  selectMarker,
  setResponse,
  ViewState,
} from "./state.js";

export { FILTERED_OUT_EXPLANATION };

export interface AppOptions {
  tileUrl?: string;
}

export class App {
  readonly state: ViewState;
  private readonly map: MapView;
  private readonly regionSelect: HTMLSelectElement;
  private readonly queryInput: HTMLInputElement;
  private readonly submitButton: HTMLButtonElement;
  private readonly errorBanner: HTMLElement;
  private readonly degradedNotice: HTMLElement;
  private readonly detailPanel: HTMLElement;
  private readonly resultsPanel: HTMLElement;

  constructor(
    private readonly root: HTMLElement,
    private readonly api: ApiClient,
    options: AppOptions = {},
  ) {
    this.state = createState();
    this.regionSelect = must(root, "#region-select") as HTMLSelectElement;
    this.queryInput = must(root, "#query-input") as HTMLInputElement;
    this.submitButton = must(root, "#submit-button") as HTMLButtonElement;
    this.errorBanner = must(root, "#error-banner");
    this.degradedNotice = must(root, "#degraded-notice");
    this.detailPanel = must(root, "#detail-panel");
    this.resultsPanel = must(root, "#results-panel");
    this.map = new MapView(must(root, "#map-panel"), {
      onMarkerClick: (id) => {
        selectMarker(this.state, id);
        this.render();
      },
      onBackgroundClick: () => {
        clearSelection(this.state);
        this.render();
      },
    }, options);

    this.submitButton.addEventListener("click", () => void this.submit());
    this.queryInput.addEventListener("keydown", (event) => {
      if (event.key === "Enter") void this.submit();
    });
    this.render();
  }

  async init(): Promise<void> {
    try {
      this.state.regions = await this.api.regions();
    } catch (error) {
      this.state.error = describeError(error);
      this.render();
      return;
    }
    this.regionSelect.replaceChildren();
    for (const region of this.state.regions) {
      const option = document.createElement("option");
      option.value = region.name;
      option.textContent = region.name;
      this.regionSelect.appendChild(option);
    }
    const first = this.state.regions[0];
    if (first) this.state.selectedRegion = first.name;
    this.render();
  }

  async submit(): Promise<void> {
    if (this.state.loading) return; // single in-flight query
    const regionName = this.regionSelect.value || this.state.selectedRegion;
    const text = this.queryInput.value.trim();
    if (!regionName || !text) {
      this.state.error = "Choose a region and enter a query first.";
      this.render();
      return;
    }
    this.state.selectedRegion = regionName;
    this.state.queryText = text;
    this.state.loading = true;
    this.render();
    try {
      const response = await this.api.query({ region_name: regionName, text });
      const region = this.state.regions.find((r) => r.name === regionName);
      if (region) this.map.setRegion(region.rect);
      setResponse(this.state, response);
    } catch (error) {
      // Keep the previous results on screen; just surface the failure.
      this.state.error = describeError(error);
    } finally {
      this.state.loading = false;
      this.render();
    }
  }

  render(): void {
    this.submitButton.disabled = this.state.loading;
    this.queryInput.disabled = this.state.loading;
    this.errorBanner.textContent = this.state.error ?? "";
    this.errorBanner.hidden = this.state.error === null;
    const degraded = this.state.lastResponse?.degraded ?? false;
    this.degradedNotice.hidden = !degraded;
    this.degradedNotice.textContent = degraded
      ? "Results shown in embedding order: the language model refinement was unavailable."
      : "";
    this.map.render(this.state.lastResponse, this.state.selectedMarkerId);
    renderDetail(this.detailPanel, this.state.lastResponse, this.state.selectedMarkerId);
    renderResults(this.resultsPanel, this.state.lastResponse, (id) => {
      selectMarker(this.state, id);
      this.render();
    });
  }
}

function must(root: HTMLElement, selector: string): HTMLElement {
  const element = root.querySelector(selector);
  if (!element) throw new Error(`missing element ${selector}`);
  return element as HTMLElement;
}

function describeError(error: unknown): string {
  if (error instanceof ApiError) return `${error.message} (${error.code})`;
  if (error instanceof Error) return error.message;
  return String(error);
}
