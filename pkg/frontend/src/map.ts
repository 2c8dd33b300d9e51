// SVG map panel. Marker colors are a pure function of the response's
// recommended / filtered_out partition: green for recommended, blue for
// filtered out. Without a tile URL the map renders as a plain coordinate
// canvas (grid lines plus corner coordinates), which keeps tests and demos
// fully offline.

import type { QueryResponse, RegionRect } from "./api.js";

const SVG_NS = "http://www.w3.org/2000/svg";
const WIDTH = 640;
const HEIGHT = 480;
const MARGIN = 24;

export interface MapHandlers {
  onMarkerClick(id: string): void;
  onBackgroundClick(): void;
}

export interface MapOptions {
  // Template like "https://tiles.example/{min_lon},{min_lat},{max_lon},{max_lat}.png"
  tileUrl?: string;
}

export class MapView {
  private readonly svg: SVGSVGElement;
  private rect: RegionRect | null = null;

  constructor(
    private readonly container: HTMLElement,
    private readonly handlers: MapHandlers,
    private readonly options: MapOptions = {},
  ) {
    this.svg = document.createElementNS(SVG_NS, "svg");
    this.svg.setAttribute("viewBox", `0 0 ${WIDTH} ${HEIGHT}`);
    this.svg.setAttribute("class", "map-canvas");
    this.svg.setAttribute("role", "img");
    container.appendChild(this.svg);
  }

  setRegion(rect: RegionRect): void {
    this.rect = rect;
  }

  private project(lat: number, lon: number): { x: number; y: number } {
    const rect = this.rect;
    if (!rect) return { x: WIDTH / 2, y: HEIGHT / 2 };
    const lonSpan = rect.max_lon - rect.min_lon || 1e-9;
    const latSpan = rect.max_lat - rect.min_lat || 1e-9;
    const x = MARGIN + ((lon - rect.min_lon) / lonSpan) * (WIDTH - 2 * MARGIN);
    const y = HEIGHT - MARGIN - ((lat - rect.min_lat) / latSpan) * (HEIGHT - 2 * MARGIN);
    return { x, y };
  }

  render(response: QueryResponse | null, selectedId: string | null): void {
    this.svg.replaceChildren();
    this.renderBackground();
    if (!response) return;
    for (const poi of response.filtered_out) {
      this.renderMarker(poi.id, poi.name, poi.lat, poi.lon, "filtered", selectedId);
    }
    for (const poi of response.recommended) {
      this.renderMarker(poi.id, poi.name, poi.lat, poi.lon, "recommended", selectedId);
    }
  }

  private renderBackground(): void {
    const background = document.createElementNS(SVG_NS, "rect");
    background.setAttribute("x", "0");
    background.setAttribute("y", "0");
    background.setAttribute("width", String(WIDTH));
    background.setAttribute("height", String(HEIGHT));
    background.setAttribute("class", "map-background");
    background.addEventListener("click", () => this.handlers.onBackgroundClick());
    this.svg.appendChild(background);

    const rect = this.rect;
    if (this.options.tileUrl && rect) {
      const image = document.createElementNS(SVG_NS, "image");
      const href = this.options.tileUrl
        .replace("{min_lon}", String(rect.min_lon))
        .replace("{min_lat}", String(rect.min_lat))
        .replace("{max_lon}", String(rect.max_lon))
        .replace("{max_lat}", String(rect.max_lat));
      image.setAttribute("href", href);
      image.setAttribute("width", String(WIDTH));
      image.setAttribute("height", String(HEIGHT));
      image.setAttribute("class", "map-tiles");
      image.style.pointerEvents = "none";
      this.svg.appendChild(image);
      return;
    }

    // Offline mode: coordinate grid.
    for (let i = 1; i < 4; i++) {
      const vertical = document.createElementNS(SVG_NS, "line");
      vertical.setAttribute("x1", String((WIDTH / 4) * i));
      vertical.setAttribute("x2", String((WIDTH / 4) * i));
      vertical.setAttribute("y1", "0");
      vertical.setAttribute("y2", String(HEIGHT));
      vertical.setAttribute("class", "map-grid");
      this.svg.appendChild(vertical);
      const horizontal = document.createElementNS(SVG_NS, "line");
      horizontal.setAttribute("x1", "0");
      horizontal.setAttribute("x2", String(WIDTH));
      horizontal.setAttribute("y1", String((HEIGHT / 4) * i));
      horizontal.setAttribute("y2", String((HEIGHT / 4) * i));
      horizontal.setAttribute("class", "map-grid");
      this.svg.appendChild(horizontal);
    }
    if (rect) {
      const label = document.createElementNS(SVG_NS, "text");
      label.setAttribute("x", "6");
      label.setAttribute("y", String(HEIGHT - 6));
      label.setAttribute("class", "map-coords");
      label.textContent = `${rect.min_lat.toFixed(4)}, ${rect.min_lon.toFixed(4)}`;
      this.svg.appendChild(label);
    }
  }

  private renderMarker(
    id: string,
    name: string,
    lat: number,
    lon: number,
    kind: "recommended" | "filtered",
    selectedId: string | null,
  ): void {
    const { x, y } = this.project(lat, lon);
    const marker = document.createElementNS(SVG_NS, "circle");
    marker.setAttribute("cx", String(x));
    marker.setAttribute("cy", String(y));
    marker.setAttribute("r", id === selectedId ? "11" : "8");
    marker.setAttribute("class", `marker marker--${kind}${id === selectedId ? " marker--selected" : ""}`);
    marker.setAttribute("data-id", id);
    marker.setAttribute("data-kind", kind);
    const title = document.createElementNS(SVG_NS, "title");
    title.textContent = name;
    marker.appendChild(title);
    marker.addEventListener("click", (event) => {
      event.stopPropagation();
      this.handlers.onMarkerClick(id);
    });
    this.svg.appendChild(marker);
  }
}
