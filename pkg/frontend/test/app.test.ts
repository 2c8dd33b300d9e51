import { beforeEach, describe, expect, it } from "vitest";

import { ApiClient } from "../src/api.js";
import { App, FILTERED_OUT_EXPLANATION } from "../src/app.js";
import {
  SAMPLE_QUERY,
  click,
  defaultResponder,
  flush,
  jsonResponse,
  mountShell,
  sampleResponse,
  stubFetch,
} from "./helpers.js";

async function bootApp(
  responder = defaultResponder(() => sampleResponse()),
): Promise<{ app: App; calls: ReturnType<typeof stubFetch> }> {
  const calls = stubFetch(responder);
  const app = new App(mountShell(), new ApiClient());
  await app.init();
  return { app, calls };
}

async function submitSample(app: App): Promise<void> {
  (document.querySelector("#region-select") as HTMLSelectElement).value = "Downtown St. Louis";
  (document.querySelector("#query-input") as HTMLInputElement).value = SAMPLE_QUERY;
  click(document.querySelector("#submit-button")!);
  await flush();
}

function markers(kind?: string): SVGCircleElement[] {
  const selector = kind ? `.marker--${kind}` : ".marker";
  return Array.from(document.querySelectorAll(selector));
}

describe("app", () => {
  beforeEach(() => {
    document.body.innerHTML = "";
  });

  it("loads regions into the selector at startup", async () => {
    await bootApp();
    const options = Array.from(document.querySelectorAll("#region-select option"));
    expect(options.map((o) => o.textContent)).toEqual(["Downtown St. Louis", "Riverside"]);
  });

  it("sends exactly the typed text and chosen region", async () => {
    const { app, calls } = await bootApp();
    await submitSample(app);
    const queryCall = calls.find((c) => c.url.endsWith("/api/query"));
    expect(queryCall).toBeDefined();
    expect(JSON.parse(String(queryCall!.init?.body))).toEqual({
      region_name: "Downtown St. Louis",
      text: SAMPLE_QUERY,
    });
  });

  it("renders the marker partition: green recommended, blue filtered out", async () => {
    const { app } = await bootApp();
    await submitSample(app);
    expect(markers("recommended")).toHaveLength(2);
    expect(markers("filtered")).toHaveLength(3);
  });

  it("shows the rank-0 recommendation in the detail panel", async () => {
    const { app } = await bootApp();
    await submitSample(app);
    const detail = document.querySelector("#detail-panel")!;
    expect(detail.textContent).toContain("Top recommendation: Corner Tap");
    expect(detail.textContent).toContain("Shows every football game");
  });

  it("shows the reason verbatim when a green marker is clicked", async () => {
    const { app } = await bootApp();
    await submitSample(app);
    const green = markers("recommended").find((m) => m.dataset.id === "poi-2")!;
    click(green);
    const detail = document.querySelector("#detail-panel")!;
    expect(detail.querySelector("h3")!.textContent).toBe("Stadium Draft House");
    expect(detail.querySelector(".detail-reason")!.textContent).toBe(
      "Sports bar with a large chicken menu.",
    );
  });

  it("explains filtered-out markers with their similarity", async () => {
    const { app } = await bootApp();
    await submitSample(app);
    const blue = markers("filtered").find((m) => m.dataset.id === "poi-4")!;
    click(blue);
    const detail = document.querySelector("#detail-panel")!;
    expect(detail.textContent).toContain(FILTERED_OUT_EXPLANATION);
    expect(detail.textContent).toContain("0.2700");
  });

  it("clears the selection when the map background is clicked", async () => {
    const { app } = await bootApp();
    await submitSample(app);
    click(markers("recommended")[0]!);
    expect(app.state.selectedMarkerId).toBe("poi-1");
    click(document.querySelector(".map-background")!);
    expect(app.state.selectedMarkerId).toBeNull();
    expect(document.querySelector("#detail-panel")!.textContent).toContain("Top recommendation");
  });

  it("selects markers from the bottom result list too", async () => {
    const { app } = await bootApp();
    await submitSample(app);
    const items = Array.from(document.querySelectorAll("#results-panel li"));
    expect(items).toHaveLength(5);
    click(items[4]!.querySelector("button")!);
    expect(app.state.selectedMarkerId).toBe("poi-5");
  });

  it("shows a visible notice for degraded responses", async () => {
    const degraded = sampleResponse();
    degraded.degraded = true;
    const { app } = await bootApp(defaultResponder(() => degraded));
    await submitSample(app);
    const notice = document.querySelector("#degraded-notice") as HTMLElement;
    expect(notice.hidden).toBe(false);
    expect(notice.textContent).toContain("embedding order");
  });

  it("keeps prior results and shows a banner when the service errors", async () => {
    let fail = false;
    const { app } = await bootApp((call) => {
      if (call.url.endsWith("/api/regions")) return jsonResponse([
        { name: "Downtown St. Louis",
          rect: { min_lat: 38.61, max_lat: 38.64, min_lon: -90.21, max_lon: -90.18 } },
      ]);
      if (fail) return jsonResponse({ code: "unknown_region", message: "gone" }, 400);
      return jsonResponse(sampleResponse());
    });
    await submitSample(app);
    expect(markers()).toHaveLength(5);
    fail = true;
    await submitSample(app);
    const banner = document.querySelector("#error-banner") as HTMLElement;
    expect(banner.hidden).toBe(false);
    expect(banner.textContent).toContain("unknown_region");
    expect(markers()).toHaveLength(5); // prior results retained
  });

  it("shows a no-results state for empty responses", async () => {
    const empty = sampleResponse();
    empty.recommended = [];
    empty.filtered_out = [];
    const { app } = await bootApp(defaultResponder(() => empty));
    await submitSample(app);
    expect(markers()).toHaveLength(0);
    expect(document.querySelector("#results-panel")!.textContent).toContain("No results");
  });

  it("re-rendering the same response is idempotent", async () => {
    const { app } = await bootApp();
    await submitSample(app);
    app.render();
    const first = document.body.innerHTML;
    app.render();
    expect(document.body.innerHTML).toBe(first);
  });

  it("allows a single in-flight query and disables inputs while loading", async () => {
    let release: (value: Response) => void = () => {};
    const pending = new Promise<Response>((resolve) => (release = resolve));
    const { app, calls } = await bootApp((call) => {
      if (call.url.endsWith("/api/regions")) {
        return jsonResponse([
          { name: "Downtown St. Louis",
            rect: { min_lat: 38.61, max_lat: 38.64, min_lon: -90.21, max_lon: -90.18 } },
        ]);
      }
      return pending;
    });
    (document.querySelector("#region-select") as HTMLSelectElement).value = "Downtown St. Louis";
    (document.querySelector("#query-input") as HTMLInputElement).value = SAMPLE_QUERY;
    click(document.querySelector("#submit-button")!);
    await flush();
    expect((document.querySelector("#submit-button") as HTMLButtonElement).disabled).toBe(true);
    click(document.querySelector("#submit-button")!); // ignored while loading
    await flush();
    expect(calls.filter((c) => c.url.endsWith("/api/query"))).toHaveLength(1);
    release(jsonResponse(sampleResponse()));
    await flush();
    expect((document.querySelector("#submit-button") as HTMLButtonElement).disabled).toBe(false);
    expect(markers()).toHaveLength(5);
  });
});
