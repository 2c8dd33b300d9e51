import { readFileSync } from "node:fs";
import { dirname, join } from "node:path";
import { fileURLToPath } from "node:url";

import type { QueryResponse, Region } from "../src/api.js";

const ROOT = join(dirname(fileURLToPath(import.meta.url)), "..");

export const SAMPLE_QUERY =
  "I am looking for a bar to watch football that also serves delicious chicken. " +
  "Do you have any recommendations?";

export const REGIONS: Region[] = [
  {
    name: "Downtown St. Louis",
    rect: { min_lat: 38.61, max_lat: 38.64, min_lon: -90.21, max_lon: -90.18 },
  },
  {
    name: "Riverside",
    rect: { min_lat: 38.6, max_lat: 38.62, min_lon: -90.25, max_lon: -90.21 },
  },
];

export function sampleResponse(): QueryResponse {
  return {
    recommended: [
      {
        id: "poi-1",
        name: "Corner Tap",
        lat: 38.62,
        lon: -90.19,
        rank: 0,
        reason: "Shows every football game and serves crispy chicken wings.",
      },
      {
        id: "poi-2",
        name: "Stadium Draft House",
        lat: 38.625,
        lon: -90.2,
        rank: 1,
        reason: "Sports bar with a large chicken menu.",
      },
    ],
    filtered_out: [
      { id: "poi-3", name: "Quiet Books", lat: 38.615, lon: -90.185, similarity: 0.31 },
      { id: "poi-4", name: "Bean Cafe", lat: 38.63, lon: -90.205, similarity: 0.27 },
      { id: "poi-5", name: "Mane Salon", lat: 38.635, lon: -90.19, similarity: 0.22 },
    ],
    degraded: false,
    timings_ms: { filter: 1.2, refine: 3.4 },
  };
}

/** Mounts the real index.html shell (sans script tags) into the jsdom body. */
export function mountShell(): HTMLElement {
  const html = readFileSync(join(ROOT, "index.html"), "utf-8");
  const body = html.split(/<body[^>]*>/)[1]!.split("</body>")[0]!;
  document.body.innerHTML = body.replace(/<script[\s\S]*?<\/script>/g, "");
  return document.body;
}

export type FetchCall = { url: string; init?: RequestInit };

/**
 * Installs a fetch stub that answers /api/regions with the region catalog and
 * /api/query via the provided responder. Returns the recorded calls.
 */
export function stubFetch(
  responder: (call: FetchCall) => Response | Promise<Response>,
): FetchCall[] {
  const calls: FetchCall[] = [];
  globalThis.fetch = (async (input: RequestInfo | URL, init?: RequestInit) => {
    const call = { url: String(input), init };
    calls.push(call);
    return responder(call);
  }) as typeof fetch;
  return calls;
}

export function jsonResponse(payload: unknown, status = 200): Response {
  return new Response(JSON.stringify(payload), {
    status,
    headers: { "content-type": "application/json" },
  });
}

export function defaultResponder(queryPayload: () => unknown, queryStatus = 200) {
  return (call: FetchCall): Response => {
    if (call.url.endsWith("/api/regions")) return jsonResponse(REGIONS);
    if (call.url.endsWith("/api/query")) return jsonResponse(queryPayload(), queryStatus);
    return jsonResponse({ code: "not_found", message: "no route" }, 404);
  };
}

export function click(element: Element): void {
  element.dispatchEvent(new MouseEvent("click", { bubbles: true }));
}

export async function flush(): Promise<void> {
  await new Promise((resolve) => setTimeout(resolve, 0));
}
