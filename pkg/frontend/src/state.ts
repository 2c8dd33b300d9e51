// View state and its invariants. The selected marker id, when set, always
// refers to an entry of the last response; responses are never mutated.

import type { FilteredOutPoi, QueryResponse, RecommendedPoi, Region } from "./api.js";

export interface ViewState {
  regions: Region[];
  selectedRegion: string | null;
  queryText: string;
  lastResponse: QueryResponse | null;
  selectedMarkerId: string | null;
  loading: boolean;
  error: string | null;
}

export type MarkerInfo =
  | { kind: "recommended"; poi: RecommendedPoi }
  | { kind: "filtered_out"; poi: FilteredOutPoi };

export function createState(): ViewState {
  return {
    regions: [],
    selectedRegion: null,
    queryText: "",
    lastResponse: null,
    selectedMarkerId: null,
    loading: false,
    error: null,
  };
}

export function findMarker(response: QueryResponse | null, id: string | null): MarkerInfo | null {
  if (!response || id === null) return null;
  const recommended = response.recommended.find((p) => p.id === id);
  if (recommended) return { kind: "recommended", poi: recommended };
  const filtered = response.filtered_out.find((p) => p.id === id);
  if (filtered) return { kind: "filtered_out", poi: filtered };
  return null;
}

export function setResponse(state: ViewState, response: QueryResponse): void {
  state.lastResponse = response;
  state.error = null;
  // A stale selection pointing outside the new response would break the
  // invariant, so selection resets on every new response.
  state.selectedMarkerId = null;
}

export function selectMarker(state: ViewState, id: string): void {
  if (findMarker(state.lastResponse, id) === null) return; // unknown ids are ignored
  state.selectedMarkerId = id;
}

export function clearSelection(state: ViewState): void {
  state.selectedMarkerId = null;
}
