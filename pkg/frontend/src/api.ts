/**
 * Typed client for the building thermal-map HTTP service.
 *
 * Every method issues a plain GET; the viewer never mutates server state.
 */

export type Layer = "temperature" | "humidity";
export type WallMode = "flat_translucent" | "wireframe";
export type PrimitiveKind = "sphere" | "box" | "tetrahedron" | "billboard";

export interface SceneQuery {
  /** Frame timestamp to render; the service snaps to the nearest stored frame. */
  t?: number;
  layer?: Layer;
  walls?: WallMode;
  /** Camera position; presence switches the service to view-dependent generation. */
  viewpoint?: readonly [number, number, number];
  primitive?: PrimitiveKind;
  spacing?: number;
  detailRadius?: number;
  midRadius?: number;
}

export interface SceneResult {
  xml: string;
  /** Timestamp of the frame the scene was generated from (X-Frame-Timestamp). */
  frameTimestamp: number;
  /** Thermal-geometry budget accounting reported by the service (X-Nominal-Polygons). */
  nominalPolygons: number;
}

export interface PlaybackWindow {
  from?: number;
  to?: number;
  speed?: number;
}

export interface PlaybackPlan {
  building_id: string;
  t0: number;
  t1: number;
  speed: number;
  frames: { t: number; url: string }[];
  presentation_times: number[];
}

export interface Legend {
  layer: Layer;
  lo: number;
  hi: number;
  units: string;
}

export interface FramePayload {
  building_id: string;
  t: number;
  samples: Record<string, { position: [number, number, number]; temp: number; rh: number }>;
  completeness: number;
}

export class ApiError extends Error {
  constructor(
    message: string,
    readonly status: number,
  ) {
    super(message);
    this.name = "ApiError";
  }
}

/** Narrow fetch facade so tests can substitute a recording stub. */
export type FetchLike = (url: string, init?: { signal?: AbortSignal }) => Promise<Response>;

export class ViewerApi {
  private readonly fetchFn: FetchLike;

  constructor(
    readonly baseUrl: string,
    fetchFn?: FetchLike,
  ) {
    this.fetchFn = fetchFn ?? ((url, init) => fetch(url, init));
  }

  buildingsUrl(): string {
    return `${this.baseUrl}/buildings`;
  }

  sceneUrl(building: string, query: SceneQuery = {}, live = false): string {
    const params = new URLSearchParams();
    if (!live && query.t !== undefined) params.set("t", String(query.t));
    if (query.layer !== undefined) params.set("layer", query.layer);
    if (query.walls !== undefined) params.set("walls", query.walls);
    if (query.viewpoint !== undefined) {
      if (!query.viewpoint.every(Number.isFinite)) {
        throw new RangeError(`viewpoint must be finite, got ${query.viewpoint.join(", ")}`);
      }
      const [vx, vy, vz] = query.viewpoint;
      params.set("vx", String(vx));
      params.set("vy", String(vy));
      params.set("vz", String(vz));
    }
    if (query.primitive !== undefined) params.set("primitive", query.primitive);
    if (query.spacing !== undefined) params.set("spacing", String(query.spacing));
    if (query.detailRadius !== undefined) params.set("detail_radius", String(query.detailRadius));
    if (query.midRadius !== undefined) params.set("mid_radius", String(query.midRadius));
    const path = live ? "live/scene" : "scene";
    const qs = params.toString();
    return `${this.baseUrl}/buildings/${encodeURIComponent(building)}/${path}${qs ? `?${qs}` : ""}`;
  }

  playbackUrl(building: string, window: PlaybackWindow = {}): string {
    const params = new URLSearchParams();
    if (window.from !== undefined) params.set("from", String(window.from));
    if (window.to !== undefined) params.set("to", String(window.to));
    if (window.speed !== undefined) params.set("speed", String(window.speed));
    const qs = params.toString();
    return `${this.baseUrl}/buildings/${encodeURIComponent(building)}/playback${qs ? `?${qs}` : ""}`;
  }

  legendUrl(building: string, layer?: Layer): string {
    const qs = layer === undefined ? "" : `?layer=${layer}`;
    return `${this.baseUrl}/buildings/${encodeURIComponent(building)}/legend${qs}`;
  }

  framesUrl(building: string, window: { from?: number; to?: number } = {}): string {
    const params = new URLSearchParams();
    if (window.from !== undefined) params.set("from", String(window.from));
    if (window.to !== undefined) params.set("to", String(window.to));
    const qs = params.toString();
    return `${this.baseUrl}/buildings/${encodeURIComponent(building)}/frames${qs ? `?${qs}` : ""}`;
  }

  async listBuildings(signal?: AbortSignal): Promise<string[]> {
    return this.getJson(this.buildingsUrl(), signal);
  }

  async fetchScene(building: string, query: SceneQuery = {}, signal?: AbortSignal): Promise<SceneResult> {
    return this.sceneRequest(this.sceneUrl(building, query), signal);
  }

  /** Scene for "now" under the service's live clock instead of an explicit t. */
  async fetchLiveScene(building: string, query: SceneQuery = {}, signal?: AbortSignal): Promise<SceneResult> {
    return this.sceneRequest(this.sceneUrl(building, query, true), signal);
  }

  async fetchPlayback(building: string, window: PlaybackWindow = {}, signal?: AbortSignal): Promise<PlaybackPlan> {
    return this.getJson(this.playbackUrl(building, window), signal);
  }

  async fetchLegend(building: string, layer?: Layer, signal?: AbortSignal): Promise<Legend> {
    return this.getJson(this.legendUrl(building, layer), signal);
  }

  async fetchFrames(
    building: string,
    window: { from?: number; to?: number } = {},
    signal?: AbortSignal,
  ): Promise<FramePayload[]> {
    return this.getJson(this.framesUrl(building, window), signal);
  }

  private async sceneRequest(url: string, signal?: AbortSignal): Promise<SceneResult> {
    const res = await this.fetchFn(url, { signal });
    if (!res.ok) throw await this.toError(res);
    const xml = await res.text();
    const ts = res.headers.get("X-Frame-Timestamp");
    const poly = res.headers.get("X-Nominal-Polygons");
    return {
      xml,
      frameTimestamp: ts === null ? Number.NaN : (JSON.parse(ts) as number),
      nominalPolygons: poly === null ? Number.NaN : Number(poly),
    };
  }

  private async getJson<T>(url: string, signal?: AbortSignal): Promise<T> {
    const res = await this.fetchFn(url, { signal });
    if (!res.ok) throw await this.toError(res);
    return (await res.json()) as T;
  }

  private async toError(res: Response): Promise<ApiError> {
    let detail = res.statusText || `HTTP ${res.status}`;
    try {
      const body: unknown = await res.json();
      if (body && typeof body === "object" && typeof (body as { detail?: unknown }).detail === "string") {
        detail = (body as { detail: string }).detail;
      }
    } catch {
      // non-JSON error body; keep the status text
    }
    return new ApiError(`${res.status}: ${detail}`, res.status);
  }
}
