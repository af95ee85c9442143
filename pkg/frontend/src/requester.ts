/**
 * Debounced, latest-wins scene fetching.
 *
 * Camera navigation fires far more often than the service should be asked
 * for scenes, so requests are rate-limited to one per interval (default
 * 500 ms, i.e. at most two per second): the first request in a quiet period
 * goes out immediately, later ones coalesce into a single trailing request
 * carrying the newest query. At most one request is in flight; firing a new
 * one aborts its predecessor.
 */

import type { SceneQuery, SceneResult } from "./api.js";

export type SceneFetcher = (query: SceneQuery, signal: AbortSignal) => Promise<SceneResult>;

export interface RequesterOptions {
  /** Minimum spacing between dispatched requests, in milliseconds. */
  minIntervalMs?: number;
  onScene?: (scene: SceneResult, query: SceneQuery) => void;
  onError?: (error: unknown) => void;
  /** Clock and timer hooks, injectable for tests. */
  now?: () => number;
  schedule?: (fn: () => void, ms: number) => unknown;
  cancel?: (handle: unknown) => void;
}

export class SceneRequester {
  private readonly minIntervalMs: number;
  private readonly now: () => number;
  private readonly schedule: (fn: () => void, ms: number) => unknown;
  private readonly cancel: (handle: unknown) => void;
  private readonly onScene?: (scene: SceneResult, query: SceneQuery) => void;
  private readonly onError?: (error: unknown) => void;

  private latest: SceneQuery | null = null;
  private timer: unknown = null;
  private lastFireAt = Number.NEGATIVE_INFINITY;
  private inflight: AbortController | null = null;
  private disposed = false;
  private good: SceneResult | null = null;

  constructor(
    private readonly fetcher: SceneFetcher,
    options: RequesterOptions = {},
  ) {
    this.minIntervalMs = options.minIntervalMs ?? 500;
    if (!(this.minIntervalMs >= 0)) {
      throw new RangeError(`minIntervalMs must be >= 0, got ${options.minIntervalMs}`);
    }
    this.now = options.now ?? (() => Date.now());
    this.schedule = options.schedule ?? ((fn, ms) => setTimeout(fn, ms));
    this.cancel = options.cancel ?? ((handle) => clearTimeout(handle as Parameters<typeof clearTimeout>[0]));
    this.onScene = options.onScene;
    this.onError = options.onError;
  }

  /** Last successfully fetched scene; kept across failed or superseded requests. */
  get lastGood(): SceneResult | null {
    return this.good;
  }

  get inFlight(): boolean {
    return this.inflight !== null;
  }

  get pending(): boolean {
    return this.timer !== null;
  }

  request(query: SceneQuery): void {
    if (this.disposed) return;
    this.latest = query;
    if (this.timer !== null) return; // a trailing dispatch will pick this up
    const wait = this.lastFireAt + this.minIntervalMs - this.now();
    if (wait <= 0) {
      this.fire();
      return;
    }
    this.timer = this.schedule(() => {
      this.timer = null;
      this.fire();
    }, wait);
  }

  dispose(): void {
    this.disposed = true;
    if (this.timer !== null) {
      this.cancel(this.timer);
      this.timer = null;
    }
    this.inflight?.abort();
    this.inflight = null;
  }

  private fire(): void {
    if (this.disposed || this.latest === null) return;
    const query = this.latest;
    this.latest = null;
    this.lastFireAt = this.now();
    this.inflight?.abort(); // latest wins
    const controller = new AbortController();
    this.inflight = controller;
    this.fetcher(query, controller.signal).then(
      (scene) => {
        if (controller.signal.aborted || this.disposed) return;
        if (this.inflight === controller) this.inflight = null;
        this.good = scene;
        this.onScene?.(scene, query);
      },
      (error) => {
        if (controller.signal.aborted || this.disposed) return;
        if (this.inflight === controller) this.inflight = null;
        this.onError?.(error);
      },
    );
  }
}
