/**
 * Viewer controller: owns the UI-facing state and glues the API client,
 * the debounced scene requester, and the playback scheduler together.
 *
 * DOM-free by design; main.ts binds it to actual controls and a canvas.
 */

import {
  ApiError,
  type Layer,
  type Legend,
  type PlaybackWindow,
  type SceneQuery,
  type SceneResult,
  type ViewerApi,
  type WallMode,
} from "./api.js";
import { defaultCamera, moveCamera, turnCamera, type Camera } from "./camera.js";
import { PlaybackScheduler } from "./playback.js";
import { SceneRequester } from "./requester.js";
import {
  collectShapes,
  parseScene,
  sceneChecksum,
  SceneParseError,
  type ShapeInfo,
  type XmlParserLike,
} from "./x3d.js";

export interface ViewerState {
  building: string | null;
  camera: Camera;
  layer: Layer;
  walls: WallMode;
  speed: number;
  playing: boolean;
  scene: SceneResult | null;
  shapes: ShapeInfo[];
  sceneChecksum: string | null;
  displayedTimestamp: number | null;
  legend: Legend | null;
  banner: string | null;
}

export interface ViewerOptions {
  api: ViewerApi;
  /** Injectable for non-browser tests; defaults to the global DOMParser. */
  xmlParser?: XmlParserLike;
  /** Debounce interval for navigation-driven refetches. */
  minIntervalMs?: number;
  /** When false, scenes are requested without a viewpoint (full overview). */
  includeViewpoint?: boolean;
  now?: () => number;
  schedule?: (fn: () => void, ms: number) => unknown;
  cancel?: (handle: unknown) => void;
  onChange?: (state: ViewerState) => void;
}

export class ViewerController {
  readonly state: ViewerState;
  private readonly api: ViewerApi;
  private readonly requester: SceneRequester;
  private readonly xmlParser?: XmlParserLike;
  private readonly includeViewpoint: boolean;
  private readonly onChange?: (state: ViewerState) => void;
  private scheduler: PlaybackScheduler | null = null;

  constructor(options: ViewerOptions) {
    this.api = options.api;
    this.xmlParser = options.xmlParser;
    this.includeViewpoint = options.includeViewpoint ?? true;
    this.onChange = options.onChange;
    this.state = {
      building: null,
      camera: defaultCamera(),
      layer: "temperature",
      walls: "flat_translucent",
      speed: 60,
      playing: false,
      scene: null,
      shapes: [],
      sceneChecksum: null,
      displayedTimestamp: null,
      legend: null,
      banner: null,
    };
    this.requester = new SceneRequester(
      (query, signal) => {
        if (this.state.building === null) {
          return Promise.reject(new Error("no building selected"));
        }
        return this.api.fetchScene(this.state.building, query, signal);
      },
      {
        minIntervalMs: options.minIntervalMs,
        now: options.now,
        schedule: options.schedule,
        cancel: options.cancel,
        onScene: (scene) => this.acceptScene(scene),
        onError: (error) => this.showError(error),
      },
    );
  }

  /** Pick the first building the service knows about and load its scene. */
  async start(): Promise<void> {
    try {
      const buildings = await this.api.listBuildings();
      if (buildings.length === 0) {
        this.state.banner = "service has no buildings";
        this.emit();
        return;
      }
      await this.selectBuilding(buildings[0]);
    } catch (error) {
      this.showError(error);
    }
  }

  async selectBuilding(building: string): Promise<void> {
    this.state.building = building;
    this.scheduler = null;
    this.state.playing = false;
    this.state.displayedTimestamp = null;
    try {
      this.state.legend = await this.api.fetchLegend(building, this.state.layer);
    } catch (error) {
      this.showError(error);
    }
    this.refreshScene();
    this.emit();
  }

  get playback(): PlaybackScheduler | null {
    return this.scheduler;
  }

  sceneQuery(): SceneQuery {
    const query: SceneQuery = {
      layer: this.state.layer,
      walls: this.state.walls,
    };
    if (this.includeViewpoint) {
      query.viewpoint = [...this.state.camera.position];
    }
    if (this.state.displayedTimestamp !== null) {
      query.t = this.state.displayedTimestamp;
    }
    return query;
  }

  /** Ask for a fresh scene matching the current state (debounced, latest wins). */
  refreshScene(): void {
    if (this.state.building === null) return;
    this.requester.request(this.sceneQuery());
  }

  move(forwardStep: number, rightStep: number, upStep: number): void {
    this.state.camera = moveCamera(this.state.camera, forwardStep, rightStep, upStep);
    this.refreshScene();
    this.emit();
  }

  turn(dYaw: number, dPitch: number): void {
    this.state.camera = turnCamera(this.state.camera, dYaw, dPitch);
    this.emit();
  }

  setCamera(camera: Camera): void {
    this.state.camera = camera;
    this.refreshScene();
    this.emit();
  }

  /** Switching to the layer already shown is a no-op. */
  async setLayer(layer: Layer): Promise<void> {
    if (layer === this.state.layer) return;
    this.state.layer = layer;
    if (this.state.building !== null) {
      try {
        this.state.legend = await this.api.fetchLegend(this.state.building, layer);
      } catch (error) {
        this.showError(error);
      }
    }
    this.refreshScene();
    this.emit();
  }

  /** Wall display mode; the thermal cells themselves are unaffected. */
  setWallMode(walls: WallMode): void {
    if (walls === this.state.walls) return;
    this.state.walls = walls;
    this.refreshScene();
    this.emit();
  }

  async loadPlayback(window: PlaybackWindow = {}): Promise<void> {
    if (this.state.building === null) return;
    try {
      const plan = await this.api.fetchPlayback(this.state.building, {
        ...window,
        speed: window.speed ?? this.state.speed,
      });
      this.scheduler = new PlaybackScheduler(plan);
      this.state.speed = plan.speed;
      this.syncToScheduler();
    } catch (error) {
      this.scheduler = null;
      this.showError(error);
    }
    this.emit();
  }

  play(): void {
    this.scheduler?.play();
    this.state.playing = this.scheduler?.isPlaying ?? false;
    this.emit();
  }

  pause(): void {
    this.scheduler?.pause();
    this.state.playing = this.scheduler?.isPlaying ?? false;
    this.emit();
  }

  seekTo(frameTime: number): void {
    if (this.scheduler === null) return;
    this.scheduler.seek(frameTime);
    this.syncToScheduler();
    this.emit();
  }

  /** Change the time-compression factor; the service recomputes the plan. */
  async setSpeed(speed: number): Promise<void> {
    if (!(speed > 0)) throw new RangeError(`speed must be > 0, got ${speed}`);
    this.state.speed = speed;
    if (this.scheduler !== null) {
      const wasPlaying = this.scheduler.isPlaying;
      const at = this.scheduler.displayedTimestamp();
      const plan = this.scheduler.plan;
      await this.loadPlayback({ from: plan.t0, to: plan.t1, speed });
      if (this.scheduler !== null && at !== null) {
        this.scheduler.seek(at);
        if (wasPlaying) this.scheduler.play();
        this.state.playing = this.scheduler.isPlaying;
        this.syncToScheduler();
      }
    }
    this.emit();
  }

  /** Per-animation-frame pump: advance playback and refetch when the frame changes. */
  tick(): void {
    if (this.scheduler === null) return;
    this.state.playing = this.scheduler.isPlaying;
    const t = this.scheduler.displayedTimestamp();
    if (t !== null && t !== this.state.displayedTimestamp) {
      this.state.displayedTimestamp = t;
      this.refreshScene();
      this.emit();
    }
  }

  dispose(): void {
    this.requester.dispose();
  }

  private syncToScheduler(): void {
    const t = this.scheduler?.displayedTimestamp() ?? null;
    if (t !== null && t !== this.state.displayedTimestamp) {
      this.state.displayedTimestamp = t;
      this.refreshScene();
    }
  }

  private acceptScene(scene: SceneResult): void {
    const checksum = sceneChecksum(scene.xml);
    this.state.scene = scene;
    this.state.displayedTimestamp = scene.frameTimestamp;
    if (checksum !== this.state.sceneChecksum) {
      try {
        this.state.shapes = collectShapes(parseScene(scene.xml, this.xmlParser));
        this.state.sceneChecksum = checksum;
      } catch (error) {
        if (error instanceof SceneParseError) {
          this.state.banner = `scene parse failed: ${error.message}`;
          this.emit();
          return;
        }
        throw error;
      }
    }
    this.state.banner = null;
    this.emit();
  }

  /** Failures surface as a banner; the last good scene stays on screen. */
  private showError(error: unknown): void {
    if (error instanceof ApiError) {
      this.state.banner = error.message;
    } else if (error instanceof Error) {
      this.state.banner = error.message;
    } else {
      this.state.banner = String(error);
    }
    this.emit();
  }

  private emit(): void {
    this.onChange?.(this.state);
  }
}
