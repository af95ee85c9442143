// @vitest-environment jsdom
import { describe, expect, test, vi } from "vitest";
import { ApiError, type PlaybackPlan, type SceneQuery, type ViewerApi } from "../src/api.js";
import { ViewerController } from "../src/viewer.js";

const SCENE_XML = `<?xml version="1.0" encoding="UTF-8"?>
<X3D profile="Immersive" version="3.3">
  <Scene>
    <NavigationInfo type='"FLY" "EXAMINE"'/>
    <Transform translation="0.5 0.5 0.9">
      <Shape>
        <Appearance>
          <Material diffuseColor="0.25 0 0.75" transparency="0.4"/>
        </Appearance>
        <Sphere radius="0.5"/>
      </Shape>
    </Transform>
  </Scene>
</X3D>`;

const PLAN: PlaybackPlan = {
  building_id: "house",
  t0: 60,
  t1: 180,
  speed: 60,
  frames: [
    { t: 60, url: "/buildings/house/scene?t=60" },
    { t: 120, url: "/buildings/house/scene?t=120" },
    { t: 180, url: "/buildings/house/scene?t=180" },
  ],
  presentation_times: [0, 1, 2],
};

function stubApi() {
  return {
    listBuildings: vi.fn(async () => ["house"]),
    fetchLegend: vi.fn(async (_b: string, layer = "temperature") => ({
      layer,
      lo: layer === "temperature" ? 15 : 0,
      hi: layer === "temperature" ? 30 : 100,
      units: layer === "temperature" ? "°C" : "%",
    })),
    fetchScene: vi.fn(async (_b: string, query: SceneQuery = {}) => ({
      xml: SCENE_XML,
      frameTimestamp: query.t ?? 3600,
      nominalPolygons: 300,
    })),
    fetchPlayback: vi.fn(async (_b: string, window: { speed?: number } = {}) => ({
      ...PLAN,
      speed: window.speed ?? PLAN.speed,
    })),
  };
}

function makeController(api: ReturnType<typeof stubApi>) {
  return new ViewerController({
    api: api as unknown as ViewerApi,
    minIntervalMs: 0, // navigation debounce is covered by the requester tests
  });
}

const flush = async (): Promise<void> => {
  await Promise.resolve();
  await Promise.resolve();
  await Promise.resolve();
};

describe("building selection", () => {
  test("start picks the first building, loads its legend, and fetches a scene", async () => {
    const api = stubApi();
    const controller = makeController(api);
    await controller.start();
    await flush();
    expect(controller.state.building).toBe("house");
    expect(controller.state.legend?.units).toBe("°C");
    expect(api.fetchScene).toHaveBeenCalledTimes(1);
    const query = api.fetchScene.mock.calls[0][1] as SceneQuery;
    expect(query.layer).toBe("temperature");
    expect(query.walls).toBe("flat_translucent");
    expect(query.viewpoint).toHaveLength(3);
    expect(controller.state.scene?.xml).toBe(SCENE_XML);
    expect(controller.state.shapes).toHaveLength(1);
    expect(controller.state.sceneChecksum).toMatch(/^[0-9a-f]{8}$/);
    expect(controller.state.banner).toBeNull();
  });

  test("an empty service puts up a banner instead of crashing", async () => {
    const api = stubApi();
    api.listBuildings.mockResolvedValueOnce([]);
    const controller = makeController(api);
    await controller.start();
    expect(controller.state.banner).toBe("service has no buildings");
    expect(api.fetchScene).not.toHaveBeenCalled();
  });
});

describe("layer toggling", () => {
  test("switching to the same layer is a no-op", async () => {
    const api = stubApi();
    const controller = makeController(api);
    await controller.start();
    await flush();
    const scenes = api.fetchScene.mock.calls.length;
    const legends = api.fetchLegend.mock.calls.length;
    await controller.setLayer("temperature");
    await flush();
    expect(api.fetchScene.mock.calls.length).toBe(scenes);
    expect(api.fetchLegend.mock.calls.length).toBe(legends);
  });

  test("switching layers refetches the legend and the scene", async () => {
    const api = stubApi();
    const controller = makeController(api);
    await controller.start();
    await flush();
    await controller.setLayer("humidity");
    await flush();
    expect(controller.state.layer).toBe("humidity");
    expect(controller.state.legend?.units).toBe("%");
    const lastQuery = api.fetchScene.mock.calls.at(-1)?.[1] as SceneQuery;
    expect(lastQuery.layer).toBe("humidity");
  });
});

describe("wall modes", () => {
  test("the current mode is idempotent and a new mode refetches", async () => {
    const api = stubApi();
    const controller = makeController(api);
    await controller.start();
    await flush();
    const before = api.fetchScene.mock.calls.length;
    controller.setWallMode("flat_translucent");
    await flush();
    expect(api.fetchScene.mock.calls.length).toBe(before);
    controller.setWallMode("wireframe");
    await flush();
    expect(api.fetchScene.mock.calls.length).toBe(before + 1);
    const lastQuery = api.fetchScene.mock.calls.at(-1)?.[1] as SceneQuery;
    expect(lastQuery.walls).toBe("wireframe");
  });
});

describe("failure handling", () => {
  test("a failed scene fetch raises the banner and keeps the previous scene", async () => {
    const api = stubApi();
    const controller = makeController(api);
    await controller.start();
    await flush();
    const shownScene = controller.state.scene;
    expect(shownScene).not.toBeNull();

    api.fetchScene.mockRejectedValueOnce(new ApiError("503: service down", 503));
    controller.setWallMode("wireframe");
    await flush();
    expect(controller.state.banner).toBe("503: service down");
    expect(controller.state.scene).toBe(shownScene);
    expect(controller.state.shapes).toHaveLength(1);

    // the next successful fetch clears the banner
    controller.setWallMode("flat_translucent");
    await flush();
    expect(controller.state.banner).toBeNull();
  });
});

describe("playback wiring", () => {
  test("loading a plan syncs the displayed frame and pins scene fetches to it", async () => {
    const api = stubApi();
    const controller = makeController(api);
    await controller.start();
    await flush();
    await controller.loadPlayback();
    await flush();
    expect(controller.playback?.canPlay).toBe(true);
    expect(controller.state.displayedTimestamp).toBe(60);
    const lastQuery = api.fetchScene.mock.calls.at(-1)?.[1] as SceneQuery;
    expect(lastQuery.t).toBe(60);

    controller.play();
    expect(controller.state.playing).toBe(true);
    controller.pause();
    expect(controller.state.playing).toBe(false);
  });

  test("seeking jumps the displayed frame to the nearest stored timestamp", async () => {
    const api = stubApi();
    const controller = makeController(api);
    await controller.start();
    await flush();
    await controller.loadPlayback();
    await flush();
    controller.seekTo(130);
    await flush();
    expect(controller.state.displayedTimestamp).toBe(120);
    const lastQuery = api.fetchScene.mock.calls.at(-1)?.[1] as SceneQuery;
    expect(lastQuery.t).toBe(120);
  });

  test("changing speed reloads the plan and stays on the same frame", async () => {
    const api = stubApi();
    const controller = makeController(api);
    await controller.start();
    await flush();
    await controller.loadPlayback();
    await flush();
    controller.seekTo(120);
    await controller.setSpeed(120);
    await flush();
    expect(api.fetchPlayback).toHaveBeenCalledTimes(2);
    const window = api.fetchPlayback.mock.calls.at(-1)?.[1] as { speed?: number };
    expect(window.speed).toBe(120);
    expect(controller.state.speed).toBe(120);
    expect(controller.state.displayedTimestamp).toBe(120);
  });

  test("a rejected plan keeps the controls disabled and reports the failure", async () => {
    const api = stubApi();
    api.fetchPlayback.mockRejectedValueOnce(new ApiError("404: no frames stored", 404));
    const controller = makeController(api);
    await controller.start();
    await flush();
    await controller.loadPlayback();
    expect(controller.playback).toBeNull();
    expect(controller.state.banner).toBe("404: no frames stored");
    controller.play(); // no-op without a plan
    expect(controller.state.playing).toBe(false);
  });
});

describe("camera-driven refetching", () => {
  test("movement issues a view-dependent scene request with the new position", async () => {
    const api = stubApi();
    const controller = makeController(api);
    await controller.start();
    await flush();
    const before = controller.state.camera.position;
    controller.move(1, 0, 0);
    await flush();
    const lastQuery = api.fetchScene.mock.calls.at(-1)?.[1] as SceneQuery;
    expect(lastQuery.viewpoint).not.toEqual(before);
    expect(lastQuery.viewpoint).toEqual([...controller.state.camera.position]);
  });
});
