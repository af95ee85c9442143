// @vitest-environment jsdom
import { describe, expect, test } from "vitest";
import {
  collectShapes,
  KNOWN_TAGS,
  parseScene,
  parseVec3,
  sceneChecksum,
  SceneParseError,
  summarizeScene,
} from "../src/x3d.js";

// Mirrors the service's serialization: XML prolog, Immersive profile, a
// NavigationInfo with a single-quoted attribute, per-cell Transforms, and
// gray structural geometry alongside the colored field cells.
const MIXED_SCENE = `<?xml version="1.0" encoding="UTF-8"?>
<X3D profile="Immersive" version="3.3">
  <Scene>
    <NavigationInfo type='"FLY" "EXAMINE"'/>
    <Viewpoint position="1 1 1.5"/>
    <Transform translation="0.5 0.5 0.9">
      <Shape>
        <Appearance>
          <Material diffuseColor="0.25 0 0.75" transparency="0.4"/>
        </Appearance>
        <Sphere radius="0.5"/>
      </Shape>
    </Transform>
    <Transform translation="1.5 0.5 0.9">
      <Shape>
        <Appearance>
          <Material diffuseColor="1 0 0" transparency="0.4"/>
        </Appearance>
        <Box size="1 1 1"/>
      </Shape>
    </Transform>
    <Transform translation="2.5 0.5 0.9">
      <Shape>
        <Appearance>
          <Material diffuseColor="0.5 0 0.5" transparency="0.4"/>
        </Appearance>
        <IndexedFaceSet coordIndex="0 1 2 -1 0 3 1 -1 0 2 3 -1 1 3 2 -1" solid="true">
          <Coordinate point="0.29 0.29 0.29 0.29 -0.29 -0.29 -0.29 0.29 -0.29 -0.29 -0.29 0.29"/>
        </IndexedFaceSet>
      </Shape>
    </Transform>
    <Transform translation="3.5 0.5 0.9">
      <Billboard axisOfRotation="0 0 1">
        <Shape>
          <Appearance>
            <Material diffuseColor="0 0 1" transparency="0.4"/>
          </Appearance>
          <IndexedFaceSet coordIndex="0 1 2 3 -1" solid="false">
            <Coordinate point="-0.5 0 -0.5 0.5 0 -0.5 0.5 0 0.5 -0.5 0 0.5"/>
          </IndexedFaceSet>
        </Shape>
      </Billboard>
    </Transform>
    <Transform translation="2 2 1.4">
      <Shape>
        <Appearance>
          <Material diffuseColor="0.65 0.65 0.65" transparency="0.85"/>
        </Appearance>
        <Box size="4 4 2.8"/>
      </Shape>
    </Transform>
    <Transform translation="0 0 0">
      <Shape>
        <Appearance>
          <Material diffuseColor="0.65 0.65 0.65" transparency="0"/>
        </Appearance>
        <IndexedFaceSet coordIndex="0 1 2 3 -1 4 5 6 7 -1 8 9 10 11 -1 12 13 14 15 -1 16 17 18 19 -1 20 21 22 23 -1 24 25 26 27 -1 28 29 30 31 -1 32 33 34 35 -1 36 37 38 39 -1 40 41 42 43 -1 44 45 46 47 -1" solid="false">
          <Coordinate point="${Array.from({ length: 48 }, (_, i) => `${i} 0 0`).join(" ")}"/>
        </IndexedFaceSet>
      </Shape>
    </Transform>
  </Scene>
</X3D>`;

const FOG_SCENE = `<?xml version="1.0" encoding="UTF-8"?>
<X3D profile="Immersive" version="3.3">
  <Scene>
    <NavigationInfo type='"FLY" "EXAMINE"'/>
    <Fog color="0.25 0 0.75" fogType="LINEAR" visibilityRange="12.8"/>
    <Transform translation="2 2 1.5">
      <Shape>
        <Appearance>
          <Material diffuseColor="0.65 0.65 0.65" transparency="0.85"/>
        </Appearance>
        <Box size="4 4 3"/>
      </Shape>
    </Transform>
  </Scene>
</X3D>`;

describe("parseScene", () => {
  test("reads the service's document shape with no unsupported tags", () => {
    const parsed = parseScene(MIXED_SCENE);
    expect(parsed.root.tag).toBe("X3D");
    expect(parsed.root.attributes["profile"]).toBe("Immersive");
    expect(parsed.root.attributes["version"]).toBe("3.3");
    expect(parsed.unsupportedTags).toEqual([]);
    const scene = parsed.root.children[0];
    expect(scene.tag).toBe("Scene");
    expect(scene.children[0].tag).toBe("NavigationInfo");
    expect(scene.children[0].attributes["type"]).toBe('"FLY" "EXAMINE"');
  });

  test("rejects malformed XML", () => {
    expect(() => parseScene("<X3D><Scene></X3D>")).toThrow(SceneParseError);
  });

  test("rejects a non-X3D root", () => {
    expect(() => parseScene("<Scene/>")).toThrow(/expected <X3D>/);
  });

  test("flags tags outside the known set but keeps them in the tree", () => {
    const parsed = parseScene(
      `<X3D><Scene><Cylinder radius="1"/><Transform translation="0 0 0"/></Scene></X3D>`,
    );
    expect(parsed.unsupportedTags).toEqual(["Cylinder"]);
    expect(parsed.root.children[0].children.map((c) => c.tag)).toEqual(["Cylinder", "Transform"]);
  });

  test("the known tag set matches the service contract", () => {
    expect([...KNOWN_TAGS].sort()).toEqual([
      "Appearance",
      "Billboard",
      "Box",
      "Coordinate",
      "Fog",
      "IndexedFaceSet",
      "Material",
      "NavigationInfo",
      "Scene",
      "Shape",
      "Sphere",
      "Transform",
      "Viewpoint",
      "X3D",
    ]);
  });
});

describe("collectShapes", () => {
  const shapes = collectShapes(parseScene(MIXED_SCENE));

  test("finds every shape with its world position", () => {
    expect(shapes).toHaveLength(6);
    expect(shapes[0].position).toEqual([0.5, 0.5, 0.9]);
    expect(shapes[4].position).toEqual([2, 2, 1.4]);
  });

  test("accumulates nested transform translations", () => {
    const nested = parseScene(
      `<X3D><Scene><Transform translation="1 2 3"><Transform translation="10 20 30"><Shape><Sphere radius="1"/></Shape></Transform></Transform></Scene></X3D>`,
    );
    expect(collectShapes(nested)[0].position).toEqual([11, 22, 33]);
  });

  test("sphere cells carry radius and nominal 300", () => {
    const sphere = shapes[0];
    expect(sphere.geometry).toBe("Sphere");
    expect(sphere.radius).toBe(0.5);
    expect(sphere.color).toEqual([0.25, 0, 0.75]);
    expect(sphere.transparency).toBe(0.4);
    expect(sphere.thermal).toBe(true);
    expect(sphere.faces).toBe(300);
    expect(sphere.nominal).toBe(300);
    expect(sphere.billboard).toBe(false);
  });

  test("box cells carry size and nominal 12", () => {
    const box = shapes[1];
    expect(box.geometry).toBe("Box");
    expect(box.size).toEqual([1, 1, 1]);
    expect(box.thermal).toBe(true);
    expect(box.nominal).toBe(12);
  });

  test("tetrahedron face sets count their four faces", () => {
    const tetra = shapes[2];
    expect(tetra.geometry).toBe("IndexedFaceSet");
    expect(tetra.points).toHaveLength(4);
    expect(tetra.faces).toBe(4);
    expect(tetra.nominal).toBe(4);
    expect(tetra.thermal).toBe(true);
  });

  test("billboard quads draw one face but are budgeted at two polygons", () => {
    const billboard = shapes[3];
    expect(billboard.billboard).toBe(true);
    expect(billboard.faces).toBe(1);
    expect(billboard.nominal).toBe(2);
    expect(billboard.thermal).toBe(true);
  });

  test("gray geometry is structural, never thermal", () => {
    expect(shapes[4].thermal).toBe(false); // translucent wall box
    expect(shapes[5].thermal).toBe(false); // wireframe edge quads
    expect(shapes[5].faces).toBe(12);
  });
});

describe("summarizeScene", () => {
  test("splits thermal from structural and sums the budget accounting", () => {
    const summary = summarizeScene(parseScene(MIXED_SCENE));
    expect(summary.shapes).toBe(6);
    expect(summary.thermalShapes).toBe(4);
    expect(summary.structuralShapes).toBe(2);
    expect(summary.nominalPolygons).toBe(300 + 12 + 4 + 2);
    expect(summary.structuralPolygons).toBe(12 + 12);
    expect(summary.byGeometry).toEqual({ Sphere: 1, Box: 2, IndexedFaceSet: 3 });
    expect(summary.hasFog).toBe(false);
    expect(summary.viewpoint).toEqual([1, 1, 1.5]);
  });

  test("fog scenes carry no thermal cells", () => {
    const summary = summarizeScene(parseScene(FOG_SCENE));
    expect(summary.hasFog).toBe(true);
    expect(summary.thermalShapes).toBe(0);
    expect(summary.nominalPolygons).toBe(0);
    expect(summary.structuralShapes).toBe(1);
    expect(summary.viewpoint).toBeNull();
  });
});

describe("helpers", () => {
  test("parseVec3 demands exactly three finite numbers", () => {
    expect(parseVec3(" 1  2.5 -3 ")).toEqual([1, 2.5, -3]);
    expect(() => parseVec3("1 2")).toThrow(SceneParseError);
    expect(() => parseVec3("1 2 x")).toThrow(SceneParseError);
  });

  test("checksum is stable for identical text and changes with it", () => {
    expect(sceneChecksum(MIXED_SCENE)).toBe(sceneChecksum(MIXED_SCENE));
    expect(sceneChecksum(MIXED_SCENE)).not.toBe(sceneChecksum(FOG_SCENE));
    expect(sceneChecksum("")).toMatch(/^[0-9a-f]{8}$/);
  });
});
