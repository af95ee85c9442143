/**
 * Parsing and accounting for the X3D documents the scene service emits.
 *
 * The node set is deliberately tiny, so the viewer consumes the XML directly:
 * parse to a plain tree, then extract drawable shapes with their world-space
 * placement, color, and polygon accounting.
 */

export interface SceneNode {
  tag: string;
  attributes: Record<string, string>;
  children: SceneNode[];
}

export interface ParsedScene {
  /** The <X3D> element. */
  root: SceneNode;
  /** Tags outside the known set, kept in the tree but flagged for fallback handling. */
  unsupportedTags: string[];
}

export const KNOWN_TAGS: ReadonlySet<string> = new Set([
  "X3D",
  "Scene",
  "NavigationInfo",
  "Viewpoint",
  "Fog",
  "Transform",
  "Billboard",
  "Shape",
  "Appearance",
  "Material",
  "Sphere",
  "Box",
  "IndexedFaceSet",
  "Coordinate",
]);

/** Budget accounting per primitive kind, matching the service's X-Nominal-Polygons. */
export const NOMINAL_POLYGONS = {
  sphere: 300,
  box: 12,
  tetrahedron: 4,
  billboard: 2,
} as const;

export class SceneParseError extends Error {
  constructor(message: string) {
    super(message);
    this.name = "SceneParseError";
  }
}

/** Minimal DOMParser facade so non-browser callers can inject an implementation. */
export interface XmlParserLike {
  parseFromString(text: string, mimeType: string): Document;
}

export type Vec3 = [number, number, number];

export type GeometryKind = "Sphere" | "Box" | "IndexedFaceSet";

export interface ShapeInfo {
  geometry: GeometryKind;
  /** World-space center: cumulative translation of enclosing Transforms. */
  position: Vec3;
  color: Vec3 | null;
  transparency: number;
  /** True when the shape sits under a Billboard group (always faces the camera). */
  billboard: boolean;
  /** True for field cells (colored), false for structural gray geometry. */
  thermal: boolean;
  /** Polygon count of the geometry as drawn. */
  faces: number;
  /** Budget accounting value; summed over thermal shapes it matches the service header. */
  nominal: number;
  radius?: number;
  size?: Vec3;
  /** IndexedFaceSet vertices in local coordinates. */
  points?: Vec3[];
  coordIndex?: number[];
}

export interface SceneSummary {
  shapes: number;
  thermalShapes: number;
  structuralShapes: number;
  /** Sum of nominal accounting over thermal shapes only. */
  nominalPolygons: number;
  structuralPolygons: number;
  byGeometry: Record<GeometryKind, number>;
  hasFog: boolean;
  viewpoint: Vec3 | null;
}

export function parseScene(xml: string, parser?: XmlParserLike): ParsedScene {
  const impl = parser ?? new DOMParser();
  const doc = impl.parseFromString(xml, "application/xml");
  const errors = doc.getElementsByTagName("parsererror");
  if (errors.length > 0) {
    throw new SceneParseError(errors[0].textContent?.trim() ?? "malformed XML");
  }
  const rootEl = doc.documentElement;
  if (!rootEl || rootEl.tagName !== "X3D") {
    throw new SceneParseError(`expected <X3D> document root, got <${rootEl?.tagName ?? "none"}>`);
  }
  const unsupported = new Set<string>();
  const root = toNode(rootEl, unsupported);
  return { root, unsupportedTags: [...unsupported].sort() };
}

function toNode(el: Element, unsupported: Set<string>): SceneNode {
  if (!KNOWN_TAGS.has(el.tagName)) unsupported.add(el.tagName);
  const attributes: Record<string, string> = {};
  for (const attr of Array.from(el.attributes)) attributes[attr.name] = attr.value;
  const children: SceneNode[] = [];
  for (const child of Array.from(el.children)) children.push(toNode(child, unsupported));
  return { tag: el.tagName, attributes, children };
}

export function parseVec3(raw: string): Vec3 {
  const parts = raw.trim().split(/\s+/).map(Number);
  if (parts.length !== 3 || parts.some((v) => !Number.isFinite(v))) {
    throw new SceneParseError(`expected three finite numbers, got "${raw}"`);
  }
  return [parts[0], parts[1], parts[2]];
}

function parseFloats(raw: string): number[] {
  if (raw.trim() === "") return [];
  const values = raw.trim().split(/\s+/).map(Number);
  if (values.some((v) => !Number.isFinite(v))) {
    throw new SceneParseError(`non-numeric value list: "${raw.slice(0, 40)}..."`);
  }
  return values;
}

function findChild(node: SceneNode, tag: string): SceneNode | null {
  return node.children.find((c) => c.tag === tag) ?? null;
}

export function findFirst(node: SceneNode, tag: string): SceneNode | null {
  if (node.tag === tag) return node;
  for (const child of node.children) {
    const hit = findFirst(child, tag);
    if (hit !== null) return hit;
  }
  return null;
}

/**
 * Field cells carry the value palette (red-to-blue blend, green channel zero);
 * walls and other structural geometry are gray with equal channels.
 */
function isThermalColor(color: Vec3 | null): boolean {
  if (color === null) return false;
  return color[1] === 0 && (color[0] > 0 || color[2] > 0);
}

export function collectShapes(parsed: ParsedScene): ShapeInfo[] {
  const scene = findChild(parsed.root, "Scene");
  if (scene === null) return [];
  const shapes: ShapeInfo[] = [];
  const walk = (node: SceneNode, offset: Vec3, billboard: boolean): void => {
    let at = offset;
    if (node.tag === "Transform") {
      const translation = node.attributes["translation"];
      if (translation !== undefined) {
        const t = parseVec3(translation);
        at = [offset[0] + t[0], offset[1] + t[1], offset[2] + t[2]];
      }
    }
    const inBillboard = billboard || node.tag === "Billboard";
    if (node.tag === "Shape") {
      const info = shapeInfo(node, at, inBillboard);
      if (info !== null) shapes.push(info);
      return;
    }
    for (const child of node.children) walk(child, at, inBillboard);
  };
  for (const child of scene.children) walk(child, [0, 0, 0], false);
  return shapes;
}

function shapeInfo(shape: SceneNode, position: Vec3, billboard: boolean): ShapeInfo | null {
  let color: Vec3 | null = null;
  let transparency = 0;
  const appearance = findChild(shape, "Appearance");
  const material = appearance === null ? null : findChild(appearance, "Material");
  if (material !== null) {
    const diffuse = material.attributes["diffuseColor"];
    if (diffuse !== undefined) color = parseVec3(diffuse);
    const t = material.attributes["transparency"];
    if (t !== undefined) transparency = Number(t);
  }
  const base = {
    position,
    color,
    transparency,
    billboard,
    thermal: isThermalColor(color),
  };

  const sphere = findChild(shape, "Sphere");
  if (sphere !== null) {
    return {
      ...base,
      geometry: "Sphere",
      radius: Number(sphere.attributes["radius"] ?? "1"),
      faces: NOMINAL_POLYGONS.sphere,
      nominal: NOMINAL_POLYGONS.sphere,
    };
  }
  const box = findChild(shape, "Box");
  if (box !== null) {
    return {
      ...base,
      geometry: "Box",
      size: parseVec3(box.attributes["size"] ?? "2 2 2"),
      faces: NOMINAL_POLYGONS.box,
      nominal: NOMINAL_POLYGONS.box,
    };
  }
  const ifs = findChild(shape, "IndexedFaceSet");
  if (ifs !== null) {
    const coordIndex = parseFloats(ifs.attributes["coordIndex"] ?? "");
    const coordinate = findChild(ifs, "Coordinate");
    const flat = coordinate === null ? [] : parseFloats(coordinate.attributes["point"] ?? "");
    const points: Vec3[] = [];
    for (let i = 0; i + 2 < flat.length; i += 3) points.push([flat[i], flat[i + 1], flat[i + 2]]);
    const faces = coordIndex.filter((v) => v === -1).length;
    // Camera-facing quads are budgeted at two polygons even though they are
    // emitted as a single face.
    const nominal = billboard ? NOMINAL_POLYGONS.billboard : faces;
    return { ...base, geometry: "IndexedFaceSet", points, coordIndex, faces, nominal };
  }
  return null;
}

export function summarizeScene(parsed: ParsedScene): SceneSummary {
  const shapes = collectShapes(parsed);
  const summary: SceneSummary = {
    shapes: shapes.length,
    thermalShapes: 0,
    structuralShapes: 0,
    nominalPolygons: 0,
    structuralPolygons: 0,
    byGeometry: { Sphere: 0, Box: 0, IndexedFaceSet: 0 },
    hasFog: findFirst(parsed.root, "Fog") !== null,
    viewpoint: null,
  };
  for (const shape of shapes) {
    summary.byGeometry[shape.geometry] += 1;
    if (shape.thermal) {
      summary.thermalShapes += 1;
      summary.nominalPolygons += shape.nominal;
    } else {
      summary.structuralShapes += 1;
      summary.structuralPolygons += shape.faces;
    }
  }
  const viewpoint = findFirst(parsed.root, "Viewpoint");
  if (viewpoint !== null && viewpoint.attributes["position"] !== undefined) {
    summary.viewpoint = parseVec3(viewpoint.attributes["position"]);
  }
  return summary;
}

/** FNV-1a hash of the document text; cheap change detection between fetches. */
export function sceneChecksum(xml: string): string {
  let hash = 0x811c9dc5;
  for (let i = 0; i < xml.length; i++) {
    hash ^= xml.charCodeAt(i);
    hash = Math.imul(hash, 0x01000193) >>> 0;
  }
  return hash.toString(16).padStart(8, "0");
}
