/**
 * Minimal painter's-algorithm renderer for the service's scene documents.
 *
 * The emitted node set is tiny (spheres, boxes, indexed face sets), so shapes
 * are projected through a pinhole camera onto a 2D canvas: spheres become
 * discs, boxes become depth-scaled rectangles, face sets become filled
 * polygons. Projection is pure; only drawShapes touches a canvas context.
 */

import type { Camera } from "./camera.js";
import { basis } from "./camera.js";
import type { ShapeInfo, Vec3 } from "./x3d.js";

export interface Viewport {
  width: number;
  height: number;
}

export interface ProjectedPoint {
  x: number;
  y: number;
  /** Distance along the camera's forward axis, in meters. */
  depth: number;
  /** Pixels per meter at this depth. */
  scale: number;
}

export type DrawItem =
  | { kind: "disc"; x: number; y: number; r: number; fill: string; depth: number }
  | { kind: "rect"; x: number; y: number; w: number; h: number; fill: string; depth: number }
  | { kind: "poly"; points: [number, number][]; fill: string; depth: number };

const NEAR_PLANE = 0.05;

export function projectPoint(cam: Camera, viewport: Viewport, p: Vec3): ProjectedPoint | null {
  const { forward, right, up } = basis(cam);
  const dx = p[0] - cam.position[0];
  const dy = p[1] - cam.position[1];
  const dz = p[2] - cam.position[2];
  const depth = dx * forward[0] + dy * forward[1] + dz * forward[2];
  if (depth <= NEAR_PLANE) return null;
  const focal = viewport.height / 2 / Math.tan(cam.fovY / 2);
  const sx = dx * right[0] + dy * right[1] + dz * right[2];
  const sy = dx * up[0] + dy * up[1] + dz * up[2];
  return {
    x: viewport.width / 2 + (focal * sx) / depth,
    y: viewport.height / 2 - (focal * sy) / depth,
    depth,
    scale: focal / depth,
  };
}

export function cssColor(rgb: Vec3 | null, transparency: number): string {
  const [r, g, b] = rgb ?? [0.8, 0.8, 0.8];
  const alpha = Math.min(1, Math.max(0, 1 - transparency));
  const to255 = (v: number) => Math.round(Math.min(1, Math.max(0, v)) * 255);
  return `rgba(${to255(r)}, ${to255(g)}, ${to255(b)}, ${alpha})`;
}

export function projectShapes(shapes: ShapeInfo[], cam: Camera, viewport: Viewport): DrawItem[] {
  const items: DrawItem[] = [];
  for (const shape of shapes) {
    const fill = cssColor(shape.color, shape.transparency);
    if (shape.geometry === "Sphere") {
      const center = projectPoint(cam, viewport, shape.position);
      if (center === null) continue;
      items.push({
        kind: "disc",
        x: center.x,
        y: center.y,
        r: (shape.radius ?? 1) * center.scale,
        fill,
        depth: center.depth,
      });
    } else if (shape.geometry === "Box") {
      const center = projectPoint(cam, viewport, shape.position);
      if (center === null) continue;
      const size = shape.size ?? [2, 2, 2];
      // Fallback footprint: the box's widest horizontal extent by its height.
      const w = Math.max(size[0], size[1]) * center.scale;
      const h = size[2] * center.scale;
      items.push({
        kind: "rect",
        x: center.x - w / 2,
        y: center.y - h / 2,
        w,
        h,
        fill,
        depth: center.depth,
      });
    } else {
      items.push(...projectFaceSet(shape, cam, viewport, fill));
    }
  }
  // Painter's order: far shapes first so near ones draw over them.
  items.sort((a, b) => b.depth - a.depth);
  return items;
}

function projectFaceSet(shape: ShapeInfo, cam: Camera, viewport: Viewport, fill: string): DrawItem[] {
  const points = shape.points ?? [];
  const coordIndex = shape.coordIndex ?? [];
  const projected: (ProjectedPoint | null)[] = points.map((p) =>
    projectPoint(cam, viewport, [
      shape.position[0] + p[0],
      shape.position[1] + p[1],
      shape.position[2] + p[2],
    ]),
  );
  const items: DrawItem[] = [];
  let face: number[] = [];
  const flush = () => {
    if (face.length >= 3) {
      const corners = face.map((i) => projected[i]);
      if (corners.every((c): c is ProjectedPoint => c !== null)) {
        items.push({
          kind: "poly",
          points: corners.map((c) => [c.x, c.y] as [number, number]),
          fill,
          depth: corners.reduce((acc, c) => acc + c.depth, 0) / corners.length,
        });
      }
    }
    face = [];
  };
  for (const idx of coordIndex) {
    if (idx === -1) flush();
    else if (idx >= 0 && idx < projected.length) face.push(idx);
  }
  flush();
  return items;
}

export function drawShapes(ctx: CanvasRenderingContext2D, items: DrawItem[], viewport: Viewport): void {
  ctx.clearRect(0, 0, viewport.width, viewport.height);
  for (const item of items) {
    ctx.fillStyle = item.fill;
    if (item.kind === "disc") {
      ctx.beginPath();
      ctx.arc(item.x, item.y, item.r, 0, 2 * Math.PI);
      ctx.fill();
    } else if (item.kind === "rect") {
      ctx.fillRect(item.x, item.y, item.w, item.h);
    } else {
      ctx.beginPath();
      ctx.moveTo(item.points[0][0], item.points[0][1]);
      for (let i = 1; i < item.points.length; i++) ctx.lineTo(item.points[i][0], item.points[i][1]);
      ctx.closePath();
      ctx.fill();
    }
  }
}
