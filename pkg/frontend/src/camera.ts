/**
 * Fly camera over the scene's z-up world coordinates.
 *
 * Pure value type plus movement helpers; no collision, free exploration.
 */

export interface Camera {
  position: [number, number, number];
  /** Heading in radians about +z; 0 looks along +x. */
  yaw: number;
  /** Elevation in radians; positive looks up. Clamped short of the poles. */
  pitch: number;
  /** Vertical field of view in radians. */
  fovY: number;
}

export interface CameraBasis {
  forward: [number, number, number];
  right: [number, number, number];
  up: [number, number, number];
}

const PITCH_LIMIT = Math.PI / 2 - 0.01;

function assertFinite(values: readonly number[], what: string): void {
  if (values.some((v) => !Number.isFinite(v))) {
    throw new RangeError(`${what} must be finite, got ${values.join(", ")}`);
  }
}

export function makeCamera(
  position: [number, number, number],
  yaw = 0,
  pitch = 0,
  fovY = Math.PI / 3,
): Camera {
  assertFinite(position, "camera position");
  assertFinite([yaw, pitch, fovY], "camera angles");
  return {
    position: [...position],
    yaw,
    pitch: clampPitch(pitch),
    fovY,
  };
}

function clampPitch(pitch: number): number {
  return Math.min(PITCH_LIMIT, Math.max(-PITCH_LIMIT, pitch));
}

export function basis(cam: Camera): CameraBasis {
  const cp = Math.cos(cam.pitch);
  const forward: [number, number, number] = [
    cp * Math.cos(cam.yaw),
    cp * Math.sin(cam.yaw),
    Math.sin(cam.pitch),
  ];
  const right: [number, number, number] = [Math.sin(cam.yaw), -Math.cos(cam.yaw), 0];
  const up: [number, number, number] = [
    right[1] * forward[2] - right[2] * forward[1],
    right[2] * forward[0] - right[0] * forward[2],
    right[0] * forward[1] - right[1] * forward[0],
  ];
  return { forward, right, up };
}

/** Step along the camera's own axes (forward/right) and the world vertical. */
export function moveCamera(cam: Camera, forwardStep: number, rightStep: number, upStep: number): Camera {
  assertFinite([forwardStep, rightStep, upStep], "camera step");
  const { forward, right } = basis(cam);
  const position: [number, number, number] = [
    cam.position[0] + forward[0] * forwardStep + right[0] * rightStep,
    cam.position[1] + forward[1] * forwardStep + right[1] * rightStep,
    cam.position[2] + forward[2] * forwardStep + right[2] * rightStep + upStep,
  ];
  return { ...cam, position };
}

export function turnCamera(cam: Camera, dYaw: number, dPitch: number): Camera {
  assertFinite([dYaw, dPitch], "camera turn");
  return { ...cam, yaw: cam.yaw + dYaw, pitch: clampPitch(cam.pitch + dPitch) };
}

export function lookAt(
  position: [number, number, number],
  target: [number, number, number],
  fovY = Math.PI / 3,
): Camera {
  assertFinite(position, "camera position");
  assertFinite(target, "camera target");
  const dx = target[0] - position[0];
  const dy = target[1] - position[1];
  const dz = target[2] - position[2];
  const yaw = Math.atan2(dy, dx);
  const pitch = Math.atan2(dz, Math.hypot(dx, dy));
  return makeCamera(position, yaw, pitch, fovY);
}

export function defaultCamera(): Camera {
  return lookAt([-8, -8, 5], [4, 4, 1.5]);
}
