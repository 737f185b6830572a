/**
 * Embedding ABI (solmarch-embed/1), shared by the node bridge and the browser.
 *
 * An observer pose is 12 float64s: position (x, y, z) followed by the 3x3
 * camera frame, row-major.  All numbers cross process boundaries as JSON
 * with shortest round-trip decimals, so values survive exactly.
 */

export const ABI = "solmarch-embed/1";

export type Pose = number[]; // length 12

export interface TeleportResult {
  pose: number[];
  word: [number, number, number];
}

export interface RenderTileResult {
  rows: [number, number];
  rgb_base64: string;
}

/** One step of a navigation tape; identical to the CLI replay format. */
export interface TapeStep {
  turn?: { axis: "x" | "y" | "z"; angle: number };
  move?: [number, number, number];
  dt?: number;
}

export interface Tape {
  preset: string;
  h?: number;
  pose?: Pose;
  speed?: number;
  ode_dt?: number;
  steps: TapeStep[];
}

/** The calls the UI is allowed to make; every implementation must proxy the
 * same engine so states and pixels are identical everywhere. */
export interface CoreInterface {
  hello(): Promise<{ abi: string; functions: string[] }>;
  observerStep(pose: Pose, localDir: number[], speed: number, dt: number,
               odeDt?: number): Promise<Pose>;
  rotateObserver(pose: Pose, rotation: number[]): Promise<Pose>;
  teleport(poseOrPoint: number[]): Promise<TeleportResult>;
  marchBatch(rays: number[], preset: string, h?: number): Promise<number[]>;
  renderTile(pose: Pose, preset: string, width: number, height: number,
             row0: number, row1: number, h?: number): Promise<RenderTileResult>;
}

export function identityPose(position: [number, number, number] = [0, 0, 0]): Pose {
  return [...position, 1, 0, 0, 0, 1, 0, 0, 0, 1];
}

/** Row-major rotation about a camera axis; must match the CLI replay math. */
export function axisRotation(axis: "x" | "y" | "z", angle: number): number[] {
  const c = Math.cos(angle);
  const s = Math.sin(angle);
  switch (axis) {
    case "x":
      return [1, 0, 0, 0, c, -s, 0, s, c];
    case "y":
      return [c, 0, s, 0, 1, 0, -s, 0, c];
    case "z":
      return [c, -s, 0, s, c, 0, 0, 0, 1];
  }
}

export function decodeBase64(data: string): Uint8Array {
  if (typeof atob === "function") {
    const bin = atob(data);
    const out = new Uint8Array(bin.length);
    for (let i = 0; i < bin.length; i++) out[i] = bin.charCodeAt(i);
    return out;
  }
  return new Uint8Array(Buffer.from(data, "base64"));
}
