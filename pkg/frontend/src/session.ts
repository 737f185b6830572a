/**
 * Session state and navigation policy, independent of DOM and transport.
 *
 * All geometry lives behind the CoreInterface; this module owns only which
 * calls to make and in which order.  The per-step order (turn, then move,
 * then teleport on quotient presets) matches the CLI replay harness so a
 * recorded input tape produces identical observer states on both paths.
 */

import { CoreInterface, Pose, TapeStep, axisRotation, identityPose } from "./protocol.js";

export const LADDER = [64, 128, 256] as const;

export const PRESET_KEYS: Record<string, string> = {
  "1": "dragon-plane",
  "2": "sandwich",
  "3": "lattice-balls",
  "4": "lattice-pillars",
  "5": "sphere-gallery",
};

const QUOTIENT_PRESETS = new Set(["lattice-balls", "lattice-pillars"]);

export const DEFAULT_POSES: Record<string, Pose> = {
  "dragon-plane": identityPose([0, 0, 2]),
  "sandwich": [0, 0, 0, 0, 0, -1, -1, 0, 0, 0, 1, 0],
  "lattice-balls": [0, 0, 0.48, 0, 0, -1, -1, 0, 0, 0, 1, 0],
  "lattice-pillars": [0.685, 0.024, 0.45, 0, 0, -1, -1, 0, 0, 0, 1, 0],
  "sphere-gallery": identityPose([0, 0, 2.4]),
};

export interface SessionState {
  preset: string;
  pose: Pose;
  speed: number;
  turnRate: number; // radians per second
  rung: number; // index into LADDER
  wrapCount: number;
  frameMs: number;
  error: string | null;
}

export function createSession(preset = "dragon-plane", pose?: Pose): SessionState {
  if (!(preset in DEFAULT_POSES)) throw new Error(`unknown preset ${preset}`);
  return {
    preset,
    pose: [...(pose ?? DEFAULT_POSES[preset])],
    speed: 1.0,
    turnRate: 1.2,
    rung: 0,
    wrapCount: 0,
    frameMs: 0,
    error: null,
  };
}

export function isQuotient(preset: string): boolean {
  return QUOTIENT_PRESETS.has(preset);
}

/** Movement keys map to camera-frame axes (x right, y up, z backward). */
export const MOVE_KEYS: Record<string, [number, number, number]> = {
  w: [0, 0, -1],
  s: [0, 0, 1],
  a: [-1, 0, 0],
  d: [1, 0, 0],
  r: [0, 1, 0],
  f: [0, -1, 0],
};

export const TURN_KEYS: Record<string, { axis: "x" | "y" | "z"; sign: number }> = {
  ArrowLeft: { axis: "y", sign: 1 },
  ArrowRight: { axis: "y", sign: -1 },
  ArrowUp: { axis: "x", sign: 1 },
  ArrowDown: { axis: "x", sign: -1 },
  q: { axis: "z", sign: 1 },
  e: { axis: "z", sign: -1 },
};

/** Translate one frame's held keys into tape steps (turns, then one move). */
export function stepsFromKeys(held: ReadonlySet<string>, dt: number, turnRate: number): TapeStep[] {
  const steps: TapeStep[] = [];
  for (const [key, turn] of Object.entries(TURN_KEYS)) {
    if (held.has(key)) steps.push({ turn: { axis: turn.axis, angle: turn.sign * turnRate * dt } });
  }
  const dir: [number, number, number] = [0, 0, 0];
  let moving = false;
  for (const [key, axis] of Object.entries(MOVE_KEYS)) {
    if (held.has(key)) {
      moving = true;
      dir[0] += axis[0];
      dir[1] += axis[1];
      dir[2] += axis[2];
    }
  }
  if (moving && (dir[0] !== 0 || dir[1] !== 0 || dir[2] !== 0)) {
    steps.push({ move: dir, dt });
  }
  return steps;
}

/** Max-norm deviation of the pose's frame from orthonormality. */
export function frameDrift(pose: Pose): number {
  let worst = 0;
  for (let i = 0; i < 3; i++) {
    for (let j = 0; j < 3; j++) {
      let dot = 0;
      for (let k = 0; k < 3; k++) dot += pose[3 + 3 * k + i] * pose[3 + 3 * k + j];
      worst = Math.max(worst, Math.abs(dot - (i === j ? 1 : 0)));
    }
  }
  return worst;
}

const FRAME_TOLERANCE = 1e-6;

function checkedPose(pose: Pose): Pose {
  const drift = frameDrift(pose);
  if (drift > FRAME_TOLERANCE) {
    throw new Error(`observer frame degraded: |q^T q - I| = ${drift.toExponential(2)}`);
  }
  return pose;
}

/** Apply one tape step: turn, then move, then quotient teleport.  The frame
 * is re-asserted orthonormal after every core call. */
export async function applyTapeStep(
  session: SessionState,
  step: TapeStep,
  core: CoreInterface,
  odeDt = 1e-3,
): Promise<SessionState> {
  let pose = session.pose;
  let wraps = session.wrapCount;
  if (step.turn) {
    pose = checkedPose(
      await core.rotateObserver(pose, axisRotation(step.turn.axis, step.turn.angle)),
    );
  }
  if (step.move) {
    pose = checkedPose(
      await core.observerStep(pose, step.move, session.speed, step.dt ?? 0.05, odeDt),
    );
  }
  if (isQuotient(session.preset)) {
    const out = await core.teleport(pose);
    pose = checkedPose(out.pose);
    if (out.word.some((n) => n !== 0)) wraps += 1;
  }
  return { ...session, pose, wrapCount: wraps };
}

/** Drive one input frame; no keys held leaves the state untouched. */
export async function inputFrame(
  session: SessionState,
  held: ReadonlySet<string>,
  dt: number,
  core: CoreInterface,
): Promise<SessionState> {
  const steps = stepsFromKeys(held, dt, session.turnRate);
  if (steps.length === 0) return session;
  let next = { ...session, rung: 0 }; // motion resets the resolution ladder
  for (const step of steps) {
    next = await applyTapeStep(next, step, core);
  }
  return next;
}

/** Ladder policy: climb while idle, hold when over budget, reset on input. */
export function nextRung(current: number, inputActive: boolean, overBudget: boolean): number {
  if (inputActive) return 0;
  if (overBudget) return current;
  return Math.min(current + 1, LADDER.length - 1);
}

export function hudLines(session: SessionState): string[] {
  const [x, y, z] = session.pose;
  const lines = [
    `preset: ${session.preset}`,
    `position: (${x.toFixed(3)}, ${y.toFixed(3)}, ${z.toFixed(3)})`,
    `z-level: ${z.toFixed(3)}`,
    `wraps: ${session.wrapCount}`,
    `frame: ${session.frameMs.toFixed(1)} ms @ ${LADDER[session.rung]}px`,
    "keys: WASD move, R/F rise/sink, arrows turn, Q/E roll, 1-5 presets",
  ];
  if (session.error) lines.push(`core error: ${session.error}`);
  return lines;
}
