import { describe, expect, it } from "vitest";

import {
  CoreInterface,
  Pose,
  TeleportResult,
  axisRotation,
  identityPose,
} from "../src/protocol.js";
import {
  LADDER,
  applyTapeStep,
  createSession,
  hudLines,
  inputFrame,
  nextRung,
  stepsFromKeys,
} from "../src/session.js";

/** Records calls; pretends moves translate +z and teleports wrap once. */
class MockCore implements CoreInterface {
  calls: string[] = [];
  teleportWord: [number, number, number] = [0, 0, 0];

  async hello() {
    return { abi: "solmarch-embed/1", functions: [] };
  }
  async observerStep(pose: Pose): Promise<Pose> {
    this.calls.push("move");
    const out = [...pose];
    out[2] += 0.1;
    return out;
  }
  async rotateObserver(pose: Pose): Promise<Pose> {
    this.calls.push("turn");
    return [...pose];
  }
  async teleport(pose: number[]): Promise<TeleportResult> {
    this.calls.push("teleport");
    return { pose: [...pose], word: this.teleportWord };
  }
  async marchBatch(): Promise<number[]> {
    return [];
  }
  async renderTile(): Promise<{ rows: [number, number]; rgb_base64: string }> {
    return { rows: [0, 0], rgb_base64: "" };
  }
}

describe("key mapping", () => {
  it("maps WASD to camera axes and normalizes nothing by itself", () => {
    const steps = stepsFromKeys(new Set(["w"]), 0.05, 1.2);
    expect(steps).toEqual([{ move: [0, 0, -1], dt: 0.05 }]);
  });

  it("combines held movement keys componentwise", () => {
    const steps = stepsFromKeys(new Set(["w", "d"]), 0.05, 1.2);
    expect(steps).toEqual([{ move: [1, 0, -1], dt: 0.05 }]);
  });

  it("emits turns before moves, scaled by the turn rate", () => {
    const steps = stepsFromKeys(new Set(["w", "ArrowLeft"]), 0.5, 2.0);
    expect(steps[0]).toEqual({ turn: { axis: "y", angle: 1.0 } });
    expect(steps[1]).toEqual({ move: [0, 0, -1], dt: 0.5 });
  });

  it("opposite keys cancel to no motion", () => {
    expect(stepsFromKeys(new Set(["w", "s"]), 0.05, 1.2)).toEqual([]);
  });
});

describe("input frame", () => {
  it("leaves the state untouched with no keys held", async () => {
    const core = new MockCore();
    const session = createSession("dragon-plane");
    const out = await inputFrame(session, new Set(), 0.05, core);
    expect(out).toBe(session);
    expect(core.calls).toEqual([]);
  });

  it("applies turn, then move, then teleport on quotient presets", async () => {
    const core = new MockCore();
    const session = createSession("lattice-balls");
    await inputFrame(session, new Set(["w", "ArrowLeft"]), 0.05, core);
    expect(core.calls).toEqual(["turn", "teleport", "move", "teleport"]);
  });

  it("counts wraps when the teleport word is nontrivial", async () => {
    const core = new MockCore();
    core.teleportWord = [0, 0, 1];
    const session = createSession("lattice-balls");
    const out = await applyTapeStep(session, { move: [0, 0, -1], dt: 0.05 }, core);
    expect(out.wrapCount).toBe(1);
  });

  it("does not teleport outside quotient presets", async () => {
    const core = new MockCore();
    await inputFrame(createSession("dragon-plane"), new Set(["w"]), 0.05, core);
    expect(core.calls).toEqual(["move"]);
  });

  it("resets the resolution ladder on input", async () => {
    const core = new MockCore();
    const session = { ...createSession("dragon-plane"), rung: 2 };
    const out = await inputFrame(session, new Set(["w"]), 0.05, core);
    expect(out.rung).toBe(0);
  });
});

describe("ladder policy", () => {
  it("climbs while idle and saturates at the top rung", () => {
    expect(nextRung(0, false, false)).toBe(1);
    expect(nextRung(1, false, false)).toBe(2);
    expect(nextRung(2, false, false)).toBe(2);
    expect(LADDER[2]).toBe(256);
  });

  it("drops to the bottom rung on input", () => {
    expect(nextRung(2, true, false)).toBe(0);
  });

  it("holds the rung when over budget", () => {
    expect(nextRung(1, false, true)).toBe(1);
  });
});

describe("hud", () => {
  it("shows position, z-level, wraps, preset and the key legend", () => {
    const session = createSession("dragon-plane");
    const lines = hudLines(session).join("\n");
    expect(lines).toContain("position: (0.000, 0.000, 2.000)");
    expect(lines).toContain("z-level: 2.000");
    expect(lines).toContain("wraps: 0");
    expect(lines).toContain("dragon-plane");
    expect(lines).toContain("WASD");
  });

  it("surfaces core errors", () => {
    const session = { ...createSession("dragon-plane"), error: "boom" };
    expect(hudLines(session).join("\n")).toContain("core error: boom");
  });
});

describe("rotations", () => {
  it("axisRotation matches the analytic matrices", () => {
    const r = axisRotation("z", Math.PI / 2);
    expect(r[0]).toBeCloseTo(0, 12);
    expect(r[1]).toBeCloseTo(-1, 12);
    expect(r[3]).toBeCloseTo(1, 12);
    expect(identityPose([1, 2, 3]).slice(0, 3)).toEqual([1, 2, 3]);
  });
});
