/**
 * Canvas explorer: keyboard input drives the shared session logic, pixels
 * come back from the engine as render tiles at the current ladder rung, and
 * everything upstream of the canvas is the same code the tests replay.
 *
 * URL parameters: ?preset=<name>&pose=x,y,z,q00,...,q22 seed the start.
 */

import {
  CoreInterface,
  Pose,
  RenderTileResult,
  TeleportResult,
  decodeBase64,
} from "../protocol.js";
import {
  DEFAULT_POSES,
  LADDER,
  PRESET_KEYS,
  SessionState,
  createSession,
  hudLines,
  inputFrame,
  nextRung,
} from "../session.js";

class FetchCore implements CoreInterface {
  private async call<T>(fn: string, args: Record<string, unknown>): Promise<T> {
    const res = await fetch("/api/call", {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ fn, args }),
    });
    const body = (await res.json()) as { ok: boolean; result?: T; error?: string };
    if (!body.ok) throw new Error(body.error ?? "engine error");
    return body.result as T;
  }

  hello() {
    return this.call<{ abi: string; functions: string[] }>("hello", {});
  }
  observerStep(pose: Pose, localDir: number[], speed: number, dt: number, odeDt = 1e-3) {
    return this.call<Pose>("observer_step", {
      pose, local_dir: localDir, speed, dt, ode_dt: odeDt,
    });
  }
  rotateObserver(pose: Pose, rotation: number[]) {
    return this.call<Pose>("rotate_observer", { pose, rotation });
  }
  teleport(poseOrPoint: number[]) {
    return this.call<TeleportResult>("teleport", { pose_or_point: poseOrPoint });
  }
  marchBatch(rays: number[], preset: string, h?: number) {
    return this.call<number[]>("march_batch", { rays, preset, h: h ?? null });
  }
  renderTile(pose: Pose, preset: string, width: number, height: number,
             row0: number, row1: number, h?: number) {
    return this.call<RenderTileResult>("render_tile", {
      pose, preset, width, height, row0, row1, h: h ?? null,
    });
  }
}

const TILE_ROWS = 16;

async function renderFrame(core: CoreInterface, session: SessionState,
                           ctx: CanvasRenderingContext2D): Promise<void> {
  const size = LADDER[session.rung];
  const tiles: Promise<RenderTileResult>[] = [];
  for (let r0 = 0; r0 < size; r0 += TILE_ROWS) {
    tiles.push(core.renderTile(session.pose, session.preset, size, size,
                               r0, Math.min(r0 + TILE_ROWS, size)));
  }
  const image = new ImageData(size, size);
  for (const tile of await Promise.all(tiles)) {
    const bytes = decodeBase64(tile.rgb_base64);
    const [r0, r1] = tile.rows;
    for (let i = 0, p = r0 * size * 4; i < (r1 - r0) * size; i++) {
      image.data[p++] = bytes[3 * i];
      image.data[p++] = bytes[3 * i + 1];
      image.data[p++] = bytes[3 * i + 2];
      image.data[p++] = 255;
    }
  }
  const buffer = document.createElement("canvas");
  buffer.width = size;
  buffer.height = size;
  buffer.getContext("2d")!.putImageData(image, 0, 0);
  ctx.imageSmoothingEnabled = false;
  ctx.drawImage(buffer, 0, 0, ctx.canvas.width, ctx.canvas.height);
}

function parseStart(): { preset: string; pose?: Pose } {
  const params = new URLSearchParams(window.location.search);
  const preset = params.get("preset") ?? "dragon-plane";
  const poseText = params.get("pose");
  if (poseText) {
    const pose = poseText.split(",").map(Number);
    if (pose.length === 12 && pose.every(Number.isFinite)) return { preset, pose };
  }
  return { preset };
}

async function run(): Promise<void> {
  const canvas = document.getElementById("view") as HTMLCanvasElement;
  const hud = document.getElementById("hud") as HTMLDivElement;
  const banner = document.getElementById("banner") as HTMLDivElement;
  const ctx = canvas.getContext("2d")!;
  const core = new FetchCore();
  await core.hello();

  const start = parseStart();
  let session = createSession(start.preset in DEFAULT_POSES ? start.preset : "dragon-plane",
                              start.pose);
  const held = new Set<string>();
  window.addEventListener("keydown", (ev) => {
    const key = ev.key.length === 1 ? ev.key.toLowerCase() : ev.key;
    if (key in PRESET_KEYS) {
      session = createSession(PRESET_KEYS[key]);
      return;
    }
    held.add(key);
  });
  window.addEventListener("keyup", (ev) => {
    held.delete(ev.key.length === 1 ? ev.key.toLowerCase() : ev.key);
  });

  let last = performance.now();
  let busy = false;
  const FRAME_BUDGET_MS = 250;

  async function tick(now: number): Promise<void> {
    const dt = Math.min((now - last) / 1000, 0.1);
    last = now;
    if (!busy) {
      busy = true;
      try {
        const inputActive = held.size > 0;
        session = await inputFrame(session, held, dt, core);
        const t0 = performance.now();
        await renderFrame(core, session, ctx);
        session.frameMs = performance.now() - t0;
        session.rung = nextRung(session.rung, inputActive,
                                session.frameMs > FRAME_BUDGET_MS);
        session.error = null;
        banner.style.display = "none";
      } catch (err) {
        session.error = String(err);
        banner.textContent = `engine call failed: ${session.error}`;
        banner.style.display = "block";
      } finally {
        busy = false;
      }
    }
    hud.textContent = hudLines(session).join("\n");
    requestAnimationFrame(tick);
  }

  requestAnimationFrame(tick);
}

void run();
