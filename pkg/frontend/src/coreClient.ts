/**
 * Node-side core client: owns one engine subprocess speaking the embedding
 * protocol over stdio (line-delimited JSON, matched by request id).
 */

import { spawn, ChildProcessWithoutNullStreams } from "node:child_process";
import { accessSync } from "node:fs";
import { createInterface, Interface } from "node:readline";
import { fileURLToPath } from "node:url";
import path from "node:path";

import {
  ABI,
  CoreInterface,
  Pose,
  RenderTileResult,
  TeleportResult,
} from "./protocol.js";

const HERE = path.dirname(fileURLToPath(import.meta.url));

/** Repo-relative path to the engine sources, for PYTHONPATH. */
export function enginePythonPath(): string {
  // frontend/dist/src -> repo root is three levels up; frontend/src is two.
  for (const up of ["../../..", "../.."]) {
    const candidate = path.resolve(HERE, up, "src");
    try {
      accessSync(path.join(candidate, "solmarch", "__init__.py"));
      return candidate;
    } catch {
      /* keep looking */
    }
  }
  return path.resolve(HERE, "../../../src");
}

interface Pending {
  resolve: (value: unknown) => void;
  reject: (err: Error) => void;
}

export class ProcessCore implements CoreInterface {
  private proc: ChildProcessWithoutNullStreams;
  private rl: Interface;
  private pending = new Map<number, Pending>();
  private nextId = 1;

  constructor(python = "python3") {
    this.proc = spawn(python, ["-m", "solmarch", "embed-server"], {
      env: { ...process.env, PYTHONPATH: enginePythonPath() },
      stdio: ["pipe", "pipe", "pipe"],
    });
    this.rl = createInterface({ input: this.proc.stdout });
    this.rl.on("line", (line) => this.onLine(line));
    this.proc.on("exit", (code) => {
      const err = new Error(`engine process exited with code ${code}`);
      for (const p of this.pending.values()) p.reject(err);
      this.pending.clear();
    });
  }

  private onLine(line: string): void {
    let msg: { id: number; ok: boolean; result?: unknown; error?: string };
    try {
      msg = JSON.parse(line);
    } catch {
      return; // stray diagnostics on stdout are ignored
    }
    const pending = this.pending.get(msg.id);
    if (!pending) return;
    this.pending.delete(msg.id);
    if (msg.ok) pending.resolve(msg.result);
    else pending.reject(new Error(msg.error ?? "engine error"));
  }

  private call<T>(fn: string, args: Record<string, unknown>): Promise<T> {
    const id = this.nextId++;
    return new Promise<T>((resolve, reject) => {
      this.pending.set(id, { resolve: resolve as (v: unknown) => void, reject });
      this.proc.stdin.write(JSON.stringify({ id, fn, args }) + "\n");
    });
  }

  async hello(): Promise<{ abi: string; functions: string[] }> {
    const info = await this.call<{ abi: string; functions: string[] }>("hello", {});
    if (info.abi !== ABI) throw new Error(`ABI mismatch: got ${info.abi}, want ${ABI}`);
    return info;
  }

  observerStep(pose: Pose, localDir: number[], speed: number, dt: number,
               odeDt = 1e-3): Promise<Pose> {
    return this.call("observer_step", {
      pose, local_dir: localDir, speed, dt, ode_dt: odeDt,
    });
  }

  rotateObserver(pose: Pose, rotation: number[]): Promise<Pose> {
    return this.call("rotate_observer", { pose, rotation });
  }

  teleport(poseOrPoint: number[]): Promise<TeleportResult> {
    return this.call("teleport", { pose_or_point: poseOrPoint });
  }

  marchBatch(rays: number[], preset: string, h?: number): Promise<number[]> {
    return this.call("march_batch", { rays, preset, h: h ?? null });
  }

  renderTile(pose: Pose, preset: string, width: number, height: number,
             row0: number, row1: number, h?: number): Promise<RenderTileResult> {
    return this.call("render_tile", {
      pose, preset, width, height, row0, row1, h: h ?? null,
    });
  }

  close(): void {
    this.rl.close();
    this.proc.stdin.end();
    this.proc.kill();
  }
}
