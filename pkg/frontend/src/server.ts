/**
 * Development server: serves the static explorer and bridges /api/call to a
 * pool of engine subprocesses.  Tiles are distributed round-robin; workers
 * never share state, so frames assemble identically regardless of pool size.
 */

import http from "node:http";
import { readFile } from "node:fs/promises";
import { fileURLToPath } from "node:url";
import path from "node:path";

import { ProcessCore } from "./coreClient.js";
import { CoreInterface } from "./protocol.js";

const HERE = path.dirname(fileURLToPath(import.meta.url));
const PUBLIC = path.resolve(HERE, "../../public");
const APP = path.resolve(HERE, "..");

const POOL_SIZE = Number(process.env.SOLMARCH_POOL ?? 2);

const pool: ProcessCore[] = [];
let next = 0;

function worker(): ProcessCore {
  if (pool.length < POOL_SIZE) pool.push(new ProcessCore());
  next = (next + 1) % pool.length;
  return pool[next];
}

const METHODS: Record<string, (core: CoreInterface, a: any) => Promise<unknown>> = {
  hello: (c) => c.hello(),
  observer_step: (c, a) => c.observerStep(a.pose, a.local_dir, a.speed, a.dt, a.ode_dt),
  rotate_observer: (c, a) => c.rotateObserver(a.pose, a.rotation),
  teleport: (c, a) => c.teleport(a.pose_or_point),
  march_batch: (c, a) => c.marchBatch(a.rays, a.preset, a.h ?? undefined),
  render_tile: (c, a) =>
    c.renderTile(a.pose, a.preset, a.width, a.height, a.row0, a.row1, a.h ?? undefined),
};

async function handleApi(req: http.IncomingMessage, res: http.ServerResponse): Promise<void> {
  const chunks: Buffer[] = [];
  for await (const chunk of req) chunks.push(chunk as Buffer);
  try {
    const { fn, args } = JSON.parse(Buffer.concat(chunks).toString("utf-8"));
    const method = METHODS[fn];
    if (!method) throw new Error(`unknown function ${fn}`);
    const result = await method(worker(), args ?? {});
    res.writeHead(200, { "content-type": "application/json" });
    res.end(JSON.stringify({ ok: true, result }));
  } catch (err) {
    res.writeHead(200, { "content-type": "application/json" });
    res.end(JSON.stringify({ ok: false, error: String(err) }));
  }
}

const TYPES: Record<string, string> = {
  ".html": "text/html",
  ".js": "text/javascript",
  ".css": "text/css",
};

async function handleStatic(url: string, res: http.ServerResponse): Promise<void> {
  let file: string;
  if (url === "/" || url === "/index.html") {
    file = path.join(PUBLIC, "index.html");
  } else if (url.startsWith("/app/")) {
    file = path.join(APP, url.slice("/app/".length));
  } else {
    res.writeHead(404);
    res.end("not found");
    return;
  }
  try {
    const body = await readFile(file);
    res.writeHead(200, { "content-type": TYPES[path.extname(file)] ?? "text/plain" });
    res.end(body);
  } catch {
    res.writeHead(404);
    res.end("not found");
  }
}

export function createServer(): http.Server {
  return http.createServer((req, res) => {
    if (req.method === "POST" && req.url === "/api/call") {
      void handleApi(req, res);
    } else {
      void handleStatic(req.url ?? "/", res);
    }
  });
}

const isMain = process.argv[1] && fileURLToPath(import.meta.url) === path.resolve(process.argv[1]);
if (isMain) {
  const port = Number(process.env.PORT ?? 8000);
  createServer().listen(port, () => {
    console.log(`solmarch explorer on http://localhost:${port}`);
  });
}
