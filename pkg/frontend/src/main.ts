// DOM wiring: canvas, pointer handling, record/save/reset controls.

import { RecorderClient } from "./client.js";
import { GoalCoalescer } from "./coalescer.js";
import { DemoListing } from "./protocol.js";
import { defaultOptions, render } from "./render.js";
import { WorldTransform } from "./transform.js";
import {
  ViewModel,
  applyServerMsg,
  initialViewModel,
  setConnection,
  setDemos,
  setMouseWorld,
} from "./viewmodel.js";

const host = location.hostname || "127.0.0.1";
const port = new URLSearchParams(location.search).get("port") ?? "8400";
const wsUrl = `ws://${host}:${port}/ws`;
const httpBase = `http://${host}:${port}`;

const canvas = document.getElementById("scene") as HTMLCanvasElement;
const ctx = canvas.getContext("2d")!;
const statusEl = document.getElementById("status")!;
const demosEl = document.getElementById("demos")!;

let vm: ViewModel = initialViewModel();

const client = new RecorderClient(
  wsUrl,
  {
    onMessage(msg) {
      vm = applyServerMsg(vm, msg);
      if (msg.type === "saved") {
        void refreshDemos();
      }
    },
    onStatus(status) {
      vm = setConnection(vm, status);
      statusEl.textContent = status === "open" ? "connected" : `${status}…`;
      statusEl.className = status;
    },
  },
  (url) => new WebSocket(url),
);

const coalescer = new GoalCoalescer((goal) => {
  client.send({ type: "mouse", goal });
});

const tf = new WorldTransform({ width: canvas.width, height: canvas.height });

canvas.addEventListener("pointermove", (ev) => {
  const rect = canvas.getBoundingClientRect();
  const world = tf.toWorld(ev.clientX - rect.left, ev.clientY - rect.top);
  vm = setMouseWorld(vm, world);
  coalescer.update(world);
});

setInterval(() => coalescer.tick(performance.now()), 20);

function numberInput(id: string): number {
  return Number((document.getElementById(id) as HTMLInputElement).value) || 0;
}

document.getElementById("btn-reset")!.addEventListener("click", () => {
  client.send({
    type: "reset",
    target: [numberInput("target-x"), numberInput("target-y"), numberInput("target-th")],
  });
});

document.getElementById("btn-record")!.addEventListener("click", () => {
  const on = !(vm.frame?.recording ?? false);
  client.send({ type: "record", on });
});

document.getElementById("btn-save")!.addEventListener("click", () => {
  const id = prompt("demo id?", `demo-${Date.now()}`);
  if (id) client.send({ type: "save", id });
});

async function refreshDemos(): Promise<void> {
  try {
    const res = await fetch(`${httpBase}/demos`);
    vm = setDemos(vm, DemoListing.parse(await res.json()));
    demosEl.textContent = vm.demos
      .map((d) => `${d.id} (N_s=${d.n_switches})`)
      .join("  ");
  } catch {
    // the listing is cosmetic; ignore fetch hiccups
  }
}

function frameLoop(): void {
  render(ctx, vm, { ...defaultOptions, width: canvas.width, height: canvas.height });
  requestAnimationFrame(frameLoop);
}

client.connect();
void refreshDemos();
requestAnimationFrame(frameLoop);
