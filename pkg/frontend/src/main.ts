// Browser entry point. Query parameters pick the server and show the handles:
//   index.html?server=ws://127.0.0.1:8765
// Drag either handle to apply force; hold Shift while dragging to tip that
// handle vertically (the rotation trigger channel).

import { SessionClient } from "./client.js";
import { DragState, dragForces, idleDrag } from "./input.js";
import { Renderer, PX_PER_METER } from "./render.js";
import { emptyView } from "./view.js";
import { worldToScreen } from "./view.js";

const SEND_HZ = 40;

function main(): void {
    const params = new URLSearchParams(window.location.search);
    const url = params.get("server") ?? "ws://127.0.0.1:8765";

    const canvas = document.getElementById("arena") as HTMLCanvasElement;
    canvas.width = window.innerWidth;
    canvas.height = window.innerHeight;
    const renderer = new Renderer(canvas);
    const view = emptyView();

    const drags: DragState = { ...idleDrag };
    let activeHandle: "left" | "right" | null = null;
    let dragStart = { x: 0, y: 0 };

    canvas.addEventListener("pointerdown", (ev) => {
        if (!view.state || !view.config) return;
        const origin = { x: canvas.width / 2, y: canvas.height / 2 };
        const p = worldToScreen(view.state.pose, origin, PX_PER_METER);
        // handles sit at the top (leader) end of the board on screen
        const handleY = p.y - (view.config.board.length / 2) * PX_PER_METER;
        const leftX = p.x + (view.config.board.width / 2) * PX_PER_METER;
        const rightX = p.x - (view.config.board.width / 2) * PX_PER_METER;
        const dLeft = Math.hypot(ev.offsetX - leftX, ev.offsetY - handleY);
        const dRight = Math.hypot(ev.offsetX - rightX, ev.offsetY - handleY);
        activeHandle = dLeft < dRight ? "left" : "right";
        dragStart = { x: ev.offsetX, y: ev.offsetY };
    });
    canvas.addEventListener("pointermove", (ev) => {
        if (!activeHandle) return;
        drags[activeHandle] = { dx: ev.offsetX - dragStart.x,
                                dy: ev.offsetY - dragStart.y };
        drags.tilt = ev.shiftKey ? 1 : 0;
    });
    const release = () => {
        if (activeHandle) drags[activeHandle] = null;
        activeHandle = null;
    };
    canvas.addEventListener("pointerup", release);
    canvas.addEventListener("pointerleave", release);

    const client = new SessionClient({
        onConfig: (msg) => { view.config = msg; },
        onState: (msg) => {
            view.state = msg;
            view.receivedAt = performance.now();
        },
        onResult: (msg) => { view.result = msg.report; console.log("trial result", msg.report); },
        onError: (message) => console.warn("session error:", message),
        onClose: () => { view.connected = false; },
    });

    client.connect(url).then(() => {
        view.connected = true;
        // keep-alive force stream, zero when idle
        window.setInterval(() => {
            const { left, right } = dragForces(drags);
            client.sendForce(left, right);
        }, 1000 / SEND_HZ);
    }).catch((err) => {
        console.error("connect failed", err);
    });

    function frame(): void {
        renderer.render(view, performance.now());
        requestAnimationFrame(frame);
    }
    frame();
}

main();
