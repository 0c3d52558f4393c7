// Top-down canvas rendering: the board to scale, handle force arrows, torque
// gauges with the trigger thresholds marked, a mode banner, and task tape
// lines. Dimmed with a reconnect prompt while the stream is stale or down.

import { ConfigMessage, StateMessage, Vec3 } from "./protocol.js";
import { ViewState, gaugeFraction, isStale, taskOverlay, worldToScreen } from "./view.js";

export const PX_PER_METER = 160;

export class Renderer {
    private ctx: CanvasRenderingContext2D;

    constructor(private canvas: HTMLCanvasElement) {
        const ctx = canvas.getContext("2d");
        if (!ctx) throw new Error("2d canvas context unavailable");
        this.ctx = ctx;
    }

    render(view: ViewState, nowMs: number): void {
        const { ctx, canvas } = this;
        ctx.clearRect(0, 0, canvas.width, canvas.height);
        ctx.fillStyle = "#182018";
        ctx.fillRect(0, 0, canvas.width, canvas.height);

        const origin = { x: canvas.width / 2, y: canvas.height / 2 };
        this.drawTape(view, origin);
        if (view.state && view.config) {
            this.drawBoard(view.state, view.config, origin);
            this.drawGauges(view.state, view.config);
            this.drawBanner(view.state);
        }
        if (!view.connected || isStale(view, nowMs)) {
            ctx.fillStyle = "rgba(10, 10, 10, 0.55)";
            ctx.fillRect(0, 0, canvas.width, canvas.height);
            ctx.fillStyle = "#eee";
            ctx.font = "24px sans-serif";
            ctx.textAlign = "center";
            ctx.fillText(view.connected ? "stream stale..." : "disconnected - reload to reconnect",
                         canvas.width / 2, canvas.height / 2);
        }
    }

    private drawTape(view: ViewState, origin: { x: number; y: number }): void {
        const overlay = taskOverlay(view.config?.task ?? null);
        if (!overlay) return;
        const { ctx } = this;
        for (const [pose, color] of [[overlay.start, "#cc8a2e"],
                                     [overlay.goal, "#3fa35c"]] as const) {
            const p = worldToScreen(pose, origin, PX_PER_METER);
            ctx.save();
            ctx.translate(p.x, p.y);
            ctx.rotate(-p.angle);
            ctx.strokeStyle = color;
            ctx.lineWidth = 4;
            ctx.setLineDash([14, 10]);
            ctx.beginPath();
            ctx.moveTo(-120, 0);
            ctx.lineTo(120, 0);
            ctx.stroke();
            ctx.restore();
        }
    }

    private drawBoard(state: StateMessage, config: ConfigMessage,
                      origin: { x: number; y: number }): void {
        const { ctx } = this;
        const L = config.board.length * PX_PER_METER;
        const W = config.board.width * PX_PER_METER;
        const p = worldToScreen(state.pose, origin, PX_PER_METER);
        ctx.save();
        ctx.translate(p.x, p.y);
        ctx.rotate(-p.angle);
        ctx.fillStyle = "#8a6b42";
        ctx.strokeStyle = "#d8c9a8";
        ctx.lineWidth = 2;
        // board long axis is world x = screen up
        ctx.fillRect(-W / 2, -L / 2, W, L);
        ctx.strokeRect(-W / 2, -L / 2, W, L);
        // leader handles on the +x (screen top) end
        for (const side of [-1, 1]) {
            ctx.fillStyle = "#3b3b3b";
            ctx.fillRect(side * W / 2 - 6, -L / 2 - 10, 12, 10);
        }
        ctx.restore();
    }

    private drawArrow(x: number, y: number, fx: number, fy: number): void {
        const { ctx } = this;
        const scale = 2.2; // px per N
        const tx = x - fy * scale;
        const ty = y - fx * scale;
        ctx.strokeStyle = "#6fc3ff";
        ctx.lineWidth = 3;
        ctx.beginPath();
        ctx.moveTo(x, y);
        ctx.lineTo(tx, ty);
        ctx.stroke();
    }

    private drawGauges(state: StateMessage, config: ConfigMessage): void {
        const { ctx } = this;
        const specs: { label: string; value: number; full: number; threshold: number }[] = [
            { label: "tau_z", value: state.tau[2], full: 6.0,
              threshold: config.thresholds.tau_z },
            { label: "tau_x", value: state.tau[0], full: 4.0,
              threshold: config.thresholds.tau_x },
        ];
        specs.forEach((g, i) => {
            const cx = 90;
            const cy = 90 + i * 130;
            const r = 48;
            ctx.strokeStyle = "#999";
            ctx.lineWidth = 2;
            ctx.beginPath();
            ctx.arc(cx, cy, r, Math.PI, 2 * Math.PI);
            ctx.stroke();
            // threshold ticks teach the trigger language
            for (const sign of [-1, 1]) {
                const a = Math.PI * (1 + (gaugeFraction(sign * g.threshold, g.full) + 1) / 2);
                ctx.strokeStyle = "#e2574d";
                ctx.beginPath();
                ctx.moveTo(cx + (r - 8) * Math.cos(a), cy + (r - 8) * Math.sin(a));
                ctx.lineTo(cx + (r + 4) * Math.cos(a), cy + (r + 4) * Math.sin(a));
                ctx.stroke();
            }
            const na = Math.PI * (1 + (gaugeFraction(g.value, g.full) + 1) / 2);
            ctx.strokeStyle = "#fff";
            ctx.lineWidth = 3;
            ctx.beginPath();
            ctx.moveTo(cx, cy);
            ctx.lineTo(cx + (r - 10) * Math.cos(na), cy + (r - 10) * Math.sin(na));
            ctx.stroke();
            ctx.fillStyle = "#ccc";
            ctx.font = "13px monospace";
            ctx.textAlign = "center";
            ctx.fillText(`${g.label} ${g.value.toFixed(2)} Nm`, cx, cy + 20);
        });
    }

    private drawBanner(state: StateMessage): void {
        const { ctx, canvas } = this;
        ctx.fillStyle = state.complete ? "#3fa35c" : "#2e3d4d";
        ctx.fillRect(canvas.width / 2 - 150, 8, 300, 34);
        ctx.fillStyle = "#fff";
        ctx.font = "16px monospace";
        ctx.textAlign = "center";
        ctx.fillText(state.complete ? "task complete" : `mode: ${state.mode}`,
                     canvas.width / 2, 30);
        ctx.fillText(`t = ${state.t.toFixed(2)} s`, canvas.width / 2, canvas.height - 14);
    }
}
