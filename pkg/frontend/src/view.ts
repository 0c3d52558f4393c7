// View model: the latest server snapshot plus derived presentation state.
// Pure functions here so the rendering geometry is testable without a canvas.

import { ConfigMessage, StateMessage, TaskRecord } from "./protocol.js";

export const STALE_AFTER_MS = 500;

export interface ViewState {
    config: ConfigMessage | null;
    state: StateMessage | null;
    receivedAt: number;        // ms timestamp of the last snapshot
    connected: boolean;
    result: Record<string, unknown> | null;
}

export function emptyView(): ViewState {
    return { config: null, state: null, receivedAt: 0, connected: false, result: null };
}

export function isStale(view: ViewState, nowMs: number): boolean {
    if (!view.state) return true;
    return nowMs - view.receivedAt > STALE_AFTER_MS;
}

/** Needle fraction for a torque gauge: clamped to [-1, 1] at full scale. */
export function gaugeFraction(value: number, fullScale: number): number {
    return Math.max(-1, Math.min(1, value / fullScale));
}

/** Whether the needle sits beyond the trigger threshold mark. */
export function pastThreshold(value: number, threshold: number): boolean {
    return Math.abs(value) >= threshold;
}

export interface Placement {
    x: number;           // px
    y: number;           // px
    angle: number;       // rad, screen orientation
}

/**
 * World pose to screen placement. The view is top-down: world +x (anterior)
 * points up the screen, world +y (lateral-left) points screen-left.
 */
export function worldToScreen(pose: [number, number, number],
                              originPx: { x: number; y: number },
                              pxPerMeter: number): Placement {
    return {
        x: originPx.x - pose[1] * pxPerMeter,
        y: originPx.y - pose[0] * pxPerMeter,
        angle: pose[2],
    };
}

/** Tape-line overlay for a task: start and goal lines on the floor. */
export function taskOverlay(task: TaskRecord | null):
        { start: [number, number, number]; goal: [number, number, number] } | null {
    if (!task) return null;
    const [x0, y0, th0] = task.start_pose;
    const sign = task.kind === "planar_rotation"
        ? (task.direction === "left" ? -1 : 1)
        : (task.direction === "left" ? 1 : -1);
    if (task.kind === "lateral_translation") {
        return { start: [x0, y0, th0], goal: [x0, y0 + sign * task.magnitude, th0] };
    }
    if (task.kind === "planar_rotation") {
        return { start: [x0, y0, th0], goal: [x0, y0, th0 + sign * task.magnitude] };
    }
    return { start: [x0, y0, th0], goal: [x0 + sign * task.magnitude, y0, th0] };
}
