// Drag-to-force mapping. Dragging a handle applies force proportional to the
// drag vector (admittance style, matching what the physical sensors measure);
// holding a modifier key tips the handle vertically for the tilt triggers.

import { ForceMessage, Vec3 } from "./protocol.js";

export const FORCE_GAIN = 40 / 100;   // N per pixel of drag
export const VERTICAL_FORCE = 5.0;    // N added by the tilt modifier
export const FORCE_LIMIT = 200.0;     // N per axis, client-side clamp

export type Handle = "left" | "right";

export interface DragState {
    /** drag vector in screen pixels (+x right, +y down) or null when idle */
    left: { dx: number; dy: number } | null;
    right: { dx: number; dy: number } | null;
    /** vertical tilt: +1 lifts the dragged handle, -1 presses it down */
    tilt: number;
}

export const idleDrag: DragState = { left: null, right: null, tilt: 0 };

function clamp(v: number, limit: number): number {
    return Math.max(-limit, Math.min(limit, v));
}

/**
 * One handle's drag to a table-frame force vector.
 *
 * The view is top-down with anterior (+x, toward the leader) pointing up the
 * screen, so screen-up is +Fx and screen-right is -Fy (y is left-positive).
 */
export function dragToForce(drag: { dx: number; dy: number } | null,
                            tilt: number): Vec3 {
    if (!drag) return [0, 0, tilt * VERTICAL_FORCE];
    const fx = -drag.dy * FORCE_GAIN;
    const fy = -drag.dx * FORCE_GAIN;
    return [
        clamp(fx, FORCE_LIMIT),
        clamp(fy, FORCE_LIMIT),
        clamp(tilt * VERTICAL_FORCE, FORCE_LIMIT),
    ];
}

/** Both handle forces for the current drag state. */
export function dragForces(drags: DragState): { left: Vec3; right: Vec3 } {
    return {
        left: dragToForce(drags.left, drags.left ? drags.tilt : 0),
        right: dragToForce(drags.right, drags.right ? -drags.tilt : 0),
    };
}

export function forceMessage(seq: number, drags: DragState): ForceMessage {
    const { left, right } = dragForces(drags);
    return { type: "force", seq, left, right };
}

/** Torque the server will sense for a given pair of handle forces. */
export function sensedTorques(left: Vec3, right: Vec3,
                              length: number, width: number): Vec3 {
    const tauX = (left[2] - right[2]) * width / 2 + (right[1] + left[1]) * 0.02;
    const tauY = (right[2] + left[2]) * length / 2 - (right[0] + left[0]) * 0.02;
    const tauZ = (right[0] - left[0]) * width / 2 - (right[1] + left[1]) * length / 2;
    return [tauX, tauY, tauZ];
}
