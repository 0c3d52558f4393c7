// Recorded input sessions: the exact force messages a client sent, in order.
// Replaying one against a fresh seeded server must reproduce the state stream
// bit for bit (the server is deterministic in lockstep mode).

import { StateMessage, TaskRecord, Vec3 } from "./protocol.js";

export interface RecordedSession {
    task: TaskRecord;
    forces: { left: Vec3; right: Vec3 }[];
}

export interface StateTrace {
    pose: Vec3;
    twist: Vec3;
    tau: Vec3;
    mode: string;
}

export function traceOf(states: StateMessage[]): StateTrace[] {
    return states.map((s) => ({
        pose: s.pose, twist: s.twist, tau: s.tau, mode: s.mode,
    }));
}

export function tracesEqual(a: StateTrace[], b: StateTrace[]): boolean {
    if (a.length !== b.length) return false;
    for (let i = 0; i < a.length; i++) {
        const p = a[i];
        const q = b[i];
        if (p.mode !== q.mode) return false;
        for (let k = 0; k < 3; k++) {
            if (p.pose[k] !== q.pose[k]) return false;
            if (p.twist[k] !== q.twist[k]) return false;
            if (p.tau[k] !== q.tau[k]) return false;
        }
    }
    return true;
}

/**
 * A deterministic synthetic "human" input session: wiggle both handles
 * through a drag pattern with a tilt phase, the kind of stream the UI emits.
 */
export function syntheticSession(task: TaskRecord, ticks: number): RecordedSession {
    const forces: { left: Vec3; right: Vec3 }[] = [];
    for (let i = 0; i < ticks; i++) {
        const t = i / 50;
        const pull = 6 * Math.min(1, t);
        const tilt = t > 0.3 ? 3.4 : 0;
        const twistPair = 2.8 * Math.min(1, t / 0.5);
        forces.push({
            left: [-twistPair, pull / 2, tilt],
            right: [twistPair, pull / 2, -tilt],
        });
    }
    return { task, forces };
}
