// Wire messages shared with the bench server (see ../../docs/protocol.md).
// Every message in either direction carries a strictly increasing `seq`.

export type Vec3 = [number, number, number];

export interface TaskRecord {
    kind: string;
    direction: string;
    magnitude: number;
    duration: number;
    start_pose: [number, number, number];
}

export interface ForceMessage {
    type: "force";
    seq: number;
    left: Vec3;
    right: Vec3;
}

export interface ResetMessage {
    type: "reset";
    seq: number;
}

export interface SelectTaskMessage {
    type: "select_task";
    seq: number;
    task: TaskRecord;
}

export type ClientMessage = ForceMessage | ResetMessage | SelectTaskMessage;

export interface StateMessage {
    type: "state";
    seq: number;
    t: number;
    pose: Vec3;
    twist: Vec3;
    tau: Vec3;
    mode: string;
    cmd: Vec3;
    complete: boolean;
}

export interface ConfigMessage {
    type: "config";
    seq: number;
    controller: string;
    dt: number;
    lockstep: boolean;
    steps_per_message: number;
    board: { length: number; width: number; mass: number };
    thresholds: { tau_z: number; tau_x: number };
    task: TaskRecord | null;
}

export interface TrialResultMessage {
    type: "trial_result";
    seq: number;
    report: Record<string, unknown>;
}

export interface ErrorMessage {
    type: "error";
    seq: number;
    message: string;
}

export type ServerMessage =
    | StateMessage
    | ConfigMessage
    | TrialResultMessage
    | ErrorMessage;

const SERVER_TYPES = new Set(["state", "config", "trial_result", "error"]);

export function parseServerMessage(raw: string): ServerMessage {
    const msg = JSON.parse(raw);
    if (typeof msg !== "object" || msg === null || !SERVER_TYPES.has(msg.type)) {
        throw new Error(`unexpected server message: ${raw.slice(0, 120)}`);
    }
    if (typeof msg.seq !== "number") {
        throw new Error("server message missing seq");
    }
    return msg as ServerMessage;
}

export function encodeClientMessage(msg: ClientMessage): string {
    return JSON.stringify(msg);
}

/** Tracks that a message stream never goes backwards. */
export class SequenceGuard {
    private last = -Infinity;

    /** Returns false for stale (non-increasing) sequence numbers. */
    accept(seq: number): boolean {
        if (seq <= this.last) return false;
        this.last = seq;
        return true;
    }
}
