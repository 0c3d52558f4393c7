// Scripted synthetic leader: enough of the human's strategy, in client-side
// code, to drive a lateral translation over the live protocol. The bot tracks
// the board state the server broadcasts, shapes its lateral pull toward a
// cruise profile, and announces the move with the torque-trigger force
// pattern, fading it inside braking reach of the goal.

import { StateMessage, Vec3 } from "./protocol.js";

export interface LeaderBotOptions {
    targetY: number;          // m, lateral goal (signed)
    cruise: number;           // m/s
    kp: number;               // N/m
    kd: number;               // N*s/m
    tauZAmp: number;          // N*m, announced z-torque amplitude
    tauXAmp: number;          // N*m, announced x-torque amplitude
    riseTime: number;         // s
    boardLength: number;      // m
    boardWidth: number;       // m
    followerDecel: number;    // m/s^2, the follower's ramp-down limit
}

export const defaultBotOptions: LeaderBotOptions = {
    targetY: 0.8,
    cruise: 0.35,
    kp: 60,
    kd: 25,
    tauZAmp: 4.0,
    tauXAmp: 2.0,
    riseTime: 0.4,
    boardLength: 1.22,
    boardWidth: 0.59,
    followerDecel: 0.5,
};

function smoothstep(u: number): number {
    const c = Math.max(0, Math.min(1, u));
    return c * c * (3 - 2 * c);
}

/** Handle forces for one control tick, from the latest board snapshot. */
export function leaderBotForces(state: StateMessage,
                                opts: LeaderBotOptions): { left: Vec3; right: Vec3 } {
    const sign = Math.sign(opts.targetY) || 1;
    const [x, y, theta] = state.pose;
    const [vx, vy, wz] = state.twist;
    const l2 = opts.boardLength / 2;
    const w2 = opts.boardWidth / 2;

    // hold the leader's own end of the board on the target lateral line
    const yEnd = y + Math.sin(theta) * l2;
    const vyEnd = vy + wz * Math.cos(theta) * l2;
    const remaining = Math.max(sign * (opts.targetY - y), 0);

    // fade the announcement inside braking reach, as a human stops signaling
    const reach = vy * vy / (2 * opts.followerDecel) + Math.abs(vy) * 0.12 + 0.02;
    const env = smoothstep((remaining - reach) / 0.03)
        * smoothstep(state.t / opts.riseTime);

    const vyRef = sign * Math.min(opts.cruise, remaining * 1.2);
    const errY = Math.max(-0.1, Math.min(0.1, opts.targetY - yEnd));
    const fy = opts.kp * errY + opts.kd * (vyRef - vyEnd);
    const fx = -opts.kp * Math.max(-0.1, Math.min(0.1, x)) - opts.kd * vx;

    const tauZRef = -sign * opts.tauZAmp * env;
    const tauXRef = sign * opts.tauXAmp * env;
    const diffX = (tauZRef + fy * l2) / w2;        // f_right_x - f_left_x
    const diffZ = (tauXRef - fy * 0.02) / w2;      // f_left_z - f_right_z

    return {
        left: [fx / 2 - diffX / 2, fy / 2, diffZ / 2],
        right: [fx / 2 + diffX / 2, fy / 2, -diffZ / 2],
    };
}
