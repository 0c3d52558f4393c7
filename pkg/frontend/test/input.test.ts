import { describe, expect, it } from "vitest";

import {
    FORCE_GAIN,
    dragToForce,
    forceMessage,
    idleDrag,
    sensedTorques,
} from "../src/input.js";

describe("dragToForce", () => {
    it("no drag means zero planar force", () => {
        expect(dragToForce(null, 0)).toEqual([0, 0, 0]);
    });

    it("100 px anterior drag maps to 40 N", () => {
        // screen-up (negative dy) is anterior
        const [fx, fy] = dragToForce({ dx: 0, dy: -100 }, 0);
        expect(fx).toBeCloseTo(40.0, 9);
        expect(fy).toBeCloseTo(0.0, 9);
        expect(FORCE_GAIN).toBeCloseTo(0.4, 12);
    });

    it("modifier adds vertical force to the dragged handle", () => {
        const f = dragToForce({ dx: 0, dy: 0 }, 1);
        expect(f[2]).toBeCloseTo(5.0, 9);
    });

    it("clamps to 200 N per axis", () => {
        const f = dragToForce({ dx: 0, dy: -100000 }, 0);
        expect(f[0]).toBe(200.0);
    });
});

describe("forceMessage", () => {
    it("idle drags give a zero-force keep-alive", () => {
        const msg = forceMessage(5, idleDrag);
        expect(msg.left).toEqual([0, 0, 0]);
        expect(msg.right).toEqual([0, 0, 0]);
        expect(msg.seq).toBe(5);
    });

    it("opposite drags twist without net anterior force", () => {
        const msg = forceMessage(1, {
            left: { dx: 0, dy: -50 },   // push left handle anterior
            right: { dx: 0, dy: 50 },   // pull right handle posterior
            tilt: 0,
        });
        const [, , tauZ] = sensedTorques(msg.left, msg.right, 1.22, 0.59);
        expect(msg.left[0] + msg.right[0]).toBeCloseTo(0, 9);
        expect(tauZ).not.toBeCloseTo(0, 3);
    });

    it("torque map matches the hand example", () => {
        // Ftl,x = 1, Ftr,x = -1 gives tau_z = -w/2 * 2 = -0.59
        const [, , tauZ] = sensedTorques([1, 0, 0], [-1, 0, 0], 1.22, 0.59);
        expect(tauZ).toBeCloseTo(-0.59, 9);
    });
});
