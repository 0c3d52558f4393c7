// WebSocket session client. Works in the browser (native WebSocket) and in
// node test runs (the `ws` package) behind one minimal socket interface.

import {
    ClientMessage,
    ConfigMessage,
    ServerMessage,
    SequenceGuard,
    StateMessage,
    TaskRecord,
    TrialResultMessage,
    encodeClientMessage,
    parseServerMessage,
} from "./protocol.js";

export interface SocketLike {
    send(data: string): void;
    close(): void;
    onopen: (() => void) | null;
    onmessage: ((event: { data: unknown }) => void) | null;
    onclose: (() => void) | null;
    onerror: ((err: unknown) => void) | null;
}

async function openSocket(url: string): Promise<SocketLike> {
    if (typeof globalThis.WebSocket !== "undefined") {
        return new globalThis.WebSocket(url) as unknown as SocketLike;
    }
    const { default: NodeWebSocket } = await import("ws");
    const ws = new NodeWebSocket(url);
    return ws as unknown as SocketLike;
}

export interface SessionHandlers {
    onState?: (msg: StateMessage) => void;
    onConfig?: (msg: ConfigMessage) => void;
    onResult?: (msg: TrialResultMessage) => void;
    onError?: (message: string) => void;
    onClose?: () => void;
}

export class SessionClient {
    private socket: SocketLike | null = null;
    private seq = 0;
    private guard = new SequenceGuard();
    readonly handlers: SessionHandlers;

    constructor(handlers: SessionHandlers = {}) {
        this.handlers = handlers;
    }

    async connect(url: string): Promise<void> {
        const socket = await openSocket(url);
        this.socket = socket;
        await new Promise<void>((resolve, reject) => {
            socket.onopen = () => resolve();
            socket.onerror = (err) => reject(err);
        });
        socket.onmessage = (event) => {
            const raw = typeof event.data === "string"
                ? event.data
                : String(event.data);
            let msg: ServerMessage;
            try {
                msg = parseServerMessage(raw);
            } catch (err) {
                this.handlers.onError?.(String(err));
                return;
            }
            if (!this.guard.accept(msg.seq)) {
                this.handlers.onError?.(`out-of-order seq ${msg.seq}`);
                return;
            }
            switch (msg.type) {
                case "state":
                    this.handlers.onState?.(msg);
                    break;
                case "config":
                    this.handlers.onConfig?.(msg);
                    break;
                case "trial_result":
                    this.handlers.onResult?.(msg);
                    break;
                case "error":
                    this.handlers.onError?.(msg.message);
                    break;
            }
        };
        socket.onclose = () => this.handlers.onClose?.();
    }

    private send(msg: ClientMessage): void {
        if (!this.socket) throw new Error("not connected");
        this.socket.send(encodeClientMessage(msg));
    }

    nextSeq(): number {
        this.seq += 1;
        return this.seq;
    }

    sendForce(left: [number, number, number], right: [number, number, number]): number {
        const seq = this.nextSeq();
        this.send({ type: "force", seq, left, right });
        return seq;
    }

    sendReset(): void {
        this.send({ type: "reset", seq: this.nextSeq() });
    }

    sendSelectTask(task: TaskRecord): void {
        this.send({ type: "select_task", seq: this.nextSeq(), task });
    }

    close(): void {
        this.socket?.close();
        this.socket = null;
    }
}

/** Await one message of the given type (test and scripting helper). */
export function waitFor<T extends ServerMessage>(
    client: SessionClient,
    kind: T["type"],
    timeoutMs = 10000,
): Promise<T> {
    return new Promise((resolve, reject) => {
        const timer = setTimeout(
            () => reject(new Error(`timed out waiting for ${kind}`)), timeoutMs);
        const prev = { ...client.handlers };
        const restore = () => {
            clearTimeout(timer);
            client.handlers.onState = prev.onState;
            client.handlers.onConfig = prev.onConfig;
            client.handlers.onResult = prev.onResult;
        };
        const hook = (msg: ServerMessage) => {
            if (msg.type === kind) {
                restore();
                resolve(msg as T);
            }
        };
        if (kind === "state") client.handlers.onState = hook as never;
        if (kind === "config") client.handlers.onConfig = hook as never;
        if (kind === "trial_result") client.handlers.onResult = hook as never;
    });
}
