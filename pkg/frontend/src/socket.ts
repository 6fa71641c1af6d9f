// Gateway connection: hello handshake, auto subscribe+resume, bounded
// reconnect, and an ordered send queue. The WebSocket implementation is
// injected so the same class drives the browser and the node test harness.

import {
    ClientMessage,
    ServerMessage,
    StateFrame,
    SwitchName,
    encodeClientMessage,
    parseServerMessage,
} from './protocol.js';
import type { ConsoleEvent } from './state.js';

export interface WebSocketLike {
    readyState: number;
    send(data: string): void;
    close(): void;
    onopen: ((ev?: unknown) => void) | null;
    onclose: ((ev?: unknown) => void) | null;
    onerror: ((ev?: unknown) => void) | null;
    onmessage: ((ev: { data: unknown }) => void) | null;
}

export type WebSocketFactory = (url: string) => WebSocketLike;

export interface ConsoleSocketOptions {
    factory?: WebSocketFactory;
    rateHz?: number;
    maxRetries?: number;
    retryBaseMs?: number;
    /** Every valid server message, before reduction (used by tests). */
    onMessage?: (msg: ServerMessage) => void;
}

const OPEN = 1;

export class ConsoleSocket {
    private readonly url: string;
    private readonly factory: WebSocketFactory;
    private readonly rateHz: number;
    private readonly maxRetries: number;
    private readonly retryBaseMs: number;
    private readonly emit: (ev: ConsoleEvent) => void;
    private readonly onMessage?: (msg: ServerMessage) => void;

    private ws: WebSocketLike | null = null;
    private retries = 0;
    private hadSession = false;
    private greeted = false;
    private closedByUser = false;
    private queue: ClientMessage[] = [];

    constructor(url: string, emit: (ev: ConsoleEvent) => void, opts: ConsoleSocketOptions = {}) {
        this.url = url;
        this.emit = emit;
        this.factory = opts.factory ?? ((u) => new WebSocket(u) as unknown as WebSocketLike);
        this.rateHz = opts.rateHz ?? 50;
        this.maxRetries = opts.maxRetries ?? 5;
        this.retryBaseMs = opts.retryBaseMs ?? 250;
        this.onMessage = opts.onMessage;
    }

    connect(): void {
        this.closedByUser = false;
        this.greeted = false;
        this.emit({ kind: 'connecting' });
        const ws = this.factory(this.url);
        this.ws = ws;
        ws.onopen = () => {
            this.retries = 0; // a completed handshake re-arms the retry budget
        };
        ws.onmessage = (ev) => this.handleRaw(String(ev.data));
        ws.onerror = () => {
            // the close handler owns the retry path
        };
        ws.onclose = () => {
            this.ws = null;
            this.queue = [];
            this.emit({ kind: 'disconnected' });
            if (!this.closedByUser && this.retries < this.maxRetries) {
                const delay = this.retryBaseMs * 2 ** this.retries;
                this.retries += 1;
                setTimeout(() => {
                    if (!this.closedByUser) this.connect();
                }, delay);
            }
        };
    }

    private handleRaw(raw: string): void {
        const msg = parseServerMessage(raw);
        if (msg === null) return;
        this.onMessage?.(msg);
        if (msg.type === 'state') {
            this.emit({ kind: 'frame', frame: msg as StateFrame });
            return;
        }
        if (msg.type === 'error') {
            this.emit({ kind: 'error', detail: `${msg.code}: ${msg.detail}` });
            return;
        }
        // ack
        if (!this.greeted && msg.session) {
            this.greeted = true;
            this.emit({
                kind: 'connected',
                sessionId: msg.session,
                isReconnect: this.hadSession,
            });
            this.hadSession = true;
            // Fresh session: start telemetry and the paced clock right away.
            this.send({ type: 'subscribe', rate_hz: this.rateHz });
            this.emit({ kind: 'subscribed', rateHz: this.rateHz });
            this.send({ type: 'resume' });
            this.emit({ kind: 'paused', paused: false });
            this.flush();
        }
    }

    /** Queue until the hello ack lands; ordered sends after that. */
    send(msg: ClientMessage): void {
        if (this.ws && this.ws.readyState === OPEN && this.greeted) {
            this.ws.send(encodeClientMessage(msg));
        } else if (this.ws && !this.closedByUser) {
            this.queue.push(msg);
        }
    }

    private flush(): void {
        const pending = this.queue;
        this.queue = [];
        for (const msg of pending) this.send(msg);
    }

    setSwitch(name: SwitchName, held: boolean): void {
        this.send({ type: held ? 'press' : 'release', switch: name });
    }

    pause(): void {
        this.send({ type: 'pause' });
        this.emit({ kind: 'paused', paused: true });
    }

    resume(): void {
        this.send({ type: 'resume' });
        this.emit({ kind: 'paused', paused: false });
    }

    reset(): void {
        // The server parks a reset session paused at tick 0; resume so the
        // operator keeps a running arm.
        this.send({ type: 'reset' });
        this.send({ type: 'resume' });
        this.emit({ kind: 'paused', paused: false });
    }

    setParam(path: string, value: number): void {
        this.send({ type: 'set_params', path, value });
        this.emit({ kind: 'param', path, value });
    }

    close(): void {
        this.closedByUser = true;
        this.ws?.close();
    }
}
