// Wire schema of the gripsim gateway: one JSON object per WebSocket text
// frame. This module is the only place that knows the message shapes.

export type SwitchName = 'open' | 'close';

export interface StateFrame {
    type: 'state';
    tick: number;
    theta: number;
    omega: number;
    drive: 'Forward' | 'Reverse' | 'Brake' | 'HighZ';
    rb0: 0 | 1;
    rb1: 0 | 1;
    grip_force: number;
    open_sw: 0 | 1;
    close_sw: 0 | 1;
    underruns: number;
}

export interface AckMessage {
    type: 'ack';
    seq: number;
    session?: string;
}

export interface ErrorMessage {
    type: 'error';
    code: string;
    detail: string;
    seq?: number;
}

export type ServerMessage = StateFrame | AckMessage | ErrorMessage;

export type ClientMessage =
    | { type: 'press' | 'release'; switch: SwitchName }
    | { type: 'pause' }
    | { type: 'resume' }
    | { type: 'reset' }
    | { type: 'set_params'; path: string; value: number }
    | { type: 'subscribe'; rate_hz: number };

const DRIVE_STATES = new Set(['Forward', 'Reverse', 'Brake', 'HighZ']);

function isFiniteNumber(v: unknown): v is number {
    return typeof v === 'number' && Number.isFinite(v);
}

function isBit(v: unknown): v is 0 | 1 {
    return v === 0 || v === 1;
}

/** Parse and validate one incoming frame; null for anything malformed. */
export function parseServerMessage(raw: string): ServerMessage | null {
    let data: unknown;
    try {
        data = JSON.parse(raw);
    } catch {
        return null;
    }
    if (typeof data !== 'object' || data === null) return null;
    const msg = data as Record<string, unknown>;
    switch (msg.type) {
        case 'state': {
            if (
                !isFiniteNumber(msg.tick) ||
                !isFiniteNumber(msg.theta) ||
                !isFiniteNumber(msg.omega) ||
                !isFiniteNumber(msg.grip_force) ||
                !isFiniteNumber(msg.underruns) ||
                typeof msg.drive !== 'string' ||
                !DRIVE_STATES.has(msg.drive) ||
                !isBit(msg.rb0) || !isBit(msg.rb1) ||
                !isBit(msg.open_sw) || !isBit(msg.close_sw)
            ) {
                return null;
            }
            return msg as unknown as StateFrame;
        }
        case 'ack':
            if (!isFiniteNumber(msg.seq)) return null;
            return msg as unknown as AckMessage;
        case 'error':
            if (typeof msg.code !== 'string') return null;
            return msg as unknown as ErrorMessage;
        default:
            return null;
    }
}

export function encodeClientMessage(msg: ClientMessage): string {
    return JSON.stringify(msg);
}
