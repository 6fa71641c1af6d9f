import assert from 'node:assert/strict';
import { test } from 'node:test';

import type { StateFrame } from '../src/protocol.js';
import {
    ConsoleEvent,
    ConsoleState,
    initialState,
    interlockActive,
    reduce,
    switchesEnabled,
} from '../src/state.js';

function frame(tick: number, overrides: Partial<StateFrame> = {}): StateFrame {
    return {
        type: 'state',
        tick,
        theta: 1.2,
        omega: 0,
        drive: 'Brake',
        rb0: 0,
        rb1: 0,
        grip_force: 0,
        open_sw: 0,
        close_sw: 0,
        underruns: 0,
        ...overrides,
    };
}

function replay(events: ConsoleEvent[]): ConsoleState {
    return events.reduce(reduce, initialState());
}

test('connection lifecycle enables and disables the switches', () => {
    let s = initialState();
    assert.equal(switchesEnabled(s), false);
    s = reduce(s, { kind: 'connected', sessionId: 'a', isReconnect: false });
    assert.equal(switchesEnabled(s), true);
    s = reduce(s, { kind: 'disconnected' });
    assert.equal(switchesEnabled(s), false);
    assert.deepEqual(s.held, { open: false, close: false });
});

test('indicators reflect the latest received frame only', () => {
    let s = replay([
        { kind: 'connected', sessionId: 'a', isReconnect: false },
        { kind: 'frame', frame: frame(1, { drive: 'Reverse', rb1: 1, close_sw: 1 }) },
        { kind: 'frame', frame: frame(2, { drive: 'Brake' }) },
    ]);
    assert.equal(s.lastFrame?.tick, 2);
    assert.equal(s.lastFrame?.drive, 'Brake');
});

test('interlock is derived from frame fields, not local button state', () => {
    const locked = replay([
        { kind: 'connected', sessionId: 'a', isReconnect: false },
        { kind: 'button', switch: 'open', held: true },
        { kind: 'button', switch: 'close', held: true },
        { kind: 'frame', frame: frame(5, { open_sw: 1, close_sw: 1, rb0: 0, rb1: 0 }) },
    ]);
    assert.equal(interlockActive(locked), true);

    // Locally held buttons without a confirming frame do not show interlock.
    const unconfirmed = replay([
        { kind: 'connected', sessionId: 'a', isReconnect: false },
        { kind: 'button', switch: 'open', held: true },
        { kind: 'button', switch: 'close', held: true },
        { kind: 'frame', frame: frame(5) },
    ]);
    assert.equal(interlockActive(unconfirmed), false);

    // A driving frame is not an interlock even with both switches down.
    const driving = replay([
        { kind: 'connected', sessionId: 'a', isReconnect: false },
        { kind: 'frame', frame: frame(6, { open_sw: 1, close_sw: 1, rb0: 1 }) },
    ]);
    assert.equal(interlockActive(driving), false);
});

test('chart buffer keeps a capped rolling window', () => {
    let s = initialState();
    s = reduce(s, { kind: 'subscribed', rateHz: 10 }); // capacity 100
    for (let t = 0; t < 250; t += 1) {
        s = reduce(s, { kind: 'frame', frame: frame(t, { theta: t / 1000 }) });
    }
    assert.equal(s.chart.length, 100);
    assert.equal(s.chart[0]?.tick, 150);
    assert.equal(s.chart[99]?.tick, 249);
});

test('replaying a frame log yields identical chart buffers', () => {
    const log: ConsoleEvent[] = [{ kind: 'connected', sessionId: 'x', isReconnect: false }];
    for (let t = 0; t < 500; t += 7) {
        log.push({
            kind: 'frame',
            frame: frame(t, { theta: Math.sin(t / 40), omega: t % 13, grip_force: t % 5 }),
        });
    }
    const a = replay(log);
    const b = replay(log);
    assert.deepEqual(a.chart, b.chart);
    assert.deepEqual(a.lastFrame, b.lastFrame);
});

test('reconnect flags a fresh session and clears stale telemetry', () => {
    let s = replay([
        { kind: 'connected', sessionId: 'a', isReconnect: false },
        { kind: 'frame', frame: frame(50) },
        { kind: 'disconnected' },
    ]);
    s = reduce(s, { kind: 'connected', sessionId: 'b', isReconnect: true });
    assert.equal(s.sessionWasReset, true);
    assert.equal(s.sessionId, 'b');
    assert.equal(s.lastFrame, null);
    assert.deepEqual(s.chart, []);
});

test('reducer is pure: inputs are never mutated', () => {
    const s0 = initialState();
    const snapshot = JSON.stringify(s0);
    reduce(s0, { kind: 'frame', frame: frame(1) });
    reduce(s0, { kind: 'button', switch: 'open', held: true });
    assert.equal(JSON.stringify(s0), snapshot);
});

test('param submissions are recorded', () => {
    const s = replay([
        { kind: 'connected', sessionId: 'a', isReconnect: false },
        { kind: 'param', path: 'motor_params.supply_v', value: 7.5 },
    ]);
    assert.equal(s.params['motor_params.supply_v'], 7.5);
});
