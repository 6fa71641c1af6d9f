// Console state as a pure reducer over connection events and received
// frames. Rendering reads only this state, and the drive/pin indicators are
// always the latest server frame verbatim: the console never predicts
// physics locally. Replaying a recorded frame log through reduce() yields
// identical chart buffers.

import type { StateFrame, SwitchName } from './protocol.js';

export const CHART_WINDOW_S = 10;
export const DEFAULT_RATE_HZ = 50;

export type ConnectionStatus = 'connecting' | 'connected' | 'disconnected';

export interface ChartPoint {
    tick: number;
    theta: number;
    omega: number;
    gripForce: number;
}

export interface ConsoleState {
    connection: ConnectionStatus;
    sessionId: string | null;
    /** true once a drop forced a fresh session (new-session semantics) */
    sessionWasReset: boolean;
    lastFrame: StateFrame | null;
    /** local gesture state of the two hold-to-press buttons */
    held: { open: boolean; close: boolean };
    /** rolling window, capped at rate_hz * CHART_WINDOW_S points */
    chart: ChartPoint[];
    chartCapacity: number;
    paused: boolean;
    lastError: string | null;
    /** last values submitted through the what-if parameter form */
    params: Record<string, number>;
}

export type ConsoleEvent =
    | { kind: 'connecting' }
    | { kind: 'connected'; sessionId: string; isReconnect: boolean }
    | { kind: 'disconnected' }
    | { kind: 'frame'; frame: StateFrame }
    | { kind: 'button'; switch: SwitchName; held: boolean }
    | { kind: 'subscribed'; rateHz: number }
    | { kind: 'paused'; paused: boolean }
    | { kind: 'param'; path: string; value: number }
    | { kind: 'error'; detail: string };

export function initialState(): ConsoleState {
    return {
        connection: 'connecting',
        sessionId: null,
        sessionWasReset: false,
        lastFrame: null,
        held: { open: false, close: false },
        chart: [],
        chartCapacity: DEFAULT_RATE_HZ * CHART_WINDOW_S,
        paused: true,
        lastError: null,
        params: {},
    };
}

export function reduce(state: ConsoleState, event: ConsoleEvent): ConsoleState {
    switch (event.kind) {
        case 'connecting':
            return { ...state, connection: 'connecting', lastError: null };
        case 'connected':
            return {
                ...state,
                connection: 'connected',
                sessionId: event.sessionId,
                sessionWasReset: event.isReconnect,
                // A new session starts from scratch server-side; stale
                // telemetry and charts would misrepresent it.
                lastFrame: event.isReconnect ? null : state.lastFrame,
                chart: event.isReconnect ? [] : state.chart,
                held: { open: false, close: false },
                lastError: null,
            };
        case 'disconnected':
            return {
                ...state,
                connection: 'disconnected',
                held: { open: false, close: false },
            };
        case 'frame': {
            const point: ChartPoint = {
                tick: event.frame.tick,
                theta: event.frame.theta,
                omega: event.frame.omega,
                gripForce: event.frame.grip_force,
            };
            const chart = [...state.chart, point];
            if (chart.length > state.chartCapacity) {
                chart.splice(0, chart.length - state.chartCapacity);
            }
            return { ...state, lastFrame: event.frame, chart };
        }
        case 'button':
            return { ...state, held: { ...state.held, [event.switch]: event.held } };
        case 'subscribed':
            return { ...state, chartCapacity: Math.max(1, event.rateHz * CHART_WINDOW_S) };
        case 'paused':
            return { ...state, paused: event.paused };
        case 'param':
            return { ...state, params: { ...state.params, [event.path]: event.value } };
        case 'error':
            return { ...state, lastError: event.detail };
    }
}

/** Both switches reported pressed while both outputs sit low: the firmware
 * interlock stop, derived from the received frame only. */
export function interlockActive(state: ConsoleState): boolean {
    const f = state.lastFrame;
    return !!f && f.open_sw === 1 && f.close_sw === 1 && f.rb0 === 0 && f.rb1 === 0;
}

/** Buttons are usable only with a live connection. */
export function switchesEnabled(state: ConsoleState): boolean {
    return state.connection === 'connected';
}

/** Human label for the drive indicator; never locally computed. */
export function driveLabel(state: ConsoleState): string {
    if (!state.lastFrame) return '--';
    return state.lastFrame.drive === 'Brake' || state.lastFrame.drive === 'HighZ'
        ? `stop (${state.lastFrame.drive})`
        : state.lastFrame.drive;
}
