// DOM wiring: one ConsoleSocket feeding the reducer, one render pass per
// animation frame. All indicator values come out of the reduced state.

import { drawStripChart } from './chart.js';
import type { SwitchName } from './protocol.js';
import { ConsoleSocket } from './socket.js';
import {
    ConsoleState,
    driveLabel,
    initialState,
    interlockActive,
    reduce,
    switchesEnabled,
} from './state.js';

const params = new URLSearchParams(location.search);
const endpoint =
    params.get('endpoint') ?? `ws://${location.hostname || '127.0.0.1'}:7420`;
const rateHz = Number(params.get('rate') ?? '50');

let state: ConsoleState = initialState();
let dirty = true;

const socket = new ConsoleSocket(
    endpoint,
    (ev) => {
        state = reduce(state, ev);
        dirty = true;
    },
    { rateHz },
);

function el<T extends HTMLElement>(id: string): T {
    const node = document.getElementById(id);
    if (!node) throw new Error(`missing element #${id}`);
    return node as T;
}

const banner = el<HTMLDivElement>('banner');
const sessionLabel = el<HTMLSpanElement>('session');
const openBtn = el<HTMLButtonElement>('btn-open');
const closeBtn = el<HTMLButtonElement>('btn-close');
const driveEl = el<HTMLSpanElement>('drive');
const interlockEl = el<HTMLSpanElement>('interlock');
const tickEl = el<HTMLSpanElement>('tick');
const underrunsEl = el<HTMLSpanElement>('underruns');
const forceFill = el<HTMLDivElement>('force-fill');
const forceLabel = el<HTMLSpanElement>('force-label');
const gauge = el<HTMLCanvasElement>('gauge');
const chartTheta = el<HTMLCanvasElement>('chart-theta');
const chartOmega = el<HTMLCanvasElement>('chart-omega');
const chartForce = el<HTMLCanvasElement>('chart-force');
const pins = {
    ra3: el<HTMLSpanElement>('pin-ra3'),
    ra4: el<HTMLSpanElement>('pin-ra4'),
    rb0: el<HTMLSpanElement>('pin-rb0'),
    rb1: el<HTMLSpanElement>('pin-rb1'),
};

// Aperture limits used for gauge scaling only (display, not physics); kept
// in sync with the what-if form when the operator changes them.
let thetaMin = 0.0;
let thetaMax = 1.2;
const FORCE_FULL_SCALE = 50.0;

function sendSwitch(name: SwitchName, held: boolean): void {
    if (!switchesEnabled(state)) return;
    if (state.held[name] === held) return;
    state = reduce(state, { kind: 'button', switch: name, held });
    socket.setSwitch(name, held);
    dirty = true;
}

function bindHoldButton(button: HTMLButtonElement, name: SwitchName): void {
    button.addEventListener('pointerdown', (ev) => {
        ev.preventDefault();
        button.setPointerCapture(ev.pointerId);
        sendSwitch(name, true);
    });
    const release = () => sendSwitch(name, false);
    button.addEventListener('pointerup', release);
    button.addEventListener('pointercancel', release);
    button.addEventListener('pointerleave', release);
}

bindHoldButton(openBtn, 'open');
bindHoldButton(closeBtn, 'close');

const KEY_SWITCH: Record<string, SwitchName> = { o: 'open', c: 'close' };
window.addEventListener('keydown', (ev) => {
    if (ev.repeat) return;
    const name = KEY_SWITCH[ev.key.toLowerCase()];
    if (name) sendSwitch(name, true);
});
window.addEventListener('keyup', (ev) => {
    const name = KEY_SWITCH[ev.key.toLowerCase()];
    if (name) sendSwitch(name, false);
});
window.addEventListener('blur', () => {
    sendSwitch('open', false);
    sendSwitch('close', false);
});

el<HTMLButtonElement>('btn-pause').addEventListener('click', () => {
    if (state.paused) socket.resume();
    else socket.pause();
    dirty = true;
});
el<HTMLButtonElement>('btn-reset').addEventListener('click', () => socket.reset());

el<HTMLFormElement>('param-form').addEventListener('submit', (ev) => {
    ev.preventDefault();
    const path = el<HTMLSelectElement>('param-path').value;
    const value = Number(el<HTMLInputElement>('param-value').value);
    if (!Number.isFinite(value)) return;
    socket.setParam(path, value);
    if (path === 'grip_params.theta_min') thetaMin = value;
    if (path === 'grip_params.theta_max') thetaMax = value;
});

function drawGauge(theta: number | null): void {
    const ctx = gauge.getContext('2d');
    if (!ctx) return;
    const w = gauge.width;
    const h = gauge.height;
    ctx.clearRect(0, 0, w, h);
    const cx = w / 2;
    const cy = h * 0.9;
    const r = Math.min(w, h) * 0.72;
    // Sweep: fully closed on the left, fully open on the right.
    const a0 = Math.PI * 1.15;
    const a1 = Math.PI * 1.85;
    ctx.lineWidth = 10;
    ctx.strokeStyle = '#24303d';
    ctx.beginPath();
    ctx.arc(cx, cy, r, a0, a1);
    ctx.stroke();
    if (theta !== null) {
        const frac = Math.min(1, Math.max(0, (theta - thetaMin) / (thetaMax - thetaMin)));
        ctx.strokeStyle = '#4da3ff';
        ctx.beginPath();
        ctx.arc(cx, cy, r, a0, a0 + (a1 - a0) * frac);
        ctx.stroke();
        ctx.fillStyle = '#dce7f2';
        ctx.font = '22px system-ui, sans-serif';
        ctx.textAlign = 'center';
        ctx.fillText(`${theta.toFixed(3)} rad`, cx, cy - r * 0.35);
        ctx.font = '12px system-ui, sans-serif';
        ctx.fillStyle = '#8fa3b8';
        ctx.fillText(frac < 0.02 ? 'CLOSED' : frac > 0.98 ? 'OPEN' : 'aperture', cx, cy - r * 0.12);
    }
}

function setPin(elm: HTMLSpanElement, value: 0 | 1): void {
    elm.textContent = String(value);
    elm.classList.toggle('hi', value === 1);
}

function render(): void {
    const f = state.lastFrame;
    const enabled = switchesEnabled(state);

    banner.className = `banner ${state.connection}`;
    banner.textContent =
        state.connection === 'connected'
            ? state.sessionWasReset
                ? 'connected (session reset)'
                : 'connected'
            : state.connection === 'connecting'
              ? 'connecting...'
              : 'disconnected';
    sessionLabel.textContent = state.sessionId ?? '--';

    openBtn.disabled = !enabled;
    closeBtn.disabled = !enabled;
    openBtn.classList.toggle('held', state.held.open);
    closeBtn.classList.toggle('held', state.held.close);

    driveEl.textContent = driveLabel(state);
    driveEl.className = f ? `drive-${f.drive.toLowerCase()}` : '';
    const interlocked = interlockActive(state);
    interlockEl.hidden = !interlocked;
    el<HTMLButtonElement>('btn-pause').textContent = state.paused ? 'resume' : 'pause';

    if (f) {
        tickEl.textContent = String(f.tick);
        underrunsEl.textContent = String(f.underruns);
        setPin(pins.ra3, f.open_sw);
        setPin(pins.ra4, f.close_sw);
        setPin(pins.rb0, f.rb0);
        setPin(pins.rb1, f.rb1);
        const frac = Math.min(1, f.grip_force / FORCE_FULL_SCALE);
        forceFill.style.width = `${(frac * 100).toFixed(1)}%`;
        forceLabel.textContent = `${f.grip_force.toFixed(1)} N`;
    }
    drawGauge(f ? f.theta : null);
    drawStripChart(chartTheta, state.chart, {
        label: 'aperture [rad]',
        color: '#4da3ff',
        pick: (p) => p.theta,
        min: thetaMin,
        max: thetaMax,
    });
    drawStripChart(chartOmega, state.chart, {
        label: 'shaft speed [rad/s]',
        color: '#ffb454',
        pick: (p) => p.omega,
    });
    drawStripChart(chartForce, state.chart, {
        label: 'grip force [N]',
        color: '#ff6b6b',
        pick: (p) => p.gripForce,
        min: 0,
        max: FORCE_FULL_SCALE,
    });

    const err = el<HTMLDivElement>('error-line');
    err.textContent = state.lastError ?? '';
    err.hidden = !state.lastError;
}

function frameLoop(): void {
    if (dirty) {
        dirty = false;
        render();
    }
    requestAnimationFrame(frameLoop);
}

socket.connect();
frameLoop();
