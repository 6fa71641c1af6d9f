// Minimal canvas strip chart: one series against the rolling tick window.

import type { ChartPoint } from './state.js';

export interface SeriesSpec {
    label: string;
    color: string;
    pick: (p: ChartPoint) => number;
    min?: number;
    max?: number;
}

export function drawStripChart(
    canvas: HTMLCanvasElement,
    points: ChartPoint[],
    spec: SeriesSpec,
): void {
    const ctx = canvas.getContext('2d');
    if (!ctx) return;
    const w = canvas.width;
    const h = canvas.height;
    ctx.clearRect(0, 0, w, h);
    ctx.fillStyle = '#10151c';
    ctx.fillRect(0, 0, w, h);

    ctx.fillStyle = '#8fa3b8';
    ctx.font = '11px system-ui, sans-serif';
    ctx.fillText(spec.label, 8, 14);
    if (points.length < 2) return;

    let lo = spec.min ?? Infinity;
    let hi = spec.max ?? -Infinity;
    if (spec.min === undefined || spec.max === undefined) {
        for (const p of points) {
            const v = spec.pick(p);
            if (v < lo) lo = v;
            if (v > hi) hi = v;
        }
    }
    if (hi - lo < 1e-9) {
        hi = lo + 1;
    }
    const pad = 6;
    const t0 = points[0]!.tick;
    const t1 = points[points.length - 1]!.tick;
    const span = Math.max(1, t1 - t0);

    ctx.strokeStyle = '#24303d';
    ctx.beginPath();
    const zeroY = h - pad - ((0 - lo) / (hi - lo)) * (h - 2 * pad);
    if (zeroY >= 0 && zeroY <= h) {
        ctx.moveTo(0, zeroY);
        ctx.lineTo(w, zeroY);
    }
    ctx.stroke();

    ctx.strokeStyle = spec.color;
    ctx.lineWidth = 1.5;
    ctx.beginPath();
    points.forEach((p, i) => {
        const x = ((p.tick - t0) / span) * (w - 2 * pad) + pad;
        const y = h - pad - ((spec.pick(p) - lo) / (hi - lo)) * (h - 2 * pad);
        if (i === 0) ctx.moveTo(x, y);
        else ctx.lineTo(x, y);
    });
    ctx.stroke();

    ctx.fillStyle = '#5d7283';
    ctx.fillText(hi.toPrecision(3), w - 54, 14);
    ctx.fillText(lo.toPrecision(3), w - 54, h - 6);
}
