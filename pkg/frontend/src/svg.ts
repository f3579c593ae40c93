/** Minimal deterministic SVG scatter rendering (no DOM, no dependencies). */

import { FigureData } from "./figures.js";

const WIDTH = 760;
const HEIGHT = 480;
const MARGIN = { top: 40, right: 30, bottom: 70, left: 70 };

const STYLE: Record<string, { color: string; label: string }> = {
  "la-disc": { color: "#d62728", label: "la-disc" },
  baseline: { color: "#1f77b4", label: "baseline" },
};

function niceStep(span: number): number {
  const raw = span / 6;
  const mag = Math.pow(10, Math.floor(Math.log10(Math.max(raw, 1e-9))));
  for (const m of [1, 2, 5, 10]) {
    if (raw <= m * mag) return m * mag;
  }
  return 10 * mag;
}

function fmt(v: number): string {
  return Number.isInteger(v) ? v.toString() : v.toFixed(1);
}

export function renderSvg(data: FigureData, title: string): string {
  const innerW = WIDTH - MARGIN.left - MARGIN.right;
  const innerH = HEIGHT - MARGIN.top - MARGIN.bottom;
  const ys = data.series.flatMap((s) => s.points.map((p) => p.y));
  const yMaxRaw = Math.max(0, ...ys);
  const yMinRaw = Math.min(0, ...ys);
  const step = niceStep(yMaxRaw - yMinRaw || 1);
  const yMax = Math.ceil((yMaxRaw + 1e-9) / step) * step || step;
  const yMin = Math.floor((yMinRaw - 1e-9) / step) * step;
  const nFiles = Math.max(data.files.length, 1);

  const xPos = (i: number) => MARGIN.left + ((i + 0.5) / nFiles) * innerW;
  const yPos = (v: number) => MARGIN.top + innerH - ((v - yMin) / (yMax - yMin)) * innerH;

  const parts: string[] = [];
  parts.push(
    `<svg xmlns="http://www.w3.org/2000/svg" width="${WIDTH}" height="${HEIGHT}" viewBox="0 0 ${WIDTH} ${HEIGHT}">`,
  );
  parts.push(`<rect width="${WIDTH}" height="${HEIGHT}" fill="white"/>`);
  parts.push(
    `<text x="${WIDTH / 2}" y="22" text-anchor="middle" font-family="sans-serif" font-size="15">${title}</text>`,
  );

  // frame and y ticks
  parts.push(
    `<rect x="${MARGIN.left}" y="${MARGIN.top}" width="${innerW}" height="${innerH}" fill="none" stroke="#333"/>`,
  );
  for (let v = yMin; v <= yMax + 1e-9; v += step) {
    const y = yPos(v);
    parts.push(
      `<line x1="${MARGIN.left}" y1="${fmt(y)}" x2="${MARGIN.left + innerW}" y2="${fmt(y)}" stroke="#ddd"/>`,
    );
    parts.push(
      `<text x="${MARGIN.left - 8}" y="${fmt(y + 4)}" text-anchor="end" font-family="sans-serif" font-size="11">${fmt(v)}</text>`,
    );
  }
  // x labels, rotated for readability
  data.files.forEach((file, i) => {
    const x = xPos(i);
    parts.push(
      `<text x="${fmt(x)}" y="${MARGIN.top + innerH + 14}" text-anchor="end" font-family="sans-serif" font-size="10" transform="rotate(-45 ${fmt(x)} ${MARGIN.top + innerH + 14})">${file}</text>`,
    );
  });
  parts.push(
    `<text x="18" y="${MARGIN.top + innerH / 2}" text-anchor="middle" font-family="sans-serif" font-size="12" transform="rotate(-90 18 ${MARGIN.top + innerH / 2})">${data.yLabel}</text>`,
  );

  // points: circles for the baseline, crosses for la-disc
  for (const series of data.series) {
    const { color } = STYLE[series.approach];
    for (const p of series.points) {
      const x = xPos(p.x);
      const y = yPos(p.y);
      if (series.approach === "baseline") {
        parts.push(`<circle cx="${fmt(x)}" cy="${fmt(y)}" r="4" fill="none" stroke="${color}" stroke-width="1.5"/>`);
      } else {
        parts.push(
          `<path d="M ${fmt(x - 4)} ${fmt(y - 4)} L ${fmt(x + 4)} ${fmt(y + 4)} M ${fmt(x - 4)} ${fmt(y + 4)} L ${fmt(x + 4)} ${fmt(y - 4)}" stroke="${color}" stroke-width="1.5"/>`,
        );
      }
    }
  }

  // legend
  const lx = MARGIN.left + innerW - 130;
  parts.push(`<rect x="${lx - 10}" y="${MARGIN.top + 8}" width="130" height="44" fill="white" stroke="#999"/>`);
  parts.push(
    `<path d="M ${lx} ${MARGIN.top + 18} L ${lx + 8} ${MARGIN.top + 26} M ${lx} ${MARGIN.top + 26} L ${lx + 8} ${MARGIN.top + 18}" stroke="${STYLE["la-disc"].color}" stroke-width="1.5"/>`,
  );
  parts.push(
    `<text x="${lx + 14}" y="${MARGIN.top + 26}" font-family="sans-serif" font-size="11">la-disc</text>`,
  );
  parts.push(
    `<circle cx="${lx + 4}" cy="${MARGIN.top + 40}" r="4" fill="none" stroke="${STYLE.baseline.color}" stroke-width="1.5"/>`,
  );
  parts.push(
    `<text x="${lx + 14}" y="${MARGIN.top + 44}" font-family="sans-serif" font-size="11">baseline</text>`,
  );
  parts.push("</svg>");
  return parts.join("\n") + "\n";
}
