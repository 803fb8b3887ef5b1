// Raw-pixel image rendering. The payload spells out shape, channel order
// and value range, so this is a mechanical mapping to an SVG pixel grid
// (works headless; a canvas fast path is unnecessary at these sizes).

import type { ImagePayload } from "../types.js";
import { svgEl } from "./svg.js";

export function pixelColor(payload: ImagePayload, x: number, y: number): string {
  const { width, channels, pixels } = payload;
  const base = (y * width + x) * channels;
  if (channels === 1) {
    const v = pixels[base];
    return `rgb(${v}, ${v}, ${v})`;
  }
  return `rgb(${pixels[base]}, ${pixels[base + 1]}, ${pixels[base + 2]})`;
}

export function renderImage(
  payload: ImagePayload,
  scale = 8,
  extraClass = "",
): SVGSVGElement {
  const svg = svgEl("svg", {
    width: payload.width * scale,
    height: payload.height * scale,
    viewBox: `0 0 ${payload.width * scale} ${payload.height * scale}`,
    class: `pixel-image ${extraClass}`.trim(),
    "data-width": payload.width,
    "data-height": payload.height,
    "data-channels": payload.channels,
  });
  for (let y = 0; y < payload.height; y++) {
    for (let x = 0; x < payload.width; x++) {
      svg.append(
        svgEl("rect", {
          x: x * scale,
          y: y * scale,
          width: scale,
          height: scale,
          fill: pixelColor(payload, x, y),
          "data-x": x,
          "data-y": y,
        }),
      );
    }
  }
  return svg;
}
