/** Color scales: sequential red for transfusion fractions, gray for the
 * dedicated zero bin. Breakpoints are UI-owned. */

function clamp01(x: number): number {
  return Math.min(Math.max(x, 0), 1);
}

function mix(from: [number, number, number], to: [number, number, number], t: number): string {
  const c = from.map((f, i) => Math.round(f + (to[i]! - f) * t));
  return `rgb(${c[0]}, ${c[1]}, ${c[2]})`;
}

const RED_LO: [number, number, number] = [255, 245, 240];
const RED_HI: [number, number, number] = [165, 15, 21];
const GRAY_LO: [number, number, number] = [247, 247, 247];
const GRAY_HI: [number, number, number] = [82, 82, 82];

export function redScale(fraction: number): string {
  return mix(RED_LO, RED_HI, clamp01(fraction));
}

export function grayScale(fraction: number): string {
  return mix(GRAY_LO, GRAY_HI, clamp01(fraction));
}

export function textColorFor(fraction: number): string {
  return fraction > 0.55 ? "#ffffff" : "#1a1a1a";
}

// Split sub-row indicators (first sub-row = condition holds).
export const SPLIT_TRUE_COLOR = "#2e8540";
export const SPLIT_FALSE_COLOR = "#2b6cb0";
// Dumbbell endpoints.
export const PREOP_COLOR = "#2e8540";
export const POSTOP_COLOR = "#2b6cb0";
