/** Loop panel contents, kept as data for testability. */

import type { LoopsPayload } from "./api.js";

export interface LoopBadge {
  badge: "B" | "R" | "?";
  members: string;
  delayed: boolean;
}

const BADGES = {
  balancing: "B",
  reinforcing: "R",
  indeterminate: "?",
} as const;

export function loopBadges(payload: LoopsPayload): LoopBadge[] {
  return payload.loops.map((loop) => ({
    badge: BADGES[loop.polarity] ?? "?",
    members: loop.nodes.join(" → "),
    delayed: loop.delayed,
  }));
}
