/**
 * Maps wall-clock time onto a playback plan's presentation timeline.
 *
 * The service computes presentation times as (t_i - t0) / speed, so at
 * speed k the displayed frame timestamps advance k seconds of stored time
 * per wall second. The scheduler owns only the cursor; fetching and drawing
 * the frames is the caller's business.
 */

import type { PlaybackPlan } from "./api.js";

export interface PlanFrame {
  t: number;
  url: string;
}

export class PlaybackScheduler {
  private readonly presentation: number[];
  private playing = false;
  /** Cursor on the presentation timeline, in seconds; frozen while paused. */
  private position = 0;
  private wallAtPlay = 0;

  constructor(
    readonly plan: PlaybackPlan,
    private readonly now: () => number = () => Date.now() / 1000,
  ) {
    if (!(plan.speed > 0)) {
      throw new RangeError(`playback speed must be > 0, got ${plan.speed}`);
    }
    if (plan.frames.length !== plan.presentation_times.length) {
      throw new RangeError(
        `plan mismatch: ${plan.frames.length} frames vs ${plan.presentation_times.length} presentation times`,
      );
    }
    this.presentation = plan.presentation_times;
    for (let i = 1; i < this.presentation.length; i++) {
      if (this.presentation[i] < this.presentation[i - 1]) {
        throw new RangeError("presentation times must be non-decreasing");
      }
    }
  }

  get frameCount(): number {
    return this.plan.frames.length;
  }

  get empty(): boolean {
    return this.frameCount === 0;
  }

  /** Playback controls stay disabled for an empty window. */
  get canPlay(): boolean {
    return !this.empty;
  }

  get isPlaying(): boolean {
    return this.playing;
  }

  play(): void {
    if (this.playing || !this.canPlay) return;
    this.wallAtPlay = this.now();
    this.playing = true;
  }

  pause(): void {
    if (!this.playing) return;
    this.position = this.cursor();
    this.playing = false;
  }

  toggle(): void {
    if (this.playing) this.pause();
    else this.play();
  }

  /** Current presentation-timeline position in seconds. */
  cursor(): number {
    return this.playing ? this.position + (this.now() - this.wallAtPlay) : this.position;
  }

  /** Index of the frame on screen: the last one whose presentation time has passed. */
  currentIndex(): number {
    if (this.empty) return -1;
    const pos = this.cursor();
    // binary search: last index with presentation[i] <= pos, clamped to [0, n-1]
    let lo = 0;
    let hi = this.presentation.length - 1;
    if (pos <= this.presentation[0]) return 0;
    if (pos >= this.presentation[hi]) return hi;
    while (lo + 1 < hi) {
      const mid = (lo + hi) >> 1;
      if (this.presentation[mid] <= pos) lo = mid;
      else hi = mid;
    }
    return lo;
  }

  currentFrame(): PlanFrame | null {
    const idx = this.currentIndex();
    return idx < 0 ? null : this.plan.frames[idx];
  }

  /** Stored timestamp of the frame on screen. */
  displayedTimestamp(): number | null {
    return this.currentFrame()?.t ?? null;
  }

  atEnd(): boolean {
    if (this.empty) return true;
    return this.cursor() >= this.presentation[this.presentation.length - 1];
  }

  /**
   * Jump to the stored frame nearest the given timestamp (ties resolve to the
   * earlier frame, matching the service's nearest-frame rule). Out-of-range
   * targets clamp to the first or last frame.
   */
  seek(frameTime: number): void {
    if (this.empty) return;
    let best = 0;
    let bestDist = Math.abs(this.plan.frames[0].t - frameTime);
    for (let i = 1; i < this.plan.frames.length; i++) {
      const dist = Math.abs(this.plan.frames[i].t - frameTime);
      if (dist < bestDist) {
        best = i;
        bestDist = dist;
      }
    }
    this.position = this.presentation[best];
    if (this.playing) this.wallAtPlay = this.now();
  }
}
