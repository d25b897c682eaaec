// Coalesces pointer moves into at most one mouse message per tick interval:
// the latest goal wins, identical goals are not resent.

export type GoalSender = (goal: [number, number]) => void;

export class GoalCoalescer {
  private pending: [number, number] | null = null;
  private lastSent: [number, number] | null = null;
  private lastSendMs = -Infinity;

  constructor(
    private readonly send: GoalSender,
    readonly minIntervalMs = 20,
  ) {}

  /** Record the newest pointer position (any rate). */
  update(goal: [number, number]): void {
    this.pending = goal;
  }

  /** Called by the send timer; emits the latest goal at most once per
   * interval and only when it changed. */
  tick(nowMs: number): boolean {
    if (this.pending === null) return false;
    if (nowMs - this.lastSendMs < this.minIntervalMs) return false;
    if (
      this.lastSent !== null &&
      this.lastSent[0] === this.pending[0] &&
      this.lastSent[1] === this.pending[1]
    ) {
      return false;
    }
    this.send(this.pending);
    this.lastSent = this.pending;
    this.lastSendMs = nowMs;
    return true;
  }
}
