/** Debounced request runner with latest-wins delivery.
 *
 * Rapid calls collapse into one request after the debounce interval, and a
 * response is delivered only if no newer request has been dispatched since —
 * stale responses are discarded, so at most the newest result renders.
 */

export const DEBOUNCE_MS = 60;

export class LatestWins<TArgs, TResult> {
  private timer: ReturnType<typeof setTimeout> | null = null;
  private pendingArgs: TArgs | null = null;
  private dispatchSeq = 0;
  private deliveredSeq = 0;

  constructor(
    private readonly run: (args: TArgs) => Promise<TResult>,
    private readonly deliver: (result: TResult, args: TArgs) => void,
    private readonly onError: (err: unknown) => void = () => undefined,
    private readonly debounceMs: number = DEBOUNCE_MS,
  ) {}

  request(args: TArgs): void {
    this.pendingArgs = args;
    if (this.timer !== null) {
      clearTimeout(this.timer);
    }
    this.timer = setTimeout(() => {
      this.timer = null;
      this.dispatch();
    }, this.debounceMs);
  }

  /** Fire immediately, skipping the debounce (used for the initial render). */
  requestNow(args: TArgs): void {
    this.pendingArgs = args;
    if (this.timer !== null) {
      clearTimeout(this.timer);
      this.timer = null;
    }
    this.dispatch();
  }

  private dispatch(): void {
    const args = this.pendingArgs;
    if (args === null) {
      return;
    }
    this.pendingArgs = null;
    const seq = ++this.dispatchSeq;
    this.run(args).then(
      (result) => {
        if (seq > this.deliveredSeq) {
          this.deliveredSeq = seq;
          this.deliver(result, args);
        }
      },
      (err) => {
        if (seq > this.deliveredSeq) {
          this.deliveredSeq = seq;
          this.onError(err);
        }
      },
    );
  }
}
