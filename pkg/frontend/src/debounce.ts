/** Trailing-edge debounce with injectable timers so tests can step time. */

export interface Timers {
  set(fn: () => void, ms: number): number;
  clear(handle: number): void;
}

const realTimers: Timers = {
  set: (fn, ms) => setTimeout(fn, ms) as unknown as number,
  clear: (handle) => clearTimeout(handle),
};

export interface Debounced<A extends unknown[]> {
  (...args: A): void;
  /** Run a pending call now instead of waiting out the delay. */
  flush(): void;
  cancel(): void;
  pending(): boolean;
}

export function debounce<A extends unknown[]>(
  fn: (...args: A) => void,
  ms: number,
  timers: Timers = realTimers,
): Debounced<A> {
  let handle: number | null = null;
  let lastArgs: A | null = null;

  const fire = () => {
    handle = null;
    if (lastArgs !== null) {
      const args = lastArgs;
      lastArgs = null;
      fn(...args);
    }
  };

  const call = (...args: A) => {
    lastArgs = args;
    if (handle !== null) timers.clear(handle);
    handle = timers.set(fire, ms);
  };
  call.flush = () => {
    if (handle !== null) {
      timers.clear(handle);
      fire();
    }
  };
  call.cancel = () => {
    if (handle !== null) timers.clear(handle);
    handle = null;
    lastArgs = null;
  };
  call.pending = () => handle !== null;
  return call;
}
