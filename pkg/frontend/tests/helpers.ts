import type { Capture, RecorderLike } from '../src/recorder.js';
import type { PredictResponse, RankedEntry } from '../src/types.js';

const GENDERS = ['male', 'female'];
const EMOTIONS = ['neutral', 'happy', 'sad', 'angry', 'fearful', 'disgust'];

/** Deterministic 12-class payload, strictly descending, summing to 1. */
export function mockPayload(): PredictResponse {
  const weights = [30, 20, 12, 9, 7, 6, 5, 4, 3, 2, 1.5, 0.5];
  const ranked: RankedEntry[] = weights.map((w, i) => ({
    gender: GENDERS[i % 2],
    emotion: EMOTIONS[i % 6],
    probability: w / 100,
  }));
  return {
    top1: ranked[0],
    ranked,
    model_version: '1',
    window_seconds: 3.0,
    duration_seconds: 1.25,
  };
}

export function okFetch(payload: PredictResponse, calls?: RequestInit[]) {
  return async (_url: string, init: RequestInit): Promise<Response> => {
    calls?.push(init);
    return new Response(JSON.stringify(payload), {
      status: 200,
      headers: { 'content-type': 'application/json' },
    });
  };
}

export function errorFetch(status: number, code: string, detail: string) {
  return async (): Promise<Response> =>
    new Response(JSON.stringify({ error: code, detail }), { status });
}

export const unreachableFetch = async (): Promise<Response> => {
  throw new TypeError('fetch failed');
};

export class FakeRecorder implements RecorderLike {
  started = 0;
  stopped = 0;
  denied = false;

  constructor(private capture: Capture) {}

  async start(): Promise<void> {
    if (this.denied) throw new DOMException('denied', 'NotAllowedError');
    this.started += 1;
  }

  async stop(): Promise<Capture> {
    this.stopped += 1;
    return this.capture;
  }
}

export function toneCapture(seconds: number, sampleRate = 48000): Capture {
  const n = Math.round(seconds * sampleRate);
  const samples = new Float32Array(n);
  for (let i = 0; i < n; i++) samples[i] = 0.4 * Math.sin((2 * Math.PI * 440 * i) / sampleRate);
  return { samples, sampleRate, seconds };
}
