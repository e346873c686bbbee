import { AnalysisError, FetchLike, analyze } from './api.js';
import { MSG_MIC_DENIED, MSG_NOT_WAV, MSG_TOO_SHORT } from './messages.js';
import { RecorderLike } from './recorder.js';
import { renderBars, renderError, renderHistory } from './render.js';
import type { ClientPrediction, PredictionSource } from './types.js';
import { encodeWavPcm16 } from './wav.js';

export const MIN_RECORDING_SECONDS = 0.2;

export type Phase = 'idle' | 'recording' | 'pending';

export interface ViewState {
  phase: Phase;
  recordLabel: string;
  controlsDisabled: boolean;
  resultHtml: string;
  errorHtml: string;
  historyHtml: string;
}

export interface UploadedFile {
  name: string;
  arrayBuffer(): Promise<ArrayBuffer>;
}

interface AppDeps {
  recorder: RecorderLike;
  fetchFn?: FetchLike;
  now?: () => Date;
}

/**
 * UI state machine, free of DOM dependencies: the page layer calls the
 * action methods and repaints from view(). At most one request is in
 * flight; history lives in memory only and dies with the page.
 */
export class App {
  private phase: Phase = 'idle';
  private history: ClientPrediction[] = [];
  private current: ClientPrediction | null = null;
  private error: { message: string; retryable: boolean } | null = null;

  constructor(private deps: AppDeps) {}

  view(): ViewState {
    const labels: Record<Phase, string> = {
      idle: 'Record',
      recording: 'Stop & analyze',
      pending: 'Analyzing…',
    };
    return {
      phase: this.phase,
      recordLabel: labels[this.phase],
      controlsDisabled: this.phase === 'pending',
      resultHtml: this.current ? renderBars(this.current) : '',
      errorHtml: this.error ? renderError(this.error.message, this.error.retryable) : '',
      historyHtml: renderHistory(this.history),
    };
  }

  get sessionHistory(): readonly ClientPrediction[] {
    return this.history;
  }

  async toggleRecord(): Promise<void> {
    if (this.phase === 'pending') return;
    if (this.phase === 'idle') {
      this.error = null;
      try {
        await this.deps.recorder.start();
        this.phase = 'recording';
      } catch {
        this.error = { message: MSG_MIC_DENIED, retryable: false };
      }
      return;
    }
    // recording -> stop, guard length, analyze
    const capture = await this.deps.recorder.stop();
    this.phase = 'idle';
    if (capture.seconds < MIN_RECORDING_SECONDS) {
      this.error = { message: MSG_TOO_SHORT, retryable: false };
      return;
    }
    await this.analyzeBytes(encodeWavPcm16(capture.samples, capture.sampleRate), 'recorded');
  }

  async uploadFile(file: UploadedFile): Promise<void> {
    if (this.phase !== 'idle') return;
    if (!file.name.toLowerCase().endsWith('.wav')) {
      this.error = { message: MSG_NOT_WAV, retryable: false };
      return;
    }
    await this.analyzeBytes(await file.arrayBuffer(), 'uploaded');
  }

  private async analyzeBytes(audio: ArrayBuffer, source: PredictionSource): Promise<void> {
    this.phase = 'pending';
    this.error = null;
    try {
      const prediction = await analyze(audio, source, this.deps.fetchFn, this.deps.now);
      this.current = prediction;
      this.history.push(prediction);
    } catch (err) {
      if (err instanceof AnalysisError) {
        this.error = { message: err.message, retryable: err.retryable };
      } else {
        this.error = { message: String(err), retryable: false };
      }
    } finally {
      this.phase = 'idle';
    }
  }
}
