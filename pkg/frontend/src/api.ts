import { MSG_UNREACHABLE, serviceErrorMessage } from './messages.js';
import type { ClientPrediction, PredictResponse, PredictionSource } from './types.js';

export type FetchLike = (url: string, init: RequestInit) => Promise<Response>;

export class AnalysisError extends Error {
  constructor(message: string, readonly retryable: boolean) {
    super(message);
  }
}

function validate(body: PredictResponse): PredictResponse {
  if (!Array.isArray(body.ranked) || body.ranked.length !== 12) {
    throw new AnalysisError('Service response did not contain 12 ranked classes.', false);
  }
  const total = body.ranked.reduce((acc, e) => acc + e.probability, 0);
  if (Math.abs(total - 1) > 1e-6) {
    throw new AnalysisError('Service response probabilities do not sum to 1.', false);
  }
  return body;
}

/**
 * POST audio bytes to the prediction endpoint.
 *
 * The returned prediction carries the service's numbers verbatim; no
 * client-side renormalization happens anywhere downstream.
 */
export async function analyze(
  audio: BodyInit,
  source: PredictionSource,
  fetchFn: FetchLike = fetch,
  now: () => Date = () => new Date(),
): Promise<ClientPrediction> {
  let response: Response;
  try {
    response = await fetchFn('/api/predict', {
      method: 'POST',
      headers: { 'content-type': 'audio/wav' },
      body: audio,
    });
  } catch {
    throw new AnalysisError(MSG_UNREACHABLE, true);
  }

  if (!response.ok) {
    let code = `http_${response.status}`;
    let detail = response.statusText;
    try {
      const body = (await response.json()) as { error?: string; detail?: string };
      if (body.error) code = body.error;
      if (body.detail) detail = body.detail;
    } catch {
      // non-JSON error body; keep the HTTP fallback text
    }
    throw new AnalysisError(serviceErrorMessage(code, detail), false);
  }

  const body = validate((await response.json()) as PredictResponse);
  return {
    timestamp: now().toISOString(),
    source,
    ranked: body.ranked,
    top1: body.top1,
  };
}
