/** Wire format of POST /api/predict, mirrored exactly. */
export interface RankedEntry {
  gender: string;
  emotion: string;
  probability: number;
}

export interface PredictResponse {
  top1: RankedEntry;
  ranked: RankedEntry[];
  model_version: string;
  window_seconds: number;
  duration_seconds: number;
}

export type PredictionSource = 'recorded' | 'uploaded';

/** What the user sees per analysis; numbers come verbatim from the service. */
export interface ClientPrediction {
  timestamp: string;
  source: PredictionSource;
  ranked: RankedEntry[];
  top1: RankedEntry;
}
