/** User-facing strings, centralized so tests can assert them exactly. */

export const MSG_MIC_DENIED =
  'Microphone access was denied. Allow microphone access in your browser settings and try again.';

export const MSG_TOO_SHORT =
  'Recording too short — hold for at least 0.2 seconds and try again.';

export const MSG_UNREACHABLE =
  'Could not reach the analysis service. Check that it is running, then retry.';

export const MSG_NOT_WAV =
  'Only .wav files are supported. Convert the clip to WAV and try again.';

export function serviceErrorMessage(code: string, detail: string): string {
  return `The service rejected the audio (${code}): ${detail}`;
}
