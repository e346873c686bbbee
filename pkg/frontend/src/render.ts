import type { ClientPrediction } from './types.js';

function escapeHtml(text: string): string {
  return text.replace(/&/g, '&amp;').replace(/</g, '&lt;').replace(/>/g, '&gt;');
}

/**
 * Horizontal bar per class, in the order the service ranked them, with
 * the top-1 row highlighted. Percentages shown to one decimal.
 */
export function renderBars(prediction: ClientPrediction): string {
  return prediction.ranked
    .map((entry, i) => {
      const pct = (entry.probability * 100).toFixed(1);
      const width = Math.max(entry.probability * 100, 0.5);
      const cls = i === 0 ? 'bar-row top1' : 'bar-row';
      return (
        `<div class="${cls}">` +
        `<span class="bar-label">${escapeHtml(entry.gender)} ${escapeHtml(entry.emotion)}</span>` +
        `<span class="bar-track"><span class="bar-fill" style="width:${width}%"></span></span>` +
        `<span class="bar-pct">${pct}%</span>` +
        `</div>`
      );
    })
    .join('\n');
}

/** Session history, newest first; cleared by a page reload by design. */
export function renderHistory(entries: ClientPrediction[]): string {
  if (entries.length === 0) {
    return '<p class="history-empty">No analyses yet this session.</p>';
  }
  return entries
    .slice()
    .reverse()
    .map((e) => {
      const pct = (e.top1.probability * 100).toFixed(1);
      return (
        `<div class="history-row">` +
        `<span class="history-time">${escapeHtml(e.timestamp)}</span>` +
        `<span class="history-source">${e.source}</span>` +
        `<span class="history-top1">${escapeHtml(e.top1.gender)} ${escapeHtml(e.top1.emotion)} (${pct}%)</span>` +
        `</div>`
      );
    })
    .join('\n');
}

export function renderError(message: string, retryable: boolean): string {
  const cls = retryable ? 'banner error retryable' : 'banner error';
  return `<div class="${cls}">${escapeHtml(message)}</div>`;
}
