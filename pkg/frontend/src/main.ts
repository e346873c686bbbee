import { App } from './app.js';
import { MicRecorder } from './recorder.js';

const app = new App({ recorder: new MicRecorder() });

const recordButton = document.getElementById('record') as HTMLButtonElement;
const uploadInput = document.getElementById('upload') as HTMLInputElement;
const uploadButton = document.getElementById('upload-button') as HTMLButtonElement;
const result = document.getElementById('result') as HTMLElement;
const error = document.getElementById('error') as HTMLElement;
const history = document.getElementById('history') as HTMLElement;

function repaint(): void {
  const view = app.view();
  recordButton.textContent = view.recordLabel;
  recordButton.disabled = view.controlsDisabled;
  recordButton.classList.toggle('recording', view.phase === 'recording');
  uploadButton.disabled = view.controlsDisabled || view.phase === 'recording';
  result.innerHTML = view.resultHtml;
  error.innerHTML = view.errorHtml;
  history.innerHTML = view.historyHtml;
}

recordButton.addEventListener('click', async () => {
  await app.toggleRecord();
  repaint();
  // while recording, the next click lands here again to stop + analyze
  if (app.view().phase === 'pending') repaint();
});

uploadButton.addEventListener('click', () => uploadInput.click());

uploadInput.addEventListener('change', async () => {
  const file = uploadInput.files?.[0];
  uploadInput.value = '';
  if (!file) return;
  await app.uploadFile(file);
  repaint();
});

repaint();
