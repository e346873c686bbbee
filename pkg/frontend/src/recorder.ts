/** Microphone capture via Web Audio, yielding raw Float32 buffers.
 *
 * MediaRecorder would hand back webm/opus; the service speaks WAV only,
 * so capture collects raw PCM and the app encodes PCM16 itself.
 */

export interface Capture {
  samples: Float32Array;
  sampleRate: number;
  seconds: number;
}

export interface RecorderLike {
  start(): Promise<void>;
  stop(): Promise<Capture>;
}

export class MicRecorder implements RecorderLike {
  private stream?: MediaStream;
  private context?: AudioContext;
  private processor?: ScriptProcessorNode;
  private chunks: Float32Array[] = [];

  async start(): Promise<void> {
    this.stream = await navigator.mediaDevices.getUserMedia({ audio: true });
    this.context = new AudioContext();
    const source = this.context.createMediaStreamSource(this.stream);
    this.processor = this.context.createScriptProcessor(4096, 1, 1);
    this.chunks = [];
    this.processor.onaudioprocess = (event) => {
      this.chunks.push(new Float32Array(event.inputBuffer.getChannelData(0)));
    };
    source.connect(this.processor);
    this.processor.connect(this.context.destination);
  }

  async stop(): Promise<Capture> {
    const context = this.context;
    if (!context) throw new Error('recorder was never started');
    this.processor?.disconnect();
    this.stream?.getTracks().forEach((t) => t.stop());
    await context.close();

    const total = this.chunks.reduce((acc, c) => acc + c.length, 0);
    const samples = new Float32Array(total);
    let offset = 0;
    for (const chunk of this.chunks) {
      samples.set(chunk, offset);
      offset += chunk.length;
    }
    this.context = undefined;
    return { samples, sampleRate: context.sampleRate, seconds: total / context.sampleRate };
  }
}
