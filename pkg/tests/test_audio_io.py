import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from references import wav_float32_bytes, write_wav_pcm16_stdlib
from serkit.audio_io import AudioClip, decode_wav, encode_wav, resample
from serkit.errors import EmptyAudio, MalformedContainer, UnsupportedEncoding


class TestDecode:
    def test_pcm16_scaling(self, tmp_path):
        path = tmp_path / "a.wav"
        write_wav_pcm16_stdlib(path, [16384, -16384, 32767, -32768], 22050)
        clip = decode_wav(path.read_bytes())
        assert clip.sample_rate == 22050
        np.testing.assert_allclose(
            clip.samples, [0.5, -0.5, 32767 / 32768, -1.0], atol=0)

    def test_stereo_averaged_per_frame(self, tmp_path):
        path = tmp_path / "st.wav"
        # interleaved L/R: (16384, 8192) -> 0.375, (0, -16384) -> -0.25
        write_wav_pcm16_stdlib(path, [16384, 8192, 0, -16384], 44100, channels=2)
        clip = decode_wav(path.read_bytes())
        np.testing.assert_allclose(clip.samples, [0.375, -0.25])

    def test_stereo_float_frame_mean(self):
        data = wav_float32_bytes(np.array([0.2, 0.6], dtype=np.float32), 22050)
        # patch channel count in the fmt chunk
        data = data[:22] + b"\x02\x00" + data[24:]
        clip = decode_wav(data)
        np.testing.assert_allclose(clip.samples, [np.float64(np.float32(0.2) + np.float32(0.6)) / 2])

    def test_float32_sine_sample_exact(self):
        t = np.arange(22050) / 22050
        wave_f32 = (0.8 * np.sin(2 * np.pi * 440 * t)).astype(np.float32)
        clip = decode_wav(wav_float32_bytes(wave_f32, 22050))
        assert len(clip.samples) == 22050
        np.testing.assert_array_equal(clip.samples, wave_f32.astype(np.float64))
        assert np.abs(clip.samples).max() == pytest.approx(0.8, abs=1e-4)

    def test_skips_unknown_chunks(self):
        base = wav_float32_bytes(np.zeros(4, dtype=np.float32) + 0.25, 8000)
        # insert a LIST chunk between fmt and data
        extra = b"LIST" + (6).to_bytes(4, "little") + b"INFOab"
        data = base[:36] + extra + base[36:]
        data = data[:4] + (len(data) - 8).to_bytes(4, "little") + data[8:]
        clip = decode_wav(data)
        assert list(clip.samples) == [0.25] * 4

    def test_not_riff(self):
        with pytest.raises(MalformedContainer):
            decode_wav(b"\x00")
        with pytest.raises(MalformedContainer):
            decode_wav(b"OggS" + b"\x00" * 40)

    def test_missing_data_chunk(self):
        data = wav_float32_bytes(np.zeros(4, dtype=np.float32), 8000)[:36]
        data = data[:4] + (28).to_bytes(4, "little") + data[8:]
        with pytest.raises(MalformedContainer):
            decode_wav(data)

    def test_unsupported_codec(self, tmp_path):
        data = bytearray(wav_float32_bytes(np.zeros(4, dtype=np.float32), 8000))
        data[20:22] = (7).to_bytes(2, "little")  # mu-law tag
        with pytest.raises(UnsupportedEncoding):
            decode_wav(bytes(data))

    def test_zero_frames(self):
        with pytest.raises(EmptyAudio):
            decode_wav(wav_float32_bytes(np.zeros(0, dtype=np.float32), 8000))

    @settings(max_examples=30, deadline=None)
    @given(st.lists(st.floats(min_value=-1.0, max_value=1.0, width=32),
                    min_size=1, max_size=200))
    def test_float32_roundtrip(self, values):
        clip = AudioClip(samples=np.array(values, dtype=np.float64), sample_rate=16000)
        back = decode_wav(encode_wav(clip, "float32"))
        np.testing.assert_array_equal(
            back.samples, np.array(values, dtype=np.float32).astype(np.float64))
        assert back.sample_rate == 16000


class TestResample:
    def test_identity_when_rates_match(self):
        clip = AudioClip(samples=np.linspace(-1, 1, 1000), sample_rate=22050)
        assert resample(clip, 22050) is clip

    def test_dc_preserved(self):
        clip = AudioClip(samples=np.full(22050, 0.7), sample_rate=44100)
        out = resample(clip, 22050)
        assert out.sample_rate == 22050
        interior = out.samples[100:-100]
        np.testing.assert_allclose(interior, 0.7, atol=1e-3)

    def test_tone_peak_survives(self):
        t = np.arange(48000) / 48000
        clip = AudioClip(samples=np.sin(2 * np.pi * 1000 * t), sample_rate=48000)
        out = resample(clip, 22050)
        assert abs(len(out.samples) - 22050) <= 1
        spectrum = np.abs(np.fft.rfft(out.samples * np.hanning(len(out.samples))))
        freqs = np.fft.rfftfreq(len(out.samples), 1 / 22050)
        bin_width = freqs[1] - freqs[0]
        assert abs(freqs[spectrum.argmax()] - 1000.0) <= bin_width

    @pytest.mark.parametrize("src_rate,n", [(44100, 33075), (48000, 13441),
                                            (16000, 16000), (8000, 4001)])
    def test_duration_within_one_sample(self, src_rate, n):
        rng = np.random.default_rng(3)
        clip = AudioClip(samples=rng.uniform(-1, 1, n), sample_rate=src_rate)
        out = resample(clip, 22050)
        assert abs(out.duration_seconds - clip.duration_seconds) <= 1 / 22050
