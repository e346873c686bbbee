"""HTTP prediction service and static host for the browser UI.

Stateless by design: the model loads once at startup and is shared
read-only across requests; uploaded audio is never persisted. Pipeline
errors map to stable machine-readable codes so clients can branch on them.
"""

import logging
import uuid
from dataclasses import dataclass
from pathlib import Path

from fastapi import FastAPI, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles

from . import dsp
from .audio_io import PIPELINE_RATE, decode_wav, resample
from .errors import SerkitError, UnsupportedEncoding
from .model import SerModel, load_model, predict

log = logging.getLogger("serkit.service")

DEFAULT_MAX_UPLOAD = 10 * 1024 * 1024


@dataclass(frozen=True)
class ServiceConfig:
    model_path: str
    host: str = "127.0.0.1"
    port: int = 8000
    max_upload_bytes: int = DEFAULT_MAX_UPLOAD
    static_asset_dir: str | None = None

    def __post_init__(self):
        if self.max_upload_bytes <= 0:
            raise ValueError("max_upload_bytes must be positive")


def run_prediction_pipeline(model: SerModel, data: bytes) -> dict:
    """Raw WAV bytes to the JSON-ready response body.

    decode -> mono -> resample to 22050 Hz -> log-mel features ->
    fixed-length window -> ranked prediction.
    """
    clip = decode_wav(data)
    clip = resample(clip, PIPELINE_RATE)
    features = dsp.extract_features(clip)
    result = predict(model, features)
    return {
        "top1": {
            "gender": result.top1.gender,
            "emotion": result.top1.emotion,
            "probability": result.ranked[0][1],
        },
        "ranked": [
            {"gender": label.gender, "emotion": label.emotion, "probability": prob}
            for label, prob in result.ranked
        ],
        "model_version": str(model.version),
        "window_seconds": dsp.CANONICAL_SECONDS,
        "duration_seconds": clip.duration_seconds,
    }


def create_app(model: SerModel, max_upload_bytes: int = DEFAULT_MAX_UPLOAD,
               static_asset_dir=None) -> FastAPI:
    app = FastAPI(title="serkit prediction service")
    app.add_middleware(CORSMiddleware, allow_origins=["*"], allow_methods=["*"],
                       allow_headers=["*"])

    def error_response(status: int, code: str, detail: str) -> JSONResponse:
        return JSONResponse(status_code=status, content={"error": code, "detail": detail})

    @app.get("/api/health")
    def health():
        return {
            "status": "ok",
            "model_version": str(model.version),
            "model_checksum": model.file_checksum,
            "classes": len(model.class_labels),
        }

    @app.get("/api/model-info")
    def model_info():
        return {
            "version": str(model.version),
            "input_shape": list(model.input_shape),
            "layers": [type(layer).__name__ for layer in model.layers],
            "parameters": int(sum(p.size for p in model.parameter_list())),
            "class_labels": [{"gender": c.gender, "emotion": c.emotion}
                             for c in model.class_labels],
        }

    @app.post("/api/predict")
    async def predict_endpoint(request: Request):
        content_type = request.headers.get("content-type", "")
        if content_type.startswith("multipart/form-data"):
            form = await request.form()
            upload = form.get("audio")
            if upload is None:
                return error_response(400, "missing_audio_field",
                                      "multipart request needs a file field named 'audio'")
            data = await upload.read()
        else:
            data = await request.body()

        if len(data) > max_upload_bytes:
            return error_response(400, "payload_too_large",
                                  f"audio exceeds {max_upload_bytes} bytes")
        try:
            body = run_prediction_pipeline(model, data)
        except UnsupportedEncoding as exc:
            return error_response(415, exc.code, str(exc))
        except SerkitError as exc:
            return error_response(400, exc.code, str(exc))
        except Exception:
            error_id = uuid.uuid4().hex[:12]
            log.exception("prediction failed (error id %s)", error_id)
            return error_response(500, "internal_error", f"error id {error_id}")
        return JSONResponse(content=body)

    if static_asset_dir is not None:
        app.mount("/", StaticFiles(directory=str(static_asset_dir), html=True), name="ui")
    else:
        @app.get("/")
        def index():
            return {"service": "serkit", "endpoints": ["/api/health", "/api/model-info",
                                                       "/api/predict"]}

    return app


def serve(config: ServiceConfig) -> None:
    """Load the model (fail fast) and run the service until shutdown."""
    import uvicorn

    model = load_model(config.model_path)
    if config.static_asset_dir is not None and not Path(config.static_asset_dir).is_dir():
        raise FileNotFoundError(f"static asset dir {config.static_asset_dir} does not exist")
    app = create_app(model, max_upload_bytes=config.max_upload_bytes,
                     static_asset_dir=config.static_asset_dir)
    uvicorn.run(app, host=config.host, port=config.port, log_level="info")
