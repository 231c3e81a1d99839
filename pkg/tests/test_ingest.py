import json
import os
import sys
import time

import numpy as np
import pytest
from PIL import Image

from timebar.core import Interval
from timebar.ingest import (
    IngestError,
    SamplingSpec,
    open_source,
    resize_long_side,
    sample_at_fps,
    sample_frames,
    write_frame_directory,
)

# Stand-in decoder: the "video" is a JSON file {"duration": D}; the frame at
# time t is a solid raster whose red channel is floor(t).
STUB_DECODER = """
import io, json, math, sys
from PIL import Image
t, path = float(sys.argv[1]), sys.argv[2]
d = json.load(open(path))["duration"]
if t >= d:
    sys.stderr.write(f"seek past end: {t}\\n")
    sys.exit(3)
im = Image.new("RGB", (64, 48), (int(math.floor(t)) % 256, 10, 20))
buf = io.BytesIO()
im.save(buf, format="PNG")
sys.stdout.buffer.write(buf.getvalue())
"""

STUB_PROBE = """
import json, sys
print(json.load(open(sys.argv[1]))["duration"])
"""


@pytest.fixture
def stub_video(tmp_path):
    (tmp_path / "dec.py").write_text(STUB_DECODER)
    (tmp_path / "probe.py").write_text(STUB_PROBE)
    video = tmp_path / "clip.mp4"
    video.write_text(json.dumps({"duration": 12.0}))
    decoder = f"{sys.executable} {tmp_path / 'dec.py'} {{t}} {{path}}"
    probe = f"{sys.executable} {tmp_path / 'probe.py'} {{path}}"
    return video, decoder, probe


def _solid(value, h=20, w=40):
    return np.full((h, w, 3), value, np.uint8)


def test_center_of_bin_timestamps(tmp_path):
    src = write_frame_directory(tmp_path / "v", [(float(j), _solid(j)) for j in range(10)], 10.0, 1.0)
    seq = sample_frames(src, SamplingSpec(n_frames=4, long_side=40))
    assert seq.timestamps == [1.25, 3.75, 6.25, 8.75]
    # nearest earlier stored frame
    assert [int(f.pixels[0, 0, 0]) for f in seq] == [1, 3, 6, 8]


def test_window_sampling_and_bounds(tmp_path):
    src = write_frame_directory(tmp_path / "v", [(float(j), _solid(j)) for j in range(10)], 10.0, 1.0)
    seq = sample_frames(src, SamplingSpec(2, 40), Interval(4, 8))
    assert seq.timestamps == [5.0, 7.0]
    assert seq.source_duration == 10.0
    with pytest.raises(IngestError):
        sample_frames(src, SamplingSpec(2, 40), Interval(4, 11))


def test_resize_long_side_rounds_half_up():
    px = np.zeros((45, 100, 3), np.uint8)
    assert resize_long_side(px, 50).shape == (23, 50, 3)  # 22.5 -> 23
    tall = np.zeros((100, 30, 3), np.uint8)
    assert resize_long_side(tall, 40).shape == (40, 12, 3)
    assert resize_long_side(px, 100) is px


def test_sample_at_fps_counts(tmp_path):
    src = write_frame_directory(tmp_path / "v", [(0.0, _solid(1))], 3.5, 1.0)
    assert sample_at_fps(src, 1.0, 40).timestamps == [0.0, 1.0, 2.0]
    assert len(sample_at_fps(src, 2.0, 40)) == 7
    short = write_frame_directory(tmp_path / "s", [(0.0, _solid(1))], 0.4, 1.0)
    with pytest.raises(IngestError):
        sample_at_fps(short, 1.0, 40)


def test_frame_directory_errors(tmp_path):
    with pytest.raises(IngestError):
        open_source(tmp_path / "missing")
    (tmp_path / "empty").mkdir()
    with pytest.raises(IngestError):
        open_source(tmp_path / "empty")
    d = tmp_path / "nodur"
    write_frame_directory(d, [(0.0, _solid(1))], 2.0, 1.0)
    (d / "manifest.json").write_text("{}")
    with pytest.raises(IngestError):
        open_source(d)


def test_video_file_through_external_decoder(stub_video):
    video, decoder, probe = stub_video
    src = open_source(video, decoder, probe)
    assert src.kind == "video-file" and src.duration == 12.0 and src.video_id == "clip"
    seq = sample_frames(src, SamplingSpec(n_frames=3, long_side=32))
    assert seq.timestamps == [2.0, 6.0, 10.0]
    assert [int(f.pixels[0, 0, 0]) for f in seq] == [2, 6, 10]
    assert seq[0].pixels.shape == (24, 32, 3)


def test_decoder_failure_reports_stderr(stub_video, tmp_path):
    video, decoder, probe = stub_video
    video.write_text(json.dumps({"duration": 12.0}))
    src = open_source(video, decoder, probe)
    # lie about the duration so the decoder is asked past its end
    bad = type(src)("video-file", src.path, 40.0, decoder)
    with pytest.raises(IngestError, match="seek past end"):
        sample_frames(bad, SamplingSpec(2, 32))


def test_missing_decoder_binary(stub_video):
    video, _, probe = stub_video
    src = open_source(video, "no-such-decoder-binary {t} {path}", probe)
    with pytest.raises(IngestError, match="failed to run"):
        sample_frames(src, SamplingSpec(1, 32))


def test_rewritten_frame_is_reloaded(tmp_path):
    src = write_frame_directory(tmp_path / "v", [(0.0, _solid(1)), (1.0, _solid(2))], 2.0, 1.0)
    assert sample_frames(src, SamplingSpec(1, 40))[0].pixels[0, 0, 0] == 2
    p = tmp_path / "v" / "frame_000001000.png"
    Image.fromarray(_solid(9)).save(p)
    os.utime(p, ns=(time.time_ns() + 10**9, time.time_ns() + 10**9))
    assert sample_frames(src, SamplingSpec(1, 40))[0].pixels[0, 0, 0] == 9
