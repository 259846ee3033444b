#!/usr/bin/env python3
# Copyright 2026 The w2n Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
"""External PESQ scorer: prints one score for (reference, degraded, rate).

Exit status 3 means the `pesq` package is not installed.
"""

import sys
import wave

import numpy as np

UNAVAILABLE = 3


def read_pcm16(path):
    with wave.open(path, "rb") as w:
        if w.getsampwidth() != 2:
            raise ValueError(f"{path}: expected 16-bit PCM")
        data = np.frombuffer(w.readframes(w.getnframes()), dtype="<i2")
        if w.getnchannels() > 1:
            data = data.reshape(-1, w.getnchannels()).mean(axis=1)
        return w.getframerate(), data.astype(np.float64) / 32768.0


def main(argv):
    if len(argv) not in (4, 5):
        print("usage: pesq_scorer.py REF DEG RATE [wb|nb]", file=sys.stderr)
        return 2
    try:
        from pesq import pesq
    except ImportError:
        print("pesq package not installed", file=sys.stderr)
        return UNAVAILABLE
    rate = int(argv[3])
    mode = argv[4] if len(argv) == 5 else ("wb" if rate == 16000 else "nb")
    ref_rate, ref = read_pcm16(argv[1])
    deg_rate, deg = read_pcm16(argv[2])
    if ref_rate != rate or deg_rate != rate:
        print(f"expected {rate} Hz input", file=sys.stderr)
        return 2
    # The scorer's level alignment divides by the signal power, so digital
    # silence gets one LSB of dither.
    rng = np.random.default_rng(0)
    if not np.any(ref):
        ref = rng.uniform(-1.0, 1.0, ref.shape) / 32768.0
    if not np.any(deg):
        deg = rng.uniform(-1.0, 1.0, deg.shape) / 32768.0
    print(f"{pesq(rate, ref, deg, mode):.6f}")
    return 0


if __name__ == "__main__":
    sys.exit(main(sys.argv))
