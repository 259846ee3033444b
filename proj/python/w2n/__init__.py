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
"""Whisper-to-normal speech conversion toolkit."""

from ._w2n import (
    AnalysisConfig,
    Error,
    apply_mask,
    compute_mos,
    convert,
    eq1_g_loss,
    eq1_g_loss_from_scores,
    frame_count,
    generate_mask,
    mcd,
    mel_spectrogram,
    resample,
    test_mask,
    trim_silence,
    vad_labels,
    vocode_griffin_lim,
)

__all__ = [
    "AnalysisConfig",
    "Error",
    "apply_mask",
    "compute_mos",
    "convert",
    "eq1_g_loss",
    "eq1_g_loss_from_scores",
    "frame_count",
    "generate_mask",
    "mcd",
    "mel_spectrogram",
    "resample",
    "test_mask",
    "trim_silence",
    "vad_labels",
    "vocode_griffin_lim",
]
