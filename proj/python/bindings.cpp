// Copyright 2026 The w2n Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "w2n/errors.hpp"
#include "w2n/eval.hpp"
#include "w2n/gan.hpp"
#include "w2n/masking.hpp"
#include "w2n/mos.hpp"
#include "w2n/synthesis.hpp"
#include "w2n/vad.hpp"

namespace py = pybind11;

namespace {

w2n::Waveform to_waveform(const std::vector<float>& samples, int sample_rate) {
  return w2n::Waveform{samples, sample_rate};
}

w2n::MelSpectrogram to_mel(const Eigen::MatrixXd& values, const w2n::AnalysisConfig& cfg) {
  w2n::MelSpectrogram m;
  m.values = values;
  m.config = cfg;
  return m;
}

std::vector<std::uint8_t> mask_values(const w2n::FrameMask& m) { return m.values; }

}  // namespace

PYBIND11_MODULE(_w2n, m) {
  m.doc() = "w2n core bindings";

  py::register_exception<w2n::Error>(m, "Error", PyExc_RuntimeError);

  py::class_<w2n::AnalysisConfig>(m, "AnalysisConfig")
      .def(py::init<>())
      .def_readwrite("sample_rate", &w2n::AnalysisConfig::sample_rate)
      .def_readwrite("frame_ms", &w2n::AnalysisConfig::frame_ms)
      .def_readwrite("shift_ms", &w2n::AnalysisConfig::shift_ms)
      .def_readwrite("fft_size", &w2n::AnalysisConfig::fft_size)
      .def_readwrite("mel_bins", &w2n::AnalysisConfig::mel_bins)
      .def_readwrite("fmin", &w2n::AnalysisConfig::fmin)
      .def_readwrite("fmax", &w2n::AnalysisConfig::fmax)
      .def_readwrite("log_floor", &w2n::AnalysisConfig::log_floor)
      .def_property_readonly("frame_length", &w2n::AnalysisConfig::frame_length)
      .def_property_readonly("shift_length", &w2n::AnalysisConfig::shift_length)
      .def("hash_hex", &w2n::AnalysisConfig::hash_hex);

  m.def("frame_count", &w2n::frame_count, py::arg("num_samples"), py::arg("frame_length"),
        py::arg("shift"));

  m.def(
      "mel_spectrogram",
      [](const std::vector<float>& samples, int sample_rate, const w2n::AnalysisConfig& cfg) {
        return w2n::mel_spectrogram(to_waveform(samples, sample_rate), cfg).values;
      },
      py::arg("samples"), py::arg("sample_rate"), py::arg("config") = w2n::AnalysisConfig{});

  m.def(
      "resample",
      [](const std::vector<float>& samples, int rate, int target) {
        return w2n::resample(to_waveform(samples, rate), target).samples;
      },
      py::arg("samples"), py::arg("sample_rate"), py::arg("target_rate"));

  m.def(
      "vad_labels",
      [](const std::vector<float>& samples, int sample_rate, const std::string& style) {
        w2n::VadConfig cfg;
        cfg.analysis.sample_rate = sample_rate;
        return w2n::classify(to_waveform(samples, sample_rate), w2n::parse_speech_style(style), cfg)
            .to_string();
      },
      py::arg("samples"), py::arg("sample_rate"), py::arg("style") = "normal",
      "Per-frame labels as a string of 'v', 'u' and 'n'.");

  m.def(
      "trim_silence",
      [](const std::vector<float>& samples, int sample_rate, const std::string& style) {
        w2n::VadConfig cfg;
        cfg.analysis.sample_rate = sample_rate;
        const auto w = to_waveform(samples, sample_rate);
        const auto t = w2n::trim_silence(w, w2n::classify(w, w2n::parse_speech_style(style), cfg));
        return py::make_tuple(t.waveform.samples, t.begin_sample, t.end_sample, t.no_speech);
      },
      py::arg("samples"), py::arg("sample_rate"), py::arg("style") = "normal");

  m.def(
      "generate_mask",
      [](int window, double fraction, const std::string& scatter, std::uint64_t seed) {
        w2n::MaskConfig cfg;
        cfg.window_frames = window;
        cfg.mask_fraction = fraction;
        cfg.scatter = w2n::parse_mask_scatter(scatter);
        w2n::Rng rng(seed);
        return mask_values(w2n::generate_mask(cfg, rng));
      },
      py::arg("window_frames") = 128, py::arg("mask_fraction") = 0.5,
      py::arg("scatter") = "non_subsequent", py::arg("seed") = 0);

  m.def(
      "test_mask", [](int window) { return mask_values(w2n::test_mask(window)); },
      py::arg("window_frames"));

  m.def(
      "apply_mask",
      [](const Eigen::MatrixXd& window, const std::vector<std::uint8_t>& mask) {
        w2n::FrameMask fm{mask};
        const auto r = w2n::apply_mask(window, fm);
        return py::make_tuple(r.masked_input, r.mask_channel);
      },
      py::arg("window"), py::arg("mask"));

  m.def(
      "eq1_g_loss",
      [](const std::vector<double>& p) { return w2n::eq1_g_loss(p); }, py::arg("probabilities"));
  m.def(
      "eq1_g_loss_from_scores",
      [](const std::vector<double>& s) { return w2n::eq1_g_loss_from_scores(s); },
      py::arg("scores"));

  m.def(
      "mcd",
      [](const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, int order,
         const w2n::AnalysisConfig& cfg) { return w2n::mcd(to_mel(a, cfg), to_mel(b, cfg), order); },
      py::arg("reference"), py::arg("converted"), py::arg("order") = w2n::kDefaultCepstralOrder,
      py::arg("config") = w2n::AnalysisConfig{});

  m.def(
      "compute_mos",
      [](const std::vector<int>& scores) {
        const auto v = w2n::mos::compute_mos(scores);
        return py::make_tuple(v.mean ? py::cast(*v.mean) : py::none(), v.count);
      },
      py::arg("scores"), "Returns (mean or None, count).");

  m.def(
      "vocode_griffin_lim",
      [](const Eigen::MatrixXd& mel, int iterations, const w2n::AnalysisConfig& cfg) {
        return w2n::vocode(to_mel(mel, cfg), w2n::VocoderAdapter::griffin_lim(cfg, iterations))
            .samples;
      },
      py::arg("mel"), py::arg("iterations") = 60, py::arg("config") = w2n::AnalysisConfig{});

  m.def(
      "convert",
      [](const Eigen::MatrixXd& mel, const std::string& checkpoint, const std::string& direction,
         const std::string& speaker) {
        const auto ckpt = w2n::Checkpoint::load(checkpoint);
        return w2n::convert(to_mel(mel, ckpt.analysis), ckpt, w2n::parse_direction(direction),
                            speaker)
            .values;
      },
      py::arg("mel"), py::arg("checkpoint"), py::arg("direction") = "whisper2normal",
      py::arg("speaker") = "");
}
