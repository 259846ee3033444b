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

#ifndef W2N_MOS_HPP_
#define W2N_MOS_HPP_

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace w2n::mos {

inline constexpr int kMinScore = 1;
inline constexpr int kMaxScore = 5;

struct Clip {
  std::string clip_id;
  std::filesystem::path audio_path;
  // Operator-side description (e.g. system and utterance); never sent to
  // evaluators.
  std::string label;
};

struct ListeningSession {
  std::string session_id;
  std::string evaluator_id;
  std::vector<std::string> clip_ids;
  std::vector<bool> completed;
  std::int64_t created_ms = 0;
};

struct Rating {
  std::string session_id;
  std::string clip_id;
  int score = 0;
  std::int64_t timestamp_ms = 0;
};

void to_json(nlohmann::json& j, const Clip& c);
void from_json(const nlohmann::json& j, Clip& c);
void to_json(nlohmann::json& j, const ListeningSession& s);
void from_json(const nlohmann::json& j, ListeningSession& s);
void to_json(nlohmann::json& j, const Rating& r);
void from_json(const nlohmann::json& j, Rating& r);

// Mean with count; mean is empty when there is no data in scope.
struct MosValue {
  std::optional<double> mean;
  std::size_t count = 0;
};

MosValue compute_mos(std::span<const int> scores);

enum class MosScope { kPerClip, kOverall };

// kPerClip restricts to ratings of clip_id.
MosValue compute_mos(std::span<const Rating> ratings, MosScope scope,
                     const std::string& clip_id = {});

struct MosSummary {
  MosValue overall;
  std::map<std::string, MosValue> per_clip;
  std::size_t sessions = 0;
};

MosSummary summarize(std::span<const Rating> ratings);

// Builds a pool from every .wav under dir, sorted by path, then assigns
// neutral numeric ids in a seeded random order.
std::vector<Clip> clip_pool_from_directory(const std::filesystem::path& dir,
                                           std::uint64_t seed = 0);

struct StoreOptions {
  int clips_per_session = 6;
  // Every session rates the same subset (drawn once); order still varies.
  bool fixed_pool = false;
  std::uint64_t seed = 0;
  // Compact the log into a snapshot after this many appended events (0 = never).
  int snapshot_every = 256;
};

// Durable rating store: an append-only JSONL event log (fsync before
// returning) plus periodic snapshots. Thread-safe.
class Store {
 public:
  // Reuses the clip pool stored in dir when present, otherwise persists
  // `pool`. Throws ArgumentError for an empty pool.
  Store(std::filesystem::path dir, std::vector<Clip> pool, StoreOptions opt = {});
  ~Store();
  Store(const Store&) = delete;
  Store& operator=(const Store&) = delete;

  ListeningSession create_session(const std::string& evaluator_id);
  ListeningSession session(const std::string& session_id) const;
  // Durable on return. Throws ValidationError or NotFoundError.
  Rating submit_rating(const std::string& session_id, const std::string& clip_id,
                       int score);

  const Clip& clip(const std::string& clip_id) const;
  const std::vector<Clip>& clips() const { return pool_; }
  std::vector<Rating> ratings() const;
  // Every accepted submission in arrival order, including overwritten ones.
  std::vector<Rating> audit() const;
  MosSummary results() const;
  void snapshot();

 private:
  void replay();
  void apply_event(const nlohmann::json& e);
  void append(const nlohmann::json& e);

  std::filesystem::path dir_;
  std::vector<Clip> pool_;
  std::map<std::string, std::size_t> clip_index_;
  StoreOptions opt_;
  mutable std::mutex mu_;
  int log_fd_ = -1;
  std::size_t log_events_ = 0;
  std::size_t pending_ = 0;
  std::map<std::string, ListeningSession> sessions_;
  std::vector<std::string> fixed_subset_;
  std::map<std::pair<std::string, std::string>, Rating> ratings_;
  std::vector<Rating> audit_;
};

struct ServerOptions {
  std::string host = "127.0.0.1";
  int port = 8080;
  std::string operator_token;
};

// JSON-over-HTTP front end for a Store.
class Server {
 public:
  Server(Store& store, ServerOptions opt);
  ~Server();
  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;

  // Binds and serves until stop(); returns false when binding fails.
  bool listen();
  // Binds to an ephemeral port when opt.port is 0; returns the bound port.
  int bind();
  bool listen_after_bind();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace w2n::mos

#endif  // W2N_MOS_HPP_
