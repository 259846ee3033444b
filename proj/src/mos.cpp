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

#include "w2n/mos.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>

#include "w2n/errors.hpp"
#include "w2n/masking.hpp"

namespace w2n::mos {

namespace {

namespace fs = std::filesystem;

constexpr const char* kClipsFile = "clips.json";
constexpr const char* kLogFile = "ratings.log.jsonl";
constexpr const char* kSnapshotFile = "snapshot.json";

std::int64_t now_ms() {
  return std::chrono::duration_cast<std::chrono::milliseconds>(
             std::chrono::system_clock::now().time_since_epoch())
      .count();
}

std::uint64_t mix(std::uint64_t seed, std::uint64_t k) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ull * (k + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

std::string random_token() {
  std::random_device rd;
  const std::uint64_t a = (static_cast<std::uint64_t>(rd()) << 32) | rd();
  const std::uint64_t b = (static_cast<std::uint64_t>(rd()) << 32) | rd();
  char buf[33];
  std::snprintf(buf, sizeof(buf), "%016llx%016llx", static_cast<unsigned long long>(a),
                static_cast<unsigned long long>(b));
  return buf;
}

// First k entries of a seeded partial Fisher-Yates shuffle of 0..n-1.
std::vector<std::size_t> draw(std::size_t n, std::size_t k, Rng& rng) {
  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t j = i + uniform_index(rng, n - i);
    std::swap(idx[i], idx[j]);
  }
  idx.resize(k);
  return idx;
}

void fsync_path(const fs::path& p) {
  const int fd = ::open(p.c_str(), O_RDONLY);
  if (fd >= 0) {
    ::fsync(fd);
    ::close(fd);
  }
}

void write_durable(const fs::path& path, const std::string& text) {
  const fs::path tmp = path.string() + ".tmp";
  const int fd = ::open(tmp.c_str(), O_WRONLY | O_CREAT | O_TRUNC, 0644);
  if (fd < 0) throw Error("cannot write " + tmp.string());
  std::size_t off = 0;
  while (off < text.size()) {
    const ssize_t n = ::write(fd, text.data() + off, text.size() - off);
    if (n <= 0) {
      ::close(fd);
      throw Error("write failed: " + tmp.string());
    }
    off += static_cast<std::size_t>(n);
  }
  ::fsync(fd);
  ::close(fd);
  fs::rename(tmp, path);
  fsync_path(path.parent_path());
}

}  // namespace

void to_json(nlohmann::json& j, const Clip& c) {
  j = nlohmann::json{{"clip_id", c.clip_id}, {"audio_path", c.audio_path.string()},
                     {"label", c.label}};
}

void from_json(const nlohmann::json& j, Clip& c) {
  c.clip_id = j.at("clip_id").get<std::string>();
  c.audio_path = j.at("audio_path").get<std::string>();
  c.label = j.value("label", std::string());
}

void to_json(nlohmann::json& j, const ListeningSession& s) {
  j = nlohmann::json{{"session_id", s.session_id},
                     {"evaluator_id", s.evaluator_id},
                     {"clip_ids", s.clip_ids},
                     {"completed", s.completed},
                     {"created_ms", s.created_ms}};
}

void from_json(const nlohmann::json& j, ListeningSession& s) {
  s.session_id = j.at("session_id").get<std::string>();
  s.evaluator_id = j.at("evaluator_id").get<std::string>();
  s.clip_ids = j.at("clip_ids").get<std::vector<std::string>>();
  s.completed = j.value("completed", std::vector<bool>(s.clip_ids.size(), false));
  s.created_ms = j.value("created_ms", std::int64_t{0});
}

void to_json(nlohmann::json& j, const Rating& r) {
  j = nlohmann::json{{"session_id", r.session_id},
                     {"clip_id", r.clip_id},
                     {"score", r.score},
                     {"timestamp_ms", r.timestamp_ms}};
}

void from_json(const nlohmann::json& j, Rating& r) {
  r.session_id = j.at("session_id").get<std::string>();
  r.clip_id = j.at("clip_id").get<std::string>();
  r.score = j.at("score").get<int>();
  r.timestamp_ms = j.value("timestamp_ms", std::int64_t{0});
}

MosValue compute_mos(std::span<const int> scores) {
  MosValue v;
  v.count = scores.size();
  if (scores.empty()) return v;
  long long sum = 0;
  for (int s : scores) {
    if (s < kMinScore || s > kMaxScore) {
      throw ValidationError("score " + std::to_string(s) + " outside [1, 5]");
    }
    sum += s;
  }
  v.mean = static_cast<double>(sum) / static_cast<double>(scores.size());
  return v;
}

MosValue compute_mos(std::span<const Rating> ratings, MosScope scope,
                     const std::string& clip_id) {
  std::vector<int> scores;
  for (const auto& r : ratings) {
    if (scope == MosScope::kOverall || r.clip_id == clip_id) scores.push_back(r.score);
  }
  return compute_mos(scores);
}

MosSummary summarize(std::span<const Rating> ratings) {
  MosSummary s;
  s.overall = compute_mos(ratings, MosScope::kOverall);
  std::map<std::string, std::vector<int>> by_clip;
  std::vector<std::string> sessions;
  for (const auto& r : ratings) {
    by_clip[r.clip_id].push_back(r.score);
    sessions.push_back(r.session_id);
  }
  for (const auto& [clip, scores] : by_clip) s.per_clip[clip] = compute_mos(scores);
  std::sort(sessions.begin(), sessions.end());
  s.sessions = static_cast<std::size_t>(
      std::unique(sessions.begin(), sessions.end()) - sessions.begin());
  return s;
}

std::vector<Clip> clip_pool_from_directory(const fs::path& dir, std::uint64_t seed) {
  if (!fs::is_directory(dir)) throw LoadError(dir.string(), "clip directory does not exist");
  std::vector<fs::path> files;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    std::string ext = e.path().extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), ::tolower);
    if (e.is_regular_file() && ext == ".wav") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  Rng rng(seed);
  const auto order = draw(files.size(), files.size(), rng);
  std::vector<Clip> pool(files.size());
  for (std::size_t k = 0; k < order.size(); ++k) {
    const auto& f = files[order[k]];
    pool[k] = {std::to_string(k + 1), f, fs::relative(f, dir).string()};
  }
  std::sort(pool.begin(), pool.end(), [](const Clip& a, const Clip& b) {
    return std::stoul(a.clip_id) < std::stoul(b.clip_id);
  });
  return pool;
}

Store::Store(fs::path dir, std::vector<Clip> pool, StoreOptions opt)
    : dir_(std::move(dir)), opt_(opt) {
  fs::create_directories(dir_);
  const fs::path clips_file = dir_ / kClipsFile;
  if (fs::exists(clips_file)) {
    std::ifstream in(clips_file);
    try {
      pool_ = nlohmann::json::parse(in).get<std::vector<Clip>>();
    } catch (const nlohmann::json::exception& e) {
      throw LoadError(clips_file.string(), e.what());
    }
  } else {
    if (pool.empty()) throw ArgumentError("clip pool is empty");
    pool_ = std::move(pool);
    write_durable(clips_file, nlohmann::json(pool_).dump(2));
  }
  if (pool_.empty()) throw ArgumentError("clip pool is empty");
  if (opt_.clips_per_session < 1 ||
      static_cast<std::size_t>(opt_.clips_per_session) > pool_.size()) {
    throw ArgumentError("clips_per_session must be in [1, " + std::to_string(pool_.size()) +
                        "]");
  }
  for (std::size_t i = 0; i < pool_.size(); ++i) {
    if (!clip_index_.emplace(pool_[i].clip_id, i).second) {
      throw ArgumentError("duplicate clip id " + pool_[i].clip_id);
    }
  }
  if (opt_.fixed_pool) {
    Rng rng(mix(opt_.seed, ~0ull));
    for (std::size_t i : draw(pool_.size(), opt_.clips_per_session, rng)) {
      fixed_subset_.push_back(pool_[i].clip_id);
    }
  }
  replay();
  log_fd_ = ::open((dir_ / kLogFile).c_str(), O_WRONLY | O_CREAT | O_APPEND, 0644);
  if (log_fd_ < 0) throw Error("cannot open rating log in " + dir_.string());
}

Store::~Store() {
  if (log_fd_ >= 0) ::close(log_fd_);
}

void Store::replay() {
  std::size_t skip = 0;
  const fs::path snap = dir_ / kSnapshotFile;
  if (fs::exists(snap)) {
    std::ifstream in(snap);
    try {
      const auto j = nlohmann::json::parse(in);
      skip = j.at("log_events").get<std::size_t>();
      for (const auto& s : j.at("sessions")) {
        auto session = s.get<ListeningSession>();
        sessions_[session.session_id] = session;
      }
      for (const auto& r : j.at("ratings")) {
        auto rating = r.get<Rating>();
        ratings_[{rating.session_id, rating.clip_id}] = rating;
      }
      audit_ = j.at("audit").get<std::vector<Rating>>();
    } catch (const nlohmann::json::exception& e) {
      throw LoadError(snap.string(), e.what());
    }
  }
  const fs::path log = dir_ / kLogFile;
  if (!fs::exists(log)) {
    log_events_ = skip;
    return;
  }
  std::ifstream in(log, std::ios::binary);
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  // A crash during an append can leave a partial last line; it was never
  // acknowledged, so it is dropped.
  const std::size_t valid = text.rfind('\n') == std::string::npos ? 0 : text.rfind('\n') + 1;
  if (valid < text.size()) fs::resize_file(log, valid);
  std::size_t count = 0;
  std::size_t pos = 0;
  while (pos < valid) {
    const std::size_t nl = text.find('\n', pos);
    const std::string line = text.substr(pos, nl - pos);
    pos = nl + 1;
    if (line.empty()) continue;
    if (count++ < skip) continue;
    try {
      apply_event(nlohmann::json::parse(line));
    } catch (const nlohmann::json::exception& e) {
      throw LoadError(log.string(), "bad event on line " + std::to_string(count) + ": " +
                                        e.what());
    }
  }
  log_events_ = std::max(count, skip);
}

void Store::apply_event(const nlohmann::json& e) {
  const auto type = e.at("type").get<std::string>();
  if (type == "session") {
    auto s = e.at("session").get<ListeningSession>();
    sessions_[s.session_id] = s;
  } else if (type == "rating") {
    auto r = e.at("rating").get<Rating>();
    auto it = sessions_.find(r.session_id);
    if (it != sessions_.end()) {
      const auto& ids = it->second.clip_ids;
      const auto pos = std::find(ids.begin(), ids.end(), r.clip_id);
      if (pos != ids.end()) it->second.completed[pos - ids.begin()] = true;
    }
    ratings_[{r.session_id, r.clip_id}] = r;
    audit_.push_back(r);
  } else {
    throw ArgumentError("unknown event type '" + type + "'");
  }
}

void Store::append(const nlohmann::json& e) {
  const std::string line = e.dump() + "\n";
  std::size_t off = 0;
  while (off < line.size()) {
    const ssize_t n = ::write(log_fd_, line.data() + off, line.size() - off);
    if (n <= 0) throw Error("rating log write failed");
    off += static_cast<std::size_t>(n);
  }
  if (::fsync(log_fd_) != 0) throw Error("rating log fsync failed");
  ++log_events_;
  ++pending_;
}

ListeningSession Store::create_session(const std::string& evaluator_id) {
  std::unique_lock lock(mu_);
  ListeningSession s;
  s.session_id = random_token();
  while (sessions_.count(s.session_id) != 0) s.session_id = random_token();
  s.evaluator_id = evaluator_id;
  s.created_ms = now_ms();
  Rng rng(mix(opt_.seed, sessions_.size()));
  if (opt_.fixed_pool) {
    for (std::size_t i : draw(fixed_subset_.size(), fixed_subset_.size(), rng)) {
      s.clip_ids.push_back(fixed_subset_[i]);
    }
  } else {
    for (std::size_t i : draw(pool_.size(), opt_.clips_per_session, rng)) {
      s.clip_ids.push_back(pool_[i].clip_id);
    }
  }
  s.completed.assign(s.clip_ids.size(), false);
  const nlohmann::json event{{"type", "session"}, {"session", s}};
  append(event);
  sessions_[s.session_id] = s;
  const bool compact =
      opt_.snapshot_every > 0 && pending_ >= static_cast<std::size_t>(opt_.snapshot_every);
  lock.unlock();
  if (compact) snapshot();
  return s;
}

ListeningSession Store::session(const std::string& session_id) const {
  std::lock_guard lock(mu_);
  const auto it = sessions_.find(session_id);
  if (it == sessions_.end()) throw NotFoundError("unknown session " + session_id);
  return it->second;
}

Rating Store::submit_rating(const std::string& session_id, const std::string& clip_id,
                            int score) {
  if (score < kMinScore || score > kMaxScore) {
    throw ValidationError("score must be an integer in [1, 5], got " + std::to_string(score));
  }
  std::unique_lock lock(mu_);
  const auto it = sessions_.find(session_id);
  if (it == sessions_.end()) throw NotFoundError("unknown session " + session_id);
  const auto& ids = it->second.clip_ids;
  const auto pos = std::find(ids.begin(), ids.end(), clip_id);
  if (pos == ids.end()) {
    throw NotFoundError("clip " + clip_id + " is not part of session " + session_id);
  }
  Rating r{session_id, clip_id, score, now_ms()};
  const nlohmann::json event{{"type", "rating"}, {"rating", r}};
  append(event);
  apply_event(event);
  const bool compact =
      opt_.snapshot_every > 0 && pending_ >= static_cast<std::size_t>(opt_.snapshot_every);
  lock.unlock();
  if (compact) snapshot();
  return r;
}

const Clip& Store::clip(const std::string& clip_id) const {
  const auto it = clip_index_.find(clip_id);
  if (it == clip_index_.end()) throw NotFoundError("unknown clip " + clip_id);
  return pool_[it->second];
}

std::vector<Rating> Store::ratings() const {
  std::lock_guard lock(mu_);
  std::vector<Rating> out;
  for (const auto& [key, r] : ratings_) out.push_back(r);
  return out;
}

std::vector<Rating> Store::audit() const {
  std::lock_guard lock(mu_);
  return audit_;
}

MosSummary Store::results() const {
  const auto all = ratings();
  MosSummary s = summarize(all);
  std::lock_guard lock(mu_);
  s.sessions = sessions_.size();
  return s;
}

void Store::snapshot() {
  std::lock_guard lock(mu_);
  nlohmann::json j;
  j["log_events"] = log_events_;
  j["sessions"] = nlohmann::json::array();
  for (const auto& [id, s] : sessions_) j["sessions"].push_back(s);
  j["ratings"] = nlohmann::json::array();
  for (const auto& [key, r] : ratings_) j["ratings"].push_back(r);
  j["audit"] = audit_;
  write_durable(dir_ / kSnapshotFile, j.dump());
  pending_ = 0;
}

}  // namespace w2n::mos
