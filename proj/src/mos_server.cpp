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

#include <algorithm>
#include <fstream>
#include <iterator>

#include <httplib.h>

#include "w2n/errors.hpp"
#include "w2n/mos.hpp"

namespace w2n::mos {

namespace {

void send_json(httplib::Response& res, int status, const nlohmann::json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, int status, const std::string& msg) {
  send_json(res, status, nlohmann::json{{"error", msg}});
}

nlohmann::json mos_json(const MosValue& v) {
  return nlohmann::json{{"mean", v.mean ? nlohmann::json(*v.mean) : nlohmann::json(nullptr)},
                        {"count", v.count}};
}

// Evaluator-facing view: neutral ids only, no labels or paths.
nlohmann::json session_json(const ListeningSession& s) {
  nlohmann::json clips = nlohmann::json::array();
  for (std::size_t i = 0; i < s.clip_ids.size(); ++i) {
    clips.push_back({{"clip_id", s.clip_ids[i]},
                     {"position", i + 1},
                     {"audio_url", "/clips/" + s.clip_ids[i] + "/audio?session=" + s.session_id},
                     {"completed", static_cast<bool>(s.completed[i])}});
  }
  return nlohmann::json{{"session_id", s.session_id},
                        {"evaluator_id", s.evaluator_id},
                        {"clips", clips}};
}

template <typename F>
void guarded(httplib::Response& res, F&& f) {
  try {
    f();
  } catch (const ValidationError& e) {
    send_error(res, 400, e.what());
  } catch (const ArgumentError& e) {
    send_error(res, 400, e.what());
  } catch (const NotFoundError& e) {
    send_error(res, 404, e.what());
  } catch (const nlohmann::json::exception& e) {
    send_error(res, 400, std::string("malformed request: ") + e.what());
  } catch (const std::exception& e) {
    send_error(res, 500, e.what());
  }
}

}  // namespace

struct Server::Impl {
  Store& store;
  ServerOptions opt;
  httplib::Server http;

  Impl(Store& s, ServerOptions o) : store(s), opt(std::move(o)) { routes(); }

  bool authorized(const httplib::Request& req) const {
    if (opt.operator_token.empty()) return false;
    if (req.get_header_value("Authorization") == "Bearer " + opt.operator_token) return true;
    return req.has_param("token") && req.get_param_value("token") == opt.operator_token;
  }

  void routes() {
    http.set_default_headers({{"Access-Control-Allow-Origin", "*"},
                              {"Access-Control-Allow-Headers", "Content-Type, Authorization"},
                              {"Access-Control-Allow-Methods", "GET, POST, OPTIONS"}});
    http.Options(".*", [](const httplib::Request&, httplib::Response& res) {
      res.status = 204;
    });

    http.Post("/sessions", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] {
        const auto body = req.body.empty() ? nlohmann::json::object()
                                           : nlohmann::json::parse(req.body);
        const std::string evaluator = body.value("evaluator_id", std::string());
        if (evaluator.empty()) throw ValidationError("evaluator_id is required");
        send_json(res, 201, session_json(store.create_session(evaluator)));
      });
    });

    http.Get(R"(/sessions/([^/]+)/clips)",
             [this](const httplib::Request& req, httplib::Response& res) {
               guarded(res, [&] { send_json(res, 200, session_json(store.session(req.matches[1]))); });
             });

    http.Get(R"(/clips/([^/]+)/audio)",
             [this](const httplib::Request& req, httplib::Response& res) {
               guarded(res, [&] {
                 const std::string id = req.matches[1];
                 if (req.has_param("session")) {
                   const auto s = store.session(req.get_param_value("session"));
                   if (std::find(s.clip_ids.begin(), s.clip_ids.end(), id) == s.clip_ids.end()) {
                     throw NotFoundError("clip " + id + " is not part of this session");
                   }
                 }
                 const Clip& c = store.clip(id);
                 std::ifstream in(c.audio_path, std::ios::binary);
                 if (!in) throw Error("clip audio missing");
                 std::string bytes((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
                 res.set_header("Content-Disposition", "inline; filename=\"" + id + ".wav\"");
                 res.set_content(std::move(bytes), "audio/wav");
               });
             });

    http.Post("/ratings", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] {
        const auto body = nlohmann::json::parse(req.body);
        const auto& score = body.at("score");
        if (!score.is_number_integer()) throw ValidationError("score must be an integer");
        const Rating r = store.submit_rating(body.at("session_id").get<std::string>(),
                                             body.at("clip_id").get<std::string>(),
                                             score.get<int>());
        send_json(res, 200, nlohmann::json{{"ack", true}, {"rating", r}});
      });
    });

    http.Get("/results", [this](const httplib::Request& req, httplib::Response& res) {
      if (!authorized(req)) {
        send_error(res, 403, "operator token required");
        return;
      }
      guarded(res, [&] {
        const MosSummary s = store.results();
        nlohmann::json clips = nlohmann::json::array();
        for (const auto& [id, v] : s.per_clip) {
          auto e = mos_json(v);
          e["clip_id"] = id;
          e["label"] = store.clip(id).label;
          clips.push_back(std::move(e));
        }
        send_json(res, 200, nlohmann::json{{"overall", mos_json(s.overall)},
                                           {"per_clip", clips},
                                           {"sessions", s.sessions}});
      });
    });
  }
};

Server::Server(Store& store, ServerOptions opt)
    : impl_(std::make_unique<Impl>(store, std::move(opt))) {}

Server::~Server() { stop(); }

bool Server::listen() { return impl_->http.listen(impl_->opt.host, impl_->opt.port); }

int Server::bind() {
  if (impl_->opt.port == 0) {
    impl_->opt.port = impl_->http.bind_to_any_port(impl_->opt.host);
    return impl_->opt.port;
  }
  return impl_->http.bind_to_port(impl_->opt.host, impl_->opt.port) ? impl_->opt.port : -1;
}

bool Server::listen_after_bind() { return impl_->http.listen_after_bind(); }

void Server::stop() {
  if (impl_ && impl_->http.is_running()) impl_->http.stop();
}

}  // namespace w2n::mos
