#include "p2f/backend.hpp"

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include <cstdlib>
#include <fstream>
#include <future>
#include <nlohmann/json.hpp>
#include <sstream>

namespace p2f {

using nlohmann::json;

std::string_view to_string(Role role) {
  switch (role) {
    case Role::System: return "system";
    case Role::User: return "user";
    case Role::Assistant: return "assistant";
  }
  return "user";
}

Role parse_role(std::string_view name) {
  if (name == "system") return Role::System;
  if (name == "user") return Role::User;
  if (name == "assistant") return Role::Assistant;
  throw InvalidArgument("unknown chat role '" + std::string(name) + "'");
}

ProtocolError::ProtocolError(int status, std::string body)
    : BackendError("chat endpoint returned HTTP " + std::to_string(status) + ": " + body),
      status_(status),
      body_(std::move(body)) {}

// ---------------------------------------------------------------------------

Session::Session(std::shared_ptr<ChatBackend> backend, Transcript transcript)
    : backend_(std::move(backend)), transcript_(std::move(transcript)) {
  if (!backend_) throw InvalidArgument("session needs a backend");
}

std::string Session::query(std::string_view prompt) {
  if (prompt.empty()) throw InvalidArgument("query: empty prompt");
  ++query_count_;
  Transcript pending = transcript_;
  pending.push_back({Role::User, std::string(prompt)});
  std::string reply = backend_->complete(pending);
  pending.push_back({Role::Assistant, reply});
  transcript_ = std::move(pending);
  return reply;
}

Session Session::fork() const { return Session(backend_, transcript_); }

std::vector<BatchReply> query_batch(ChatBackend& backend, std::span<const std::string> prompts) {
  std::vector<std::future<std::string>> futures;
  futures.reserve(prompts.size());
  for (const auto& prompt : prompts) {
    futures.push_back(std::async(std::launch::async, [&backend, prompt] {
      if (prompt.empty()) throw InvalidArgument("query: empty prompt");
      const ChatMessage msg{Role::User, prompt};
      return backend.complete(std::span<const ChatMessage>(&msg, 1));
    }));
  }
  std::vector<BatchReply> out(prompts.size());
  for (std::size_t i = 0; i < futures.size(); ++i) {
    try {
      out[i].reply = futures[i].get();
    } catch (const std::exception& e) {
      out[i].error = e.what();
    }
  }
  return out;
}

// ---------------------------------------------------------------------------

void BackendConfig::validate() const {
  if (base_url.empty()) throw ValidationError("backend base_url is empty");
  if (base_url.find("://") == std::string::npos) {
    throw ValidationError("backend base_url '" + base_url + "' has no scheme");
  }
  if (model.empty()) throw ValidationError("backend model is empty");
  if (!(temperature >= 0.0)) throw ValidationError("backend temperature must be >= 0");
  if (max_retries < 0) throw ValidationError("backend max_retries must be >= 0");
  if (timeout.count() <= 0) throw ValidationError("backend timeout must be positive");
}

std::string chat_request_body(const BackendConfig& config, std::span<const ChatMessage> messages) {
  json msgs = json::array();
  for (const auto& m : messages) {
    msgs.push_back({{"role", to_string(m.role)}, {"content", m.content}});
  }
  json body = {{"model", config.model}, {"messages", msgs}, {"temperature", config.temperature}};
  return body.dump();
}

std::string parse_chat_response(std::string_view body) {
  json doc;
  try {
    doc = json::parse(body);
  } catch (const json::parse_error& e) {
    throw ResponseParseError(std::string("chat response is not JSON: ") + e.what());
  }
  try {
    const auto& content = doc.at("choices").at(0).at("message").at("content");
    if (!content.is_string()) throw ResponseParseError("chat response content is not a string");
    return content.get<std::string>();
  } catch (const json::exception&) {
    throw ResponseParseError("chat response has no choices[0].message.content");
  }
}

HttpChatBackend::HttpChatBackend(BackendConfig config) : config_(std::move(config)) {
  config_.validate();
  const auto scheme_end = config_.base_url.find("://") + 3;
  const auto path_start = config_.base_url.find('/', scheme_end);
  if (path_start == std::string::npos) {
    origin_ = config_.base_url;
  } else {
    origin_ = config_.base_url.substr(0, path_start);
    path_prefix_ = config_.base_url.substr(path_start);
  }
  while (!path_prefix_.empty() && path_prefix_.back() == '/') path_prefix_.pop_back();
}

std::string HttpChatBackend::complete(std::span<const ChatMessage> messages) {
  httplib::Client client(origin_);
  const auto secs = std::chrono::duration_cast<std::chrono::seconds>(config_.timeout);
  const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(config_.timeout - secs);
  client.set_connection_timeout(secs.count(), usecs.count());
  client.set_read_timeout(secs.count(), usecs.count());
  client.set_write_timeout(secs.count(), usecs.count());

  httplib::Headers headers;
  if (const char* key = std::getenv(config_.api_key_env.c_str()); key && *key) {
    headers.emplace("Authorization", std::string("Bearer ") + key);
  }
  const std::string body = chat_request_body(config_, messages);
  const std::string path = path_prefix_ + "/chat/completions";

  std::string last_error;
  for (int attempt = 0; attempt <= config_.max_retries; ++attempt) {
    auto res = client.Post(path, headers, body, "application/json");
    if (!res) {
      last_error = httplib::to_string(res.error());
      continue;
    }
    if (res->status < 200 || res->status >= 300) throw ProtocolError(res->status, res->body);
    return parse_chat_response(res->body);
  }
  throw BackendUnavailable("chat endpoint " + origin_ + path + " unreachable after " +
                           std::to_string(config_.max_retries + 1) + " attempts: " + last_error);
}

// ---------------------------------------------------------------------------

MockBackend& MockBackend::on(MatchMode mode, std::string pattern,
                             std::vector<std::string> replies) {
  if (replies.empty()) throw InvalidArgument("mock rule for '" + pattern + "' has no replies");
  std::lock_guard lock(mu_);
  rules_.push_back(Rule{mode, std::move(pattern), std::move(replies)});
  return *this;
}

MockBackend& MockBackend::on_exact(std::string prompt, std::string reply) {
  return on(MatchMode::Exact, std::move(prompt), {std::move(reply)});
}

MockBackend& MockBackend::on_prefix(std::string prefix, std::string reply) {
  return on(MatchMode::Prefix, std::move(prefix), {std::move(reply)});
}

MockBackend& MockBackend::on_contains(std::string needle, std::string reply) {
  return on(MatchMode::Contains, std::move(needle), {std::move(reply)});
}

MockBackend& MockBackend::otherwise(std::string reply) {
  std::lock_guard lock(mu_);
  default_reply_ = std::move(reply);
  return *this;
}

std::string MockBackend::complete(std::span<const ChatMessage> messages) {
  std::string_view prompt;
  for (auto it = messages.rbegin(); it != messages.rend(); ++it) {
    if (it->role == Role::User) {
      prompt = it->content;
      break;
    }
  }
  std::lock_guard lock(mu_);
  ++calls_;
  Rule* best = nullptr;
  auto rank = [](const Rule& r) { return r.mode == MatchMode::Exact ? 2 : r.mode == MatchMode::Prefix ? 1 : 0; };
  for (auto& rule : rules_) {
    bool hit = false;
    switch (rule.mode) {
      case MatchMode::Exact: hit = prompt == rule.pattern; break;
      case MatchMode::Prefix: hit = prompt.substr(0, rule.pattern.size()) == rule.pattern; break;
      case MatchMode::Contains: hit = prompt.find(rule.pattern) != std::string_view::npos; break;
    }
    if (!hit) continue;
    if (!best || rank(rule) > rank(*best) ||
        (rank(rule) == rank(*best) && rule.pattern.size() > best->pattern.size())) {
      best = &rule;
    }
  }
  if (best) {
    const std::size_t i = std::min(best->served, best->replies.size() - 1);
    ++best->served;
    return best->replies[i];
  }
  if (default_reply_) return *default_reply_;
  std::string shown(prompt.substr(0, 120));
  throw UnscriptedPrompt("unscripted prompt: '" + shown + (prompt.size() > 120 ? "...'" : "'"));
}

std::size_t MockBackend::call_count() const {
  std::lock_guard lock(mu_);
  return calls_;
}

std::shared_ptr<MockBackend> MockBackend::from_json(std::string_view json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ValidationError(std::string("mock script is not valid JSON: ") + e.what());
  }
  auto mock = std::make_shared<MockBackend>();
  try {
    for (const auto& rule : doc.value("rules", json::array())) {
      const std::string match = rule.value("match", "exact");
      MatchMode mode;
      if (match == "exact") {
        mode = MatchMode::Exact;
      } else if (match == "prefix") {
        mode = MatchMode::Prefix;
      } else if (match == "contains") {
        mode = MatchMode::Contains;
      } else {
        throw ValidationError("mock rule has unknown match mode '" + match + "'");
      }
      std::vector<std::string> replies;
      if (rule.contains("replies")) {
        replies = rule.at("replies").get<std::vector<std::string>>();
      } else {
        replies.push_back(rule.at("reply").get<std::string>());
      }
      mock->on(mode, rule.at("prompt").get<std::string>(), std::move(replies));
    }
    if (doc.contains("default")) mock->otherwise(doc.at("default").get<std::string>());
  } catch (const json::exception& e) {
    throw ValidationError(std::string("malformed mock script: ") + e.what());
  }
  return mock;
}

std::shared_ptr<MockBackend> MockBackend::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open mock script " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return from_json(ss.str());
}

}  // namespace p2f
