#pragma once

#include <chrono>
#include <cstddef>
#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "p2f/core.hpp"

namespace p2f {

enum class Role { System, User, Assistant };

std::string_view to_string(Role role);
/// Throws InvalidArgument for anything but "system", "user", "assistant".
Role parse_role(std::string_view name);

struct ChatMessage {
  Role role = Role::User;
  std::string content;

  bool operator==(const ChatMessage&) const = default;
};

using Transcript = std::vector<ChatMessage>;

class BackendError : public Error {
 public:
  using Error::Error;
};

/// Transport failed on every attempt.
class BackendUnavailable : public BackendError {
 public:
  using BackendError::BackendError;
};

/// The endpoint answered with a non-2xx status.
class ProtocolError : public BackendError {
 public:
  ProtocolError(int status, std::string body);
  int status() const { return status_; }
  const std::string& body() const { return body_; }

 private:
  int status_;
  std::string body_;
};

class ResponseParseError : public BackendError {
 public:
  using BackendError::BackendError;
};

/// The mock has no rule for a prompt and no default reply.
class UnscriptedPrompt : public BackendError {
 public:
  using BackendError::BackendError;
};

/// Stateless completion over a full message history. Implementations must be
/// safe to call from several threads at once.
class ChatBackend {
 public:
  virtual ~ChatBackend() = default;
  virtual std::string complete(std::span<const ChatMessage> messages) = 0;
};

/// One conversation: a transcript owned by a single writer plus a counter of
/// query attempts.
class Session {
 public:
  explicit Session(std::shared_ptr<ChatBackend> backend, Transcript transcript = {});

  /// Sends `prompt` with the current history. On success the user/assistant
  /// pair is appended; on failure the transcript is left unchanged. Every
  /// attempt counts toward query_count().
  std::string query(std::string_view prompt);

  /// Copy of the history with a fresh counter, sharing the backend.
  Session fork() const;

  const Transcript& transcript() const { return transcript_; }
  std::size_t query_count() const { return query_count_; }
  const std::shared_ptr<ChatBackend>& backend() const { return backend_; }

 private:
  std::shared_ptr<ChatBackend> backend_;
  Transcript transcript_;
  std::size_t query_count_ = 0;
};

struct BatchReply {
  std::optional<std::string> reply;
  std::string error;

  bool ok() const { return reply.has_value(); }
};

/// Independent single-turn prompts, run concurrently. Results line up with
/// `prompts`; failures are reported in place.
std::vector<BatchReply> query_batch(ChatBackend& backend, std::span<const std::string> prompts);

// ---------------------------------------------------------------------------
// HTTP chat-completions client
// ---------------------------------------------------------------------------

struct BackendConfig {
  std::string base_url = "https://api.openai.com/v1";
  std::string model = "gpt-4";
  double temperature = 0.0;
  std::chrono::milliseconds timeout{60000};
  int max_retries = 2;
  std::string api_key_env = "OPENAI_API_KEY";

  void validate() const;
};

std::string chat_request_body(const BackendConfig& config, std::span<const ChatMessage> messages);
/// Content of the first choice's message. Throws ResponseParseError.
std::string parse_chat_response(std::string_view body);

class HttpChatBackend : public ChatBackend {
 public:
  explicit HttpChatBackend(BackendConfig config);
  std::string complete(std::span<const ChatMessage> messages) override;

  const BackendConfig& config() const { return config_; }

 private:
  BackendConfig config_;
  std::string origin_;
  std::string path_prefix_;
};

// ---------------------------------------------------------------------------
// Scripted mock
// ---------------------------------------------------------------------------

enum class MatchMode { Exact, Prefix, Contains };

/// Replies keyed on the last user message. Lookup order is exact match, then
/// the longest matching prefix, then the longest contained substring. A rule
/// with several replies hands them out in order and then repeats the last.
class MockBackend : public ChatBackend {
 public:
  MockBackend() = default;

  MockBackend& on(MatchMode mode, std::string pattern, std::vector<std::string> replies);
  MockBackend& on_exact(std::string prompt, std::string reply);
  MockBackend& on_prefix(std::string prefix, std::string reply);
  MockBackend& on_contains(std::string needle, std::string reply);
  MockBackend& otherwise(std::string reply);

  std::string complete(std::span<const ChatMessage> messages) override;

  std::size_t call_count() const;

  /// {"rules": [{"match": "exact|prefix|contains", "prompt": ..., "reply": ...
  /// | "replies": [...]}], "default": ...}
  static std::shared_ptr<MockBackend> from_json(std::string_view json_text);
  static std::shared_ptr<MockBackend> load(const std::filesystem::path& path);

 private:
  struct Rule {
    MatchMode mode;
    std::string pattern;
    std::vector<std::string> replies;
    std::size_t served = 0;
  };

  mutable std::mutex mu_;
  std::vector<Rule> rules_;
  std::optional<std::string> default_reply_;
  std::size_t calls_ = 0;
};

}  // namespace p2f
