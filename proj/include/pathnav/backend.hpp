#pragma once

#include <json.hpp>

#include <chrono>
#include <condition_variable>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "pathnav/errors.hpp"
#include "pathnav/image.hpp"

namespace pathnav {

enum class Role { system, user, assistant };

const char* to_string(Role role);

// Either text or an image; images are PNG-encoded losslessly on the wire.
struct MessagePart {
  std::string text;
  std::optional<Image> image;

  static MessagePart make_text(std::string t) { return {std::move(t), {}}; }
  static MessagePart make_image(Image img) { return {{}, std::move(img)}; }
};

struct ChatMessage {
  Role role = Role::user;
  std::vector<MessagePart> parts;

  static ChatMessage user_text(std::string text) {
    return {Role::user, {MessagePart::make_text(std::move(text))}};
  }
};

struct CompletionRequest {
  std::vector<ChatMessage> messages;
  double temperature = 0.0;
  int max_tokens = 4096;
  std::optional<long long> seed;

  int image_count() const;
};

struct RetryPolicy {
  int max_retries = 3;
  double base_backoff_s = 0.5;
};

struct BackendProfile {
  std::string name = "default";
  std::string base_url = "http://127.0.0.1:8080/v1";
  std::string model = "scripted-model";
  int max_images_per_request = 16;
  double timeout_s = 60.0;
  RetryPolicy retry;
  int max_inflight = 4;          // concurrent requests cap
  int requests_per_minute = 0;   // 0 disables the budget
};

// Which logical stage issued the call; the scripted backend matches on it
// and transcripts carry it.
struct CallMeta {
  std::string conversation_id;
  std::string stage;
};

struct CompletionResult {
  std::string text;
  int retries = 0;
  int http_status = 200;
  std::string request_id;
  double backoff_seconds = 0.0;
};

class Backend {
 public:
  virtual ~Backend() = default;
  virtual CompletionResult complete(const CompletionRequest& request,
                                    const CallMeta& meta) = 0;
  virtual const BackendProfile& profile() const = 0;
};

// OpenAI-style chat-completions client over HTTP(S). Bearer token comes from
// PATHAGENT_API_KEY unless an explicit key is given. Transport failures, 429
// and 5xx retry with exponential backoff plus jitter.
class HttpBackend final : public Backend {
 public:
  explicit HttpBackend(BackendProfile profile, std::string api_key = "");

  CompletionResult complete(const CompletionRequest& request,
                            const CallMeta& meta) override;
  const BackendProfile& profile() const override { return profile_; }

 private:
  double jitter(double max_s);
  void acquire_slot();
  void release_slot();

  BackendProfile profile_;
  std::string api_key_;
  std::mutex mutex_;
  std::condition_variable slot_free_;
  int inflight_ = 0;
  std::chrono::steady_clock::time_point window_start_;
  int window_count_ = 0;
  std::mt19937_64 rng_;
};

// Deterministic test double. Each conversation id gets a fresh pass over the
// script; every call consumes the first unconsumed entry whose matcher fires.
class ScriptedBackend final : public Backend {
 public:
  struct Entry {
    enum class Match { always, stage, substring };
    Match match = Match::always;
    std::string needle;
    std::string response;
    std::optional<Errc> fail;  // injected failure instead of a response
  };

  explicit ScriptedBackend(std::vector<Entry> script,
                           BackendProfile profile = mock_profile());

  CompletionResult complete(const CompletionRequest& request,
                            const CallMeta& meta) override;
  const BackendProfile& profile() const override { return profile_; }

  int call_count() const;

  static BackendProfile mock_profile();

 private:
  std::vector<Entry> script_;
  BackendProfile profile_;
  mutable std::mutex mutex_;
  std::map<std::string, std::vector<bool>> consumed_;
  int calls_ = 0;
};

// Profile JSON: {"name","base_url","model","max_images","timeout_s",
// "retries"} where retries is an integer or {"max_retries","base_backoff_s"}.
BackendProfile profile_from_json(const nlohmann::json& doc);
std::vector<ScriptedBackend::Entry> script_from_json(const nlohmann::json& doc);

// {"type":"http"|"scripted", ...profile..., "script":[...]}.
std::unique_ptr<Backend> backend_from_json(const nlohmann::json& doc);
std::unique_ptr<Backend> load_backend(const std::filesystem::path& path);

// Request as transcript-ready JSON: images replaced by content hashes.
nlohmann::json request_transcript_json(const CompletionRequest& request);

}  // namespace pathnav
