#include "pathnav/backend.hpp"

#include <httplib.h>

#include <cstdlib>
#include <thread>

#include "pathnav/image_io.hpp"
#include "pathnav/util.hpp"

namespace pathnav {

using nlohmann::json;

const char* to_string(Role role) {
  switch (role) {
    case Role::system: return "system";
    case Role::user: return "user";
    case Role::assistant: return "assistant";
  }
  return "user";
}

int CompletionRequest::image_count() const {
  int count = 0;
  for (const ChatMessage& m : messages) {
    for (const MessagePart& p : m.parts) {
      if (p.image) ++count;
    }
  }
  return count;
}

namespace {

void check_request(const CompletionRequest& request,
                   const BackendProfile& profile) {
  if (request.messages.empty()) {
    throw Error(Errc::invalid_args, "request has no messages");
  }
  int images = request.image_count();
  if (images > profile.max_images_per_request) {
    throw Error(Errc::too_many_images,
                std::to_string(images) + " images exceed profile limit of " +
                    std::to_string(profile.max_images_per_request));
  }
}

json wire_request_json(const CompletionRequest& request,
                       const BackendProfile& profile) {
  json messages = json::array();
  for (const ChatMessage& m : request.messages) {
    json content = json::array();
    for (const MessagePart& p : m.parts) {
      if (p.image) {
        auto png = encode_png(*p.image);
        content.push_back(
            {{"type", "image_url"},
             {"image_url",
              {{"url", "data:image/png;base64," +
                           base64_encode(png.data(), png.size())}}}});
      } else {
        content.push_back({{"type", "text"}, {"text", p.text}});
      }
    }
    messages.push_back({{"role", to_string(m.role)}, {"content", content}});
  }
  json body{{"model", profile.model},
            {"temperature", request.temperature},
            {"max_tokens", request.max_tokens},
            {"messages", messages}};
  if (request.seed) body["seed"] = *request.seed;
  return body;
}

// "https://host:port/v1" -> origin "https://host:port", prefix "/v1"
std::pair<std::string, std::string> split_url(const std::string& base_url) {
  std::size_t scheme = base_url.find("://");
  std::size_t path = scheme == std::string::npos
                         ? base_url.find('/')
                         : base_url.find('/', scheme + 3);
  if (path == std::string::npos) return {base_url, ""};
  std::string prefix = base_url.substr(path);
  while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
  return {base_url.substr(0, path), prefix};
}

}  // namespace

HttpBackend::HttpBackend(BackendProfile profile, std::string api_key)
    : profile_(std::move(profile)),
      api_key_(std::move(api_key)),
      window_start_(std::chrono::steady_clock::now()),
      rng_(0x9e3779b97f4a7c15ull) {
  if (api_key_.empty()) {
    if (const char* env = std::getenv("PATHAGENT_API_KEY")) api_key_ = env;
  }
}

double HttpBackend::jitter(double max_s) {
  std::lock_guard<std::mutex> lock(mutex_);
  std::uniform_real_distribution<double> dist(0.0, max_s);
  return dist(rng_);
}

void HttpBackend::acquire_slot() {
  std::unique_lock<std::mutex> lock(mutex_);
  slot_free_.wait(lock, [&] { return inflight_ < profile_.max_inflight; });
  ++inflight_;
  if (profile_.requests_per_minute > 0) {
    auto now = std::chrono::steady_clock::now();
    while (true) {
      if (now - window_start_ >= std::chrono::minutes(1)) {
        window_start_ = now;
        window_count_ = 0;
      }
      if (window_count_ < profile_.requests_per_minute) break;
      auto resume = window_start_ + std::chrono::minutes(1);
      lock.unlock();
      std::this_thread::sleep_until(resume);
      lock.lock();
      now = std::chrono::steady_clock::now();
    }
    ++window_count_;
  }
}

void HttpBackend::release_slot() {
  {
    std::lock_guard<std::mutex> lock(mutex_);
    --inflight_;
  }
  slot_free_.notify_one();
}

CompletionResult HttpBackend::complete(const CompletionRequest& request,
                                       const CallMeta& meta) {
  (void)meta;
  check_request(request, profile_);

  const std::string body = wire_request_json(request, profile_).dump();
  auto [origin, prefix] = split_url(profile_.base_url);
  const std::string path = prefix + "/chat/completions";

  acquire_slot();
  struct SlotGuard {
    HttpBackend* self;
    ~SlotGuard() { self->release_slot(); }
  } guard{this};

  CompletionResult result;
  std::string last_error;
  int last_status = 0;

  for (int attempt = 0; attempt <= profile_.retry.max_retries; ++attempt) {
    if (attempt > 0) {
      double delay = profile_.retry.base_backoff_s * double(1 << (attempt - 1));
      delay += jitter(delay / 2.0);
      result.backoff_seconds += delay;
      std::this_thread::sleep_for(std::chrono::duration<double>(delay));
      result.retries = attempt;
    }

    httplib::Client client(origin);
    client.set_connection_timeout(std::chrono::duration<double>(profile_.timeout_s));
    client.set_read_timeout(std::chrono::duration<double>(profile_.timeout_s));
    client.set_write_timeout(std::chrono::duration<double>(profile_.timeout_s));
    httplib::Headers headers;
    if (!api_key_.empty()) {
      headers.emplace("Authorization", "Bearer " + api_key_);
    }

    auto res = client.Post(path, headers, body, "application/json");
    if (!res) {
      last_error = httplib::to_string(res.error());
      last_status = 0;
      continue;  // transport failure: retry
    }
    last_status = res->status;
    if (res->status == 429 || res->status >= 500) {
      last_error = res->body.substr(0, 200);
      continue;  // retryable server-side failure
    }
    if (res->status != 200) {
      throw Error(Errc::api_error, "status " + std::to_string(res->status) +
                                       ": " + res->body.substr(0, 200));
    }
    json doc = json::parse(res->body, nullptr, false);
    if (doc.is_discarded() || !doc.contains("choices") || doc["choices"].empty()) {
      throw Error(Errc::api_error, "malformed completion response");
    }
    const json& message = doc["choices"][0];
    if (!message.contains("message") || !message["message"].contains("content")) {
      throw Error(Errc::api_error, "completion response missing content");
    }
    result.text = message["message"]["content"].get<std::string>();
    result.http_status = res->status;
    result.request_id = doc.value("id", "");
    return result;
  }

  if (last_status == 429) {
    throw Error(Errc::rate_limited,
                "still throttled after " +
                    std::to_string(profile_.retry.max_retries) + " retries");
  }
  if (last_status >= 500) {
    throw Error(Errc::api_error, "status " + std::to_string(last_status) +
                                     " after retries: " + last_error);
  }
  throw Error(Errc::timeout, "transport failure after retries: " + last_error);
}

BackendProfile ScriptedBackend::mock_profile() {
  BackendProfile profile;
  profile.name = "scripted";
  profile.base_url = "scripted://local";
  profile.model = "scripted-model";
  profile.max_images_per_request = 64;
  return profile;
}

ScriptedBackend::ScriptedBackend(std::vector<Entry> script, BackendProfile profile)
    : script_(std::move(script)), profile_(std::move(profile)) {
  if (script_.empty()) {
    throw Error(Errc::invalid_args, "scripted backend needs a nonempty script");
  }
}

int ScriptedBackend::call_count() const {
  std::lock_guard<std::mutex> lock(mutex_);
  return calls_;
}

CompletionResult ScriptedBackend::complete(const CompletionRequest& request,
                                           const CallMeta& meta) {
  check_request(request, profile_);

  // substring matchers search the conversation id and stage too, so a script
  // can target one region or one call site
  std::string text = meta.conversation_id + "\n" + meta.stage + "\n";
  for (const ChatMessage& m : request.messages) {
    for (const MessagePart& p : m.parts) {
      if (!p.image) {
        text += p.text;
        text += '\n';
      }
    }
  }

  std::lock_guard<std::mutex> lock(mutex_);
  ++calls_;
  auto& consumed = consumed_[meta.conversation_id];
  consumed.resize(script_.size(), false);
  for (std::size_t i = 0; i < script_.size(); ++i) {
    if (consumed[i]) continue;
    const Entry& entry = script_[i];
    bool hit = false;
    switch (entry.match) {
      case Entry::Match::always: hit = true; break;
      case Entry::Match::stage: hit = meta.stage == entry.needle; break;
      case Entry::Match::substring:
        hit = text.find(entry.needle) != std::string::npos;
        break;
    }
    if (!hit) continue;
    consumed[i] = true;
    if (entry.fail) {
      throw Error(*entry.fail, entry.response.empty()
                                   ? "injected backend failure"
                                   : entry.response);
    }
    CompletionResult result;
    result.text = entry.response;
    // deterministic per (conversation, call order), so transcripts are stable
    result.request_id = "scripted-" + std::to_string(i);
    return result;
  }
  throw Error(Errc::script_exhausted,
              "no unconsumed script entry for stage \"" + meta.stage +
                  "\" in conversation \"" + meta.conversation_id + "\"");
}

BackendProfile profile_from_json(const json& doc) {
  BackendProfile profile;
  profile.name = doc.value("name", profile.name);
  profile.base_url = doc.value("base_url", profile.base_url);
  profile.model = doc.value("model", profile.model);
  profile.max_images_per_request =
      doc.value("max_images", profile.max_images_per_request);
  profile.timeout_s = doc.value("timeout_s", profile.timeout_s);
  profile.max_inflight = doc.value("max_inflight", profile.max_inflight);
  profile.requests_per_minute =
      doc.value("requests_per_minute", profile.requests_per_minute);
  if (doc.contains("retries")) {
    if (doc["retries"].is_number_integer()) {
      profile.retry.max_retries = doc["retries"].get<int>();
    } else if (doc["retries"].is_object()) {
      profile.retry.max_retries =
          doc["retries"].value("max_retries", profile.retry.max_retries);
      profile.retry.base_backoff_s =
          doc["retries"].value("base_backoff_s", profile.retry.base_backoff_s);
    }
  }
  if (profile.max_images_per_request < 1) {
    throw Error(Errc::invalid_args, "max_images must be >= 1");
  }
  return profile;
}

std::vector<ScriptedBackend::Entry> script_from_json(const json& doc) {
  if (!doc.is_array()) {
    throw Error(Errc::schema_violation, "script must be an array");
  }
  std::vector<ScriptedBackend::Entry> script;
  for (const json& item : doc) {
    ScriptedBackend::Entry entry;
    const json& match = item.contains("match") ? item["match"] : json("always");
    if (match.is_string() && match.get<std::string>() == "always") {
      entry.match = ScriptedBackend::Entry::Match::always;
    } else if (match.is_object() && match.contains("stage")) {
      entry.match = ScriptedBackend::Entry::Match::stage;
      entry.needle = match["stage"].get<std::string>();
    } else if (match.is_object() && match.contains("substring")) {
      entry.match = ScriptedBackend::Entry::Match::substring;
      entry.needle = match["substring"].get<std::string>();
    } else {
      throw Error(Errc::schema_violation, "bad script matcher");
    }
    entry.response = item.value("response", "");
    if (item.contains("error") && !item["error"].is_null()) {
      std::string name = item["error"].get<std::string>();
      if (name == "Timeout") {
        entry.fail = Errc::timeout;
      } else if (name == "RateLimited") {
        entry.fail = Errc::rate_limited;
      } else {
        entry.fail = Errc::api_error;
      }
    }
    script.push_back(std::move(entry));
  }
  return script;
}

std::unique_ptr<Backend> backend_from_json(const json& doc) {
  std::string type = doc.value("type", "http");
  BackendProfile profile = profile_from_json(doc);
  if (type == "scripted") {
    return std::make_unique<ScriptedBackend>(
        script_from_json(doc.contains("script") ? doc["script"] : json::array()),
        profile);
  }
  if (type != "http") {
    throw Error(Errc::schema_violation, "unknown backend type \"" + type + "\"");
  }
  return std::make_unique<HttpBackend>(profile);
}

std::unique_ptr<Backend> load_backend(const std::filesystem::path& path) {
  json doc = json::parse(read_text_file(path), nullptr, false);
  if (doc.is_discarded()) {
    throw Error(Errc::schema_violation, "bad backend profile " + path.string());
  }
  return backend_from_json(doc);
}

json request_transcript_json(const CompletionRequest& request) {
  json messages = json::array();
  for (const ChatMessage& m : request.messages) {
    json parts = json::array();
    for (const MessagePart& p : m.parts) {
      if (p.image) {
        auto png = encode_png(*p.image);
        parts.push_back({{"image_sha256", sha256_hex(png.data(), png.size())},
                         {"width", p.image->width},
                         {"height", p.image->height}});
      } else {
        parts.push_back({{"text", p.text}});
      }
    }
    messages.push_back({{"role", to_string(m.role)}, {"parts", parts}});
  }
  json out{{"temperature", request.temperature},
           {"max_tokens", request.max_tokens},
           {"messages", messages}};
  if (request.seed) out["seed"] = *request.seed;
  return out;
}

}  // namespace pathnav
