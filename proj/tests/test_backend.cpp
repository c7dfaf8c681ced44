#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <httplib.h>

#include <atomic>
#include <thread>

#include "pathnav/backend.hpp"
#include "pathnav/image_io.hpp"
#include "testutil.hpp"

using namespace pathnav;

namespace {

CompletionRequest text_request(const std::string& text) {
  CompletionRequest request;
  request.messages.push_back(ChatMessage::user_text(text));
  return request;
}

}  // namespace

TEST_CASE("scripted entries are consumed once per conversation") {
  ScriptedBackend backend({{ScriptedBackend::Entry::Match::always, "", "A", {}}});
  CallMeta meta{"conv", "stage"};
  CHECK(backend.complete(text_request("hi"), meta).text == "A");
  try {
    backend.complete(text_request("hi"), meta);
    FAIL("expected ScriptExhausted");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::script_exhausted);
  }
  // a different conversation sees a fresh pass over the script
  CHECK(backend.complete(text_request("hi"), {"other", "stage"}).text == "A");
}

TEST_CASE("stage matcher fires only for its stage") {
  ScriptedBackend backend(
      {{ScriptedBackend::Entry::Match::stage, "navigation_planning", "PLAN", {}},
       {ScriptedBackend::Entry::Match::always, "", "FALLBACK", {}}});
  CHECK(backend.complete(text_request("x"), {"c", "reasoning"}).text == "FALLBACK");
  CHECK(backend.complete(text_request("x"), {"c", "navigation_planning"}).text ==
        "PLAN");
}

TEST_CASE("substring matcher searches text, stage and conversation id") {
  ScriptedBackend backend(
      {{ScriptedBackend::Entry::Match::substring, "region_7", "SEVEN", {}},
       {ScriptedBackend::Entry::Match::substring, "mitotic", "TEXT", {}},
       {ScriptedBackend::Entry::Match::always, "", "OTHER", {}}});
  CHECK(backend.complete(text_request("plain"), {"s/region_7", "st"}).text ==
        "SEVEN");
  CHECK(backend.complete(text_request("count mitotic figures"), {"c2", "st"}).text ==
        "TEXT");
  CHECK(backend.complete(text_request("plain"), {"c3", "st"}).text == "OTHER");
}

TEST_CASE("eight concurrent conversations each see their own sequence") {
  std::vector<ScriptedBackend::Entry> script = {
      {ScriptedBackend::Entry::Match::always, "", "first", {}},
      {ScriptedBackend::Entry::Match::always, "", "second", {}}};
  ScriptedBackend backend(script);
  std::atomic<int> failures{0};
  std::vector<std::thread> threads;
  for (int t = 0; t < 8; ++t) {
    threads.emplace_back([&, t] {
      CallMeta meta{"conv_" + std::to_string(t), "s"};
      for (int round = 0; round < 2; ++round) {
        auto result = backend.complete(text_request("go"), meta);
        const char* want = round == 0 ? "first" : "second";
        if (result.text != want) failures.fetch_add(1);
      }
    });
  }
  for (auto& t : threads) t.join();
  CHECK(failures.load() == 0);
  CHECK(backend.call_count() == 16);
}

TEST_CASE("injected failures surface as their error code") {
  ScriptedBackend backend(
      {{ScriptedBackend::Entry::Match::always, "", "boom", Errc::timeout}});
  try {
    backend.complete(text_request("x"), {"c", "s"});
    FAIL("expected Timeout");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::timeout);
  }
}

TEST_CASE("too many images fails before any transport") {
  BackendProfile profile;
  profile.max_images_per_request = 1;
  profile.base_url = "http://127.0.0.1:1";  // nothing listens here
  HttpBackend backend(profile);
  CompletionRequest request;
  ChatMessage message;
  message.role = Role::user;
  message.parts.push_back(MessagePart::make_image(Image(4, 4)));
  message.parts.push_back(MessagePart::make_image(Image(4, 4)));
  request.messages.push_back(std::move(message));
  try {
    backend.complete(request, {"c", "s"});
    FAIL("expected TooManyImages");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::too_many_images);
  }
}

TEST_CASE("transcript json replaces images with content hashes") {
  Image img = testutil::random_image(6, 6, 1);
  auto png = encode_png(img);
  std::string hash = sha256_hex(png.data(), png.size());

  CompletionRequest request;
  ChatMessage message;
  message.role = Role::user;
  message.parts.push_back(MessagePart::make_text("look"));
  message.parts.push_back(MessagePart::make_image(img));
  request.messages.push_back(std::move(message));

  nlohmann::json doc = request_transcript_json(request);
  CHECK(doc["messages"][0]["parts"][0]["text"] == "look");
  CHECK(doc["messages"][0]["parts"][1]["image_sha256"] == hash);
  CHECK(doc.dump().find("base64") == std::string::npos);
}

TEST_CASE("http client retries 429s and honors backoff bounds") {
  httplib::Server server;
  std::atomic<int> hits{0};
  server.Post("/v1/chat/completions",
              [&](const httplib::Request&, httplib::Response& res) {
                int n = hits.fetch_add(1);
                if (n < 2) {
                  res.status = 429;
                  res.set_content("slow down", "text/plain");
                  return;
                }
                res.set_content(
                    R"({"id":"req-3","choices":[{"message":{"content":"OK"}}]})",
                    "application/json");
              });
  int port = server.bind_to_any_port("127.0.0.1");
  std::thread worker([&] { server.listen_after_bind(); });
  server.wait_until_ready();

  BackendProfile profile;
  profile.base_url = "http://127.0.0.1:" + std::to_string(port) + "/v1";
  profile.retry = {3, 0.05};
  HttpBackend backend(profile);
  auto start = std::chrono::steady_clock::now();
  CompletionResult result = backend.complete(text_request("ping"), {"c", "s"});
  double elapsed = std::chrono::duration<double>(
      std::chrono::steady_clock::now() - start).count();

  CHECK(result.text == "OK");
  CHECK(result.retries == 2);
  CHECK(result.request_id == "req-3");
  CHECK(hits.load() == 3);
  // delays: 0.05 + jitter(<=0.025), then 0.10 + jitter(<=0.05)
  CHECK(result.backoff_seconds >= 0.15);
  CHECK(result.backoff_seconds <= 0.225);
  CHECK(elapsed >= 0.15);

  server.stop();
  worker.join();
}

TEST_CASE("http client gives up with RateLimited after retries") {
  httplib::Server server;
  std::atomic<int> hits{0};
  server.Post("/v1/chat/completions",
              [&](const httplib::Request&, httplib::Response& res) {
                hits.fetch_add(1);
                res.status = 429;
              });
  int port = server.bind_to_any_port("127.0.0.1");
  std::thread worker([&] { server.listen_after_bind(); });
  server.wait_until_ready();

  BackendProfile profile;
  profile.base_url = "http://127.0.0.1:" + std::to_string(port) + "/v1";
  profile.retry = {1, 0.01};
  HttpBackend backend(profile);
  try {
    backend.complete(text_request("ping"), {"c", "s"});
    FAIL("expected RateLimited");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::rate_limited);
  }
  CHECK(hits.load() == 2);  // initial call + one retry

  server.stop();
  worker.join();
}

TEST_CASE("non-retryable statuses raise ApiError immediately") {
  httplib::Server server;
  std::atomic<int> hits{0};
  server.Post("/v1/chat/completions",
              [&](const httplib::Request&, httplib::Response& res) {
                hits.fetch_add(1);
                res.status = 404;
                res.set_content("nope", "text/plain");
              });
  int port = server.bind_to_any_port("127.0.0.1");
  std::thread worker([&] { server.listen_after_bind(); });
  server.wait_until_ready();

  BackendProfile profile;
  profile.base_url = "http://127.0.0.1:" + std::to_string(port) + "/v1";
  profile.retry = {3, 0.01};
  HttpBackend backend(profile);
  try {
    backend.complete(text_request("ping"), {"c", "s"});
    FAIL("expected ApiError");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::api_error);
  }
  CHECK(hits.load() == 1);

  server.stop();
  worker.join();
}

TEST_CASE("bearer token and a lossless image payload reach the wire") {
  httplib::Server server;
  std::string seen_auth;
  std::string seen_body;
  server.Post("/v1/chat/completions",
              [&](const httplib::Request& req, httplib::Response& res) {
                seen_auth = req.get_header_value("Authorization");
                seen_body = req.body;
                res.set_content(
                    R"({"id":"r","choices":[{"message":{"content":"hi"}}]})",
                    "application/json");
              });
  int port = server.bind_to_any_port("127.0.0.1");
  std::thread worker([&] { server.listen_after_bind(); });
  server.wait_until_ready();

  BackendProfile profile;
  profile.base_url = "http://127.0.0.1:" + std::to_string(port) + "/v1";
  HttpBackend backend(profile, "sk-test-123");

  Image img = testutil::random_image(9, 7, 21);
  CompletionRequest request;
  ChatMessage message;
  message.role = Role::user;
  message.parts.push_back(MessagePart::make_text("hello"));
  message.parts.push_back(MessagePart::make_image(img));
  request.messages.push_back(std::move(message));
  backend.complete(request, {"c", "s"});
  CHECK(seen_auth == "Bearer sk-test-123");

  // decode the wire payload: the raster must round-trip bit-exactly
  nlohmann::json body = nlohmann::json::parse(seen_body);
  std::string url = body["messages"][0]["content"][1]["image_url"]["url"];
  const std::string prefix = "data:image/png;base64,";
  REQUIRE(url.rfind(prefix, 0) == 0);
  auto png = base64_decode(url.substr(prefix.size()));
  CHECK(decode_png(png.data(), png.size()) == img);

  server.stop();
  worker.join();
}

TEST_CASE("backend factory builds both kinds from json") {
  nlohmann::json scripted{{"type", "scripted"},
                          {"name", "mock"},
                          {"script", {{{"match", "always"}, {"response", "yo"}}}}};
  auto backend = backend_from_json(scripted);
  CHECK(backend->complete(text_request("x"), {"c", "s"}).text == "yo");

  nlohmann::json http{{"type", "http"},
                      {"name", "svc"},
                      {"base_url", "http://example.invalid/v1"},
                      {"model", "m"},
                      {"max_images", 4},
                      {"timeout_s", 5.0},
                      {"retries", {{"max_retries", 2}, {"base_backoff_s", 0.1}}}};
  auto client = backend_from_json(http);
  CHECK(client->profile().max_images_per_request == 4);
  CHECK(client->profile().retry.max_retries == 2);

  nlohmann::json bad = http;
  bad["max_images"] = 0;
  CHECK_THROWS_AS(backend_from_json(bad), Error);
}
