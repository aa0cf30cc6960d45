#pragma once

#include <cstdlib>

#include <httplib.h>

#include "taskdfa/llm.hpp"

namespace taskdfa {

/// Chat-completion transport over HTTP(S). Posts to {base_url}/chat/completions
/// and sends "Authorization: Bearer $KEY" when the configured variable is set.
class HttpTransport : public ChatTransport {
 public:
  explicit HttpTransport(LlmEndpointConfig config) : config_(std::move(config)) {
    const auto& url = config_.base_url;
    auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) throw InputError("endpoint URL needs a scheme: " + url);
    auto path_start = url.find('/', scheme_end + 3);
    origin_ = url.substr(0, path_start);
    prefix_ = path_start == std::string::npos ? "" : url.substr(path_start);
    while (!prefix_.empty() && prefix_.back() == '/') prefix_.pop_back();
  }

  std::string complete(const ChatRequest& request) override {
    httplib::Client client(origin_);
    auto secs = static_cast<time_t>(config_.timeout_seconds);
    auto usecs = static_cast<time_t>((config_.timeout_seconds - static_cast<double>(secs)) * 1e6);
    client.set_connection_timeout(secs, usecs);
    client.set_read_timeout(secs, usecs);
    client.set_write_timeout(secs, usecs);
    httplib::Headers headers;
    if (const char* key = std::getenv(config_.api_key_env.c_str()); key && *key)
      headers.emplace("Authorization", std::string("Bearer ") + key);
    auto res = client.Post(prefix_ + "/chat/completions", headers, request.to_json().dump(), "application/json");
    if (!res) throw TransportError("request failed: " + httplib::to_string(res.error()));
    if (res->status != 200) throw TransportError("endpoint returned HTTP " + std::to_string(res->status));
    try {
      auto j = nlohmann::json::parse(res->body);
      return j.at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
      throw TransportError(std::string("unexpected response body: ") + e.what());
    }
  }

 private:
  LlmEndpointConfig config_;
  std::string origin_;
  std::string prefix_;
};

}  // namespace taskdfa
