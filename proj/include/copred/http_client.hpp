#pragma once

#include <cstdlib>
#include <string>

#include <httplib.h>

#include "copred/annotator.hpp"

namespace copred {

// Remote completion client: POSTs {"prompt", "temperature", "top_p"} as
// JSON and expects {"text": "..."} back. Credentials come from the
// COPRED_ANNOTATOR_TOKEN environment variable (sent as a bearer token).
class HttpCompletionClient : public AnnotationClient {
 public:
  explicit HttpCompletionClient(const std::string& endpoint) {
    std::string rest = endpoint;
    const auto scheme = rest.find("://");
    if (scheme != std::string::npos) rest = rest.substr(scheme + 3);
    const auto slash = rest.find('/');
    base_ = (scheme != std::string::npos ? endpoint.substr(0, scheme + 3) : "http://") +
            (slash == std::string::npos ? rest : rest.substr(0, slash));
    path_ = slash == std::string::npos ? "/" : rest.substr(slash);
    if (const char* token = std::getenv("COPRED_ANNOTATOR_TOKEN")) token_ = token;
  }

  std::string complete(const std::string& prompt, double temperature, double top_p) override {
    httplib::Client client(base_);
    client.set_connection_timeout(10);
    client.set_read_timeout(60);
    httplib::Headers headers;
    if (!token_.empty()) headers.emplace("Authorization", "Bearer " + token_);
    const nlohmann::json body{{"prompt", prompt}, {"temperature", temperature}, {"top_p", top_p}};
    auto res = client.Post(path_, headers, body.dump(), "application/json");
    if (!res) {
      fail_runtime("annotation request to ", base_, path_, " failed: ",
                   httplib::to_string(res.error()));
    }
    if (res->status != 200) {
      fail_runtime("annotation request returned HTTP ", res->status);
    }
    nlohmann::json reply;
    try {
      reply = nlohmann::json::parse(res->body);
    } catch (const nlohmann::json::exception& e) {
      fail_runtime("annotation response is not JSON: ", e.what());
    }
    if (!reply.contains("text") || !reply["text"].is_string()) {
      fail_runtime("annotation response lacks a \"text\" field");
    }
    return reply["text"].get<std::string>();
  }

  const std::string& base() const { return base_; }
  const std::string& path() const { return path_; }

 private:
  std::string base_;
  std::string path_;
  std::string token_;
};

}  // namespace copred
