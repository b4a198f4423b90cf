#pragma once

#include <chrono>
#include <string>
#include <string_view>

#include <json.hpp>

namespace idic {

struct HttpEndpoint {
  std::string base_url;  // "http://host:port[/prefix]"
  std::chrono::milliseconds timeout{30000};
  int retries = 2;  // extra attempts after the first
  std::chrono::milliseconds backoff{200};  // doubled after every failed attempt
};

// POSTs a JSON body and decodes a JSON reply. Connection failures, 429 and
// 5xx responses are retried; the total time is bounded by
// (retries + 1) * timeout plus the backoff sleeps.
//
// Throws TransportError when no response arrives after all attempts,
// BackendError for other non-2xx replies (or a 5xx on the last attempt) and
// DecodeError when the reply is not JSON.
nlohmann::json post_json(const HttpEndpoint& endpoint, std::string_view path,
                         const nlohmann::json& body);

}  // namespace idic
