#include "idic/http_json.hpp"

#include <thread>

#include <httplib.h>

#include "idic/errors.hpp"

namespace idic {
namespace {

struct SplitUrl {
  std::string origin;  // scheme://host:port
  std::string prefix;  // path prefix without trailing slash
};

SplitUrl split_url(const std::string& url) {
  auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) throw TransportError("endpoint URL lacks a scheme: " + url);
  auto path_start = url.find('/', scheme_end + 3);
  SplitUrl out;
  out.origin = url.substr(0, path_start);
  if (path_start != std::string::npos) out.prefix = url.substr(path_start);
  while (!out.prefix.empty() && out.prefix.back() == '/') out.prefix.pop_back();
  return out;
}

}  // namespace

nlohmann::json post_json(const HttpEndpoint& endpoint, std::string_view path,
                         const nlohmann::json& body) {
  if (endpoint.base_url.empty()) throw TransportError("no endpoint URL configured");
  const SplitUrl url = split_url(endpoint.base_url);
  std::string full_path = url.prefix + std::string(path);
  if (full_path.empty()) full_path = "/";
  const std::string payload = body.dump();

  auto secs = std::chrono::duration_cast<std::chrono::seconds>(endpoint.timeout);
  auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(endpoint.timeout - secs);

  std::chrono::milliseconds delay = endpoint.backoff;
  std::string last_error;
  for (int attempt = 0; attempt <= endpoint.retries; ++attempt) {
    if (attempt > 0) {
      std::this_thread::sleep_for(delay);
      delay *= 2;
    }
    httplib::Client client(url.origin);
    client.set_connection_timeout(secs.count(), usecs.count());
    client.set_read_timeout(secs.count(), usecs.count());
    client.set_write_timeout(secs.count(), usecs.count());
    auto res = client.Post(full_path, payload, "application/json");
    if (!res) {
      last_error = httplib::to_string(res.error());
      continue;
    }
    const bool retriable = res->status == 429 || res->status >= 500;
    if (res->status >= 200 && res->status < 300) {
      try {
        return nlohmann::json::parse(res->body);
      } catch (const nlohmann::json::exception& e) {
        throw DecodeError("reply from " + endpoint.base_url + full_path + " is not JSON: " +
                          e.what());
      }
    }
    if (!retriable || attempt == endpoint.retries) throw BackendError(res->status, res->body);
    last_error = "HTTP " + std::to_string(res->status);
  }
  throw TransportError("POST " + endpoint.base_url + full_path + " failed after " +
                       std::to_string(endpoint.retries + 1) + " attempts: " + last_error);
}

}  // namespace idic
