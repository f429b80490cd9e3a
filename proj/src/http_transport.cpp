// The only translation unit that includes the HTTP client.

#include <httplib.h>

#include "twinsynth/provider.hpp"

namespace twinsynth {
namespace {

struct SplitUrl {
  std::string origin;  // scheme://host[:port]
  std::string path;
};

SplitUrl split_url(const std::string& url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) throw ConfigError("endpoint URL lacks a scheme: " + url);
  const auto path_start = url.find('/', scheme_end + 3);
  if (path_start == std::string::npos) return {url, "/"};
  return {url.substr(0, path_start), url.substr(path_start)};
}

class HttplibTransport : public HttpTransport {
 public:
  HttpReply post(const std::string& url, const std::map<std::string, std::string>& headers,
                 const std::string& body, std::chrono::seconds timeout) override {
    const auto parts = split_url(url);
    httplib::Client cli(parts.origin);
    cli.set_connection_timeout(timeout);
    cli.set_read_timeout(timeout);
    cli.set_write_timeout(timeout);
    httplib::Headers h;
    std::string content_type = "application/json";
    for (const auto& [k, v] : headers) {
      if (k == "Content-Type") {
        content_type = v;
      } else {
        h.emplace(k, v);
      }
    }
    auto res = cli.Post(parts.path, h, body, content_type);
    if (!res) throw TransientFailure("transport failure: " + httplib::to_string(res.error()), 0);
    return {res->status, res->body};
  }
};

}  // namespace

std::shared_ptr<HttpTransport> default_http_transport() { return std::make_shared<HttplibTransport>(); }

}  // namespace twinsynth
