#define CPPHTTPLIB_OPENSSL_SUPPORT
#include "medner/transport.hpp"

#include <httplib.h>

#include "medner/errors.hpp"

namespace medner {

namespace {

// Splits a full URL into the scheme://host[:port] origin httplib wants and
// the request path.
std::pair<std::string, std::string> split_url(const std::string& url) {
  auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) {
    throw TransportFailure("endpoint URL '" + url + "' has no scheme");
  }
  auto path_start = url.find('/', scheme_end + 3);
  if (path_start == std::string::npos) return {url, "/"};
  return {url.substr(0, path_start), url.substr(path_start)};
}

}  // namespace

HttpResponse HttplibTransport::post(const std::string& url, const std::string& body,
                                    const HttpHeaders& headers) {
  auto [origin, path] = split_url(url);
  httplib::Client client(origin);
  client.set_connection_timeout(timeout_seconds_);
  client.set_read_timeout(timeout_seconds_);
  client.set_write_timeout(timeout_seconds_);

  std::string content_type = "application/json";
  httplib::Headers request_headers;
  for (const auto& [name, value] : headers) {
    if (name == "Content-Type") {
      content_type = value;
    } else {
      request_headers.emplace(name, value);
    }
  }

  auto result = client.Post(path, request_headers, body, content_type);
  if (!result) {
    throw TransportFailure("POST " + url + " failed: " + httplib::to_string(result.error()));
  }
  return HttpResponse{result->status, result->body};
}

HttpResponse FailingTransport::post(const std::string& url, const std::string&,
                                    const HttpHeaders&) {
  throw TransportFailure("network access is disabled in this mode (attempted POST " + url + ")");
}

}  // namespace medner
