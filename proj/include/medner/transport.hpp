#pragma once

#include <memory>
#include <string>
#include <utility>
#include <vector>

namespace medner {

struct HttpResponse {
  int status = 0;
  std::string body;
};

using HttpHeaders = std::vector<std::pair<std::string, std::string>>;

/// Minimal HTTP seam so gateways and remote providers are testable offline.
class Transport {
 public:
  virtual ~Transport() = default;
  virtual HttpResponse post(const std::string& url, const std::string& body,
                            const HttpHeaders& headers) = 0;
};

/// Real transport backed by cpp-httplib (https when built with TLS support).
class HttplibTransport final : public Transport {
 public:
  explicit HttplibTransport(int timeout_seconds = 120) : timeout_seconds_(timeout_seconds) {}
  HttpResponse post(const std::string& url, const std::string& body,
                    const HttpHeaders& headers) override;

 private:
  int timeout_seconds_;
};

/// Throws TransportFailure on any use; injected in replay mode so a cache gap
/// can never silently fall through to the network.
class FailingTransport final : public Transport {
 public:
  HttpResponse post(const std::string& url, const std::string& body,
                    const HttpHeaders& headers) override;
};

}  // namespace medner
