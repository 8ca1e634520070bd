#include <httplib.h>

#include "bargain/remote.hpp"

namespace bargain {

namespace {

class HttplibTransport : public Transport {
 public:
  HttpResponse post(const HttpRequest& request) override {
    httplib::Client client(request.base_url);
    client.set_connection_timeout(10);
    client.set_read_timeout(120);
    httplib::Headers headers;
    std::string content_type = "application/json";
    for (const auto& [k, v] : request.headers) {
      if (k == "content-type") {
        content_type = v;
      } else {
        headers.emplace(k, v);
      }
    }
    auto res = client.Post(request.path, headers, request.body, content_type);
    if (!res) {
      throw TransportError("request to " + request.base_url + request.path + " failed: " +
                           httplib::to_string(res.error()));
    }
    return {res->status, res->body};
  }
};

}  // namespace

std::unique_ptr<Transport> make_http_transport() { return std::make_unique<HttplibTransport>(); }

}  // namespace bargain
