#ifdef STOIC_WITH_OPENSSL
#define CPPHTTPLIB_OPENSSL_SUPPORT
#endif
#include <httplib.h>

#include "stoic/pdb_ingest.hpp"

namespace stoic::pdb {

namespace {

class HttpTransport : public Transport {
 public:
  HttpResponse send(const HttpRequest& request) override {
    const auto scheme_end = request.url.find("://");
    if (scheme_end == std::string::npos) throw Error(ErrorCode::Network, "bad URL '" + request.url + "'");
    const auto path_start = request.url.find('/', scheme_end + 3);
    const std::string origin = request.url.substr(0, path_start);
    const std::string path = path_start == std::string::npos ? "/" : request.url.substr(path_start);

    httplib::Client client(origin);
    client.set_connection_timeout(30);
    client.set_read_timeout(60);
    client.set_follow_location(true);
    httplib::Result res = request.method == "POST" ? client.Post(path, request.body, "application/json")
                                                   : client.Get(path);
    if (!res) throw Error(ErrorCode::Network, request.url + ": " + httplib::to_string(res.error()));
    return HttpResponse{res->status, res->body};
  }
};

}  // namespace

std::unique_ptr<Transport> make_http_transport() {
#ifndef STOIC_WITH_OPENSSL
  throw Error(ErrorCode::Network, "built without TLS support; live fetching is unavailable");
#endif
  return std::make_unique<HttpTransport>();
}

}  // namespace stoic::pdb
