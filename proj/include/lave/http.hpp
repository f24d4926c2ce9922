#pragma once

#include <memory>
#include <string>

#include <httplib.h>

#include "lave/error.hpp"

namespace lave {

/// "http://host:port/prefix" split into the part httplib connects to and the
/// path prefix requests are issued under.
struct BaseUrl {
  std::string origin;  // scheme://host[:port]
  std::string prefix;  // "" or "/v1", never a trailing slash

  static BaseUrl parse(const std::string& url) {
    const auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) throw Error("base url needs a scheme: " + url);
    const std::string scheme = url.substr(0, scheme_end);
    if (scheme != "http" && scheme != "https") throw Error("unsupported url scheme: " + scheme);
#ifndef CPPHTTPLIB_OPENSSL_SUPPORT
    if (scheme == "https") throw Error("https base urls need a build with OpenSSL support");
#endif
    const auto path_start = url.find('/', scheme_end + 3);
    BaseUrl b;
    b.origin = url.substr(0, path_start);
    if (b.origin.size() <= scheme_end + 3) throw Error("base url has no host: " + url);
    if (path_start != std::string::npos) b.prefix = url.substr(path_start);
    while (!b.prefix.empty() && b.prefix.back() == '/') b.prefix.pop_back();
    return b;
  }

  std::unique_ptr<httplib::Client> client(int timeout_seconds) const {
    auto c = std::make_unique<httplib::Client>(origin);
    c->set_connection_timeout(timeout_seconds, 0);
    c->set_read_timeout(timeout_seconds, 0);
    c->set_write_timeout(timeout_seconds, 0);
    return c;
  }
};

}  // namespace lave
