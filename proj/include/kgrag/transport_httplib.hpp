#pragma once
// httplib-backed default transport. Kept out of transport.hpp so test
// translation units that only inject fakes skip the heavy include.

#include "kgrag/transport.hpp"

#include "httplib.h"

namespace kgrag {

// Splits "http://host:port/path" into (host:port, /path).
inline std::pair<std::string, std::string> split_url(const std::string& url) {
    std::string rest = url;
    auto scheme = rest.find("://");
    if (scheme != std::string::npos) rest = rest.substr(scheme + 3);
    auto slash = rest.find('/');
    if (slash == std::string::npos) return {rest, "/"};
    return {rest.substr(0, slash), rest.substr(slash)};
}

inline HttpResponse default_http_post(const std::string& url, const std::string& body,
                                      const std::vector<Header>& headers) {
    auto [host, path] = split_url(url);
    httplib::Client client(host);
    client.set_connection_timeout(10, 0);
    client.set_read_timeout(120, 0);
    httplib::Headers h;
    for (const auto& [k, v] : headers) h.emplace(k, v);
    auto res = client.Post(path, h, body, "application/json");
    if (!res) return {0, {}};
    return {res->status, res->body};
}

} // namespace kgrag
