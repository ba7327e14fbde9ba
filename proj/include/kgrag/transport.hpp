#pragma once
// Minimal POST transport behind a std::function so remote providers can be
// fault-injected in tests. Status 0 means the request never completed
// (connect/read failure); those and 429/5xx responses are retried.
// The httplib-backed default lives in transport_httplib.hpp.

#include "kgrag/error.hpp"

#include <chrono>
#include <functional>
#include <string>
#include <thread>
#include <utility>
#include <vector>

namespace kgrag {

struct HttpResponse {
    int status = 0;
    std::string body;
};

using Header = std::pair<std::string, std::string>;
using HttpTransport = std::function<HttpResponse(
    const std::string& url, const std::string& json_body,
    const std::vector<Header>& headers)>;

struct RetryPolicy {
    int max_attempts = 3;
    int backoff_ms = 200; // doubled per retry
};

inline bool is_retryable_status(int status) {
    return status == 0 || status == 429 || (status >= 500 && status < 600);
}

// Runs the transport with retries. Returns the first 2xx response and the
// attempt count; throws ProviderError otherwise.
inline std::pair<HttpResponse, int> post_with_retry(
    const HttpTransport& transport, const RetryPolicy& policy,
    const std::string& url, const std::string& body,
    const std::vector<Header>& headers, const std::string& what) {
    int attempts = 0;
    int delay = policy.backoff_ms;
    HttpResponse last;
    while (attempts < policy.max_attempts) {
        ++attempts;
        last = transport(url, body, headers);
        if (last.status >= 200 && last.status < 300) return {last, attempts};
        if (!is_retryable_status(last.status))
            throw ProviderError(what + ": HTTP " + std::to_string(last.status),
                                /*retryable=*/false, attempts, last.body);
        if (attempts < policy.max_attempts && delay > 0) {
            std::this_thread::sleep_for(std::chrono::milliseconds(delay));
            delay *= 2;
        }
    }
    throw ProviderError(what + ": exhausted " + std::to_string(attempts) +
                            " attempts (last status " + std::to_string(last.status) + ")",
                        /*retryable=*/true, attempts, last.body);
}

} // namespace kgrag
