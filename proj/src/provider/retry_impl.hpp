#pragma once

// Template body for forge::provider::with_retries; included from chat.hpp.

#include <random>
#include <thread>

#include "common/digest.hpp"
#include "common/errors.hpp"

namespace forge::provider {

template <class Fn>
auto with_retries(const RetryPolicy& policy, const ChatClient::Sleeper& sleep, Fn&& attempt)
    -> decltype(attempt()) {
    const int max_attempts = policy.max_retries + 1;
    std::mt19937_64 jitter_rng(mix64(policy.jitter_seed));
    for (int n = 1;; ++n) {
        try {
            return attempt();
        } catch (const BackendError& e) {
            if (!e.retryable() || n >= max_attempts) {
                const Errc code = e.status() == 429 ? Errc::RateLimited : Errc::ProviderFailure;
                fail(code, "status " + std::to_string(e.status()) + " after " + std::to_string(n) +
                               " attempt(s): " + e.what());
            }
            double delay = static_cast<double>(policy.base_delay.count());
            for (int i = 1; i < n; ++i) delay *= policy.multiplier;
            if (policy.jitter) delay *= std::uniform_real_distribution<double>(0.5, 1.0)(jitter_rng);
            const auto wait = std::chrono::milliseconds(static_cast<long long>(delay));
            if (sleep) sleep(wait);
            else std::this_thread::sleep_for(wait);
        }
    }
}

}  // namespace forge::provider
