#pragma once

#include <cstdint>

#include "provider/mocks.hpp"

namespace forge::provider {

// Offline stand-in for a real model, used by `--mock`. It reads the request's
// task label and produces well-formed output for every pipeline stage, keyed
// on (seed, request) so whole runs are reproducible.
class SyntheticChat final : public CountingChat {
public:
    explicit SyntheticChat(std::uint64_t seed = 0) : seed_(seed) {}
    std::string name() const override { return "mock-synthetic"; }

protected:
    ChatResponse respond(const ChatRequest& req) override;

private:
    std::uint64_t seed_;
};

}  // namespace forge::provider
