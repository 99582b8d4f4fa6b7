#pragma once

#include <stdexcept>
#include <string>

namespace numcast {

// Exceptions carry a stable machine-readable category string so the CLI can
// report failures uniformly ("error[<category>]: message", exit code 1).
class error : public std::runtime_error {
public:
    error(std::string category, const std::string& message)
        : std::runtime_error(message), category_(std::move(category)) {}

    const std::string& category() const noexcept { return category_; }

private:
    std::string category_;
};

struct overflow_error : error {
    explicit overflow_error(const std::string& msg) : error("overflow", msg) {}
};

struct invalid_config : error {
    explicit invalid_config(const std::string& msg) : error("invalid-config", msg) {}
};

struct invalid_input : error {
    explicit invalid_input(const std::string& msg) : error("invalid-input", msg) {}
};

struct empty_series_error : error {
    explicit empty_series_error(const std::string& msg) : error("empty-series", msg) {}
};

struct coverage_error : error {
    explicit coverage_error(const std::string& msg) : error("logprob-coverage", msg) {}
};

struct backend_error : error {
    explicit backend_error(const std::string& msg) : error("backend", msg) {}
};

struct transport_error : backend_error {
    explicit transport_error(const std::string& msg) : backend_error(msg) {}
};

struct unsupported_capability : error {
    explicit unsupported_capability(const std::string& msg)
        : error("unsupported-capability", msg) {}
};

struct budget_exceeded : error {
    explicit budget_exceeded(const std::string& msg) : error("budget-exceeded", msg) {}
};

struct malformed_response : error {
    explicit malformed_response(const std::string& msg) : error("malformed-response", msg) {}
};

struct insufficient_samples : error {
    explicit insufficient_samples(const std::string& msg)
        : error("insufficient-samples", msg) {}
};

struct io_error : error {
    explicit io_error(const std::string& msg) : error("io", msg) {}
};

} // namespace numcast
