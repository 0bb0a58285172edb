#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace bmp {

/// Invalid parameters or an unsupported combination. Carries every violated
/// invariant that was found, not just the first one.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(std::vector<std::string> issues)
        : std::runtime_error(join(issues)), issues_(std::move(issues)) {}
    explicit ConfigError(const std::string& issue) : ConfigError(std::vector<std::string>{issue}) {}

    const std::vector<std::string>& issues() const noexcept { return issues_; }

private:
    static std::string join(const std::vector<std::string>& issues) {
        std::string out;
        for (std::size_t i = 0; i < issues.size(); ++i) {
            if (i) out += "; ";
            out += issues[i];
        }
        return out;
    }
    std::vector<std::string> issues_;
};

/// A Monte Carlo estimator could not produce a usable value (e.g. the
/// importance weights collapsed).
class EstimationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Collects configuration issues and throws them together.
class IssueList {
public:
    void require(bool ok, std::string message) {
        if (!ok) issues_.push_back(std::move(message));
    }
    void add(std::string message) { issues_.push_back(std::move(message)); }
    void merge(const IssueList& other) {
        issues_.insert(issues_.end(), other.issues_.begin(), other.issues_.end());
    }
    bool empty() const noexcept { return issues_.empty(); }
    const std::vector<std::string>& items() const noexcept { return issues_; }
    void throw_if_any() const {
        if (!issues_.empty()) throw ConfigError(issues_);
    }

private:
    std::vector<std::string> issues_;
};

}  // namespace bmp
