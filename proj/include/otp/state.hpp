#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace otp {

using OutcomeVector = std::vector<double>;

/// Partially observed outcome vector. Missing entries are NA; `terminal`
/// marks the END state reached after a decision.
class TestState {
public:
    explicit TestState(std::size_t d);
    explicit TestState(std::vector<std::optional<double>> entries);

    static TestState terminal(std::size_t d);

    std::size_t dim() const { return entries_.size(); }
    bool is_terminal() const { return terminal_; }
    bool observed(std::size_t i) const;
    double value(std::size_t i) const;
    const std::vector<std::optional<double>>& entries() const { return entries_; }

    std::vector<std::size_t> observed_indices() const;
    std::vector<std::size_t> missing_indices() const;
    std::size_t num_observed() const;
    bool fully_observed() const { return num_observed() == dim(); }

    bool operator==(const TestState&) const = default;

    std::string to_string() const;

private:
    std::vector<std::optional<double>> entries_;
    bool terminal_ = false;
};

/// x agrees with s on every observed entry (exact equality).
bool consistent(std::span<const double> x, const TestState& s);

/// s with entry `test` set to `value`. `s` itself is not modified.
TestState apply_observation(const TestState& s, std::size_t test, double value);

} // namespace otp
