#include "otp/state.hpp"

#include <cmath>
#include <sstream>

#include "otp/error.hpp"
#include "otp/rng.hpp"

namespace otp {

double Rng::normal() {
    const double u1 = uniform_open_low();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

TestState::TestState(std::size_t d) : entries_(d) {
    if (d == 0) throw InvalidArgument("TestState: dimension must be at least 1");
}

TestState::TestState(std::vector<std::optional<double>> entries) : entries_(std::move(entries)) {
    if (entries_.empty()) throw InvalidArgument("TestState: dimension must be at least 1");
}

TestState TestState::terminal(std::size_t d) {
    TestState s(d);
    s.terminal_ = true;
    return s;
}

bool TestState::observed(std::size_t i) const {
    if (i >= entries_.size()) throw InvalidArgument("TestState: index out of range");
    return entries_[i].has_value();
}

double TestState::value(std::size_t i) const {
    if (!observed(i)) throw InvalidArgument("TestState: entry " + std::to_string(i) + " is missing");
    return *entries_[i];
}

std::vector<std::size_t> TestState::observed_indices() const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < entries_.size(); ++i)
        if (entries_[i]) out.push_back(i);
    return out;
}

std::vector<std::size_t> TestState::missing_indices() const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < entries_.size(); ++i)
        if (!entries_[i]) out.push_back(i);
    return out;
}

std::size_t TestState::num_observed() const {
    std::size_t n = 0;
    for (const auto& e : entries_) n += e.has_value();
    return n;
}

std::string TestState::to_string() const {
    if (terminal_) return "END";
    std::ostringstream os;
    os.precision(17);
    os << '(';
    for (std::size_t i = 0; i < entries_.size(); ++i) {
        if (i) os << ',';
        if (entries_[i]) os << *entries_[i];
        else os << "NA";
    }
    os << ')';
    return os.str();
}

bool consistent(std::span<const double> x, const TestState& s) {
    if (x.size() != s.dim())
        throw InvalidArgument("consistent: outcome has dimension " + std::to_string(x.size()) +
                              ", state has " + std::to_string(s.dim()));
    if (s.is_terminal()) throw InvalidArgument("consistent: terminal state");
    const auto& e = s.entries();
    for (std::size_t i = 0; i < x.size(); ++i)
        if (e[i] && *e[i] != x[i]) return false;
    return true;
}

TestState apply_observation(const TestState& s, std::size_t test, double value) {
    if (s.is_terminal()) throw InvalidArgument("apply_observation: terminal state");
    if (test >= s.dim()) throw InvalidArgument("apply_observation: test index out of range");
    if (s.observed(test))
        throw InvalidArgument("apply_observation: test " + std::to_string(test) + " already observed");
    auto entries = s.entries();
    entries[test] = value;
    return TestState(std::move(entries));
}

} // namespace otp
