#include "otp/trace.hpp"

#include <charconv>
#include <istream>
#include <ostream>
#include <sstream>

#include "otp/error.hpp"

namespace otp {

OutcomeVector Environment::draw(std::uint64_t episode) const {
    Rng rng = Rng(seed_).derive(episode);
    return sample(model_, rng);
}

void RegretTrace::push(EpisodeRecord record) {
    record.cumulative_regret = final_regret() + record.simple_regret;
    records.push_back(std::move(record));
}

double simple_regret(const AgentSpec& spec, const Policy& clairvoyant, const Rollout& agent,
                     std::span<const double> x, double* clairvoyant_reward) {
    const double best = rollout(clairvoyant, spec, x).reward();
    if (clairvoyant_reward) *clairvoyant_reward = best;
    return best - agent.reward();
}

EpisodeRecord make_record(std::uint64_t episode, std::string phase, const Rollout& agent,
                          std::span<const double> x, double clairvoyant_reward) {
    EpisodeRecord r;
    r.episode = episode;
    r.phase = std::move(phase);
    r.tests = agent.tests;
    r.decision = agent.decision;
    r.realized_reward = agent.reward();
    r.clairvoyant_reward = clairvoyant_reward;
    r.simple_regret = clairvoyant_reward - r.realized_reward;
    r.observed.assign(x.size(), std::nullopt);
    for (std::size_t i : agent.tests) r.observed[i] = x[i];
    return r;
}

std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

namespace {

std::string join(const std::vector<std::size_t>& xs) {
    std::string s;
    for (std::size_t k = 0; k < xs.size(); ++k) {
        if (k) s += ';';
        s += std::to_string(xs[k]);
    }
    return s;
}

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : line) {
        if (ch == sep) {
            out.push_back(cur);
            cur.clear();
        } else if (ch != '\r') {
            cur += ch;
        }
    }
    out.push_back(cur);
    return out;
}

std::vector<std::size_t> parse_indices(const std::string& s) {
    std::vector<std::size_t> out;
    if (s.empty()) return out;
    for (const auto& tok : split(s, ';')) out.push_back(std::stoul(tok));
    return out;
}

double parse_double(const std::string& s) {
    double v = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size())
        throw InvalidArgument("trace csv: bad number '" + s + "'");
    return v;
}

const char* kCoreHeader =
    "episode,phase,tests_performed,decision,realized_reward,clairvoyant_reward,simple_regret,cumulative_regret";
const char* kEliminationHeader = ",pair_chosen,subset_played,C_size,U_t,eliminated_count";

} // namespace

void write_trace_csv(const RegretTrace& trace, std::ostream& out) {
    const bool elim = !trace.records.empty() && trace.records.front().elimination.has_value();
    out << kCoreHeader << (elim ? kEliminationHeader : "") << '\n';
    for (const auto& r : trace.records) {
        out << r.episode << ',' << r.phase << ',' << join(r.tests) << ','
            << (r.decision ? std::to_string(*r.decision) : std::string()) << ',' << format_double(r.realized_reward)
            << ',' << format_double(r.clairvoyant_reward) << ',' << format_double(r.simple_regret) << ','
            << format_double(r.cumulative_regret);
        if (elim) {
            const auto& e = *r.elimination;
            out << ',';
            if (e.pair) out << e.pair->first << '-' << e.pair->second;
            out << ',' << join(e.subset) << ',' << e.candidates << ',' << format_double(e.width) << ','
                << e.eliminated;
        }
        out << '\n';
    }
}

RegretTrace read_trace_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw InvalidArgument("trace csv: empty input");
    const auto header = split(line, ',');
    const auto core = split(kCoreHeader, ',');
    if (header.size() < core.size() || !std::equal(core.begin(), core.end(), header.begin()))
        throw InvalidArgument("trace csv: unexpected header");
    const bool elim = header.size() > core.size();
    RegretTrace trace;
    while (std::getline(in, line)) {
        if (line.empty() || line == "\r") continue;
        const auto f = split(line, ',');
        if (f.size() != header.size()) throw InvalidArgument("trace csv: ragged row");
        EpisodeRecord r;
        r.episode = std::stoull(f[0]);
        r.phase = f[1];
        r.tests = parse_indices(f[2]);
        if (!f[3].empty()) r.decision = std::stoul(f[3]);
        r.realized_reward = parse_double(f[4]);
        r.clairvoyant_reward = parse_double(f[5]);
        r.simple_regret = parse_double(f[6]);
        r.cumulative_regret = parse_double(f[7]);
        if (elim) {
            EliminationColumns e;
            if (!f[8].empty()) {
                const auto dash = f[8].find('-');
                e.pair = std::make_pair(std::stoul(f[8].substr(0, dash)), std::stoul(f[8].substr(dash + 1)));
            }
            e.subset = parse_indices(f[9]);
            e.candidates = std::stoul(f[10]);
            e.width = parse_double(f[11]);
            e.eliminated = std::stoul(f[12]);
            r.elimination = e;
        }
        trace.records.push_back(std::move(r));
    }
    return trace;
}

void write_dataset_csv(const RegretTrace& trace, std::ostream& out) {
    const std::size_t d = trace.records.empty() ? 0 : trace.records.front().observed.size();
    out << "episode";
    for (std::size_t i = 0; i < d; ++i) out << ",x" << i;
    out << '\n';
    for (const auto& r : trace.records) {
        out << r.episode;
        for (const auto& v : r.observed) out << ',' << (v ? format_double(*v) : std::string("NA"));
        out << '\n';
    }
}

} // namespace otp
