#include "gdnm/env.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace gdnm {

void ModelParams::validate() const {
    if (!(p > 0.0 && p < 1.0)) {
        std::ostringstream msg;
        msg << "openness density must lie in (0,1), got " << p;
        throw InvalidParams("model.p", msg.str());
    }
    if (q.empty()) throw InvalidParams("model.q", "jump-rank law is empty");
    double total = 0.0;
    for (const auto& [rank, prob] : q) {
        if (rank < 1) throw InvalidParams("model.q", "ranks must be >= 1, got " + std::to_string(rank));
        if (!(prob >= 0.0)) throw InvalidParams("model.q", "negative probability at rank " + std::to_string(rank));
        total += prob;
    }
    if (std::abs(total - 1.0) > 1e-12) {
        std::ostringstream msg;
        msg.precision(12);
        msg << "probabilities sum to " << total << ", expected 1";
        throw InvalidParams("model.q", msg.str());
    }
    if (max_rank() < 1) throw InvalidParams("model.q", "no rank carries positive mass");
}

int ModelParams::max_rank() const {
    int best = 0;
    for (const auto& [rank, prob] : q)
        if (prob > 0.0) best = std::max(best, rank);
    return best;
}

int ModelParams::min_rank() const {
    int best = 0;
    for (const auto& [rank, prob] : q)
        if (prob > 0.0 && (best == 0 || rank < best)) best = rank;
    return best;
}

double ModelParams::q_at(int rank) const {
    double total = 0.0;
    for (const auto& [r, prob] : q)
        if (r == rank) total += prob;
    return total;
}

double binomial_lower_tail(double p, std::int64_t sites, int count) {
    if (count <= 0) return 0.0;
    if (sites < count) return 1.0;
    const double n = static_cast<double>(sites);
    const double lp = std::log(p);
    const double lq = std::log1p(-p);
    double total = 0.0;
    for (int j = 0; j < count; ++j) {
        const double lc = std::lgamma(n + 1.0) - std::lgamma(j + 1.0) - std::lgamma(n - j + 1.0);
        total += std::exp(lc + j * lp + (n - j) * lq);
    }
    return std::min(total, 1.0);
}

std::int64_t radius_for_residual(double p, int count, double tolerance) {
    std::int64_t radius = 0;
    while (binomial_lower_tail(p, 2 * radius + 1, count) >= tolerance) {
        ++radius;
        if (radius > (std::int64_t{1} << 40))
            throw std::runtime_error("radius_for_residual: no finite radius reaches the tolerance");
    }
    return radius;
}

void EnvOracle::set_keys(std::uint64_t seed) {
    seed_ = seed;
    params_.seed = seed;
    for (std::size_t f = 0; f < keys_.size(); ++f)
        keys_[f] = mix64(mix64(seed) ^ mix64(0xa0761d6478bd642fULL * (f + 1)));
}

EnvOracle EnvOracle::with_seed(std::uint64_t seed) const {
    EnvOracle copy = *this;
    copy.set_keys(seed);
    return copy;
}

EnvOracle::EnvOracle(ModelParams params) : EnvOracle(params, params.seed) {}

EnvOracle::EnvOracle(const ModelParams& params, std::uint64_t seed) : params_(params), seed_(seed) {
    params_.validate();
    set_keys(seed);

    auto support = params_.q;
    std::erase_if(support, [](const auto& e) { return e.second <= 0.0; });
    std::sort(support.begin(), support.end());
    double acc = 0.0;
    for (const auto& [rank, prob] : support) {
        if (!ranks_.empty() && ranks_.back() == rank) {
            acc += prob;
            cdf_.back() = acc;
            continue;
        }
        acc += prob;
        ranks_.push_back(rank);
        cdf_.push_back(acc);
    }
    scan_radius_ = 4 * std::max<std::int64_t>(1, radius_for_residual(params_.p, params_.max_rank(), 1e-12));
}

} // namespace gdnm
