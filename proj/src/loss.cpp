#include "rgf/loss.hpp"

#include <cmath>
#include <type_traits>

#include "rgf/error.hpp"

namespace rgf {

namespace {

double sigmoid(double z) {
    if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

// ln(1 + e^z) without overflow.
double softplus(double z) { return z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

void require_label(LossKind kind, double y) {
    if (is_margin_loss(kind) && y != 1.0 && y != -1.0)
        throw DataError("label " + std::to_string(y) + " is not +1/-1 for loss " + std::string(loss_token(kind)));
}

template <LossKind K>
double value_of(double h, double y) {
    if constexpr (K == LossKind::square) return 0.5 * (h - y) * (h - y);
    else if constexpr (K == LossKind::logistic) return softplus(-h * y);
    else if constexpr (K == LossKind::exponential) return std::exp(-h * y);
    else {
        const double r = h - y;
        return std::sqrt(1.0 + r * r) - 1.0;
    }
}

template <LossKind K>
LossDerivatives derivatives_of(double h, double y) {
    if constexpr (K == LossKind::square) return {h - y, 1.0};
    else if constexpr (K == LossKind::logistic) {
        const double m = h * y;
        const double p = sigmoid(-m);
        return {-y * p, sigmoid(m) * p};
    } else if constexpr (K == LossKind::exponential) {
        const double e = std::exp(-h * y);
        return {-y * e, e};
    } else {
        const double r = h - y;
        const double s = 1.0 + r * r;
        return {r / std::sqrt(s), 1.0 / (s * std::sqrt(s))};
    }
}

// Calls f(integral_constant<LossKind, kind>) for the decomposable kinds.
template <typename F>
decltype(auto) dispatch(LossKind kind, F&& f) {
    switch (kind) {
        case LossKind::square: return f(std::integral_constant<LossKind, LossKind::square>{});
        case LossKind::logistic: return f(std::integral_constant<LossKind, LossKind::logistic>{});
        case LossKind::exponential: return f(std::integral_constant<LossKind, LossKind::exponential>{});
        case LossKind::l1l2_hybrid: return f(std::integral_constant<LossKind, LossKind::l1l2_hybrid>{});
        case LossKind::pairwise_squared_hinge: break;
    }
    throw ConfigError("pairwise loss has no per-instance form");
}

}  // namespace

LossKind parse_loss(std::string_view token) {
    if (token == "LS") return LossKind::square;
    if (token == "Log") return LossKind::logistic;
    if (token == "Expo") return LossKind::exponential;
    if (token == "L1L2") return LossKind::l1l2_hybrid;
    if (token == "PairSqHinge") return LossKind::pairwise_squared_hinge;
    throw ConfigError("unknown loss '" + std::string(token) + "' (expected LS|Log|Expo|L1L2|PairSqHinge)");
}

std::string_view loss_token(LossKind kind) {
    switch (kind) {
        case LossKind::square: return "LS";
        case LossKind::logistic: return "Log";
        case LossKind::exponential: return "Expo";
        case LossKind::l1l2_hybrid: return "L1L2";
        case LossKind::pairwise_squared_hinge: return "PairSqHinge";
    }
    return "?";
}

double loss_value(LossKind kind, double h, double y) {
    require_label(kind, y);
    return dispatch(kind, [&](auto k) { return value_of<decltype(k)::value>(h, y); });
}

LossDerivatives loss_derivatives(LossKind kind, double h, double y) {
    require_label(kind, y);
    return dispatch(kind, [&](auto k) { return derivatives_of<decltype(k)::value>(h, y); });
}

PairwiseTerms pairwise_loss_terms(std::span<const PreferencePair> pairs, std::span<const double> outputs) {
    PairwiseTerms terms;
    terms.derivatives.first.assign(outputs.size(), 0.0);
    terms.derivatives.second.assign(outputs.size(), 0.0);
    for (const auto& p : pairs) {
        if (p.preferred >= outputs.size() || p.other >= outputs.size())
            throw DataError("pair index out of range");
        const double slack = 1.0 - (outputs[p.preferred] - outputs[p.other]);
        if (slack <= 0.0) continue;
        terms.total += slack * slack;
        terms.derivatives.first[p.preferred] -= 2.0 * slack;
        terms.derivatives.first[p.other] += 2.0 * slack;
        terms.derivatives.second[p.preferred] += 2.0;
        terms.derivatives.second[p.other] += 2.0;
    }
    return terms;
}

// ---------------------------------------------------------------------------

Objective::Objective(LossKind kind, const Dataset& data) : kind_(kind), data_(&data) {
    if (is_pairwise(kind)) {
        if (!data.has_pairs()) throw DataError("pairwise loss requires preference pairs");
        normalizer_ = static_cast<double>(data.pairs().size());
    } else {
        if (!data.has_targets()) throw DataError("loss " + std::string(loss_token(kind)) + " requires targets");
        if (is_margin_loss(kind) && !data.has_binary_labels())
            throw DataError("loss " + std::string(loss_token(kind)) + " requires +1/-1 labels");
        normalizer_ = static_cast<double>(data.size());
    }
    if (normalizer_ == 0.0) throw DataError("empty dataset");
}

double Objective::total(std::span<const double> outputs) const {
    if (is_pairwise(kind_)) {
        double sum = 0.0;
        for (const auto& p : data_->pairs()) {
            const double slack = 1.0 - (outputs[p.preferred] - outputs[p.other]);
            if (slack > 0.0) sum += slack * slack;
        }
        return sum / normalizer_;
    }
    const auto y = data_->targets();
    return dispatch(kind_, [&](auto k) {
        double sum = 0.0;
        for (std::size_t i = 0; i < y.size(); ++i) sum += value_of<decltype(k)::value>(outputs[i], y[i]);
        return sum / normalizer_;
    });
}

void Objective::derivatives(std::span<const double> outputs, DerivativeBuffers& buffers) const {
    if (is_pairwise(kind_)) {
        buffers = pairwise_loss_terms(data_->pairs(), outputs).derivatives;
        return;
    }
    const auto y = data_->targets();
    buffers.first.resize(y.size());
    buffers.second.resize(y.size());
    dispatch(kind_, [&](auto k) {
        for (std::size_t i = 0; i < y.size(); ++i) {
            const auto d = derivatives_of<decltype(k)::value>(outputs[i], y[i]);
            buffers.first[i] = d.first;
            buffers.second[i] = d.second;
        }
    });
}

void Objective::update(std::span<const double> outputs, std::span<const std::uint32_t> changed,
                       DerivativeBuffers& buffers) const {
    if (is_pairwise(kind_)) {
        // Pairs couple instances across leaves; a full pass is O(pairs).
        derivatives(outputs, buffers);
        return;
    }
    const auto y = data_->targets();
    dispatch(kind_, [&](auto k) {
        for (auto i : changed) {
            const auto d = derivatives_of<decltype(k)::value>(outputs[i], y[i]);
            buffers.first[i] = d.first;
            buffers.second[i] = d.second;
        }
    });
}

double Objective::shifted_change(std::span<const double> outputs,
                                 std::span<const std::span<const std::uint32_t>> groups,
                                 std::span<const double> shifts) const {
    if (is_pairwise(kind_)) {
        std::vector<double> moved(outputs.begin(), outputs.end());
        for (std::size_t g = 0; g < groups.size(); ++g)
            for (auto i : groups[g]) moved[i] += shifts[g];
        return total(moved) - total(outputs);
    }
    const auto y = data_->targets();
    return dispatch(kind_, [&](auto k) {
        constexpr LossKind K = decltype(k)::value;
        double change = 0.0;
        for (std::size_t g = 0; g < groups.size(); ++g) {
            const double shift = shifts[g];
            if (shift == 0.0) continue;
            for (auto i : groups[g]) change += value_of<K>(outputs[i] + shift, y[i]) - value_of<K>(outputs[i], y[i]);
        }
        return change / normalizer_;
    });
}

}  // namespace rgf
