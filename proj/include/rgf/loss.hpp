#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rgf/dataset.hpp"

namespace rgf {

enum class LossKind { square, logistic, exponential, l1l2_hybrid, pairwise_squared_hinge };

/// CLI token (LS, Log, Expo, L1L2, PairSqHinge) <-> kind.
LossKind parse_loss(std::string_view token);
std::string_view loss_token(LossKind kind);

/// Loss needs y in {+1, -1}.
constexpr bool is_margin_loss(LossKind kind) {
    return kind == LossKind::logistic || kind == LossKind::exponential;
}
constexpr bool is_pairwise(LossKind kind) { return kind == LossKind::pairwise_squared_hinge; }

struct LossDerivatives {
    double first = 0.0;
    double second = 0.0;
};

/// Per-instance loss for the decomposable kinds. Square loss is (h - y)^2 / 2.
double loss_value(LossKind kind, double output, double target);
LossDerivatives loss_derivatives(LossKind kind, double output, double target);

/// First and second derivatives of the total loss with respect to each
/// instance's output, plus the current outputs.
struct DerivativeBuffers {
    std::vector<double> first;
    std::vector<double> second;
};

struct PairwiseTerms {
    double total = 0.0;  // sum over pairs, not averaged
    DerivativeBuffers derivatives;
};

/// Sum over pairs of max(0, 1 - (h_i - h_j))^2 with per-instance derivative
/// accumulation, each pair treated independently. A pair sitting exactly on
/// the margin contributes nothing.
PairwiseTerms pairwise_loss_terms(std::span<const PreferencePair> pairs, std::span<const double> outputs);

/// A loss bound to a dataset: averaged total, derivative buffers, and exact
/// changes under shifts of a subset of outputs.
///
/// The total is sum / normalizer(), where the normalizer is the instance count
/// for decomposable losses and the pair count for the pairwise loss.
class Objective {
public:
    Objective(LossKind kind, const Dataset& data);

    LossKind kind() const noexcept { return kind_; }
    const Dataset& data() const noexcept { return *data_; }
    double normalizer() const noexcept { return normalizer_; }

    /// Averaged loss at `outputs`.
    double total(std::span<const double> outputs) const;

    /// Fill buffers (unnormalized per-instance derivatives of the summed loss).
    void derivatives(std::span<const double> outputs, DerivativeBuffers& buffers) const;

    /// Refresh buffers after the outputs of `changed` moved.
    void update(std::span<const double> outputs, std::span<const std::uint32_t> changed,
                DerivativeBuffers& buffers) const;

    /// Exact change of the averaged loss if every instance in group k had its
    /// output shifted by shifts[k]. Groups must be disjoint.
    double shifted_change(std::span<const double> outputs,
                          std::span<const std::span<const std::uint32_t>> groups,
                          std::span<const double> shifts) const;

private:
    LossKind kind_;
    const Dataset* data_;
    double normalizer_;
};

}  // namespace rgf
