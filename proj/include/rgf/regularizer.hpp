#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "rgf/forest.hpp"

namespace rgf {

/// Tree-structured regularizers.
///
///   leaf_l2          lambda * sum_{leaves} w^2 / 2
///   min_penalty      lambda * min over equivalent all-node models of
///                    sum_v gamma^{depth(v)} beta_v^2 / 2
///   min_penalty_sib  as min_penalty, restricted to models whose sibling
///                    weights sum to zero
///
/// Both min-penalty kinds are computed through auxiliary node values
/// aux_v = sum of beta over the root-to-v path (aux_leaf = w_leaf), and the
/// unique-representation coefficients rho_v = aux_v - aux_parent(v)
/// (rho_root = aux_root). Everything here is linear in the leaf weights.
enum class RegKind { leaf_l2, min_penalty, min_penalty_sib };

RegKind parse_reg(std::string_view token);  // L2 | MinPen | MinPenSib
std::string_view reg_token(RegKind kind);

struct RegConfig {
    RegKind kind = RegKind::leaf_l2;
    double lambda = 0.1;
    double gamma = 1.0;  // depth factor, >= 1; unused by leaf_l2
    double tol = 1e-8;   // fixed-point residual, max norm
    int max_iter = 1000;

    /// Throws ConfigError unless lambda >= 0 and gamma >= 1.
    void validate() const;
};

struct FixedPointResult {
    std::vector<double> aux;  // by node id
    int iterations = 0;
    bool converged = false;
};

/// In-place (Gauss-Seidel) sweep for the min-penalty auxiliary values. Leaves
/// are pinned to leaf_weights[leaf]; internal nodes, visited in id order,
/// become (aux_parent + gamma * sum aux_children) / (1 + 2 gamma), with the
/// parent term dropped at the root. Stops once a sweep moves no value by more
/// than `tol`.
FixedPointResult solve_min_penalty_fixed_point(const Tree& tree, std::span<const double> leaf_weights,
                                               double gamma, double tol, int max_iter);

struct SiblingRepresentation {
    std::vector<double> aux;  // leaf weight at leaves, mean of children elsewhere
    std::vector<double> rho;  // aux_v - aux_parent(v); aux_root at the root
};

SiblingRepresentation sibling_representation(const Tree& tree, std::span<const double> leaf_weights);

/// rho from aux.
std::vector<double> representation_from_aux(const Tree& tree, std::span<const double> aux);

/// sum_v gamma^{depth(v)} rho_v^2 / 2.
double weighted_square_norm(const Tree& tree, std::span<const double> rho, double gamma);

struct PenaltyValue {
    double value = 0.0;
    bool converged = true;  // false when the min-penalty sweep hit max_iter
    int iterations = 0;
};

/// Penalty of one leaf-only tree (leaf weights read from the tree).
PenaltyValue penalty(const Tree& tree, const RegConfig& config);
/// Sum over trees.
PenaltyValue penalty(const Forest& forest, const RegConfig& config);

struct PenaltyDerivatives {
    double first = 0.0;
    double second = 0.0;
};

/// Closed form from a unit split: the data needed to score any (delta1,
/// delta2) for one candidate leaf split in O(1). All values are unscaled by
/// lambda.
///
/// With children u1, u2 of the split leaf v and c = d aux_v / d w_u1 on the
/// split tree, derivatives of rho with respect to the new leaf weights are
///   rho'_{w,1} = rho'_{w,2} for w outside {u1, u2} (symmetry),
///   rho'_{u1,1} = rho'_{u2,2} = 1 - c,  rho'_{u1,2} = rho'_{u2,1} = -c.
struct SplitPenaltyModel {
    double base = 0.0;           // R(split tree at zero increments) - R(tree)
    double shared_linear = 0.0;  // sum_{w != u1,u2} gamma^d rho_w rho'_{w,1}
    double shared_square = 0.0;  // sum_{w != u1,u2} gamma^d rho'_{w,1}^2
    double child_scale = 1.0;    // gamma^{depth(u1)}
    double child_rho = 0.0;      // rho_{u1} = rho_{u2} at zero increments
    double coupling = 0.0;       // c

    /// R(split(delta1, delta2)) - R(tree).
    double delta(double d1, double d2) const {
        const double sum = d1 + d2;
        const double move1 = d1 * (1.0 - coupling) - d2 * coupling;
        const double move2 = d2 * (1.0 - coupling) - d1 * coupling;
        const double children =
            child_scale * (child_rho * (move1 + move2) + 0.5 * (move1 * move1 + move2 * move2));
        return base + sum * shared_linear + 0.5 * sum * sum * shared_square + children;
    }
    /// d/d delta_k and d^2/d delta_k^2 at zero (identical for k = 1, 2).
    PenaltyDerivatives child_derivatives() const;
};

/// Per-tree regularizer cache.
///
/// Holds aux and rho for the current leaf weights, the unscaled penalty and,
/// for min_penalty, the topology-only coefficients c[u][w] = d aux_w / d w_u
/// for every leaf u. Weight changes update aux in place via those
/// coefficients; splits require rebuild().
class TreeRegularizer {
public:
    TreeRegularizer() = default;
    TreeRegularizer(const Tree& tree, const RegConfig& config) { rebuild(tree, config); }

    void rebuild(const Tree& tree, const RegConfig& config);

    /// Apply w_leaf += delta (the tree must already hold the new weight).
    void on_weight_change(const Tree& tree, NodeId leaf, double delta);

    /// Penalty divided by lambda.
    double value() const noexcept { return value_; }
    std::span<const double> aux() const noexcept { return aux_; }
    std::span<const double> rho() const noexcept { return rho_; }
    bool converged() const noexcept { return converged_; }
    std::uint64_t topology_version() const noexcept { return version_; }

    /// d aux_w / d w_leaf over all nodes w.
    std::vector<double> aux_sensitivity(const Tree& tree, NodeId leaf) const;

    /// Unscaled first and second derivative of the penalty with respect to an
    /// additive change of w_leaf. Throws StaleStateError after an unseen split.
    PenaltyDerivatives derivatives(const Tree& tree, NodeId leaf) const;

    /// O(tree) preparation for scoring splits of `leaf`.
    SplitPenaltyModel split_model(const Tree& tree, NodeId leaf) const;

private:
    void check(const Tree& tree) const;
    void refresh_value(const Tree& tree);

    RegConfig config_;
    std::uint64_t version_ = 0;
    std::size_t node_count_ = 0;
    std::vector<double> aux_;
    std::vector<double> rho_;
    std::vector<std::vector<double>> sensitivity_;  // min_penalty: by leaf id, else empty
    double value_ = 0.0;
    bool converged_ = true;
};

/// lambda-scaled derivative of the penalty w.r.t. leaf u's weight.
PenaltyDerivatives penalty_derivatives(const Tree& tree, const TreeRegularizer& state, const RegConfig& config,
                                       NodeId leaf);

/// lambda-scaled R(T~(d1, d2)) - R(T) for splitting `leaf` into two children
/// whose weights are leaf weight + d1 and + d2.
double split_penalty_delta(const Tree& tree, const TreeRegularizer& state, const RegConfig& config, NodeId leaf,
                           double d1, double d2);

}  // namespace rgf
