#include "rgf/regularizer.hpp"

#include <cmath>
#include <string>

#include "rgf/error.hpp"

namespace rgf {

RegKind parse_reg(std::string_view token) {
    if (token == "L2") return RegKind::leaf_l2;
    if (token == "MinPen") return RegKind::min_penalty;
    if (token == "MinPenSib") return RegKind::min_penalty_sib;
    throw ConfigError("unknown regularizer '" + std::string(token) + "' (expected L2|MinPen|MinPenSib)");
}

std::string_view reg_token(RegKind kind) {
    switch (kind) {
        case RegKind::leaf_l2: return "L2";
        case RegKind::min_penalty: return "MinPen";
        case RegKind::min_penalty_sib: return "MinPenSib";
    }
    return "?";
}

void RegConfig::validate() const {
    if (!(lambda >= 0.0)) throw ConfigError("lambda must be >= 0");
    if (!(gamma >= 1.0)) throw ConfigError("gamma must be >= 1");
    if (!(tol > 0.0)) throw ConfigError("fixed-point tolerance must be > 0");
    if (max_iter < 1) throw ConfigError("fixed-point max iterations must be >= 1");
}

namespace {

std::vector<double> leaf_weights_of(const Tree& tree) {
    std::vector<double> w(tree.size(), 0.0);
    for (std::size_t i = 0; i < tree.size(); ++i) w[i] = tree.node(static_cast<NodeId>(i)).weight;
    return w;
}

std::size_t idx(NodeId id) { return static_cast<std::size_t>(id); }

}  // namespace

FixedPointResult solve_min_penalty_fixed_point(const Tree& tree, std::span<const double> leaf_weights,
                                               double gamma, double tol, int max_iter) {
    FixedPointResult result;
    result.aux.assign(tree.size(), 0.0);
    std::vector<NodeId> internal;
    for (std::size_t i = 0; i < tree.size(); ++i) {
        const Node& n = tree.node(static_cast<NodeId>(i));
        if (n.is_leaf()) {
            result.aux[i] = leaf_weights[i];
        } else {
            internal.push_back(static_cast<NodeId>(i));
        }
    }
    if (internal.empty()) {
        result.converged = true;
        return result;
    }
    const double denom = 1.0 + 2.0 * gamma;
    auto& aux = result.aux;
    for (int it = 1; it <= max_iter; ++it) {
        double change = 0.0;
        for (NodeId v : internal) {
            const Node& n = tree.node(v);
            double s = gamma * (aux[idx(n.left)] + aux[idx(n.right)]);
            if (n.parent != kNoNode) s += aux[idx(n.parent)];
            const double updated = s / denom;
            change = std::max(change, std::abs(updated - aux[idx(v)]));
            aux[idx(v)] = updated;
        }
        result.iterations = it;
        if (change <= tol) {
            result.converged = true;
            break;
        }
    }
    return result;
}

std::vector<double> representation_from_aux(const Tree& tree, std::span<const double> aux) {
    std::vector<double> rho(tree.size());
    for (std::size_t i = 0; i < tree.size(); ++i) {
        const NodeId p = tree.node(static_cast<NodeId>(i)).parent;
        rho[i] = p == kNoNode ? aux[i] : aux[i] - aux[idx(p)];
    }
    return rho;
}

SiblingRepresentation sibling_representation(const Tree& tree, std::span<const double> leaf_weights) {
    SiblingRepresentation rep;
    rep.aux.assign(tree.size(), 0.0);
    // Children have larger ids than parents, so a reverse sweep is bottom-up.
    for (std::size_t i = tree.size(); i-- > 0;) {
        const Node& n = tree.node(static_cast<NodeId>(i));
        rep.aux[i] = n.is_leaf() ? leaf_weights[i] : 0.5 * (rep.aux[idx(n.left)] + rep.aux[idx(n.right)]);
    }
    rep.rho = representation_from_aux(tree, rep.aux);
    // aux_c - mean equals +-(a_left - a_right) / 2; the symmetric form makes
    // each sibling pair cancel exactly in floating point.
    for (const auto& n : tree.nodes()) {
        if (n.is_leaf()) continue;
        const double half = 0.5 * (rep.aux[idx(n.left)] - rep.aux[idx(n.right)]);
        rep.rho[idx(n.left)] = half;
        rep.rho[idx(n.right)] = -half;
    }
    return rep;
}

double weighted_square_norm(const Tree& tree, std::span<const double> rho, double gamma) {
    double sum = 0.0;
    for (std::size_t i = 0; i < tree.size(); ++i)
        sum += std::pow(gamma, tree.node(static_cast<NodeId>(i)).depth) * rho[i] * rho[i];
    return 0.5 * sum;
}

PenaltyValue penalty(const Tree& tree, const RegConfig& config) {
    PenaltyValue out;
    switch (config.kind) {
        case RegKind::leaf_l2: {
            double sum = 0.0;
            for (const auto& n : tree.nodes())
                if (n.is_leaf()) sum += n.weight * n.weight;
            out.value = config.lambda * 0.5 * sum;
            break;
        }
        case RegKind::min_penalty: {
            const auto fp = solve_min_penalty_fixed_point(tree, leaf_weights_of(tree), config.gamma, config.tol,
                                                          config.max_iter);
            out.value = config.lambda * weighted_square_norm(tree, representation_from_aux(tree, fp.aux), config.gamma);
            out.converged = fp.converged;
            out.iterations = fp.iterations;
            break;
        }
        case RegKind::min_penalty_sib: {
            const auto rep = sibling_representation(tree, leaf_weights_of(tree));
            out.value = config.lambda * weighted_square_norm(tree, rep.rho, config.gamma);
            break;
        }
    }
    return out;
}

PenaltyValue penalty(const Forest& forest, const RegConfig& config) {
    PenaltyValue total;
    for (const auto& tree : forest.trees()) {
        const auto p = penalty(tree, config);
        total.value += p.value;
        total.converged = total.converged && p.converged;
        total.iterations = std::max(total.iterations, p.iterations);
    }
    return total;
}

// ---------------------------------------------------------------------------

PenaltyDerivatives SplitPenaltyModel::child_derivatives() const {
    const double a = 1.0 - coupling;
    return {shared_linear + child_scale * child_rho * (a - coupling),
            shared_square + child_scale * (a * a + coupling * coupling)};
}

// ---------------------------------------------------------------------------

void TreeRegularizer::check(const Tree& tree) const {
    if (tree.topology_version() != version_ || tree.size() != node_count_)
        throw StaleStateError("regularizer state is stale: tree topology changed since the last rebuild");
}

void TreeRegularizer::refresh_value(const Tree& tree) {
    if (config_.kind == RegKind::leaf_l2) {
        double sum = 0.0;
        for (std::size_t i = 0; i < tree.size(); ++i) {
            const Node& n = tree.node(static_cast<NodeId>(i));
            rho_[i] = n.is_leaf() ? n.weight : 0.0;
            aux_[i] = rho_[i];
            sum += rho_[i] * rho_[i];
        }
        value_ = 0.5 * sum;
        return;
    }
    rho_ = representation_from_aux(tree, aux_);
    value_ = weighted_square_norm(tree, rho_, config_.gamma);
}

void TreeRegularizer::rebuild(const Tree& tree, const RegConfig& config) {
    config_ = config;
    version_ = tree.topology_version();
    node_count_ = tree.size();
    aux_.assign(tree.size(), 0.0);
    rho_.assign(tree.size(), 0.0);
    sensitivity_.clear();
    converged_ = true;
    switch (config.kind) {
        case RegKind::leaf_l2: break;
        case RegKind::min_penalty: {
            sensitivity_.resize(tree.size());
            std::vector<double> unit(tree.size(), 0.0);
            for (NodeId u : tree.leaves()) {
                unit[idx(u)] = 1.0;
                auto fp = solve_min_penalty_fixed_point(tree, unit, config.gamma, config.tol, config.max_iter);
                unit[idx(u)] = 0.0;
                converged_ = converged_ && fp.converged;
                const double w = tree.node(u).weight;
                for (std::size_t i = 0; i < tree.size(); ++i) aux_[i] += w * fp.aux[i];
                sensitivity_[idx(u)] = std::move(fp.aux);
            }
            break;
        }
        case RegKind::min_penalty_sib:
            aux_ = sibling_representation(tree, leaf_weights_of(tree)).aux;
            break;
    }
    refresh_value(tree);
}

std::vector<double> TreeRegularizer::aux_sensitivity(const Tree& tree, NodeId leaf) const {
    check(tree);
    switch (config_.kind) {
        case RegKind::min_penalty: return sensitivity_[idx(leaf)];
        case RegKind::leaf_l2: {
            std::vector<double> s(tree.size(), 0.0);
            s[idx(leaf)] = 1.0;
            return s;
        }
        case RegKind::min_penalty_sib: {
            std::vector<double> s(tree.size(), 0.0);
            const int du = tree.node(leaf).depth;
            for (NodeId w = leaf; w != kNoNode; w = tree.node(w).parent)
                s[idx(w)] = std::ldexp(1.0, tree.node(w).depth - du);
            return s;
        }
    }
    return {};
}

void TreeRegularizer::on_weight_change(const Tree& tree, NodeId leaf, double delta) {
    check(tree);
    switch (config_.kind) {
        case RegKind::leaf_l2: break;
        case RegKind::min_penalty: {
            const auto& s = sensitivity_[idx(leaf)];
            for (std::size_t i = 0; i < aux_.size(); ++i) aux_[i] += delta * s[i];
            aux_[idx(leaf)] = tree.node(leaf).weight;
            break;
        }
        case RegKind::min_penalty_sib: {
            const int du = tree.node(leaf).depth;
            for (NodeId w = tree.node(leaf).parent; w != kNoNode; w = tree.node(w).parent)
                aux_[idx(w)] += delta * std::ldexp(1.0, tree.node(w).depth - du);
            aux_[idx(leaf)] = tree.node(leaf).weight;
            break;
        }
    }
    refresh_value(tree);
}

PenaltyDerivatives TreeRegularizer::derivatives(const Tree& tree, NodeId leaf) const {
    check(tree);
    if (config_.kind == RegKind::leaf_l2) return {tree.node(leaf).weight, 1.0};
    const auto s = aux_sensitivity(tree, leaf);
    PenaltyDerivatives d;
    for (std::size_t i = 0; i < tree.size(); ++i) {
        const Node& n = tree.node(static_cast<NodeId>(i));
        const double drho = n.parent == kNoNode ? s[i] : s[i] - s[idx(n.parent)];
        if (drho == 0.0) continue;
        const double scale = std::pow(config_.gamma, n.depth);
        d.first += scale * rho_[i] * drho;
        d.second += scale * drho * drho;
    }
    return d;
}

SplitPenaltyModel TreeRegularizer::split_model(const Tree& tree, NodeId leaf) const {
    check(tree);
    const double alpha = tree.node(leaf).weight;
    SplitPenaltyModel model;
    if (config_.kind == RegKind::leaf_l2) {
        model.base = 0.5 * alpha * alpha;
        model.child_rho = alpha;
        return model;
    }

    Tree split_tree = tree;
    const auto [u1, u2] = split_tree.split(leaf, 0, 0.0, alpha, alpha);
    const std::size_t n = split_tree.size();
    std::vector<double> aux;
    std::vector<double> sens;
    if (config_.kind == RegKind::min_penalty) {
        aux = solve_min_penalty_fixed_point(split_tree, leaf_weights_of(split_tree), config_.gamma, config_.tol,
                                            config_.max_iter)
                  .aux;
        std::vector<double> unit(n, 0.0);
        unit[idx(u1)] = 1.0;
        sens = solve_min_penalty_fixed_point(split_tree, unit, config_.gamma, config_.tol, config_.max_iter).aux;
    } else {
        // Splitting into two equal children leaves every mean unchanged.
        aux = aux_;
        aux.push_back(alpha);
        aux.push_back(alpha);
        sens.assign(n, 0.0);
        const int du = split_tree.node(u1).depth;
        for (NodeId w = u1; w != kNoNode; w = split_tree.node(w).parent)
            sens[idx(w)] = std::ldexp(1.0, split_tree.node(w).depth - du);
    }
    const auto rho = representation_from_aux(split_tree, aux);
    model.base = config_.kind == RegKind::min_penalty_sib
                     ? 0.0
                     : weighted_square_norm(split_tree, rho, config_.gamma) - value_;
    for (std::size_t i = 0; i < n; ++i) {
        if (i == idx(u1) || i == idx(u2)) continue;
        const Node& node = split_tree.node(static_cast<NodeId>(i));
        const double drho = node.parent == kNoNode ? sens[i] : sens[i] - sens[idx(node.parent)];
        if (drho == 0.0) continue;
        const double scale = std::pow(config_.gamma, node.depth);
        model.shared_linear += scale * rho[i] * drho;
        model.shared_square += scale * drho * drho;
    }
    model.child_scale = std::pow(config_.gamma, split_tree.node(u1).depth);
    model.child_rho = rho[idx(u1)];
    model.coupling = sens[idx(leaf)];
    return model;
}

PenaltyDerivatives penalty_derivatives(const Tree& tree, const TreeRegularizer& state, const RegConfig& config,
                                       NodeId leaf) {
    const auto d = state.derivatives(tree, leaf);
    return {config.lambda * d.first, config.lambda * d.second};
}

double split_penalty_delta(const Tree& tree, const TreeRegularizer& state, const RegConfig& config, NodeId leaf,
                           double d1, double d2) {
    return config.lambda * state.split_model(tree, leaf).delta(d1, d2);
}

}  // namespace rgf
