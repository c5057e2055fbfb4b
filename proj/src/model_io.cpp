#include <string>
#include <vector>

#include "rgf/dataset.hpp"
#include "rgf/error.hpp"
#include "rgf/forest.hpp"
#include "text_util.hpp"

namespace rgf {

namespace {

constexpr std::string_view kHeader = "RGF-MODEL v1";

void write_preorder(const Tree& tree, NodeId id, std::string& out) {
    const Node& n = tree.node(id);
    out += "N ";
    out += std::to_string(id);
    out += ' ';
    out += n.parent == kNoNode ? std::string("-") : std::to_string(n.parent);
    if (n.is_leaf()) {
        out += " LEAF ";
        out += format_double(n.weight);
        out += '\n';
        return;
    }
    out += ' ';
    out += std::to_string(n.feature);
    out += ' ';
    out += format_double(n.threshold);
    out += '\n';
    write_preorder(tree, n.left, out);
    write_preorder(tree, n.right, out);
}

[[noreturn]] void fail(std::size_t line, const std::string& what) {
    throw ModelFormatError("model line " + std::to_string(line) + ": " + what);
}

}  // namespace

std::string serialize(const Forest& forest) {
    std::string out(kHeader);
    out += "\ntrees ";
    out += std::to_string(forest.tree_count());
    out += '\n';
    for (const auto& tree : forest.trees()) {
        out += "tree ";
        out += std::to_string(tree.size());
        out += '\n';
        write_preorder(tree, Tree::root(), out);
    }
    return out;
}

Forest deserialize(std::string_view text) {
    detail::LineReader reader(text);
    std::string_view line;

    auto next_tokens = [&](std::string_view what) {
        if (!reader.next(line)) throw ModelFormatError("truncated model: expected " + std::string(what));
        return detail::split_ws(line);
    };

    if (!reader.next(line)) throw ModelFormatError("empty model stream");
    if (detail::trim(line) != kHeader) {
        if (detail::trim(line).starts_with("RGF-MODEL"))
            throw ModelFormatError("unsupported model version: '" + std::string(detail::trim(line)) + "'");
        throw ModelFormatError("not an RGF model (missing header)");
    }

    auto count_line = next_tokens("tree count");
    std::optional<std::size_t> tree_count;
    if (count_line.size() == 2 && count_line[0] == "trees") tree_count = detail::parse_int<std::size_t>(count_line[1]);
    if (!tree_count) fail(reader.line_number(), "expected 'trees <K>'");

    Forest forest;
    for (std::size_t k = 0; k < *tree_count; ++k) {
        auto head = next_tokens("tree header");
        std::optional<std::size_t> node_count;
        if (head.size() == 2 && head[0] == "tree") node_count = detail::parse_int<std::size_t>(head[1]);
        if (!node_count || *node_count == 0 || *node_count % 2 == 0)
            fail(reader.line_number(), "expected 'tree <odd node count>'");

        std::vector<Node> nodes(*node_count);
        std::vector<bool> seen(*node_count, false);
        for (std::size_t m = 0; m < *node_count; ++m) {
            auto tok = next_tokens("node line");
            if (tok.size() != 5 || tok[0] != "N") fail(reader.line_number(), "expected 'N <id> <parent> <feat|LEAF> <value>'");
            const auto id = detail::parse_int<int>(tok[1]);
            if (!id || *id < 0 || static_cast<std::size_t>(*id) >= *node_count || seen[static_cast<std::size_t>(*id)])
                fail(reader.line_number(), "bad or duplicate node id");
            seen[static_cast<std::size_t>(*id)] = true;
            Node& n = nodes[static_cast<std::size_t>(*id)];

            if (tok[2] == "-") {
                if (*id != 0) fail(reader.line_number(), "only node 0 may be the root");
            } else {
                const auto parent = detail::parse_int<int>(tok[2]);
                if (!parent || *parent < 0 || *parent >= *id) fail(reader.line_number(), "bad parent id");
                Node& p = nodes[static_cast<std::size_t>(*parent)];
                if (!seen[static_cast<std::size_t>(*parent)] || p.feature < 0)
                    fail(reader.line_number(), "parent must be an internal node listed earlier");
                if (p.left == kNoNode) {
                    p.left = *id;
                } else if (p.right == kNoNode) {
                    p.right = *id;
                } else {
                    fail(reader.line_number(), "parent already has two children");
                }
                n.parent = *parent;
                n.depth = p.depth + 1;
            }

            const auto value = detail::parse_double(tok[4]);
            if (!value) fail(reader.line_number(), "bad number '" + std::string(tok[4]) + "'");
            if (tok[3] == "LEAF") {
                n.weight = *value;
            } else {
                const auto feature = detail::parse_int<int>(tok[3]);
                if (!feature || *feature < 0) fail(reader.line_number(), "bad feature index");
                n.feature = *feature;
                n.threshold = *value;
            }
        }
        for (const auto& n : nodes)
            if (n.feature >= 0 && n.right == kNoNode) throw ModelFormatError("truncated model: internal node missing children");
        forest.add_tree(Tree::from_nodes(std::move(nodes)));
    }
    while (reader.next(line))
        if (!detail::trim(line).empty()) fail(reader.line_number(), "trailing content after last tree");
    return forest;
}

void save_model(const Forest& forest, const std::string& path) { detail::write_file(path, serialize(forest)); }

Forest load_model(const std::string& path) { return deserialize(detail::read_file(path)); }

}  // namespace rgf
