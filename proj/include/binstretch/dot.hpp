#ifndef BINSTRETCH_DOT_HPP
#define BINSTRETCH_DOT_HPP

#include <charconv>
#include <set>
#include <sstream>
#include <string>
#include <string_view>

#include "binstretch/dag.hpp"

// DOT interchange normal form: plain 7-bit text, LF line endings, one
// statement per line. Graph attributes bs_m/bs_t/bs_g carry the parameters;
// each node line is
//     name [loads="a,b,c" next="e1,e2" packing="i,j;k;"];
// with packing optional; edges are unlabeled `a -> b;` lines after all node
// lines. Items per node are not stored: they are derived by traversal and
// cross-checked on every in-edge.

namespace binstretch {

class DotParseError : public std::runtime_error {
  public:
    DotParseError(int line, const std::string& msg)
        : std::runtime_error("line " + std::to_string(line) + ": " + msg),
          line_(line) {}
    int line() const { return line_; }

  private:
    int line_;
};

struct ParsedDot {
    GameParams params;
    StrategyDag dag;
};

inline std::string emit_dot(const StrategyDag& dag, const GameParams& params) {
    bool use_stored = !dag.nodes.empty();
    {
        std::set<std::string> seen;
        for (const auto& u : dag.nodes) {
            if (u.name.empty() || !seen.insert(u.name).second) {
                use_stored = false;
                break;
            }
        }
    }
    auto name_of = [&](int i) {
        return use_stored ? dag.nodes[i].name : "n" + std::to_string(i);
    };

    std::string out;
    out += "digraph binstretch {\n";
    out += "bs_m=" + std::to_string(params.bins) + ";\n";
    out += "bs_t=" + std::to_string(params.target) + ";\n";
    out += "bs_g=" + std::to_string(params.guarantee) + ";\n";
    for (size_t i = 0; i < dag.nodes.size(); ++i) {
        const DagNode& u = dag.nodes[i];
        out += name_of(static_cast<int>(i));
        out += " [loads=\"";
        for (size_t j = 0; j < u.loads.size(); ++j) {
            if (j)
                out += ',';
            out += std::to_string(u.loads[j]);
        }
        out += "\" next=\"";
        for (size_t j = 0; j < u.next_items.size(); ++j) {
            if (j)
                out += ',';
            out += std::to_string(u.next_items[j]);
        }
        out += '"';
        if (u.packing.has_value()) {
            out += " packing=\"";
            for (size_t b = 0; b < u.packing->bins.size(); ++b) {
                if (b)
                    out += ';';
                const auto& bin = u.packing->bins[b];
                for (size_t j = 0; j < bin.size(); ++j) {
                    if (j)
                        out += ',';
                    out += std::to_string(bin[j]);
                }
            }
            out += '"';
        }
        out += "];\n";
    }
    for (size_t i = 0; i < dag.nodes.size(); ++i)
        for (int c : dag.nodes[i].children)
            out += name_of(static_cast<int>(i)) + " -> " + name_of(c) + ";\n";
    out += "}\n";
    return out;
}

namespace detail {

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' ||
                          s.front() == '\r'))
        s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' ||
                          s.back() == '\r'))
        s.remove_suffix(1);
    return s;
}

inline bool is_ident_char(char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
           (c >= '0' && c <= '9') || c == '_';
}

inline int parse_int(std::string_view s, int line, const char* what) {
    s = trim(s);
    int value = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (ec != std::errc() || ptr != s.data() + s.size())
        throw DotParseError(line, std::string("malformed ") + what + " value '" +
                                      std::string(s) + "'");
    return value;
}

inline std::vector<std::string_view> split(std::string_view s, char sep) {
    std::vector<std::string_view> out;
    size_t start = 0;
    while (true) {
        size_t pos = s.find(sep, start);
        if (pos == std::string_view::npos) {
            out.push_back(s.substr(start));
            break;
        }
        out.push_back(s.substr(start, pos - start));
        start = pos + 1;
    }
    return out;
}

}  // namespace detail

inline ParsedDot parse_dot(std::string_view text) {
    using detail::parse_int;
    using detail::split;
    using detail::trim;

    struct PendingEdge {
        std::string from, to;
        int line;
    };

    std::optional<int> bs_m, bs_t, bs_g;
    StrategyDag dag;
    std::map<std::string, int> by_name;
    std::vector<int> def_line;
    std::vector<PendingEdge> edges;
    bool saw_header = false, saw_close = false;

    int line_no = 0;
    size_t cursor = 0;
    while (cursor <= text.size()) {
        size_t eol = text.find('\n', cursor);
        std::string_view raw = eol == std::string_view::npos
                                   ? text.substr(cursor)
                                   : text.substr(cursor, eol - cursor);
        cursor = eol == std::string_view::npos ? text.size() + 1 : eol + 1;
        ++line_no;
        std::string_view line = trim(raw);
        if (line.empty())
            continue;
        if (saw_close)
            throw DotParseError(line_no, "content after closing brace");
        if (!saw_header) {
            if (!line.starts_with("digraph") || !line.ends_with("{"))
                throw DotParseError(line_no, "expected 'digraph <name> {'");
            saw_header = true;
            continue;
        }
        if (line == "}") {
            saw_close = true;
            continue;
        }
        if (!line.ends_with(";"))
            throw DotParseError(line_no, "statement does not end with ';'");
        line.remove_suffix(1);
        line = trim(line);

        if (line.starts_with("bs_")) {
            size_t eq = line.find('=');
            if (eq == std::string_view::npos)
                throw DotParseError(line_no, "malformed graph attribute");
            std::string_view key = trim(line.substr(0, eq));
            int value = parse_int(line.substr(eq + 1), line_no, "parameter");
            if (key == "bs_m")
                bs_m = value;
            else if (key == "bs_t")
                bs_t = value;
            else if (key == "bs_g")
                bs_g = value;
            else
                throw DotParseError(line_no, "unknown graph attribute '" +
                                                 std::string(key) + "'");
            continue;
        }

        // edge or node statement; both start with an identifier
        size_t id_end = 0;
        while (id_end < line.size() && detail::is_ident_char(line[id_end]))
            ++id_end;
        if (id_end == 0)
            throw DotParseError(line_no, "expected identifier");
        std::string name(line.substr(0, id_end));
        std::string_view rest = trim(line.substr(id_end));

        if (rest.starts_with("->")) {
            std::string_view target = trim(rest.substr(2));
            for (char c : target)
                if (!detail::is_ident_char(c))
                    throw DotParseError(line_no, "malformed edge target");
            if (target.empty())
                throw DotParseError(line_no, "malformed edge target");
            edges.push_back({name, std::string(target), line_no});
            continue;
        }

        if (!rest.starts_with("[") || !rest.ends_with("]"))
            throw DotParseError(line_no, "expected node attribute list");
        if (!bs_m || !bs_t || !bs_g)
            throw DotParseError(line_no, "node appears before bs_m/bs_t/bs_g");
        if (by_name.count(name))
            throw DotParseError(line_no, "duplicate node '" + name + "'");
        std::string_view attrs = trim(rest.substr(1, rest.size() - 2));

        DagNode node;
        node.name = name;
        bool have_loads = false, have_next = false;
        while (!attrs.empty()) {
            size_t eq = attrs.find('=');
            if (eq == std::string_view::npos)
                throw DotParseError(line_no, "malformed attribute");
            std::string_view key = trim(attrs.substr(0, eq));
            std::string_view tail = trim(attrs.substr(eq + 1));
            if (tail.empty() || tail.front() != '"')
                throw DotParseError(line_no, "attribute value must be quoted");
            size_t close = tail.find('"', 1);
            if (close == std::string_view::npos)
                throw DotParseError(line_no, "unterminated attribute value");
            std::string_view value = tail.substr(1, close - 1);
            attrs = trim(tail.substr(close + 1));

            if (key == "loads") {
                for (auto part : split(value, ','))
                    node.loads.push_back(parse_int(part, line_no, "load"));
                have_loads = true;
            } else if (key == "next") {
                for (auto part : split(value, ','))
                    node.next_items.push_back(parse_int(part, line_no, "next item"));
                have_next = true;
            } else if (key == "packing") {
                PackingCertificate cert;
                for (auto seg : split(value, ';')) {
                    std::vector<int> bin;
                    seg = trim(seg);
                    if (!seg.empty())
                        for (auto part : split(seg, ','))
                            bin.push_back(parse_int(part, line_no, "packing item"));
                    cert.bins.push_back(std::move(bin));
                }
                node.packing = std::move(cert);
            } else {
                throw DotParseError(line_no, "unknown node attribute '" +
                                                 std::string(key) + "'");
            }
        }
        if (!have_loads || !have_next)
            throw DotParseError(line_no, "node needs loads and next attributes");
        if (static_cast<int>(node.loads.size()) != *bs_m)
            throw DotParseError(line_no, "loads list does not have bs_m entries");
        if (node.next_items.empty())
            throw DotParseError(line_no, "next list is empty");
        by_name.emplace(name, static_cast<int>(dag.nodes.size()));
        dag.nodes.push_back(std::move(node));
        def_line.push_back(line_no);
    }
    if (!saw_header)
        throw DotParseError(line_no, "missing digraph header");
    if (!saw_close)
        throw DotParseError(line_no, "missing closing brace");
    if (!bs_m || !bs_t || !bs_g)
        throw DotParseError(line_no, "missing bs_m/bs_t/bs_g parameters");

    GameParams params = [&] {
        try {
            return GameParams(*bs_m, *bs_t, *bs_g);
        } catch (const std::invalid_argument& e) {
            throw DotParseError(1, std::string("invalid parameters: ") + e.what());
        }
    }();

    std::vector<int> indegree(dag.nodes.size(), 0);
    for (const auto& e : edges) {
        auto from = by_name.find(e.from);
        auto to = by_name.find(e.to);
        if (from == by_name.end() || to == by_name.end())
            throw DotParseError(e.line, "edge references undefined node");
        dag.nodes[from->second].children.push_back(to->second);
        ++indegree[to->second];
    }

    int root = -1;
    for (size_t i = 0; i < dag.nodes.size(); ++i) {
        if (indegree[i] == 0) {
            if (root != -1)
                throw DotParseError(def_line[i], "multiple roots");
            root = static_cast<int>(i);
        }
    }
    if (root == -1)
        throw DotParseError(line_no, dag.nodes.empty() ? "no root: empty graph"
                                                       : "no root: cycle");
    dag.root = root;

    // acyclicity + item derivation in one topological sweep
    std::vector<int> pending = indegree;
    std::vector<int> queue{root};
    std::vector<bool> derived(dag.nodes.size(), false);
    derived[root] = true;  // root starts with no items
    size_t visited = 0;
    while (!queue.empty()) {
        int u = queue.back();
        queue.pop_back();
        ++visited;
        const DagNode& node = dag.nodes[u];
        if (node.compressed() && !node.children.empty())
            throw DotParseError(def_line[u],
                                "compressed node (multiple next items) has children");
        std::map<int, int> child_items = node.items;
        if (!node.next_items.empty())
            ++child_items[node.next_items.front()];
        for (int c : node.children) {
            if (derived[c]) {
                if (dag.nodes[c].items != child_items)
                    throw DotParseError(def_line[c],
                                        "inconsistent item derivation across in-edges");
            } else {
                dag.nodes[c].items = child_items;
                derived[c] = true;
            }
            if (--pending[c] == 0)
                queue.push_back(c);
        }
    }
    if (visited != dag.nodes.size())
        throw DotParseError(line_no, "graph contains a cycle");

    return ParsedDot{params, std::move(dag)};
}

}  // namespace binstretch

#endif  // BINSTRETCH_DOT_HPP
