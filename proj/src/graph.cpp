#include "gfl/graph.hpp"

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

namespace gfl {

namespace {

std::uint64_t edge_key(Index a, Index b) {
    if (a > b) std::swap(a, b);
    return (static_cast<std::uint64_t>(a) << 32) | static_cast<std::uint64_t>(b);
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

// Splits a data line on commas and whitespace.
std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && (line[i] == ',' || line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
        std::size_t j = i;
        while (j < line.size() && !(line[j] == ',' || line[j] == ' ' || line[j] == '\t' || line[j] == '\r')) ++j;
        if (j > i) out.push_back(line.substr(i, j - i));
        i = j;
    }
    return out;
}

std::uint64_t parse_id(std::string_view field, std::size_t line_no) {
    std::uint64_t v = 0;
    auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
    if (ec != std::errc() || ptr != field.data() + field.size())
        throw ParseError("expected a non-negative integer vertex id, got '" + std::string(field) + "'", line_no);
    return v;
}

template <typename F>
void for_each_data_line(const std::string& text, F&& f) {
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        std::size_t end = text.find('\n', pos);
        if (end == std::string::npos) end = text.size();
        ++line_no;
        std::string_view line = trim(std::string_view(text).substr(pos, end - pos));
        if (!line.empty() && line.front() != '#') f(line, line_no);
        pos = end + 1;
    }
}

}  // namespace

Graph::Graph(Index num_vertices, std::vector<Edge> edges)
    : n_(num_vertices), edges_(std::move(edges)), adjacency_(num_vertices) {
    std::unordered_set<std::uint64_t> seen;
    seen.reserve(edges_.size() * 2);
    for (Index e = 0; e < edges_.size(); ++e) {
        const auto [s, t] = edges_[e];
        if (s >= n_ || t >= n_)
            throw GraphError("edge " + std::to_string(e) + " has an endpoint outside 0.." + std::to_string(n_ - 1));
        if (s == t) throw GraphError("edge " + std::to_string(e) + " is a self-loop on vertex " + std::to_string(s));
        if (!seen.insert(edge_key(s, t)).second)
            throw GraphError("duplicate edge (" + std::to_string(s) + "," + std::to_string(t) + ")");
        adjacency_[s].push_back(e);
        adjacency_[t].push_back(e);
    }
}

std::vector<bool> EdgePartition::matched_vertices(const Graph& g) const {
    std::vector<bool> used(g.num_vertices(), false);
    for (Index e : e0) used[g.edge(e).s] = used[g.edge(e).t] = true;
    return used;
}

namespace {

std::vector<Index> e1_degrees(const Graph& g, const std::vector<Index>& e1) {
    std::vector<Index> d(g.num_vertices(), 0);
    for (Index e : e1) {
        ++d[g.edge(e).s];
        ++d[g.edge(e).t];
    }
    return d;
}

}  // namespace

EdgePartition greedy_matching(const Graph& g) {
    EdgePartition part;
    std::vector<bool> used(g.num_vertices(), false);
    for (Index e = 0; e < g.num_edges(); ++e) {
        const auto [s, t] = g.edge(e);
        if (!used[s] && !used[t]) {
            used[s] = used[t] = true;
            part.e0.push_back(e);
        } else {
            part.e1.push_back(e);
        }
    }
    part.d = e1_degrees(g, part.e1);
    return part;
}

EdgePartition empty_partition(const Graph& g) {
    EdgePartition part;
    part.e1.resize(g.num_edges());
    for (Index e = 0; e < g.num_edges(); ++e) part.e1[e] = e;
    part.d = e1_degrees(g, part.e1);
    return part;
}

EdgePartition partition_from_matching(const Graph& g, std::vector<Index> e0, bool user_supplied) {
    std::vector<bool> in_e0(g.num_edges(), false);
    std::vector<bool> used(g.num_vertices(), false);
    for (Index e : e0) {
        if (e >= g.num_edges()) throw GraphError("matching edge index " + std::to_string(e) + " out of range");
        if (in_e0[e]) throw GraphError("matching edge index " + std::to_string(e) + " listed twice");
        in_e0[e] = true;
        const auto [s, t] = g.edge(e);
        if (used[s] || used[t])
            throw GraphError("edge " + std::to_string(e) + " shares a vertex with another matching edge");
        used[s] = used[t] = true;
    }
    EdgePartition part;
    part.e0 = std::move(e0);
    for (Index e = 0; e < g.num_edges(); ++e)
        if (!in_e0[e]) part.e1.push_back(e);
    part.d = e1_degrees(g, part.e1);
    part.user_supplied = user_supplied;
    return part;
}

void validate_partition(const Graph& g, const EdgePartition& part) {
    std::vector<int> owner(g.num_edges(), -1);
    for (Index e : part.e0) {
        if (e >= g.num_edges() || owner[e] != -1) throw GraphError("invalid or repeated e0 edge index");
        owner[e] = 0;
    }
    for (Index e : part.e1) {
        if (e >= g.num_edges() || owner[e] != -1) throw GraphError("invalid or repeated e1 edge index");
        owner[e] = 1;
    }
    if (std::find(owner.begin(), owner.end(), -1) != owner.end())
        throw GraphError("partition does not cover every edge");
    std::vector<bool> used(g.num_vertices(), false);
    for (Index e : part.e0) {
        const auto [s, t] = g.edge(e);
        if (used[s] || used[t]) throw GraphError("e0 is not a matching");
        used[s] = used[t] = true;
    }
    if (part.d != e1_degrees(g, part.e1)) throw GraphError("partition degrees do not match e1");
}

bool is_maximal(const Graph& g, const EdgePartition& part) {
    const auto used = part.matched_vertices(g);
    return std::all_of(part.e1.begin(), part.e1.end(),
                       [&](Index e) { return used[g.edge(e).s] || used[g.edge(e).t]; });
}

Graph chain_graph(Index n) {
    std::vector<Edge> edges;
    if (n > 1) edges.reserve(n - 1);
    for (Index i = 0; i + 1 < n; ++i) edges.push_back({i, i + 1});
    return Graph(n, std::move(edges));
}

Graph grid_graph(Index rows, Index cols) {
    if (rows == 0 || cols == 0) throw GraphError("grid dimensions must be at least 1");
    std::vector<Edge> edges;
    edges.reserve(rows * (cols - 1) + (rows - 1) * cols);
    for (Index r = 0; r < rows; ++r)
        for (Index c = 0; c + 1 < cols; ++c) edges.push_back({r * cols + c, r * cols + c + 1});
    for (Index r = 0; r + 1 < rows; ++r)
        for (Index c = 0; c < cols; ++c) edges.push_back({r * cols + c, (r + 1) * cols + c});
    return Graph(rows * cols, std::move(edges));
}

std::pair<Graph, EdgePartition> grid_partition(Index rows, Index cols) {
    Graph g = grid_graph(rows, cols);
    std::vector<Index> e0;
    const Index per_row = cols - 1;
    for (Index r = 0; r < rows; ++r)
        for (Index c = 0; c + 1 < cols; c += 2) e0.push_back(r * per_row + c);
    // odd width leaves the last column free; pair it vertically
    if (cols % 2 == 1)
        for (Index r = 0; r + 1 < rows; r += 2) e0.push_back(rows * per_row + r * cols + cols - 1);
    EdgePartition part = partition_from_matching(g, std::move(e0), false);
    return {std::move(g), std::move(part)};
}

Graph parse_edge_list(const std::string& text) {
    struct RawEdge {
        std::uint64_t s, t;
        std::size_t line;
    };
    std::vector<RawEdge> raw;
    for_each_data_line(text, [&](std::string_view line, std::size_t line_no) {
        auto fields = split_fields(line);
        if (fields.size() != 2)
            throw ParseError("expected two vertex ids, found " + std::to_string(fields.size()) + " fields", line_no);
        const std::uint64_t s = parse_id(fields[0], line_no);
        const std::uint64_t t = parse_id(fields[1], line_no);
        if (s == t) throw ParseError("self-loop on vertex " + std::to_string(s), line_no);
        raw.push_back({s, t, line_no});
    });

    std::vector<std::uint64_t> ids;
    ids.reserve(raw.size() * 2);
    for (const auto& r : raw) {
        ids.push_back(r.s);
        ids.push_back(r.t);
    }
    std::sort(ids.begin(), ids.end());
    ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
    std::unordered_map<std::uint64_t, Index> compact;
    compact.reserve(ids.size());
    for (Index i = 0; i < ids.size(); ++i) compact[ids[i]] = i;

    std::vector<Edge> edges;
    edges.reserve(raw.size());
    std::unordered_set<std::uint64_t> seen;
    seen.reserve(raw.size() * 2);
    for (const auto& r : raw) {
        const Index s = compact[r.s], t = compact[r.t];
        if (!seen.insert(edge_key(s, t)).second)
            throw ParseError("duplicate edge (" + std::to_string(r.s) + "," + std::to_string(r.t) + ")", r.line);
        edges.push_back({s, t});
    }
    return Graph(ids.size(), std::move(edges));
}

Graph load_edge_list(const std::filesystem::path& path) { return parse_edge_list(read_file(path)); }

EdgePartition load_partition(const std::filesystem::path& path, const Graph& g) {
    const std::string text = read_file(path);
    std::vector<Index> e0;
    for_each_data_line(text, [&](std::string_view line, std::size_t line_no) {
        auto fields = split_fields(line);
        if (fields.size() != 1) throw ParseError("expected one edge index per line", line_no);
        e0.push_back(static_cast<Index>(parse_id(fields[0], line_no)));
    });
    try {
        return partition_from_matching(g, std::move(e0), true);
    } catch (const GraphError& e) {
        throw GraphError(path.string() + ": " + e.what());
    }
}

void write_partition(const std::filesystem::path& path, const EdgePartition& part) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << "# matching edge indices\n";
    for (Index e : part.e0) out << e << '\n';
}

void write_edge_list(const std::filesystem::path& path, const Graph& g) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    for (const auto& e : g.edges()) out << e.s << ',' << e.t << '\n';
}

}  // namespace gfl
