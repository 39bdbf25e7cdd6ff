#pragma once

#include <cstddef>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace gfl {

using Index = std::size_t;

/// Raised by the text readers; carries the 1-based line number of the
/// offending input (0 when the problem is not tied to a single line).
class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& what, std::size_t line)
        : std::runtime_error(line ? what + " (line " + std::to_string(line) + ")" : what), line_(line) {}
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

class GraphError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

struct Edge {
    Index s;
    Index t;
    friend bool operator==(const Edge&, const Edge&) = default;
};

/// Undirected simple graph with edges kept in insertion order.
///
/// The stored order is canonical: greedy matching and every edge-indexed
/// solver array follow it, so results are reproducible for a given input.
class Graph {
public:
    Graph() = default;

    /// Throws GraphError on self-loops, out-of-range endpoints and duplicate
    /// edges (in either orientation).
    Graph(Index num_vertices, std::vector<Edge> edges);

    Index num_vertices() const noexcept { return n_; }
    Index num_edges() const noexcept { return edges_.size(); }
    const std::vector<Edge>& edges() const noexcept { return edges_; }
    const Edge& edge(Index e) const { return edges_[e]; }

    /// Indices of the edges touching vertex v, in edge order.
    const std::vector<Index>& incident(Index v) const { return adjacency_[v]; }
    Index degree(Index v) const { return adjacency_[v].size(); }

private:
    Index n_ = 0;
    std::vector<Edge> edges_;
    std::vector<std::vector<Index>> adjacency_;
};

/// Split of the edge set into a matching `e0` and the remainder `e1`.
struct EdgePartition {
    std::vector<Index> e0;
    std::vector<Index> e1;
    /// d[i] = number of e1 edges incident to vertex i.
    std::vector<Index> d;
    /// True when the partition came from outside (file, caller). Maximality
    /// of e0 is then reported by `is_maximal` but not required.
    bool user_supplied = false;

    /// matched[i] is true iff vertex i is an endpoint of some e0 edge.
    std::vector<bool> matched_vertices(const Graph& g) const;
};

/// Greedy maximal matching: scan edges in stored order, keep an edge when
/// neither endpoint is already matched.
EdgePartition greedy_matching(const Graph& g);

/// Partition with an empty matching (every edge in e1).
EdgePartition empty_partition(const Graph& g);

/// Builds a partition from an explicit list of matching edge indices.
/// Throws GraphError if the indices are out of range, repeated, or if two
/// listed edges share a vertex.
EdgePartition partition_from_matching(const Graph& g, std::vector<Index> e0, bool user_supplied = true);

/// Checks every partition invariant except maximality; throws GraphError.
void validate_partition(const Graph& g, const EdgePartition& part);

/// True if every e1 edge shares a vertex with some e0 edge.
bool is_maximal(const Graph& g, const EdgePartition& part);

/// Path 0-1-...-(n-1) with edges in path order.
Graph chain_graph(Index n);

/// rows x cols 4-neighbour lattice, vertex id r*cols + c. Edge order: all
/// horizontal edges row by row, then all vertical edges row by row.
Graph grid_graph(Index rows, Index cols);

/// Grid graph plus the alternating-row matching: in every row the horizontal
/// edges (2k, 2k+1). With the edge order of `grid_graph` this coincides with
/// the greedy matching.
std::pair<Graph, EdgePartition> grid_partition(Index rows, Index cols);

/// Reads an edge list: one edge per line, two non-negative integers separated
/// by a comma and/or whitespace, '#' starts a comment line. Vertex ids are
/// compacted to 0..n-1 preserving numeric order.
Graph load_edge_list(const std::filesystem::path& path);
Graph parse_edge_list(const std::string& text);

/// One e0 edge index per line ('#' comments allowed).
EdgePartition load_partition(const std::filesystem::path& path, const Graph& g);
void write_partition(const std::filesystem::path& path, const EdgePartition& part);

void write_edge_list(const std::filesystem::path& path, const Graph& g);

}  // namespace gfl
