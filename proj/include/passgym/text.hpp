// SPDX-License-Identifier: Apache-2.0

#ifndef PASSGYM_TEXT_HPP
#define PASSGYM_TEXT_HPP

#include <filesystem>
#include <string>
#include <string_view>

#include "passgym/graph.hpp"

namespace passgym::ir {

// Textual graph format, one node per line:
//
//   %<id> = f32[<d0>,<d1>,...] <opkind>(<operand-list>) [<attr>={...}]
//   ROOT %<id>
//
// Attr encodings: literal={v0,v1,...} (row-major), perm={...}, dims={...},
// reduce={...}. '#' starts a comment; blank lines are ignored. Files use the
// .mg extension, UTF-8.
//
// emit_text prints node ids as stored; parse_text renumbers ids to their
// topological positions, so parse(emit(g)) equals g up to id
// canonicalization and emit(parse(t)) reproduces canonical text t.
std::string emit_text(const Graph& graph);

// Throws ParseError with a 1-based line number on syntax, arity, or
// shape-rule errors.
Graph parse_text(std::string_view text, std::string name = "");

Graph read_graph_file(const std::filesystem::path& path);
void write_graph_file(const Graph& graph, const std::filesystem::path& path);

// Shortest round-trip decimal form of a double (to_chars), used everywhere a
// float is printed so emitted text is canonical.
std::string format_double(double value);

}  // namespace passgym::ir

#endif  // PASSGYM_TEXT_HPP
