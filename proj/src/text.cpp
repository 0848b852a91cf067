// SPDX-License-Identifier: Apache-2.0

#include "passgym/text.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <unordered_map>

#include "passgym/error.hpp"

namespace passgym::ir {

std::string format_double(double value) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

namespace {

void emit_int_list(std::ostringstream& os, std::string_view key,
                   const std::vector<int64_t>& values) {
  os << ' ' << key << "={";
  for (size_t i = 0; i < values.size(); ++i) {
    if (i) os << ',';
    os << values[i];
  }
  os << '}';
}

struct Cursor {
  std::string_view s;
  size_t pos = 0;
  int line = 0;

  void skip_ws() {
    while (pos < s.size() && (s[pos] == ' ' || s[pos] == '\t')) ++pos;
  }
  bool eof() {
    skip_ws();
    return pos >= s.size();
  }
  char peek() {
    skip_ws();
    return pos < s.size() ? s[pos] : '\0';
  }
  void expect(char c, const std::string& what) {
    skip_ws();
    if (pos >= s.size() || s[pos] != c) {
      throw ParseError(line, "expected '" + std::string(1, c) + "' " + what);
    }
    ++pos;
  }
  bool accept(char c) {
    skip_ws();
    if (pos < s.size() && s[pos] == c) {
      ++pos;
      return true;
    }
    return false;
  }
  int64_t parse_int(const std::string& what) {
    skip_ws();
    int64_t v = 0;
    auto res = std::from_chars(s.data() + pos, s.data() + s.size(), v);
    if (res.ec != std::errc()) throw ParseError(line, "expected integer " + what);
    pos = static_cast<size_t>(res.ptr - s.data());
    return v;
  }
  double parse_double(const std::string& what) {
    skip_ws();
    double v = 0;
    auto res = std::from_chars(s.data() + pos, s.data() + s.size(), v);
    if (res.ec != std::errc()) throw ParseError(line, "expected number " + what);
    pos = static_cast<size_t>(res.ptr - s.data());
    return v;
  }
  std::string parse_ident() {
    skip_ws();
    size_t start = pos;
    while (pos < s.size() && (std::isalnum(static_cast<unsigned char>(s[pos])) || s[pos] == '_')) {
      ++pos;
    }
    return std::string(s.substr(start, pos - start));
  }
};

std::vector<int64_t> parse_int_list(Cursor& c) {
  std::vector<int64_t> out;
  c.expect('{', "to open list");
  if (!c.accept('}')) {
    out.push_back(c.parse_int("in list"));
    while (c.accept(',')) out.push_back(c.parse_int("in list"));
    c.expect('}', "to close list");
  }
  return out;
}

std::vector<double> parse_double_list(Cursor& c) {
  std::vector<double> out;
  c.expect('{', "to open list");
  if (!c.accept('}')) {
    out.push_back(c.parse_double("in list"));
    while (c.accept(',')) out.push_back(c.parse_double("in list"));
    c.expect('}', "to close list");
  }
  return out;
}

}  // namespace

std::string emit_text(const Graph& graph) {
  std::ostringstream os;
  for (const Node& node : graph.nodes) {
    os << '%' << node.id << " = f32[";
    for (size_t i = 0; i < node.shape.dims.size(); ++i) {
      if (i) os << ',';
      os << node.shape.dims[i];
    }
    os << "] " << op_kind_name(node.kind) << '(';
    for (size_t i = 0; i < node.operands.size(); ++i) {
      if (i) os << ", ";
      os << '%' << node.operands[i];
    }
    os << ')';
    switch (node.kind) {
      case OpKind::Constant: {
        os << " literal={";
        for (size_t i = 0; i < node.attrs.literal.size(); ++i) {
          if (i) os << ',';
          os << format_double(node.attrs.literal[i]);
        }
        os << '}';
        break;
      }
      case OpKind::Transpose:
        emit_int_list(os, "perm", node.attrs.perm);
        break;
      case OpKind::Reshape:
      case OpKind::Broadcast:
        emit_int_list(os, "dims", node.attrs.dims);
        break;
      case OpKind::ReduceSum:
        emit_int_list(os, "reduce", node.attrs.reduce);
        break;
      default:
        break;
    }
    os << '\n';
  }
  os << "ROOT %" << graph.root << '\n';
  return os.str();
}

Graph parse_text(std::string_view text, std::string name) {
  GraphBuilder builder;
  std::unordered_map<int64_t, int64_t> id_map;  // source id -> position
  bool saw_root = false;
  int64_t root = -1;

  int line_no = 0;
  size_t start = 0;
  while (start <= text.size()) {
    size_t end = text.find('\n', start);
    std::string_view raw = text.substr(start, end == std::string_view::npos ? end : end - start);
    start = end == std::string_view::npos ? text.size() + 1 : end + 1;
    ++line_no;

    if (size_t hash = raw.find('#'); hash != std::string_view::npos) {
      raw = raw.substr(0, hash);
    }
    Cursor c{raw, 0, line_no};
    if (c.eof()) continue;
    if (saw_root) throw ParseError(line_no, "content after ROOT line");

    if (c.peek() != '%') {
      // ROOT %<id>
      std::string word = c.parse_ident();
      if (word != "ROOT") throw ParseError(line_no, "expected node definition or ROOT");
      c.expect('%', "before root id");
      int64_t src = c.parse_int("root id");
      auto it = id_map.find(src);
      if (it == id_map.end()) {
        throw ParseError(line_no, "root references undefined node %" + std::to_string(src));
      }
      root = it->second;
      saw_root = true;
      if (!c.eof()) throw ParseError(line_no, "trailing characters after ROOT");
      continue;
    }

    c.expect('%', "before node id");
    int64_t src_id = c.parse_int("node id");
    if (src_id < 0) throw ParseError(line_no, "negative node id");
    if (id_map.count(src_id)) {
      throw ParseError(line_no, "duplicate node id %" + std::to_string(src_id));
    }
    c.expect('=', "after node id");

    std::string type = c.parse_ident();
    if (type != "f32") throw ParseError(line_no, "unknown dtype '" + type + "'");
    c.expect('[', "to open shape");
    std::vector<int64_t> dims;
    if (!c.accept(']')) {
      dims.push_back(c.parse_int("shape dim"));
      while (c.accept(',')) dims.push_back(c.parse_int("shape dim"));
      c.expect(']', "to close shape");
    }

    std::string kind_name = c.parse_ident();
    auto kind = op_kind_from_name(kind_name);
    if (!kind) throw ParseError(line_no, "unknown operation '" + kind_name + "'");

    c.expect('(', "to open operands");
    std::vector<int64_t> operands;
    if (!c.accept(')')) {
      do {
        c.expect('%', "before operand id");
        int64_t src = c.parse_int("operand id");
        auto it = id_map.find(src);
        if (it == id_map.end()) {
          throw ParseError(line_no, "operand %" + std::to_string(src) +
                                        " is not defined earlier");
        }
        operands.push_back(it->second);
      } while (c.accept(','));
      c.expect(')', "to close operands");
    }

    NodeAttrs attrs;
    while (!c.eof()) {
      std::string key = c.parse_ident();
      c.expect('=', "after attr name");
      if (key == "literal") {
        attrs.literal = parse_double_list(c);
      } else if (key == "perm") {
        attrs.perm = parse_int_list(c);
      } else if (key == "dims") {
        attrs.dims = parse_int_list(c);
      } else if (key == "reduce") {
        attrs.reduce = parse_int_list(c);
      } else {
        throw ParseError(line_no, "unknown attr '" + key + "'");
      }
      c.accept(',');
    }

    try {
      int64_t pos = builder.emit_declared(*kind, std::move(operands), make_shape(dims),
                                          std::move(attrs));
      id_map[src_id] = pos;
    } catch (const DataError& e) {
      throw ParseError(line_no, e.what());
    }
  }

  if (!saw_root) throw ParseError(line_no, "missing ROOT line");
  return builder.build(root, std::move(name));
}

Graph read_graph_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open graph file: " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_text(buf.str(), path.stem().string());
}

void write_graph_file(const Graph& graph, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write graph file: " + path.string());
  out << emit_text(graph);
  if (!out) throw DataError("write failed: " + path.string());
}

}  // namespace passgym::ir
