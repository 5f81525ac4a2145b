#pragma once

#include <cstdio>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "dobs/control.hpp"
#include "dobs/graph.hpp"
#include "dobs/numerics.hpp"
#include "dobs/plant.hpp"
#include "dobs/synthesis.hpp"
#include "dobs/weights.hpp"

namespace dobs {

inline constexpr const char* kToolVersion = "dobs-0.1.0";

struct ParseError : Error {
  int line;
  ParseError(int line_no, const std::string& msg)
      : Error("line " + std::to_string(line_no) + ": " + msg), line(line_no) {}
};

struct ProblemOptions {
  std::optional<std::uint64_t> seed;
  std::optional<std::vector<int>> mu;
  std::optional<std::vector<int>> nu;
  std::optional<int> restarts;
  std::optional<long> max_iters;
  std::optional<double> rank_rel_tol;
  std::optional<double> eig_sep_tol;
  std::optional<double> zero_entry_tol;
  std::optional<double> stability_margin;
  std::optional<double> noise_process;
  std::optional<double> noise_measurement;

  Tolerances tolerances() const {
    Tolerances t;
    if (rank_rel_tol) t.rank_rel_tol = *rank_rel_tol;
    if (eig_sep_tol) t.eig_sep_tol = *eig_sep_tol;
    if (zero_entry_tol) t.zero_entry_tol = *zero_entry_tol;
    if (stability_margin) t.stability_margin = *stability_margin;
    return t;
  }
};

struct ProblemFile {
  DirectedGraph graph;
  Plant plant;
  ProblemOptions options;
};

struct SolutionFile {
  std::string version = kToolVersion;
  std::uint64_t master_seed = 0;
  Tolerances tol;
  WeightMatrix W;
  GainSet gains;
  double observer_radius = 0;
  bool fixed_mode_free = false;
  std::optional<DecoupledControllerSet> controller;
  std::optional<double> controller_radius;
};

namespace io_detail {

struct Line {
  int number = 0;
  std::vector<std::string> tokens;
};

class Lexer {
 public:
  explicit Lexer(std::istream& in) : in_(in) {}

  // Next non-empty, non-comment line, split on whitespace.
  std::optional<Line> next() {
    std::string raw;
    while (std::getline(in_, raw)) {
      ++line_no_;
      const auto hash = raw.find('#');
      if (hash != std::string::npos) raw.erase(hash);
      std::istringstream ss(raw);
      Line line;
      line.number = line_no_;
      std::string token;
      while (ss >> token) line.tokens.push_back(token);
      if (!line.tokens.empty()) return line;
    }
    return std::nullopt;
  }

  Line require(const std::string& context) {
    auto line = next();
    if (!line) throw ParseError(line_no_, "unexpected end of file while reading " + context);
    return *line;
  }

  int current_line() const { return line_no_; }

 private:
  std::istream& in_;
  int line_no_ = 0;
};

inline double parse_double(const Line& line, const std::string& token) {
  std::size_t consumed = 0;
  double value = 0;
  try {
    value = std::stod(token, &consumed);
  } catch (const std::exception&) {
    throw ParseError(line.number, "expected a number, got '" + token + "'");
  }
  if (consumed != token.size())
    throw ParseError(line.number, "trailing characters in number '" + token + "'");
  return value;
}

inline long parse_long(const Line& line, const std::string& token) {
  std::size_t consumed = 0;
  long value = 0;
  try {
    value = std::stol(token, &consumed);
  } catch (const std::exception&) {
    throw ParseError(line.number, "expected an integer, got '" + token + "'");
  }
  if (consumed != token.size())
    throw ParseError(line.number, "trailing characters in integer '" + token + "'");
  return value;
}

// Reads rows of numbers until '}'. The opening brace is already consumed;
// an inline '{}' yields zero rows.
inline std::vector<std::vector<double>> read_matrix_rows(Lexer& lex, const std::string& what) {
  std::vector<std::vector<double>> rows;
  while (true) {
    const Line line = lex.require(what);
    if (line.tokens.size() == 1 && line.tokens[0] == "}") break;
    std::vector<double> row;
    for (const std::string& token : line.tokens) {
      if (token == "}")
        throw ParseError(line.number, "'}' must stand on its own line inside " + what);
      row.push_back(parse_double(line, token));
    }
    if (!rows.empty() && row.size() != rows.front().size())
      throw ParseError(line.number, what + ": inconsistent row width");
    rows.push_back(std::move(row));
  }
  return rows;
}

// Handles both "name {" and "name {}" openings; returns true when the block
// was empty-inline.
inline bool open_block(const Line& line, const std::string& what) {
  const std::string& last = line.tokens.back();
  if (last == "{}") return true;
  if (last == "{") return false;
  throw ParseError(line.number, what + ": expected '{' or '{}'");
}

inline Matrix rows_to_matrix(const std::vector<std::vector<double>>& rows, Eigen::Index cols_hint) {
  if (rows.empty()) return Matrix(0, cols_hint);
  Matrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (std::size_t c = 0; c < rows[r].size(); ++c)
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
  return m;
}

inline void write_matrix(std::ostream& out, const Matrix& m, const std::string& indent) {
  char buf[64];
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    out << indent;
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      std::snprintf(buf, sizeof(buf), "%.17g", m(r, c));
      out << (c ? " " : "") << buf;
    }
    out << "\n";
  }
}

inline void write_block(std::ostream& out, const std::string& name, const Matrix& m,
                        const std::string& indent) {
  if (m.rows() == 0 || m.cols() == 0) {
    out << indent << name << " {}\n";
    return;
  }
  out << indent << name << " {\n";
  write_matrix(out, m, indent + "  ");
  out << indent << "}\n";
}

}  // namespace io_detail

inline ProblemFile parse_problem(std::istream& in) {
  using io_detail::Lexer;
  using io_detail::Line;
  Lexer lex(in);

  std::optional<DirectedGraph> graph;
  std::optional<Matrix> A;
  int declared_n = -1;
  std::vector<std::pair<int, std::vector<std::vector<double>>>> h_raw;
  std::vector<std::pair<int, std::vector<std::vector<double>>>> b_raw;
  ProblemOptions options;

  while (auto top = lex.next()) {
    const Line& line = *top;
    const std::string& head = line.tokens[0];
    if (head == "graph") {
      if (io_detail::open_block(line, "graph")) throw ParseError(line.number, "graph: block cannot be empty");
      int m = -1;
      std::set<std::pair<int, int>> edges;
      while (true) {
        const Line item = lex.require("graph");
        if (item.tokens[0] == "}") break;
        if (item.tokens[0] == "m" && item.tokens.size() == 2) {
          m = static_cast<int>(io_detail::parse_long(item, item.tokens[1]));
        } else if (item.tokens[0] == "edge" && item.tokens.size() == 3) {
          edges.insert({static_cast<int>(io_detail::parse_long(item, item.tokens[1])),
                        static_cast<int>(io_detail::parse_long(item, item.tokens[2]))});
        } else {
          throw ParseError(item.number, "graph: expected 'm <count>' or 'edge <from> <to>'");
        }
      }
      if (m < 1) throw ParseError(line.number, "graph: vertex count missing");
      try {
        graph = make_graph(m, edges);
      } catch (const std::invalid_argument& e) {
        throw ParseError(line.number, e.what());
      }
    } else if (head == "plant") {
      if (io_detail::open_block(line, "plant")) throw ParseError(line.number, "plant: block cannot be empty");
      while (true) {
        const Line item = lex.require("plant");
        if (item.tokens[0] == "}") break;
        if (item.tokens[0] == "n" && item.tokens.size() == 2) {
          declared_n = static_cast<int>(io_detail::parse_long(item, item.tokens[1]));
        } else if (item.tokens[0] == "A" && item.tokens.size() == 2) {
          const bool empty = io_detail::open_block(item, "A");
          A = io_detail::rows_to_matrix(
              empty ? std::vector<std::vector<double>>{} : io_detail::read_matrix_rows(lex, "A"), 0);
        } else if ((item.tokens[0] == "H" || item.tokens[0] == "B") && item.tokens.size() == 3) {
          const int index = static_cast<int>(io_detail::parse_long(item, item.tokens[1]));
          const bool empty = io_detail::open_block(item, item.tokens[0]);
          auto rows = empty ? std::vector<std::vector<double>>{}
                            : io_detail::read_matrix_rows(lex, item.tokens[0]);
          if (item.tokens[0] == "H")
            h_raw.push_back({index, std::move(rows)});
          else
            b_raw.push_back({index, std::move(rows)});
        } else {
          throw ParseError(item.number, "plant: expected 'n', 'A { ... }', 'H <i> { ... }', or 'B <i> { ... }'");
        }
      }
    } else if (head == "options") {
      if (io_detail::open_block(line, "options")) continue;
      while (true) {
        const Line item = lex.require("options");
        const std::string& key = item.tokens[0];
        if (key == "}") break;
        auto ints_after = [&]() {
          std::vector<int> vals;
          for (std::size_t i = 1; i < item.tokens.size(); ++i)
            vals.push_back(static_cast<int>(io_detail::parse_long(item, item.tokens[i])));
          if (vals.empty()) throw ParseError(item.number, "options: '" + key + "' needs a value");
          return vals;
        };
        if (key == "seed")
          options.seed = static_cast<std::uint64_t>(io_detail::parse_long(item, item.tokens.at(1)));
        else if (key == "mu")
          options.mu = ints_after();
        else if (key == "nu")
          options.nu = ints_after();
        else if (key == "restarts")
          options.restarts = static_cast<int>(io_detail::parse_long(item, item.tokens.at(1)));
        else if (key == "max_iters")
          options.max_iters = io_detail::parse_long(item, item.tokens.at(1));
        else if (key == "rank_rel_tol")
          options.rank_rel_tol = io_detail::parse_double(item, item.tokens.at(1));
        else if (key == "eig_sep_tol")
          options.eig_sep_tol = io_detail::parse_double(item, item.tokens.at(1));
        else if (key == "zero_entry_tol")
          options.zero_entry_tol = io_detail::parse_double(item, item.tokens.at(1));
        else if (key == "stability_margin")
          options.stability_margin = io_detail::parse_double(item, item.tokens.at(1));
        else if (key == "noise_process")
          options.noise_process = io_detail::parse_double(item, item.tokens.at(1));
        else if (key == "noise_measurement")
          options.noise_measurement = io_detail::parse_double(item, item.tokens.at(1));
        else
          throw ParseError(item.number, "options: unknown key '" + key + "'");
      }
    } else {
      throw ParseError(line.number, "expected 'graph', 'plant', or 'options', got '" + head + "'");
    }
  }

  if (!graph) throw ParseError(lex.current_line(), "missing graph section");
  if (!A) throw ParseError(lex.current_line(), "missing plant matrix A");
  if (declared_n >= 0 && (A->rows() != declared_n || A->cols() != declared_n))
    throw ParseError(lex.current_line(), "plant: A dimensions disagree with declared n");
  if (A->rows() != A->cols()) throw ParseError(lex.current_line(), "plant: A must be square");
  const Eigen::Index n = A->rows();

  std::vector<Matrix> H(static_cast<std::size_t>(graph->m), Matrix(0, n));
  std::vector<bool> h_seen(static_cast<std::size_t>(graph->m), false);
  for (auto& [index, rows] : h_raw) {
    if (index < 1 || index > graph->m)
      throw ParseError(lex.current_line(), "plant: H index " + std::to_string(index) + " out of range");
    Matrix h = io_detail::rows_to_matrix(rows, n);
    if (h.rows() > 0 && h.cols() != n)
      throw ParseError(lex.current_line(), "plant: H " + std::to_string(index) + " must have n columns");
    if (h.rows() == 0) h = Matrix(0, n);
    H[static_cast<std::size_t>(index - 1)] = std::move(h);
    h_seen[static_cast<std::size_t>(index - 1)] = true;
  }
  for (int i = 0; i < graph->m; ++i)
    if (!h_seen[static_cast<std::size_t>(i)])
      throw ParseError(lex.current_line(), "plant: missing H block " + std::to_string(i + 1));

  std::optional<std::vector<Matrix>> B;
  if (!b_raw.empty()) {
    std::vector<Matrix> blocks(static_cast<std::size_t>(graph->m), Matrix(n, 0));
    for (auto& [index, rows] : b_raw) {
      if (index < 1 || index > graph->m)
        throw ParseError(lex.current_line(), "plant: B index " + std::to_string(index) + " out of range");
      Matrix b = io_detail::rows_to_matrix(rows, 0);
      if (b.rows() == 0) b = Matrix(n, 0);
      if (b.rows() != n)
        throw ParseError(lex.current_line(), "plant: B " + std::to_string(index) + " must have n rows");
      blocks[static_cast<std::size_t>(index - 1)] = std::move(b);
    }
    B = std::move(blocks);
  }

  ProblemFile file{*graph, make_plant(*A, std::move(H), std::move(B)), options};
  if (file.options.mu && file.options.mu->size() == 1)
    file.options.mu = std::vector<int>(static_cast<std::size_t>(file.graph.m), file.options.mu->front());
  if (file.options.nu && file.options.nu->size() == 1)
    file.options.nu = std::vector<int>(static_cast<std::size_t>(file.graph.m), file.options.nu->front());
  if (file.options.mu && static_cast<int>(file.options.mu->size()) != file.graph.m)
    throw ParseError(lex.current_line(), "options: mu needs 1 or m values");
  if (file.options.nu && static_cast<int>(file.options.nu->size()) != file.graph.m)
    throw ParseError(lex.current_line(), "options: nu needs 1 or m values");
  return file;
}

inline ProblemFile parse_problem_path(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open problem file: " + path);
  return parse_problem(in);
}

inline void serialize_problem(const ProblemFile& file, std::ostream& out) {
  char buf[64];
  auto num = [&](double v) {
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return std::string(buf);
  };
  out << "graph {\n  m " << file.graph.m << "\n";
  for (const auto& [from, to] : file.graph.edges) out << "  edge " << from << " " << to << "\n";
  out << "}\n";
  out << "plant {\n  n " << file.plant.n() << "\n";
  io_detail::write_block(out, "A", file.plant.A, "  ");
  for (int i = 1; i <= file.plant.m(); ++i)
    io_detail::write_block(out, "H " + std::to_string(i),
                           file.plant.H_blocks[static_cast<std::size_t>(i - 1)], "  ");
  if (file.plant.B_blocks)
    for (int i = 1; i <= file.plant.m(); ++i)
      io_detail::write_block(out, "B " + std::to_string(i),
                             (*file.plant.B_blocks)[static_cast<std::size_t>(i - 1)], "  ");
  out << "}\n";

  const ProblemOptions& o = file.options;
  std::ostringstream body;
  if (o.seed) body << "  seed " << *o.seed << "\n";
  auto list = [&](const char* name, const std::optional<std::vector<int>>& vals) {
    if (!vals) return;
    body << "  " << name;
    for (int v : *vals) body << " " << v;
    body << "\n";
  };
  list("mu", o.mu);
  list("nu", o.nu);
  if (o.restarts) body << "  restarts " << *o.restarts << "\n";
  if (o.max_iters) body << "  max_iters " << *o.max_iters << "\n";
  if (o.rank_rel_tol) body << "  rank_rel_tol " << num(*o.rank_rel_tol) << "\n";
  if (o.eig_sep_tol) body << "  eig_sep_tol " << num(*o.eig_sep_tol) << "\n";
  if (o.zero_entry_tol) body << "  zero_entry_tol " << num(*o.zero_entry_tol) << "\n";
  if (o.stability_margin) body << "  stability_margin " << num(*o.stability_margin) << "\n";
  if (o.noise_process) body << "  noise_process " << num(*o.noise_process) << "\n";
  if (o.noise_measurement) body << "  noise_measurement " << num(*o.noise_measurement) << "\n";
  const std::string text = body.str();
  if (!text.empty()) out << "options {\n" << text << "}\n";
}

inline void serialize_solution(const SolutionFile& sol, std::ostream& out) {
  char buf[64];
  auto num = [&](double v) {
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return std::string(buf);
  };
  const int m = static_cast<int>(sol.gains.mu.size());
  out << "solution {\n";
  out << "  version " << sol.version << "\n";
  out << "  master_seed " << sol.master_seed << "\n";
  out << "  tolerances {\n";
  out << "    rank_rel_tol " << num(sol.tol.rank_rel_tol) << "\n";
  out << "    eig_sep_tol " << num(sol.tol.eig_sep_tol) << "\n";
  out << "    zero_entry_tol " << num(sol.tol.zero_entry_tol) << "\n";
  out << "    stability_margin " << num(sol.tol.stability_margin) << "\n";
  out << "  }\n";
  io_detail::write_block(out, "W", sol.W.W, "  ");
  if (sol.W.layout) {
    out << "  layout {\n    permuted";
    for (int v : sol.W.layout->permuted_vertices) out << " " << v;
    out << "\n";
    for (const auto& [lo, hi] : sol.W.layout->source_ranges)
      out << "    source_range " << lo << " " << hi << "\n";
    out << "    nonsource_range " << sol.W.layout->nonsource_range.first << " "
        << sol.W.layout->nonsource_range.second << "\n  }\n";
  }
  if (sol.W.alphas) {
    out << "  alphas";
    for (double a : *sol.W.alphas) out << " " << num(a);
    out << "\n";
  }
  out << "  mu";
  for (int v : sol.gains.mu) out << " " << v;
  out << "\n";
  for (int i = 1; i <= m; ++i) {
    const auto idx = static_cast<std::size_t>(i - 1);
    io_detail::write_block(out, "K " + std::to_string(i), sol.gains.K[idx], "  ");
    io_detail::write_block(out, "P " + std::to_string(i), sol.gains.P[idx], "  ");
    io_detail::write_block(out, "Q " + std::to_string(i), sol.gains.Q[idx], "  ");
    io_detail::write_block(out, "S " + std::to_string(i), sol.gains.S[idx], "  ");
  }
  out << "  certificate {\n";
  out << "    observer_radius " << num(sol.observer_radius) << "\n";
  out << "    fixed_mode_free " << (sol.fixed_mode_free ? 1 : 0) << "\n";
  out << "  }\n";
  if (sol.controller) {
    out << "  controller {\n    nu";
    for (int v : sol.controller->nu) out << " " << v;
    out << "\n";
    for (int i = 1; i <= m; ++i) {
      const auto idx = static_cast<std::size_t>(i - 1);
      io_detail::write_block(out, "Kd " + std::to_string(i), sol.controller->Kd[idx], "    ");
      io_detail::write_block(out, "Pd " + std::to_string(i), sol.controller->Pd[idx], "    ");
      io_detail::write_block(out, "Qd " + std::to_string(i), sol.controller->Qd[idx], "    ");
      io_detail::write_block(out, "Sd " + std::to_string(i), sol.controller->Sd[idx], "    ");
    }
    if (sol.controller_radius) out << "    closed_loop_radius " << num(*sol.controller_radius) << "\n";
    out << "  }\n";
  }
  out << "}\n";
}

// The solution parser needs the problem's dimensions to shape empty blocks.
inline SolutionFile parse_solution(std::istream& in, const Plant& plant) {
  using io_detail::Lexer;
  using io_detail::Line;
  Lexer lex(in);
  const Eigen::Index n = plant.n();
  const int m = plant.m();

  SolutionFile sol;
  sol.gains.mu.assign(static_cast<std::size_t>(m), 0);
  sol.gains.K.assign(static_cast<std::size_t>(m), Matrix());
  sol.gains.P.assign(static_cast<std::size_t>(m), Matrix());
  sol.gains.Q.assign(static_cast<std::size_t>(m), Matrix());
  sol.gains.S.assign(static_cast<std::size_t>(m), Matrix());

  const Line opening = lex.require("solution");
  if (opening.tokens[0] != "solution" || io_detail::open_block(opening, "solution"))
    throw ParseError(opening.number, "expected 'solution {'");

  std::optional<DecoupledControllerSet> controller;
  std::optional<double> controller_radius;

  while (true) {
    const Line item = lex.require("solution");
    const std::string& key = item.tokens[0];
    if (key == "}") break;
    if (key == "version" && item.tokens.size() == 2) {
      sol.version = item.tokens[1];
    } else if (key == "master_seed" && item.tokens.size() == 2) {
      sol.master_seed = static_cast<std::uint64_t>(io_detail::parse_long(item, item.tokens[1]));
    } else if (key == "tolerances") {
      if (io_detail::open_block(item, "tolerances")) continue;
      while (true) {
        const Line t = lex.require("tolerances");
        if (t.tokens[0] == "}") break;
        const double v = io_detail::parse_double(t, t.tokens.at(1));
        if (t.tokens[0] == "rank_rel_tol") sol.tol.rank_rel_tol = v;
        else if (t.tokens[0] == "eig_sep_tol") sol.tol.eig_sep_tol = v;
        else if (t.tokens[0] == "zero_entry_tol") sol.tol.zero_entry_tol = v;
        else if (t.tokens[0] == "stability_margin") sol.tol.stability_margin = v;
        else throw ParseError(t.number, "tolerances: unknown key '" + t.tokens[0] + "'");
      }
    } else if (key == "W") {
      io_detail::open_block(item, "W");
      sol.W.W = io_detail::rows_to_matrix(io_detail::read_matrix_rows(lex, "W"), m);
      if (sol.W.W.rows() != m || sol.W.W.cols() != m)
        throw ParseError(item.number, "W must be m x m");
    } else if (key == "layout") {
      if (io_detail::open_block(item, "layout")) continue;
      BlockLayout layout;
      while (true) {
        const Line t = lex.require("layout");
        if (t.tokens[0] == "}") break;
        if (t.tokens[0] == "permuted") {
          for (std::size_t i = 1; i < t.tokens.size(); ++i)
            layout.permuted_vertices.push_back(static_cast<int>(io_detail::parse_long(t, t.tokens[i])));
        } else if (t.tokens[0] == "source_range" && t.tokens.size() == 3) {
          layout.source_ranges.push_back({static_cast<int>(io_detail::parse_long(t, t.tokens[1])),
                                          static_cast<int>(io_detail::parse_long(t, t.tokens[2]))});
        } else if (t.tokens[0] == "nonsource_range" && t.tokens.size() == 3) {
          layout.nonsource_range = {static_cast<int>(io_detail::parse_long(t, t.tokens[1])),
                                    static_cast<int>(io_detail::parse_long(t, t.tokens[2]))};
        } else {
          throw ParseError(t.number, "layout: unknown entry '" + t.tokens[0] + "'");
        }
      }
      sol.W.layout = std::move(layout);
    } else if (key == "alphas") {
      std::vector<double> alphas;
      for (std::size_t i = 1; i < item.tokens.size(); ++i)
        alphas.push_back(io_detail::parse_double(item, item.tokens[i]));
      sol.W.alphas = std::move(alphas);
    } else if (key == "mu") {
      if (item.tokens.size() != static_cast<std::size_t>(m) + 1)
        throw ParseError(item.number, "mu needs m values");
      for (int i = 0; i < m; ++i)
        sol.gains.mu[static_cast<std::size_t>(i)] =
            static_cast<int>(io_detail::parse_long(item, item.tokens[static_cast<std::size_t>(i) + 1]));
    } else if ((key == "K" || key == "P" || key == "Q" || key == "S") && item.tokens.size() == 3) {
      const int index = static_cast<int>(io_detail::parse_long(item, item.tokens[1]));
      if (index < 1 || index > m) throw ParseError(item.number, "gain index out of range");
      const auto idx = static_cast<std::size_t>(index - 1);
      const Eigen::Index mu_i = sol.gains.mu[idx];
      const Eigen::Index r_i = plant.r(index);
      const bool empty = io_detail::open_block(item, key);
      auto rows = empty ? std::vector<std::vector<double>>{}
                        : io_detail::read_matrix_rows(lex, key);
      Matrix g = io_detail::rows_to_matrix(rows, 0);
      if (key == "K") {
        if (g.size() == 0) g = Matrix::Zero(n, r_i);
        sol.gains.K[idx] = g;
      } else if (key == "P") {
        if (g.size() == 0) g = Matrix::Zero(n, mu_i);
        sol.gains.P[idx] = g;
      } else if (key == "Q") {
        if (g.size() == 0) g = Matrix::Zero(mu_i, r_i);
        sol.gains.Q[idx] = g;
      } else {
        if (g.size() == 0) g = Matrix::Zero(mu_i, mu_i);
        sol.gains.S[idx] = g;
      }
    } else if (key == "certificate") {
      if (io_detail::open_block(item, "certificate")) continue;
      while (true) {
        const Line t = lex.require("certificate");
        if (t.tokens[0] == "}") break;
        if (t.tokens[0] == "observer_radius")
          sol.observer_radius = io_detail::parse_double(t, t.tokens.at(1));
        else if (t.tokens[0] == "fixed_mode_free")
          sol.fixed_mode_free = io_detail::parse_long(t, t.tokens.at(1)) != 0;
        else
          throw ParseError(t.number, "certificate: unknown key '" + t.tokens[0] + "'");
      }
    } else if (key == "controller") {
      if (io_detail::open_block(item, "controller")) continue;
      DecoupledControllerSet d;
      d.nu.assign(static_cast<std::size_t>(m), 0);
      d.Kd.assign(static_cast<std::size_t>(m), Matrix());
      d.Pd.assign(static_cast<std::size_t>(m), Matrix());
      d.Qd.assign(static_cast<std::size_t>(m), Matrix());
      d.Sd.assign(static_cast<std::size_t>(m), Matrix());
      while (true) {
        const Line t = lex.require("controller");
        const std::string& ckey = t.tokens[0];
        if (ckey == "}") break;
        if (ckey == "nu") {
          if (t.tokens.size() != static_cast<std::size_t>(m) + 1)
            throw ParseError(t.number, "nu needs m values");
          for (int i = 0; i < m; ++i)
            d.nu[static_cast<std::size_t>(i)] =
                static_cast<int>(io_detail::parse_long(t, t.tokens[static_cast<std::size_t>(i) + 1]));
        } else if (ckey == "closed_loop_radius") {
          controller_radius = io_detail::parse_double(t, t.tokens.at(1));
        } else if ((ckey == "Kd" || ckey == "Pd" || ckey == "Qd" || ckey == "Sd") &&
                   t.tokens.size() == 3) {
          const int index = static_cast<int>(io_detail::parse_long(t, t.tokens[1]));
          if (index < 1 || index > m) throw ParseError(t.number, "controller gain index out of range");
          const auto idx = static_cast<std::size_t>(index - 1);
          const Eigen::Index nu_i = d.nu[idx];
          const Eigen::Index p_i = plant.p(index);
          const bool empty = io_detail::open_block(t, ckey);
          auto rows = empty ? std::vector<std::vector<double>>{}
                            : io_detail::read_matrix_rows(lex, ckey);
          Matrix g = io_detail::rows_to_matrix(rows, 0);
          if (ckey == "Kd") {
            if (g.size() == 0) g = Matrix::Zero(p_i, n);
            d.Kd[idx] = g;
          } else if (ckey == "Pd") {
            if (g.size() == 0) g = Matrix::Zero(p_i, nu_i);
            d.Pd[idx] = g;
          } else if (ckey == "Qd") {
            if (g.size() == 0) g = Matrix::Zero(nu_i, n);
            d.Qd[idx] = g;
          } else {
            if (g.size() == 0) g = Matrix::Zero(nu_i, nu_i);
            d.Sd[idx] = g;
          }
        } else {
          throw ParseError(t.number, "controller: unknown entry '" + ckey + "'");
        }
      }
      controller = std::move(d);
    } else {
      throw ParseError(item.number, "solution: unknown entry '" + key + "'");
    }
  }

  sol.controller = std::move(controller);
  sol.controller_radius = controller_radius;
  validate_gains(plant, sol.gains);
  return sol;
}

inline SolutionFile parse_solution_path(const std::string& path, const Plant& plant) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open solution file: " + path);
  return parse_solution(in, plant);
}

}  // namespace dobs
